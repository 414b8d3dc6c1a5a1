use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dataset::DEFAULT_SPLIT_RATIO;
use crate::forecast::{CONTEXT_HOURS, DEFAULT_HORIZON};
use crate::rnn::{DropoutSite, TrainConfig};

pub const DEFAULT_MODEL_PATH: &str = "thermocast-model.json";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("config line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: invalid value {value:?} for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("invalid setting: {0}")]
    Invalid(String),
}

/// A partial set of settings from one source (flags or a config file).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub input_path: Option<PathBuf>,
    pub model_path: Option<PathBuf>,
    pub hidden_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub dropout_keep_prob: Option<f64>,
    pub dropout_site: Option<DropoutSite>,
    pub epochs: Option<usize>,
    pub split_ratio: Option<f64>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub context_hours: Option<usize>,
    pub single_window: Option<bool>,
    pub out_path: Option<PathBuf>,
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_path: Option<PathBuf>,
    pub model_path: PathBuf,
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub dropout_keep_prob: f64,
    pub dropout_site: DropoutSite,
    pub epochs: usize,
    pub split_ratio: f64,
    pub horizon: usize,
    pub seed: u64,
    pub context_hours: usize,
    pub single_window: bool,
    pub out_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            input_path: None,
            model_path: PathBuf::from(DEFAULT_MODEL_PATH),
            hidden_size: train.hidden_size,
            learning_rate: train.learning_rate,
            dropout_keep_prob: train.dropout_keep_prob,
            dropout_site: train.dropout_site,
            epochs: train.epochs,
            split_ratio: DEFAULT_SPLIT_RATIO,
            horizon: DEFAULT_HORIZON,
            seed: train.seed,
            context_hours: CONTEXT_HOURS,
            single_window: false,
            out_path: None,
        }
    }
}

impl RunConfig {
    /// Flag value, else file value, else default.
    pub fn resolve(flags: &Settings, file: &Settings) -> Result<Self, ConfigError> {
        let d = Self::default();
        macro_rules! pick {
            ($field:ident) => {
                flags.$field.clone().or_else(|| file.$field.clone())
            };
        }
        let config = Self {
            input_path: pick!(input_path),
            model_path: pick!(model_path).unwrap_or(d.model_path),
            hidden_size: pick!(hidden_size).unwrap_or(d.hidden_size),
            learning_rate: pick!(learning_rate).unwrap_or(d.learning_rate),
            dropout_keep_prob: pick!(dropout_keep_prob).unwrap_or(d.dropout_keep_prob),
            dropout_site: pick!(dropout_site).unwrap_or(d.dropout_site),
            epochs: pick!(epochs).unwrap_or(d.epochs),
            split_ratio: pick!(split_ratio).unwrap_or(d.split_ratio),
            horizon: pick!(horizon).unwrap_or(d.horizon),
            seed: pick!(seed).unwrap_or(d.seed),
            context_hours: pick!(context_hours).unwrap_or(d.context_hours),
            single_window: pick!(single_window).unwrap_or(d.single_window),
            out_path: pick!(out_path),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.train_config().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(ConfigError::Invalid(format!("split ratio {} outside (0, 1)", self.split_ratio)));
        }
        if self.horizon == 0 {
            return Err(ConfigError::Invalid("horizon must be at least 1".into()));
        }
        if self.context_hours == 0 {
            return Err(ConfigError::Invalid("context_hours must be at least 1".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            hidden_size: self.hidden_size,
            learning_rate: self.learning_rate,
            dropout_keep_prob: self.dropout_keep_prob,
            dropout_site: self.dropout_site,
            epochs: self.epochs,
            seed: self.seed,
        }
    }

    pub fn input(&self) -> Result<&Path, ConfigError> {
        self.input_path.as_deref().ok_or_else(|| ConfigError::Invalid("no input file (use --input)".into()))
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { line, key: key.into(), value: value.into() })
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_str(text: &str) -> Result<Settings, ConfigError> {
    let mut s = Settings::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "input_path" => s.input_path = Some(PathBuf::from(value)),
            "model_path" => s.model_path = Some(PathBuf::from(value)),
            "out_path" => s.out_path = Some(PathBuf::from(value)),
            "hidden_size" => s.hidden_size = Some(parse_value(line, key, value)?),
            "learning_rate" => s.learning_rate = Some(parse_value(line, key, value)?),
            "dropout_keep_prob" => s.dropout_keep_prob = Some(parse_value(line, key, value)?),
            "dropout_site" => s.dropout_site = Some(parse_value(line, key, value)?),
            "epochs" => s.epochs = Some(parse_value(line, key, value)?),
            "split_ratio" => s.split_ratio = Some(parse_value(line, key, value)?),
            "horizon" => s.horizon = Some(parse_value(line, key, value)?),
            "seed" => s.seed = Some(parse_value(line, key, value)?),
            "context_hours" => s.context_hours = Some(parse_value(line, key, value)?),
            "single_window" => s.single_window = Some(parse_value(line, key, value)?),
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
    }
    Ok(s)
}

pub fn parse_config_file(path: &Path) -> Result<Settings, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = "
# every key set to a non-default value
input_path = file.csv
model_path = file-model.json   # trailing comment
hidden_size = 16
learning_rate = 0.01
dropout_keep_prob = 0.8
dropout_site = output
epochs = 20
split_ratio = 0.6
horizon = 12
seed = 5
context_hours = 12
single_window = true
out_path = file-out.csv
";

    fn flags() -> Settings {
        Settings {
            input_path: Some("flag.csv".into()),
            model_path: Some("flag-model.json".into()),
            hidden_size: Some(8),
            learning_rate: Some(0.002),
            dropout_keep_prob: Some(0.9),
            dropout_site: Some(DropoutSite::Hidden),
            epochs: Some(3),
            split_ratio: Some(0.75),
            horizon: Some(6),
            seed: Some(9),
            context_hours: Some(6),
            single_window: Some(false),
            out_path: Some("flag-out.csv".into()),
        }
    }

    #[test]
    fn defaults_match_reference_table() {
        let c = RunConfig::resolve(&Settings::default(), &Settings::default()).unwrap();
        assert_eq!(c.hidden_size, 100);
        assert_eq!(c.learning_rate, 0.001);
        assert_eq!(c.dropout_keep_prob, 0.5);
        assert_eq!(c.dropout_site, DropoutSite::Hidden);
        assert_eq!(c.epochs, 1000);
        assert_eq!(c.split_ratio, 0.7);
        assert_eq!(c.horizon, 48);
        assert_eq!(c.seed, 0);
        assert_eq!(c.context_hours, 24);
        assert!(!c.single_window);
        assert_eq!(c.input_path, None);
    }

    #[test]
    fn file_overrides_defaults() {
        let file = parse_config_str(FILE).unwrap();
        let c = RunConfig::resolve(&Settings::default(), &file).unwrap();
        assert_eq!(c.input_path, Some("file.csv".into()));
        assert_eq!(c.model_path, PathBuf::from("file-model.json"));
        assert_eq!(c.hidden_size, 16);
        assert_eq!(c.learning_rate, 0.01);
        assert_eq!(c.dropout_keep_prob, 0.8);
        assert_eq!(c.dropout_site, DropoutSite::Output);
        assert_eq!(c.epochs, 20);
        assert_eq!(c.split_ratio, 0.6);
        assert_eq!(c.horizon, 12);
        assert_eq!(c.seed, 5);
        assert_eq!(c.context_hours, 12);
        assert!(c.single_window);
        assert_eq!(c.out_path, Some("file-out.csv".into()));
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_str(FILE).unwrap();
        let c = RunConfig::resolve(&flags(), &file).unwrap();
        assert_eq!(c.input_path, Some("flag.csv".into()));
        assert_eq!(c.model_path, PathBuf::from("flag-model.json"));
        assert_eq!(c.hidden_size, 8);
        assert_eq!(c.learning_rate, 0.002);
        assert_eq!(c.dropout_keep_prob, 0.9);
        assert_eq!(c.dropout_site, DropoutSite::Hidden);
        assert_eq!(c.epochs, 3);
        assert_eq!(c.split_ratio, 0.75);
        assert_eq!(c.horizon, 6);
        assert_eq!(c.seed, 9);
        assert_eq!(c.context_hours, 6);
        assert!(!c.single_window);
        assert_eq!(c.out_path, Some("flag-out.csv".into()));
    }

    #[test]
    fn each_field_falls_through_independently() {
        let file = parse_config_str(FILE).unwrap();
        let partial = Settings { epochs: Some(7), ..Settings::default() };
        let c = RunConfig::resolve(&partial, &file).unwrap();
        assert_eq!(c.epochs, 7);
        assert_eq!(c.hidden_size, 16);
        assert_eq!(c.horizon, 12);
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(parse_config_str("epochs 3"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(parse_config_str("\nfoo = 1"), Err(ConfigError::UnknownKey { line: 2, .. })));
        assert!(matches!(parse_config_str("epochs = many"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = Settings { epochs: Some(0), ..Settings::default() };
        assert!(RunConfig::resolve(&bad, &Settings::default()).is_err());
        let bad = Settings { horizon: Some(0), ..Settings::default() };
        assert!(RunConfig::resolve(&bad, &Settings::default()).is_err());
        let bad = Settings { split_ratio: Some(1.0), ..Settings::default() };
        assert!(RunConfig::resolve(&bad, &Settings::default()).is_err());
        let bad = Settings { dropout_keep_prob: Some(0.0), ..Settings::default() };
        assert!(RunConfig::resolve(&bad, &Settings::default()).is_err());
    }
}
