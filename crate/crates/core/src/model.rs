//! Versioned JSON model document.
//!
//! ```json
//! {
//!   "format": "thermocast-model",
//!   "version": 1,
//!   "hidden_size": 100,
//!   "weights": {
//!     "w_ih": { "rows": 100, "cols": 1, "data": [...] },
//!     "w_hh": { "rows": 100, "cols": 100, "data": [...] },
//!     "w_ho": { "rows": 1, "cols": 100, "data": [...] },
//!     "b_h":  { "rows": 100, "cols": 1, "data": [...] },
//!     "b_o":  { "rows": 1, "cols": 1, "data": [...] }
//!   },
//!   "scaler": { "min": 24.1, "max": 33.9 },
//!   "split_ratio": 0.7,
//!   "train_config": { "hidden_size": 100, "learning_rate": 0.001, ... }
//! }
//! ```
//!
//! `data` is row-major. Numbers are written in shortest round-trip decimal
//! form, so every `f64` reloads bit-for-bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Scaler;
use crate::rnn::{RnnError, RnnParams, TrainConfig};

pub const MODEL_FORMAT: &str = "thermocast-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a model document (format {0:?})")]
    Format(String),
    #[error("unsupported model version {found} (this build reads version {MODEL_VERSION})")]
    Version { found: u32 },
    #[error("{tensor} is {rows}x{cols} with {len} entries; expected {want_rows}x{want_cols}")]
    Shape { tensor: &'static str, rows: usize, cols: usize, len: usize, want_rows: usize, want_cols: usize },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Params(#[from] RnnError),
}

/// Everything needed to forecast with a trained network.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: RnnParams,
    pub scaler: Scaler,
    pub train_config: TrainConfig,
    pub split_ratio: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightsDoc {
    w_ih: MatrixDoc,
    w_hh: MatrixDoc,
    w_ho: MatrixDoc,
    b_h: MatrixDoc,
    b_o: MatrixDoc,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    hidden_size: usize,
    weights: WeightsDoc,
    scaler: Scaler,
    split_ratio: f64,
    train_config: TrainConfig,
}

fn matrix(rows: usize, cols: usize, data: &[f64]) -> MatrixDoc {
    MatrixDoc { rows, cols, data: data.to_vec() }
}

fn take(doc: MatrixDoc, tensor: &'static str, want_rows: usize, want_cols: usize) -> Result<Vec<f64>, ModelError> {
    if doc.rows != want_rows || doc.cols != want_cols || doc.data.len() != want_rows * want_cols {
        return Err(ModelError::Shape {
            tensor,
            rows: doc.rows,
            cols: doc.cols,
            len: doc.data.len(),
            want_rows,
            want_cols,
        });
    }
    Ok(doc.data)
}

impl Model {
    pub fn to_json(&self) -> String {
        let h = self.params.hidden_size;
        let p = &self.params;
        let doc = ModelDoc {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            hidden_size: h,
            weights: WeightsDoc {
                w_ih: matrix(h, 1, &p.w_ih),
                w_hh: matrix(h, h, &p.w_hh),
                w_ho: matrix(1, h, &p.w_ho),
                b_h: matrix(h, 1, &p.b_h),
                b_o: matrix(1, 1, &[p.b_o]),
            },
            scaler: self.scaler,
            split_ratio: self.split_ratio,
            train_config: self.train_config.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("model document serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        // Check the envelope first so a foreign document gets a clear error.
        #[derive(Deserialize)]
        struct Envelope {
            format: Option<String>,
            version: Option<u32>,
        }
        let envelope: Envelope = serde_json::from_str(text)?;
        match envelope.format.as_deref() {
            Some(MODEL_FORMAT) => {}
            other => return Err(ModelError::Format(other.unwrap_or("<missing>").to_string())),
        }
        match envelope.version {
            Some(MODEL_VERSION) => {}
            other => return Err(ModelError::Version { found: other.unwrap_or(0) }),
        }

        let doc: ModelDoc = serde_json::from_str(text)?;
        let h = doc.hidden_size;
        let w = doc.weights;
        let b_o = take(w.b_o, "b_o", 1, 1)?[0];
        let params = RnnParams {
            hidden_size: h,
            w_ih: take(w.w_ih, "w_ih", h, 1)?,
            w_hh: take(w.w_hh, "w_hh", h, h)?,
            w_ho: take(w.w_ho, "w_ho", 1, h)?,
            b_h: take(w.b_h, "b_h", h, 1)?,
            b_o,
        };
        params.validate()?;
        doc.train_config.validate()?;
        if doc.train_config.hidden_size != h {
            return Err(ModelError::Invalid(format!(
                "train_config.hidden_size {} disagrees with hidden_size {h}",
                doc.train_config.hidden_size
            )));
        }
        let scaler = Scaler::new(doc.scaler.min, doc.scaler.max)
            .map_err(|_| ModelError::Invalid(format!("scaler min {} / max {}", doc.scaler.min, doc.scaler.max)))?;
        if !(doc.split_ratio > 0.0 && doc.split_ratio < 1.0) {
            return Err(ModelError::Invalid(format!("split_ratio {}", doc.split_ratio)));
        }
        Ok(Self { params, scaler, train_config: doc.train_config, split_ratio: doc.split_ratio })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::init_params;
    use proptest::prelude::*;

    fn sample(seed: u64, h: usize) -> Model {
        let mut params = init_params(seed, h).unwrap();
        params.b_o = -0.1 / 3.0;
        params.b_h[0] = 1e-300;
        Model {
            params,
            scaler: Scaler::new(24.51, 29.63).unwrap(),
            train_config: TrainConfig { hidden_size: h, seed, ..TrainConfig::default() },
            split_ratio: 0.7,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample(3, 7);
        let back = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), m.to_json());
    }

    #[test]
    fn document_is_self_describing() {
        let json: serde_json::Value = serde_json::from_str(&sample(1, 3).to_json()).unwrap();
        assert_eq!(json["format"], MODEL_FORMAT);
        assert_eq!(json["version"], MODEL_VERSION);
        assert_eq!(json["weights"]["w_hh"]["rows"], 3);
        assert_eq!(json["weights"]["w_hh"]["data"].as_array().unwrap().len(), 9);
        assert_eq!(json["train_config"]["learning_rate"], 0.001);
        assert_eq!(json["scaler"]["min"], 24.51);
    }

    #[test]
    fn rejects_foreign_and_future_documents() {
        let text = sample(1, 2).to_json();
        assert!(matches!(Model::from_json(&text.replace(MODEL_FORMAT, "other")), Err(ModelError::Format(_))));
        assert!(matches!(
            Model::from_json(&text.replace("\"version\": 1", "\"version\": 2")),
            Err(ModelError::Version { found: 2 })
        ));
        assert!(matches!(Model::from_json("{}"), Err(ModelError::Format(_))));
        assert!(matches!(Model::from_json("not json"), Err(ModelError::Json(_))));
    }

    #[test]
    fn rejects_bad_shapes() {
        let mut value: serde_json::Value = serde_json::from_str(&sample(1, 2).to_json()).unwrap();
        value["weights"]["w_hh"]["data"].as_array_mut().unwrap().pop();
        let err = Model::from_json(&value.to_string()).unwrap_err();
        assert!(matches!(err, ModelError::Shape { tensor: "w_hh", .. }), "{err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn arbitrary_doubles_survive(values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 4)) {
            let mut m = sample(0, 1);
            m.params.w_ih[0] = values[0];
            m.params.w_hh[0] = values[1];
            m.params.w_ho[0] = values[2];
            m.params.b_o = values[3];
            let back = Model::from_json(&m.to_json()).unwrap();
            for (a, b) in back.params.tensors().iter().zip(m.params.tensors()) {
                for (x, y) in a.iter().zip(b.iter()) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
