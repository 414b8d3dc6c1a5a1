use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, bptt, forward, init_params, mse_loss, AdamState, DropoutSite, Mode, RnnError, RnnParams};
use crate::dataset::SplitDataset;

/// Stream of the seeded generator used for dropout masks; stream 0 is
/// initialization.
const DROPOUT_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub learning_rate: f64,
    pub dropout_keep_prob: f64,
    #[serde(default)]
    pub dropout_site: DropoutSite,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_size: 100,
            learning_rate: 0.001,
            dropout_keep_prob: 0.5,
            dropout_site: DropoutSite::Hidden,
            epochs: 1000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RnnError> {
        if self.hidden_size == 0 {
            return Err(RnnError::InvalidHiddenSize(0));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(RnnError::InvalidConfig(format!("learning_rate {} must be > 0", self.learning_rate)));
        }
        if self.epochs == 0 {
            return Err(RnnError::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.dropout_keep_prob > 0.0 && self.dropout_keep_prob <= 1.0) {
            return Err(RnnError::InvalidKeepProb(self.dropout_keep_prob));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-block training loss, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub params: RnnParams,
    pub wall_seconds: f64,
}

/// Trains on the (already scaled) training blocks.
pub fn train(dataset: &SplitDataset, config: &TrainConfig) -> Result<TrainReport, RnnError> {
    train_with_progress(dataset, config, |_, _| {})
}

/// As [`train`], calling `on_epoch(epoch, mean_loss)` after every epoch
/// (epochs counted from 1).
pub fn train_with_progress(
    dataset: &SplitDataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainReport, RnnError> {
    config.validate()?;
    if dataset.train.is_empty() {
        return Err(RnnError::EmptyTrainSet);
    }
    let started = Instant::now();
    let mut params = init_params(config.seed, config.hidden_size)?;
    let mut adam = AdamState::new(config.hidden_size);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed);
    dropout_rng.set_stream(DROPOUT_STREAM);

    let blocks: Vec<(Vec<f64>, Vec<f64>)> = dataset.train.iter().map(|b| (b.inputs(), b.targets())).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let mut total = 0.0;
        for (block, (inputs, targets)) in blocks.iter().enumerate() {
            let mode =
                Mode::Train { keep_prob: config.dropout_keep_prob, site: config.dropout_site, rng: &mut dropout_rng };
            let trace = forward(&params, inputs, mode)?;
            let loss = mse_loss(&trace.outputs, targets)?;
            if !loss.is_finite() {
                return Err(RnnError::NonFiniteLoss { epoch, block });
            }
            let grads = bptt(&params, &trace, targets)?;
            adam_step(&mut params, &grads, &mut adam, config.learning_rate)?;
            total += loss;
        }
        let mean = total / blocks.len() as f64;
        on_epoch(epoch, mean);
        epoch_losses.push(mean);
    }

    Ok(TrainReport { epoch_losses, params, wall_seconds: started.elapsed().as_secs_f64() })
}
