//! Elman recurrent network with ReLU hidden units.
//!
//! Per timestep, with `h_0 = 0`:
//!
//! ```text
//! a_t = w_ih * x_t + w_hh * h_{t-1} + b_h
//! h_t = mask_t ⊙ relu(a_t)
//! y_t = w_ho · h_t + b_o
//! ```
//!
//! `mask_t` is an inverted-dropout mask in training mode and all ones in
//! evaluation mode. [`DropoutSite::Output`] instead carries `relu(a_t)`
//! unmasked and applies the mask only on the way to `y_t`. Everything is
//! `f64`.

mod adam;
mod bptt;
mod forward;
mod gradcheck;
mod params;
mod train;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use bptt::bptt;
pub use forward::{forward, mse_loss, sample_mask, DropoutSite, ForwardTrace, Mode};
pub use gradcheck::{finite_difference_grad, max_relative_error, relative_error};
pub use params::{init_params, Gradients, RnnParams, TENSOR_NAMES};
pub use train::{train, train_with_progress, TrainConfig, TrainReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RnnError {
    #[error("hidden size must be at least 1, got {0}")]
    InvalidHiddenSize(usize),
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("shape mismatch in {tensor}: expected {expected} entries, found {found}")]
    ShapeMismatch { tensor: &'static str, expected: usize, found: usize },
    #[error("keep probability {0} outside (0, 1]")]
    InvalidKeepProb(f64),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite parameter {tensor}[{index}]")]
    NonFiniteParameter { tensor: &'static str, index: usize },
    #[error("non-finite gradient in {tensor}[{index}]")]
    NonFiniteGradient { tensor: &'static str, index: usize },
    #[error("non-finite loss at epoch {epoch}, block {block}")]
    NonFiniteLoss { epoch: usize, block: usize },
    #[error("training set is empty")]
    EmptyTrainSet,
}
