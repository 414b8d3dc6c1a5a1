use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RnnError;

/// Names of the parameter tensors, in [`RnnParams::tensors`] order.
pub const TENSOR_NAMES: [&str; 5] = ["w_ih", "w_hh", "w_ho", "b_h", "b_o"];

/// Learnable state of the network. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    pub hidden_size: usize,
    /// H×1 input weights.
    pub w_ih: Vec<f64>,
    /// H×H recurrent weights; `w_hh[i * H + j]` carries `h_{t-1}[j]` into unit `i`.
    pub w_hh: Vec<f64>,
    /// 1×H output weights.
    pub w_ho: Vec<f64>,
    pub b_h: Vec<f64>,
    pub b_o: f64,
}

/// Gradients share the parameter layout.
pub type Gradients = RnnParams;

impl RnnParams {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            hidden_size,
            w_ih: vec![0.0; hidden_size],
            w_hh: vec![0.0; hidden_size * hidden_size],
            w_ho: vec![0.0; hidden_size],
            b_h: vec![0.0; hidden_size],
            b_o: 0.0,
        }
    }

    pub fn tensors(&self) -> [&[f64]; 5] {
        [&self.w_ih, &self.w_hh, &self.w_ho, &self.b_h, std::slice::from_ref(&self.b_o)]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 5] {
        [&mut self.w_ih, &mut self.w_hh, &mut self.w_ho, &mut self.b_h, std::slice::from_mut(&mut self.b_o)]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Checks shapes against `hidden_size` and that every entry is finite.
    pub fn validate(&self) -> Result<(), RnnError> {
        let h = self.hidden_size;
        if h == 0 {
            return Err(RnnError::InvalidHiddenSize(0));
        }
        let expected = [h, h * h, h, h, 1];
        for ((tensor, name), want) in self.tensors().iter().zip(TENSOR_NAMES).zip(expected) {
            if tensor.len() != want {
                return Err(RnnError::ShapeMismatch { tensor: name, expected: want, found: tensor.len() });
            }
            if let Some(index) = tensor.iter().position(|v| !v.is_finite()) {
                return Err(RnnError::NonFiniteParameter { tensor: name, index });
            }
        }
        Ok(())
    }
}

/// Uniform Xavier bound for a `fan_out × fan_in` matrix.
pub(crate) fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Seeded initialization: weights uniform in `[-s, s]` with
/// `s = sqrt(6 / (fan_in + fan_out))` per matrix, biases zero.
pub fn init_params(seed: u64, hidden_size: usize) -> Result<RnnParams, RnnError> {
    if hidden_size == 0 {
        return Err(RnnError::InvalidHiddenSize(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = RnnParams::zeros(hidden_size);
    let h = hidden_size;
    for (tensor, (fan_in, fan_out)) in
        [&mut params.w_ih, &mut params.w_hh, &mut params.w_ho].into_iter().zip([(1, h), (h, h), (h, 1)])
    {
        let s = xavier_bound(fan_in, fan_out);
        tensor.iter_mut().for_each(|w| *w = rng.random_range(-s..=s));
    }
    Ok(params)
}
