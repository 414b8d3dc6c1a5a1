use super::{Gradients, RnnError, RnnParams, TENSOR_NAMES};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment estimates plus the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: RnnParams,
    pub v: RnnParams,
}

impl AdamState {
    pub fn new(hidden_size: usize) -> Self {
        Self { step: 0, m: RnnParams::zeros(hidden_size), v: RnnParams::zeros(hidden_size) }
    }
}

/// One bias-corrected Adam update. Parameters are untouched if any gradient
/// entry is non-finite.
pub fn adam_step(
    params: &mut RnnParams,
    grads: &Gradients,
    state: &mut AdamState,
    learning_rate: f64,
) -> Result<(), RnnError> {
    for (tensor, name) in grads.tensors().iter().zip(TENSOR_NAMES) {
        if let Some(index) = tensor.iter().position(|g| !g.is_finite()) {
            return Err(RnnError::NonFiniteGradient { tensor: name, index });
        }
    }
    let h = params.hidden_size;
    if grads.hidden_size != h || state.m.hidden_size != h || state.v.hidden_size != h {
        return Err(RnnError::ShapeMismatch { tensor: "adam", expected: h, found: grads.hidden_size });
    }

    state.step += 1;
    let t = state.step as f64;
    let correct1 = 1.0 - ADAM_BETA1.powf(t);
    let correct2 = 1.0 - ADAM_BETA2.powf(t);

    let [m_ih, m_hh, m_ho, m_bh, m_bo] = state.m.tensors_mut();
    let [v_ih, v_hh, v_ho, v_bh, v_bo] = state.v.tensors_mut();
    let moments = [(m_ih, v_ih), (m_hh, v_hh), (m_ho, v_ho), (m_bh, v_bh), (m_bo, v_bo)];
    for ((theta, g), (m, v)) in params.tensors_mut().into_iter().zip(grads.tensors()).zip(moments) {
        for k in 0..theta.len() {
            m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * g[k];
            v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * g[k] * g[k];
            let m_hat = m[k] / correct1;
            let v_hat = v[k] / correct2;
            theta[k] -= learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
        }
    }
    Ok(())
}
