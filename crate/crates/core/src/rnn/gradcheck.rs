//! Central-difference gradient, used to check [`bptt`](super::bptt).

use super::{forward, mse_loss, Gradients, Mode, RnnError, RnnParams};

fn eval_loss(params: &RnnParams, inputs: &[f64], targets: &[f64]) -> Result<f64, RnnError> {
    let trace = forward(params, inputs, Mode::Eval)?;
    mse_loss(&trace.outputs, targets)
}

/// `(L(θ + ε e_k) - L(θ - ε e_k)) / 2ε` for every parameter `k`, each from a
/// fresh eval-mode forward pass.
pub fn finite_difference_grad(
    params: &RnnParams,
    inputs: &[f64],
    targets: &[f64],
    epsilon: f64,
) -> Result<Gradients, RnnError> {
    if inputs.len() != targets.len() {
        return Err(RnnError::LengthMismatch { expected: inputs.len(), found: targets.len() });
    }
    let mut probe = params.clone();
    let mut grads = Gradients::zeros(params.hidden_size);
    for tensor in 0..5 {
        let len = params.tensors()[tensor].len();
        for k in 0..len {
            let original = probe.tensors()[tensor][k];
            probe.tensors_mut()[tensor][k] = original + epsilon;
            let up = eval_loss(&probe, inputs, targets)?;
            probe.tensors_mut()[tensor][k] = original - epsilon;
            let down = eval_loss(&probe, inputs, targets)?;
            probe.tensors_mut()[tensor][k] = original;
            grads.tensors_mut()[tensor][k] = (up - down) / (2.0 * epsilon);
        }
    }
    Ok(grads)
}

/// `|a - b| / max(|a|, |b|, 1e-12)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Largest entrywise [`relative_error`] between two gradient sets.
pub fn max_relative_error(a: &Gradients, b: &Gradients) -> f64 {
    a.tensors()
        .iter()
        .zip(b.tensors().iter())
        .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(&p, &q)| relative_error(p, q)))
        .fold(0.0, f64::max)
}
