use super::{DropoutSite, ForwardTrace, Gradients, RnnError, RnnParams};

/// Exact gradient of [`mse_loss`](super::mse_loss) over the traced sequence,
/// unrolled through every timestep.
///
/// Masks and the dropout site are taken from the trace, so a training-mode
/// trace yields the gradient of that particular dropout realization. The
/// ReLU derivative at `a = 0` is 0.
pub fn bptt(params: &RnnParams, trace: &ForwardTrace, targets: &[f64]) -> Result<Gradients, RnnError> {
    let steps = trace.len();
    let h = params.hidden_size;
    if targets.len() != steps {
        return Err(RnnError::LengthMismatch { expected: steps, found: targets.len() });
    }
    if steps == 0 {
        return Err(RnnError::EmptyInput);
    }
    if trace.hidden_states.len() != steps + 1
        || trace.pre_activations.len() != steps
        || trace.masks.len() != steps
        || trace.inputs.len() != steps
    {
        return Err(RnnError::ShapeMismatch { tensor: "trace", expected: steps, found: trace.inputs.len() });
    }
    if let Some(bad) = trace.hidden_states.iter().find(|s| s.len() != h) {
        return Err(RnnError::ShapeMismatch { tensor: "hidden_states", expected: h, found: bad.len() });
    }

    let mut grads = Gradients::zeros(h);
    // dL/dh_t arriving from step t+1 through w_hh
    let mut dh_next = vec![0.0; h];
    let mut da = vec![0.0; h];
    let scale = 2.0 / steps as f64;

    for t in (0..steps).rev() {
        let hidden = &trace.hidden_states[t + 1];
        let prev = &trace.hidden_states[t];
        let dy = scale * (trace.outputs[t] - targets[t]);

        let mask = &trace.masks[t];
        // mask factor on the readout path and on the carried state
        let (readout, carry) = match trace.site {
            DropoutSite::Hidden => (None, Some(mask)),
            DropoutSite::Output => (Some(mask), None),
        };

        grads.b_o += dy;
        for i in 0..h {
            let r = readout.map_or(1.0, |m| m[i]);
            grads.w_ho[i] += dy * r * hidden[i];
        }

        let x = trace.inputs[t];
        for i in 0..h {
            let r = readout.map_or(1.0, |m| m[i]);
            let dh = dy * params.w_ho[i] * r + dh_next[i];
            let gate = if trace.pre_activations[t][i] > 0.0 { carry.map_or(1.0, |m| m[i]) } else { 0.0 };
            da[i] = dh * gate;
            grads.w_ih[i] += da[i] * x;
            grads.b_h[i] += da[i];
            let row = &mut grads.w_hh[i * h..(i + 1) * h];
            for (g, hp) in row.iter_mut().zip(prev) {
                *g += da[i] * hp;
            }
        }

        dh_next.iter_mut().for_each(|v| *v = 0.0);
        for (i, &d_a) in da.iter().enumerate() {
            if d_a == 0.0 {
                continue;
            }
            let row = &params.w_hh[i * h..(i + 1) * h];
            for (d, w) in dh_next.iter_mut().zip(row) {
                *d += w * d_a;
            }
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::{finite_difference_grad, forward, init_params, max_relative_error, Mode};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_step_has_no_recurrent_gradient() {
        let p = init_params(4, 6).unwrap();
        let trace = forward(&p, &[0.7], Mode::Eval).unwrap();
        let g = bptt(&p, &trace, &[3.0]).unwrap();
        assert!(g.w_hh.iter().all(|&v| v == 0.0));
        assert!(g.b_o != 0.0);
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let p = init_params(4, 6).unwrap();
        let inputs = [0.1, 0.4, 0.9, 0.3];
        let trace = forward(&p, &inputs, Mode::Eval).unwrap();
        let g = bptt(&p, &trace, &trace.outputs).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn rejects_mismatched_targets() {
        let p = init_params(4, 3).unwrap();
        let trace = forward(&p, &[0.1, 0.2], Mode::Eval).unwrap();
        assert!(matches!(bptt(&p, &trace, &[0.0]), Err(RnnError::LengthMismatch { .. })));
        let other = init_params(4, 5).unwrap();
        assert!(bptt(&other, &trace, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn matches_finite_differences_h8_t6() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let p = init_params(17, 8).unwrap();
        let inputs: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let targets: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trace = forward(&p, &inputs, Mode::Eval).unwrap();
        let analytic = bptt(&p, &trace, &targets).unwrap();
        let numeric = finite_difference_grad(&p, &inputs, &targets, 1e-5).unwrap();
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "max relative error {err}");
    }

    /// Central differences with the dropout draw frozen: reseeding the
    /// generator before every forward pass replays the same masks.
    fn frozen_mask_fd(p: &RnnParams, inputs: &[f64], targets: &[f64], site: DropoutSite, seed: u64) -> Gradients {
        let loss = |q: &RnnParams| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = forward(q, inputs, Mode::Train { keep_prob: 0.5, site, rng: &mut rng }).unwrap();
            crate::rnn::mse_loss(&t.outputs, targets).unwrap()
        };
        let eps = 1e-5;
        let mut probe = p.clone();
        let mut g = Gradients::zeros(p.hidden_size);
        for tensor in 0..5 {
            for k in 0..p.tensors()[tensor].len() {
                let v = probe.tensors()[tensor][k];
                probe.tensors_mut()[tensor][k] = v + eps;
                let up = loss(&probe);
                probe.tensors_mut()[tensor][k] = v - eps;
                let down = loss(&probe);
                probe.tensors_mut()[tensor][k] = v;
                g.tensors_mut()[tensor][k] = (up - down) / (2.0 * eps);
            }
        }
        g
    }

    #[test]
    fn dropout_masks_enter_gradient() {
        let p = init_params(9, 6).unwrap();
        let inputs = [0.3, -0.2, 0.8, 0.5, 0.1];
        let targets = [0.5, 0.1, -0.4, 0.2, 0.9];
        for site in [DropoutSite::Hidden, DropoutSite::Output] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let trace = forward(&p, &inputs, Mode::Train { keep_prob: 0.5, site, rng: &mut rng }).unwrap();
            assert!(trace.masks.iter().flatten().any(|&m| m == 0.0));
            let analytic = bptt(&p, &trace, &targets).unwrap();
            let numeric = frozen_mask_fd(&p, &inputs, &targets, site, 3);
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-5, "{site}: max relative error {err}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn gradient_matches_oracle(seed in any::<u64>(), h in 1usize..=8, t in 1usize..=6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = init_params(seed, h).unwrap();
            let inputs: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
            let targets: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
            let trace = forward(&p, &inputs, Mode::Eval).unwrap();
            let analytic = bptt(&p, &trace, &targets).unwrap();
            let numeric = finite_difference_grad(&p, &inputs, &targets, 1e-5).unwrap();
            prop_assert!(max_relative_error(&analytic, &numeric) < 1e-5);
        }
    }
}
