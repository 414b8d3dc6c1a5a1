use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{RnnError, RnnParams};

/// Where the training-mode dropout mask is applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropoutSite {
    /// `h_t = mask_t ⊙ relu(a_t)`: the mask reaches both the readout and the
    /// recurrence.
    #[default]
    Hidden,
    /// `h_t = relu(a_t)` is carried unmasked; only the readout sees
    /// `mask_t ⊙ h_t`.
    Output,
}

impl FromStr for DropoutSite {
    type Err = RnnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hidden" => Ok(Self::Hidden),
            "output" => Ok(Self::Output),
            other => {
                Err(RnnError::InvalidConfig(format!("unknown dropout site {other:?} (expected `hidden` or `output`)")))
            }
        }
    }
}

impl fmt::Display for DropoutSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hidden => "hidden",
            Self::Output => "output",
        })
    }
}

/// Whether dropout is active.
pub enum Mode<'a> {
    Eval,
    Train { keep_prob: f64, site: DropoutSite, rng: &'a mut dyn RngCore },
}

/// Everything BPTT needs from a forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub inputs: Vec<f64>,
    pub site: DropoutSite,
    /// `a_t` for t = 1..=T.
    pub pre_activations: Vec<Vec<f64>>,
    /// Carried states `h_0..=h_T`; `hidden_states[0]` is the zero vector.
    pub hidden_states: Vec<Vec<f64>>,
    /// Entries are 0 or `1 / keep_prob`; all ones in eval mode.
    pub masks: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

impl ForwardTrace {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

/// Inverted-dropout mask: each unit survives with probability `keep_prob`
/// and survivors are scaled by `1 / keep_prob`.
pub fn sample_mask<R: Rng + ?Sized>(rng: &mut R, hidden_size: usize, keep_prob: f64) -> Vec<f64> {
    if keep_prob >= 1.0 {
        return vec![1.0; hidden_size];
    }
    let scale = 1.0 / keep_prob;
    (0..hidden_size).map(|_| if rng.random::<f64>() < keep_prob { scale } else { 0.0 }).collect()
}

#[inline]
pub(crate) fn relu(a: f64) -> f64 {
    if a > 0.0 {
        a
    } else {
        0.0
    }
}

pub fn forward(params: &RnnParams, inputs: &[f64], mode: Mode<'_>) -> Result<ForwardTrace, RnnError> {
    if inputs.is_empty() {
        return Err(RnnError::EmptyInput);
    }
    let h = params.hidden_size;
    let (mut dropout, site) = match mode {
        Mode::Eval => (None, DropoutSite::default()),
        Mode::Train { keep_prob, site, rng } => {
            if !(keep_prob > 0.0 && keep_prob <= 1.0) {
                return Err(RnnError::InvalidKeepProb(keep_prob));
            }
            (Some((keep_prob, rng)), site)
        }
    };

    let steps = inputs.len();
    let mut trace = ForwardTrace {
        inputs: inputs.to_vec(),
        site,
        pre_activations: Vec::with_capacity(steps),
        hidden_states: Vec::with_capacity(steps + 1),
        masks: Vec::with_capacity(steps),
        outputs: Vec::with_capacity(steps),
    };
    trace.hidden_states.push(vec![0.0; h]);

    for &x in inputs {
        let prev = trace.hidden_states.last().expect("h_0 pushed above");
        let a: Vec<f64> = (0..h)
            .map(|i| {
                let row = &params.w_hh[i * h..(i + 1) * h];
                let recurrent: f64 = row.iter().zip(prev).map(|(w, hp)| w * hp).sum();
                params.w_ih[i] * x + recurrent + params.b_h[i]
            })
            .collect();
        let mask = match dropout.as_mut() {
            Some((keep_prob, rng)) => sample_mask(&mut **rng, h, *keep_prob),
            None => vec![1.0; h],
        };
        let (hidden, y) = match site {
            DropoutSite::Hidden => {
                let hidden: Vec<f64> = a.iter().zip(&mask).map(|(&a, &m)| m * relu(a)).collect();
                let y = params.w_ho.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + params.b_o;
                (hidden, y)
            }
            DropoutSite::Output => {
                let hidden: Vec<f64> = a.iter().map(|&a| relu(a)).collect();
                let y =
                    params.w_ho.iter().zip(&hidden).zip(&mask).map(|((w, h), m)| w * (m * h)).sum::<f64>() + params.b_o;
                (hidden, y)
            }
        };

        trace.pre_activations.push(a);
        trace.masks.push(mask);
        trace.hidden_states.push(hidden);
        trace.outputs.push(y);
    }
    Ok(trace)
}

/// Mean squared error `(1/T) Σ (y_t - target_t)²`.
pub fn mse_loss(outputs: &[f64], targets: &[f64]) -> Result<f64, RnnError> {
    if outputs.len() != targets.len() {
        return Err(RnnError::LengthMismatch { expected: outputs.len(), found: targets.len() });
    }
    if outputs.is_empty() {
        return Err(RnnError::EmptyInput);
    }
    let sum: f64 = outputs.iter().zip(targets).map(|(y, t)| (y - t).powi(2)).sum();
    Ok(sum / outputs.len() as f64)
}
