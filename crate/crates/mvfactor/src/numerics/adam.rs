//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::mlp::{MlpParams, MlpSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamHyper {
    pub fn with_lr(lr: f64) -> Self {
        AdamHyper {
            lr,
            ..AdamHyper::default()
        }
    }
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators mirroring the parameter shapes, plus the
/// step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub first_moment: MlpParams,
    pub second_moment: MlpParams,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(spec: &MlpSpec, hyper: AdamHyper) -> Self {
        AdamState {
            first_moment: MlpParams::zeros(spec),
            second_moment: MlpParams::zeros(spec),
            t: 0,
            hyper,
        }
    }
}

fn adam_update(p: &mut f64, g: f64, m: &mut f64, v: &mut f64, h: &AdamHyper, t: u64) {
    *m = h.beta1 * *m + (1.0 - h.beta1) * g;
    *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
    let m_hat = *m / (1.0 - h.beta1.powi(t as i32));
    let v_hat = *v / (1.0 - h.beta2.powi(t as i32));
    *p -= h.lr * m_hat / (v_hat.sqrt() + h.epsilon);
}

/// One bias-corrected Adam step; increments the step counter by exactly 1.
pub fn adam_step(params: &mut MlpParams, grads: &MlpParams, state: &mut AdamState) -> Result<()> {
    if state.hyper.lr <= 0.0 {
        return Err(Error::Input(format!(
            "adam lr must be > 0, got {}",
            state.hyper.lr
        )));
    }
    if params.layers.len() != grads.layers.len() {
        return Err(Error::dimension("adam_step", "layer count mismatch"));
    }
    for (l, g) in grads.layers.iter().enumerate() {
        g.weight
            .check_finite(&format!("adam_step gradient layer {l} weight"))
            .map_err(|_| {
                Error::numeric(
                    "adam_step",
                    format!("non-finite gradient in layer {l} weight"),
                )
            })?;
        if g.bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(
                "adam_step",
                format!("non-finite gradient in layer {l} bias"),
            ));
        }
    }
    state.t += 1;
    let t = state.t;
    let h = state.hyper;
    for (l, grad_layer) in grads.layers.iter().enumerate() {
        let p = &mut params.layers[l];
        let m = &mut state.first_moment.layers[l];
        let v = &mut state.second_moment.layers[l];
        for i in 0..p.weight.data().len() {
            adam_update(
                &mut p.weight.data_mut()[i],
                grad_layer.weight.data()[i],
                &mut m.weight.data_mut()[i],
                &mut v.weight.data_mut()[i],
                &h,
                t,
            );
        }
        for i in 0..p.bias.len() {
            adam_update(
                &mut p.bias[i],
                grad_layer.bias[i],
                &mut m.bias[i],
                &mut v.bias[i],
                &h,
                t,
            );
        }
    }
    Ok(())
}
