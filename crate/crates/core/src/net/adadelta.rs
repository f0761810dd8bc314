//! Adadelta with a learning-rate multiplier.
//!
//! Per element, with gradient `g`:
//!
//! ```text
//! E[g²]  ← ρ·E[g²] + (1-ρ)·g²
//! Δ      = -lr · sqrt(E[Δ²] + ε) / sqrt(E[g²] + ε) · g
//! E[Δ²]  ← ρ·E[Δ²] + (1-ρ)·Δ²
//! θ      ← θ + Δ
//! ```

use crate::error::{Error, Result};
use crate::net::{ParamSet, TrainConfig};

/// Running averages for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub sq_grad: Vec<f64>,
    pub sq_update: Vec<f64>,
}

impl Accumulator {
    pub fn zeros(n: usize) -> Self {
        Accumulator {
            sq_grad: vec![0.0; n],
            sq_update: vec![0.0; n],
        }
    }
}

/// Optimizer state for a whole [`ParamSet`], aligned with [`ParamSet::named`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    slots: Vec<Accumulator>,
}

impl AdadeltaState {
    pub fn new(params: &ParamSet) -> Self {
        AdadeltaState {
            slots: params
                .named()
                .iter()
                .map(|(_, t)| Accumulator::zeros(t.len()))
                .collect(),
        }
    }

    pub fn slots(&self) -> &[Accumulator] {
        &self.slots
    }
}

/// Applies one update to a flat parameter slice in place.
pub fn adadelta_update(
    param: &mut [f64],
    grad: &[f64],
    acc: &mut Accumulator,
    cfg: &TrainConfig,
) {
    let (rho, eps, lr) = (cfg.rho, cfg.epsilon, cfg.learning_rate);
    for (((p, &g), eg), ex) in param
        .iter_mut()
        .zip(grad)
        .zip(acc.sq_grad.iter_mut())
        .zip(acc.sq_update.iter_mut())
    {
        *eg = rho * *eg + (1.0 - rho) * g * g;
        let delta = -lr * ((*ex + eps).sqrt() / (*eg + eps).sqrt()) * g;
        *ex = rho * *ex + (1.0 - rho) * delta * delta;
        *p += delta;
    }
}

/// One optimizer step over every tensor of `params`.
pub fn adadelta_step(
    params: &mut ParamSet,
    grads: &ParamSet,
    state: &mut AdadeltaState,
    cfg: &TrainConfig,
) -> Result<()> {
    let pairs = params.named_mut();
    let grads = grads.named();
    if pairs.len() != grads.len() || pairs.len() != state.slots.len() {
        return Err(Error::dim("optimizer state does not match the parameter set"));
    }
    for (((name, p), (_, g)), acc) in pairs.into_iter().zip(grads).zip(&mut state.slots) {
        if p.shape() != g.shape() {
            return Err(Error::dim(format!("{name}: gradient shape mismatch")));
        }
        adadelta_update(p.data_mut(), g.data(), acc, cfg);
    }
    Ok(())
}
