//! Adadelta: per-coordinate step sizes from running averages of squared
//! gradients and squared updates. There is no learning rate.
//!
//! ```text
//! E[g²]  ← ρ E[g²] + (1 − ρ) g²
//! Δx     = −√(E[Δx²] + ε) / √(E[g²] + ε) · g
//! E[Δx²] ← ρ E[Δx²] + (1 − ρ) Δx²
//! x      ← x + Δx
//! ```

use serde::{Deserialize, Serialize};

use crate::encoders::{Encoder, Gradients};
use crate::error::{Error, Result};
use crate::tensor::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adadelta {
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for Adadelta {
    fn default() -> Self {
        Adadelta {
            rho: 0.95,
            epsilon: 1e-6,
        }
    }
}

/// One coordinate update; returns the applied `Δx`.
pub fn adadelta_step<T: Real>(x: &mut T, g: T, sq_grad: &mut T, sq_update: &mut T, rho: T, eps: T) -> T {
    let one = T::one();
    *sq_grad = rho * *sq_grad + (one - rho) * g * g;
    let dx = -((*sq_update + eps).sqrt() / (*sq_grad + eps).sqrt()) * g;
    *sq_update = rho * *sq_update + (one - rho) * dx * dx;
    *x = *x + dx;
    dx
}

#[derive(Clone, Debug)]
struct Slot<T> {
    name: &'static str,
    sq_grad: Vec<T>,
    sq_update: Vec<T>,
}

/// Accumulators for every trainable tensor of one encoder.
#[derive(Clone, Debug)]
pub struct OptimizerState<T> {
    rho: T,
    epsilon: T,
    slots: Vec<Slot<T>>,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(encoder: &Encoder<T>, hyper: Adadelta) -> Self {
        OptimizerState {
            rho: T::lit(hyper.rho),
            epsilon: T::lit(hyper.epsilon),
            slots: encoder
                .trainable_tensors()
                .into_iter()
                .map(|(name, len)| Slot {
                    name,
                    sq_grad: vec![T::zero(); len],
                    sq_update: vec![T::zero(); len],
                })
                .collect(),
        }
    }

    /// Running average of squared gradients for the named tensor.
    pub fn sq_grad(&self, name: &str) -> Option<&[T]> {
        self.slots.iter().find(|s| s.name == name).map(|s| &s.sq_grad[..])
    }

    /// Running average of squared updates for the named tensor.
    pub fn sq_update(&self, name: &str) -> Option<&[T]> {
        self.slots.iter().find(|s| s.name == name).map(|s| &s.sq_update[..])
    }

    /// Applies one update to every trainable tensor. Coordinates without a
    /// gradient entry take `g = 0` (parameters stay, accumulators decay).
    /// Non-finite gradients are rejected before anything is modified.
    pub fn update(&mut self, encoder: &mut Encoder<T>, grads: &Gradients<T>) -> Result<()> {
        if !grads.all_finite() {
            return Err(Error::NonFinite("gradient".into()));
        }
        let mut tensors = encoder.trainable_tensors_mut();
        if tensors.len() != self.slots.len() || grads.tensors.len() != self.slots.len() {
            return Err(Error::invalid("gradient/optimizer tensor count mismatch"));
        }
        for ((slot, (name, params)), grad) in self.slots.iter_mut().zip(&mut tensors).zip(&grads.tensors) {
            if slot.name != *name || grad.name != *name || params.len() != slot.sq_grad.len() {
                return Err(Error::invalid(format!("shape mismatch for tensor `{name}`")));
            }
            for (i, x) in params.iter_mut().enumerate() {
                adadelta_step(
                    x,
                    grad.data.get(i),
                    &mut slot.sq_grad[i],
                    &mut slot.sq_update[i],
                    self.rho,
                    self.epsilon,
                );
            }
        }
        Ok(())
    }
}

/// Free-function form of [`OptimizerState::update`].
pub fn adadelta_update<T: Real>(
    encoder: &mut Encoder<T>,
    grads: &Gradients<T>,
    state: &mut OptimizerState<T>,
) -> Result<()> {
    state.update(encoder, grads)
}
