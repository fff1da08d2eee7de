//! Central finite-difference verification of analytic gradients.
//!
//! The encoder is promoted to `f64` and every trainable coordinate is
//! perturbed by `±ε`:
//!
//! ```text
//! numeric = (L(x + ε) − L(x − ε)) / 2ε
//! rel     = |analytic − numeric| / max(|analytic|, |numeric|, 1e-8)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::loss::{rank_slack_grad, LossConfig, LossKind};
use super::{backward_ids, loss_value};
use crate::encoders::Encoder;
use crate::error::{Error, Result};
use crate::tensor::Real;

/// Threshold used by the CLI and the test suite.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Hinge slack closer to zero than this could change sign under a finite
/// difference step, so the negative example is nudged first.
const BOUNDARY_BAND: f64 = 1e-3;
const MAX_BOUNDARY_RETRIES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Tensor name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    pub checked: usize,
    pub loss: f64,
    /// Whether the rank-loss hinge was active (always true for cosine loss).
    pub hinge_active: bool,
    /// Times the negative vector was perturbed to move off the hinge kink.
    pub boundary_retries: usize,
    /// Largest absolute analytic gradient entry; zero on a flat hinge.
    pub max_abs_gradient: f64,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

/// Checks every trainable coordinate of `encoder` on one example.
pub fn gradient_check<T: Real, S: AsRef<str>>(
    encoder: &Encoder<T>,
    tokens: &[S],
    loss: &LossConfig,
    target: &[f32],
    negative: Option<&[f32]>,
    epsilon: f64,
) -> Result<GradCheckReport> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let mut enc: Encoder<f64> = encoder.cast();
    let (ids, _) = enc.token_ids(tokens);
    if ids.is_empty() {
        return Err(Error::NoKnownTokens);
    }
    let target: Vec<f64> = target.iter().map(|&x| x as f64).collect();
    let mut negative: Option<Vec<f64>> = negative.map(|n| n.iter().map(|&x| x as f64).collect());

    let mut retries = 0;
    let mut hinge_active = true;
    if loss.kind == LossKind::Rank {
        let neg = negative
            .as_mut()
            .ok_or_else(|| Error::invalid("rank loss needs a negative example"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(loss.negative_sampling_seed);
        loop {
            let out = enc.forward_ids(&ids)?;
            let (slack, _) = rank_slack_grad(&out, &target, neg, loss.margin)?;
            if slack.abs() >= BOUNDARY_BAND {
                hinge_active = slack > 0.0;
                break;
            }
            if retries == MAX_BOUNDARY_RETRIES {
                return Err(Error::invalid(
                    "example stays on the hinge boundary after perturbation",
                ));
            }
            retries += 1;
            log::warn!("hinge slack {slack:e} is at the boundary; perturbing the negative");
            for x in neg.iter_mut() {
                *x += rng.random_range(-0.05..0.05);
            }
        }
    }

    let neg = negative.as_deref();
    let (value, analytic) = backward_ids(&enc, &ids, loss, &target, neg)?;
    let names: Vec<(&'static str, usize)> = enc.trainable_tensors();

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        checked: 0,
        loss: value,
        hinge_active,
        boundary_retries: retries,
        max_abs_gradient: analytic.max_abs(),
    };
    for (t, &(name, len)) in names.iter().enumerate() {
        let grad = &analytic.tensors[t].data;
        for i in 0..len {
            let original = enc.trainable_tensors_mut()[t].1[i];
            enc.trainable_tensors_mut()[t].1[i] = original + epsilon;
            let plus = loss_value(&enc, &ids, loss, &target, neg)?;
            enc.trainable_tensors_mut()[t].1[i] = original - epsilon;
            let minus = loss_value(&enc, &ids, loss, &target, neg)?;
            enc.trainable_tensors_mut()[t].1[i] = original;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = grad.get(i);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            if rel > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = report.max_relative_error.max(rel);
                report.worst = Some((name.to_owned(), i));
            }
            report.checked += 1;
        }
    }
    Ok(report)
}
