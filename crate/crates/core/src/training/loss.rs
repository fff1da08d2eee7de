//! Training objectives over cosine similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{dot, norm, Real};

pub const DEFAULT_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `1 − cos(pred, target)`
    Cosine,
    /// `max(0, margin − cos(pred, target) + cos(pred, negative))`
    Rank,
}

crate::error::serde_from_str!(LossKind);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub kind: LossKind,
    pub margin: f64,
    pub negative_sampling_seed: u64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            kind: LossKind::Cosine,
            margin: DEFAULT_MARGIN,
            negative_sampling_seed: 0,
        }
    }
}

impl LossConfig {
    pub fn rank(margin: f64) -> Self {
        LossConfig {
            kind: LossKind::Rank,
            margin,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == LossKind::Rank && !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::invalid("rank loss margin must be positive"));
        }
        Ok(())
    }
}

/// Cosine of `a` and `b` with its gradient with respect to `a`.
fn cosine_with_grad<T: Real>(a: &[T], b: &[T]) -> Result<(T, Vec<T>)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            actual: a.len(),
        });
    }
    let na = norm(a);
    let nb = norm(b);
    if na == T::zero() || nb == T::zero() {
        return Err(Error::ZeroNorm);
    }
    let c = dot(a, b) / (na * nb);
    // ∂cos/∂a = b/(|a||b|) − cos · a/|a|²
    let inv = T::one() / (na * nb);
    let k = c / (na * na);
    let grad = a.iter().zip(b).map(|(&x, &y)| y * inv - k * x).collect();
    Ok((c, grad))
}

pub fn cosine_loss<T: Real>(pred: &[T], target: &[T]) -> Result<T> {
    Ok(cosine_loss_grad(pred, target)?.0)
}

pub fn rank_loss<T: Real>(pred: &[T], target: &[T], negative: &[T], margin: T) -> Result<T> {
    Ok(rank_loss_grad(pred, target, negative, margin)?.0)
}

pub(crate) fn cosine_loss_grad<T: Real>(pred: &[T], target: &[T]) -> Result<(T, Vec<T>)> {
    let (c, g) = cosine_with_grad(pred, target)?;
    Ok((T::one() - c, g.into_iter().map(|x| -x).collect()))
}

/// Hinge slack `margin − (cos_t − cos_n)`; the hinge is active iff it is
/// strictly positive, so zero slack contributes neither loss nor gradient.
pub(crate) fn rank_loss_grad<T: Real>(
    pred: &[T],
    target: &[T],
    negative: &[T],
    margin: T,
) -> Result<(T, Vec<T>)> {
    let s = rank_slack_grad(pred, target, negative, margin)?;
    if s.0 > T::zero() {
        Ok(s)
    } else {
        Ok((T::zero(), vec![T::zero(); pred.len()]))
    }
}

pub(crate) fn rank_slack_grad<T: Real>(
    pred: &[T],
    target: &[T],
    negative: &[T],
    margin: T,
) -> Result<(T, Vec<T>)> {
    let (ct, gt) = cosine_with_grad(pred, target)?;
    let (cn, gn) = cosine_with_grad(pred, negative)?;
    let slack = margin - (ct - cn);
    let grad = gt.iter().zip(&gn).map(|(&a, &b)| b - a).collect();
    Ok((slack, grad))
}

/// Loss and dL/dpred for one example.
pub(crate) fn loss_and_grad<T: Real>(
    config: &LossConfig,
    pred: &[T],
    target: &[T],
    negative: Option<&[T]>,
) -> Result<(T, Vec<T>)> {
    match config.kind {
        LossKind::Cosine => cosine_loss_grad(pred, target),
        LossKind::Rank => {
            let negative =
                negative.ok_or_else(|| Error::invalid("rank loss needs a negative example"))?;
            rank_loss_grad(pred, target, negative, T::lit(config.margin))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_at(cos: f64) -> [f64; 2] {
        [cos, (1.0 - cos * cos).sqrt()]
    }

    #[test]
    fn cosine_loss_examples() {
        let t = [0.3f64, -1.2, 2.0];
        assert!(cosine_loss(&t, &t).unwrap().abs() < 1e-15);
        let neg: Vec<f64> = t.iter().map(|x| -x).collect();
        assert!((cosine_loss(&neg, &t).unwrap() - 2.0).abs() < 1e-15);
        let l: f64 = cosine_loss(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((l - 0.292893).abs() < 1e-6);
        assert!(matches!(cosine_loss(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroNorm)));
    }

    #[test]
    fn rank_loss_examples() {
        let pred = [1.0, 0.0];
        assert_eq!(rank_loss(&pred, &[1.0, 0.0], &[0.0, 1.0], 0.1).unwrap(), 0.0);
        let l = rank_loss(&pred, &unit_at(0.4), &unit_at(0.4), 0.1).unwrap();
        assert!((l - 0.1).abs() < 1e-12);
        let l = rank_loss(&pred, &unit_at(0.3), &unit_at(0.5), 0.1).unwrap();
        assert!((l - 0.3).abs() < 1e-12);
    }

    #[test]
    fn inactive_hinge_has_zero_gradient() {
        let (l, g) = rank_loss_grad(&[1.0, 0.2], &[1.0, 0.0], &[-1.0, 0.5], 0.1).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn margin_must_be_positive() {
        assert!(LossConfig::rank(0.0).validate().is_err());
        assert!(LossConfig::rank(0.1).validate().is_ok());
        assert!(LossConfig {
            margin: -1.0,
            ..Default::default()
        }
        .validate()
        .is_ok());
    }

    proptest! {
        #[test]
        fn rank_loss_zero_iff_margin_met(
            p in prop::collection::vec(-1.0f64..1.0, 3),
            t in prop::collection::vec(-1.0f64..1.0, 3),
            n in prop::collection::vec(-1.0f64..1.0, 3),
            margin in 0.01f64..0.5,
        ) {
            let nz = |v: &Vec<f64>| v.iter().any(|x| x.abs() > 1e-3);
            prop_assume!(nz(&p) && nz(&t) && nz(&n));
            let loss = rank_loss(&p, &t, &n, margin).unwrap();
            let ct = cosine_with_grad(&p, &t).unwrap().0;
            let cn = cosine_with_grad(&p, &n).unwrap().0;
            prop_assert!(loss >= 0.0);
            prop_assert_eq!(loss == 0.0, ct - cn >= margin);
        }

        #[test]
        fn cosine_loss_in_range(
            p in prop::collection::vec(-5.0f64..5.0, 4),
            t in prop::collection::vec(-5.0f64..5.0, 4),
        ) {
            prop_assume!(p.iter().any(|x| x.abs() > 1e-3) && t.iter().any(|x| x.abs() > 1e-3));
            let l = cosine_loss(&p, &t).unwrap();
            prop_assert!((-1e-12..=2.0 + 1e-12).contains(&l));
        }
    }
}
