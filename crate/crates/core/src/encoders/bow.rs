//! Linear bag-of-words encoder: `output = Σ W·v_i`.
//!
//! Computed as `W · Σ v_i`, which is the same map with one projection
//! instead of one per token.

use super::gradients::Gradients;
use super::{TensorView, INPUT_EMBEDDINGS};
use crate::tensor::{add_assign, Matrix, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct BowParameters<T> {
    /// vocab × input_dim
    pub input_embeddings: Matrix<T>,
    /// target_dim × input_dim
    pub projection: Matrix<T>,
}

#[derive(Clone, Debug)]
pub struct BowTrace<T> {
    pub(crate) ids: Vec<usize>,
    pub(crate) sum: Vec<T>,
    pub(crate) output: Vec<T>,
}

impl<T: Real> BowParameters<T> {
    pub(super) fn forward(&self, ids: &[usize]) -> BowTrace<T> {
        let mut sum = vec![T::zero(); self.input_embeddings.cols()];
        for &id in ids {
            add_assign(&mut sum, self.input_embeddings.row(id));
        }
        let output = self.projection.matvec(&sum);
        BowTrace {
            ids: ids.to_vec(),
            sum,
            output,
        }
    }

    pub(super) fn backward(&self, trace: &BowTrace<T>, output_grad: &[T], grads: &mut Gradients<T>) {
        let proj = grads.get_mut("projection").dense_mut();
        let cols = self.projection.cols();
        for (r, &g) in output_grad.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            for (w, &s) in proj[r * cols..(r + 1) * cols].iter_mut().zip(&trace.sum) {
                *w = *w + g * s;
            }
        }

        let mut input_grad = vec![T::zero(); cols];
        self.projection.matvec_t_acc(output_grad, &mut input_grad);
        let emb = grads.get_mut(INPUT_EMBEDDINGS);
        for &id in &trace.ids {
            emb.add_row(id, &input_grad);
        }
    }

    pub(super) fn tensors(&self) -> Vec<TensorView<'_, T>> {
        vec![
            TensorView {
                name: INPUT_EMBEDDINGS,
                rows: self.input_embeddings.rows(),
                cols: self.input_embeddings.cols(),
                data: self.input_embeddings.as_slice(),
            },
            TensorView {
                name: "projection",
                rows: self.projection.rows(),
                cols: self.projection.cols(),
                data: self.projection.as_slice(),
            },
        ]
    }

    pub(super) fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        vec![
            (INPUT_EMBEDDINGS, self.input_embeddings.as_mut_slice()),
            ("projection", self.projection.as_mut_slice()),
        ]
    }

    pub(super) fn cast<U: Real>(&self) -> BowParameters<U> {
        BowParameters {
            input_embeddings: self.input_embeddings.cast(),
            projection: self.projection.cast(),
        }
    }
}
