//! Single-layer LSTM encoder.
//!
//! Per step, with input embedding `v` and previous state `(h, m)`:
//!
//! ```text
//! cell = W_w v + U_w h + b_w
//! g_s  = σ(W_s v + U_s h + b_s)        s ∈ {i, f, o}
//! m'   = cell ⊙ g_i + m ⊙ g_f
//! h'   = g_o ⊙ tanh(m')
//! ```
//!
//! The sentence-final memory `m_N` (not `h_N`) is projected to the target
//! space: `output = act(P m_N + p)`.

use super::gradients::Gradients;
use super::{OutputNonlinearity, TensorView, INPUT_EMBEDDINGS};
use crate::error::{Error, Result};
use crate::tensor::{all_finite, sigmoid, Matrix, Real};

pub(super) const GATE_NAMES: [[&str; 3]; 4] = [
    ["cell.input_weights", "cell.recurrent_weights", "cell.bias"],
    ["input_gate.input_weights", "input_gate.recurrent_weights", "input_gate.bias"],
    ["forget_gate.input_weights", "forget_gate.recurrent_weights", "forget_gate.bias"],
    ["output_gate.input_weights", "output_gate.recurrent_weights", "output_gate.bias"],
];

/// Weights of one internal layer: `W v + U h + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateWeights<T> {
    /// hidden_dim × input_dim
    pub input: Matrix<T>,
    /// hidden_dim × hidden_dim
    pub recurrent: Matrix<T>,
    pub bias: Vec<T>,
}

impl<T: Real> GateWeights<T> {
    fn pre_activation(&self, v: &[T], h: &[T]) -> Vec<T> {
        let mut z = self.bias.clone();
        self.input.matvec_acc(v, &mut z);
        self.recurrent.matvec_acc(h, &mut z);
        z
    }

    fn cast<U: Real>(&self) -> GateWeights<U> {
        GateWeights {
            input: self.input.cast(),
            recurrent: self.recurrent.cast(),
            bias: self.bias.iter().map(|&x| x.cast()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParameters<T> {
    pub input_embeddings: Matrix<T>,
    pub cell: GateWeights<T>,
    pub input_gate: GateWeights<T>,
    pub forget_gate: GateWeights<T>,
    pub output_gate: GateWeights<T>,
    /// target_dim × hidden_dim
    pub projection: Matrix<T>,
    pub projection_bias: Vec<T>,
}

/// Output state `h` and internal memory `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState<T> {
    pub h: Vec<T>,
    pub m: Vec<T>,
}

impl<T: Real> LstmState<T> {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            h: vec![T::zero(); hidden_dim],
            m: vec![T::zero(); hidden_dim],
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct StepCache<T> {
    id: usize,
    prev: LstmState<T>,
    cell: Vec<T>,
    gi: Vec<T>,
    gf: Vec<T>,
    go: Vec<T>,
    tanh_m: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct LstmTrace<T> {
    pub(crate) steps: Vec<StepCache<T>>,
    pub(crate) memory: Vec<T>,
    pub(crate) output: Vec<T>,
}

/// One recurrence step from `state` on input vector `input`.
pub fn lstm_step<T: Real>(
    params: &LstmParameters<T>,
    state: &LstmState<T>,
    input: &[T],
) -> Result<LstmState<T>> {
    let hidden = params.cell.bias.len();
    if input.len() != params.cell.input.cols() {
        return Err(Error::DimensionMismatch {
            expected: params.cell.input.cols(),
            actual: input.len(),
        });
    }
    if state.h.len() != hidden || state.m.len() != hidden {
        return Err(Error::DimensionMismatch {
            expected: hidden,
            actual: state.h.len().max(state.m.len()),
        });
    }
    if !all_finite(input) || !all_finite(&state.h) || !all_finite(&state.m) {
        return Err(Error::NonFinite("lstm step input".into()));
    }
    Ok(params.step(usize::MAX, state, input).0)
}

impl<T: Real> LstmParameters<T> {
    fn hidden_dim(&self) -> usize {
        self.cell.bias.len()
    }

    fn gates(&self) -> [&GateWeights<T>; 4] {
        [&self.cell, &self.input_gate, &self.forget_gate, &self.output_gate]
    }

    fn step(&self, id: usize, prev: &LstmState<T>, v: &[T]) -> (LstmState<T>, StepCache<T>) {
        let cell = self.cell.pre_activation(v, &prev.h);
        let sig = |g: &GateWeights<T>| -> Vec<T> {
            g.pre_activation(v, &prev.h).into_iter().map(sigmoid).collect()
        };
        let gi = sig(&self.input_gate);
        let gf = sig(&self.forget_gate);
        let go = sig(&self.output_gate);
        let n = self.hidden_dim();
        let mut m = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        let mut tanh_m = Vec::with_capacity(n);
        for j in 0..n {
            let mj = cell[j] * gi[j] + prev.m[j] * gf[j];
            let tj = mj.tanh();
            m.push(mj);
            tanh_m.push(tj);
            h.push(go[j] * tj);
        }
        let next = LstmState { h, m };
        let cache = StepCache {
            id,
            prev: prev.clone(),
            cell,
            gi,
            gf,
            go,
            tanh_m,
        };
        (next, cache)
    }

    pub(super) fn forward(&self, ids: &[usize], act: OutputNonlinearity) -> Result<LstmTrace<T>> {
        let mut state = LstmState::zeros(self.hidden_dim());
        let mut steps = Vec::with_capacity(ids.len());
        for &id in ids {
            let (next, cache) = self.step(id, &state, self.input_embeddings.row(id));
            steps.push(cache);
            state = next;
        }
        if !all_finite(&state.m) {
            return Err(Error::NonFinite("lstm memory state".into()));
        }
        let mut z = self.projection_bias.clone();
        self.projection.matvec_acc(&state.m, &mut z);
        let output = z.into_iter().map(|x| act.apply(x)).collect();
        Ok(LstmTrace {
            steps,
            memory: state.m,
            output,
        })
    }

    /// Backpropagation through time.
    pub(super) fn backward(
        &self,
        trace: &LstmTrace<T>,
        output_grad: &[T],
        act: OutputNonlinearity,
        grads: &mut Gradients<T>,
    ) {
        let n = self.hidden_dim();
        let input_dim = self.input_embeddings.cols();

        // Output projection.
        let dz: Vec<T> = output_grad
            .iter()
            .zip(&trace.output)
            .map(|(&g, &y)| g * act.derivative_from_output(y))
            .collect();
        {
            let d_proj = grads.get_mut("projection").dense_mut();
            for (r, &g) in dz.iter().enumerate() {
                for (w, &m) in d_proj[r * n..(r + 1) * n].iter_mut().zip(&trace.memory) {
                    *w = *w + g * m;
                }
            }
        }
        crate::tensor::add_assign(grads.get_mut("projection_bias").dense_mut(), &dz);

        let mut dm = vec![T::zero(); n];
        self.projection.matvec_t_acc(&dz, &mut dm);
        let mut dh = vec![T::zero(); n];

        let gates = self.gates();
        let mut d_input: Vec<Matrix<T>> = (0..4).map(|_| Matrix::zeros(n, input_dim)).collect();
        let mut d_recurrent: Vec<Matrix<T>> = (0..4).map(|_| Matrix::zeros(n, n)).collect();
        let mut d_bias: Vec<Vec<T>> = vec![vec![T::zero(); n]; 4];
        let mut dz_gates: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); n]);

        for step in trace.steps.iter().rev() {
            let one = T::one();
            for j in 0..n {
                // h = g_o ⊙ tanh(m)
                let t = step.tanh_m[j];
                let dm_j = dm[j] + dh[j] * step.go[j] * (one - t * t);
                let dgo = dh[j] * t;
                // m = cell ⊙ g_i + m_prev ⊙ g_f
                let dcell = dm_j * step.gi[j];
                let dgi = dm_j * step.cell[j];
                let dgf = dm_j * step.prev.m[j];
                dz_gates[0][j] = dcell;
                dz_gates[1][j] = dgi * step.gi[j] * (one - step.gi[j]);
                dz_gates[2][j] = dgf * step.gf[j] * (one - step.gf[j]);
                dz_gates[3][j] = dgo * step.go[j] * (one - step.go[j]);
                dm[j] = dm_j * step.gf[j];
            }

            let v = self.input_embeddings.row(step.id);
            let mut dv = vec![T::zero(); input_dim];
            dh.iter_mut().for_each(|x| *x = T::zero());
            for g in 0..4 {
                d_input[g].add_outer(&dz_gates[g], v);
                d_recurrent[g].add_outer(&dz_gates[g], &step.prev.h);
                crate::tensor::add_assign(&mut d_bias[g], &dz_gates[g]);
                gates[g].input.matvec_t_acc(&dz_gates[g], &mut dv);
                gates[g].recurrent.matvec_t_acc(&dz_gates[g], &mut dh);
            }
            grads.get_mut(INPUT_EMBEDDINGS).add_row(step.id, &dv);
        }

        for (g, names) in GATE_NAMES.iter().enumerate() {
            crate::tensor::add_assign(grads.get_mut(names[0]).dense_mut(), d_input[g].as_slice());
            crate::tensor::add_assign(
                grads.get_mut(names[1]).dense_mut(),
                d_recurrent[g].as_slice(),
            );
            crate::tensor::add_assign(grads.get_mut(names[2]).dense_mut(), &d_bias[g]);
        }
    }

    pub(super) fn tensors(&self) -> Vec<TensorView<'_, T>> {
        let mut out = vec![TensorView {
            name: INPUT_EMBEDDINGS,
            rows: self.input_embeddings.rows(),
            cols: self.input_embeddings.cols(),
            data: self.input_embeddings.as_slice(),
        }];
        for (gate, names) in self.gates().into_iter().zip(GATE_NAMES) {
            out.push(TensorView {
                name: names[0],
                rows: gate.input.rows(),
                cols: gate.input.cols(),
                data: gate.input.as_slice(),
            });
            out.push(TensorView {
                name: names[1],
                rows: gate.recurrent.rows(),
                cols: gate.recurrent.cols(),
                data: gate.recurrent.as_slice(),
            });
            out.push(TensorView {
                name: names[2],
                rows: gate.bias.len(),
                cols: 1,
                data: &gate.bias,
            });
        }
        out.push(TensorView {
            name: "projection",
            rows: self.projection.rows(),
            cols: self.projection.cols(),
            data: self.projection.as_slice(),
        });
        out.push(TensorView {
            name: "projection_bias",
            rows: self.projection_bias.len(),
            cols: 1,
            data: &self.projection_bias,
        });
        out
    }

    pub(super) fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        let mut out: Vec<(&'static str, &mut [T])> =
            vec![(INPUT_EMBEDDINGS, self.input_embeddings.as_mut_slice())];
        let gates = [
            &mut self.cell,
            &mut self.input_gate,
            &mut self.forget_gate,
            &mut self.output_gate,
        ];
        for (gate, names) in gates.into_iter().zip(GATE_NAMES) {
            out.push((names[0], gate.input.as_mut_slice()));
            out.push((names[1], gate.recurrent.as_mut_slice()));
            out.push((names[2], gate.bias.as_mut_slice()));
        }
        out.push(("projection", self.projection.as_mut_slice()));
        out.push(("projection_bias", self.projection_bias.as_mut_slice()));
        out
    }

    pub(super) fn cast<U: Real>(&self) -> LstmParameters<U> {
        LstmParameters {
            input_embeddings: self.input_embeddings.cast(),
            cell: self.cell.cast(),
            input_gate: self.input_gate.cast(),
            forget_gate: self.forget_gate.cast(),
            output_gate: self.output_gate.cast(),
            projection: self.projection.cast(),
            projection_bias: self.projection_bias.iter().map(|&x| x.cast()).collect(),
        }
    }
}
