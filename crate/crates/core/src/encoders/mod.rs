//! Definition encoders: a linear bag-of-words model and an LSTM.
//!
//! Both map a token sequence to a vector in the target embedding space.
//! Input embeddings are either learned (randomly initialised, updated in
//! training) or copied from a pre-trained store and frozen. Unknown tokens
//! are skipped.

mod bow;
pub mod checkpoint;
mod gradients;
mod lstm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::embedding_store::EmbeddingStore;
use crate::error::{Error, Result};
use crate::tensor::{Matrix, Real};

pub use bow::BowParameters;
pub use gradients::{GradData, GradTensor, Gradients};
pub use lstm::{lstm_step, GateWeights, LstmParameters, LstmState};

pub const INPUT_EMBEDDINGS: &str = "input_embeddings";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Bow,
    Lstm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Learned,
    PretrainedFixed,
}

/// Activation applied after the LSTM output projection. The BOW encoder is
/// always linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputNonlinearity {
    Tanh,
    Identity,
}

impl OutputNonlinearity {
    fn apply<T: Real>(self, x: T) -> T {
        match self {
            OutputNonlinearity::Tanh => x.tanh(),
            OutputNonlinearity::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            OutputNonlinearity::Tanh => T::one() - y * y,
            OutputNonlinearity::Identity => T::one(),
        }
    }
}

crate::error::serde_from_str!(Architecture, InputMode, OutputNonlinearity);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub architecture: Architecture,
    pub input_mode: InputMode,
    pub input_dim: usize,
    /// Width of every LSTM internal layer. Unused by BOW.
    pub hidden_dim: usize,
    pub target_dim: usize,
    pub output_nonlinearity: OutputNonlinearity,
    pub seed: u64,
}

impl EncoderConfig {
    /// Full-size defaults: 256-d learned or 500-d pre-trained inputs, 512-d
    /// LSTM layers, 500-d target space.
    pub fn standard(architecture: Architecture, input_mode: InputMode) -> Self {
        EncoderConfig {
            architecture,
            input_mode,
            input_dim: match input_mode {
                InputMode::Learned => 256,
                InputMode::PretrainedFixed => 500,
            },
            hidden_dim: 512,
            target_dim: 500,
            output_nonlinearity: OutputNonlinearity::Tanh,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.target_dim == 0 {
            return Err(Error::invalid("encoder dimensions must be positive"));
        }
        if self.architecture == Architecture::Lstm && self.hidden_dim == 0 {
            return Err(Error::invalid("hidden_dim must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Parameters<T> {
    Bow(BowParameters<T>),
    Lstm(LstmParameters<T>),
}

/// Borrowed view of one named parameter tensor. Vectors have `cols == 1`.
#[derive(Clone, Copy, Debug)]
pub struct TensorView<'a, T> {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [T],
}

impl<T: Real> Parameters<T> {
    /// All tensors in their canonical order.
    pub fn tensors(&self) -> Vec<TensorView<'_, T>> {
        match self {
            Parameters::Bow(p) => p.tensors(),
            Parameters::Lstm(p) => p.tensors(),
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        match self {
            Parameters::Bow(p) => p.tensors_mut(),
            Parameters::Lstm(p) => p.tensors_mut(),
        }
    }

    pub fn input_embeddings(&self) -> &Matrix<T> {
        match self {
            Parameters::Bow(p) => &p.input_embeddings,
            Parameters::Lstm(p) => &p.input_embeddings,
        }
    }

    fn cast<U: Real>(&self) -> Parameters<U> {
        match self {
            Parameters::Bow(p) => Parameters::Bow(p.cast()),
            Parameters::Lstm(p) => Parameters::Lstm(p.cast()),
        }
    }
}

/// A trained or freshly initialised encoder with its vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoder<T> {
    config: EncoderConfig,
    vocab: Vocabulary,
    params: Parameters<T>,
}

/// Output of [`Encoder::encode`].
#[derive(Clone, Debug, PartialEq)]
pub struct Encoded<T> {
    pub vector: Vec<T>,
    /// Input tokens absent from the encoder vocabulary, in input order.
    pub skipped: Vec<String>,
}

/// Intermediate values of one forward pass, consumed by backpropagation.
#[derive(Clone, Debug)]
pub enum Trace<T> {
    Bow(bow::BowTrace<T>),
    Lstm(lstm::LstmTrace<T>),
}

impl<T: Real> Trace<T> {
    pub fn output(&self) -> &[T] {
        match self {
            Trace::Bow(t) => &t.output,
            Trace::Lstm(t) => &t.output,
        }
    }
}

/// Initialises an encoder.
///
/// Weight matrices (and learned input embeddings) are drawn from
/// `uniform(-1/√fan_in, 1/√fan_in)` where `fan_in` is the column count;
/// biases start at zero. In `PretrainedFixed` mode the vocabulary is the
/// token set of `input_store` and `vocab` is ignored.
pub fn init_parameters(
    config: &EncoderConfig,
    vocab: &Vocabulary,
    input_store: Option<&EmbeddingStore>,
) -> Result<Encoder<f32>> {
    config.validate()?;
    let (vocab, fixed_inputs) = match config.input_mode {
        InputMode::Learned => {
            if vocab.is_empty() {
                return Err(Error::invalid("vocabulary is empty"));
            }
            (vocab.clone(), None)
        }
        InputMode::PretrainedFixed => {
            let store = input_store.ok_or_else(|| {
                Error::invalid("pretrained_fixed input mode requires an input embedding store")
            })?;
            if store.dim() != config.input_dim {
                return Err(Error::DimensionMismatch {
                    expected: config.input_dim,
                    actual: store.dim(),
                });
            }
            let vocab = Vocabulary::from_tokens(store.tokens().iter().cloned());
            let mut m = Matrix::zeros(vocab.len(), config.input_dim);
            for (id, token) in vocab.tokens().iter().enumerate() {
                m.row_mut(id).copy_from_slice(store.vector(token).unwrap());
            }
            (vocab, Some(m))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let input_embeddings = match fixed_inputs {
        Some(m) => m,
        None => uniform_matrix(&mut rng, vocab.len(), config.input_dim),
    };
    let params = match config.architecture {
        Architecture::Bow => Parameters::Bow(BowParameters {
            input_embeddings,
            projection: uniform_matrix(&mut rng, config.target_dim, config.input_dim),
        }),
        Architecture::Lstm => {
            let mut gate = || GateWeights {
                input: uniform_matrix(&mut rng, config.hidden_dim, config.input_dim),
                recurrent: uniform_matrix(&mut rng, config.hidden_dim, config.hidden_dim),
                bias: vec![0.0; config.hidden_dim],
            };
            let cell = gate();
            let input_gate = gate();
            let forget_gate = gate();
            let output_gate = gate();
            Parameters::Lstm(LstmParameters {
                input_embeddings,
                cell,
                input_gate,
                forget_gate,
                output_gate,
                projection: uniform_matrix(&mut rng, config.target_dim, config.hidden_dim),
                projection_bias: vec![0.0; config.target_dim],
            })
        }
    };
    Ok(Encoder {
        config: config.clone(),
        vocab,
        params,
    })
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f32> {
    let bound = 1.0 / (cols as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..=bound) as f32)
        .collect();
    Matrix::from_vec(rows, cols, data)
}

impl<T: Real> Encoder<T> {
    /// Assembles an encoder from explicit parameters, checking shapes.
    pub fn from_parts(config: EncoderConfig, vocab: Vocabulary, params: Parameters<T>) -> Result<Self> {
        config.validate()?;
        let enc = Encoder {
            config,
            vocab,
            params,
        };
        enc.check_shapes()?;
        Ok(enc)
    }

    fn check_shapes(&self) -> Result<()> {
        let c = &self.config;
        let (v, i, h, t) = (self.vocab.len(), c.input_dim, c.hidden_dim, c.target_dim);
        let expected: Vec<(&str, usize, usize)> = match (&self.params, c.architecture) {
            (Parameters::Bow(_), Architecture::Bow) => {
                vec![(INPUT_EMBEDDINGS, v, i), ("projection", t, i)]
            }
            (Parameters::Lstm(_), Architecture::Lstm) => {
                let mut e = vec![(INPUT_EMBEDDINGS, v, i)];
                for g in lstm::GATE_NAMES {
                    e.push((g[0], h, i));
                    e.push((g[1], h, h));
                    e.push((g[2], h, 1));
                }
                e.push(("projection", t, h));
                e.push(("projection_bias", t, 1));
                e
            }
            _ => return Err(Error::invalid("parameters do not match the architecture")),
        };
        let actual = self.params.tensors();
        if actual.len() != expected.len() {
            return Err(Error::invalid("unexpected parameter tensor count"));
        }
        for (view, (name, rows, cols)) in actual.iter().zip(expected) {
            if view.name != name || view.rows != rows || view.cols != cols {
                return Err(Error::invalid(format!(
                    "tensor `{}` has shape {}x{}, expected `{name}` {rows}x{cols}",
                    view.name, view.rows, view.cols
                )));
            }
            if view.data.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("parameter `{name}`")));
            }
        }
        Ok(())
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &Parameters<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Parameters<T> {
        &mut self.params
    }

    pub fn target_dim(&self) -> usize {
        self.config.target_dim
    }

    /// Whether the named tensor is updated by training.
    pub fn is_trainable(&self, name: &str) -> bool {
        !(name == INPUT_EMBEDDINGS && self.config.input_mode == InputMode::PretrainedFixed)
    }

    /// Names and element counts of trainable tensors, in canonical order.
    pub fn trainable_tensors(&self) -> Vec<(&'static str, usize)> {
        self.params
            .tensors()
            .into_iter()
            .filter(|t| self.is_trainable(t.name))
            .map(|t| (t.name, t.data.len()))
            .collect()
    }

    /// Mutable slices of trainable tensors, aligned with
    /// [`trainable_tensors`](Self::trainable_tensors).
    pub fn trainable_tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        let fixed = self.config.input_mode == InputMode::PretrainedFixed;
        self.params
            .tensors_mut()
            .into_iter()
            .filter(|(name, _)| !(fixed && *name == INPUT_EMBEDDINGS))
            .collect()
    }

    /// Splits `tokens` into vocabulary ids and skipped (unknown) tokens.
    pub fn token_ids<S: AsRef<str>>(&self, tokens: &[S]) -> (Vec<usize>, Vec<String>) {
        let mut ids = Vec::with_capacity(tokens.len());
        let mut skipped = Vec::new();
        for t in tokens {
            match self.vocab.id(t.as_ref()) {
                Some(id) => ids.push(id),
                None => skipped.push(t.as_ref().to_owned()),
            }
        }
        (ids, skipped)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Encoded<T>> {
        let (ids, skipped) = self.token_ids(tokens);
        Ok(Encoded {
            vector: self.forward_ids(&ids)?,
            skipped,
        })
    }

    pub fn forward_ids(&self, ids: &[usize]) -> Result<Vec<T>> {
        Ok(self.forward_trace(ids)?.output().to_vec())
    }

    pub fn forward_trace(&self, ids: &[usize]) -> Result<Trace<T>> {
        if ids.is_empty() {
            return Err(Error::NoKnownTokens);
        }
        if let Some(&bad) = ids.iter().find(|&&id| id >= self.vocab.len()) {
            return Err(Error::invalid(format!("token id {bad} out of range")));
        }
        Ok(match &self.params {
            Parameters::Bow(p) => Trace::Bow(p.forward(ids)),
            Parameters::Lstm(p) => {
                Trace::Lstm(p.forward(ids, self.config.output_nonlinearity)?)
            }
        })
    }

    /// Backpropagates `output_grad` (dL/d output) through a forward trace.
    pub fn backprop(&self, trace: &Trace<T>, output_grad: &[T]) -> Gradients<T> {
        let mut grads = self.zero_gradients();
        match (&self.params, trace) {
            (Parameters::Bow(p), Trace::Bow(t)) => p.backward(t, output_grad, &mut grads),
            (Parameters::Lstm(p), Trace::Lstm(t)) => {
                p.backward(t, output_grad, self.config.output_nonlinearity, &mut grads)
            }
            _ => unreachable!("trace produced by a different architecture"),
        }
        if !self.is_trainable(INPUT_EMBEDDINGS) {
            grads.tensors.retain(|g| g.name != INPUT_EMBEDDINGS);
        }
        grads
    }

    /// Zero gradients for every tensor, including frozen ones; `backprop`
    /// drops the frozen entries.
    fn zero_gradients(&self) -> Gradients<T> {
        Gradients {
            tensors: self
                .params
                .tensors()
                .into_iter()
                .map(|t| GradTensor {
                    name: t.name,
                    data: if t.name == INPUT_EMBEDDINGS {
                        GradData::Rows {
                            cols: t.cols,
                            rows: Default::default(),
                        }
                    } else {
                        GradData::Dense(vec![T::zero(); t.data.len()])
                    },
                })
                .collect(),
        }
    }

    /// Converts every parameter to another precision.
    pub fn cast<U: Real>(&self) -> Encoder<U> {
        Encoder {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self.params.cast(),
        }
    }
}
