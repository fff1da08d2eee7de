//! Definition encoders for reverse-dictionary retrieval.
//!
//! Dictionary definitions (and encyclopedia first-paragraph sentences) are
//! mapped into a fixed, pre-trained word-embedding space by one of two
//! trainable encoders:
//!
//! - a linear bag-of-words encoder that sums projected input embeddings, and
//! - an LSTM encoder whose final memory state is projected into the target
//!   space.
//!
//! Once trained, a description is answered by encoding it and returning the
//! nearest words in the target space by cosine similarity. The same machinery
//! serves crossword clues (with an answer-length filter), cross-lingual
//! queries against a second, aligned embedding table, and the unsupervised
//! additive / multiplicative composition baselines.
//!
//! Module map:
//!
//! - [`corpus`]: tokenization, TSV ingestion, vocabularies, seen/unseen splits
//! - [`embedding_store`]: embedding tables and exact cosine retrieval
//! - [`encoders`]: BOW and LSTM forward passes, parameters, checkpoints
//! - [`training`]: losses, backpropagation, adadelta, the training loop and
//!   finite-difference gradient checks
//! - [`query`]: reverse dictionary, crossword, bilingual and baseline queries
//! - [`evaluation`]: median rank, accuracy@k and rank variance
//! - [`synthetic`]: seeded toy worlds used by tests, benches and demos

pub mod corpus;
pub mod embedding_store;
pub mod encoders;
mod error;
pub mod evaluation;
pub mod query;
pub mod synthetic;
pub mod tensor;
pub mod training;

pub use corpus::{
    build_vocabulary, ingest_dictionary, ingest_encyclopedia, ingest_eval, split_seen_unseen,
    tokenize, DefinitionRecord, Ingested, Source, SplitSpec, Vocabulary,
};
pub use embedding_store::{
    cosine, load_embeddings, Candidate, EmbeddingStore, RankedCandidates,
};
pub use encoders::{
    checkpoint, init_parameters, Architecture, Encoder, EncoderConfig, InputMode,
    LstmState, OutputNonlinearity,
};
pub use error::{Error, Result};
pub use evaluation::{
    accuracy_at_k, evaluate, median_rank, rank_variance, EvalMode, EvalReport,
};
pub use query::{
    bilingual_query, crossword_answer, crossword_filter, reverse_dictionary, w2v_add_baseline,
    w2v_mult_baseline, Query, QueryAnswer, QueryEngine, QueryMode,
};
pub use tensor::{Matrix, Real};
pub use training::{
    adadelta::{Adadelta, OptimizerState},
    backward,
    gradcheck::{gradient_check, GradCheckReport},
    loss::{cosine_loss, rank_loss, LossConfig, LossKind},
    train, train_with, EpochRecord, TrainConfig, TrainingLog,
};
