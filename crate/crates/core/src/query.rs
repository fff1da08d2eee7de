//! Query modes: reverse dictionary, crossword answering, the additive and
//! multiplicative composition baselines, and cross-lingual lookup.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;
use crate::embedding_store::{EmbeddingStore, RankedCandidates, TokenFilter};
use crate::encoders::Encoder;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    Revdict,
    Crossword,
    Bilingual,
}

crate::error::serde_from_str!(QueryMode);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    pub mode: QueryMode,
    pub k: usize,
    /// Letters in the answer; crossword mode only.
    pub answer_length: Option<usize>,
    /// Language tag of the store to search; bilingual mode only.
    pub target_language: Option<String>,
}

impl Query {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        match (self.mode, self.answer_length) {
            (QueryMode::Crossword, None) => {
                return Err(Error::invalid("crossword queries need an answer length"))
            }
            (QueryMode::Crossword, Some(0)) => {
                return Err(Error::invalid("answer length must be at least 1"))
            }
            (QueryMode::Revdict | QueryMode::Bilingual, Some(_)) => {
                return Err(Error::invalid("answer length is only valid in crossword mode"))
            }
            _ => {}
        }
        if self.mode != QueryMode::Bilingual && self.target_language.is_some() {
            return Err(Error::invalid("target language is only valid in bilingual mode"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub candidates: RankedCandidates,
    /// Query tokens the model or input store does not know.
    pub skipped_tokens: Vec<String>,
}

/// Accepts purely alphabetic tokens of exactly `length` letters.
pub fn crossword_filter(length: usize) -> impl Fn(&str) -> bool + Sync {
    move |t: &str| t.chars().all(char::is_alphabetic) && t.chars().count() == length
}

/// Encodes tokenized `text`, returning the vector and the skipped tokens.
pub fn encode_text(model: &Encoder<f32>, text: &str) -> Result<(Vec<f32>, Vec<String>)> {
    let e = model.encode(&tokenize(text))?;
    Ok((e.vector, e.skipped))
}

fn check_dims(model: &Encoder<f32>, store: &EmbeddingStore) -> Result<()> {
    if model.target_dim() != store.dim() {
        return Err(Error::DimensionMismatch {
            expected: store.dim(),
            actual: model.target_dim(),
        });
    }
    Ok(())
}

fn answer(
    store: &EmbeddingStore,
    (vector, skipped): (Vec<f32>, Vec<String>),
    k: usize,
    filter: Option<&TokenFilter>,
) -> Result<QueryAnswer> {
    Ok(QueryAnswer {
        candidates: store.nearest_neighbors(&vector, k, filter)?,
        skipped_tokens: skipped,
    })
}

pub fn reverse_dictionary(
    model: &Encoder<f32>,
    store: &EmbeddingStore,
    text: &str,
    k: usize,
) -> Result<QueryAnswer> {
    check_dims(model, store)?;
    answer(store, encode_text(model, text)?, k, None)
}

pub fn crossword_answer(
    model: &Encoder<f32>,
    store: &EmbeddingStore,
    clue: &str,
    answer_length: usize,
    k: usize,
) -> Result<QueryAnswer> {
    if answer_length == 0 {
        return Err(Error::invalid("answer length must be at least 1"));
    }
    check_dims(model, store)?;
    let filter = crossword_filter(answer_length);
    answer(store, encode_text(model, clue)?, k, Some(&filter))
}

/// Searches `target` (a store in another language) with a model trained on
/// `source_language` definitions.
pub fn bilingual_query(
    model: &Encoder<f32>,
    source_language: &str,
    text: &str,
    target: &EmbeddingStore,
    k: usize,
) -> Result<QueryAnswer> {
    if target.language() == source_language {
        return Err(Error::invalid(format!(
            "target store language `{}` equals the source language",
            target.language()
        )));
    }
    check_dims(model, target)?;
    answer(target, encode_text(model, text)?, k, None)
}

fn known_vectors<'a>(input: &'a EmbeddingStore, text: &str) -> Result<(Vec<&'a [f32]>, Vec<String>)> {
    let mut vectors = Vec::new();
    let mut skipped = Vec::new();
    for t in tokenize(text) {
        match input.vector(&t) {
            Some(v) => vectors.push(v),
            None => skipped.push(t),
        }
    }
    if vectors.is_empty() {
        return Err(Error::NoKnownTokens);
    }
    Ok((vectors, skipped))
}

/// Sum of the input vectors of the known tokens of `text`.
pub fn compose_add(input: &EmbeddingStore, text: &str) -> Result<(Vec<f32>, Vec<String>)> {
    let (vectors, skipped) = known_vectors(input, text)?;
    let mut acc = vec![0.0f64; input.dim()];
    for v in vectors {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a += x as f64;
        }
    }
    Ok((acc.into_iter().map(|x| x as f32).collect(), skipped))
}

/// Elementwise product of the input vectors of the known tokens of `text`.
pub fn compose_mult(input: &EmbeddingStore, text: &str) -> Result<(Vec<f32>, Vec<String>)> {
    let (vectors, skipped) = known_vectors(input, text)?;
    let mut acc = vec![1.0f64; input.dim()];
    for v in vectors {
        for (a, &x) in acc.iter_mut().zip(v) {
            *a *= x as f64;
        }
    }
    let out: Vec<f32> = acc.into_iter().map(|x| x as f32).collect();
    if out.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok((out, skipped))
}

fn check_stores(input: &EmbeddingStore, target: &EmbeddingStore) -> Result<()> {
    if input.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            actual: input.dim(),
        });
    }
    Ok(())
}

pub fn w2v_add_baseline(
    input: &EmbeddingStore,
    target: &EmbeddingStore,
    text: &str,
    k: usize,
) -> Result<QueryAnswer> {
    check_stores(input, target)?;
    answer(target, compose_add(input, text)?, k, None)
}

pub fn w2v_mult_baseline(
    input: &EmbeddingStore,
    target: &EmbeddingStore,
    text: &str,
    k: usize,
) -> Result<QueryAnswer> {
    check_stores(input, target)?;
    answer(target, compose_mult(input, text)?, k, None)
}

/// A trained model with its target store and any second-language stores,
/// answering [`Query`] values. Stores are shared between engines built with
/// [`with_model`](Self::with_model).
#[derive(Clone, Debug)]
pub struct QueryEngine {
    model: Encoder<f32>,
    target: Arc<EmbeddingStore>,
    bilingual: BTreeMap<String, Arc<EmbeddingStore>>,
}

impl QueryEngine {
    pub fn new<S, I>(model: Encoder<f32>, target: impl Into<Arc<EmbeddingStore>>, bilingual: I) -> Result<Self>
    where
        S: Into<Arc<EmbeddingStore>>,
        I: IntoIterator<Item = S>,
    {
        let target = target.into();
        check_dims(&model, &target)?;
        let mut stores = BTreeMap::new();
        for s in bilingual {
            let s: Arc<EmbeddingStore> = s.into();
            check_dims(&model, &s)?;
            if s.language() == target.language() {
                return Err(Error::invalid(format!(
                    "second-language store has the source language `{}`",
                    s.language()
                )));
            }
            if stores.insert(s.language().to_owned(), s).is_some() {
                return Err(Error::invalid("two second-language stores share a language tag"));
            }
        }
        Ok(QueryEngine {
            model,
            target,
            bilingual: stores,
        })
    }

    /// The same stores with another model.
    pub fn with_model(&self, model: Encoder<f32>) -> Result<Self> {
        QueryEngine::new(model, self.target.clone(), self.bilingual.values().cloned())
    }

    pub fn model(&self) -> &Encoder<f32> {
        &self.model
    }

    pub fn target(&self) -> &EmbeddingStore {
        &self.target
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.bilingual.keys().map(String::as_str)
    }

    /// The store a bilingual query searches. Without a language tag the only
    /// loaded second-language store is used.
    pub fn bilingual_store(&self, language: Option<&str>) -> Result<&EmbeddingStore> {
        match language {
            Some(l) if l == self.target.language() => Err(Error::invalid(format!(
                "target language `{l}` equals the source language"
            ))),
            Some(l) => self
                .bilingual
                .get(l)
                .map(Arc::as_ref)
                .ok_or_else(|| Error::invalid(format!("no embeddings loaded for language `{l}`"))),
            None if self.bilingual.len() == 1 => Ok(self.bilingual.values().next().unwrap()),
            None if self.bilingual.is_empty() => {
                Err(Error::invalid("no second-language embeddings are loaded"))
            }
            None => Err(Error::invalid("several languages are loaded; name a target language")),
        }
    }

    pub fn run(&self, query: &Query) -> Result<QueryAnswer> {
        query.validate()?;
        match query.mode {
            QueryMode::Revdict => reverse_dictionary(&self.model, &self.target, &query.text, query.k),
            QueryMode::Crossword => crossword_answer(
                &self.model,
                &self.target,
                &query.text,
                query.answer_length.unwrap(),
                query.k,
            ),
            QueryMode::Bilingual => bilingual_query(
                &self.model,
                self.target.language(),
                &query.text,
                self.bilingual_store(query.target_language.as_deref())?,
                query.k,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::embedding_store::cosine;
    use crate::encoders::{init_parameters, Architecture, EncoderConfig, InputMode, OutputNonlinearity};
    use crate::synthetic::{random_store, ToyWorld};
    use proptest::prelude::*;

    fn store(lang: &str, rows: &[(&str, &[f32])]) -> EmbeddingStore {
        EmbeddingStore::from_rows(lang, rows[0].1.len(), rows.iter().map(|(t, v)| (t.to_string(), v.to_vec())))
            .unwrap()
    }

    fn bow(vocab: &[&str], input_dim: usize, target_dim: usize) -> Encoder<f32> {
        let config = EncoderConfig {
            architecture: Architecture::Bow,
            input_mode: InputMode::Learned,
            input_dim,
            hidden_dim: 4,
            target_dim,
            output_nonlinearity: OutputNonlinearity::Identity,
            seed: 5,
        };
        init_parameters(&config, &Vocabulary::from_tokens(vocab.iter().copied()), None).unwrap()
    }

    fn query(text: &str, mode: QueryMode) -> Query {
        Query {
            text: text.into(),
            mode,
            k: 5,
            answer_length: None,
            target_language: None,
        }
    }

    #[test]
    fn query_validation() {
        assert!(query("x", QueryMode::Revdict).validate().is_ok());
        assert!(Query { k: 0, ..query("x", QueryMode::Revdict) }.validate().is_err());
        assert!(query("x", QueryMode::Crossword).validate().is_err());
        assert!(Query { answer_length: Some(0), ..query("x", QueryMode::Crossword) }
            .validate()
            .is_err());
        assert!(Query { answer_length: Some(4), ..query("x", QueryMode::Crossword) }
            .validate()
            .is_ok());
        assert!(Query { answer_length: Some(4), ..query("x", QueryMode::Revdict) }
            .validate()
            .is_err());
        assert!(Query { target_language: Some("fr".into()), ..query("x", QueryMode::Revdict) }
            .validate()
            .is_err());
        assert_eq!("crossword".parse::<QueryMode>().unwrap(), QueryMode::Crossword);
        assert!("grid".parse::<QueryMode>().is_err());
    }

    #[test]
    fn crossword_length_filter() {
        let s = store(
            "en",
            &[("eiger", &[1.0, 0.0]), ("aosta", &[0.9, 0.1]), ("mont", &[1.0, 0.01]), ("alp5s", &[1.0, 0.0])],
        );
        let enc = bow(&["peak"], 2, 2);
        let got = crossword_answer(&enc, &s, "peak", 5, 10).unwrap();
        let mut toks = got.candidates.tokens();
        toks.sort();
        assert_eq!(toks, ["aosta", "eiger"]);
        assert!(crossword_answer(&enc, &s, "peak", 0, 10).is_err());
        assert!(crossword_answer(&enc, &s, "peak", 9, 10).unwrap().candidates.is_empty());
    }

    #[test]
    fn crossword_equals_post_filtered_ranking() {
        let s = random_store(500, 6, "en", 2);
        let enc = bow(&["a", "b", "c"], 6, 6);
        let full = reverse_dictionary(&enc, &s, "a b c", s.len()).unwrap();
        for len in 1..8 {
            let f = crossword_filter(len);
            let want: Vec<_> = full
                .candidates
                .candidates
                .iter()
                .filter(|c| f(&c.token))
                .cloned()
                .collect();
            let got = crossword_answer(&enc, &s, "a b c", len, s.len()).unwrap();
            assert_eq!(got.candidates.candidates, want);
        }
    }

    #[test]
    fn revdict_full_ranking_matches_rank_of() {
        let s = random_store(200, 5, "en", 8);
        let enc = bow(&["x", "y"], 3, 5);
        let (v, _) = encode_text(&enc, "x y").unwrap();
        let full = reverse_dictionary(&enc, &s, "x y", s.len()).unwrap();
        for (i, c) in full.candidates.candidates.iter().enumerate() {
            assert_eq!(s.rank_of(&v, &c.token).unwrap(), i + 1);
            let want = cosine(&v, s.vector(&c.token).unwrap()).unwrap();
            assert!((c.score - want).abs() < 1e-12);
        }
    }

    #[test]
    fn revdict_reports_unknown_tokens() {
        let s = random_store(20, 3, "en", 1);
        let enc = bow(&["cold", "wind"], 3, 3);
        let a = reverse_dictionary(&enc, &s, "Cold, biting wind!", 3).unwrap();
        assert_eq!(a.skipped_tokens, ["biting"]);
        assert!(matches!(
            reverse_dictionary(&enc, &s, "nothing known", 3),
            Err(Error::NoKnownTokens)
        ));
        let wrong = random_store(20, 4, "en", 1);
        assert!(matches!(
            reverse_dictionary(&enc, &wrong, "cold", 3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn add_baseline_examples() {
        let s = store(
            "en",
            &[
                ("giraffe", &[1.0, 0.2, 0.0]),
                ("cold", &[-0.3, 1.0, 0.5]),
                ("ice", &[0.2, 0.1, 1.0]),
                ("tall", &[0.9, -0.4, 0.1]),
            ],
        );
        let a = w2v_add_baseline(&s, &s, "giraffe", 1).unwrap();
        assert_eq!(a.candidates.tokens(), ["giraffe"]);
        assert_eq!(
            w2v_add_baseline(&s, &s, "cold cold", 4).unwrap().candidates.tokens(),
            w2v_add_baseline(&s, &s, "cold", 4).unwrap().candidates.tokens()
        );

        // brute-force oracle over a hand-summed vector
        let sum = [1.0 - 0.3 + 0.2, 0.2 + 1.0 + 0.1, 0.0 + 0.5 + 1.0];
        let mut oracle: Vec<(String, f64)> = s
            .tokens()
            .iter()
            .map(|t| (t.clone(), cosine(&sum, s.vector(t).unwrap()).unwrap()))
            .collect();
        oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let got = w2v_add_baseline(&s, &s, "giraffe cold ice", 4).unwrap();
        let got: Vec<(String, f64)> = got.candidates.candidates.into_iter().map(|c| (c.token, c.score)).collect();
        assert_eq!(got.len(), 4);
        for (g, o) in got.iter().zip(&oracle) {
            assert_eq!(g.0, o.0);
            assert!((g.1 - o.1).abs() < 1e-6);
        }
    }

    #[test]
    fn mult_baseline_examples() {
        let s = store("en", &[("p", &[1.0, 2.0]), ("q", &[3.0, 4.0]), ("z", &[0.0, 0.0001]), ("o", &[5.0, 0.0])]);
        assert_eq!(compose_mult(&s, "p q").unwrap().0, [3.0, 8.0]);
        assert!(compose_mult(&s, "z o").is_err());
        assert!(w2v_mult_baseline(&s, &s, "z o", 2).is_err());
        assert!(matches!(compose_mult(&s, "unknown"), Err(Error::NoKnownTokens)));
    }

    #[test]
    fn bilingual_searches_only_the_target_language() {
        let en = store("en", &[("dog", &[1.0, 0.0]), ("cat", &[0.0, 1.0])]);
        let fr = store("fr", &[("chien", &[0.99, 0.05]), ("chat", &[0.02, 1.0])]);
        let enc = bow(&["barks"], 2, 2);
        let a = bilingual_query(&enc, "en", "barks", &fr, 10).unwrap();
        assert_eq!(a.candidates.len(), 2);
        assert!(a.candidates.tokens().iter().all(|t| fr.contains(t) && !en.contains(t)));
        assert!(bilingual_query(&enc, "en", "barks", &en, 10).is_err());
    }

    #[test]
    fn engine_dispatches_modes() {
        let w = ToyWorld::generate(30, 8, 4);
        let (fr, _) = w.translation("fr");
        let config = EncoderConfig {
            architecture: Architecture::Bow,
            input_mode: InputMode::PretrainedFixed,
            input_dim: 8,
            hidden_dim: 8,
            target_dim: 8,
            output_nonlinearity: OutputNonlinearity::Identity,
            seed: 1,
        };
        let enc = init_parameters(&config, &Vocabulary::default(), Some(&w.target)).unwrap();
        let engine = QueryEngine::new(enc.clone(), w.target.clone(), [fr.clone()]).unwrap();
        let text = w.dictionary[0].text();

        let direct = reverse_dictionary(&enc, &w.target, &text, 5).unwrap();
        assert_eq!(engine.run(&query(&text, QueryMode::Revdict)).unwrap(), direct);

        let bq = query(&text, QueryMode::Bilingual);
        let direct = bilingual_query(&enc, "en", &text, &fr, 5).unwrap();
        assert_eq!(engine.run(&bq).unwrap(), direct);
        let tagged = Query { target_language: Some("fr".into()), ..bq.clone() };
        assert_eq!(engine.run(&tagged).unwrap(), direct);
        assert!(engine.run(&Query { target_language: Some("de".into()), ..bq.clone() }).is_err());
        assert!(engine.run(&Query { target_language: Some("en".into()), ..bq }).is_err());

        let cq = Query { answer_length: Some(4), ..query(&text, QueryMode::Crossword) };
        assert_eq!(engine.run(&cq).unwrap(), crossword_answer(&enc, &w.target, &text, 4, 5).unwrap());

        assert!(QueryEngine::new(enc.clone(), w.target.clone(), [w.target.clone()]).is_err());
        let none: [EmbeddingStore; 0] = [];
        let mono = QueryEngine::new(enc.clone(), w.target.clone(), none).unwrap();
        assert!(mono.run(&query(&text, QueryMode::Bilingual)).is_err());
        let swapped = engine.with_model(enc.clone()).unwrap();
        assert!(Arc::ptr_eq(&swapped.target, &engine.target));
    }

    proptest! {
        #[test]
        fn add_baseline_ignores_order_and_uniform_repetition(
            picks in proptest::collection::vec(0usize..40, 1..6),
            reps in 1usize..4,
            seed in 0u64..1000,
        ) {
            let s = random_store(40, 6, "en", 77);
            let words: Vec<&str> = picks.iter().map(|&i| s.token_at(i)).collect();
            let text = words.join(" ");
            let base = w2v_add_baseline(&s, &s, &text, 10).unwrap().candidates.tokens().iter().map(|t| t.to_string()).collect::<Vec<_>>();

            let mut shuffled = words.clone();
            use rand::{seq::SliceRandom, SeedableRng};
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let got = w2v_add_baseline(&s, &s, &shuffled.join(" "), 10).unwrap();
            prop_assert_eq!(got.candidates.tokens(), base.iter().map(String::as_str).collect::<Vec<_>>());

            let repeated = vec![text.as_str(); reps].join(" ");
            let got = w2v_add_baseline(&s, &s, &repeated, 10).unwrap();
            prop_assert_eq!(got.candidates.tokens(), base.iter().map(String::as_str).collect::<Vec<_>>());
        }
    }
}
