//! Seeded toy worlds: pseudo-words, embeddings with controlled geometry and
//! dictionaries whose definitions are consistent with that geometry.
//!
//! Each headword has a small set of descriptor words ("senses"). Its target
//! vector is the normalised sum of its descriptors' vectors plus noise, and
//! its definitions are those descriptors mixed with function words. This
//! gives the additive baseline something to find, makes multiplicative
//! composition of mixed-sign vectors meaningless, and lets a trained encoder
//! generalise to descriptions it has not seen.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{write_definitions, DefinitionRecord, Source, Vocabulary};
use crate::embedding_store::EmbeddingStore;
use crate::encoders::{init_parameters, Encoder, EncoderConfig, InputMode};
use crate::error::{Error, Result};

const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "of", "that", "which", "with", "for", "in", "to", "or", "and", "is", "by",
];

/// Generates unique alphabetic pseudo-words.
struct WordForge {
    used: HashSet<String>,
    consonants: &'static [u8],
    vowels: &'static [&'static str],
}

impl WordForge {
    fn english() -> Self {
        WordForge {
            used: FUNCTION_WORDS.iter().map(|s| s.to_string()).collect(),
            consonants: b"bcdfghklmnprstvz",
            vowels: &["a", "e", "i", "o", "u"],
        }
    }

    fn french() -> Self {
        WordForge {
            used: HashSet::new(),
            consonants: b"bcdfjlmnprstv",
            vowels: &["ou", "eau", "ai", "e", "i", "on"],
        }
    }

    fn word(&mut self, rng: &mut impl Rng, min_syllables: usize, max_syllables: usize) -> String {
        loop {
            let n = rng.random_range(min_syllables..=max_syllables);
            let mut w = String::new();
            for _ in 0..n {
                w.push(*self.consonants.choose(rng).unwrap() as char);
                w.push_str(self.vowels.choose(rng).unwrap());
            }
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

/// Standard-normal vector from a seeded generator.
pub fn gaussian_vector(dim: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian(&mut rng, dim, 1.0)
}

fn gaussian(rng: &mut impl Rng, dim: usize, scale: f32) -> Vec<f32> {
    (0..dim)
        .map(|_| scale * rng.sample::<f32, _>(StandardNormal))
        .collect()
}

/// A store of `n` unique pseudo-words (2 to 5 syllables) with Gaussian
/// vectors.
pub fn random_store(n: usize, dim: usize, language: &str, seed: u64) -> EmbeddingStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forge = WordForge::english();
    let rows: Vec<(String, Vec<f32>)> = (0..n)
        .map(|_| {
            let w = forge.word(&mut rng, 1, 5);
            (w, gaussian(&mut rng, dim, 1.0))
        })
        .collect();
    EmbeddingStore::from_rows(language, dim, rows).expect("generated store is valid")
}

/// A small encoder and one training example for gradient checks.
#[derive(Clone, Debug)]
pub struct GradCheckFixture {
    pub encoder: Encoder<f32>,
    pub tokens: Vec<String>,
    pub target: Vec<f32>,
    /// The encoder's own output on `tokens`: as a rank-loss negative it
    /// keeps the hinge active unless the target is almost the output.
    pub negative: Vec<f32>,
}

/// Encoder with a `vocab_size`-word learned vocabulary (`w00`, `w01`, ...),
/// `n_tokens` tokens drawn with repetition, and a Gaussian target, all
/// seeded by `config.seed`.
///
/// Every parameter, biases included, is redrawn from N(0, 0.5²). Freshly
/// initialised encoders have zero biases and small outputs, where the cosine
/// is sharply curved and finite differences lose accuracy.
pub fn gradcheck_fixture(config: &EncoderConfig, vocab_size: usize, n_tokens: usize) -> Result<GradCheckFixture> {
    if config.input_mode != InputMode::Learned {
        return Err(Error::invalid("gradient-check fixtures use learned inputs"));
    }
    if vocab_size == 0 || n_tokens == 0 {
        return Err(Error::invalid("fixture needs at least one word and one token"));
    }
    let vocab = Vocabulary::from_tokens((0..vocab_size).map(|i| format!("w{i:02}")));
    let mut encoder = init_parameters(config, &vocab, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6C0D);
    for (_, data) in encoder.params_mut().tensors_mut() {
        for x in data.iter_mut() {
            *x = 0.5 * rng.sample::<f32, _>(StandardNormal);
        }
    }
    let tokens: Vec<String> = (0..n_tokens)
        .map(|_| vocab.tokens()[rng.random_range(0..vocab_size)].clone())
        .collect();
    let target = gaussian(&mut rng, config.target_dim, 1.0);
    let negative = encoder.encode(&tokens)?.vector;
    Ok(GradCheckFixture {
        encoder,
        tokens,
        target,
        negative,
    })
}

#[derive(Clone, Debug)]
pub struct ToyWorld {
    pub target: EmbeddingStore,
    pub headwords: Vec<String>,
    /// Descriptor words of each headword, aligned with `headwords`.
    pub senses: Vec<Vec<String>>,
    /// One definition per headword.
    pub dictionary: Vec<DefinitionRecord>,
    seed: u64,
}

impl ToyWorld {
    /// `n_words` headwords in a `dim`-dimensional target space.
    pub fn generate(n_words: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut forge = WordForge::english();
        let mut rows: Vec<(String, Vec<f32>)> = Vec::new();

        for w in FUNCTION_WORDS {
            rows.push((w.to_string(), gaussian(&mut rng, dim, 0.3)));
        }
        let n_desc = n_words.max(60);
        let desc_start = rows.len();
        for _ in 0..n_desc {
            let w = forge.word(&mut rng, 2, 3);
            rows.push((w, gaussian(&mut rng, dim, 1.0)));
        }

        let mut headwords = Vec::with_capacity(n_words);
        let mut senses = Vec::with_capacity(n_words);
        let desc_ids: Vec<usize> = (desc_start..desc_start + n_desc).collect();
        for _ in 0..n_words {
            let k = rng.random_range(3..=5);
            let chosen: Vec<usize> = desc_ids.choose_multiple(&mut rng, k).copied().collect();
            let mut v = vec![0.0f32; dim];
            for &d in &chosen {
                for (a, b) in v.iter_mut().zip(&rows[d].1) {
                    *a += b;
                }
            }
            let n = v.iter().map(|x| x * x).sum::<f32>().sqrt();
            let scale = (dim as f32).sqrt() / n;
            let noise = gaussian(&mut rng, dim, 0.3);
            let v: Vec<f32> = v.iter().zip(&noise).map(|(x, e)| x * scale + e).collect();
            let word = forge.word(&mut rng, 1, 4);
            senses.push(chosen.iter().map(|&d| rows[d].0.clone()).collect());
            headwords.push(word.clone());
            rows.push((word, v));
        }
        let target = EmbeddingStore::from_rows("en", dim, rows).expect("generated store is valid");

        let mut world = ToyWorld {
            target,
            headwords,
            senses,
            dictionary: Vec::new(),
            seed,
        };
        world.dictionary = world.definitions(1, seed ^ 0xD1C7);
        world
    }

    /// A definition of headword `i`: all its descriptors, shuffled, with one
    /// to three function words mixed in.
    pub fn describe(&self, i: usize, rng: &mut impl Rng) -> Vec<String> {
        let mut tokens = self.senses[i].clone();
        for _ in 0..rng.random_range(1..=3) {
            tokens.push(FUNCTION_WORDS.choose(rng).unwrap().to_string());
        }
        tokens.shuffle(rng);
        tokens
    }

    /// A shorter description using a random subset of at least two
    /// descriptors and no function words.
    pub fn short_clue(&self, i: usize, rng: &mut impl Rng) -> Vec<String> {
        let senses = &self.senses[i];
        let k = rng.random_range(2..senses.len());
        senses.choose_multiple(rng, k).cloned().collect()
    }

    /// `per_word` definitions for every headword.
    pub fn definitions(&self, per_word: usize, seed: u64) -> Vec<DefinitionRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.headwords.len() * per_word);
        for (i, h) in self.headwords.iter().enumerate() {
            for _ in 0..per_word {
                out.push(DefinitionRecord {
                    headword: h.clone(),
                    tokens: self.describe(i, &mut rng),
                    source: Source::Dictionary,
                });
            }
        }
        out
    }

    /// An aligned second-language store: every headword and descriptor gets
    /// a translation whose vector is the source vector plus small noise.
    /// Returns the store and the (source, translation) pairs of headwords.
    pub fn translation(&self, language: &str) -> (EmbeddingStore, Vec<(String, String)>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xF4E9);
        let mut forge = WordForge::french();
        let dim = self.target.dim();
        let mut rows = Vec::new();
        let mut pairs = Vec::new();
        let heads: HashSet<&str> = self.headwords.iter().map(String::as_str).collect();
        for (i, token) in self.target.tokens().iter().enumerate() {
            if FUNCTION_WORDS.contains(&token.as_str()) {
                continue;
            }
            let w = forge.word(&mut rng, 1, 3);
            let noise = gaussian(&mut rng, dim, 0.05);
            let v = self
                .target
                .vector_at(i)
                .iter()
                .zip(&noise)
                .map(|(x, e)| x + e)
                .collect();
            if heads.contains(token.as_str()) {
                pairs.push((token.clone(), w.clone()));
            }
            rows.push((w, v));
        }
        let store =
            EmbeddingStore::from_rows(language, dim, rows).expect("generated store is valid");
        (store, pairs)
    }

    /// Writes a complete demo data set into `dir`:
    ///
    /// - `target.txt`, `target_fr.txt`: embedding tables
    /// - `dictionary.tsv`: two definitions per headword
    /// - `encyclopedia.tsv`: pseudo first-paragraph sentences
    /// - `heldout.txt`: headwords for the unseen split
    /// - `eval_seen.tsv`, `eval_unseen.tsv`, `eval_concepts.tsv`
    /// - `crossword_long.tsv`, `crossword_short.tsv`, `crossword_single.tsv`
    pub fn write_fixture_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xF1C5);
        let n = self.headwords.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let n_unseen = (n / 10).max(1);
        let unseen: Vec<usize> = order[..n_unseen].to_vec();
        let seen: Vec<usize> = order[n_unseen..(2 * n_unseen).min(n)].to_vec();

        let write_tsv = |name: &str, recs: &[DefinitionRecord]| -> Result<()> {
            let path = dir.join(name);
            let mut buf = Vec::new();
            writeln!(buf, "# headword<TAB>text")?;
            write_definitions(&mut buf, recs)?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))
        };
        use std::io::Write;

        self.target.save(dir.join("target.txt"))?;
        self.translation("fr").0.save(dir.join("target_fr.txt"))?;

        let dictionary = self.definitions(2, self.seed ^ 0xD1C7);
        write_tsv("dictionary.tsv", &dictionary)?;

        let encyclopedia: Vec<DefinitionRecord> = (0..n)
            .step_by(3)
            .map(|i| {
                let mut tokens = vec![self.headwords[i].clone(), "is".into()];
                tokens.extend(self.describe(i, &mut rng));
                DefinitionRecord {
                    headword: self.headwords[i].clone(),
                    tokens,
                    source: Source::Encyclopedia,
                }
            })
            .collect();
        write_tsv("encyclopedia.tsv", &encyclopedia)?;

        let heldout: String = unseen
            .iter()
            .map(|&i| format!("{}\n", self.headwords[i]))
            .collect();
        let path = dir.join("heldout.txt");
        fs::write(&path, heldout).map_err(|e| Error::io(&path, e))?;

        let eval = |idx: &[usize], f: &mut dyn FnMut(usize) -> Vec<String>| -> Vec<DefinitionRecord> {
            idx.iter()
                .map(|&i| DefinitionRecord {
                    headword: self.headwords[i].clone(),
                    tokens: f(i),
                    source: Source::Eval,
                })
                .collect()
        };
        let seen_defs: Vec<DefinitionRecord> = seen
            .iter()
            .map(|&i| dictionary[2 * i].clone())
            .map(|r| DefinitionRecord {
                source: Source::Eval,
                ..r
            })
            .collect();
        write_tsv("eval_seen.tsv", &seen_defs)?;
        write_tsv(
            "eval_unseen.tsv",
            &eval(&unseen, &mut |i| self.describe(i, &mut rng.clone())),
        )?;
        let concepts: Vec<usize> = order.iter().copied().step_by(4).take(n_unseen).collect();
        let mut crng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xC0C0);
        write_tsv(
            "eval_concepts.tsv",
            &eval(&concepts, &mut |i| self.short_clue(i, &mut crng)),
        )?;

        let clues: Vec<usize> = order.iter().copied().step_by(2).take(n_unseen).collect();
        let mut xrng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xC1E5);
        write_tsv(
            "crossword_long.tsv",
            &eval(&clues, &mut |i| self.describe(i, &mut xrng)),
        )?;
        write_tsv(
            "crossword_short.tsv",
            &eval(&clues, &mut |i| self.short_clue(i, &mut xrng)),
        )?;
        write_tsv(
            "crossword_single.tsv",
            &eval(&clues, &mut |i| vec![self.senses[i].choose(&mut xrng).unwrap().clone()]),
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_is_deterministic_and_consistent() {
        let a = ToyWorld::generate(50, 8, 3);
        let b = ToyWorld::generate(50, 8, 3);
        assert_eq!(a.dictionary, b.dictionary);
        assert_eq!(a.target.tokens(), b.target.tokens());
        assert_eq!(a.dictionary.len(), 50);
        for r in &a.dictionary {
            assert!(a.target.contains(&r.headword));
            assert!(r.tokens.len() >= 4);
            assert!(r.tokens.iter().all(|t| a.target.contains(t)));
            assert!(r.headword.chars().all(|c| c.is_ascii_lowercase()));
        }
    }

    #[test]
    fn random_store_tokens_are_unique_words() {
        let s = random_store(2000, 4, "en", 9);
        assert_eq!(s.len(), 2000);
        assert!(s.tokens().iter().all(|t| t.chars().all(|c| c.is_ascii_lowercase())));
    }

    #[test]
    fn translations_are_near_their_sources() {
        let w = ToyWorld::generate(20, 16, 5);
        let (fr, pairs) = w.translation("fr");
        assert_eq!(fr.language(), "fr");
        assert_eq!(pairs.len(), 20);
        for (en, f) in &pairs {
            let c = crate::embedding_store::cosine(w.target.vector(en).unwrap(), fr.vector(f).unwrap())
                .unwrap();
            assert!(c > 0.95, "{en}/{f}: {c}");
        }
    }

    #[test]
    fn fixture_dir_round_trips_through_the_loaders() {
        let w = ToyWorld::generate(40, 8, 1);
        let dir = tempfile::tempdir().unwrap();
        w.write_fixture_dir(dir.path()).unwrap();
        let dict = crate::corpus::ingest_dictionary(dir.path().join("dictionary.tsv")).unwrap();
        assert_eq!(dict.records.len(), 80);
        assert!(dict.skipped.is_empty());
        let fr = crate::embedding_store::load_embeddings(dir.path().join("target_fr.txt")).unwrap();
        assert_eq!(fr.language(), "fr");
        for name in [
            "eval_seen.tsv",
            "eval_unseen.tsv",
            "eval_concepts.tsv",
            "crossword_long.tsv",
            "crossword_short.tsv",
            "crossword_single.tsv",
            "encyclopedia.tsv",
        ] {
            let got = crate::corpus::ingest_eval(dir.path().join(name)).unwrap();
            assert!(!got.records.is_empty(), "{name}");
        }
    }
}
