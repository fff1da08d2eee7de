//! Definition corpora: tokenization, TSV ingestion, vocabularies and
//! seen/unseen splits.
//!
//! Every corpus file (dictionary, encyclopedia, evaluation set) is UTF-8 TSV
//! with one `headword<TAB>text` pair per line. Lines starting with `#` and
//! blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Definitions longer than this are truncated at ingestion.
pub const MAX_DEFINITION_TOKENS: usize = 64;

/// Lowercases `text` and splits it on every character that is not a letter
/// or a digit. No stemming, no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dictionary,
    Encyclopedia,
    Eval,
}

/// One (headword, definition) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionRecord {
    pub headword: String,
    pub tokens: Vec<String>,
    pub source: Source,
}

impl DefinitionRecord {
    /// Builds a record from raw text, enforcing the record invariants.
    pub fn new(headword: &str, definition: &str, source: Source) -> Result<Self> {
        let mut head = tokenize(headword);
        if head.len() != 1 {
            return Err(Error::invalid(format!(
                "headword `{}` is not a single token",
                headword.trim()
            )));
        }
        let tokens = tokenize(definition);
        if tokens.is_empty() {
            return Err(Error::invalid("definition has no tokens"));
        }
        Ok(DefinitionRecord {
            headword: head.remove(0),
            tokens,
            source,
        })
    }

    /// The definition as a single space-separated line.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// A line that was dropped during ingestion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

/// Result of reading one corpus file.
#[derive(Clone, Debug, Default)]
pub struct Ingested {
    pub records: Vec<DefinitionRecord>,
    pub skipped: Vec<SkippedLine>,
    /// Number of records whose definition was cut to [`MAX_DEFINITION_TOKENS`].
    pub truncated: usize,
    /// Non-comment, non-blank lines seen.
    pub data_lines: usize,
}

pub fn ingest_dictionary(path: impl AsRef<Path>) -> Result<Ingested> {
    ingest_file(path.as_ref(), Source::Dictionary)
}

/// Each `title<TAB>sentence` line becomes an independent pseudo-definition
/// of the title.
pub fn ingest_encyclopedia(path: impl AsRef<Path>) -> Result<Ingested> {
    ingest_file(path.as_ref(), Source::Encyclopedia)
}

pub fn ingest_eval(path: impl AsRef<Path>) -> Result<Ingested> {
    ingest_file(path.as_ref(), Source::Eval)
}

fn ingest_file(path: &Path, source: Source) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_definitions(BufReader::new(file), source, &path.display().to_string())
}

/// Parses TSV definitions from any reader. `origin` names the input in
/// error messages.
pub fn read_definitions<R: BufRead>(reader: R, source: Source, origin: &str) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.data_lines += 1;
        let Some((head, text)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: origin.to_owned(),
                line: lineno,
                message: "expected `headword<TAB>text`".into(),
            });
        };

        let head_tokens = tokenize(head);
        if head_tokens.len() != 1 {
            let reason = format!("headword `{}` is not a single token", head.trim());
            warn!("{origin}:{lineno}: skipping record: {reason}");
            out.skipped.push(SkippedLine { line: lineno, reason });
            continue;
        }
        let mut tokens = tokenize(text);
        if tokens.is_empty() {
            let reason = "definition is empty after tokenization".to_owned();
            warn!("{origin}:{lineno}: skipping record: {reason}");
            out.skipped.push(SkippedLine { line: lineno, reason });
            continue;
        }
        if tokens.len() > MAX_DEFINITION_TOKENS {
            warn!(
                "{origin}:{lineno}: truncating {}-token definition to {MAX_DEFINITION_TOKENS}",
                tokens.len()
            );
            tokens.truncate(MAX_DEFINITION_TOKENS);
            out.truncated += 1;
        }
        out.records.push(DefinitionRecord {
            headword: head_tokens.into_iter().next().unwrap(),
            tokens,
            source,
        });
    }
    Ok(out)
}

/// Writes records back out as `headword<TAB>definition` lines.
pub fn write_definitions<W: std::io::Write>(mut w: W, records: &[DefinitionRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}\t{}", r.headword, r.text())?;
    }
    Ok(())
}

/// Token ↔ id map with ids assigned in sorted token order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    ids: HashMap<String, usize>,
    tokens: Vec<String>,
    counts: Vec<u64>,
}

impl Vocabulary {
    /// Builds a vocabulary from explicit token counts.
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        let mut tokens = Vec::with_capacity(counts.len());
        let mut cs = Vec::with_capacity(counts.len());
        for (t, c) in counts {
            tokens.push(t);
            cs.push(c);
        }
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            ids,
            tokens,
            counts: cs,
        }
    }

    /// Vocabulary over a token list with zero counts; duplicates collapse.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_counts(tokens.into_iter().map(|t| (t.into(), 0)).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn count(&self, id: usize) -> Option<u64> {
        self.counts.get(id).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Hex SHA-256 over the newline-joined token list.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Counts definition tokens and headwords, keeping those seen at least
/// `min_count` times.
pub fn build_vocabulary(records: &[DefinitionRecord], min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        *counts.entry(r.headword.clone()).or_default() += 1;
        for t in &r.tokens {
            *counts.entry(t.clone()).or_default() += 1;
        }
    }
    counts.retain(|_, c| *c >= min_count);
    Ok(Vocabulary::from_counts(counts))
}

/// Words whose definitions are held out of training.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SplitSpec {
    pub heldout_words: BTreeSet<String>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SplitSpec {
            heldout_words: words.into_iter().map(Into::into).collect(),
            seed: 0,
        }
    }

    /// Draws `n` distinct headwords uniformly from `records` using `seed`.
    pub fn random(records: &[DefinitionRecord], n: usize, seed: u64) -> Self {
        let heads: BTreeSet<&str> = records.iter().map(|r| r.headword.as_str()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let heldout_words = heads
            .into_iter()
            .choose_multiple(&mut rng, n)
            .into_iter()
            .map(str::to_owned)
            .collect();
        SplitSpec {
            heldout_words,
            seed,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Split {
    pub train: Vec<DefinitionRecord>,
    pub unseen: Vec<DefinitionRecord>,
    /// Held-out words that had no records at all.
    pub missing: Vec<String>,
}

/// Partitions records by whether their headword is held out. Input order is
/// preserved on both sides.
pub fn split_seen_unseen(records: &[DefinitionRecord], spec: &SplitSpec) -> Split {
    let (unseen, train): (Vec<_>, Vec<_>) = records
        .iter()
        .cloned()
        .partition(|r| spec.heldout_words.contains(&r.headword));
    let present: BTreeSet<&str> = unseen.iter().map(|r| r.headword.as_str()).collect();
    let missing: Vec<String> = spec
        .heldout_words
        .iter()
        .filter(|w| !present.contains(w.as_str()))
        .cloned()
        .collect();
    for w in &missing {
        warn!("held-out word `{w}` has no records");
    }
    Split {
        train,
        unseen,
        missing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(head: &str, def: &str) -> DefinitionRecord {
        DefinitionRecord::new(head, def, Source::Dictionary).unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("a tall, long-necked, spotted ruminant of Africa"),
            ["a", "tall", "long", "necked", "spotted", "ruminant", "of", "africa"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Atonality!"), ["atonality"]);
        assert_eq!(tokenize("  route 66 "), ["route", "66"]);
    }

    #[test]
    fn dictionary_lines_become_records() {
        let text = "# comment\ngiraffe\ta tall long necked ruminant\n\nbank\tland along a river\nbank\ta financial institution\nbank\tto tilt an aircraft\n";
        let got = read_definitions(text.as_bytes(), Source::Dictionary, "t").unwrap();
        assert_eq!(got.records.len(), 4);
        assert_eq!(got.records[0].headword, "giraffe");
        assert_eq!(
            got.records.iter().filter(|r| r.headword == "bank").count(),
            3
        );
        assert_eq!(got.data_lines, 4);
    }

    #[test]
    fn tabless_line_is_an_error_naming_the_line() {
        let text = "giraffe\ta ruminant\nno tab here\n";
        let err = read_definitions(text.as_bytes(), Source::Dictionary, "dict.tsv").unwrap_err();
        match err {
            Error::Parse { line, path, .. } => {
                assert_eq!(line, 2);
                assert_eq!(path, "dict.tsv");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_definitions_and_multiword_titles_are_skipped() {
        let text = "paris\tthe capital of france\nparis\tit lies on the seine\nnew york\ta city\nvoid\t ... \n";
        let got = read_definitions(text.as_bytes(), Source::Encyclopedia, "wiki").unwrap();
        assert_eq!(got.records.len(), 2);
        assert!(got.records.iter().all(|r| r.headword == "paris"));
        assert!(got.records.iter().all(|r| r.source == Source::Encyclopedia));
        assert_eq!(got.skipped.len(), 2);
        assert_eq!(got.skipped[0].line, 3);
        assert_eq!(got.skipped[1].line, 4);
        assert_eq!(got.records.len(), got.data_lines - got.skipped.len());
    }

    #[test]
    fn empty_file_gives_no_records() {
        let got = read_definitions("".as_bytes(), Source::Encyclopedia, "e").unwrap();
        assert!(got.records.is_empty());
    }

    #[test]
    fn long_definitions_are_truncated() {
        let def = vec!["word"; 100].join(" ");
        let text = format!("w\t{def}\n");
        let got = read_definitions(text.as_bytes(), Source::Dictionary, "d").unwrap();
        assert_eq!(got.records[0].tokens.len(), MAX_DEFINITION_TOKENS);
        assert_eq!(got.truncated, 1);
    }

    #[test]
    fn crlf_lines_are_accepted() {
        let got = read_definitions("cat\ta small feline\r\n".as_bytes(), Source::Dictionary, "d")
            .unwrap();
        assert_eq!(got.records[0].tokens, ["a", "small", "feline"]);
    }

    #[test]
    fn vocabulary_contents_and_min_count() {
        let v = build_vocabulary(&[rec("a", "b c")], 1).unwrap();
        assert_eq!(v.tokens(), ["a", "b", "c"]);
        assert_eq!(v.id("b"), Some(1));

        let v = build_vocabulary(&[rec("a", "b c b"), rec("a", "d")], 2).unwrap();
        assert_eq!(v.tokens(), ["a", "b"]);
        assert_eq!(v.count(0), Some(2));
        assert!(build_vocabulary(&[], 1).is_err());
        assert!(build_vocabulary(&[rec("a", "b")], 0).is_err());
    }

    #[test]
    fn vocabulary_is_deterministic() {
        let records: Vec<_> = (0..10)
            .map(|i| rec(&format!("w{i}"), &format!("t{} t{} shared", i % 3, i % 5)))
            .collect();
        let a = build_vocabulary(&records, 1).unwrap();
        let mut reversed = records.clone();
        reversed.reverse();
        let b = build_vocabulary(&reversed, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn split_examples() {
        let mut records: Vec<_> = (0..3).map(|_| rec("giraffe", "tall ruminant")).collect();
        records.extend((0..5).map(|i| rec(&format!("other{i}"), "something")));
        let split = split_seen_unseen(&records, &SplitSpec::new(["giraffe"]));
        assert_eq!(split.train.len(), 5);
        assert_eq!(split.unseen.len(), 3);

        let split = split_seen_unseen(&records, &SplitSpec::default());
        assert_eq!(split.train.len(), 8);
        assert!(split.unseen.is_empty());

        let split = split_seen_unseen(&records, &SplitSpec::new(["okapi"]));
        assert_eq!(split.missing, ["okapi"]);
        assert_eq!(split.train.len(), 8);
    }

    #[test]
    fn random_holdout_partitions_records() {
        let records: Vec<_> = (0..2000)
            .map(|i| rec(&format!("w{}", i % 900), &format!("def {i}")))
            .collect();
        let spec = SplitSpec::random(&records, 500, 7);
        assert_eq!(spec.heldout_words.len(), 500);
        let split = split_seen_unseen(&records, &spec);
        assert_eq!(split.train.len() + split.unseen.len(), records.len());
        assert!(split
            .train
            .iter()
            .all(|r| !spec.heldout_words.contains(&r.headword)));
        assert!(split
            .unseen
            .iter()
            .all(|r| spec.heldout_words.contains(&r.headword)));
        assert_eq!(SplitSpec::random(&records, 500, 7), spec);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in any::<String>()) {
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join(" ")), once.clone());
            for t in &once {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }

        #[test]
        fn ascii_tokens_are_lowercase(text in "[ -~]{0,80}") {
            for t in tokenize(&text) {
                prop_assert_eq!(t.to_lowercase(), t.clone());
                prop_assert!(t.chars().all(|c| c.is_ascii_alphanumeric()));
            }
        }
    }
}
