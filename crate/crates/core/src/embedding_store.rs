//! Fixed word-embedding tables and exact cosine nearest-neighbour search.
//!
//! Text format: a header line `count dim [lang]` followed by `count` rows of
//! `token x1 … x_dim`, whitespace separated. Windows line endings are
//! accepted. The language tag defaults to `en`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LANGUAGE: &str = "en";

/// Scans below this size stay on the calling thread.
const PARALLEL_SCAN_MIN: usize = 8192;

#[derive(Clone, Debug)]
pub struct EmbeddingStore {
    dim: usize,
    language: String,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    norms: Vec<f64>,
}

/// One retrieved word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub token: String,
    pub score: f64,
}

/// Words ordered by descending cosine score, ties broken by token.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidates {
    pub candidates: Vec<Candidate>,
    /// Requested list length.
    pub k: usize,
    /// Number of store entries that passed the filter.
    pub considered: usize,
}

impl RankedCandidates {
    pub fn tokens(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.token.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// The retrieval order: higher score first, then lexicographically smaller
/// token.
pub fn candidate_order(a_score: f64, a_token: &str, b_score: f64, b_token: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_token.cmp(b_token))
}

/// Cosine similarity of two equal-length vectors, accumulated in `f64`.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let nu = norm64(u);
    let nv = norm64(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(clamp_unit(dot64(u, v) / (nu * nv)))
}

fn dot64(u: &[f32], v: &[f32]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| a as f64 * b as f64)
        .sum()
}

fn norm64(u: &[f32]) -> f64 {
    dot64(u, u).sqrt()
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::read_text(BufReader::new(file), &path.display().to_string())
}

impl EmbeddingStore {
    /// Builds a store from in-memory rows, validating every invariant.
    pub fn from_rows<I>(language: &str, dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        let mut store = Self::empty(language, dim)?;
        for (token, vector) in rows {
            store.push(token, &vector).map_err(|(_, e)| e)?;
        }
        Ok(store)
    }

    fn empty(language: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(EmbeddingStore {
            dim,
            language: language.to_owned(),
            tokens: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
        })
    }

    /// On failure returns a short reason alongside the typed error.
    fn push(&mut self, token: String, vector: &[f32]) -> std::result::Result<(), (String, Error)> {
        if vector.len() != self.dim {
            let err = Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            };
            return Err((
                format!("expected {} coordinates, found {}", self.dim, vector.len()),
                err,
            ));
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err((
                format!("non-finite coordinate for `{token}`"),
                Error::NonFinite(format!("embedding of `{token}`")),
            ));
        }
        let n = norm64(vector);
        if n == 0.0 {
            return Err((format!("zero vector for `{token}`"), Error::ZeroNorm));
        }
        if self.index.contains_key(&token) {
            return Err((
                format!("duplicate token `{token}`"),
                Error::invalid(format!("duplicate token `{token}`")),
            ));
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        self.norms.push(n);
        Ok(())
    }

    /// Parses the text format. `origin` names the input in errors.
    pub fn read_text<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_owned(),
            line,
            message,
        };
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l?,
            None => return Err(parse_err(1, "missing `count dim` header".into())),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(1, "header must be `count dim [lang]`".into()));
        }
        let count: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(1, format!("bad count `{}`", fields[0])))?;
        let dim: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(1, format!("bad dimension `{}`", fields[1])))?;
        let language = fields.get(2).copied().unwrap_or(DEFAULT_LANGUAGE);
        let mut store = Self::empty(language, dim).map_err(|e| parse_err(1, e.to_string()))?;
        store.tokens.reserve(count);
        store.data.reserve(count * dim);

        let mut row = Vec::with_capacity(dim);
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if store.len() == count {
                return Err(parse_err(
                    lineno,
                    format!("more rows than the {count} declared in the header"),
                ));
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap().to_owned();
            row.clear();
            for p in parts {
                let x: f32 = p
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad coordinate `{p}`")))?;
                row.push(x);
            }
            store
                .push(token, &row)
                .map_err(|(msg, _)| parse_err(lineno, msg))?;
        }
        if store.len() != count {
            return Err(parse_err(
                store.len() + 2,
                format!("header declares {count} rows, found {}", store.len()),
            ));
        }
        Ok(store)
    }

    /// Writes the text format; floats use shortest round-trip formatting so
    /// a reload is bit-identical.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.len(), self.dim, self.language)?;
        for (i, t) in self.tokens.iter().enumerate() {
            write!(w, "{t}")?;
            for x in self.vector_at(i) {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens in file order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.vector_at(i))
    }

    pub fn vector_at(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn token_at(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    fn check_query(&self, query: &[f32]) -> Result<f64> {
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: query.len(),
            });
        }
        if query.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("query vector".into()));
        }
        let n = norm64(query);
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(n)
    }

    fn score_at(&self, query: &[f32], query_norm: f64, i: usize) -> f64 {
        clamp_unit(dot64(query, self.vector_at(i)) / (query_norm * self.norms[i]))
    }

    /// Scores of every entry passing `filter`, as (index, score).
    fn scan(&self, query: &[f32], query_norm: f64, filter: Option<&TokenFilter>) -> Vec<(usize, f64)> {
        let score = |i: usize| -> Option<(usize, f64)> {
            if let Some(f) = filter {
                if !f(&self.tokens[i]) {
                    return None;
                }
            }
            Some((i, self.score_at(query, query_norm, i)))
        };
        if self.len() >= PARALLEL_SCAN_MIN {
            (0..self.len()).into_par_iter().filter_map(score).collect()
        } else {
            (0..self.len()).filter_map(score).collect()
        }
    }

    /// Exact top-`k` by cosine similarity over entries passing `filter`.
    /// Asking for more than are available returns all of them.
    pub fn nearest_neighbors(
        &self,
        query: &[f32],
        k: usize,
        filter: Option<&TokenFilter>,
    ) -> Result<RankedCandidates> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        let qn = self.check_query(query)?;
        let mut scored = self.scan(query, qn, filter);
        let considered = scored.len();
        let cmp = |a: &(usize, f64), b: &(usize, f64)| {
            candidate_order(a.1, &self.tokens[a.0], b.1, &self.tokens[b.0])
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        Ok(RankedCandidates {
            candidates: scored
                .into_iter()
                .map(|(i, score)| Candidate {
                    token: self.tokens[i].clone(),
                    score,
                })
                .collect(),
            k,
            considered,
        })
    }

    /// 1-based position of `target` in the full ranking for `query`.
    pub fn rank_of(&self, query: &[f32], target: &str) -> Result<usize> {
        self.rank_of_filtered(query, target, None)
    }

    /// Like [`rank_of`](Self::rank_of) but ranks only among entries passing
    /// `filter`; the target itself must pass it.
    pub fn rank_of_filtered(
        &self,
        query: &[f32],
        target: &str,
        filter: Option<&TokenFilter>,
    ) -> Result<usize> {
        let ti = self
            .index_of(target)
            .ok_or_else(|| Error::UnknownToken(target.to_owned()))?;
        if let Some(f) = filter {
            if !f(target) {
                return Err(Error::invalid(format!(
                    "target `{target}` is excluded by the filter"
                )));
            }
        }
        let qn = self.check_query(query)?;
        let ts = self.score_at(query, qn, ti);
        let ahead = self
            .scan(query, qn, filter)
            .into_iter()
            .filter(|&(i, s)| {
                i != ti && candidate_order(s, &self.tokens[i], ts, target) == Ordering::Less
            })
            .count();
        Ok(ahead + 1)
    }
}

/// Predicate over tokens used to restrict retrieval.
pub type TokenFilter = dyn Fn(&str) -> bool + Sync;
