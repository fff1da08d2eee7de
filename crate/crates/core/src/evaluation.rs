//! Rank-based evaluation: median rank, accuracy@k and rank variance of the
//! correct word over a labelled set of descriptions.
//!
//! Ranks are integers, so every metric is computed from exact integer sums
//! and rounded once: results are the correctly rounded `f64` of the true
//! value whenever the intermediate sums stay below 2^53.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DefinitionRecord;
use crate::embedding_store::EmbeddingStore;
use crate::error::{Error, Result};
use crate::query::crossword_filter;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Rank among the whole store.
    Revdict,
    /// Rank among store words with as many letters as the answer.
    Crossword,
}

crate::error::serde_from_str!(EvalMode);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_items: usize,
    pub n_skipped: usize,
    pub median_rank: f64,
    pub accuracy_at_10: f64,
    pub accuracy_at_100: f64,
    pub rank_variance: f64,
    /// Rank of each scored item, in input order.
    pub ranks: Vec<usize>,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16}{:>12}", "items", self.n_items)?;
        writeln!(f, "{:<16}{:>12}", "skipped", self.n_skipped)?;
        writeln!(f, "{:<16}{:>12.1}", "median rank", self.median_rank)?;
        writeln!(f, "{:<16}{:>12.3}", "accuracy@10", self.accuracy_at_10)?;
        writeln!(f, "{:<16}{:>12.3}", "accuracy@100", self.accuracy_at_100)?;
        write!(f, "{:<16}{:>12.1}", "rank variance", self.rank_variance)
    }
}

fn check_nonempty(ranks: &[usize]) -> Result<()> {
    if ranks.is_empty() {
        return Err(Error::invalid("no ranks to summarise"));
    }
    Ok(())
}

pub fn median_rank(ranks: &[usize]) -> Result<f64> {
    check_nonempty(ranks)?;
    let mut sorted = ranks.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        Ok(sorted[n / 2] as f64)
    } else {
        let sum = sorted[n / 2 - 1] as u128 + sorted[n / 2] as u128;
        Ok(ratio(sum, 2))
    }
}

/// Fraction of ranks at most `k`.
pub fn accuracy_at_k(ranks: &[usize], k: usize) -> Result<f64> {
    check_nonempty(ranks)?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let hits = ranks.iter().filter(|&&r| r <= k).count();
    Ok(ratio(hits as u128, ranks.len() as u128))
}

/// Population variance (divides by n).
pub fn rank_variance(ranks: &[usize]) -> Result<f64> {
    check_nonempty(ranks)?;
    let n = ranks.len() as u128;
    let sum: u128 = ranks.iter().map(|&r| r as u128).sum();
    let sum_sq = ranks
        .iter()
        .try_fold(0u128, |acc, &r| acc.checked_add((r as u128).checked_mul(r as u128)?));
    match sum_sq.and_then(|q| q.checked_mul(n)) {
        // var = (n·Σr² − (Σr)²) / n²
        Some(nq) => Ok(ratio(nq - sum * sum, n * n)),
        None => {
            let mean = ranks.iter().map(|&r| r as f64).sum::<f64>() / n as f64;
            Ok(ranks.iter().map(|&r| (r as f64 - mean).powi(2)).sum::<f64>() / n as f64)
        }
    }
}

/// `num / den` in lowest terms; a single rounding when both fit in 53 bits.
fn ratio(num: u128, den: u128) -> f64 {
    let g = gcd(num, den);
    (num / g) as f64 / (den / g) as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Summary metrics of a list of ranks.
pub fn summarise(ranks: Vec<usize>, n_items: usize) -> Result<EvalReport> {
    Ok(EvalReport {
        n_items,
        n_skipped: n_items - ranks.len(),
        median_rank: median_rank(&ranks)?,
        accuracy_at_10: accuracy_at_k(&ranks, 10)?,
        accuracy_at_100: accuracy_at_k(&ranks, 100)?,
        rank_variance: rank_variance(&ranks)?,
        ranks,
    })
}

/// Ranks each item's headword under the vector `query` produces for it.
///
/// Items are skipped (and counted) when the headword is not in `store`, when
/// it cannot be a crossword answer in crossword mode, or when `query` fails
/// with [`Error::NoKnownTokens`]. Any other query error aborts.
pub fn evaluate<F>(
    query: F,
    items: &[DefinitionRecord],
    store: &EmbeddingStore,
    mode: EvalMode,
) -> Result<EvalReport>
where
    F: Fn(&DefinitionRecord) -> Result<Vec<f32>> + Sync,
{
    if items.is_empty() {
        return Err(Error::invalid("evaluation set is empty"));
    }
    let ranks: Vec<Option<usize>> = items
        .par_iter()
        .map(|item| -> Result<Option<usize>> {
            if !store.contains(&item.headword) {
                return Ok(None);
            }
            let filter = match mode {
                EvalMode::Revdict => None,
                EvalMode::Crossword => {
                    let f = crossword_filter(item.headword.chars().count());
                    if !f(&item.headword) {
                        return Ok(None);
                    }
                    Some(f)
                }
            };
            let v = match query(item) {
                Ok(v) => v,
                Err(Error::NoKnownTokens) => return Ok(None),
                Err(e) => return Err(e),
            };
            let filter = filter.as_ref().map(|f| f as &(dyn Fn(&str) -> bool + Sync));
            store.rank_of_filtered(&v, &item.headword, filter).map(Some)
        })
        .collect::<Result<_>>()?;
    let skipped = ranks.iter().filter(|r| r.is_none()).count();
    if skipped == items.len() {
        return Err(Error::invalid(format!("all {skipped} evaluation items were skipped")));
    }
    if skipped > 0 {
        log::warn!("{skipped} of {} evaluation items skipped", items.len());
    }
    summarise(ranks.into_iter().flatten().collect(), items.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Source;
    use crate::synthetic::random_store;
    use proptest::prelude::*;

    #[test]
    fn mode_names_round_trip() {
        for m in [EvalMode::Revdict, EvalMode::Crossword] {
            assert_eq!(m.to_string().parse::<EvalMode>().unwrap(), m);
        }
        assert_eq!("pretrained_fixed".parse::<crate::encoders::InputMode>().unwrap(), crate::encoders::InputMode::PretrainedFixed);
        assert!("grid".parse::<EvalMode>().is_err());
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_rank(&[1, 2, 3]).unwrap(), 2.0);
        assert_eq!(median_rank(&[1, 3]).unwrap(), 2.0);
        assert_eq!(median_rank(&[22, 4, 7, 100]).unwrap(), 14.5);
        assert_eq!(median_rank(&[18, 19]).unwrap(), 18.5);
        assert!(median_rank(&[]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy_at_k(&[1, 5, 200], 10).unwrap(), 2.0 / 3.0);
        assert_eq!(accuracy_at_k(&[1, 5, 200], 100).unwrap(), 2.0 / 3.0);
        assert_eq!(accuracy_at_k(&[1, 1, 1], 1).unwrap(), 1.0);
        assert!(accuracy_at_k(&[], 10).is_err());
        assert!(accuracy_at_k(&[1], 0).is_err());
    }

    #[test]
    fn variance_examples() {
        assert_eq!(rank_variance(&[2, 2, 2]).unwrap(), 0.0);
        assert_eq!(rank_variance(&[1, 3]).unwrap(), 1.0);
        assert_eq!(rank_variance(&[7]).unwrap(), 0.0);
        // mean 206/3; squared deviations sum to 77642/3, over n = 3
        assert_eq!(rank_variance(&[1, 5, 200]).unwrap(), 77642.0 / 9.0);
        assert!((rank_variance(&[1, 5, 200]).unwrap() - 8_626.888_888).abs() < 1e-5);
        assert!(rank_variance(&[]).is_err());
    }

    #[test]
    fn huge_ranks_fall_back_without_overflow() {
        let r = [usize::MAX / 2, 1, usize::MAX / 3];
        assert!(rank_variance(&r).unwrap().is_finite());
    }

    fn item(h: &str) -> DefinitionRecord {
        DefinitionRecord {
            headword: h.into(),
            tokens: vec!["x".into()],
            source: Source::Eval,
        }
    }

    #[test]
    fn perfect_model() {
        let s = random_store(300, 8, "en", 3);
        let items: Vec<_> = s.tokens().iter().take(50).map(|t| item(t)).collect();
        let r = evaluate(|i| Ok(s.vector(&i.headword).unwrap().to_vec()), &items, &s, EvalMode::Revdict)
            .unwrap();
        assert_eq!(r.median_rank, 1.0);
        assert_eq!(r.accuracy_at_10, 1.0);
        assert_eq!(r.accuracy_at_100, 1.0);
        assert_eq!(r.rank_variance, 0.0);
        assert_eq!(r.n_skipped, 0);
        assert_eq!(r.ranks, vec![1; 50]);
    }

    #[test]
    fn skipped_items_are_counted() {
        let s = random_store(30, 4, "en", 3);
        let mut items = vec![item(s.token_at(0)), item("absentword"), item(s.token_at(1))];
        items.push(DefinitionRecord { tokens: vec![], ..item(s.token_at(2)) });
        let q = |i: &DefinitionRecord| {
            if i.tokens.is_empty() {
                Err(Error::NoKnownTokens)
            } else {
                Ok(s.vector(&i.headword).unwrap().to_vec())
            }
        };
        let r = evaluate(q, &items, &s, EvalMode::Revdict).unwrap();
        assert_eq!((r.n_items, r.n_skipped, r.ranks.len()), (4, 2, 2));
        assert!(evaluate(q, &[item("absentword")], &s, EvalMode::Revdict).is_err());
        assert!(evaluate(q, &[], &s, EvalMode::Revdict).is_err());
        let failing = |_: &DefinitionRecord| -> Result<Vec<f32>> { Err(Error::ZeroNorm) };
        assert!(evaluate(failing, &items, &s, EvalMode::Revdict).is_err());
    }

    #[test]
    fn crossword_mode_ranks_among_same_length_words() {
        let s = random_store(400, 6, "en", 11);
        let q = crate::synthetic::gaussian_vector(6, 1);
        let items: Vec<_> = s.tokens().iter().take(40).map(|t| item(t)).collect();
        let r = evaluate(|_| Ok(q.clone()), &items, &s, EvalMode::Crossword).unwrap();
        for (it, &rank) in items.iter().zip(&r.ranks) {
            let f = crossword_filter(it.headword.len());
            assert_eq!(rank, s.rank_of_filtered(&q, &it.headword, Some(&f)).unwrap());
            assert!(rank <= s.rank_of(&q, &it.headword).unwrap());
        }
    }

    proptest! {
        #[test]
        fn metrics_are_permutation_invariant(mut ranks in proptest::collection::vec(1usize..500, 1..60), seed in 0u64..100) {
            let m = median_rank(&ranks).unwrap();
            let a = accuracy_at_k(&ranks, 10).unwrap();
            let v = rank_variance(&ranks).unwrap();
            use rand::{seq::SliceRandom, SeedableRng};
            ranks.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(median_rank(&ranks).unwrap(), m);
            prop_assert_eq!(accuracy_at_k(&ranks, 10).unwrap(), a);
            prop_assert_eq!(rank_variance(&ranks).unwrap(), v);
        }

        #[test]
        fn improving_ranks_never_hurts(pairs in proptest::collection::vec((1usize..500, 0usize..500), 1..60)) {
            let before: Vec<usize> = pairs.iter().map(|&(r, _)| r).collect();
            let after: Vec<usize> = pairs.iter().map(|&(r, d)| (r.saturating_sub(d)).max(1)).collect();
            prop_assert!(median_rank(&after).unwrap() <= median_rank(&before).unwrap());
            for k in [1, 10, 100] {
                prop_assert!(accuracy_at_k(&after, k).unwrap() >= accuracy_at_k(&before, k).unwrap());
            }
        }

        #[test]
        fn report_invariants(ranks in proptest::collection::vec(1usize..1000, 1..80)) {
            let r = summarise(ranks.clone(), ranks.len() + 3).unwrap();
            prop_assert!(r.accuracy_at_100 >= r.accuracy_at_10);
            prop_assert!(r.median_rank >= 1.0);
            prop_assert!(r.rank_variance >= 0.0);
            prop_assert_eq!(r.n_skipped, 3);
        }
    }
}
