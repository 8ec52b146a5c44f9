//! The sets `F(D)`: words with exactly `D` letters other than the last
//! alphabet symbol, ending in such a letter.
//!
//! `F(D)` is infinite for `D ≥ 1`, so it is evaluated up to a length limit
//! and the mass that has not stopped by then is reported as the tail.

use crate::error::{Error, Result};
use crate::source::{SourceModel, Word};

use super::lattice::{self, CountMode, Decision, LatticeOptions};
use super::Rule;

/// Truncated evaluation of `F(D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FSet {
    pub d: u64,
    pub len_limit: u64,
    /// Explicit words up to the length limit, when there are at most `enumeration_limit`.
    pub words: Option<Vec<Word>>,
    /// `Σ p(A)` over words up to the limit.
    pub total_prob: f64,
    /// `Σ p(A)|A|` over words up to the limit.
    pub weighted_length: f64,
    /// Probability of all words longer than the limit.
    pub tail_mass: f64,
    /// `p_m^(len_limit - D + 1)`, the order of magnitude of the tail.
    pub tail_estimate: f64,
}

pub fn f_set(model: &SourceModel, d: u64, len_limit: u64) -> Result<FSet> {
    f_set_with_limit(model, d, len_limit, 100_000)
}

pub fn f_set_with_limit(
    model: &SourceModel,
    d: u64,
    len_limit: u64,
    enumeration_limit: usize,
) -> Result<FSet> {
    if len_limit < d {
        return Err(Error::Input(format!(
            "length limit {len_limit} is shorter than D = {d}"
        )));
    }
    let rule = Rule::TCount(d);
    let opts = LatticeOptions {
        counts: CountMode::Never,
        mass_floor: 0.0,
        ..LatticeOptions::default()
    };
    let table = lattice::sweep(model, 1, len_limit, &opts, |k, _, _| {
        if rule.contains(model, k) {
            Decision::Stop(0)
        } else {
            Decision::Continue(0)
        }
    })?;
    let words = super::enumerate_with(model, enumeration_limit, len_limit, |k| {
        rule.contains(model, k)
    });
    let p_last = *model.probs().last().expect("m >= 2");
    Ok(FSet {
        d,
        len_limit,
        words,
        total_prob: table.total_prob,
        weighted_length: table.weighted_length,
        tail_mass: table.live_mass,
        tail_estimate: p_last.powi((len_limit - d + 1) as i32),
    })
}

/// Cuts a word of `F(Σ parts)` into consecutive factors from `F(parts[i])`.
///
/// Returns `None` if the word is not in `F(Σ parts)` or a part is zero.
pub fn split_into_f_factors(word: &Word, parts: &[u64], m: usize) -> Option<Vec<Word>> {
    if parts.contains(&0) {
        return None;
    }
    let last = (m - 1) as u8;
    let symbols = word.symbols();
    let mut out = Vec::with_capacity(parts.len());
    let mut start = 0usize;
    for &need in parts {
        let mut seen = 0u64;
        let mut end = start;
        while seen < need {
            let s = *symbols.get(end)?;
            if s != last {
                seen += 1;
            }
            end += 1;
        }
        out.push(Word::new(symbols[start..end].to_vec()));
        start = end;
    }
    (start == symbols.len()).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_zero_is_the_empty_word() {
        let m = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        let f = f_set(&m, 0, 10).unwrap();
        assert_eq!(f.words, Some(vec![Word::empty()]));
        assert_eq!(f.total_prob, 1.0);
    }

    #[test]
    fn f_one_small() {
        let m = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        let f = f_set(&m, 1, 3).unwrap();
        let w: Vec<String> = f.words.unwrap().iter().map(Word::to_letters).collect();
        assert_eq!(w, ["a", "ba", "bba"]);
    }

    #[test]
    fn limit_shorter_than_d() {
        let m = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        assert!(f_set(&m, 5, 4).is_err());
    }

    #[test]
    fn split_examples() {
        let w = Word::from_letters("bbabaa").unwrap();
        let parts = split_into_f_factors(&w, &[1, 2], 2).unwrap();
        let s: Vec<String> = parts.iter().map(Word::to_letters).collect();
        assert_eq!(s, ["bba", "baa"]);
        assert!(split_into_f_factors(&Word::from_letters("abb").unwrap(), &[1], 2).is_none());
    }
}
