//! Kraft repair on explicit word sets.
//!
//! Starting from `M1`, words of `M2` are added one at a time (most probable
//! first, then lexicographically) and the prefix-free extension is kept,
//! until the Kraft sum of the threshold lengths drops to at most one.

use std::collections::{BTreeSet, HashSet};
use std::ops::Bound;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::codebook::{ratio_to_f64, MergeStep, MergeTrace};
use crate::error::{Error, Result};
use crate::source::{SourceModel, Word};
use crate::word_sets::{wedge_words, WordSet};

use super::assign_length;

/// Threshold lengths for a word given membership in `M2`.
pub(crate) struct LengthRule<'a> {
    model: &'a SourceModel,
    m2: HashSet<&'a Word>,
}

impl<'a> LengthRule<'a> {
    pub(crate) fn new(model: &'a SourceModel, m2: &'a [Word]) -> Self {
        LengthRule {
            model,
            m2: m2.iter().collect(),
        }
    }

    pub(crate) fn length(&self, w: &Word) -> Result<u32> {
        assign_length(self.model, w, self.m2.contains(w))
    }
}

/// Exact Kraft sums `Σ n^(-l)` kept as a numerator over `n^max_len`.
struct KraftCounter {
    base: BigUint,
    max_len: u32,
    num: BigUint,
}

impl KraftCounter {
    fn new(n: u32, max_len: u32) -> Self {
        KraftCounter {
            base: BigUint::from(n),
            max_len,
            num: BigUint::zero(),
        }
    }

    fn term(&self, l: u32) -> BigUint {
        Pow::pow(&self.base, self.max_len - l)
    }

    fn add(&mut self, l: u32) {
        self.num += self.term(l);
    }

    fn sub(&mut self, l: u32) {
        self.num -= self.term(l);
    }

    fn value(&self) -> BigRational {
        BigRational::new(
            self.num.clone().into(),
            Pow::pow(&self.base, self.max_len).into(),
        )
    }
}

/// Exact Kraft sum of `words` under the threshold lengths.
pub(crate) fn threshold_kraft(rule: &LengthRule, words: &[Word]) -> Result<BigRational> {
    let lengths = words.iter().map(|w| rule.length(w)).collect::<Result<Vec<_>>>()?;
    Ok(super::prefix_code::kraft_sum(&lengths, rule.model.arity()))
}

/// Repairs `M1` with words of `M2` until the Kraft inequality holds.
///
/// Returns the final word set and the extension trace. If `M1` already
/// satisfies the inequality it is returned unchanged with an empty trace;
/// if even `M1 ∧ M2` violates it, the roles of the sets are exchanged.
pub fn merge_to_kraft(
    model: &SourceModel,
    m1: &WordSet,
    m2: &WordSet,
) -> Result<(WordSet, MergeTrace)> {
    let (w1, w2) = match (m1.words(), m2.words()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Input(
                "explicit merge needs enumerated word sets".into(),
            ))
        }
    };
    let rule = LengthRule::new(model, w2);
    let one = BigRational::one();

    let k1 = threshold_kraft(&rule, w1)?;
    if k1 <= one {
        return Ok((
            WordSet::from_words(w1.iter().cloned()),
            MergeTrace {
                g0: ratio_to_f64(&k1),
                ..MergeTrace::default()
            },
        ));
    }
    let wedge = wedge_words(w1, w2);
    let kw = threshold_kraft(&rule, &wedge)?;
    if kw > one {
        let k2 = threshold_kraft(&rule, w2)?;
        if k2 > one {
            return Err(Error::Infeasible(
                "both M1 and M2 orderings violate the Kraft inequality".into(),
            ));
        }
        // exchanged roles: the base M2 already fits, so no extension is taken
        return Ok((
            WordSet::from_words(w2.iter().cloned()),
            MergeTrace {
                g0: ratio_to_f64(&k2),
                swapped: true,
                ..MergeTrace::default()
            },
        ));
    }

    let max_len = w1
        .iter()
        .chain(w2)
        .map(|w| rule.length(w))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let mut counter = KraftCounter::new(model.arity(), max_len);
    let mut current: BTreeSet<Word> = BTreeSet::new();
    for w in w1 {
        counter.add(rule.length(w)?);
        current.insert(w.clone());
    }

    let mut order: Vec<(&Word, f64)> = w2
        .iter()
        .map(|w| Ok((w, model.word_probability(w)?)))
        .collect::<Result<_>>()?;
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));

    let mut trace = MergeTrace {
        g0: ratio_to_f64(&k1),
        ..MergeTrace::default()
    };
    for (step, (word, prob)) in order.into_iter().enumerate() {
        let s = word.symbols();
        let covered = (0..=s.len()).any(|i| current.contains(&Word::new(s[..i].to_vec())));
        if !covered {
            let removed: Vec<Word> = current
                .range((Bound::Excluded(word.clone()), Bound::Unbounded))
                .take_while(|w| word.is_prefix_of(w))
                .cloned()
                .collect();
            for r in &removed {
                counter.sub(rule.length(r)?);
                current.remove(r);
            }
            counter.add(rule.length(word)?);
            current.insert(word.clone());
        }
        let g = counter.value();
        let fits = g <= one;
        trace.steps.push(MergeStep {
            label: word.to_letters(),
            probability: prob,
            g: ratio_to_f64(&g),
            g_exact: Some(g),
            changed: !covered,
        });
        if fits {
            trace.k0 = step + 1;
            return Ok((WordSet::from_words(current), trace));
        }
    }
    // adding every word of M2 yields M1 ∧ M2, which fits
    unreachable!("extension by all of M2 must satisfy the Kraft inequality")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(list: &[&str]) -> WordSet {
        WordSet::from_words(list.iter().map(|s| Word::from_letters(s).unwrap()))
    }

    #[test]
    fn already_feasible_base_is_kept() {
        let model = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        let m1 = ws(&["a", "ba", "bb"]);
        let m2 = ws(&["a", "b"]);
        let (out, trace) = merge_to_kraft(&model, &m1, &m2).unwrap();
        assert_eq!(out, m1);
        assert!(trace.steps.is_empty());
        assert_eq!(trace.k0, 0);
    }
}
