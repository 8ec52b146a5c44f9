//! Prefix-free complete word sets generated by profile sets.
//!
//! A [`ProfileSet`] says which letter-count vectors are "stopping" profiles.
//! The associated word set contains every word whose profile is a member
//! while no proper prefix's profile is. Because every profile of the cap
//! length is a member, each path through the word tree stops by then and
//! the word set is complete.
//!
//! Word sets have two representations: an explicit sorted word list when
//! the set is small enough to enumerate, and a [`LatticeTable`] that gives
//! exact totals per stopping profile without enumeration.

pub mod fset;
pub mod lattice;

use std::collections::{BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diophantine::frac;
use crate::error::{Error, Result};
use crate::source::{Profile, SourceModel, Word};

pub use fset::{f_set, split_into_f_factors, FSet};
pub use lattice::{CountMode, Decision, LatticeOptions, LatticeTable, StopEntry};

/// Default bound on explicitly enumerated words.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 1_000_000;

/// Membership rule of a profile set (before the cap is applied).
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// No profile.
    Empty,
    /// Every profile, including the empty one.
    All,
    /// Non-zero profiles with `{f(k)} ≤ θ`.
    ThresholdLow(f64),
    /// Non-zero profiles with `1 - {f(k)} ≤ θ`.
    ThresholdHigh(f64),
    Explicit(BTreeSet<Profile>),
    /// Profiles with `f(k) ∈ (L - max d_i, L]`.
    VfWindow(u32),
    /// Profiles with `t(k) = D`.
    TCount(u64),
    Union(Vec<Rule>),
}

impl Rule {
    pub fn contains(&self, model: &SourceModel, counts: &[u32]) -> bool {
        let tol = model.tolerance();
        let nonzero = || counts.iter().any(|&k| k > 0);
        match self {
            Rule::Empty => false,
            Rule::All => true,
            Rule::ThresholdLow(theta) => {
                nonzero() && frac(model.linear_form_unchecked(counts)) <= theta + tol
            }
            Rule::ThresholdHigh(theta) => {
                nonzero() && 1.0 - frac(model.linear_form_unchecked(counts)) <= theta + tol
            }
            Rule::Explicit(set) => set.contains(&Profile::new(counts.to_vec())),
            Rule::VfWindow(level) => {
                let h = model.linear_form_unchecked(counts);
                let d_max = model.weights().iter().cloned().fold(0.0, f64::max);
                let level = *level as f64;
                h <= level + tol && h > level - d_max + tol
            }
            Rule::TCount(d) => {
                let t: u64 = counts[..counts.len() - 1].iter().map(|&k| k as u64).sum();
                t == *d
            }
            Rule::Union(rules) => rules.iter().any(|r| r.contains(model, counts)),
        }
    }
}

/// A membership rule together with the cap length `T2`; every profile of
/// length `T2` is a member.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    pub rule: Rule,
    pub cap: u64,
}

impl ProfileSet {
    pub fn new(rule: Rule, cap: u64) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Input("profile set cap must be at least 1".into()));
        }
        Ok(ProfileSet { rule, cap })
    }

    /// Explicit profiles given as count vectors.
    pub fn explicit<I: IntoIterator<Item = Vec<u32>>>(profiles: I, cap: u64) -> Result<Self> {
        let set = profiles.into_iter().map(Profile::new).collect();
        Self::new(Rule::Explicit(set), cap)
    }

    pub fn contains(&self, model: &SourceModel, counts: &[u32]) -> bool {
        let len: u64 = counts.iter().map(|&k| k as u64).sum();
        len == self.cap || self.rule.contains(model, counts)
    }

    pub fn contains_profile(&self, model: &SourceModel, profile: &Profile) -> bool {
        self.contains(model, profile.counts())
    }
}

#[derive(Debug, Clone)]
pub struct WordSetOptions {
    pub enumeration_limit: usize,
    pub lattice: LatticeOptions,
}

impl Default for WordSetOptions {
    fn default() -> Self {
        WordSetOptions {
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            lattice: LatticeOptions::default(),
        }
    }
}

/// Whether a word set (or a code built from it) lists its words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grade {
    /// Every word is enumerated; usable for encoding and decoding.
    Codec,
    /// Only per-profile totals are known; usable for metrics.
    Metrics,
}

impl Grade {
    pub fn as_str(self) -> &'static str {
        match self {
            Grade::Codec => "codec",
            Grade::Metrics => "metrics",
        }
    }
}

/// A prefix-free word set: explicit words, a lattice table, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct WordSet {
    words: Option<Vec<Word>>,
    table: Option<LatticeTable>,
}

impl WordSet {
    /// An explicit set; words are sorted and deduplicated.
    pub fn from_words<I: IntoIterator<Item = Word>>(words: I) -> Self {
        let mut v: Vec<Word> = words.into_iter().collect();
        v.sort();
        v.dedup();
        WordSet {
            words: Some(v),
            table: None,
        }
    }

    pub fn words(&self) -> Option<&[Word]> {
        self.words.as_deref()
    }

    pub fn table(&self) -> Option<&LatticeTable> {
        self.table.as_ref()
    }

    pub fn grade(&self) -> Grade {
        if self.words.is_some() {
            Grade::Codec
        } else {
            Grade::Metrics
        }
    }

    pub fn total_probability(&self, model: &SourceModel) -> f64 {
        match (&self.words, &self.table) {
            (Some(w), _) => w.iter().map(|a| word_prob(model, a)).sum(),
            (None, Some(t)) => t.total_prob,
            (None, None) => 0.0,
        }
    }

    /// `Σ p(A)|A|`.
    pub fn weighted_length(&self, model: &SourceModel) -> f64 {
        match (&self.words, &self.table) {
            (Some(w), _) => w.iter().map(|a| word_prob(model, a) * a.len() as f64).sum(),
            (None, Some(t)) => t.weighted_length,
            (None, None) => 0.0,
        }
    }

    pub fn max_length(&self) -> u64 {
        match (&self.words, &self.table) {
            (Some(w), _) => w.iter().map(|a| a.len() as u64).max().unwrap_or(0),
            (None, Some(t)) => t.max_length,
            (None, None) => 0,
        }
    }

    pub fn len(&self) -> Option<usize> {
        self.words.as_ref().map(Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// Pairwise prefix check on the explicit list (sorted order makes it linear).
    pub fn is_prefix_free(&self) -> Option<bool> {
        self.words.as_ref().map(|w| is_prefix_free(w))
    }
}

fn word_prob(model: &SourceModel, w: &Word) -> f64 {
    w.symbols().iter().map(|&s| model.probs()[s as usize]).product()
}

/// True when no word in the sorted list is a proper prefix of another.
pub fn is_prefix_free(sorted: &[Word]) -> bool {
    // in lexicographic order a word's extensions immediately follow it
    sorted
        .windows(2)
        .all(|p| !(p[0].is_prefix_of(&p[1]) && p[0].len() <= p[1].len()))
}

/// Exact per-profile totals of the word set of `pset`, without enumerating words.
pub fn lattice_metrics(
    model: &SourceModel,
    pset: &ProfileSet,
    opts: &LatticeOptions,
) -> Result<LatticeTable> {
    lattice::sweep(model, 1, pset.cap, opts, |k, _, _| {
        if pset.contains(model, k) {
            Decision::Stop(0)
        } else {
            Decision::Continue(0)
        }
    })
}

/// Enumerates the word set of `pset` in lexicographic order, giving up
/// (returning `None`) once more than `limit` words have been found.
pub fn enumerate_words(model: &SourceModel, pset: &ProfileSet, limit: usize) -> Option<Vec<Word>> {
    enumerate_with(model, limit, pset.cap, |k| pset.contains(model, k))
}

pub(crate) fn enumerate_with<F>(
    model: &SourceModel,
    limit: usize,
    max_len: u64,
    stops: F,
) -> Option<Vec<Word>>
where
    F: Fn(&[u32]) -> bool,
{
    let m = model.alphabet_size();
    let mut counts = vec![0u32; m];
    if stops(&counts) {
        return Some(vec![Word::empty()]);
    }
    let mut out = Vec::new();
    let mut word: Vec<u8> = Vec::new();
    // explicit DFS: next symbol to try at each depth
    let mut next: Vec<u8> = vec![0];
    while let Some(&s) = next.last() {
        if s as usize == m {
            next.pop();
            if let Some(last) = word.pop() {
                counts[last as usize] -= 1;
            }
            continue;
        }
        *next.last_mut().unwrap() += 1;
        word.push(s);
        counts[s as usize] += 1;
        if stops(&counts) {
            out.push(Word::new(word.clone()));
            if out.len() > limit {
                return None;
            }
            word.pop();
            counts[s as usize] -= 1;
        } else if (word.len() as u64) < max_len {
            next.push(0);
        } else {
            // length limit without a stop: truncated branch
            word.pop();
            counts[s as usize] -= 1;
        }
    }
    Some(out)
}

/// Builds the word set of `pset`: always the lattice table, plus the explicit
/// word list when it has at most `opts.enumeration_limit` words.
pub fn build_word_set(
    model: &SourceModel,
    pset: &ProfileSet,
    opts: &WordSetOptions,
) -> Result<WordSet> {
    if let Rule::Explicit(set) = &pset.rule {
        if set.iter().any(|p| p.dim() != model.alphabet_size()) {
            return Err(Error::Input("explicit profile dimension mismatch".into()));
        }
    }
    let table = lattice_metrics(model, pset, &opts.lattice)?;
    let over_limit = table
        .word_count()
        .is_some_and(|c| c > (opts.enumeration_limit as u64).into());
    let words = if over_limit {
        None
    } else {
        enumerate_words(model, pset, opts.enumeration_limit)
    };
    Ok(WordSet {
        words,
        table: Some(table),
    })
}

/// `M' ∧ M''`: the words of `M' ∪ M''` that have no proper prefix in the union.
pub fn wedge_words(a: &[Word], b: &[Word]) -> Vec<Word> {
    let union: BTreeSet<&Word> = a.iter().chain(b).collect();
    let lookup: HashSet<&[u8]> = union.iter().map(|w| w.symbols()).collect();
    union
        .into_iter()
        .filter(|w| {
            let s = w.symbols();
            (0..s.len()).all(|i| !lookup.contains(&s[..i]))
        })
        .cloned()
        .collect()
}

/// `∧` on explicit word sets.
pub fn wedge(a: &WordSet, b: &WordSet) -> Result<WordSet> {
    match (a.words(), b.words()) {
        (Some(x), Some(y)) => Ok(WordSet::from_words(wedge_words(x, y))),
        _ => Err(Error::Input("wedge needs explicit word sets".into())),
    }
}

/// Outcome of a sampled check that every long enough profile can be completed into the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition1Report {
    pub passed: bool,
    pub checked: usize,
    /// A profile for which no shift of the last coordinate below `T` is a member.
    pub counterexample: Option<Profile>,
}

/// Samples profiles with `Σ_{i<m} k_i = sT²` and checks that some shift
/// `k'_m ∈ [0, T)` of the last coordinate lands in the profile set.
pub fn check_condition1(
    model: &SourceModel,
    pset: &ProfileSet,
    t: u64,
    s_range: std::ops::RangeInclusive<u64>,
    samples: usize,
    seed: u64,
) -> Result<Condition1Report> {
    if t < 2 {
        return Err(Error::Input("the completion check needs T >= 2".into()));
    }
    let m = model.alphabet_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for s in s_range {
        let total = s * t * t;
        for _ in 0..samples {
            // random composition of `total` into m-1 parts via sorted cut points
            let mut cuts: Vec<u64> = (0..m - 2).map(|_| rng.gen_range(0..=total)).collect();
            cuts.sort_unstable();
            let mut k = Vec::with_capacity(m);
            let mut prev = 0;
            for c in cuts {
                k.push((c - prev) as u32);
                prev = c;
            }
            k.push((total - prev) as u32);
            k.push(rng.gen_range(0..=total) as u32);
            let base = Profile::new(k);
            checked += 1;
            let hit = (0..t).any(|shift| pset.contains_profile(model, &base.shift_last(shift as u32)));
            if !hit {
                return Ok(Condition1Report {
                    passed: false,
                    checked,
                    counterexample: Some(base),
                });
            }
        }
    }
    Ok(Condition1Report {
        passed: true,
        checked,
        counterexample: None,
    })
}
