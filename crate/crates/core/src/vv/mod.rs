//! Variable-to-variable codes from threshold profile sets.
//!
//! Two profile sets are built from a denominator `T`: `M1` stops at profiles
//! whose ideal length `f(k)` sits just above an integer, `M2` at profiles just
//! below one. Words of `M1` get length `⌊f⌋`, words of `M2` get `⌊f⌋ + 1`, so
//! every length is within `2/T` of the ideal one on both sets. `M1` alone
//! usually violates the Kraft inequality; the repair replaces some of its
//! words by `M2` words until the sum drops to one.

pub mod classes;
pub mod merge;
pub mod prefix_code;

use num_rational::BigRational;

use crate::codebook::{Assignment, CodeBook, CodeKind, MergeTrace, Provenance};
use crate::diophantine::{best_approx_denominators, denominator_of_rational_form};
use crate::error::{Error, Result};
use crate::source::{Alphabet, SourceModel, Word};
use crate::word_sets::{
    build_word_set, lattice_metrics, wedge_words, Grade, ProfileSet, Rule, WordSet,
    WordSetOptions,
};

pub use classes::{merge_classes, ClassMerge};
pub use merge::merge_to_kraft;
pub use prefix_code::{
    canonical_codewords, digits_to_string, huffman_codewords, huffman_lengths, kraft_sum,
    string_to_digits,
};

/// Largest denominator tried by the automatic choice of `T`.
pub const AUTO_T_LIMIT: u64 = 64;
/// Largest denominator searched when all log-weights are rational.
pub const RATIONAL_DENOMINATOR_LIMIT: u64 = 10_000;

/// Codeword length for a word with ideal length `f`.
pub fn threshold_length(f: f64, in_m2: bool, tol: f64) -> u32 {
    (f + tol).floor() as u32 + in_m2 as u32
}

/// `⌊-log_n p⌋`, plus one for words of `M2`.
pub fn assign_length(model: &SourceModel, word: &Word, in_m2: bool) -> Result<u32> {
    let f = model.linear_form(&word.profile(model.alphabet_size()))?;
    Ok(threshold_length(f, in_m2, model.tolerance()))
}

/// The two threshold profile sets for accuracy `theta`, both capped at `cap`.
pub fn build_threshold_sets(theta: f64, cap: u64) -> Result<(ProfileSet, ProfileSet)> {
    Ok((
        ProfileSet::new(Rule::ThresholdLow(theta), cap)?,
        ProfileSet::new(Rule::ThresholdHigh(theta), cap)?,
    ))
}

/// A parameter that is either given or picked by the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Choice {
    #[default]
    Auto,
    Fixed(u64),
}

impl Choice {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Choice::Auto);
        }
        s.parse::<u64>()
            .ok()
            .filter(|&v| v >= 1)
            .map(Choice::Fixed)
            .ok_or_else(|| Error::Input(format!("expected a positive integer or \"auto\", got {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct VvParams {
    pub t: Choice,
    pub t2: Choice,
    pub assignment: Assignment,
    /// Explicit `M1` and `M2` word lists; overrides the threshold sets.
    pub explicit: Option<(Vec<Word>, Vec<Word>)>,
    pub options: WordSetOptions,
}

impl Default for VvParams {
    fn default() -> Self {
        VvParams {
            t: Choice::Auto,
            t2: Choice::Auto,
            assignment: Assignment::Huffman,
            explicit: None,
            options: WordSetOptions::default(),
        }
    }
}

/// Kraft sums of `M1`, `M2` and `M1 ∧ M2` under the threshold lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct KraftSums {
    pub m1: f64,
    pub m2: f64,
    pub wedge: f64,
    /// Exact values, for explicit word sets.
    pub exact: Option<[BigRational; 3]>,
}

#[derive(Debug, Clone)]
pub struct VvCode {
    pub book: CodeBook,
    pub kraft: KraftSums,
}

/// Denominator for the thresholds: the common denominator of rational
/// log-weights, else the best-approximation denominators of the last
/// irrational log-weight.
pub fn candidate_denominators(model: &SourceModel, limit: u64) -> Result<(Vec<u64>, bool)> {
    let tol = model.tolerance().max(1e-9);
    if let Some(q) = denominator_of_rational_form(model.weights(), RATIONAL_DENOMINATOR_LIMIT, tol) {
        return Ok((vec![q], true));
    }
    for &d in model.weights().iter().rev() {
        match best_approx_denominators(d, limit.max(2)) {
            Ok(seq) => return Ok((seq.usable(), false)),
            Err(Error::RationalDegenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Input("no irrational log-weight".into()))
}

/// `T2` bound `⌈8 T³ ln T⌉`.
pub fn t2_ceiling(t: u64) -> u64 {
    if t <= 1 {
        return 1;
    }
    let t = t as f64;
    (8.0 * t.powi(3) * t.ln()).ceil() as u64
}

/// Smallest cap, doubling from `T²`, at which the mass reaching the cap in
/// either threshold set is at most `T^-2`.
pub fn auto_t2(model: &SourceModel, t: u64, opts: &WordSetOptions) -> Result<u64> {
    if t <= 1 {
        return Ok(1);
    }
    let ceiling = t2_ceiling(t);
    let theta = 2.0 / t as f64;
    let target = 1.0 / (t * t) as f64;
    let mut cap = (t * t).min(ceiling);
    loop {
        let (s1, s2) = build_threshold_sets(theta, cap)?;
        let mut worst: f64 = 0.0;
        for s in [&s1, &s2] {
            let table = lattice_metrics(model, s, &opts.lattice)?;
            // cap-hitting mass minus members of the rule at the cap itself
            worst = worst.max(table.limit_mass + table.live_mass);
        }
        if worst <= target || cap >= ceiling {
            return Ok(cap);
        }
        cap = (cap * 2).min(ceiling);
    }
}

/// Builds a VV code.
pub fn construct_vv(model: &SourceModel, params: &VvParams) -> Result<VvCode> {
    if let Some((m1, m2)) = &params.explicit {
        return construct_explicit(model, m1, m2, params.assignment);
    }
    match params.t {
        Choice::Fixed(t) => {
            let (_, rational) = candidate_denominators(model, t.max(2))?;
            construct_with_t(model, t, rational, params)
        }
        Choice::Auto => {
            let (list, rational) = candidate_denominators(model, AUTO_T_LIMIT)?;
            if rational {
                return construct_with_t(model, list[0], true, params);
            }
            let mut best: Option<VvCode> = None;
            for &t in list.iter().filter(|&&t| t <= AUTO_T_LIMIT) {
                // a larger cap never shrinks a word set
                let (p1, _) = build_threshold_sets(2.0 / t as f64, t * t)?;
                if build_word_set(model, &p1, &params.options)?.grade() != Grade::Codec {
                    break;
                }
                match explicit_with_t(model, t, false, params)? {
                    Ok(code) => best = Some(code),
                    Err(_) => break,
                }
            }
            match best {
                Some(c) => Ok(c),
                None => {
                    let t = *list
                        .first()
                        .ok_or_else(|| Error::Infeasible("no usable denominator".into()))?;
                    construct_with_t(model, t, false, params)
                }
            }
        }
    }
}

/// The explicit code for `T`, or the threshold profile sets when the word
/// sets are too large to list.
fn explicit_with_t(
    model: &SourceModel,
    t: u64,
    rational: bool,
    params: &VvParams,
) -> Result<std::result::Result<VvCode, (ProfileSet, ProfileSet, Provenance)>> {
    if t == 0 {
        return Err(Error::Input("T must be positive".into()));
    }
    let cap = match params.t2 {
        Choice::Fixed(c) => c,
        Choice::Auto => auto_t2(model, t, &params.options)?,
    };
    let theta = 2.0 / t as f64;
    let (p1, p2) = build_threshold_sets(theta, cap)?;
    let provenance = Provenance {
        t: Some(t),
        t2: Some(cap),
        thresholds: Some((theta, theta)),
        assignment: Some(params.assignment),
        rational_case: rational,
        ..Provenance::default()
    };

    let w1 = build_word_set(model, &p1, &params.options)?;
    if w1.grade() == Grade::Codec {
        let w2 = build_word_set(model, &p2, &params.options)?;
        if w2.grade() == Grade::Codec {
            let (m1, m2) = (w1.words().unwrap(), w2.words().unwrap());
            if wedge_words(m1, m2).len() <= params.options.enumeration_limit {
                return finish_explicit(model, &w1, &w2, params.assignment, provenance).map(Ok);
            }
        }
    }
    Ok(Err((p1, p2, provenance)))
}

/// Threshold construction for a fixed `T`.
pub fn construct_with_t(
    model: &SourceModel,
    t: u64,
    rational: bool,
    params: &VvParams,
) -> Result<VvCode> {
    let (p1, p2, provenance) = match explicit_with_t(model, t, rational, params)? {
        Ok(code) => return Ok(code),
        Err(sets) => sets,
    };
    let merged = merge_classes(model, &p1, &p2, &params.options.lattice)?;
    let kraft = KraftSums {
        m1: merged.kraft_m1,
        m2: merged.kraft_m2,
        wedge: merged.kraft_wedge,
        exact: None,
    };
    let provenance = Provenance {
        // class codes keep the threshold lengths
        assignment: Some(Assignment::Canonical),
        merge_trace: Some(merged.trace),
        ..provenance
    };
    let book = CodeBook::from_classes(
        model.clone(),
        CodeKind::Vv,
        merged.classes,
        merged.tail_mass,
        provenance,
    )?;
    Ok(VvCode { book, kraft })
}

fn construct_explicit(
    model: &SourceModel,
    m1: &[Word],
    m2: &[Word],
    assignment: Assignment,
) -> Result<VvCode> {
    for w in m1.iter().chain(m2) {
        model.validate_word(w)?;
    }
    let w1 = WordSet::from_words(m1.iter().cloned());
    let w2 = WordSet::from_words(m2.iter().cloned());
    for (name, w) in [("M1", &w1), ("M2", &w2)] {
        if w.is_prefix_free() != Some(true) {
            return Err(Error::Input(format!("{name} is not prefix-free")));
        }
        let total = w.total_probability(model);
        if (total - 1.0).abs() > crate::codebook::COMPLETENESS_TOLERANCE {
            return Err(Error::Input(format!("{name} is not complete (total probability {total})")));
        }
    }
    let cap = w1.max_length().max(w2.max_length());
    let provenance = Provenance {
        t2: Some(cap),
        assignment: Some(assignment),
        ..Provenance::default()
    };
    finish_explicit(model, &w1, &w2, assignment, provenance)
}

fn finish_explicit(
    model: &SourceModel,
    w1: &WordSet,
    w2: &WordSet,
    assignment: Assignment,
    provenance: Provenance,
) -> Result<VvCode> {
    let (m1, m2) = (w1.words().unwrap(), w2.words().unwrap());
    let rule = merge::LengthRule::new(model, m2);
    let k1 = merge::threshold_kraft(&rule, m1)?;
    let k2 = merge::threshold_kraft(&rule, m2)?;
    let kw = merge::threshold_kraft(&rule, &wedge_words(m1, m2))?;
    let kraft = KraftSums {
        m1: crate::codebook::ratio_to_f64(&k1),
        m2: crate::codebook::ratio_to_f64(&k2),
        wedge: crate::codebook::ratio_to_f64(&kw),
        exact: Some([k1, k2, kw]),
    };

    let (merged, trace) = merge_to_kraft(model, w1, w2)?;
    let words = merged.words().unwrap().to_vec();
    let probs = words
        .iter()
        .map(|w| model.word_probability(w))
        .collect::<Result<Vec<_>>>()?;
    let codes = match assignment {
        Assignment::Huffman => huffman_codewords(&probs, model.arity())?.1,
        Assignment::Canonical | Assignment::Fixed => {
            let lengths = words
                .iter()
                .map(|w| rule.length(w))
                .collect::<Result<Vec<_>>>()?;
            canonical_codewords(&lengths, model.arity())?
        }
    };
    let provenance = Provenance {
        merge_trace: Some(trace),
        ..provenance
    };
    let book = CodeBook::from_words(
        model.clone(),
        Alphabet::letters(model.alphabet_size()),
        CodeKind::Vv,
        words.into_iter().zip(codes).collect(),
        provenance,
    )?;
    Ok(VvCode { book, kraft })
}

/// The trace of a construction, or an empty one.
pub fn trace_of(book: &CodeBook) -> MergeTrace {
    book.provenance().merge_trace.clone().unwrap_or_default()
}
