//! Finished codes: input words, their probabilities and output codewords.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::source::{Alphabet, Profile, SourceModel, Word};
use crate::vv::prefix_code::{digits_to_string, kraft_sum, kraft_sum_weighted};
use crate::word_sets::{is_prefix_free, Grade};

/// Completeness tolerance on `Σ p(A_j)`.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    /// Variable-length input words, variable-length codewords.
    Vv,
    /// Variable-length input words, fixed-length codewords.
    Vf,
    /// Fixed-length input words.
    Block,
}

impl CodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodeKind::Vv => "vv",
            CodeKind::Vf => "vf",
            CodeKind::Block => "block",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vv" => Ok(CodeKind::Vv),
            "vf" => Ok(CodeKind::Vf),
            "block" => Ok(CodeKind::Block),
            _ => Err(Error::Format(format!("unknown code kind {s:?}"))),
        }
    }
}

/// How codeword lengths were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assignment {
    /// Threshold lengths `[-log_n p]` or `[-log_n p] + 1`, allocated canonically.
    Canonical,
    /// Huffman-optimal lengths on the final word set, allocated canonically.
    Huffman,
    /// Every codeword has the same length.
    Fixed,
}

impl Assignment {
    pub fn as_str(self) -> &'static str {
        match self {
            Assignment::Canonical => "canonical",
            Assignment::Huffman => "huffman",
            Assignment::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Assignment::Canonical),
            "huffman" => Ok(Assignment::Huffman),
            "fixed" => Ok(Assignment::Fixed),
            _ => Err(Error::Input(format!("unknown assignment {s:?}"))),
        }
    }
}

/// One step of the Kraft repair: an extension word (or profile class) and
/// the Kraft sum after adding it.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    /// The extension word, or a profile like `(2,1)` for class-level merges.
    pub label: String,
    pub probability: f64,
    /// Kraft sum after this step.
    pub g: f64,
    /// Exact Kraft sum after this step, when known.
    pub g_exact: Option<BigRational>,
    /// Whether the step changed the word set.
    pub changed: bool,
}

/// Ordered extension steps `A^1, A^2, …` and the stopping index `k0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MergeTrace {
    /// Kraft sum of the base set before any extension.
    pub g0: f64,
    pub steps: Vec<MergeStep>,
    /// Number of steps taken (`g(k0 - 1) > 1 ≥ g(k0)`); zero when the base already fits.
    pub k0: usize,
    /// Base and extension sets were exchanged.
    pub swapped: bool,
}

/// How a code was built; serialised alongside the code.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub t: Option<u64>,
    pub t2: Option<u64>,
    /// `(low, high)` thresholds of the two profile sets.
    pub thresholds: Option<(f64, f64)>,
    pub assignment: Option<Assignment>,
    pub merge_trace: Option<MergeTrace>,
    /// Output length for fixed-length codes.
    pub output_length: Option<u32>,
    /// Input length for block codes.
    pub input_length: Option<u32>,
    /// Least probable symbol (lowest index on ties) used by the VF window.
    pub min_symbol: Option<usize>,
    /// All log-weights were rational and `T` is their common denominator.
    pub rational_case: bool,
}

/// A codeword for one explicit input word.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeEntry {
    pub word: Word,
    pub probability: f64,
    pub codeword: Vec<u8>,
}

impl CodeEntry {
    pub fn length(&self) -> u32 {
        self.codeword.len() as u32
    }
}

/// All words of one stopping profile that receive the same codeword length.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeClass {
    pub profile: Profile,
    /// Total probability of the class.
    pub mass: f64,
    /// Probability of each word in the class.
    pub word_probability: f64,
    pub length: u32,
    pub count: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Body {
    Explicit(Vec<CodeEntry>),
    Classes {
        classes: Vec<CodeClass>,
        /// Mass left unresolved by a truncated lattice sweep.
        tail_mass: f64,
    },
}

/// A complete, prefix-free code for a source.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeBook {
    model: SourceModel,
    alphabet: Alphabet,
    kind: CodeKind,
    body: Body,
    provenance: Provenance,
}

/// Per-word (or per-class) quantities used by the analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    /// Total probability carried by the term.
    pub mass: f64,
    /// `log_n p(A)` of each word.
    pub log_prob: f64,
    pub input_length: u64,
    pub code_length: u32,
}

impl CodeBook {
    /// Builds and validates an explicit code. Entries are sorted by word.
    pub fn from_entries(
        model: SourceModel,
        alphabet: Alphabet,
        kind: CodeKind,
        mut entries: Vec<CodeEntry>,
        provenance: Provenance,
    ) -> Result<Self> {
        entries.sort_by(|a, b| a.word.cmp(&b.word));
        let book = CodeBook {
            model,
            alphabet,
            kind,
            body: Body::Explicit(entries),
            provenance,
        };
        book.validate()?;
        Ok(book)
    }

    /// Builds entries from words and codewords, computing probabilities from the model.
    pub fn from_words(
        model: SourceModel,
        alphabet: Alphabet,
        kind: CodeKind,
        pairs: Vec<(Word, Vec<u8>)>,
        provenance: Provenance,
    ) -> Result<Self> {
        let entries = pairs
            .into_iter()
            .map(|(word, codeword)| {
                let probability = model.word_probability(&word)?;
                Ok(CodeEntry {
                    word,
                    probability,
                    codeword,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(model, alphabet, kind, entries, provenance)
    }

    /// A metrics-grade code described by profile classes.
    pub fn from_classes(
        model: SourceModel,
        kind: CodeKind,
        classes: Vec<CodeClass>,
        tail_mass: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        let alphabet = Alphabet::letters(model.alphabet_size());
        let book = CodeBook {
            model,
            alphabet,
            kind,
            body: Body::Classes { classes, tail_mass },
            provenance,
        };
        book.validate()?;
        Ok(book)
    }

    fn validate(&self) -> Result<()> {
        let n = self.model.arity();
        let total = self.total_probability();
        if (total - 1.0).abs() > COMPLETENESS_TOLERANCE {
            return Err(Error::Incomplete(total));
        }
        if self.alphabet.len() != self.model.alphabet_size() {
            return Err(Error::Input("alphabet size does not match model".into()));
        }
        match &self.body {
            Body::Explicit(entries) => {
                if entries.is_empty() {
                    return Err(Error::Input("code has no words".into()));
                }
                for e in entries {
                    self.model.validate_word(&e.word)?;
                    if e.codeword.iter().any(|&d| d as u32 >= n) {
                        return Err(Error::Input(format!(
                            "codeword {} uses a digit outside arity {n}",
                            digits_to_string(&e.codeword)
                        )));
                    }
                    if e.codeword.is_empty() && entries.len() > 1 {
                        return Err(Error::Input("empty codeword".into()));
                    }
                }
                let words: Vec<Word> = entries.iter().map(|e| e.word.clone()).collect();
                if !is_prefix_free(&words) {
                    return Err(Error::Input("input words are not prefix-free".into()));
                }
                let mut codes: Vec<Word> = entries.iter().map(|e| Word::new(e.codeword.clone())).collect();
                codes.sort();
                if !is_prefix_free(&codes) {
                    return Err(Error::Input("codewords are not prefix-free".into()));
                }
                if self.kraft_exact().expect("explicit codes are exact") > BigRational::one() {
                    return Err(Error::Infeasible("Kraft sum exceeds one".into()));
                }
            }
            Body::Classes { .. } => {
                if self.kraft_sum() > 1.0 + 1e-12 {
                    return Err(Error::Infeasible("Kraft sum exceeds one".into()));
                }
            }
        }
        Ok(())
    }

    pub fn model(&self) -> &SourceModel {
        &self.model
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn arity(&self) -> u32 {
        self.model.arity()
    }

    pub fn grade(&self) -> Grade {
        match self.body {
            Body::Explicit(_) => Grade::Codec,
            Body::Classes { .. } => Grade::Metrics,
        }
    }

    /// Entries sorted by input word; `None` for metrics-grade codes.
    pub fn entries(&self) -> Option<&[CodeEntry]> {
        match &self.body {
            Body::Explicit(e) => Some(e),
            Body::Classes { .. } => None,
        }
    }

    pub fn classes(&self) -> Option<&[CodeClass]> {
        match &self.body {
            Body::Explicit(_) => None,
            Body::Classes { classes, .. } => Some(classes),
        }
    }

    /// Probability mass not resolved into words or classes.
    pub fn tail_mass(&self) -> f64 {
        match &self.body {
            Body::Explicit(_) => 0.0,
            Body::Classes { tail_mass, .. } => *tail_mass,
        }
    }

    pub fn terms(&self) -> Vec<Term> {
        let ln_n = self.model.ln_arity();
        match &self.body {
            Body::Explicit(entries) => entries
                .iter()
                .map(|e| Term {
                    mass: e.probability,
                    log_prob: e.probability.ln() / ln_n,
                    input_length: e.word.len() as u64,
                    code_length: e.length(),
                })
                .collect(),
            Body::Classes { classes, .. } => classes
                .iter()
                .map(|c| Term {
                    mass: c.mass,
                    log_prob: -self.model.linear_form_unchecked(c.profile.counts()),
                    input_length: c.profile.len(),
                    code_length: c.length,
                })
                .collect(),
        }
    }

    /// `Σ p(A_j)`, including any unresolved tail.
    pub fn total_probability(&self) -> f64 {
        self.terms().iter().map(|t| t.mass).sum::<f64>() + self.tail_mass()
    }

    /// Exact Kraft sum when codeword counts are known.
    pub fn kraft_exact(&self) -> Option<BigRational> {
        let n = self.model.arity();
        match &self.body {
            Body::Explicit(entries) => {
                let lengths: Vec<u32> = entries.iter().map(CodeEntry::length).collect();
                Some(kraft_sum(&lengths, n))
            }
            Body::Classes { classes, tail_mass } => {
                if *tail_mass > 0.0 {
                    return None;
                }
                let terms = classes
                    .iter()
                    .map(|c| c.count.clone().map(|k| (c.length, k)))
                    .collect::<Option<Vec<_>>>()?;
                Some(kraft_sum_weighted(terms, n))
            }
        }
    }

    /// `Σ n^(-l_j)` in floating point. For class codes this is
    /// `Σ mass · n^(-ε)`, plus `n · tail` as a bound for unresolved mass.
    pub fn kraft_sum(&self) -> f64 {
        if let Some(exact) = self.kraft_exact() {
            return ratio_to_f64(&exact);
        }
        let n = self.model.arity() as f64;
        let mut s = 0.0;
        for t in self.terms() {
            let eps = t.code_length as f64 + t.log_prob;
            s += t.mass * n.powf(-eps);
        }
        s + n * self.tail_mass()
    }

    /// Input words with at least this many symbols are never buffered beyond.
    pub fn max_word_length(&self) -> u64 {
        self.terms().iter().map(|t| t.input_length).max().unwrap_or(0)
    }

    /// Distinct codeword lengths (one value for fixed-length codes).
    pub fn code_lengths(&self) -> Vec<u32> {
        self.terms().iter().map(|t| t.code_length).collect()
    }

    /// Checks that codewords are unique (used for fixed-length codes).
    pub fn codewords_distinct(&self) -> Option<bool> {
        let e = self.entries()?;
        let set: HashSet<&[u8]> = e.iter().map(|x| x.codeword.as_slice()).collect();
        Some(set.len() == e.len())
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    // numerator and denominator may both exceed f64 range
    use num_traits::ToPrimitive;
    if let (Some(a), Some(b)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if a.is_finite() && b.is_finite() && b > 0.0 {
            return a / b;
        }
    }
    let shift = r.denom().bits().saturating_sub(900);
    let a = (r.numer() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}
