//! Memoryless sources, words over the input alphabet, and letter-count profiles.
//!
//! A [`SourceModel`] is fixed by its probability vector and the output arity
//! `n`. Everything downstream works with the log-weights
//! `d_i = -log_n p_i`, because the ideal code length of a word is the linear
//! form `Σ k_i d_i` of its [`Profile`].

use std::fmt;

use crate::error::{Error, Result};

/// Default tolerance for probability normalisation and threshold comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// A Bernoulli source over `m` input symbols together with the output arity.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    probs: Vec<f64>,
    prob_text: Vec<String>,
    arity: u32,
    weights: Vec<f64>,
    tolerance: f64,
}

impl SourceModel {
    /// Builds a model from numeric probabilities.
    pub fn new(probs: Vec<f64>, arity: u32) -> Result<Self> {
        let text = probs.iter().map(|p| format!("{p}")).collect();
        Self::build(probs, text, arity)
    }

    /// Builds a model from textual probabilities: decimals (`0.4`) or ratios (`1/3`).
    pub fn parse<S: AsRef<str>>(probs: &[S], arity: u32) -> Result<Self> {
        let mut values = Vec::with_capacity(probs.len());
        let mut text = Vec::with_capacity(probs.len());
        for p in probs {
            let s = p.as_ref().trim();
            values.push(parse_probability(s)?);
            text.push(s.to_string());
        }
        Self::build(values, text, arity)
    }

    /// The uniform source on `m` symbols, probabilities written as `1/m`.
    pub fn uniform(m: usize, arity: u32) -> Result<Self> {
        let text: Vec<String> = (0..m).map(|_| format!("1/{m}")).collect();
        Self::parse(&text, arity)
    }

    fn build(probs: Vec<f64>, prob_text: Vec<String>, arity: u32) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Input(format!(
                "alphabet needs at least 2 symbols, got {}",
                probs.len()
            )));
        }
        if probs.len() > u8::MAX as usize + 1 {
            return Err(Error::Input("alphabet larger than 256 symbols".into()));
        }
        if !(2..=36).contains(&arity) {
            return Err(Error::Input(format!("output arity must be in 2..=36, got {arity}")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0 && **p < 1.0)) {
            return Err(Error::Input(format!("probability {p} outside (0, 1)")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DEFAULT_TOLERANCE * probs.len() as f64 * 4.0 {
            return Err(Error::Input(format!("probabilities sum to {total}, not 1")));
        }
        let ln_n = (arity as f64).ln();
        let weights = probs.iter().map(|p| -p.ln() / ln_n).collect();
        Ok(SourceModel {
            probs,
            prob_text,
            arity,
            weights,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    /// Replaces the comparison tolerance used by threshold tests.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn arity(&self) -> u32 {
        self.arity
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// The probabilities as originally written.
    pub fn prob_text(&self) -> &[String] {
        &self.prob_text
    }

    /// `d_i = -log_n p_i`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn ln_arity(&self) -> f64 {
        (self.arity as f64).ln()
    }

    /// Index of the least probable symbol; the lowest index wins ties.
    pub fn min_prob_symbol(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p < self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Index of the most probable symbol; the lowest index wins ties.
    pub fn max_prob_symbol(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Source entropy in bits per input symbol.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().map(|p| p * p.log2()).sum::<f64>()
    }

    /// Entropy in output symbols per input symbol, `H / log2 n`.
    pub fn entropy_rate(&self) -> f64 {
        self.entropy() / (self.arity as f64).log2()
    }

    fn check_symbol(&self, s: u8) -> Result<()> {
        if (s as usize) < self.probs.len() {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "symbol index {s} outside alphabet of size {}",
                self.probs.len()
            )))
        }
    }

    pub fn validate_word(&self, word: &Word) -> Result<()> {
        word.symbols().iter().try_for_each(|&s| self.check_symbol(s))
    }

    /// `p(A) = p_{i_1} ⋯ p_{i_k}`; the empty word has probability one.
    pub fn word_probability(&self, word: &Word) -> Result<f64> {
        self.validate_word(word)?;
        Ok(word.symbols().iter().map(|&s| self.probs[s as usize]).product())
    }

    /// `Σ k_i d_i`, which equals `-log_n p(A)` for any word `A` with this profile.
    pub fn linear_form(&self, profile: &Profile) -> Result<f64> {
        if profile.dim() != self.alphabet_size() {
            return Err(Error::Input(format!(
                "profile has dimension {}, model has {} symbols",
                profile.dim(),
                self.alphabet_size()
            )));
        }
        Ok(self.linear_form_unchecked(profile.counts()))
    }

    pub(crate) fn linear_form_unchecked(&self, counts: &[u32]) -> f64 {
        counts
            .iter()
            .zip(&self.weights)
            .map(|(&k, d)| k as f64 * d)
            .sum()
    }

    /// `p^k = Π p_i^{k_i}`.
    pub(crate) fn profile_probability(&self, counts: &[u32]) -> f64 {
        counts
            .iter()
            .zip(&self.probs)
            .map(|(&k, p)| p.powi(k as i32))
            .product()
    }

    /// `-log_n p(A)` for a word.
    pub fn ideal_length(&self, word: &Word) -> Result<f64> {
        self.validate_word(word)?;
        Ok(word.symbols().iter().map(|&s| self.weights[s as usize]).sum())
    }
}

/// Parses `0.25`, `.25`, `1/4` or `1e-1`.
pub fn parse_probability(s: &str) -> Result<f64> {
    let bad = || Error::Input(format!("cannot parse probability {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad())?;
        let den: f64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0.0 {
            return Err(bad());
        }
        Ok(num / den)
    } else {
        s.parse().map_err(|_| bad())
    }
}

/// A word over the input alphabet, stored as 0-based symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    /// The empty word λ.
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, s: u8) {
        self.0.push(s);
    }

    /// True when `self` is a prefix of `other` (including equality).
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn profile(&self, m: usize) -> Profile {
        let mut k = vec![0u32; m];
        for &s in &self.0 {
            k[s as usize] += 1;
        }
        Profile(k)
    }

    /// Parses a word written with the default glyphs `a`, `b`, `c`, …
    pub fn from_letters(text: &str) -> Result<Word> {
        Alphabet::letters(26).parse_word(text)
    }

    pub fn to_letters(&self) -> String {
        Alphabet::letters(26).render(self)
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

/// Per-symbol letter counts of a word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile(Vec<u32>);

#[allow(clippy::len_without_is_empty)]
impl Profile {
    pub fn zero(m: usize) -> Self {
        Profile(vec![0; m])
    }

    pub fn new(counts: Vec<u32>) -> Self {
        Profile(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total number of letters, `|A|`.
    pub fn len(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// `t(A)`: number of letters other than the last alphabet symbol.
    pub fn t(&self) -> u64 {
        self.0[..self.0.len() - 1].iter().map(|&k| k as u64).sum()
    }

    pub fn add(&self, other: &Profile) -> Profile {
        Profile(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// The profile with `extra` more copies of the last symbol.
    pub fn shift_last(&self, extra: u32) -> Profile {
        let mut k = self.0.clone();
        *k.last_mut().expect("profile has at least one coordinate") += extra;
        Profile(k)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Maps symbol indices to user-visible single-character glyphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    glyphs: Vec<char>,
}

impl Alphabet {
    /// `a`, `b`, `c`, … for the first `m` symbols (then digits and upper case).
    pub fn letters(m: usize) -> Self {
        let pool = "abcdefghijklmnopqrstuvwxyz0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
        Alphabet {
            glyphs: pool.chars().cycle().take(m).collect(),
        }
    }

    pub fn from_glyphs(glyphs: Vec<char>) -> Result<Self> {
        let mut seen = glyphs.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != glyphs.len() {
            return Err(Error::Input("duplicate glyph in alphabet".into()));
        }
        if glyphs.iter().any(|c| c.is_whitespace()) {
            return Err(Error::Input("glyphs may not be whitespace".into()));
        }
        Ok(Alphabet { glyphs })
    }

    pub fn glyphs(&self) -> &[char] {
        &self.glyphs
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.glyphs.iter().position(|&g| g == c).map(|i| i as u8)
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.chars()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| Error::Input(format!("glyph {c:?} not in alphabet")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    pub fn render(&self, word: &Word) -> String {
        word.symbols().iter().map(|&s| self.glyphs[s as usize]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::from_letters(s).unwrap()
    }

    #[test]
    fn entropy_values() {
        let m = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        assert!((m.entropy() - 0.970_950_594).abs() < 1e-9);
        assert_eq!(format!("{:.3}", m.entropy()), "0.971");
        let half = SourceModel::new(vec![0.5, 0.5], 2).unwrap();
        assert_eq!(half.entropy(), 1.0);
        let third = SourceModel::parse(&["1/3", "1/3", "1/3"], 2).unwrap();
        assert!((third.entropy() - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn word_probabilities() {
        let m = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        assert!((m.word_probability(&w("bab")).unwrap() - 0.6 * 0.4 * 0.6).abs() < 1e-15);
        assert!((m.word_probability(&w("bbb")).unwrap() - 0.216).abs() < 1e-15);
        assert_eq!(m.word_probability(&Word::empty()).unwrap(), 1.0);
        assert!(matches!(m.word_probability(&w("abc")), Err(Error::Input(_))));
    }

    #[test]
    fn profiles() {
        assert_eq!(w("baa").profile(2), Profile::new(vec![2, 1]));
        assert_eq!(Word::empty().profile(2), Profile::zero(2));
        assert_eq!(w("bbb").profile(2), Profile::new(vec![0, 3]));
        assert_eq!(w("bbb").profile(2).t(), 0);
        assert_eq!(w("abcab").profile(3).t(), 4);
    }

    #[test]
    fn linear_form_values() {
        let m = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        let d = m.weights();
        assert_eq!(format!("{:.3} {:.3}", d[0], d[1]), "1.322 0.737");
        let f11 = m.linear_form(&Profile::new(vec![1, 1])).unwrap();
        assert_eq!(format!("{f11:.3}"), "2.059");
        assert_eq!(m.linear_form(&Profile::zero(2)).unwrap(), 0.0);
        let f21 = m.linear_form(&Profile::new(vec![2, 1])).unwrap();
        assert!((f21 - (2.0 * 1.321928094887362 + 0.736965594166206)).abs() < 1e-12);
        assert_eq!(format!("{f21:.3}"), "3.381");
        assert!(m.linear_form(&Profile::zero(3)).is_err());
    }

    #[test]
    fn rejects_bad_models() {
        assert!(SourceModel::new(vec![1.0], 2).is_err());
        assert!(SourceModel::new(vec![0.5, 0.6], 2).is_err());
        assert!(SourceModel::new(vec![0.0, 1.0], 2).is_err());
        assert!(SourceModel::new(vec![0.5, 0.5], 1).is_err());
        assert!(SourceModel::parse(&["x", "0.5"], 2).is_err());
    }

    #[test]
    fn min_and_max_symbols_break_ties_low() {
        let m = SourceModel::parse(&["0.25", "0.25", "0.5"], 2).unwrap();
        assert_eq!(m.min_prob_symbol(), 0);
        assert_eq!(m.max_prob_symbol(), 2);
    }
}
