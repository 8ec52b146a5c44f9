//! Codes with fixed-length output: the window construction for arbitrary
//! sources and equiprobable block codes.

use crate::codebook::{Assignment, CodeBook, CodeKind, Provenance};
use crate::diophantine::convergents;
use crate::error::{Error, Result};
use crate::source::{Alphabet, SourceModel, Word};
use crate::word_sets::{build_word_set, ProfileSet, Rule, WordSetOptions};

/// Smallest `L` with `n^L ≥ m`.
pub fn min_output_length(m: usize, n: u32) -> u32 {
    let mut l = 0;
    let mut cap = 1u128;
    while cap < m as u128 {
        cap *= n as u128;
        l += 1;
    }
    l
}

/// `i` as an `L`-digit base-`n` string.
pub fn fixed_codeword(mut i: u128, n: u32, l: u32) -> Vec<u8> {
    let mut out = vec![0u8; l as usize];
    for d in out.iter_mut().rev() {
        *d = (i % n as u128) as u8;
        i /= n as u128;
    }
    out
}

/// Assigns `0, 1, 2, …` as length-`L` codewords in order of decreasing
/// probability, ties by word.
fn fixed_pairs(model: &SourceModel, words: Vec<Word>, l: u32) -> Result<Vec<(Word, Vec<u8>)>> {
    let mut ranked = words
        .into_iter()
        .map(|w| Ok((model.word_probability(&w)?, w)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let n = model.arity();
    Ok(ranked
        .into_iter()
        .enumerate()
        .map(|(i, (_, w))| (w, fixed_codeword(i as u128, n, l)))
        .collect())
}

/// Words stop at the first prefix whose ideal length `-log_n p` falls in
/// `(L - d_max, L]`, where `d_max = -log_n p_min`; each word then gets its
/// own length-`L` codeword.
///
/// For `L < d_max` the window can be skipped, and the code maps single
/// symbols instead.
pub fn construct_vf(model: &SourceModel, l: u32) -> Result<CodeBook> {
    let m = model.alphabet_size();
    let n = model.arity();
    if l < min_output_length(m, n) {
        return Err(Error::Infeasible(format!(
            "output length {l} cannot index {m} symbols in base {n}"
        )));
    }
    if l > 64 {
        return Err(Error::Resource(format!("output length {l} is too large")));
    }
    let min_symbol = model.min_prob_symbol();
    let weights = model.weights();
    let d_max = weights[min_symbol];
    let d_min = weights.iter().cloned().fold(f64::INFINITY, f64::min);

    let words = if (l as f64) < d_max - model.tolerance() {
        (0..m as u8).map(|s| Word::new(vec![s])).collect()
    } else {
        // the window is hit by length L/d_min at the latest
        let cap = (l as f64 / d_min).floor() as u64 + 1;
        let pset = ProfileSet::new(Rule::VfWindow(l), cap)?;
        let set = build_word_set(model, &pset, &WordSetOptions::default())?;
        set.words()
            .ok_or_else(|| Error::Resource(format!("too many words for L = {l}")))?
            .to_vec()
    };
    let provenance = Provenance {
        assignment: Some(Assignment::Fixed),
        output_length: Some(l),
        min_symbol: Some(min_symbol),
        ..Provenance::default()
    };
    let pairs = fixed_pairs(model, words, l)?;
    CodeBook::from_words(
        model.clone(),
        Alphabet::letters(m),
        CodeKind::Vf,
        pairs,
        provenance,
    )
}

/// A block-code parameter pair: `X` input symbols, `L` output digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockParams {
    pub x: u64,
    pub l: u64,
}

/// Pairs with `L - 1/X ≤ X log_n m ≤ L`, in increasing `X`.
///
/// When `log_n m = a/b` is rational every multiple of `(b, a)` is exact and
/// that family is returned. Otherwise candidates are the convergents and
/// intermediate fractions of `log_n m` lying above it, plus their multiples.
pub fn find_block_parameters(m: usize, n: u32, count: usize) -> Result<Vec<BlockParams>> {
    if m < 2 || n < 2 {
        return Err(Error::Input("block codes need m, n >= 2".into()));
    }
    if let Some((a, b)) = exact_log(m as u128, n as u128) {
        return Ok((1..=count as u64)
            .map(|k| BlockParams { x: b * k, l: a * k })
            .collect());
    }
    let x = (m as f64).ln() / (n as f64).ln();
    let q_max: u64 = 10_000_000;
    let cf = convergents(x, q_max, 1e-15);
    let mut found: Vec<BlockParams> = Vec::new();
    let mut add = |p: i128, q: i128| {
        if q <= 0 {
            return;
        }
        let mut k = 1i128;
        loop {
            let (pp, qq) = (p * k, q * k);
            if qq as u64 > q_max || !valid_pair(x, qq as u64, pp as u64) {
                break;
            }
            found.push(BlockParams {
                x: qq as u64,
                l: pp as u64,
            });
            k += 1;
        }
    };
    for w in 0..cf.len() {
        let c = cf[w];
        add(c.p, c.q);
        // intermediate fractions (p_{k-1} + j p_k) / (q_{k-1} + j q_k)
        if w + 1 < cf.len() && w >= 1 {
            let prev = cf[w - 1];
            let next_a = cf[w + 1].a;
            for j in 1..next_a {
                add(prev.p + j * c.p, prev.q + j * c.q);
            }
        } else if w == 0 && cf.len() > 1 {
            // fractions (1 + j p_0) / j ahead of the second convergent
            for j in 1..cf[1].a {
                add(1 + j * c.p, j);
            }
        }
    }
    found.sort_by_key(|b| b.x);
    found.dedup();
    found.truncate(count);
    Ok(found)
}

/// `L - 1/X ≤ X·x ≤ L`, checked with a small slack for rounding.
pub fn valid_pair(x: f64, bx: u64, bl: u64) -> bool {
    let v = bx as f64 * x;
    let gap = bl as f64 - v;
    gap >= -1e-12 && gap <= 1.0 / bx as f64 + 1e-12 && gap < 1.0
}

/// `(a, b)` with `n^a = m^b` in lowest terms, if any.
fn exact_log(m: u128, n: u128) -> Option<(u64, u64)> {
    // m^b = n^a iff both are powers of a common base
    let root = |mut v: u128| -> (u128, u64) {
        for e in (2..=64u32).rev() {
            let r = (v as f64).powf(1.0 / e as f64).round() as u128;
            for c in [r.saturating_sub(1), r, r + 1] {
                if c >= 2 && c.checked_pow(e) == Some(v) {
                    v = c;
                    return (v, e as u64);
                }
            }
        }
        (v, 1)
    };
    let (bm, em) = root(m);
    let (bn, en) = root(n);
    if bm != bn {
        return None;
    }
    let g = crate::diophantine::gcd(em, en);
    Some((em / g, en / g))
}

/// All `m^X` words of length `X`, each mapped to a distinct length-`L` string.
pub fn construct_block(m: usize, n: u32, x: u32, l: u32) -> Result<CodeBook> {
    if x == 0 || l == 0 {
        return Err(Error::Input("block lengths must be positive".into()));
    }
    let words_needed = (m as f64).powi(x as i32);
    if words_needed > 4_000_000.0 {
        return Err(Error::Resource(format!("{m}^{x} words is too many")));
    }
    let count = (m as u128).pow(x);
    if (n as u128).checked_pow(l).is_some_and(|c| c < count) {
        return Err(Error::Infeasible(format!(
            "{m}^{x} words do not fit into {n}^{l} codewords"
        )));
    }
    let model = SourceModel::uniform(m, n)?;
    let pairs: Vec<(Word, Vec<u8>)> = (0..count)
        .map(|i| {
            let w = fixed_codeword(i, m as u32, x);
            (Word::new(w), fixed_codeword(i, n, l))
        })
        .collect();
    let provenance = Provenance {
        assignment: Some(Assignment::Fixed),
        output_length: Some(l),
        input_length: Some(x),
        ..Provenance::default()
    };
    CodeBook::from_words(model, Alphabet::letters(m), CodeKind::Block, pairs, provenance)
}

/// `L/X - log_n m`, the redundancy of an equiprobable block code.
pub fn block_redundancy(m: usize, n: u32, x: u64, l: u64) -> f64 {
    l as f64 / x as f64 - (m as f64).ln() / (n as f64).ln()
}
