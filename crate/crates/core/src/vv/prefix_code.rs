//! Kraft sums, canonical codeword allocation and n-ary Huffman lengths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};

/// `Σ n^(-l)` as an exact fraction.
pub fn kraft_sum(lengths: &[u32], n: u32) -> BigRational {
    kraft_sum_weighted(lengths.iter().map(|&l| (l, BigUint::one())), n)
}

/// `Σ c · n^(-l)` over `(l, c)` pairs, exactly.
pub fn kraft_sum_weighted<I>(terms: I, n: u32) -> BigRational
where
    I: IntoIterator<Item = (u32, BigUint)>,
{
    let terms: Vec<(u32, BigUint)> = terms.into_iter().collect();
    let max_l = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let base = BigUint::from(n);
    let mut num = BigUint::zero();
    for (l, c) in terms {
        num += c * Pow::pow(&base, max_l - l);
    }
    let den = Pow::pow(&base, max_l);
    BigRational::new(num.into(), den.into())
}

/// True when an exact Kraft sum is at most one.
pub fn kraft_feasible(sum: &BigRational) -> bool {
    *sum <= BigRational::one()
}

/// Assigns codewords with the given lengths, in order of `(length, index)`:
/// each codeword is the previous one plus one, padded with zeros.
///
/// The result is indexed like `lengths`.
pub fn canonical_codewords(lengths: &[u32], n: u32) -> Result<Vec<Vec<u8>>> {
    if lengths.is_empty() {
        return Ok(Vec::new());
    }
    if lengths.contains(&0) && lengths.len() > 1 {
        return Err(Error::Infeasible("zero-length codeword among several".into()));
    }
    if !kraft_feasible(&kraft_sum(lengths, n)) {
        return Err(Error::Infeasible(
            "codeword lengths violate the Kraft inequality".into(),
        ));
    }
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));
    let mut out = vec![Vec::new(); lengths.len()];
    let mut code: Vec<u8> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 {
            increment(&mut code, n as u8);
        }
        code.resize(lengths[i] as usize, 0);
        out[i] = code.clone();
    }
    Ok(out)
}

fn increment(code: &mut [u8], n: u8) {
    for d in code.iter_mut().rev() {
        if *d + 1 < n {
            *d += 1;
            return;
        }
        *d = 0;
    }
    // unreachable when the Kraft sum is at most one
    panic!("canonical code overflow");
}

#[derive(Debug)]
struct Node {
    weight: f64,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // reversed: BinaryHeap is a max-heap and we pop the lightest, oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Optimal n-ary codeword lengths for the given probabilities.
///
/// Ties are broken by merging the lightest nodes, oldest first. A single
/// symbol gets length 1.
pub fn huffman_lengths(probs: &[f64], n: u32) -> Vec<u32> {
    let count = probs.len();
    if count == 0 {
        return Vec::new();
    }
    if count == 1 {
        return vec![1];
    }
    let n = n as usize;
    let mut dummies = 0;
    while !(count + dummies - 1).is_multiple_of(n - 1) {
        dummies += 1;
    }
    let total = count + dummies;
    let mut parent = vec![usize::MAX; total];
    let mut heap = BinaryHeap::new();
    for (i, &p) in probs.iter().enumerate() {
        heap.push(Node { weight: p, seq: i });
    }
    for j in 0..dummies {
        heap.push(Node {
            weight: 0.0,
            seq: count + j,
        });
    }
    let mut next = total;
    while heap.len() > 1 {
        let mut w = 0.0;
        for _ in 0..n {
            let node = heap.pop().expect("padded to a full tree");
            w += node.weight;
            parent[node.seq] = next;
        }
        parent.push(usize::MAX);
        heap.push(Node {
            weight: w,
            seq: next,
        });
        next += 1;
    }
    (0..count)
        .map(|i| {
            let mut depth = 0;
            let mut at = i;
            while parent[at] != usize::MAX {
                at = parent[at];
                depth += 1;
            }
            depth
        })
        .collect()
}

/// Huffman lengths followed by canonical allocation.
pub fn huffman_codewords(probs: &[f64], n: u32) -> Result<(Vec<u32>, Vec<Vec<u8>>)> {
    let lengths = huffman_lengths(probs, n);
    let codes = canonical_codewords(&lengths, n)?;
    Ok((lengths, codes))
}

/// Renders digits as `0-9A-Z`.
pub fn digits_to_string(digits: &[u8]) -> String {
    digits.iter().map(|&d| digit_char(d)).collect()
}

pub fn digit_char(d: u8) -> char {
    char::from_digit(d as u32, 36)
        .expect("digit below 36")
        .to_ascii_uppercase()
}

pub fn parse_digit(c: char, n: u32) -> Option<u8> {
    c.to_digit(36).filter(|&d| d < n).map(|d| d as u8)
}

pub fn string_to_digits(s: &str, n: u32) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| parse_digit(c, n).ok_or_else(|| Error::Input(format!("digit {c:?} not valid for arity {n}"))))
        .collect()
}
