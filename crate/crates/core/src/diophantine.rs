//! Fractional parts, continued fractions and best rational approximations.
//!
//! The ideal code length of a word is a linear form in its letter counts.
//! Keeping its fractional part close to 0 (or 1) is what makes a code
//! efficient, and the denominators of best approximations to the last
//! log-weight control how quickly that can be arranged.

use crate::error::{Error, Result};
use crate::source::{Profile, SourceModel};

/// `x - floor(x)`, always in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance from `x` to the nearest integer, in `[0, 0.5]`.
pub fn dist_to_int(x: f64) -> f64 {
    let f = frac(x);
    f.min(1.0 - f)
}

/// One best approximation: denominator `q` and `‖q·x‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestApprox {
    pub q: u64,
    pub err: f64,
}

/// Denominators `q` with `‖q·x‖` strictly smaller than for every smaller positive denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct BestApproxSequence {
    pub x: f64,
    pub entries: Vec<BestApprox>,
}

impl BestApproxSequence {
    pub fn denominators(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.q).collect()
    }

    /// Denominators usable for the shift search: every entry except the first.
    pub fn usable(&self) -> Vec<u64> {
        self.entries.iter().skip(1).map(|e| e.q).collect()
    }
}

/// A convergent `p/q` of a continued-fraction expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergent {
    pub p: i128,
    pub q: i128,
    /// Partial quotient that produced this convergent.
    pub a: i128,
}

/// Continued-fraction convergents of `x` with denominators up to `q_max`.
///
/// Expansion stops when the remainder is within `tol` of zero or its
/// reciprocal exceeds `1/tol`, which is where binary64 noise takes over.
pub fn convergents(x: f64, q_max: u64, tol: f64) -> Vec<Convergent> {
    let mut out = Vec::new();
    let (mut p_prev, mut q_prev) = (1i128, 0i128);
    let (mut p_prev2, mut q_prev2) = (0i128, 1i128);
    let mut y = x;
    loop {
        let a = y.floor();
        let a_int = a as i128;
        let p = a_int * p_prev + p_prev2;
        let q = a_int * q_prev + q_prev2;
        if q > q_max as i128 {
            break;
        }
        out.push(Convergent { p, q, a: a_int });
        let r = y - a;
        if r <= tol || 1.0 / r > 1.0 / tol {
            break;
        }
        y = 1.0 / r;
        p_prev2 = p_prev;
        q_prev2 = q_prev;
        p_prev = p;
        q_prev = q;
    }
    out
}

/// All best-approximation denominators of `x` up to `q_max`.
pub fn best_approx_denominators(x: f64, q_max: u64) -> Result<BestApproxSequence> {
    best_approx_denominators_with_tol(x, q_max, crate::source::DEFAULT_TOLERANCE)
}

pub fn best_approx_denominators_with_tol(
    x: f64,
    q_max: u64,
    tol: f64,
) -> Result<BestApproxSequence> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Input(format!("approximated value must be positive, got {x}")));
    }
    if q_max < 2 {
        return Err(Error::Input(format!("q_max must be at least 2, got {q_max}")));
    }
    if dist_to_int(x) <= tol {
        return Err(Error::RationalDegenerate(x));
    }
    let mut entries: Vec<BestApprox> = Vec::new();
    for c in convergents(x, q_max, tol) {
        let q = c.q as u64;
        if q == 0 {
            continue;
        }
        let err = dist_to_int(q as f64 * x);
        match entries.last_mut() {
            // leading 0/1 and 1/1 convergents share q = 1
            Some(last) if last.q == q => {}
            Some(last) if err >= last.err => {}
            _ => entries.push(BestApprox { q, err }),
        }
    }
    Ok(BestApproxSequence { x, entries })
}

/// Which side of an integer the shifted linear form should land on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `{f} ≤ 2/T`
    Low,
    /// `1 - {f} ≤ 2/T`
    High,
}

/// Smallest `s ∈ [0, T)` such that adding `s` copies of the last symbol puts
/// the linear form within `2/T` of an integer on the requested side.
pub fn find_shift(model: &SourceModel, profile: &Profile, t: u64, side: Side) -> Result<u64> {
    if profile.dim() != model.alphabet_size() {
        return Err(Error::Input("profile dimension does not match model".into()));
    }
    if t == 0 {
        return Err(Error::Input("denominator must be positive".into()));
    }
    let bound = 2.0 / t as f64 + model.tolerance();
    let base = model.linear_form(profile)?;
    let d_last = *model.weights().last().expect("m >= 2");
    for s in 0..t {
        let v = frac(base + s as f64 * d_last);
        let ok = match side {
            Side::Low => v <= bound,
            Side::High => 1.0 - v <= bound,
        };
        if ok {
            return Ok(s);
        }
    }
    Err(Error::Lemma1Violated { denominator: t })
}

/// Least common denominator `q ≤ max_den` of the log-weights, when every
/// `d_i` is within `tol` of a rational with denominator at most `max_den`.
pub fn denominator_of_rational_form(weights: &[f64], max_den: u64, tol: f64) -> Option<u64> {
    let mut lcm = 1u64;
    for &d in weights {
        let q = (1..=max_den).find(|&q| dist_to_int(q as f64 * d) <= tol * q as f64)?;
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > max_den {
            return None;
        }
    }
    Some(lcm)
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
