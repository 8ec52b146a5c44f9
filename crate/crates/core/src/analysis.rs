//! Delay and redundancy of a code, the exact redundancy identity and the
//! bounds that follow from it.

use num_traits::Signed;

use crate::codebook::{CodeBook, CodeKind, COMPLETENESS_TOLERANCE};
use crate::diophantine::dist_to_int;
use crate::error::{Error, Result};
use crate::source::SourceModel;
use crate::vv::{construct_with_t, Choice, VvParams};
use crate::word_sets::{CountMode, WordSetOptions};

/// `ε` and its clamp to `[-1, 1]` for one term of the code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Excess {
    pub mass: f64,
    pub eps: f64,
    pub eps_clamped: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeMetrics {
    /// Average delay `N̄ = Σ p|A|`.
    pub avg_delay: f64,
    /// Maximum delay `N`.
    pub max_delay: u64,
    pub redundancy: f64,
    /// Kraft slack `1 - Σ n^(-l)`.
    pub delta: f64,
    /// Entropy in bits per input symbol.
    pub entropy: f64,
    /// `Σ p · l`, expected codeword length per word.
    pub avg_code_length: f64,
    pub excess: Vec<Excess>,
    pub max_abs_eps: f64,
    pub theorem1_lower: f64,
    /// Present when every `|ε| ≤ 1`.
    pub theorem1_upper: Option<f64>,
    pub corollary_lower: f64,
    pub identity_residual: f64,
    /// `|H N̄ + Σ p log2 p|`; zero for a complete word set.
    pub entropy_residual: f64,
    /// Probability mass not resolved into words (metrics-grade codes).
    pub tail_mass: f64,
}

/// `n^(-ε) - 1 + ε ln n`, non-negative and zero only at `ε = 0`.
pub fn eta(eps: f64, ln_n: f64) -> f64 {
    (-eps * ln_n).exp_m1() + eps * ln_n
}

/// Computes every metric of a complete code.
pub fn metrics(book: &CodeBook) -> Result<CodeMetrics> {
    let model = book.model();
    let n = model.arity() as f64;
    let ln_n = model.ln_arity();
    let terms = book.terms();
    let tail = book.tail_mass();
    let total: f64 = terms.iter().map(|t| t.mass).sum::<f64>() + tail;
    if (total - 1.0).abs() > COMPLETENESS_TOLERANCE {
        return Err(Error::Incomplete(total));
    }

    let avg_delay: f64 = terms.iter().map(|t| t.mass * t.input_length as f64).sum();
    let max_delay = book.max_word_length();
    let avg_code_length: f64 = terms.iter().map(|t| t.mass * t.code_length as f64).sum();
    // Σ p log_n p, the negated word entropy in output units
    let neg_word_entropy: f64 = terms.iter().map(|t| t.mass * t.log_prob).sum();
    let redundancy = (avg_code_length + neg_word_entropy) / avg_delay;

    let delta = match book.kraft_exact() {
        Some(k) => {
            let one = num_rational::BigRational::from_integer(1.into());
            crate::codebook::ratio_to_f64(&(one - k))
        }
        None => 1.0 - book.kraft_sum(),
    };

    let excess: Vec<Excess> = terms
        .iter()
        .map(|t| {
            let eps = t.code_length as f64 + t.log_prob;
            Excess {
                mass: t.mass,
                eps,
                eps_clamped: eps.clamp(-1.0, 1.0),
            }
        })
        .collect();
    let max_abs_eps = excess.iter().map(|e| e.eps.abs()).fold(0.0, f64::max);

    let sum_clamped: f64 = excess.iter().map(|e| e.mass * e.eps_clamped.powi(2)).sum();
    let sum_sq: f64 = excess.iter().map(|e| e.mass * e.eps.powi(2)).sum();
    let theorem1_lower = (delta / ln_n + ln_n / (2.0 * n) * sum_clamped) / avg_delay;
    let theorem1_upper =
        (max_abs_eps <= 1.0).then(|| (delta / ln_n + n * ln_n / 2.0 * sum_sq) / avg_delay);

    let corollary_lower = ln_n / (2.0 * n)
        * terms
            .iter()
            .map(|t| t.mass * dist_to_int(t.log_prob).powi(2))
            .sum::<f64>()
        / avg_delay;

    let lhs = avg_delay * redundancy * ln_n;
    let rhs = delta + excess.iter().map(|e| e.mass * eta(e.eps, ln_n)).sum::<f64>();
    let identity_residual = (lhs - rhs).abs();

    let entropy = model.entropy();
    let word_entropy_bits = -neg_word_entropy * ln_n / std::f64::consts::LN_2;
    let entropy_residual = (entropy * avg_delay - word_entropy_bits).abs();

    Ok(CodeMetrics {
        avg_delay,
        max_delay,
        redundancy,
        delta,
        entropy,
        avg_code_length,
        excess,
        max_abs_eps,
        theorem1_lower,
        theorem1_upper,
        corollary_lower,
        identity_residual,
        entropy_residual: if tail > 0.0 { f64::NAN } else { entropy_residual },
        tail_mass: tail,
    })
}

/// `(lower, upper)` redundancy bounds from the per-word excesses.
pub fn theorem1_bounds(book: &CodeBook) -> Result<(f64, Option<f64>)> {
    let m = metrics(book)?;
    Ok((m.theorem1_lower, m.theorem1_upper))
}

/// `|N̄ R ln n - (δ + Σ p η(ε))|`.
pub fn identity_check(book: &CodeBook) -> Result<f64> {
    Ok(metrics(book)?.identity_residual)
}

/// `N̄⁻¹ (ln n / 2n) Σ p ‖log_n p‖²`.
pub fn corollary_lower_bound(book: &CodeBook) -> Result<f64> {
    Ok(metrics(book)?.corollary_lower)
}

/// Exact check that the Kraft slack is non-negative, when it can be decided exactly.
pub fn delta_nonnegative_exact(book: &CodeBook) -> Option<bool> {
    let k = book.kraft_exact()?;
    let one = num_rational::BigRational::from_integer(1.into());
    Some(!(one - k).is_negative())
}

/// `R ≤ -log_n p_min / N̄`, the fixed-length output guarantee.
pub fn vf_redundancy_bound(book: &CodeBook) -> Result<f64> {
    if book.kind() == CodeKind::Vv {
        return Err(Error::Input("bound applies to fixed-length output codes".into()));
    }
    let model = book.model();
    let m = metrics(book)?;
    Ok(model.weights()[model.min_prob_symbol()] / m.avg_delay)
}

/// One row of the scaling table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub t: u64,
    pub t2: u64,
    pub avg_delay: f64,
    pub max_delay: u64,
    pub redundancy: f64,
    pub r_times_nbar_5_3: f64,
    pub r_times_nbar: f64,
    /// Excluded from the fit (zero redundancy).
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// `(T, message)` for denominators whose construction failed.
    pub failures: Vec<(u64, String)>,
    /// Least-squares slope of `log R` against `log N̄`.
    pub slope: Option<f64>,
}

impl ScalingReport {
    pub const CSV_HEADER: [&'static str; 7] = [
        "T",
        "T2",
        "avg_delay",
        "max_delay",
        "redundancy",
        "r_times_nbar_5_3",
        "r_times_nbar",
    ];
}

#[derive(Debug, Clone)]
pub struct ScalingOptions {
    /// Cap on `T2`; `Auto` selects it per `T`.
    pub t2: Choice,
    pub lattice_counts: CountMode,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            t2: Choice::Auto,
            lattice_counts: CountMode::Never,
        }
    }
}

/// Constructs a metrics-grade code for each `T` and tabulates delay and redundancy.
pub fn scaling_experiment(
    model: &SourceModel,
    t_list: &[u64],
    opts: &ScalingOptions,
) -> ScalingReport {
    let mut lattice = WordSetOptions::default().lattice;
    lattice.counts = opts.lattice_counts;
    // only lattice totals are needed
    let word_opts = WordSetOptions {
        enumeration_limit: 0,
        lattice,
    };
    let params = VvParams {
        t2: opts.t2,
        options: word_opts,
        ..VvParams::default()
    };
    let rational = crate::vv::candidate_denominators(model, 2)
        .map(|c| c.1)
        .unwrap_or(false);

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &t in t_list {
        let result = construct_with_t(model, t, rational, &params).and_then(|code| {
            let m = metrics(&code.book)?;
            Ok((code.book.provenance().t2.unwrap_or(0), m))
        });
        match result {
            Ok((t2, m)) => {
                let r = m.redundancy;
                rows.push(ScalingRow {
                    t,
                    t2,
                    avg_delay: m.avg_delay,
                    max_delay: m.max_delay,
                    redundancy: r,
                    r_times_nbar_5_3: r * m.avg_delay.powf(5.0 / 3.0),
                    r_times_nbar: r * m.avg_delay,
                    excluded: r <= 1e-15,
                })
            }
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.excluded)
        .map(|r| (r.avg_delay.ln(), r.redundancy.ln()))
        .collect();
    ScalingReport {
        slope: least_squares_slope(&points),
        rows,
        failures,
    }
}

/// Slope of the least-squares line through the points; `None` for fewer than two
/// distinct abscissae.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::Provenance;
    use crate::source::{Alphabet, Word};

    fn book(model: SourceModel, pairs: &[(&str, &str)]) -> CodeBook {
        let pairs = pairs
            .iter()
            .map(|(w, c)| {
                (
                    Word::from_letters(w).unwrap(),
                    c.bytes().map(|b| b - b'0').collect(),
                )
            })
            .collect();
        let m = model.alphabet_size();
        CodeBook::from_words(model, Alphabet::letters(m), CodeKind::Vv, pairs, Provenance::default())
            .unwrap()
    }

    #[test]
    fn worked_example_metrics() {
        let model = SourceModel::new(vec![0.4, 0.6], 2).unwrap();
        let b = book(model, &[("a", "0"), ("ba", "10"), ("bba", "110"), ("bbb", "111")]);
        let m = metrics(&b).unwrap();
        assert!((m.avg_delay - 1.96).abs() < 1e-12);
        assert_eq!(m.max_delay, 3);
        assert!((m.redundancy - 0.029049).abs() < 1e-6);
        assert_eq!(m.delta, 0.0);
        assert!(m.identity_residual < 1e-12);
        assert!(m.theorem1_lower <= m.redundancy);
        assert!(m.redundancy <= m.theorem1_upper.unwrap());
        assert!(m.corollary_lower > 0.0 && m.corollary_lower <= m.redundancy);
    }

    #[test]
    fn dyadic_code_has_no_redundancy() {
        let model = SourceModel::new(vec![0.5, 0.5], 2).unwrap();
        let b = book(model, &[("a", "0"), ("b", "1")]);
        let m = metrics(&b).unwrap();
        assert_eq!(m.redundancy, 0.0);
        assert_eq!(m.delta, 0.0);
        assert_eq!(m.theorem1_lower, 0.0);
        assert_eq!(m.theorem1_upper, Some(0.0));
        assert_eq!(m.corollary_lower, 0.0);
    }

    #[test]
    fn long_codewords_drop_upper_bound() {
        let model = SourceModel::new(vec![0.5, 0.5], 2).unwrap();
        let b = book(model, &[("a", "0"), ("b", "100")]);
        let m = metrics(&b).unwrap();
        assert!(m.theorem1_upper.is_none());
        assert!(m.theorem1_lower <= m.redundancy);
        assert!(m.identity_residual < 1e-12);
    }

    #[test]
    fn slope_of_a_line() {
        let pts = [(0.0, 1.0), (1.0, -1.0), (2.0, -3.0)];
        assert!((least_squares_slope(&pts).unwrap() + 2.0).abs() < 1e-12);
        assert!(least_squares_slope(&pts[..1]).is_none());
    }
}
