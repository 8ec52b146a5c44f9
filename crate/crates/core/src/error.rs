use thiserror::Error;

/// Everything that can go wrong while building, analysing or running a code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed user input: bad probabilities, out-of-range symbols, dimension mismatches.
    #[error("invalid input: {0}")]
    Input(String),

    /// The requested construction cannot exist with these parameters.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The profile lattice or word enumeration would exceed the configured limits.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// `x` is (numerically) an integer, so every denominator approximates it perfectly.
    #[error("rational degenerate: {0} is integral within tolerance")]
    RationalDegenerate(f64),

    /// No shift in `[0, T)` reached the `2/T` band; `T` was not a usable denominator.
    #[error("no shift below {denominator} brings the fractional part within 2/{denominator}")]
    Lemma1Violated { denominator: u64 },

    /// A word set does not have total probability one.
    #[error("incomplete word set: total probability {0}")]
    Incomplete(f64),

    /// Digit-stream decoding failed.
    #[error("decode error: {0}")]
    Decode(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
