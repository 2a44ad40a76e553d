//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building or validating a transform.
#[derive(Debug, Error)]
pub enum Error {
    /// Gamma evaluated at a non-positive integer.
    #[error("gamma function pole at non-positive integer {0}")]
    GammaPole(f64),

    /// A series did not reach its tolerance within the term budget.
    #[error("series failed to converge after {terms} terms")]
    NoConvergence { terms: usize },

    /// Catastrophic cancellation consumed the working precision.
    #[error("lost ~{digits_lost:.0} digits to cancellation; result unreliable")]
    PrecisionLoss { digits_lost: f64 },

    /// The requested grid cannot resolve the feature being computed.
    #[error("grid domain too narrow: {0}")]
    DomainTooNarrow(String),

    /// A first-order transform function diverges inside the domain.
    #[error("transformation function vanishes near x = {x}; transform singular")]
    SingularTransform { x: f64 },

    /// Factorization energies must be strictly decreasing along a chain.
    #[error("factorization energies not strictly ordered: {0}")]
    OrderingError(String),

    /// Requested state has no finite norm.
    #[error("state is not square integrable: {0}")]
    NotNormalizable(String),

    /// A factorization energy collides with an oscillator level.
    #[error("factorization energy {0} coincides with an oscillator eigenvalue")]
    EnergyCollision(f64),

    /// The Wronskian of the two seed solutions vanishes inside the domain.
    #[error("Wronskian has {} node(s) inside the domain, first near x = {}", positions.len(), positions.first().copied().unwrap_or(f64::NAN))]
    SingularWronskian { positions: Vec<f64> },

    /// The confluent auxiliary function w crosses zero.
    #[error("auxiliary function w vanishes near x = {x}; transform singular")]
    SingularW { x: f64 },

    /// Confluent integration constant inside the forbidden interval.
    #[error("w0 = {w0} lies in the forbidden interval ({lo}, {hi})")]
    BadW0 { w0: f64, lo: f64, hi: f64 },

    /// A state expected to decay at the box edges fails to.
    #[error("state does not decay at the domain boundary: {0}")]
    NoDecay(String),

    /// Ladder operator applied outside its invariant sector.
    #[error("state outside the operator's invariant sector: {0}")]
    SectorError(String),

    /// Coherent-state recursion hit a negative radicand.
    #[error("negative radicand in coefficient recursion at n = {n}")]
    NegativeRadicand { n: usize },

    /// Uncertainty closed forms only exist for the oscillator-limit chains.
    #[error("transform is not an oscillator-limit chain: {0}")]
    NotOscillatorLimit(String),

    /// Config file syntax error.
    #[error("config parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    /// Config value fails validation.
    #[error("invalid config value for `{field}`: {msg}")]
    ValidationError { field: String, msg: String },

    /// Unknown transform case label.
    #[error("unknown case `{0}`")]
    UnknownCase(String),
}

pub type Result<T> = std::result::Result<T, Error>;
