//! Crate-wide error type. Messages are prefixed with the module that raised
//! them so the CLI can surface them verbatim.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("symbolic: alphabet must contain at least one symbol")]
    EmptyAlphabet,

    #[error("symbolic: symbol {0} has no outgoing or no incoming allowed transition")]
    StrandedSymbol(u32),

    #[error("symbolic: simple-cycle enumeration exceeded the configured cap of {cap}")]
    BudgetExceeded { cap: usize },

    #[error("symbolic: word of length {len} is shorter than the potential range {range}")]
    WordTooShort { len: usize, range: usize },

    #[error("symbolic: {0}")]
    InvalidWord(String),

    #[error("potentials: {0}")]
    InvalidPotential(String),

    #[error("potentials: no declared approximant with accuracy <= {requested}")]
    NoApproximantAvailable { requested: f64 },

    #[error("polytope: infeasible ({0})")]
    Infeasible(String),

    #[error("polytope: numerically unstable ({0})")]
    NumericallyUnstable(String),

    #[error("optimizers: unimodality violated at grid triple ({a}, {b}, {c})")]
    UnimodalityViolation { a: f64, b: f64, c: f64 },

    #[error("optimizers: denominator bound sigma = {sigma} violated (min observed {observed})")]
    DenominatorViolated { sigma: f64, observed: f64 },

    #[error("orbit: finite horizon {n} exceeds the exact-search cap {cap} for cocycles")]
    HorizonTooLarge { n: usize, cap: usize },

    #[error("orbit: irregular-point construction requires a mixing SFT (no mixing time known)")]
    NotMixing,

    #[error("orbit: target measures have indistinguishable ratio values ({0})")]
    TargetsIndistinguishable(String),

    #[error("suspension: hypothesis fails ({0})")]
    HypothesisFails(String),
}

pub type Result<T> = std::result::Result<T, Error>;
