//! Core library for universal feedback transmission over unknown channels.
//!
//! The transmission scheme combines Horstein-style posterior matching with
//! sequential Krichevsky-Trofimov noise estimation inside a randomized block
//! protocol. It chases the *empirical capacity* of whatever channel it is run
//! against: `log2 |X| - H_emp(Z^n)`, where `Z^n` is the realized noise
//! sequence `Z_k = Y_k - X_k` (modulo) of the trace.
//!
//! Module map:
//! - [`alphabet`]: modulo alphabets, symbol and pattern sequences
//! - [`dist`]: exact-rational empirical distributions, entropy, sampling
//! - [`estimator`]: KT estimators with lazy update schedules
//! - [`posterior`]: piecewise-constant message posteriors (exact and fast
//!   arithmetic) and binary-interval decoding
//! - [`channel`]: causal channel simulation, adversaries, dithering
//! - [`protocol`]: the block transmission scheme itself
//! - [`lemmas`]: runnable statements of the concentration/redundancy bounds
//!   the scheme's design relies on

pub mod alphabet;
pub mod channel;
pub mod dist;
pub mod estimator;
pub mod lemmas;
pub mod posterior;
pub mod protocol;
pub mod qutil;
pub mod rng;

pub use alphabet::{Alphabet, PatternSeq, Symbol, SymbolSeq};
pub use dist::{EmpiricalDistribution, ScaledSampleDistribution};
pub use estimator::{KtEstimator, UpdateSchedule};
pub use posterior::{BinaryInterval, ExactPosterior, FastPosterior, PosteriorEngine};
pub use qutil::Q;

use thiserror::Error;

/// Errors surfaced by the library layer.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("alphabet size {0} is invalid (need 2..=256)")]
    BadAlphabetSize(usize),

    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("symbol {symbol} out of alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("expected sample size must be positive")]
    NonPositiveExpectation,

    #[error("empty sequence not allowed here")]
    EmptySequence,

    #[error("message point must lie in [0,1)")]
    MessagePointOutOfRange,

    #[error("degenerate interval: left >= right")]
    DegenerateInterval,

    #[error("segment index {index} out of range ({count} segments)")]
    SegmentIndexOutOfRange { index: usize, count: usize },

    #[error("infeasible scheme parameters: {0}")]
    InfeasibleParams(String),

    #[error("invalid noise file: {0}")]
    BadNoiseFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
