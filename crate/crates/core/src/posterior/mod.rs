//! Piecewise-constant message-point posteriors.
//!
//! A posterior is an ordered list of half-open segments partitioning `[0,1)`,
//! each carrying a constant density. One Horstein iteration splits the unit
//! interval at the `|X|-1` equal-mass partition points and multiplies the
//! i-th subinterval's density by `|X| * p_hat(y - i)`. Segments are never
//! merged, even when neighboring weights coincide, so segment indices are
//! reproducible from the iteration transcript alone and can be shipped as
//! update information.
//!
//! Two arithmetic backends implement the same engine contract:
//! [`ExactPosterior`] keeps everything as arbitrary-precision rationals (the
//! reference mode, where the posterior-mass identities hold bit-for-bit), and
//! [`FastPosterior`] keeps masses in extended-exponent doubles with
//! fixed-point breakpoints (deterministic, for long horizons).

mod binary;
mod exact;
mod fast;

pub use binary::{ambiguity_bit, decode_binary_interval, BinaryInterval};
pub use exact::ExactPosterior;
pub use fast::FastPosterior;

use crate::alphabet::{Alphabet, Symbol};
use crate::qutil::Q;
use crate::Result;

/// The posterior segment containing the message point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageInterval {
    pub left: Q,
    pub right: Q,
    pub segment_index: usize,
}

/// Common contract of the exact and fast posterior backends.
pub trait PosteriorEngine: Clone {
    fn alphabet(&self) -> Alphabet;

    fn segment_count(&self) -> usize;

    /// The `|X|-1` equal-mass partition points of the current posterior.
    fn partition_points(&self) -> Vec<Q>;

    /// Index of the equal-mass subinterval containing `theta`; points exactly
    /// on a partition point belong to the right subinterval.
    fn encode_symbol(&self, theta: &Q) -> Result<Symbol>;

    /// One Horstein iteration for the received symbol, with the estimator's
    /// current per-noise-symbol estimates (strictly positive, summing to 1).
    fn update(&mut self, received: Symbol, estimates: &[Q]);

    /// The segment containing `theta`, with its left-to-right index.
    fn message_interval(&self, theta: &Q) -> Result<MessageInterval>;

    /// Endpoints of the segment with the given index.
    fn interval_by_index(&self, index: usize) -> Result<(Q, Q)>;
}
