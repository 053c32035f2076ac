//! Binary subintervals and the final-interval decoding rule.
//!
//! A binary interval of depth `L` and index `i` is `[i/2^L, (i+1)/2^L)`; it
//! corresponds one-to-one to an `L`-bit prefix of the message point's binary
//! expansion. The decoder seeks the two smallest adjacent same-depth binary
//! intervals whose union covers the last known message interval; one
//! ambiguity-resolving bit then selects the member actually containing the
//! message point. The returned interval is always less than twice the size of
//! the covered one.

use crate::qutil::Q;
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// `[index / 2^depth, (index+1) / 2^depth)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryInterval {
    pub depth: u64,
    pub index: BigUint,
}

impl BinaryInterval {
    pub fn unit() -> Self {
        Self {
            depth: 0,
            index: BigUint::zero(),
        }
    }

    pub fn left(&self) -> Q {
        Q::new(
            BigInt::from(self.index.clone()),
            BigInt::from(BigUint::one() << self.depth),
        )
    }

    pub fn right(&self) -> Q {
        Q::new(
            BigInt::from(self.index.clone() + 1u32),
            BigInt::from(BigUint::one() << self.depth),
        )
    }

    pub fn contains(&self, theta: &Q) -> bool {
        *theta >= self.left() && *theta < self.right()
    }

    /// Interval length as a rational.
    pub fn width(&self) -> Q {
        Q::new(
            BigInt::one(),
            BigInt::from(BigUint::one() << self.depth),
        )
    }
}

/// The adjacent pair `[i, i+1, i+2) / 2^L` at the maximal depth `L` covering
/// `[left, right)`. Returns `None` for the full unit interval, where no two
/// adjacent proper subintervals apply and nothing can be decoded.
fn covering_pair(left: &Q, right: &Q) -> Result<Option<(u64, BigUint)>> {
    if left >= right {
        return Err(Error::DegenerateInterval);
    }
    if left.is_zero() && right.is_one() {
        return Ok(None);
    }
    let width = right - left;
    // Maximal feasible depth is at most floor(log2(1/width)) + 1, and
    // floor(log2(1/width)) is always feasible; test three candidates from
    // the top.
    let upper = (-crate::qutil::floor_log2_q(&width)).max(0) as u64 + 1;
    for depth in (0..=upper + 1).rev() {
        if let Some(i) = pair_index_at(left, right, depth) {
            return Ok(Some((depth, i)));
        }
    }
    unreachable!("depth 0 always covers a proper subinterval of [0,1)");
}

/// Index `i` with `i/2^L <= left` and `right <= (i+2)/2^L`, if the depth-`L`
/// pair starting at `i` covers the target.
fn pair_index_at(left: &Q, right: &Q, depth: u64) -> Option<BigUint> {
    // i = floor(left * 2^L)
    let i = ((left.numer().magnitude() << depth) / left.denom().magnitude()).clone();
    // covered iff right * 2^L <= i + 2
    let lhs = right.numer().magnitude() << depth;
    let rhs = (&i + 2u32) * right.denom().magnitude();
    if lhs <= rhs {
        Some(i)
    } else {
        None
    }
}

/// Decodes the binary interval covering `[left, right)` selected by the
/// ambiguity bit (0 = left member of the pair, 1 = right member).
pub fn decode_binary_interval(left: &Q, right: &Q, ambiguity_bit: bool) -> Result<BinaryInterval> {
    match covering_pair(left, right)? {
        None => Ok(BinaryInterval::unit()),
        Some((depth, i)) => Ok(BinaryInterval {
            depth,
            index: if ambiguity_bit { i + 1u32 } else { i },
        }),
    }
}

/// The bit the transmitter sends so the receiver picks the pair member that
/// contains `theta`. Requires `theta` in the target interval.
pub fn ambiguity_bit(left: &Q, right: &Q, theta: &Q) -> Result<bool> {
    if theta < left || theta >= right {
        return Err(Error::MessagePointOutOfRange);
    }
    match covering_pair(left, right)? {
        None => Ok(false),
        Some((depth, i)) => {
            // 1 iff theta >= (i+1)/2^L
            let lhs = theta.numer().magnitude() << depth;
            let rhs = (&i + 1u32) * theta.denom().magnitude();
            Ok(!theta.is_negative() && lhs >= rhs)
        }
    }
}
