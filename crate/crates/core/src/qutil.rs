//! Exact-rational helpers shared across the crate.
//!
//! Every quantity that feeds a threshold decision is kept as an exact
//! `BigRational`; floating point appears only in reported entropies and
//! rates. Thresholds of the form `c * n^(-p/q)` are compared against
//! rationals by clearing the fractional exponent, so no rounding enters any
//! accept/discard/decode decision.

use num_bigint::{BigInt, BigUint, ToBigInt};
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Exact rational scalar used for all probability arithmetic.
pub type Q = Ratio<BigInt>;

/// `n`/`d` as an exact rational.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// A positive rational exponent `num/den`, e.g. the 3/4 in `b = n^(3/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatExp {
    pub num: u32,
    pub den: u32,
}

impl RatExp {
    pub fn new(num: u32, den: u32) -> Self {
        assert!(den > 0, "exponent denominator must be positive");
        Self { num, den }
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }

    /// `ceil(n^self)` computed exactly via integer root extraction.
    pub fn ceil_pow(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let raised = BigUint::from(n).pow(self.num);
        let root = raised.nth_root(self.den);
        let val = if root.clone().pow(self.den) == raised {
            root
        } else {
            root + 1u32
        };
        val.to_u64().expect("ceil_pow overflow")
    }
}

/// Compares `lhs` against `c * n^(-e)` exactly (`e = p/q` rational).
///
/// Equivalent to comparing `lhs^q * n^p` with `c^q`, which stays in integer
/// arithmetic.
pub fn cmp_vs_power_threshold(lhs: &Q, c: u32, n: u64, e: RatExp) -> Ordering {
    if lhs.is_negative() {
        return Ordering::Less;
    }
    // lhs^q * n^p  vs  c^q
    let num = lhs.numer().magnitude().pow(e.den) * BigUint::from(n).pow(e.num);
    let den = lhs.denom().magnitude().pow(e.den) * BigUint::from(c).pow(e.den);
    num.cmp(&den)
}

/// `log2` of a positive rational, in double precision.
///
/// Safe for arguments far outside the `f64` exponent range (products of
/// thousands of per-symbol estimates).
pub fn log2_q(r: &Q) -> f64 {
    assert!(r.is_positive(), "log2 of non-positive rational");
    log2_biguint(r.numer().magnitude()) - log2_biguint(r.denom().magnitude())
}

fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.log2() + shift as f64
}

/// Floor of `log2` of a positive rational, exact.
pub fn floor_log2_q(r: &Q) -> i64 {
    assert!(r.is_positive());
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    // floor(log2(num/den)): candidate from bit lengths, then correct by one.
    let mut e = num.bits() as i64 - den.bits() as i64;
    // num/den >= 2^e  <=>  num >= den << e
    loop {
        if ge_shifted(num, den, e) {
            if !ge_shifted(num, den, e + 1) {
                return e;
            }
            e += 1;
        } else {
            e -= 1;
        }
    }
}

/// `a >= b * 2^e` with `e` possibly negative.
fn ge_shifted(a: &BigUint, b: &BigUint, e: i64) -> bool {
    if e >= 0 {
        *a >= (b << e as u64)
    } else {
        (a << (-e) as u64) >= *b
    }
}

/// Shannon entropy (bits) of an exact probability vector; `0 log 0 = 0`.
pub fn entropy_bits(mass: &[Q]) -> f64 {
    let mut h = 0.0;
    for p in mass {
        if p.is_positive() {
            let pf = ratio_to_f64(p);
            h -= pf * log2_q(p);
        }
    }
    h
}

/// Rational to double, safe for extreme magnitudes.
pub fn ratio_to_f64(r: &Q) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if r.numer().bits() <= 53 && r.denom().bits() <= 53 {
        // both sides exact in f64, so this is the correctly rounded quotient
        return r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap();
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * (log2_q(&r.abs())).exp2()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// The message point is a dyadic rational `k / 2^bits`, drawn uniformly.
pub fn random_dyadic(rng: &mut impl rand::Rng, bits: u32) -> Q {
    let mut mant = BigUint::zero();
    let mut remaining = bits;
    while remaining > 0 {
        let take = remaining.min(32);
        let word: u32 = rng.gen();
        mant = (mant << take) | BigUint::from(word >> (32 - take));
        remaining -= take;
    }
    Q::new(
        mant.to_bigint().unwrap(),
        (BigUint::one() << bits).to_bigint().unwrap(),
    )
}
