//! Deterministic fast-arithmetic posterior for long horizons.
//!
//! Segment masses live in extended-exponent doubles (an `f64` mantissa with
//! an `i64` binary exponent), so products of tens of thousands of per-step
//! factors neither underflow nor need log-domain transcendentals in the hot
//! loop. Breakpoints live on a fixed-point grid with `n*log2|X| + 64`
//! fractional bits, and split positions are rounded to that grid by one
//! deterministic rule. Correctness of the protocol needs determinism here,
//! not exactness: both terminals run this identical arithmetic on identical
//! inputs, so their states stay bit-equal.

use super::{MessageInterval, PosteriorEngine};
use crate::alphabet::{Alphabet, Symbol};
use crate::qutil::{ratio_to_f64, Q};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use std::cell::RefCell;
use std::rc::Rc;

/// Nonnegative number `m * 2^e` with `m` in `[1,2)` (or exactly zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ExtF64 {
    m: f64,
    e: i64,
}

impl ExtF64 {
    const ZERO: ExtF64 = ExtF64 { m: 0.0, e: 0 };
    const ONE: ExtF64 = ExtF64 { m: 1.0, e: 0 };

    fn norm(m: f64, e: i64) -> ExtF64 {
        if m == 0.0 {
            return ExtF64::ZERO;
        }
        debug_assert!(m > 0.0 && m.is_finite());
        let bits = m.to_bits();
        let exp = ((bits >> 52) & 0x7FF) as i64 - 1023;
        ExtF64 {
            m: f64::from_bits((bits & 0x000F_FFFF_FFFF_FFFF) | (1023u64 << 52)),
            e: e + exp,
        }
    }

    fn is_zero(self) -> bool {
        self.m == 0.0
    }

    fn mul_f64(self, f: f64) -> ExtF64 {
        debug_assert!(f > 0.0 && f.is_finite());
        ExtF64::norm(self.m * f, self.e)
    }

    fn add(self, other: ExtF64) -> ExtF64 {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.e >= other.e {
            (self, other)
        } else {
            (other, self)
        };
        let d = hi.e - lo.e;
        if d > 200 {
            return hi;
        }
        ExtF64::norm(hi.m + lo.m * pow2(-d), hi.e)
    }

    /// `self - other`, requiring `self >= other`.
    fn sub(self, other: ExtF64) -> ExtF64 {
        if other.is_zero() {
            return self;
        }
        debug_assert!(self >= other);
        let d = self.e - other.e;
        if d > 200 {
            return self;
        }
        let m = self.m - other.m * pow2(-d);
        if m <= 0.0 {
            return ExtF64::ZERO;
        }
        ExtF64::norm(m, self.e)
    }

    /// `self / other` as a plain double, clamped into `[0, max]`.
    fn ratio(self, other: ExtF64, max: f64) -> f64 {
        debug_assert!(!other.is_zero());
        if self.is_zero() {
            return 0.0;
        }
        let d = self.e - other.e;
        if d > 64 {
            return max;
        }
        if d < -64 {
            return 0.0;
        }
        ((self.m / other.m) * pow2(d)).clamp(0.0, max)
    }
}

impl Eq for ExtF64 {}

impl PartialOrd for ExtF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => std::cmp::Ordering::Equal,
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            (false, false) => (self.e, self.m)
                .partial_cmp(&(other.e, other.m))
                .unwrap(),
        }
    }
}

/// Exact power of two for |e| < 1023.
fn pow2(e: i64) -> f64 {
    debug_assert!(e.abs() < 1023);
    f64::from_bits(((1023 + e) as u64) << 52)
}

const RHO_MIN: f64 = 8.673617379884035e-19; // 2^-60

/// Where one partition point lands during a split plan.
struct SplitPoint {
    segment: usize,
    /// `None`: exactly at the segment's left breakpoint (advance the factor
    /// group without splitting). `Some`: strictly inside, at this mantissa.
    position: Option<Rc<BigUint>>,
    /// Mass fraction of the segment left of the point.
    rho: f64,
}

/// Fast posterior: fixed-point breakpoints plus extended-float masses.
#[derive(Debug, Clone)]
pub struct FastPosterior {
    alphabet: Alphabet,
    frac_bits: u64,
    /// `segment_count + 1` grid mantissas, `0 = breakpoints[0] < ... = 2^F`.
    breakpoints: Vec<Rc<BigUint>>,
    masses: Vec<ExtF64>,
    theta_cache: RefCell<Option<(Q, Rc<BigUint>)>>,
}

impl FastPosterior {
    /// `horizon` bounds how many updates the posterior must absorb; it sizes
    /// the breakpoint grid at `horizon * log2|X| + 64` fractional bits.
    pub fn new(alphabet: Alphabet, horizon: u64) -> Self {
        let bits_per_step = (alphabet.size() as f64).log2();
        let frac_bits = ((horizon as f64 * bits_per_step).ceil() as u64 + 64).max(576);
        Self {
            alphabet,
            frac_bits,
            breakpoints: vec![
                Rc::new(BigUint::zero()),
                Rc::new(BigUint::one() << frac_bits),
            ],
            masses: vec![ExtF64::ONE],
            theta_cache: RefCell::new(None),
        }
    }

    fn theta_mantissa(&self, theta: &Q) -> Result<Rc<BigUint>> {
        if theta.is_negative() || *theta >= Q::one() {
            return Err(Error::MessagePointOutOfRange);
        }
        if let Some((cached, mant)) = self.theta_cache.borrow().as_ref() {
            if cached == theta {
                return Ok(mant.clone());
            }
        }
        let mant = Rc::new(
            (theta.numer().magnitude() << self.frac_bits) / theta.denom().magnitude(),
        );
        *self.theta_cache.borrow_mut() = Some((theta.clone(), mant.clone()));
        Ok(mant)
    }

    fn mant_to_q(&self, mant: &BigUint) -> Q {
        if mant.is_zero() {
            return Q::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0).min(self.frac_bits);
        Q::new_raw(
            BigInt::from(mant >> tz),
            BigInt::from(BigUint::one() << (self.frac_bits - tz)),
        )
    }

    fn total_mass(&self) -> ExtF64 {
        let mut total = ExtF64::ZERO;
        for &m in &self.masses {
            total = total.add(m);
        }
        total
    }

    /// Computes the |X|-1 partition points as grid positions.
    fn plan_partition(&self) -> Vec<SplitPoint> {
        let size = self.alphabet.size();
        let total = self.total_mass();
        // a target within this band of a breakpoint's cumulative mass is
        // treated as *on* the breakpoint, the way exact arithmetic resolves a
        // partition point hitting one; the band covers the rounding noise of
        // summing the segment masses
        let band = 1e-15 + self.masses.len() as f64 * 5e-16;
        let near = |a: ExtF64, b: ExtF64| -> bool {
            let d = if a >= b { a.sub(b) } else { b.sub(a) };
            d.ratio(total, 2.0) <= band
        };
        let mut plans = Vec::with_capacity(size - 1);
        let mut cum = ExtF64::ZERO;
        let mut j = 1usize;
        'outer: for seg in 0..self.masses.len() {
            let mass = self.masses[seg];
            let cum_after = cum.add(mass);
            while j < size {
                let target = total.mul_f64(j as f64 / size as f64);
                let at_left_edge = near(cum, target);
                let at_right_edge = near(cum_after, target);
                if cum_after < target && !at_right_edge {
                    break;
                }
                if at_left_edge {
                    plans.push(SplitPoint {
                        segment: seg,
                        position: None,
                        rho: 0.0,
                    });
                } else if at_right_edge {
                    plans.push(SplitPoint {
                        segment: seg + 1,
                        position: None,
                        rho: 0.0,
                    });
                } else {
                    let rho = target.sub(cum).ratio(mass, 1.0);
                    plans.push(self.place_point(seg, rho, plans.last()));
                }
                j += 1;
                if j >= size {
                    break 'outer;
                }
            }
            cum = cum_after;
        }
        // float roundoff could starve the last targets; pin leftovers to the end
        while j < size {
            plans.push(SplitPoint {
                segment: self.masses.len(),
                position: None,
                rho: 0.0,
            });
            j += 1;
        }
        plans
    }

    fn place_point(&self, segment: usize, rho: f64, prev: Option<&SplitPoint>) -> SplitPoint {
        let at_left = |segment| SplitPoint {
            segment,
            position: None,
            rho: 0.0,
        };
        let rho = rho.clamp(RHO_MIN, 1.0 - RHO_MIN);

        let left = &self.breakpoints[segment];
        let right = &self.breakpoints[segment + 1];
        let diff = right.as_ref() - left.as_ref();
        if diff < BigUint::from(2u32) {
            // no interior grid cell: snap to the nearer edge
            return at_left(if rho < 0.5 { segment } else { segment + 1 });
        }

        // step = floor(diff * rho) via a 53-bit fixed-point multiplier
        let mult = (rho * 9007199254740992.0) as u64; // rho * 2^53
        let mut step: BigUint = (&diff * mult) >> 53;
        if step.is_zero() {
            step = BigUint::one();
        }
        if step >= diff {
            step = &diff - 1u32;
        }
        // keep positions strictly increasing within a segment
        if let Some(p) = prev {
            if p.segment == segment {
                if let Some(pos) = &p.position {
                    let min_next = pos.as_ref() - left.as_ref() + 1u32;
                    if step < min_next {
                        step = min_next;
                    }
                    if step >= diff {
                        return at_left(segment + 1);
                    }
                }
            }
        }
        SplitPoint {
            segment,
            position: Some(Rc::new(left.as_ref() + step)),
            rho,
        }
    }

    fn locate(&self, theta_mant: &BigUint) -> usize {
        // last breakpoint <= theta
        let mut lo = 0usize;
        let mut hi = self.breakpoints.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.breakpoints[mid].as_ref() <= theta_mant {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Cheap per-step fingerprint for transmitter/receiver synchrony checks.
    pub fn synchrony_digest(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut mix = |v: u64| {
            h ^= v;
            h = h.wrapping_mul(0x100000001b3);
        };
        mix(self.masses.len() as u64);
        let n = self.masses.len();
        for idx in [0, n / 2, n.saturating_sub(1)] {
            mix(self.masses[idx].m.to_bits());
            mix(self.masses[idx].e as u64);
            let bp = self.breakpoints[idx + 1].as_ref();
            mix(bp.iter_u64_digits().next().unwrap_or(0));
            mix(bp.bits());
        }
        h
    }
}

impl PosteriorEngine for FastPosterior {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn segment_count(&self) -> usize {
        self.masses.len()
    }

    fn partition_points(&self) -> Vec<Q> {
        self.plan_partition()
            .iter()
            .map(|p| match &p.position {
                Some(mant) => self.mant_to_q(mant),
                None => self.mant_to_q(&self.breakpoints[p.segment]),
            })
            .collect()
    }

    fn encode_symbol(&self, theta: &Q) -> Result<Symbol> {
        let mant = self.theta_mantissa(theta)?;
        let mut symbol = 0usize;
        for p in self.plan_partition() {
            let pos = match &p.position {
                Some(m) => m.as_ref(),
                None => self.breakpoints[p.segment].as_ref(),
            };
            if pos <= mant.as_ref() {
                symbol += 1;
            }
        }
        Ok(symbol)
    }

    fn update(&mut self, received: Symbol, estimates: &[Q]) {
        let size = self.alphabet.size();
        debug_assert!(self.alphabet.contains(received));
        debug_assert_eq!(estimates.len(), size);
        let factors: Vec<f64> = (0..size)
            .map(|i| size as f64 * ratio_to_f64(&estimates[self.alphabet.sub(received, i)]))
            .collect();
        debug_assert!(factors.iter().all(|&f| f > 0.0));

        let plans = self.plan_partition();
        let mut out_bp: Vec<Rc<BigUint>> =
            Vec::with_capacity(self.breakpoints.len() + size - 1);
        let mut out_mass: Vec<ExtF64> = Vec::with_capacity(self.masses.len() + size - 1);
        out_bp.push(self.breakpoints[0].clone());

        let mut group = 0usize;
        let mut pi = 0usize;
        for seg in 0..self.masses.len() {
            while pi < plans.len() && plans[pi].segment == seg && plans[pi].position.is_none() {
                group += 1;
                pi += 1;
            }
            let base = self.masses[seg];
            let mut prev_rho = 0.0f64;
            while pi < plans.len() && plans[pi].segment == seg {
                let p = &plans[pi];
                let pos = p.position.as_ref().expect("interior point");
                let rho = p.rho.max(prev_rho + RHO_MIN * 0.5);
                out_mass.push(base.mul_f64((rho - prev_rho).max(RHO_MIN)).mul_f64(factors[group]));
                out_bp.push(pos.clone());
                prev_rho = rho;
                group += 1;
                pi += 1;
            }
            out_mass.push(base.mul_f64((1.0 - prev_rho).max(RHO_MIN)).mul_f64(factors[group]));
            out_bp.push(self.breakpoints[seg + 1].clone());
        }
        debug_assert!(group <= size - 1);
        self.breakpoints = out_bp;
        self.masses = out_mass;
    }

    fn message_interval(&self, theta: &Q) -> Result<MessageInterval> {
        let mant = self.theta_mantissa(theta)?;
        let idx = self.locate(&mant);
        Ok(MessageInterval {
            left: self.mant_to_q(&self.breakpoints[idx]),
            right: self.mant_to_q(&self.breakpoints[idx + 1]),
            segment_index: idx,
        })
    }

    fn interval_by_index(&self, index: usize) -> Result<(Q, Q)> {
        if index >= self.masses.len() {
            return Err(Error::SegmentIndexOutOfRange {
                index,
                count: self.masses.len(),
            });
        }
        Ok((
            self.mant_to_q(&self.breakpoints[index]),
            self.mant_to_q(&self.breakpoints[index + 1]),
        ))
    }
}
