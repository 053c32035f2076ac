//! Scheme parameters and their feasibility rules.

use crate::alphabet::Alphabet;
use crate::qutil::{cmp_vs_power_threshold, Q, RatExp};
use crate::{Error, Result};
use std::cmp::Ordering;

/// How the shared block randomness is accounted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncMode {
    /// Randomness synchronized out of band (seeded streams); no channel uses
    /// are reserved. The default experimental mode.
    Free,
    /// A prefix of `8 m ceil(log2 b)` active-feedback positions is reserved
    /// in every block (transmitting a fill symbol, outputs ignored), auditing
    /// the synchronization budget without bit-simulating its encoding.
    Charged,
}

/// Posterior arithmetic backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithMode {
    /// Arbitrary-precision rationals; the reference mode.
    Exact,
    /// Extended-float masses and fixed-point breakpoints; for long horizons.
    Fast,
}

/// Which channel family the block randomization is tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    /// I.i.d. position types; safe against adaptive modulo-additive
    /// adversaries.
    ModuloAdditive,
    /// Exact-composition position types and repetition slots; tighter
    /// concentration, sound only when the noise cannot adapt to the inputs.
    NoiseSequence,
    /// I.i.d. position types drawn from a common-randomness control sequence,
    /// with the channel wrapped in a uniform input dither.
    GeneralCausalDithered,
}

/// Finite-horizon or horizon-free operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    FiniteHorizon { n: u64 },
    HorizonFree { b0: u64 },
}

/// The polynomial parameter policy `b = n^a0, m = n^a1, tau = n^-a2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponents {
    pub block: RatExp,     // a0
    pub sample: RatExp,    // a1
    pub deviation: RatExp, // a2
}

impl Exponents {
    /// The canonical selection (3/4, 1/2, 1/16).
    pub fn canonical() -> Self {
        Self {
            block: RatExp::new(3, 4),
            sample: RatExp::new(1, 2),
            deviation: RatExp::new(1, 16),
        }
    }

    /// The sufficient asymptotic conditions `a1 < a0 < 1`,
    /// `a0 < 2 (a1 - a2)`; returns the violated condition by name.
    pub fn check(&self) -> std::result::Result<(), String> {
        let (a0, a1, a2) = (
            frac(self.block),
            frac(self.sample),
            frac(self.deviation),
        );
        if a1 >= a0 {
            return Err(format!("requires a1 < a0, got a1={a1}, a0={a0}"));
        }
        if a0 >= 1.0 {
            return Err(format!("requires a0 < 1, got a0={a0}"));
        }
        if a0 >= 2.0 * (a1 - a2) {
            return Err(format!(
                "requires a0 < 2(a1 - a2), got a0={a0}, 2(a1-a2)={}",
                2.0 * (a1 - a2)
            ));
        }
        Ok(())
    }
}

/// Horizon-free policy: per-block `m_k = b_k^a1`, `tau_k = b_k^-a2`, recency
/// threshold `rho_k = k^a3`; `a4` enters only the feasibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonFreeExponents {
    pub sample: RatExp,    // a1
    pub deviation: RatExp, // a2
    pub recency: RatExp,   // a3
    pub staleness: RatExp, // a4
}

impl HorizonFreeExponents {
    /// The selection (7/8, 1/8, 3/8, 1/16).
    pub fn canonical() -> Self {
        Self {
            sample: RatExp::new(7, 8),
            deviation: RatExp::new(1, 8),
            recency: RatExp::new(3, 8),
            staleness: RatExp::new(1, 16),
        }
    }

    /// `max(1 - a1, a2) < a3 (a1 - 1/2)` and `a3 + a4 < 1/2`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let (a1, a2, a3, a4) = (
            frac(self.sample),
            frac(self.deviation),
            frac(self.recency),
            frac(self.staleness),
        );
        let lhs = (1.0 - a1).max(a2);
        let rhs = a3 * (a1 - 0.5);
        if lhs >= rhs {
            return Err(format!(
                "requires max(1-a1, a2) < a3(a1 - 1/2), got {lhs} vs {rhs}"
            ));
        }
        if a3 + a4 >= 0.5 {
            return Err(format!("requires a3 + a4 < 1/2, got {}", a3 + a4));
        }
        Ok(())
    }
}

fn frac(e: RatExp) -> f64 {
    e.as_f64()
}

/// A deviation threshold `base^-exp`, compared against exact rationals
/// without ever evaluating the irrational power.
#[derive(Debug, Clone, PartialEq)]
pub enum Tau {
    Power { base: u64, exp: RatExp },
    Fixed(Q),
}

impl Tau {
    /// Compares `d` against `mult * tau` exactly.
    pub fn cmp_scaled(&self, d: &Q, mult: u32) -> Ordering {
        match self {
            Tau::Power { base, exp } => cmp_vs_power_threshold(d, mult, *base, *exp),
            Tau::Fixed(t) => d.cmp(&(t * Q::from_integer(mult.into()))),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Tau::Power { base, exp } => (-(exp.as_f64()) * (*base as f64).log2()).exp2(),
            Tau::Fixed(t) => crate::qutil::ratio_to_f64(t),
        }
    }
}

/// Everything one block needs: sizes, counts, thresholds, payload layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams {
    /// 1-based block index.
    pub index: u64,
    /// Total block length `b` (active prefix included).
    pub length: u64,
    /// Active-feedback prefix length, 0 in free sync.
    pub active_len: u64,
    /// Passive positions `b_p = b - b_a`.
    pub passive_len: u64,
    /// Nominal training/update sample size `m`.
    pub m: u64,
    /// Uncoded payload bit count `s` (zero-padded).
    pub s: u32,
    /// Deviation scale; discard below `5 tau`, decode `1` above `2 tau`.
    pub tau: Tau,
    /// Bit layout of the payload within `s`.
    pub layout: super::payload::PayloadLayout,
}

impl BlockParams {
    /// Update slot alphabet size `(|X|-1) * s`.
    pub fn slot_count(&self, alphabet: Alphabet) -> u32 {
        (alphabet.size() as u32 - 1) * self.s
    }

    /// Expected repetitions of one (bit, input-pair) slot: `m / ((|X|-1) s)`.
    pub fn expected_per_slot(&self, alphabet: Alphabet) -> Q {
        crate::qutil::q(self.m as i64, i64::from(self.slot_count(alphabet)))
    }
}

/// Full scheme description for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub alphabet: Alphabet,
    pub variant: Variant,
    pub sync: SyncMode,
    pub arith: ArithMode,
    pub family: FamilyMode,
    /// Fill symbol transmitted on active and tail positions.
    pub active_fill: usize,
    /// Finite-horizon sizing (`None` in horizon-free mode).
    fh: Option<FiniteHorizonSizing>,
    /// Horizon-free policy (`None` in finite-horizon mode).
    hf: Option<HorizonFreeSizing>,
}

#[derive(Debug, Clone, PartialEq)]
struct FiniteHorizonSizing {
    n: u64,
    b: u64,
    m: u64,
    tau: Tau,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HorizonFreeSizing {
    b0: u64,
    sample: RatExp,
    deviation: RatExp,
    recency: RatExp,
}

fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

impl SchemeParams {
    /// Finite-horizon scheme with the polynomial policy.
    pub fn finite_horizon(
        alphabet: Alphabet,
        n: u64,
        exps: Exponents,
        sync: SyncMode,
        arith: ArithMode,
        family: FamilyMode,
    ) -> Result<Self> {
        let b = exps.block.ceil_pow(n);
        let m = exps.sample.ceil_pow(n);
        let tau = Tau::Power {
            base: n,
            exp: exps.deviation,
        };
        Self::finite_horizon_raw(alphabet, n, b, m, tau, sync, arith, family)
    }

    /// Finite-horizon scheme with explicit block size, sample size, and
    /// threshold. Structural feasibility is still enforced.
    #[allow(clippy::too_many_arguments)]
    pub fn finite_horizon_raw(
        alphabet: Alphabet,
        n: u64,
        b: u64,
        m: u64,
        tau: Tau,
        sync: SyncMode,
        arith: ArithMode,
        family: FamilyMode,
    ) -> Result<Self> {
        let fail = |msg: String| Err(Error::InfeasibleParams(msg));
        if n == 0 || b < 2 || m == 0 {
            return fail(format!("degenerate sizes n={n}, b={b}, m={m}"));
        }
        if b > n {
            return fail(format!("block size b={b} exceeds horizon n={n}"));
        }
        if u64::from(ceil_log2(n + 1)) >= b {
            return fail(format!("requires b > log2(n+1): b={b}, n={n}"));
        }
        let active = match sync {
            SyncMode::Free => 0,
            SyncMode::Charged => {
                let ba = 8 * m * u64::from(ceil_log2(b));
                if ba >= b {
                    return fail(format!(
                        "charged sync needs b_a < b: b_a=8*m*ceil(log2 b)={ba}, b={b}"
                    ));
                }
                ba
            }
        };
        let passive = b - active;
        if 2 * m > passive {
            return fail(format!(
                "needs 2m <= passive positions: m={m}, passive={passive}"
            ));
        }
        let s = 2 * (alphabet.size() as u32 - 1) * ceil_log2(n + 1);
        let layout = super::payload::PayloadLayout::finite_horizon(alphabet, n, b)?;
        if layout.total_bits() > s {
            return fail(format!(
                "payload needs {} bits but s={s}",
                layout.total_bits()
            ));
        }
        Ok(Self {
            alphabet,
            variant: Variant::FiniteHorizon { n },
            sync,
            arith,
            family,
            active_fill: 0,
            fh: Some(FiniteHorizonSizing { n, b, m, tau }),
            hf: None,
        })
    }

    /// Horizon-free scheme with arithmetically growing blocks `b_k = b0 + k`.
    pub fn horizon_free(
        alphabet: Alphabet,
        b0: u64,
        exps: HorizonFreeExponents,
        arith: ArithMode,
        family: FamilyMode,
    ) -> Result<Self> {
        if b0 < 2 {
            return Err(Error::InfeasibleParams(format!("b0={b0} too small")));
        }
        Ok(Self {
            alphabet,
            variant: Variant::HorizonFree { b0 },
            sync: SyncMode::Free,
            arith,
            family,
            active_fill: 0,
            fh: None,
            hf: Some(HorizonFreeSizing {
                b0,
                sample: exps.sample,
                deviation: exps.deviation,
                recency: exps.recency,
            }),
        })
    }

    pub fn with_active_fill(mut self, fill: usize) -> Self {
        assert!(self.alphabet.contains(fill));
        self.active_fill = fill;
        self
    }

    pub fn horizon(&self) -> Option<u64> {
        self.fh.as_ref().map(|f| f.n)
    }

    /// Parameters of the `k`-th block (1-based).
    pub fn block_params(&self, k: u64) -> BlockParams {
        match (&self.fh, &self.hf) {
            (Some(fh), None) => {
                let active = match self.sync {
                    SyncMode::Free => 0,
                    SyncMode::Charged => 8 * fh.m * u64::from(ceil_log2(fh.b)),
                };
                BlockParams {
                    index: k,
                    length: fh.b,
                    active_len: active,
                    passive_len: fh.b - active,
                    m: fh.m,
                    s: 2 * (self.alphabet.size() as u32 - 1)
                        * ceil_log2(fh.n + 1),
                    tau: fh.tau.clone(),
                    layout: super::payload::PayloadLayout::finite_horizon(
                        self.alphabet,
                        fh.n,
                        fh.b,
                    )
                    .expect("validated at construction"),
                }
            }
            (None, Some(hf)) => {
                let b_k = hf.b0 + k;
                // clamp keeps the type marginals valid on small early blocks,
                // where b^a1 can exceed b/2
                let m_k = hf.sample.ceil_pow(b_k).min(b_k / 2).max(1);
                let layout =
                    super::payload::PayloadLayout::horizon_free(self.alphabet, hf.b0, k);
                // zero-padded length: the nominal 2|X| log2(k+1) schedule,
                // raised when the early payload genuinely needs more bits
                let s = (2 * self.alphabet.size() as u32 * ceil_log2(k + 1))
                    .max(layout.total_bits());
                BlockParams {
                    index: k,
                    length: b_k,
                    active_len: 0,
                    passive_len: b_k,
                    m: m_k,
                    s,
                    tau: Tau::Power {
                        base: b_k,
                        exp: hf.deviation,
                    },
                    layout,
                }
            }
            _ => unreachable!("exactly one sizing is set"),
        }
    }

    /// Horizon-free recency rule: can anything be decoded when stopping
    /// during block `k_term` with `last_accepted` (1-based, 0 = none)?
    pub fn recency_met(&self, last_accepted: u64, k_term: u64) -> bool {
        let hf = self.hf.as_ref().expect("horizon-free only");
        if last_accepted == 0 {
            return false;
        }
        // last_accepted >= k_term^a3  <=>  last_accepted^den >= k_term^num
        let e = hf.recency;
        let lhs = num_bigint::BigUint::from(last_accepted).pow(e.den);
        let rhs = num_bigint::BigUint::from(k_term).pow(e.num);
        lhs >= rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qutil::q;

    #[test]
    fn canonical_exponent_conditions_hold() {
        assert!(Exponents::canonical().check().is_ok());
        assert!(HorizonFreeExponents::canonical().check().is_ok());

        let bad = Exponents {
            block: RatExp::new(3, 4),
            sample: RatExp::new(1, 2),
            deviation: RatExp::new(3, 8),
        };
        let msg = bad.check().unwrap_err();
        assert!(msg.contains("2(a1 - a2)"));
    }

    #[test]
    fn canonical_finite_horizon_sizes() {
        let p = SchemeParams::finite_horizon(
            Alphabet::binary(),
            1 << 16,
            Exponents::canonical(),
            SyncMode::Free,
            ArithMode::Fast,
            FamilyMode::NoiseSequence,
        )
        .unwrap();
        let bp = p.block_params(1);
        assert_eq!(bp.length, 4096);
        assert_eq!(bp.m, 256);
        assert_eq!(bp.s, 2 * 17);
        // tau = (2^16)^(-1/16) = 1/2 exactly
        assert_eq!(bp.tau.cmp_scaled(&q(1, 2), 1), std::cmp::Ordering::Equal);
        assert_eq!(bp.tau.cmp_scaled(&q(3, 2), 5), std::cmp::Ordering::Less);
    }

    #[test]
    fn charged_mode_rejected_when_budget_exceeds_block() {
        // canonical exponents at desk scale: b_a = 8m ceil(log2 b) >= b
        let err = SchemeParams::finite_horizon(
            Alphabet::binary(),
            1 << 16,
            Exponents::canonical(),
            SyncMode::Charged,
            ArithMode::Fast,
            FamilyMode::ModuloAdditive,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleParams(_)));
        let msg = format!("{err}");
        assert!(msg.contains("b_a"));

        // a feasible charged configuration at a large horizon
        let ok = SchemeParams::finite_horizon_raw(
            Alphabet::binary(),
            1 << 20,
            1 << 15,
            256,
            Tau::Fixed(q(1, 16)),
            SyncMode::Charged,
            ArithMode::Fast,
            FamilyMode::ModuloAdditive,
        );
        assert!(ok.is_ok());
        let bp = ok.unwrap().block_params(1);
        assert_eq!(bp.active_len, 8 * 256 * 15);
        assert!(bp.active_len < bp.length);
    }

    #[test]
    fn horizon_free_params_grow() {
        let p = SchemeParams::horizon_free(
            Alphabet::binary(),
            64,
            HorizonFreeExponents::canonical(),
            ArithMode::Fast,
            FamilyMode::NoiseSequence,
        )
        .unwrap();
        let b1 = p.block_params(1);
        assert_eq!(b1.length, 65);
        // early-block clamp: ceil(65^(7/8)) = 39 > 65/2
        assert_eq!(b1.m, 32);
        let b500 = p.block_params(500);
        assert_eq!(b500.length, 564);
        assert!(b500.m < 564 / 2);
        assert!(b500.s >= b500.layout.total_bits());

        // recency: rho_k = k^(3/8)
        assert!(!p.recency_met(0, 10));
        assert!(p.recency_met(3, 10)); // 3^8 = 6561 >= 10^3
        assert!(!p.recency_met(2, 10)); // 2^8 = 256 < 1000
    }

    #[test]
    fn structural_rejections_name_the_problem() {
        let e = SchemeParams::finite_horizon_raw(
            Alphabet::binary(),
            100,
            64,
            40,
            Tau::Fixed(q(1, 10)),
            SyncMode::Free,
            ArithMode::Exact,
            FamilyMode::ModuloAdditive,
        )
        .unwrap_err();
        assert!(format!("{e}").contains("2m"));
    }
}
