//! Empirical distributions, entropy, and sampling operators.
//!
//! Mass vectors are exact rationals throughout; entropy is the one quantity
//! computed in floating point, since it only feeds reports and never a
//! threshold decision.

use crate::alphabet::{Alphabet, PatternSeq, SymbolSeq};
use crate::qutil::{self, Q};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Exact probability vector over a modulo alphabet (entries sum to 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    alphabet: Alphabet,
    mass: Vec<Q>,
}

impl EmpiricalDistribution {
    /// Builds from an explicit mass vector; must sum to exactly 1.
    pub fn from_mass(alphabet: Alphabet, mass: Vec<Q>) -> Result<Self> {
        if mass.len() != alphabet.size() {
            return Err(Error::AlphabetMismatch(alphabet.size(), mass.len()));
        }
        let total: Q = mass.iter().cloned().sum();
        assert!(total.is_one(), "mass must sum to exactly 1");
        assert!(mass.iter().all(|m| !m.is_negative()));
        Ok(Self { alphabet, mass })
    }

    /// The uniform distribution `p_u`.
    pub fn uniform(alphabet: Alphabet) -> Self {
        let share = Q::new(BigInt::one(), BigInt::from(alphabet.size()));
        Self {
            alphabet,
            mass: vec![share; alphabet.size()],
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn mass(&self) -> &[Q] {
        &self.mass
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        qutil::entropy_bits(&self.mass)
    }
}

/// A sample's symbol-occurrence vector normalized by the *expected* sample
/// size rather than the realized one. Sums to the scale factor
/// `alpha = realized / expected`, not to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledSampleDistribution {
    alphabet: Alphabet,
    mass: Vec<Q>,
    scale: Q,
}

impl ScaledSampleDistribution {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn mass(&self) -> &[Q] {
        &self.mass
    }

    /// The normalization factor `alpha`.
    pub fn scale(&self) -> &Q {
        &self.scale
    }
}

/// Relative symbol occurrences of `seq`; the empty sequence is uniform by
/// convention.
pub fn empirical_distribution(seq: &SymbolSeq) -> EmpiricalDistribution {
    if seq.is_empty() {
        return EmpiricalDistribution::uniform(seq.alphabet());
    }
    let n = BigInt::from(seq.len());
    let mass = seq
        .counts()
        .into_iter()
        .map(|c| Q::new(BigInt::from(c), n.clone()))
        .collect();
    EmpiricalDistribution {
        alphabet: seq.alphabet(),
        mass,
    }
}

/// Zero-order empirical entropy of `seq`, in bits.
pub fn empirical_entropy(seq: &SymbolSeq) -> f64 {
    empirical_distribution(seq).entropy_bits()
}

/// `max_i |p_i - q_i|`, exact.
pub fn linf_distance(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<Q> {
    if p.alphabet != q.alphabet {
        return Err(Error::AlphabetMismatch(
            p.alphabet.size(),
            q.alphabet.size(),
        ));
    }
    Ok(linf_mass(&p.mass, &q.mass))
}

/// L-infinity distance between raw mass vectors of equal length.
pub fn linf_mass(p: &[Q], q: &[Q]) -> Q {
    debug_assert_eq!(p.len(), q.len());
    let mut best = Q::zero();
    for (a, b) in p.iter().zip(q) {
        let d = (a - b).abs();
        if d > best {
            best = d;
        }
    }
    best
}

/// Lower bound `log2|X| * (1 - |X| * ||p - p_u||_inf)` on the entropy of `p`.
///
/// May be negative; the entropy itself never is, so the bound is always valid
/// (a tested property, not an assumption).
pub fn entropy_linf_lower_bound(p: &EmpiricalDistribution) -> f64 {
    let uniform = EmpiricalDistribution::uniform(p.alphabet);
    let dev = linf_mass(&p.mass, &uniform.mass);
    let size = p.alphabet.size() as f64;
    size.log2() * (1.0 - size * qutil::ratio_to_f64(&dev))
}

/// Subsequence of `seq` at the pattern's one-positions, order preserved.
pub fn sample(seq: &SymbolSeq, pattern: &PatternSeq) -> Result<SymbolSeq> {
    if seq.len() != pattern.len() {
        return Err(Error::LengthMismatch(seq.len(), pattern.len()));
    }
    let mut out = SymbolSeq::empty(seq.alphabet());
    for (i, keep) in pattern.iter().enumerate() {
        if keep {
            out.push(seq.get(i));
        }
    }
    Ok(out)
}

/// Sample occurrence counts divided by the expected sample size.
///
/// Equals `alpha * p_emp(sample)` with `alpha = ones(pattern)/expected_ones`;
/// an empty sample yields all-zero mass with scale 0.
pub fn alpha_normalized_sample_distribution(
    seq: &SymbolSeq,
    pattern: &PatternSeq,
    expected_ones: &Q,
) -> Result<ScaledSampleDistribution> {
    if !expected_ones.is_positive() {
        return Err(Error::NonPositiveExpectation);
    }
    let sub = sample(seq, pattern)?;
    let scale = Q::new(BigInt::from(sub.len()), BigInt::one()) / expected_ones;
    let mass = sub
        .counts()
        .into_iter()
        .map(|c| Q::new(BigInt::from(c), BigInt::one()) / expected_ones)
        .collect();
    Ok(ScaledSampleDistribution {
        alphabet: seq.alphabet(),
        mass,
        scale,
    })
}
