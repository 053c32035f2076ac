//! Sequential Krichevsky-Trofimov probability estimators.
//!
//! The estimate for symbol `i` after a committed history with counts `c` and
//! total `T` is `(c_i + 1/2) / (T + |X|/2)`, kept exact by doubling:
//! `(2 c_i + 1) / (2 T + |X|)`. Lazy variants buffer observations and fold
//! them in only at schedule-determined commit points, which is how the block
//! protocol stays "two accepted blocks behind".

use crate::alphabet::{Alphabet, Symbol, SymbolSeq};
use crate::qutil::{log2_q, Q};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::One;

/// When a lazily-updated estimator folds its buffered observations in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdateSchedule {
    /// Commit after every observation (the plain KT estimator).
    EveryStep,
    /// Commit after every `b`-th observation.
    EveryBSteps(u64),
    /// Commit exactly at the listed 1-based observation indices.
    Explicit(Vec<u64>),
}

impl UpdateSchedule {
    fn commits_at(&self, position: u64) -> bool {
        match self {
            UpdateSchedule::EveryStep => true,
            UpdateSchedule::EveryBSteps(b) => position % b == 0,
            UpdateSchedule::Explicit(points) => points.binary_search(&position).is_ok(),
        }
    }
}

/// Add-half sequential symbol estimator with buffered (uncommitted) history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KtEstimator {
    alphabet: Alphabet,
    committed_counts: Vec<u64>,
    committed_total: u64,
    pending: Vec<u64>,
    pending_total: u64,
    observed: u64,
}

impl KtEstimator {
    pub fn new(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            committed_counts: vec![0; alphabet.size()],
            committed_total: 0,
            pending: vec![0; alphabet.size()],
            pending_total: 0,
            observed: 0,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn committed_counts(&self) -> &[u64] {
        &self.committed_counts
    }

    pub fn committed_total(&self) -> u64 {
        self.committed_total
    }

    /// Current estimate for `symbol`, from committed history only.
    pub fn estimate(&self, symbol: Symbol) -> Result<Q> {
        self.alphabet.check(symbol)?;
        Ok(Q::new(
            BigInt::from(2 * self.committed_counts[symbol] + 1),
            BigInt::from(2 * self.committed_total + self.alphabet.size() as u64),
        ))
    }

    /// Estimates for the whole alphabet; they sum to exactly 1.
    pub fn estimates(&self) -> Vec<Q> {
        let den = BigInt::from(2 * self.committed_total + self.alphabet.size() as u64);
        self.committed_counts
            .iter()
            .map(|&c| Q::new(BigInt::from(2 * c + 1), den.clone()))
            .collect()
    }

    /// Buffers one observation; folds pending history in when the schedule
    /// commits at this position.
    pub fn observe(&mut self, symbol: Symbol, schedule: &UpdateSchedule) -> Result<()> {
        self.alphabet.check(symbol)?;
        self.pending[symbol] += 1;
        self.pending_total += 1;
        self.observed += 1;
        if schedule.commits_at(self.observed) {
            self.commit();
        }
        Ok(())
    }

    /// Folds all buffered observations into the committed counts.
    pub fn commit(&mut self) {
        for (c, p) in self.committed_counts.iter_mut().zip(self.pending.iter_mut()) {
            *c += *p;
            *p = 0;
        }
        self.committed_total += self.pending_total;
        self.pending_total = 0;
    }

    /// Directly commits externally decoded per-symbol counts (the block
    /// protocol's update payloads arrive as counts, not symbol streams).
    pub fn commit_counts(&mut self, counts: &[u64]) {
        debug_assert_eq!(counts.len(), self.alphabet.size());
        for (c, &extra) in self.committed_counts.iter_mut().zip(counts) {
            *c += extra;
        }
        self.committed_total += counts.iter().sum::<u64>();
    }
}

/// Probability the estimator assigns to `seq` while observing
/// `observations`, i.e. the product of per-step estimates. With
/// `observations == seq` this is the self-observed assignment.
pub fn assigned_probability(
    seq: &SymbolSeq,
    schedule: &UpdateSchedule,
    observations: &SymbolSeq,
) -> Result<Q> {
    if seq.len() != observations.len() {
        return Err(Error::LengthMismatch(seq.len(), observations.len()));
    }
    let mut est = KtEstimator::new(seq.alphabet());
    let mut product = Q::one();
    for k in 0..seq.len() {
        product *= est.estimate(seq.get(k))?;
        est.observe(observations.get(k), schedule)?;
    }
    Ok(product)
}

/// `-log2` of the assigned probability, in bits.
pub fn codelength_bits(
    seq: &SymbolSeq,
    schedule: &UpdateSchedule,
    observations: &SymbolSeq,
) -> Result<f64> {
    let p = assigned_probability(seq, schedule, observations)?;
    Ok(-log2_q(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qutil::{q, qi};
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn bin(symbols: &[usize]) -> SymbolSeq {
        SymbolSeq::new(Alphabet::binary(), symbols.iter().copied()).unwrap()
    }

    #[test]
    fn estimate_examples() {
        let fresh = KtEstimator::new(Alphabet::binary());
        assert_eq!(fresh.estimate(0).unwrap(), q(1, 2));

        let mut est = KtEstimator::new(Alphabet::binary());
        for s in [1, 0, 1] {
            est.observe(s, &UpdateSchedule::EveryStep).unwrap();
        }
        assert_eq!(est.estimate(1).unwrap(), q(5, 8));

        let a4 = Alphabet::new(4).unwrap();
        let mut est = KtEstimator::new(a4);
        for s in [3, 3] {
            est.observe(s, &UpdateSchedule::EveryStep).unwrap();
        }
        assert_eq!(est.estimate(3).unwrap(), q(5, 8));
        assert!(est.estimate(4).is_err());
    }

    #[test]
    fn observe_commit_semantics() {
        let mut est = KtEstimator::new(Alphabet::binary());
        est.observe(1, &UpdateSchedule::EveryStep).unwrap();
        assert_eq!(est.estimate(1).unwrap(), q(3, 4));

        // lazy: three observations under every-4 leave estimates untouched
        let mut lazy = KtEstimator::new(Alphabet::binary());
        for _ in 0..3 {
            lazy.observe(1, &UpdateSchedule::EveryBSteps(4)).unwrap();
        }
        assert_eq!(lazy.estimate(1).unwrap(), q(1, 2));
        lazy.observe(1, &UpdateSchedule::EveryBSteps(4)).unwrap();
        assert_eq!(lazy.estimate(1).unwrap(), q(9, 10));
    }

    #[test]
    fn every_one_step_matches_every_step_exhaustively() {
        // brute-force equivalence oracle over all binary sequences, n <= 12
        for n in 0..=12usize {
            for bits in 0u32..(1 << n) {
                let seq = bin(&(0..n).map(|i| ((bits >> i) & 1) as usize).collect::<Vec<_>>());
                let a = assigned_probability(&seq, &UpdateSchedule::EveryStep, &seq).unwrap();
                let b = assigned_probability(&seq, &UpdateSchedule::EveryBSteps(1), &seq).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn assigned_probability_examples() {
        let z = bin(&[0, 1]);
        assert_eq!(
            assigned_probability(&z, &UpdateSchedule::EveryStep, &z).unwrap(),
            q(1, 8)
        );

        let empty = SymbolSeq::empty(Alphabet::binary());
        assert_eq!(
            assigned_probability(&empty, &UpdateSchedule::EveryStep, &empty).unwrap(),
            qi(1)
        );

        let z = bin(&[0, 0, 0, 0]);
        assert_eq!(
            assigned_probability(&z, &UpdateSchedule::EveryStep, &z).unwrap(),
            q(35, 128)
        );
    }

    #[test]
    fn codelength_examples() {
        let z = bin(&[0, 1]);
        let bits = codelength_bits(&z, &UpdateSchedule::EveryStep, &z).unwrap();
        assert!((bits - 3.0).abs() < 1e-12);

        let empty = SymbolSeq::empty(Alphabet::binary());
        assert_eq!(
            codelength_bits(&empty, &UpdateSchedule::EveryStep, &empty).unwrap(),
            0.0
        );

        let z = bin(&[0, 0, 0, 0]);
        let bits = codelength_bits(&z, &UpdateSchedule::EveryStep, &z).unwrap();
        assert!((bits - 1.8707169830550336).abs() < 1e-12);
    }

    #[test]
    fn kt_is_exchangeable_for_short_binary_sequences() {
        // self-observed every-step assignment depends only on the type
        for n in 1..=8usize {
            let mut by_weight: Vec<Option<Q>> = vec![None; n + 1];
            for bits in 0u32..(1 << n) {
                let seq = bin(&(0..n).map(|i| ((bits >> i) & 1) as usize).collect::<Vec<_>>());
                let p = assigned_probability(&seq, &UpdateSchedule::EveryStep, &seq).unwrap();
                let w = bits.count_ones() as usize;
                match &by_weight[w] {
                    None => by_weight[w] = Some(p),
                    Some(prev) => assert_eq!(prev, &p),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn estimates_sum_to_one_after_every_observe(
            symbols in prop::collection::vec(0usize..3, 1..60),
            b in 1u64..8,
        ) {
            let a = Alphabet::new(3).unwrap();
            let mut est = KtEstimator::new(a);
            let schedule = UpdateSchedule::EveryBSteps(b);
            for s in symbols {
                est.observe(s, &schedule).unwrap();
                let total: Q = est.estimates().into_iter().sum();
                prop_assert!(total.is_one());
                for sym in a.symbols() {
                    let e = est.estimate(sym).unwrap();
                    prop_assert!(e > Q::zero() && e < Q::one());
                }
            }
        }
    }
}
