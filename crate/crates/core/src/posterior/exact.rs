//! Reference posterior in arbitrary-precision rational arithmetic.
//!
//! Exactness is what makes the posterior-mass identities testable with zero
//! tolerance: after `n` iterations the density at the message point is
//! exactly `|X|^n` times the probability the estimator assigned to the
//! realized noise sequence.

use super::{MessageInterval, PosteriorEngine};
use crate::alphabet::{Alphabet, Symbol};
use crate::qutil::Q;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Segment {
    left: Q,
    right: Q,
    weight: Q,
}

/// Piecewise-constant density over `[0,1)` with exact rational endpoints and
/// weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPosterior {
    alphabet: Alphabet,
    segments: Vec<Segment>,
}

impl ExactPosterior {
    /// The flat prior.
    pub fn new(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            segments: vec![Segment {
                left: Q::zero(),
                right: Q::one(),
                weight: Q::one(),
            }],
        }
    }

    /// Builds from explicit `(left, right, weight)` triples partitioning
    /// `[0,1)` with total mass 1. Test scaffolding.
    pub fn from_parts(alphabet: Alphabet, parts: Vec<(Q, Q, Q)>) -> Self {
        let segments: Vec<Segment> = parts
            .into_iter()
            .map(|(left, right, weight)| Segment {
                left,
                right,
                weight,
            })
            .collect();
        let p = Self { alphabet, segments };
        assert!(p.total_mass().is_one(), "mass must be exactly 1");
        p
    }

    /// Total probability mass; exactly 1 by invariant.
    pub fn total_mass(&self) -> Q {
        self.segments
            .iter()
            .map(|s| &s.weight * (&s.right - &s.left))
            .sum()
    }

    /// Density at `theta`, i.e. the containing segment's weight. This is the
    /// `f_n(theta)` of the exact identities.
    pub fn density_at(&self, theta: &Q) -> Result<Q> {
        let idx = self.locate(theta)?;
        Ok(self.segments[idx].weight.clone())
    }

    fn locate(&self, theta: &Q) -> Result<usize> {
        if theta.is_negative() || *theta >= Q::one() {
            return Err(Error::MessagePointOutOfRange);
        }
        let mut lo = 0usize;
        let mut hi = self.segments.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.segments[mid].left <= *theta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        debug_assert!(self.segments[lo].left <= *theta && *theta < self.segments[lo].right);
        Ok(lo)
    }
}

impl PosteriorEngine for ExactPosterior {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn segment_count(&self) -> usize {
        self.segments.len()
    }

    fn partition_points(&self) -> Vec<Q> {
        let size = self.alphabet.size();
        let mut points = Vec::with_capacity(size - 1);
        let mut cum = Q::zero();
        let mut j = 1usize;
        for seg in &self.segments {
            let mass = &seg.weight * (&seg.right - &seg.left);
            while j < size {
                let target = Q::new(BigInt::from(j), BigInt::from(size));
                if &cum + &mass < target {
                    break;
                }
                // cumulative mass on [0, c) equals j/|X| exactly
                let c = &seg.left + (target - &cum) / &seg.weight;
                points.push(c);
                j += 1;
            }
            cum += mass;
        }
        debug_assert_eq!(points.len(), size - 1);
        points
    }

    fn encode_symbol(&self, theta: &Q) -> Result<Symbol> {
        if theta.is_negative() || *theta >= Q::one() {
            return Err(Error::MessagePointOutOfRange);
        }
        let points = self.partition_points();
        Ok(points.iter().take_while(|c| *c <= theta).count())
    }

    fn update(&mut self, received: Symbol, estimates: &[Q]) {
        let size = self.alphabet.size();
        debug_assert!(self.alphabet.contains(received));
        debug_assert_eq!(estimates.len(), size);
        debug_assert!(estimates.iter().all(|e| e.is_positive()));
        debug_assert!(estimates.iter().cloned().sum::<Q>().is_one());

        let points = self.partition_points();
        let size_q = Q::from_integer(BigInt::from(size));
        let factors: Vec<Q> = (0..size)
            .map(|i| &size_q * &estimates[self.alphabet.sub(received, i)])
            .collect();

        let mut out = Vec::with_capacity(self.segments.len() + size - 1);
        let mut group = 0usize;
        let mut pi = 0usize;
        for seg in &self.segments {
            let mut left = seg.left.clone();
            // a partition point at the segment's left edge only advances the group
            while pi < points.len() && points[pi] == left {
                group += 1;
                pi += 1;
            }
            while pi < points.len() && points[pi] < seg.right {
                out.push(Segment {
                    left,
                    right: points[pi].clone(),
                    weight: &seg.weight * &factors[group],
                });
                left = points[pi].clone();
                group += 1;
                pi += 1;
            }
            out.push(Segment {
                left,
                right: seg.right.clone(),
                weight: &seg.weight * &factors[group],
            });
        }
        self.segments = out;
        debug_assert!(self.total_mass().is_one());
    }

    fn message_interval(&self, theta: &Q) -> Result<MessageInterval> {
        let idx = self.locate(theta)?;
        Ok(MessageInterval {
            left: self.segments[idx].left.clone(),
            right: self.segments[idx].right.clone(),
            segment_index: idx,
        })
    }

    fn interval_by_index(&self, index: usize) -> Result<(Q, Q)> {
        let seg = self
            .segments
            .get(index)
            .ok_or(Error::SegmentIndexOutOfRange {
                index,
                count: self.segments.len(),
            })?;
        Ok((seg.left.clone(), seg.right.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{KtEstimator, UpdateSchedule};
    use crate::qutil::{q, qi};
    use rand::Rng;

    #[test]
    fn partition_points_examples() {
        let p = ExactPosterior::new(Alphabet::binary());
        assert_eq!(p.partition_points(), vec![q(1, 2)]);

        let p = ExactPosterior::new(Alphabet::new(4).unwrap());
        assert_eq!(p.partition_points(), vec![q(1, 4), q(1, 2), q(3, 4)]);

        let p = ExactPosterior::from_parts(
            Alphabet::binary(),
            vec![
                (qi(0), q(1, 2), q(3, 2)),
                (q(1, 2), qi(1), q(1, 2)),
            ],
        );
        assert_eq!(p.partition_points(), vec![q(1, 3)]);
    }

    #[test]
    fn encode_symbol_examples() {
        let p = ExactPosterior::new(Alphabet::new(4).unwrap());
        assert_eq!(p.encode_symbol(&q(3, 10)).unwrap(), 1);

        let p = ExactPosterior::new(Alphabet::binary());
        assert_eq!(p.encode_symbol(&q(3, 10)).unwrap(), 0);
        assert_eq!(p.encode_symbol(&q(1, 2)).unwrap(), 1);
        assert!(p.encode_symbol(&qi(1)).is_err());
    }

    #[test]
    fn update_reweights_subintervals() {
        let mut p = ExactPosterior::new(Alphabet::binary());
        p.update(0, &[q(3, 4), q(1, 4)]);
        assert_eq!(p.segment_count(), 2);
        assert_eq!(p.density_at(&q(1, 4)).unwrap(), q(3, 2));
        assert_eq!(p.density_at(&q(3, 4)).unwrap(), q(1, 2));
        assert!(p.total_mass().is_one());
    }

    #[test]
    fn uniform_estimates_leave_density_flat() {
        let a = Alphabet::new(3).unwrap();
        let mut p = ExactPosterior::new(a);
        p.update(2, &[q(1, 3), q(1, 3), q(1, 3)]);
        for probe in [q(1, 10), q(2, 5), q(7, 10), q(99, 100)] {
            assert_eq!(p.density_at(&probe).unwrap(), qi(1));
        }
        // segments still split for index stability
        assert_eq!(p.segment_count(), 3);
    }

    #[test]
    fn message_interval_and_index_roundtrip() {
        let mut p = ExactPosterior::new(Alphabet::binary());
        assert_eq!(
            p.message_interval(&q(3, 10)).unwrap(),
            MessageInterval {
                left: qi(0),
                right: qi(1),
                segment_index: 0
            }
        );
        assert_eq!(p.interval_by_index(0).unwrap(), (qi(0), qi(1)));

        p.update(0, &[q(3, 4), q(1, 4)]);
        let mi = p.message_interval(&q(3, 10)).unwrap();
        assert_eq!((mi.left, mi.right, mi.segment_index), (qi(0), q(1, 2), 0));
        let (l, r) = p.interval_by_index(mi.segment_index).unwrap();
        assert!(l <= q(3, 10) && q(3, 10) < r);
        assert!(p.interval_by_index(2).is_err());
    }

    #[test]
    fn fixed_crossover_density_identity() {
        // binary Horstein with constant estimates (1-p, p), p = 1/4:
        // density at theta after n steps is 2^n (1-p)^(n0) p^(n1), exactly
        let est = vec![q(3, 4), q(1, 4)];
        let a = Alphabet::binary();
        let mut rng = crate::rng::stream(5, 0);
        let theta = crate::qutil::random_dyadic(&mut rng, 128);
        let mut p = ExactPosterior::new(a);
        let mut ones = 0u32;
        let n = 200u32;
        for _ in 0..n {
            let x = p.encode_symbol(&theta).unwrap();
            let z = usize::from(rng.gen_bool(0.25));
            let y = a.add(x, z);
            p.update(y, &est);
            ones += z as u32;
        }
        let expect = q(2, 1).pow(n as i32)
            * q(3, 4).pow((n - ones) as i32)
            * q(1, 4).pow(ones as i32);
        assert_eq!(p.density_at(&theta).unwrap(), expect);
        assert!(p.segment_count() as u32 <= n + 1);
    }

    #[test]
    fn sequential_estimate_density_identity() {
        // f_n(theta) = |X|^n * p_hat(z^n) for KT(b) estimates, exactly
        for (size, b) in [(2usize, 1u64), (3, 4), (4, 8)] {
            let a = Alphabet::new(size).unwrap();
            let mut rng = crate::rng::stream(6, size as u8);
            let theta = crate::qutil::random_dyadic(&mut rng, 128);
            let schedule = UpdateSchedule::EveryBSteps(b);
            let mut est = KtEstimator::new(a);
            let mut posterior = ExactPosterior::new(a);
            let mut assigned = Q::one();
            let n = 100;
            for _ in 0..n {
                let x = posterior.encode_symbol(&theta).unwrap();
                let z = rng.gen_range(0..size);
                let y = a.add(x, z);
                assigned *= est.estimate(z).unwrap();
                posterior.update(y, &est.estimates());
                est.observe(z, &schedule).unwrap();
            }
            let expect = qi(size as i64).pow(n) * assigned;
            assert_eq!(posterior.density_at(&theta).unwrap(), expect);
            assert!(posterior.segment_count() <= n as usize * (size - 1) + 1);
        }
    }

    #[test]
    fn mass_stays_one_under_random_updates() {
        let a = Alphabet::new(4).unwrap();
        let mut rng = crate::rng::stream(7, 1);
        let mut p = ExactPosterior::new(a);
        for _ in 0..60 {
            // random positive estimates summing to 1
            let raw: Vec<i64> = (0..4).map(|_| rng.gen_range(1..50)).collect();
            let total: i64 = raw.iter().sum();
            let est: Vec<Q> = raw.iter().map(|&c| q(c, total)).collect();
            p.update(rng.gen_range(0..4), &est);
            assert!(p.total_mass().is_one());
        }
    }
}
