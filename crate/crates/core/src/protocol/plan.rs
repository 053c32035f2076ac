//! Per-block randomization: position types and repetition slots.

use super::params::{BlockParams, FamilyMode};
use crate::alphabet::Alphabet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Role of one passive position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionKind {
    Training,
    /// Carries one repetition of one payload bit; `slot = i + j*s` selects
    /// uncoded bit `i` sent over the input pair `{0, j+1}`.
    Update { slot: u32 },
    Regular,
}

/// One block's realized randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub index: u64,
    pub positions: Vec<PositionKind>,
    pub training_count: u64,
    pub update_count: u64,
    pub regular_count: u64,
}

impl BlockPlan {
    fn from_positions(index: u64, positions: Vec<PositionKind>) -> Self {
        let mut t = 0;
        let mut u = 0;
        let mut r = 0;
        for p in &positions {
            match p {
                PositionKind::Training => t += 1,
                PositionKind::Update { .. } => u += 1,
                PositionKind::Regular => r += 1,
            }
        }
        Self {
            index,
            positions,
            training_count: t,
            update_count: u,
            regular_count: r,
        }
    }
}

/// Draws the block's position types and repetition slots from the shared
/// stream.
///
/// In the i.i.d. modes every passive position is independently training with
/// probability `m/b_p`, update with probability `m/b_p` (its slot uniform
/// over `(|X|-1) s` values), and regular otherwise. In noise-sequence mode
/// the counts are exact: `m` training, `m` update, and the slot multiset has
/// near-uniform composition.
pub fn plan_block(
    params: &BlockParams,
    alphabet: Alphabet,
    family: FamilyMode,
    rng: &mut ChaCha8Rng,
) -> BlockPlan {
    let bp = params.passive_len;
    let m = params.m;
    let slots = params.slot_count(alphabet);
    match family {
        FamilyMode::ModuloAdditive | FamilyMode::GeneralCausalDithered => {
            let mut positions = Vec::with_capacity(bp as usize);
            for _ in 0..bp {
                let v = rng.gen_range(0..bp);
                if v < m {
                    positions.push(PositionKind::Training);
                } else if v < 2 * m {
                    let slot = rng.gen_range(0..slots);
                    positions.push(PositionKind::Update { slot });
                } else {
                    positions.push(PositionKind::Regular);
                }
            }
            BlockPlan::from_positions(params.index, positions)
        }
        FamilyMode::NoiseSequence => {
            // exactly m training and m update positions
            let mut positions = Vec::with_capacity(bp as usize);
            let mut slot_pool = near_uniform_slots(m, slots, rng);
            debug_assert_eq!(slot_pool.len() as u64, m);
            shuffle(&mut slot_pool, rng);
            let mut pool_iter = slot_pool.into_iter();
            for i in 0..bp {
                positions.push(if i < m {
                    PositionKind::Training
                } else if i < 2 * m {
                    PositionKind::Update {
                        slot: pool_iter.next().unwrap(),
                    }
                } else {
                    PositionKind::Regular
                });
            }
            shuffle(&mut positions, rng);
            BlockPlan::from_positions(params.index, positions)
        }
    }
}

/// `m` slot values spread as evenly as possible over `[0, slots)`: every
/// value gets `floor(m/slots)` copies and a random subset of values gets one
/// extra.
fn near_uniform_slots(m: u64, slots: u32, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let base = m / u64::from(slots);
    let extra = (m % u64::from(slots)) as u32;
    let mut values: Vec<u32> = (0..slots).collect();
    shuffle(&mut values, rng);
    let mut pool = Vec::with_capacity(m as usize);
    for (rank, v) in values.into_iter().enumerate() {
        let copies = base + u64::from((rank as u32) < extra);
        for _ in 0..copies {
            pool.push(v);
        }
    }
    pool
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// Accept only when both counts are in `[ceil(m/2), 2m]`.
pub fn range_check(plan: &BlockPlan, m: u64) -> bool {
    let lo = m.div_ceil(2);
    let hi = 2 * m;
    (lo..=hi).contains(&plan.training_count) && (lo..=hi).contains(&plan.update_count)
}
