//! Update payload: binary layout and round-tripping.
//!
//! The uncoded payload of one block is
//!
//! ```text
//! [ noise counts, mixed radix b ][ message interval index ][ ambiguity ][ 0 pad ]
//! ```
//!
//! all MSB-first. The counts field carries the per-symbol occurrences of
//! symbols `1..|X|-1` over the regular positions of the previously accepted
//! block (the count of symbol 0 is implied by the regular-position total);
//! digit `i` is the `b^(i-1)` coefficient.

use crate::alphabet::Alphabet;
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Bit widths of the payload fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayloadLayout {
    /// Radix for the count digits (an upper bound on any per-symbol count).
    pub count_radix: u64,
    /// Number of count digits, `|X| - 1`.
    pub count_digits: u32,
    /// Bits for the packed count value, `ceil(log2(radix^digits))`.
    pub count_bits: u32,
    /// Bits for the message-interval index.
    pub index_bits: u32,
}

fn bits_for_values(upper: &BigUint) -> u32 {
    // bits needed to address values in [0, upper)
    if upper <= &BigUint::from(1u32) {
        0
    } else {
        (upper - 1u32).bits() as u32
    }
}

impl PayloadLayout {
    pub fn finite_horizon(alphabet: Alphabet, n: u64, b: u64) -> Result<Self> {
        let digits = alphabet.size() as u32 - 1;
        let count_bits = bits_for_values(&BigUint::from(b).pow(digits));
        let index_bits = bits_for_values(&BigUint::from(n * (alphabet.size() as u64 - 1) + 1));
        if index_bits > 63 {
            return Err(Error::InfeasibleParams(format!(
                "interval index needs {index_bits} bits"
            )));
        }
        Ok(Self {
            count_radix: b,
            count_digits: digits,
            count_bits,
            index_bits,
        })
    }

    /// Horizon-free layout for block `k` (1-based): counts range over the
    /// previous block's size, the index over all segments so far.
    pub fn horizon_free(alphabet: Alphabet, b0: u64, k: u64) -> Self {
        let digits = alphabet.size() as u32 - 1;
        // counts refer to the previous block; block 1 has none and uses its
        // own size as a stand-in radix
        let radix = if k > 1 { b0 + k - 1 } else { b0 + 1 };
        let n_prev: u64 = (1..k).map(|j| b0 + j).sum();
        let count_bits = bits_for_values(&BigUint::from(radix).pow(digits));
        let index_bits =
            bits_for_values(&BigUint::from(n_prev * (alphabet.size() as u64 - 1) + 1));
        Self {
            count_radix: radix,
            count_digits: digits,
            count_bits,
            index_bits,
        }
    }

    pub fn total_bits(&self) -> u32 {
        self.count_bits + self.index_bits + 1
    }
}

/// Decoded (or to-be-sent) update information of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdatePayload {
    /// Occurrences of symbols `1..|X|-1` over the previously accepted
    /// block's regular positions.
    pub noise_counts: Vec<u64>,
    /// Message-interval index in the posterior at the end of that block.
    pub interval_index: u64,
    pub ambiguity: bool,
}

impl UpdatePayload {
    pub fn zero(alphabet: Alphabet) -> Self {
        Self {
            noise_counts: vec![0; alphabet.size() - 1],
            interval_index: 0,
            ambiguity: false,
        }
    }

    /// MSB-first bits, zero-padded to `s`.
    pub fn encode(&self, layout: &PayloadLayout, s: u32) -> Vec<bool> {
        debug_assert_eq!(self.noise_counts.len() as u32, layout.count_digits);
        debug_assert!(layout.total_bits() <= s);
        let mut bits = Vec::with_capacity(s as usize);
        let mut packed = BigUint::zero();
        for (i, &c) in self.noise_counts.iter().enumerate() {
            debug_assert!(c < layout.count_radix);
            packed += BigUint::from(c) * BigUint::from(layout.count_radix).pow(i as u32);
        }
        push_msb_first(&mut bits, &packed, layout.count_bits);
        push_msb_first(&mut bits, &BigUint::from(self.interval_index), layout.index_bits);
        bits.push(self.ambiguity);
        bits.resize(s as usize, false);
        bits
    }

    /// Inverse of [`UpdatePayload::encode`]. Tolerates corrupted bit
    /// patterns: values decode to whatever the bits say, and the caller caps
    /// them against what the referenced block allows.
    pub fn decode(bits: &[bool], layout: &PayloadLayout) -> Self {
        let mut pos = 0usize;
        let packed = read_msb_first(bits, &mut pos, layout.count_bits);
        let index = read_msb_first(bits, &mut pos, layout.index_bits);
        let ambiguity = bits.get(pos).copied().unwrap_or(false);
        let radix = BigUint::from(layout.count_radix);
        let mut rem = packed;
        let mut noise_counts = Vec::with_capacity(layout.count_digits as usize);
        for _ in 0..layout.count_digits {
            noise_counts.push((&rem % &radix).to_u64().unwrap());
            rem /= &radix;
        }
        Self {
            noise_counts,
            interval_index: index.to_u64().unwrap_or(u64::MAX),
            ambiguity,
        }
    }

    /// Caps decoded counts so they cannot exceed the referenced block's
    /// regular-position total; deterministic on both terminals.
    pub fn cap_counts(&mut self, regular_total: u64) {
        let mut remaining = regular_total;
        for c in &mut self.noise_counts {
            *c = (*c).min(remaining);
            remaining -= *c;
        }
    }
}

fn push_msb_first(bits: &mut Vec<bool>, value: &BigUint, width: u32) {
    debug_assert!(value.bits() as u32 <= width, "value too wide");
    for i in (0..width).rev() {
        bits.push(value.bit(u64::from(i)));
    }
}

fn read_msb_first(bits: &[bool], pos: &mut usize, width: u32) -> BigUint {
    let mut v = BigUint::zero();
    for _ in 0..width {
        v <<= 1u32;
        if bits.get(*pos).copied().unwrap_or(false) {
            v += 1u32;
        }
        *pos += 1;
    }
    v
}
