//! Modulo alphabets and the sequences over them.

use crate::{Error, Result};

/// A symbol is a residue in `{0, ..., |X|-1}`.
pub type Symbol = usize;

/// A finite alphabet `{0, ..., size-1}` with modulo addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(Error::BadAlphabetSize(size));
        }
        Ok(Self { size })
    }

    /// Binary alphabet, the most common case.
    pub fn binary() -> Self {
        Self { size: 2 }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s < self.size
    }

    pub fn check(&self, s: Symbol) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol: s,
                size: self.size,
            })
        }
    }

    /// Modulo addition.
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(a < self.size && b < self.size);
        let s = a + b;
        if s >= self.size {
            s - self.size
        } else {
            s
        }
    }

    /// Modulo subtraction `a - b`.
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(a < self.size && b < self.size);
        if a >= b {
            a - b
        } else {
            a + self.size - b
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size
    }

    /// `log2 |X|` in bits.
    pub fn log2_size(&self) -> f64 {
        (self.size as f64).log2()
    }
}

/// An ordered sequence of symbols over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSeq {
    alphabet: Alphabet,
    data: Vec<u8>,
}

impl SymbolSeq {
    pub fn new(alphabet: Alphabet, symbols: impl IntoIterator<Item = Symbol>) -> Result<Self> {
        let mut data = Vec::new();
        for s in symbols {
            alphabet.check(s)?;
            data.push(s as u8);
        }
        Ok(Self { alphabet, data })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            data: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> Symbol {
        self.data[i] as Symbol
    }

    pub fn push(&mut self, s: Symbol) {
        debug_assert!(self.alphabet.contains(s));
        self.data.push(s as u8);
    }

    pub fn iter(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.data.iter().map(|&b| b as Symbol)
    }

    /// Per-symbol occurrence counts.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.alphabet.size()];
        for s in self.iter() {
            c[s] += 1;
        }
        c
    }

    /// Componentwise modulo subtraction `self - other`.
    pub fn sub(&self, other: &SymbolSeq) -> Result<SymbolSeq> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch(
                self.alphabet.size(),
                other.alphabet.size(),
            ));
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        let data = self
            .iter()
            .zip(other.iter())
            .map(|(a, b)| self.alphabet.sub(a, b) as u8)
            .collect();
        Ok(SymbolSeq {
            alphabet: self.alphabet,
            data,
        })
    }
}

/// A 0/1 pattern marking sampling positions inside a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSeq {
    bits: Vec<bool>,
}

impl PatternSeq {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; len];
        for i in ones {
            bits[i] = true;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Number of ones, i.e. the realized sample size.
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }
}
