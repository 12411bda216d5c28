//! Address selection and the memory image being attested.

use rand::RngCore;

use super::lfsr::Lfsr;
use super::IcError;
use crate::gf2::Gf2Poly;

/// Feedback polynomial of the selection register, x^64 + x^63 + x^61 + x^60 + 1.
const SELECTOR_POLY: u128 = (1 << 64) | (1 << 63) | (1 << 61) | (1 << 60) | 1;

pub const MAX_WORDS_PER_TUPLE: u16 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AddressTuple {
    pub base: u64,
    pub words: u16,
}

/// Ordered list of `<base, words>` tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressList {
    pub tuples: Vec<AddressTuple>,
    pub word_size: u8,
}

impl AddressList {
    pub fn new(tuples: Vec<AddressTuple>, word_size: u8) -> Result<Self, IcError> {
        check_word_size(word_size)?;
        Ok(Self { tuples, word_size })
    }

    pub fn word_count(&self) -> u64 {
        self.tuples.iter().map(|t| u64::from(t.words)).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.word_count() * u64::from(self.word_size)
    }

    /// Fraction of `[low, high)` covered, `N / (high - low)`.
    pub fn coverage(&self, low: u64, high: u64) -> f64 {
        self.total_bytes() as f64 / (high - low) as f64
    }

    /// Expanded word addresses in order.
    pub fn expand(&self) -> impl Iterator<Item = u64> + '_ {
        let ws = u64::from(self.word_size);
        self.tuples
            .iter()
            .flat_map(move |t| (0..u64::from(t.words)).map(move |i| t.base + i * ws))
    }

    /// True if any expanded word overlaps the byte at `addr`.
    pub fn covers(&self, addr: u64) -> bool {
        let ws = u64::from(self.word_size);
        self.tuples
            .iter()
            .any(|t| addr >= t.base && addr < t.base + u64::from(t.words) * ws)
    }

    pub fn within(&self, low: u64, high: u64) -> bool {
        let ws = u64::from(self.word_size);
        self.tuples
            .iter()
            .all(|t| t.base >= low && t.base + u64::from(t.words) * ws <= high)
    }
}

pub(crate) fn check_word_size(word_size: u8) -> Result<(), IcError> {
    match word_size {
        4 | 8 => Ok(()),
        _ => Err(IcError::InvalidParameter("word size must be 4 or 8")),
    }
}

/// Draws a random ordered address list covering `n_bytes` of `[low, high)`.
///
/// Tuples come from a dedicated 64-bit selection LFSR seeded from `rng`:
/// each tuple takes one 64-bit draw for its word-aligned base and three bits
/// for a word count in `1..=8`. A tuple never runs past `high`, and the final
/// tuple is truncated so the words sum to `ceil(n_bytes / word_size)`.
pub fn gen_address_list<R: RngCore + ?Sized>(
    n_bytes: u64,
    low: u64,
    high: u64,
    word_size: u8,
    rng: &mut R,
) -> Result<AddressList, IcError> {
    check_word_size(word_size)?;
    let ws = u64::from(word_size);
    if high <= low {
        return Err(IcError::InvalidParameter("empty address region"));
    }
    let first = low.next_multiple_of(ws);
    let slots = high.saturating_sub(first) / ws;
    let words_needed = n_bytes.div_ceil(ws);
    if n_bytes < ws || words_needed > slots {
        return Err(IcError::InvalidCoverage {
            requested: n_bytes,
            region: high - low,
        });
    }

    let poly = Gf2Poly::from_u128(SELECTOR_POLY);
    let mut selector = Lfsr::new(&poly, rng.next_u64()).expect("selector degree is 64");
    let mut remaining = words_needed;
    let mut tuples = Vec::new();
    while remaining > 0 {
        let draw = selector.output_bits(64) as u64;
        let slot = draw % slots;
        let base = first + slot * ws;
        let want = 1 + ((draw >> 61) & 7);
        let words = want.min(remaining).min(slots - slot);
        tuples.push(AddressTuple {
            base,
            words: words as u16,
        });
        remaining -= words;
    }
    Ok(AddressList { tuples, word_size })
}

/// Contiguous byte content of `[low, low + len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryImage {
    low: u64,
    bytes: Vec<u8>,
}

impl MemoryImage {
    pub fn new(low: u64, bytes: Vec<u8>) -> Self {
        Self { low, bytes }
    }

    /// Pseudo-random content, reproducible from `seed`.
    pub fn random(low: u64, len: usize, seed: u64) -> Self {
        let mut bytes = vec![0u8; len];
        let mut state = seed;
        for chunk in bytes.chunks_mut(8) {
            state = crate::splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes()[..chunk.len()]);
        }
        Self { low, bytes }
    }

    pub fn low(&self) -> u64 {
        self.low
    }

    pub fn high(&self) -> u64 {
        self.low + self.bytes.len() as u64
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn byte(&self, addr: u64) -> Option<u8> {
        let off = addr.checked_sub(self.low)?;
        self.bytes.get(usize::try_from(off).ok()?).copied()
    }

    pub fn set_byte(&mut self, addr: u64, value: u8) -> Result<u8, IcError> {
        let off = addr
            .checked_sub(self.low)
            .and_then(|o| usize::try_from(o).ok())
            .filter(|&o| o < self.bytes.len())
            .ok_or(IcError::OutOfBounds { address: addr })?;
        Ok(std::mem::replace(&mut self.bytes[off], value))
    }

    /// Little-endian word of `word_size` bytes at `addr`.
    pub fn read_word(&self, addr: u64, word_size: u8) -> Result<u64, IcError> {
        let ws = usize::from(word_size);
        let off = addr
            .checked_sub(self.low)
            .and_then(|o| usize::try_from(o).ok())
            .filter(|&o| o.checked_add(ws).is_some_and(|end| end <= self.bytes.len()))
            .ok_or(IcError::OutOfBounds { address: addr })?;
        let mut buf = [0u8; 8];
        buf[..ws].copy_from_slice(&self.bytes[off..off + ws]);
        Ok(u64::from_le_bytes(buf))
    }

    /// Byte addresses where `self` differs from `other` (the compromised set
    /// relative to a golden image). Both images must share bounds.
    pub fn diff(&self, other: &MemoryImage) -> Vec<u64> {
        assert_eq!((self.low, self.bytes.len()), (other.low, other.bytes.len()));
        self.bytes
            .iter()
            .zip(&other.bytes)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| self.low + i as u64)
            .collect()
    }
}
