//! Galois linear-feedback shift registers.
//!
//! The register holds a residue modulo the feedback polynomial `p`. Each
//! clock emits the low bit, shifts right and, when the emitted bit was set,
//! XORs the taps `p >> 1` back in. That is multiplication by `x^-1` modulo
//! `p`, so for irreducible `p` with a constant term the state period is the
//! multiplicative order of `x`, which divides `2^d - 1`.

use crate::gf2::Gf2Poly;

use super::IcError;

/// Widest register supported by the interpreter.
pub const MAX_LFSR_WIDTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lfsr {
    taps: u64,
    width: u32,
    mask: u64,
    register: u64,
}

impl Lfsr {
    /// Builds a register for `poly` (degree `1..=64`). A zero seed is
    /// replaced by `1`.
    pub fn new(poly: &Gf2Poly, seed: u64) -> Result<Self, IcError> {
        let width = match poly.degree() {
            Some(d) if (1..=MAX_LFSR_WIDTH).contains(&d) => d as u32,
            _ => return Err(IcError::UnsupportedDegree(poly.degree().unwrap_or(0))),
        };
        let limbs = poly.limbs();
        let low = limbs[0];
        let high = limbs.get(1).copied().unwrap_or(0);
        let taps = (low >> 1) | (high << 63);
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        let mut lfsr = Self {
            taps,
            width,
            mask,
            register: 0,
        };
        lfsr.reseed(seed);
        Ok(lfsr)
    }

    pub fn reseed(&mut self, seed: u64) {
        self.register = seed & self.mask;
        if self.register == 0 {
            self.register = 1;
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn register(&self) -> u64 {
        self.register
    }

    pub fn clock(&mut self) -> bool {
        let out = self.register & 1 == 1;
        self.register >>= 1;
        if out {
            self.register ^= self.taps;
        }
        out
    }

    /// Clocks `k` times (`k <= 128`); output bit `j` lands in bit `j`.
    pub fn output_bits(&mut self, k: u32) -> u128 {
        debug_assert!(k <= 128);
        let mut v = 0u128;
        for j in 0..k {
            if self.clock() {
                v |= 1 << j;
            }
        }
        v
    }

    /// XORs `v` (reduced to the register width) into the state, keeping the
    /// register non-zero.
    pub fn absorb(&mut self, v: u64) {
        self.register ^= v & self.mask;
        if self.register == 0 {
            self.register = 1;
        }
    }

    /// Number of clocks until the state first repeats. Intended for small
    /// widths.
    pub fn period(&self) -> u64 {
        let mut probe = self.clone();
        let start = probe.register;
        let mut n = 0u64;
        loop {
            probe.clock();
            n += 1;
            if probe.register == start {
                return n;
            }
        }
    }
}
