//! Polynomials over GF(2).
//!
//! Coefficients are packed little-endian into `u64` limbs: bit `i` of the
//! packed value is the coefficient of `x^i`. The packed form is kept
//! normalized (no trailing zero limbs), so the zero polynomial is the empty
//! limb vector and equality is plain structural equality.
//!
//! Besides ring arithmetic this module carries the Ben-Or irreducibility
//! test, random irreducible generation, and the necklace count of monic
//! irreducible polynomials of a given degree.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("modulus must have degree >= 1")]
    InvalidModulus,
    #[error("gcd(0, 0) is undefined")]
    ZeroGcd,
    #[error("irreducibility is undefined for constant polynomials")]
    ConstantPolynomial,
    #[error("degree must be >= 1")]
    ZeroDegree,
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Gf2Poly {
    limbs: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { limbs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_u64(1)
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::from_u64(2)
    }

    pub fn from_u64(bits: u64) -> Self {
        let mut p = Self { limbs: vec![bits] };
        p.normalize();
        p
    }

    pub fn from_u128(bits: u128) -> Self {
        let mut p = Self {
            limbs: vec![bits as u64, (bits >> 64) as u64],
        };
        p.normalize();
        p
    }

    pub fn from_limbs(limbs: Vec<u64>) -> Self {
        let mut p = Self { limbs };
        p.normalize();
        p
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut limbs = vec![0u64; k / 64 + 1];
        limbs[k / 64] = 1 << (k % 64);
        Self { limbs }
    }

    /// Builds a polynomial from its little-endian byte encoding.
    pub fn from_le_bytes(bytes: &[u8]) -> Self {
        let mut limbs = vec![0u64; bytes.len().div_ceil(8)];
        for (i, b) in bytes.iter().enumerate() {
            limbs[i / 8] |= u64::from(*b) << (8 * (i % 8));
        }
        Self::from_limbs(limbs)
    }

    /// Little-endian byte encoding padded (or truncated) to `len` bytes.
    pub fn to_le_bytes(&self, len: usize) -> Vec<u8> {
        (0..len)
            .map(|i| {
                self.limbs
                    .get(i / 8)
                    .map_or(0, |limb| (limb >> (8 * (i % 8))) as u8)
            })
            .collect()
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Packed coefficients if the polynomial fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.limbs.len() {
            0 => Some(0),
            1 => Some(self.limbs[0]),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.limbs.len() == 1 && self.limbs[0] == 1
    }

    /// Index of the highest set coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let top = *self.limbs.last()?;
        Some((self.limbs.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.limbs
            .get(i / 64)
            .is_some_and(|limb| (limb >> (i % 64)) & 1 == 1)
    }

    pub fn weight(&self) -> u32 {
        self.limbs.iter().map(|l| l.count_ones()).sum()
    }

    fn normalize(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (long, short) = if self.limbs.len() >= other.limbs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut limbs = long.limbs.clone();
        for (dst, src) in limbs.iter_mut().zip(&short.limbs) {
            *dst ^= src;
        }
        Self::from_limbs(limbs)
    }

    /// Carry-less product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u64; self.limbs.len() + other.limbs.len()];
        for (i, &a) in self.limbs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.limbs.iter().enumerate() {
                let prod = clmul(a, b);
                out[i + j] ^= prod as u64;
                out[i + j + 1] ^= (prod >> 64) as u64;
            }
        }
        Self::from_limbs(out)
    }

    pub fn square(&self) -> Self {
        let mut out = vec![0u64; self.limbs.len() * 2];
        for (i, &limb) in self.limbs.iter().enumerate() {
            out[2 * i] = spread_bits(limb as u32);
            out[2 * i + 1] = spread_bits((limb >> 32) as u32);
        }
        Self::from_limbs(out)
    }

    /// Quotient and remainder of long division by `divisor`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self), Gf2Error> {
        let dd = divisor.degree().ok_or(Gf2Error::InvalidModulus)?;
        let mut rem = self.limbs.clone();
        let mut quot = vec![0u64; self.limbs.len()];
        let mut top = match self.degree() {
            Some(d) => d,
            None => return Ok((Self::zero(), Self::zero())),
        };
        while top >= dd {
            if (rem[top / 64] >> (top % 64)) & 1 == 1 {
                let shift = top - dd;
                quot[shift / 64] |= 1 << (shift % 64);
                xor_shifted(&mut rem, &divisor.limbs, shift);
            }
            if top == 0 {
                break;
            }
            top -= 1;
        }
        Ok((Self::from_limbs(quot), Self::from_limbs(rem)))
    }

    pub fn rem(&self, modulus: &Self) -> Result<Self, Gf2Error> {
        let dm = modulus.degree().ok_or(Gf2Error::InvalidModulus)?;
        match self.degree() {
            Some(d) if d >= dm => {}
            _ => return Ok(self.clone()),
        }
        let mut rem = self.limbs.clone();
        let mut top = self.degree().unwrap_or(0);
        while top >= dm {
            if (rem[top / 64] >> (top % 64)) & 1 == 1 {
                xor_shifted(&mut rem, &modulus.limbs, top - dm);
            }
            if top == 0 {
                break;
            }
            top -= 1;
        }
        Ok(Self::from_limbs(rem))
    }

    /// Renders as a hex string of the packed coefficients, most significant
    /// nibble first.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, limb) in self.limbs.iter().rev().enumerate() {
            if i == 0 {
                s.push_str(&format!("{limb:x}"));
            } else {
                s.push_str(&format!("{limb:016x}"));
            }
        }
        s
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly(0x{})", self.to_hex())
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(deg) = self.degree() else {
            return f.write_str("0");
        };
        let mut first = true;
        for i in (0..=deg).rev().filter(|&i| self.coeff(i)) {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => f.write_str("1")?,
                1 => f.write_str("x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    let wide = u128::from(a);
    let mut b = b;
    while b != 0 {
        let i = b.trailing_zeros();
        acc ^= wide << i;
        b &= b - 1;
    }
    acc
}

/// Interleaves zeros between the bits of `v` (squaring in GF(2)[x]).
fn spread_bits(v: u32) -> u64 {
    let mut x = u64::from(v);
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

/// `dst ^= src << shift`, where `dst` is long enough to hold the result.
fn xor_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let limb_shift = shift / 64;
    let bit_shift = shift % 64;
    for (i, &s) in src.iter().enumerate() {
        let lo = i + limb_shift;
        if bit_shift == 0 {
            dst[lo] ^= s;
        } else {
            dst[lo] ^= s << bit_shift;
            let hi = s >> (64 - bit_shift);
            if hi != 0 {
                dst[lo + 1] ^= hi;
            }
        }
    }
}

/// `(a * b) mod p`.
pub fn poly_mul_mod(a: &Gf2Poly, b: &Gf2Poly, p: &Gf2Poly) -> Result<Gf2Poly, Gf2Error> {
    check_modulus(p)?;
    a.mul(b).rem(p)
}

fn check_modulus(p: &Gf2Poly) -> Result<usize, Gf2Error> {
    match p.degree() {
        Some(d) if d >= 1 => Ok(d),
        _ => Err(Gf2Error::InvalidModulus),
    }
}

/// `x^(2^i) mod p`, by `i` successive squarings of `x mod p`.
pub fn frobenius_power(p: &Gf2Poly, i: u32) -> Result<Gf2Poly, Gf2Error> {
    check_modulus(p)?;
    let mut r = Gf2Poly::x().rem(p)?;
    for _ in 0..i {
        r = r.square().rem(p)?;
    }
    Ok(r)
}

/// Monic gcd by Euclid's algorithm.
pub fn poly_gcd(a: &Gf2Poly, b: &Gf2Poly) -> Result<Gf2Poly, Gf2Error> {
    if a.is_zero() && b.is_zero() {
        return Err(Gf2Error::ZeroGcd);
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.rem(&b)?;
        a = b;
        b = r;
    }
    Ok(a)
}

/// Ben-Or test: `p` of degree `n` is irreducible iff
/// `gcd(p, x^(2^i) - x mod p) = 1` for every `1 <= i <= n/2`.
pub fn is_irreducible(p: &Gf2Poly) -> Result<bool, Gf2Error> {
    let n = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Gf2Error::ConstantPolynomial),
    };
    let x = Gf2Poly::x().rem(p)?;
    let mut frob = x.clone();
    for _ in 1..=n / 2 {
        frob = frob.square().rem(p)?;
        let g = poly_gcd(p, &frob.add(&x))?;
        if !g.is_one() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Samples uniformly among degree-`d` polynomials until one passes the
/// Ben-Or test. Deterministic for a given random source state.
pub fn random_irreducible<R: RngCore + ?Sized>(d: usize, rng: &mut R) -> Result<Gf2Poly, Gf2Error> {
    if d == 0 {
        return Err(Gf2Error::ZeroDegree);
    }
    loop {
        let p = random_with_degree(d, rng);
        if is_irreducible(&p)? {
            return Ok(p);
        }
    }
}

/// Uniform random polynomial of degree exactly `d`.
pub fn random_with_degree<R: RngCore + ?Sized>(d: usize, rng: &mut R) -> Gf2Poly {
    let n_limbs = d / 64 + 1;
    let mut limbs: Vec<u64> = (0..n_limbs).map(|_| rng.next_u64()).collect();
    let top_bits = d % 64;
    let last = limbs.last_mut().expect("at least one limb");
    *last &= if top_bits == 0 { 0 } else { (1u64 << top_bits) - 1 };
    *last |= 1 << top_bits;
    Gf2Poly::from_limbs(limbs)
}

/// Möbius function by trial factorization.
pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1);
    let mut n = n;
    let mut sign = 1i8;
    let mut f = 2u64;
    while f * f <= n {
        if n % f == 0 {
            n /= f;
            if n % f == 0 {
                return 0;
            }
            sign = -sign;
        }
        f += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Number of monic irreducible degree-`d` polynomials over GF(2):
/// `(1/d) * sum_{k | d} mu(k) * 2^(d/k)`.
pub fn count_irreducible(d: u64) -> Result<BigUint, Gf2Error> {
    if d == 0 {
        return Err(Gf2Error::ZeroDegree);
    }
    let mut sum = BigInt::zero();
    for k in (1..=d).filter(|k| d % k == 0) {
        let term = BigInt::one() << (d / k);
        match mobius(k) {
            1 => sum += term,
            -1 => sum -= term,
            _ => {}
        }
    }
    let count = sum / BigInt::from(d);
    Ok(count.to_biguint().expect("necklace count is non-negative"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(bits: u64) -> Gf2Poly {
        Gf2Poly::from_u64(bits)
    }

    #[test]
    fn mul_mod_examples() {
        // x * x mod (x^2 + x + 1) = x + 1
        assert_eq!(poly_mul_mod(&p(0b10), &p(0b10), &p(0b111)).unwrap(), p(0b11));
        let q = p(0b1011);
        assert_eq!(poly_mul_mod(&Gf2Poly::one(), &q, &p(0b10011)).unwrap(), q);
        assert_eq!(poly_mul_mod(&Gf2Poly::zero(), &q, &p(0b10011)).unwrap(), Gf2Poly::zero());
    }

    #[test]
    fn mul_mod_rejects_constant_modulus() {
        assert_eq!(poly_mul_mod(&p(3), &p(3), &p(1)), Err(Gf2Error::InvalidModulus));
        assert_eq!(poly_mul_mod(&p(3), &p(3), &Gf2Poly::zero()), Err(Gf2Error::InvalidModulus));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_power(&p(0b111), 2).unwrap(), p(0b10));
        assert_eq!(frobenius_power(&p(0b111), 0).unwrap(), p(0b10));
        assert_eq!(frobenius_power(&p(0b11), 0).unwrap(), p(1));
        assert_eq!(frobenius_power(&p(0b101), 1).unwrap(), p(1));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(poly_gcd(&p(0b101), &p(0b11)).unwrap(), p(0b11));
        assert_eq!(poly_gcd(&p(0b1011), &Gf2Poly::zero()).unwrap(), p(0b1011));
        assert_eq!(poly_gcd(&p(0b111), &p(0b10)).unwrap(), Gf2Poly::one());
        assert_eq!(poly_gcd(&Gf2Poly::zero(), &Gf2Poly::zero()), Err(Gf2Error::ZeroGcd));
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&p(0b111)).unwrap());
        assert!(!is_irreducible(&p(0b101)).unwrap());
        assert!(is_irreducible(&p(0b10)).unwrap());
        assert!(is_irreducible(&p(0b11)).unwrap());
        assert_eq!(is_irreducible(&p(1)), Err(Gf2Error::ConstantPolynomial));
        let deg5 = (32u64..64).filter(|&b| is_irreducible(&p(b)).unwrap()).count();
        assert_eq!(deg5, 6);
    }

    #[test]
    fn known_large_irreducibles() {
        // x^64 + x^4 + x^3 + x + 1 and x^128 + x^7 + x^2 + x + 1
        let p64 = Gf2Poly::from_u128((1u128 << 64) | 0b11011);
        assert!(is_irreducible(&p64).unwrap());
        let p128 = Gf2Poly::from_limbs(vec![0b1000_0111, 0, 1]);
        assert_eq!(p128.degree(), Some(128));
        assert!(is_irreducible(&p128).unwrap());
        assert!(!is_irreducible(&p128.mul(&p(0b111))).unwrap());
    }

    #[test]
    fn random_irreducible_low_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let q = random_irreducible(1, &mut rng).unwrap();
            assert!(q == p(0b10) || q == p(0b11));
        }
        assert_eq!(random_irreducible(0, &mut rng), Err(Gf2Error::ZeroDegree));
    }

    #[test]
    fn necklace_counts() {
        let expect = [2u32, 1, 2, 3, 6, 9, 18, 30, 56, 99];
        for (d, e) in (1..=10).zip(expect) {
            assert_eq!(count_irreducible(d).unwrap(), BigUint::from(e), "d={d}");
        }
        assert_eq!(count_irreducible(0), Err(Gf2Error::ZeroDegree));
    }

    #[test]
    fn mobius_values() {
        let expect = [1i8, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (n, e) in (1..=12).zip(expect) {
            assert_eq!(mobius(n), e, "n={n}");
        }
    }

    #[test]
    fn byte_encoding() {
        let q = p(123);
        assert_eq!(q.to_string(), "x^6 + x^5 + x^4 + x^3 + x + 1");
        assert_eq!(q.to_le_bytes(2), vec![123, 0]);
        assert_eq!(Gf2Poly::from_le_bytes(&[123, 0, 0]), q);
        let wide = Gf2Poly::monomial(70).add(&Gf2Poly::one());
        assert_eq!(Gf2Poly::from_le_bytes(&wide.to_le_bytes(9)), wide);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = Gf2Poly::from_u128(0xdead_beef_1234_5678_9abc_def0_1111_2222);
        let b = p(0x1_0000_001b);
        let (q, r) = a.div_rem(&b).unwrap();
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }
}
