//! Challenge and response messages.
//!
//! Challenge: `"PACH"`, version `u8`, nonce `u64`, tuple count `u16`, tuples
//! `{base u64, words u16}`, program blob, CRC-32. Response: `"PARS"`, version
//! `u8`, hash length `u8`, hash bytes, CRC-32. Little-endian throughout.

use crate::icgen::wire::{parse, Reader};
use crate::icgen::{serialize, AddressList, AddressTuple, IcError, IcProgram};

use super::ProtocolError;

pub const CHALLENGE_MAGIC: [u8; 4] = *b"PACH";
pub const RESPONSE_MAGIC: [u8; 4] = *b"PARS";
pub const WIRE_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    pub program: IcProgram,
    pub addresses: AddressList,
    pub nonce: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    /// Little-endian accumulator bytes.
    pub hash: Vec<u8>,
}

impl Challenge {
    pub fn to_bytes(&self) -> Result<Vec<u8>, ProtocolError> {
        let count = u16::try_from(self.addresses.tuples.len()).map_err(|_| ProtocolError::TooManyTuples)?;
        let mut out = Vec::new();
        out.extend_from_slice(&CHALLENGE_MAGIC);
        out.push(WIRE_VERSION);
        out.extend_from_slice(&self.nonce.to_le_bytes());
        out.extend_from_slice(&count.to_le_bytes());
        for t in &self.addresses.tuples {
            out.extend_from_slice(&t.base.to_le_bytes());
            out.extend_from_slice(&t.words.to_le_bytes());
        }
        out.extend_from_slice(&serialize(&self.program));
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        Ok(out)
    }

    /// Parses a challenge; the embedded program is checked strictly (every
    /// polynomial irreducible).
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let body = check_frame(bytes, CHALLENGE_MAGIC)?;
        let mut r = Reader { bytes: body, pos: 5 };
        let nonce = r.u64()?;
        let count = r.u16()?;
        let mut tuples = Vec::with_capacity(usize::from(count));
        for _ in 0..count {
            let base = r.u64()?;
            let words = r.u16()?;
            tuples.push(AddressTuple { base, words });
        }
        let (program, used) = parse(&body[r.pos..], true)?;
        if r.pos + used != body.len() {
            return Err(ProtocolError::TrailingBytes(body.len() - r.pos - used));
        }
        let addresses = AddressList::new(tuples, program.word_size())?;
        Ok(Self { program, addresses, nonce })
    }
}

impl Response {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.hash.len());
        out.extend_from_slice(&RESPONSE_MAGIC);
        out.push(WIRE_VERSION);
        out.push(self.hash.len() as u8);
        out.extend_from_slice(&self.hash);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let body = check_frame(bytes, RESPONSE_MAGIC)?;
        let mut r = Reader { bytes: body, pos: 5 };
        let len = usize::from(r.u8()?);
        let hash = r.take(len)?.to_vec();
        if r.pos != body.len() {
            return Err(ProtocolError::TrailingBytes(body.len() - r.pos));
        }
        Ok(Self { hash })
    }
}

/// Checks magic, version and trailing CRC; returns the bytes the CRC covers.
fn check_frame(bytes: &[u8], magic: [u8; 4]) -> Result<&[u8], ProtocolError> {
    if bytes.len() < 4 {
        return Err(IcError::Truncated { offset: bytes.len() }.into());
    }
    if bytes[..4] != magic {
        return Err(ProtocolError::BadMagic);
    }
    if bytes.len() < 9 {
        return Err(IcError::Truncated { offset: bytes.len() }.into());
    }
    if bytes[4] != WIRE_VERSION {
        return Err(ProtocolError::BadVersion(bytes[4]));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(ProtocolError::Crc { stored, computed });
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icgen::{assemble_program, gen_address_list, ProgramShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn challenge(seed: u64) -> Challenge {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = ProgramShape { degree: 31, depth: 4, lfsr_count: 3, accumulator_bits: 64, word_size: 4 };
        let program = assemble_program(shape, &mut rng).unwrap();
        let addresses = gen_address_list(256, 0, 1 << 20, 4, &mut rng).unwrap();
        Challenge { program, addresses, nonce: seed.wrapping_mul(77) }
    }

    #[test]
    fn challenge_round_trip() {
        for seed in 0..50 {
            let c = challenge(seed);
            let bytes = c.to_bytes().unwrap();
            assert_eq!(Challenge::from_bytes(&bytes).unwrap(), c);
        }
    }

    #[test]
    fn response_round_trip() {
        let r = Response { hash: (0..8).collect() };
        assert_eq!(Response::from_bytes(&r.to_bytes()).unwrap(), r);
    }

    #[test]
    fn every_bit_flip_is_rejected() {
        let bytes = challenge(1).to_bytes().unwrap();
        for i in 0..bytes.len() {
            for bit in [0, 3, 7] {
                let mut bad = bytes.clone();
                bad[i] ^= 1 << bit;
                assert!(Challenge::from_bytes(&bad).is_err(), "byte {i} bit {bit}");
            }
        }
        let resp = Response { hash: vec![1, 2, 3, 4] }.to_bytes();
        for i in 0..resp.len() {
            let mut bad = resp.clone();
            bad[i] ^= 0x10;
            assert!(Response::from_bytes(&bad).is_err());
        }
    }

    #[test]
    fn truncations_are_rejected() {
        let bytes = challenge(2).to_bytes().unwrap();
        for len in 0..bytes.len() {
            assert!(Challenge::from_bytes(&bytes[..len]).is_err());
        }
    }
}
