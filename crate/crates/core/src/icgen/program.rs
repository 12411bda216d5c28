//! Integrity-checking programs and their interpreter.

use rand::RngCore;

use super::address::{check_word_size, AddressList, MemoryImage};
use super::lfsr::{Lfsr, MAX_LFSR_WIDTH};
use super::tree::{gen_control_tree, ControlTree, MAX_TREE_DEPTH};
use super::IcError;
use crate::gf2::{random_irreducible, Gf2Poly};

/// Seeding multiplier for register `j`: `(j + 1) * SEED_STRIDE`.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Instructions charged per visited tree node.
pub const COST_PER_NODE: f64 = 2.0;
/// Instructions charged per enabled LFSR.
pub const COST_PER_LFSR: f64 = 3.0;
/// Fixed loop overhead per iteration (load, accumulate, branch).
pub const COST_LOOP: f64 = 5.0;
/// Setup instructions before the first iteration, on top of the
/// nonce-absorbing iteration.
pub const PROLOGUE_SETUP: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Combiner {
    /// XOR over cyclically adjacent pairwise ANDs of the register outputs.
    AdjacentAnd = 1,
}

impl Combiner {
    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Self::AdjacentAnd),
            _ => None,
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    fn combine(self, outputs: &[u128]) -> u128 {
        match self {
            Self::AdjacentAnd => match outputs {
                [] => 0,
                [only] => *only,
                [a, b] => a & b,
                _ => {
                    let r = outputs.len();
                    (0..r).fold(0, |z, j| z ^ (outputs[j] & outputs[(j + 1) % r]))
                }
            },
        }
    }
}

/// Shape parameters for a freshly assembled program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgramShape {
    /// Degree of every feedback polynomial (register width).
    pub degree: usize,
    /// Maximum control tree depth.
    pub depth: u32,
    pub lfsr_count: usize,
    /// Accumulator width in bits, a multiple of 8 in `8..=128`.
    pub accumulator_bits: u32,
    /// Bytes per memory word, 4 or 8.
    pub word_size: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcProgram {
    degree: usize,
    polys: Vec<Gf2Poly>,
    tree: ControlTree,
    accumulator_bits: u32,
    word_size: u8,
    combiner: Combiner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Execution {
    /// Accumulator value; only the low `accumulator_bits` are meaningful.
    pub hash: u128,
    pub instruction_count: u64,
}

impl IcProgram {
    pub fn new(
        polys: Vec<Gf2Poly>,
        tree: ControlTree,
        accumulator_bits: u32,
        word_size: u8,
        combiner: Combiner,
    ) -> Result<Self, IcError> {
        check_word_size(word_size)?;
        check_accumulator(accumulator_bits)?;
        let degree = polys
            .first()
            .and_then(Gf2Poly::degree)
            .ok_or(IcError::InvalidParameter("program needs at least one polynomial"))?;
        if degree > MAX_LFSR_WIDTH {
            return Err(IcError::UnsupportedDegree(degree));
        }
        if polys.len() > 255 {
            return Err(IcError::InvalidParameter("at most 255 registers"));
        }
        if polys.iter().any(|p| p.degree() != Some(degree)) {
            return Err(IcError::InvalidParameter("all polynomials must share one degree"));
        }
        if tree.nodes().iter().any(|n| usize::from(n.lfsr_index) >= polys.len()) {
            return Err(IcError::MalformedTree("lfsr index out of range"));
        }
        Ok(Self {
            degree,
            polys,
            tree,
            accumulator_bits,
            word_size,
            combiner,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn polys(&self) -> &[Gf2Poly] {
        &self.polys
    }

    pub fn tree(&self) -> &ControlTree {
        &self.tree
    }

    pub fn accumulator_bits(&self) -> u32 {
        self.accumulator_bits
    }

    pub fn hash_len(&self) -> usize {
        (self.accumulator_bits / 8) as usize
    }

    pub fn word_size(&self) -> u8 {
        self.word_size
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    /// Per-iteration instruction cost:
    /// `2 * E[nodes visited] + 3 * E[distinct LFSRs enabled] + 5`, rounded.
    pub fn instructions_per_iteration(&self) -> u64 {
        let (path, enabled) = self.tree.walk_expectations();
        (COST_PER_NODE * path + COST_PER_LFSR * enabled + COST_LOOP).round() as u64
    }

    pub fn prologue_instructions(&self) -> u64 {
        self.instructions_per_iteration() + PROLOGUE_SETUP
    }

    /// Runs the program over `memory` at the expanded `addresses` with nonce
    /// `nonce`.
    ///
    /// Each register `j` starts at the low bits of
    /// `nonce ^ (j + 1) * 0x9E3779B97F4A7C15`. The accumulator starts at the
    /// nonce and absorbs it once more through a full update with address 0.
    /// Every word then walks the control tree, clocks each enabled register
    /// `k` times, combines the outputs and folds word and address into the
    /// accumulator; enabled registers absorb the word afterwards.
    pub fn execute(
        &self,
        memory: &MemoryImage,
        addresses: &AddressList,
        nonce: u64,
    ) -> Result<Execution, IcError> {
        if addresses.word_size != self.word_size {
            return Err(IcError::InvalidParameter("address list word size differs from program"));
        }
        let mut state = HashState::new(self, nonce)?;
        state.update(self, 0, nonce);
        let mut words = 0u64;
        for addr in addresses.expand() {
            let x = memory.read_word(addr, self.word_size)?;
            state.update(self, addr, x);
            words += 1;
        }
        Ok(Execution {
            hash: state.acc,
            instruction_count: words * self.instructions_per_iteration() + self.prologue_instructions(),
        })
    }

    /// Little-endian accumulator bytes as sent in a response.
    pub fn hash_bytes(&self, hash: u128) -> Vec<u8> {
        hash.to_le_bytes()[..self.hash_len()].to_vec()
    }
}

fn check_accumulator(bits: u32) -> Result<(), IcError> {
    if bits == 0 || bits > 128 || bits % 8 != 0 {
        return Err(IcError::InvalidParameter("accumulator width must be a multiple of 8 in 8..=128"));
    }
    Ok(())
}

struct HashState {
    lfsrs: Vec<Lfsr>,
    acc: u128,
    outputs: Vec<u128>,
    enabled: [u64; 4],
    mask: u128,
    k: u32,
}

impl HashState {
    fn new(program: &IcProgram, nonce: u64) -> Result<Self, IcError> {
        let lfsrs = program
            .polys
            .iter()
            .enumerate()
            .map(|(j, p)| Lfsr::new(p, nonce ^ (j as u64 + 1).wrapping_mul(SEED_STRIDE)))
            .collect::<Result<Vec<_>, _>>()?;
        let k = program.accumulator_bits;
        let mask = if k == 128 { u128::MAX } else { (1u128 << k) - 1 };
        Ok(Self {
            lfsrs,
            acc: u128::from(nonce) & mask,
            outputs: Vec::with_capacity(program.polys.len()),
            enabled: [0; 4],
            mask,
            k,
        })
    }

    fn update(&mut self, program: &IcProgram, addr: u64, x: u64) {
        self.enabled = [0; 4];
        let enabled = &mut self.enabled;
        program.tree.walk(addr, |i| enabled[usize::from(i / 64)] |= 1 << (i % 64));

        self.outputs.clear();
        for j in enabled_indices(&self.enabled) {
            self.outputs.push(self.lfsrs[j].output_bits(self.k));
        }
        let z = program.combiner.combine(&self.outputs);
        let rotated = ((self.acc << 1) | (self.acc >> (self.k - 1))) & self.mask;
        self.acc = rotated ^ z ^ fold(x, self.k) ^ fold(addr, self.k);

        let feedback = fold(x, program.degree as u32) as u64;
        for j in enabled_indices(&self.enabled) {
            self.lfsrs[j].absorb(feedback);
        }
    }
}

fn enabled_indices(set: &[u64; 4]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let i = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(w * 64 + i)
        })
    })
}

/// XOR-folds a 64-bit value into `bits` bits.
pub fn fold(v: u64, bits: u32) -> u128 {
    if bits >= 64 {
        return u128::from(v);
    }
    let mask = (1u64 << bits) - 1;
    let mut v = v;
    let mut out = 0u64;
    while v != 0 {
        out ^= v & mask;
        v >>= bits;
    }
    u128::from(out)
}

/// Generates `shape.lfsr_count` fresh irreducible polynomials and a fresh
/// control tree.
pub fn assemble_program<R: RngCore + ?Sized>(shape: ProgramShape, rng: &mut R) -> Result<IcProgram, IcError> {
    check_shape(&shape)?;
    let tree = gen_control_tree(shape.depth, shape.lfsr_count, rng)?;
    finish(shape, tree, rng)
}

/// Sizing search for a program whose per-iteration cost equals
/// `target_cost`: sweeps depth and register count, drawing one tree per
/// combination, for up to `MAX_SIZING_ROUNDS` rounds.
pub fn assemble_for_cost<R: RngCore + ?Sized>(
    degree: usize,
    target_cost: u64,
    accumulator_bits: u32,
    word_size: u8,
    rng: &mut R,
) -> Result<IcProgram, IcError> {
    const MAX_SIZING_ROUNDS: usize = 64;
    const MAX_SIZING_LFSRS: usize = 16;
    for _ in 0..MAX_SIZING_ROUNDS {
        for depth in 1..=MAX_TREE_DEPTH {
            for lfsr_count in 1..=MAX_SIZING_LFSRS {
                let tree = gen_control_tree(depth, lfsr_count, rng)?;
                let (path, enabled) = tree.walk_expectations();
                let cost = (COST_PER_NODE * path + COST_PER_LFSR * enabled + COST_LOOP).round() as u64;
                if cost == target_cost {
                    let shape = ProgramShape {
                        degree,
                        depth,
                        lfsr_count,
                        accumulator_bits,
                        word_size,
                    };
                    check_shape(&shape)?;
                    return finish(shape, tree, rng);
                }
            }
        }
    }
    Err(IcError::CostUnreachable(target_cost))
}

fn check_shape(shape: &ProgramShape) -> Result<(), IcError> {
    if shape.degree == 0 || shape.degree > MAX_LFSR_WIDTH {
        return Err(IcError::UnsupportedDegree(shape.degree));
    }
    check_word_size(shape.word_size)?;
    check_accumulator(shape.accumulator_bits)
}

fn finish<R: RngCore + ?Sized>(shape: ProgramShape, tree: ControlTree, rng: &mut R) -> Result<IcProgram, IcError> {
    let polys = (0..shape.lfsr_count)
        .map(|_| random_irreducible(shape.degree, rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(IcError::Gf2)?;
    IcProgram::new(polys, tree, shape.accumulator_bits, shape.word_size, Combiner::AdjacentAnd)
}
