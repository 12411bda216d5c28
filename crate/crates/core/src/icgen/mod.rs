//! Diversified integrity-checking programs.
//!
//! A program is a bank of Galois LFSRs over irreducible feedback
//! polynomials, a random control tree choosing which registers run for each
//! address, and a nonlinear combiner feeding a `k`-bit accumulator.

mod address;
mod count;
mod lfsr;
mod program;
mod tree;
pub(crate) mod wire;

use thiserror::Error;

use crate::gf2::Gf2Error;

pub use address::{gen_address_list, AddressList, AddressTuple, MemoryImage, MAX_WORDS_PER_TUPLE};
pub use count::{
    catalan_prefix_sum, count_programs, discrepancy_report, DiscrepancyReport, HEADLINE_COUNT, MAX_EXACT_CAP,
};
pub use lfsr::{Lfsr, MAX_LFSR_WIDTH};
pub use program::{
    assemble_for_cost, assemble_program, fold, Combiner, Execution, IcProgram, ProgramShape, COST_LOOP,
    COST_PER_LFSR, COST_PER_NODE, PROLOGUE_SETUP,
};
pub use tree::{gen_control_tree, ControlTree, TreeNode, ADDRESS_BIT_RANGE, MAX_TREE_DEPTH};
pub use wire::{deserialize, deserialize_strict, serialize, PROGRAM_MAGIC, PROGRAM_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IcError {
    #[error("unsupported register width {0} (must be 1..=64)")]
    UnsupportedDegree(usize),
    #[error("malformed control tree: {0}")]
    MalformedTree(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("cannot cover {requested} bytes of a {region}-byte region")]
    InvalidCoverage { requested: u64, region: u64 },
    #[error("address {address:#x} is outside the memory image")]
    OutOfBounds { address: u64 },
    #[error("no program with per-iteration cost {0} found")]
    CostUnreachable(u64),
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("truncated at byte offset {offset}")]
    Truncated { offset: usize },
    #[error("CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Crc { stored: u32, computed: u32 },
    #[error("unknown combiner id {0}")]
    UnknownCombiner(u8),
    #[error("polynomial {index} is not irreducible")]
    Reducible { index: usize },
    #[error("{0} trailing bytes after CRC")]
    TrailingBytes(usize),
    #[error("node count {0} exceeds the limit")]
    TooLarge(u64),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}
