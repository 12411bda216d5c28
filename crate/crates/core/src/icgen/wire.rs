//! Binary program format.
//!
//! Little-endian: `"ICPG"`, version `u8`, degree `u16`, register count `u8`,
//! accumulator width `u8` (bits), word size `u8`, combiner id `u8`, the
//! polynomials at `ceil((d + 1) / 8)` bytes each, node count `u16`, preorder
//! node records `{lfsr u8, addr_bit u8, flags u8}` (bit 0 has-left, bit 1
//! has-right), then CRC-32 over everything before it.

use super::program::{Combiner, IcProgram};
use super::tree::{ControlTree, TreeNode};
use super::IcError;
use crate::gf2::{is_irreducible, Gf2Poly};

pub const PROGRAM_MAGIC: [u8; 4] = *b"ICPG";
pub const PROGRAM_VERSION: u8 = 1;

const FLAG_LEFT: u8 = 1;
const FLAG_RIGHT: u8 = 2;

pub fn serialize(program: &IcProgram) -> Vec<u8> {
    let d = program.degree();
    let poly_len = (d + 1).div_ceil(8);
    let nodes = program.tree().nodes();
    let mut out = Vec::with_capacity(15 + poly_len * program.polys().len() + 3 * nodes.len());
    out.extend_from_slice(&PROGRAM_MAGIC);
    out.push(PROGRAM_VERSION);
    out.extend_from_slice(&(d as u16).to_le_bytes());
    out.push(program.polys().len() as u8);
    out.push(program.accumulator_bits() as u8);
    out.push(program.word_size());
    out.push(program.combiner().id());
    for p in program.polys() {
        out.extend_from_slice(&p.to_le_bytes(poly_len));
    }
    out.extend_from_slice(&(nodes.len() as u16).to_le_bytes());
    for n in nodes {
        let flags = (u8::from(n.left.is_some()) * FLAG_LEFT) | (u8::from(n.right.is_some()) * FLAG_RIGHT);
        out.extend_from_slice(&[n.lfsr_index, n.addr_bit, flags]);
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parses a complete program blob. Trailing bytes are rejected.
pub fn deserialize(bytes: &[u8]) -> Result<IcProgram, IcError> {
    let (program, used) = parse(bytes, false)?;
    if used != bytes.len() {
        return Err(IcError::TrailingBytes(bytes.len() - used));
    }
    Ok(program)
}

/// Like [`deserialize`], additionally requiring every polynomial to be
/// irreducible.
pub fn deserialize_strict(bytes: &[u8]) -> Result<IcProgram, IcError> {
    let (program, used) = parse(bytes, true)?;
    if used != bytes.len() {
        return Err(IcError::TrailingBytes(bytes.len() - used));
    }
    Ok(program)
}

/// Parses a program from the front of `bytes`, returning it and the number
/// of bytes consumed.
pub(crate) fn parse(bytes: &[u8], strict: bool) -> Result<(IcProgram, usize), IcError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != PROGRAM_MAGIC {
        return Err(IcError::BadMagic);
    }
    let version = r.u8()?;
    if version != PROGRAM_VERSION {
        return Err(IcError::BadVersion(version));
    }
    let d = usize::from(r.u16()?);
    let count = usize::from(r.u8()?);
    let acc = u32::from(r.u8()?);
    let word_size = r.u8()?;
    let combiner_id = r.u8()?;
    let poly_len = (d + 1).div_ceil(8);
    let mut raw_polys = Vec::with_capacity(count);
    for _ in 0..count {
        raw_polys.push(r.take(poly_len)?);
    }
    let node_count = usize::from(r.u16()?);
    let mut records = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let rec = r.take(3)?;
        records.push((rec[0], rec[1], rec[2]));
    }
    let body_end = r.pos;
    let stored = r.u32()?;
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(IcError::Crc { stored, computed });
    }

    let combiner = Combiner::from_id(combiner_id).ok_or(IcError::UnknownCombiner(combiner_id))?;
    let polys: Vec<Gf2Poly> = raw_polys.into_iter().map(Gf2Poly::from_le_bytes).collect();
    if strict {
        for (index, p) in polys.iter().enumerate() {
            if p.degree().unwrap_or(0) == 0 || !is_irreducible(p)? {
                return Err(IcError::Reducible { index });
            }
        }
    }
    if polys.iter().any(|p| p.degree() != Some(d)) {
        return Err(IcError::InvalidParameter("polynomial degree differs from header"));
    }
    let nodes = link_preorder(&records)?;
    let tree = ControlTree::from_nodes(nodes, count)?;
    let program = IcProgram::new(polys, tree, acc, word_size, combiner)?;
    Ok((program, r.pos))
}

/// Rebuilds child links from preorder records and their child flags.
fn link_preorder(records: &[(u8, u8, u8)]) -> Result<Vec<TreeNode>, IcError> {
    if records.is_empty() {
        return Err(IcError::MalformedTree("empty tree"));
    }
    let mut nodes: Vec<TreeNode> = records
        .iter()
        .map(|&(lfsr_index, addr_bit, _)| TreeNode {
            lfsr_index,
            addr_bit,
            left: None,
            right: None,
        })
        .collect();
    let mut next = 1usize;
    fn visit(
        id: usize,
        records: &[(u8, u8, u8)],
        nodes: &mut [TreeNode],
        next: &mut usize,
        level: u32,
    ) -> Result<(), IcError> {
        if level > 64 {
            return Err(IcError::MalformedTree("tree too deep"));
        }
        let flags = records[id].2;
        if flags & !(FLAG_LEFT | FLAG_RIGHT) != 0 {
            return Err(IcError::MalformedTree("unknown node flags"));
        }
        for (flag, is_left) in [(FLAG_LEFT, true), (FLAG_RIGHT, false)] {
            if flags & flag == 0 {
                continue;
            }
            let child = *next;
            if child >= records.len() {
                return Err(IcError::MalformedTree("child flag without a node"));
            }
            *next += 1;
            if is_left {
                nodes[id].left = Some(child as u16);
            } else {
                nodes[id].right = Some(child as u16);
            }
            visit(child, records, nodes, next, level + 1)?;
        }
        Ok(())
    }
    visit(0, records, &mut nodes, &mut next, 1)?;
    if next != records.len() {
        return Err(IcError::MalformedTree("unreachable nodes"));
    }
    Ok(nodes)
}

pub(crate) struct Reader<'a> {
    pub(crate) bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], IcError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(IcError::Truncated { offset: self.bytes.len() })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, IcError> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16, IcError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, IcError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, IcError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
