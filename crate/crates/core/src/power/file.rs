//! Trace files: `"PWTR"`, version `u8`, `f_s` as `f64`, sample count `u64`,
//! then `f32` samples, all little-endian.

use std::io::{Read, Write};
use std::path::Path;

use super::{PowerError, PowerTrace};

pub const TRACE_MAGIC: [u8; 4] = *b"PWTR";
pub const TRACE_VERSION: u8 = 1;
const HEADER_LEN: u64 = 21;

pub fn write_trace<W: Write>(trace: &PowerTrace, mut w: W) -> Result<(), PowerError> {
    let mut buf = Vec::with_capacity(HEADER_LEN as usize + 4 * trace.len());
    buf.extend_from_slice(&TRACE_MAGIC);
    buf.push(TRACE_VERSION);
    buf.extend_from_slice(&trace.sampling_rate.to_le_bytes());
    buf.extend_from_slice(&(trace.len() as u64).to_le_bytes());
    for &s in &trace.samples {
        buf.extend_from_slice(&(s as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_trace<R: Read>(mut r: R) -> Result<PowerTrace, PowerError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse(&bytes)
}

pub fn write_trace_file(trace: &PowerTrace, path: &Path) -> Result<(), PowerError> {
    write_trace(trace, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_trace_file(path: &Path) -> Result<PowerTrace, PowerError> {
    parse(&std::fs::read(path)?)
}

fn parse(bytes: &[u8]) -> Result<PowerTrace, PowerError> {
    let fail = |offset: u64, reason| Err(PowerError::Format { offset, reason });
    if bytes.len() < 4 {
        return fail(bytes.len() as u64, "truncated magic");
    }
    if bytes[..4] != TRACE_MAGIC {
        return fail(0, "bad magic");
    }
    if bytes.len() < HEADER_LEN as usize {
        return fail(bytes.len() as u64, "truncated header");
    }
    if bytes[4] != TRACE_VERSION {
        return fail(4, "unsupported version");
    }
    let fs = f64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes"));
    if !(fs > 0.0 && fs.is_finite()) {
        return fail(5, "sampling rate must be positive");
    }
    let count = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes"));
    if count == 0 {
        return fail(13, "empty trace");
    }
    let body = &bytes[HEADER_LEN as usize..];
    let expected = count.checked_mul(4).ok_or(PowerError::Format { offset: 13, reason: "sample count overflows" })?;
    if (body.len() as u64) < expected {
        return fail(HEADER_LEN + body.len() as u64 / 4 * 4, "truncated samples");
    }
    if body.len() as u64 > expected {
        return fail(HEADER_LEN + expected, "trailing bytes");
    }
    let samples = body
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    Ok(PowerTrace::new(samples, fs))
}
