//! `NMC1` codeword files: magic, 32-byte profile hash, then each half as a
//! little-endian `u64` bit count followed by its little-endian packed bits.

use crate::bits::BitString;
use crate::error::{Error, Result};

use super::Codeword;

pub const MAGIC: &[u8; 4] = b"NMC1";

pub fn write_codeword(profile_hash: &[u8; 32], cw: &Codeword) -> Vec<u8> {
    let mut out = Vec::with_capacity(36 + 16 + 2 * cw.x.len().div_ceil(8));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(profile_hash);
    for half in [&cw.x, &cw.y] {
        out.extend_from_slice(&(half.len() as u64).to_le_bytes());
        out.extend_from_slice(&half.to_le_bytes());
    }
    out
}

/// Parses a codeword file. With `expect` set, the stored hash must match.
pub fn read_codeword(bytes: &[u8], expect: Option<&[u8; 32]>) -> Result<([u8; 32], Codeword)> {
    let bad = |m: &str| Error::Format(m.to_string());
    if bytes.len() < 36 || &bytes[..4] != MAGIC {
        return Err(bad("missing NMC1 header"));
    }
    let mut hash = [0u8; 32];
    hash.copy_from_slice(&bytes[4..36]);
    if let Some(h) = expect {
        if *h != hash {
            return Err(bad("codeword was written under a different profile"));
        }
    }
    let mut at = 36;
    let mut halves = Vec::with_capacity(2);
    for _ in 0..2 {
        let len_bytes: [u8; 8] = bytes
            .get(at..at + 8)
            .ok_or_else(|| bad("truncated length"))?
            .try_into()
            .unwrap();
        let len = u64::from_le_bytes(len_bytes) as usize;
        at += 8;
        let nb = len.div_ceil(8);
        let body = bytes.get(at..at + nb).ok_or_else(|| bad("truncated bit array"))?;
        halves.push(BitString::from_le_bytes(body, len)?);
        at += nb;
    }
    if at != bytes.len() {
        return Err(bad("trailing bytes after codeword"));
    }
    let y = halves.pop().unwrap();
    let x = halves.pop().unwrap();
    if x.len() != y.len() {
        return Err(bad("halves differ in length"));
    }
    Ok((hash, Codeword { x, y }))
}
