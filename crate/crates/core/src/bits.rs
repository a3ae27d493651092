//! Packed bit strings.
//!
//! Bit `i` (0-based) lives in word `i / 64` at position `i % 64`. The public
//! slicing API ([`BitString::crop`], [`BitString::prefix`]) is 1-indexed and
//! inclusive, matching how the construction indexes its blocks; everything
//! else is 0-based.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{usage, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn nwords(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; nwords(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = BitString {
            len,
            words: vec![u64::MAX; nwords(len)],
        };
        if len % 64 != 0 {
            if let Some(w) = s.words.last_mut() {
                *w = (1u64 << (len % 64)) - 1;
            }
        }
        s
    }

    pub fn empty() -> Self {
        Self::zeros(0)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words: Vec<u64> = (0..nwords(len)).map(|_| rng.gen()).collect();
        if len % 64 != 0 {
            if let Some(w) = words.last_mut() {
                *w &= (1u64 << (len % 64)) - 1;
            }
        }
        BitString { len, words }
    }

    /// Low `len` bits of `v`, bit 0 first.
    pub fn from_u64(v: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 takes at most 64 bits");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = if len == 64 { v } else { v & ((1u64 << len) - 1) };
        }
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Little-endian packed bytes: bit `i` is bit `i % 8` of byte `i / 8`.
    pub fn from_le_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return usage(format!("{} bytes cannot hold exactly {} bits", bytes.len(), len));
        }
        let mut s = Self::zeros(len);
        for (i, &b) in bytes.iter().enumerate() {
            s.words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        if len % 8 != 0 && bytes.last().is_some_and(|&b| b >> (len % 8) != 0) {
            return Err(Error::Format("padding bits are not zero".into()));
        }
        Ok(s)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        (0..self.len.div_ceil(8))
            .map(|i| (self.words[i / 8] >> (8 * (i % 8))) as u8)
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Value of the whole string as an integer, bit 0 least significant.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a {}-bit string", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    /// Reads `width <= 64` bits starting at 0-based `start`, bit `start` least significant.
    pub fn read_u64(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64 && start + width <= self.len);
        if width == 0 {
            return 0;
        }
        let (w, off) = (start / 64, start % 64);
        let mut v = self.words[w] >> off;
        if off + width > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        if width < 64 {
            v &= (1u64 << width) - 1;
        }
        v
    }

    /// Writes the low `width` bits of `v` at 0-based `start`.
    pub fn write_u64(&mut self, start: usize, width: usize, v: u64) {
        debug_assert!(width <= 64 && start + width <= self.len);
        for j in 0..width {
            self.set(start + j, (v >> j) & 1 == 1);
        }
    }

    /// Bits `d1..=d2` (1-indexed, inclusive). `crop(d, d - 1)` is the empty string.
    pub fn crop(&self, d1: usize, d2: usize) -> Result<BitString> {
        if d1 == 0 || d2 > self.len || d1 > d2 + 1 {
            return usage(format!("crop({d1}, {d2}) out of range for {} bits", self.len));
        }
        Ok(self.slice(d1 - 1, d2 + 1 - d1))
    }

    /// First `s` bits; `prefix(0)` is empty.
    pub fn prefix(&self, s: usize) -> Result<BitString> {
        self.crop(1, s)
    }

    /// `len` bits starting at 0-based `start`. Panics when out of range.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = Self::zeros(len);
        let mut i = 0;
        while i < len {
            let w = (len - i).min(64);
            out.words[i / 64] = self.read_u64(start + i, w);
            i += w;
        }
        out
    }

    /// Overwrites bits `start..start + src.len()` with `src`.
    pub fn splice(&mut self, start: usize, src: &BitString) {
        assert!(start + src.len <= self.len, "splice out of range");
        let mut i = 0;
        while i < src.len {
            let w = (src.len - i).min(64);
            let v = src.read_u64(i, w);
            if (start + i) % 64 == 0 && w == 64 {
                self.words[(start + i) / 64] = v;
            } else {
                let (wi, off) = ((start + i) / 64, (start + i) % 64);
                let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
                self.words[wi] = (self.words[wi] & !(mask << off)) | (v << off);
                if off + w > 64 {
                    let hi = off + w - 64;
                    let hmask = (1u64 << hi) - 1;
                    self.words[wi + 1] = (self.words[wi + 1] & !hmask) | (v >> (64 - off));
                }
            }
            i += w;
        }
    }

    pub fn concat(parts: &[&BitString]) -> BitString {
        let total = parts.iter().map(|p| p.len).sum();
        let mut out = Self::zeros(total);
        let mut at = 0;
        for p in parts {
            out.splice(at, p);
            at += p.len;
        }
        out
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitString) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitString(\"{self}\")")
        } else {
            write!(f, "BitString(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

/// Parses a string of `0`/`1`, first character = bit 1.
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                _ => return usage(format!("not a bit string: {s:?}")),
            }
        }
        Ok(out)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
