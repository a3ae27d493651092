//! Arithmetic in GF(2^k) for 1 <= k <= 32, plus dense linear algebra over it.
//!
//! Elements are `u64` values whose bit `j` is the coefficient of `x^j`.
//! When a field element is read out of a [`BitString`], the first bit of the
//! slice is the constant term.

mod bitmatrix;
mod matrix;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use bitmatrix::BitMatrix;
pub use matrix::Mat;

use crate::bits::BitString;
use crate::error::{usage, Error, Result};

pub type FieldElem = u64;

pub const MAX_DEGREE: u32 = 32;

/// Default reduction polynomials, indexed by degree. Each is the
/// lexicographically smallest primitive trinomial or pentanomial.
const DEFAULT_POLYS: [u64; 33] = [
    0,
    0x3,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11d,
    0x211,
    0x409,
    0x805,
    0x1053,
    0x201b,
    0x402b,
    0x8003,
    0x1002d,
    0x20009,
    0x40081,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001b,
    0x2000009,
    0x4000047,
    0x8000027,
    0x10000009,
    0x20000005,
    0x40000053,
    0x80000009,
    0x1000000c5,
];

// Log tables cost 12 bytes per element; past 2^16 plain shift-and-add wins.
const TABLE_MAX_DEGREE: u32 = 16;

struct Tables {
    log: Vec<u32>,
    exp: Vec<u64>,
}

#[derive(Clone)]
pub struct FieldSpec {
    k: u32,
    poly: u64,
    tables: Option<Arc<Tables>>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.poly == other.poly
    }
}
impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.k, self.poly)
    }
}

impl FieldSpec {
    /// GF(2^k) with the default reduction polynomial.
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 || k > MAX_DEGREE {
            return usage(format!("field degree {k} outside 1..={MAX_DEGREE}"));
        }
        Ok(Self::build(k, DEFAULT_POLYS[k as usize]))
    }

    /// GF(2^k) with a caller-chosen polynomial, given with its leading `x^k` bit.
    pub fn with_poly(k: u32, poly: u64) -> Result<Self> {
        if k == 0 || k > MAX_DEGREE {
            return usage(format!("field degree {k} outside 1..={MAX_DEGREE}"));
        }
        if degree(poly) != Some(k) {
            return usage(format!("{poly:#x} is not a degree-{k} polynomial"));
        }
        if !is_irreducible(poly) {
            return Err(Error::Domain(format!("{poly:#x} is reducible")));
        }
        Ok(Self::build(k, poly))
    }

    fn build(k: u32, poly: u64) -> Self {
        let mut f = FieldSpec { k, poly, tables: None };
        if k <= TABLE_MAX_DEGREE {
            f.tables = Some(Arc::new(f.make_tables()));
        }
        f
    }

    fn make_tables(&self) -> Tables {
        let order = (1u64 << self.k) - 1;
        let g = (1..=order.max(1))
            .find(|&g| self.order_of(g) == order)
            .expect("multiplicative group is cyclic");
        let mut log = vec![0u32; 1 << self.k];
        let mut exp = vec![0u64; 2 * order as usize];
        let mut v = 1u64;
        for i in 0..order as usize {
            exp[i] = v;
            exp[i + order as usize] = v;
            log[v as usize] = i as u32;
            v = self.mul_slow(v, g);
        }
        Tables { log, exp }
    }

    fn order_of(&self, g: u64) -> u64 {
        let order = (1u64 << self.k) - 1;
        let mut primes = Vec::new();
        let mut n = order;
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                primes.push(d);
                while n % d == 0 {
                    n /= d;
                }
            }
            d += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        if self.pow_slow(g, order) != 1 {
            return 0;
        }
        if primes.iter().all(|p| self.pow_slow(g, order / p) != 1) {
            order
        } else {
            0
        }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn reduction_poly(&self) -> u64 {
        self.poly
    }

    #[inline]
    pub fn size(&self) -> u64 {
        1u64 << self.k
    }

    #[inline]
    pub fn contains(&self, a: FieldElem) -> bool {
        a >> self.k == 0
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        debug_assert!(self.contains(a) && self.contains(b));
        match &self.tables {
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
                }
            }
            None => self.mul_slow(a, b),
        }
    }

    fn mul_slow(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let mut p = 0u64;
        let mut b = b;
        let mut i = 0;
        while b != 0 {
            if b & 1 == 1 {
                p ^= a << i;
            }
            b >>= 1;
            i += 1;
        }
        for bit in (self.k..2 * self.k - 1).rev() {
            if (p >> bit) & 1 == 1 {
                p ^= self.poly << (bit - self.k);
            }
        }
        p
    }

    fn pow_slow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let (mut r, mut base) = (1u64, a);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_slow(r, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        r
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        let (mut r, mut base, mut e) = (1u64, a, e);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a == 0 {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        if !self.contains(a) {
            return usage(format!("{a:#x} is not an element of GF(2^{})", self.k));
        }
        Ok(match &self.tables {
            Some(t) => {
                let order = (1u32 << self.k) - 1;
                t.exp[((order - t.log[a as usize]) % order) as usize]
            }
            None => self.pow(a, (1u64 << self.k) - 2),
        })
    }

    /// Symbol `j` (0-based) of `x`, read as `k` consecutive bits.
    #[inline]
    pub fn symbol(&self, x: &BitString, j: usize) -> FieldElem {
        x.read_u64(j * self.k as usize, self.k as usize)
    }

    /// Splits `x` into `len / k` symbols.
    pub fn symbols(&self, x: &BitString) -> Result<Vec<FieldElem>> {
        let k = self.k as usize;
        if x.len() % k != 0 {
            return usage(format!("{} bits is not a whole number of {k}-bit symbols", x.len()));
        }
        Ok((0..x.len() / k).map(|j| self.symbol(x, j)).collect())
    }

    pub fn to_bits(&self, elems: &[FieldElem]) -> BitString {
        let k = self.k as usize;
        let mut out = BitString::zeros(elems.len() * k);
        for (j, &e) in elems.iter().enumerate() {
            out.write_u64(j * k, k, e);
        }
        out
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FieldSpec", 2)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("reduction_poly", &self.poly)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            k: u32,
            reduction_poly: Option<u64>,
        }
        let r = Raw::deserialize(d)?;
        match r.reduction_poly {
            Some(p) => FieldSpec::with_poly(r.k, p),
            None => FieldSpec::new(r.k),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn degree(p: u64) -> Option<u32> {
    (p != 0).then(|| 63 - p.leading_zeros())
}

fn poly_mod(mut a: u64, m: u64) -> u64 {
    let dm = degree(m).expect("nonzero modulus");
    while let Some(da) = degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

fn poly_mulmod(a: u64, b: u64, m: u64) -> u64 {
    let dm = degree(m).expect("nonzero modulus");
    let (mut a, mut b, mut r) = (a, b, 0u64);
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> dm) & 1 == 1 {
            a ^= m;
        }
    }
    r
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Irreducibility over GF(2): trial division by every polynomial of degree
/// up to k/2 when k <= 16, Rabin's test otherwise.
pub fn is_irreducible(p: u64) -> bool {
    let Some(k) = degree(p) else { return false };
    if k == 0 {
        return false;
    }
    if k <= 16 {
        for d in 1..=k / 2 {
            for q in (1u64 << d)..(1u64 << (d + 1)) {
                if poly_mod(p, q) == 0 {
                    return false;
                }
            }
        }
        return true;
    }
    // x^(2^k) == x mod p, and gcd(x^(2^(k/r)) - x, p) == 1 for each prime r | k.
    let frob = |times: u32| {
        let mut v = 2u64;
        for _ in 0..times {
            v = poly_mulmod(v, v, p);
        }
        v
    };
    if frob(k) != 2 {
        return false;
    }
    let mut n = k;
    let mut r = 2;
    while n > 1 {
        if n % r == 0 {
            if poly_gcd(p, frob(k / r) ^ 2) != 1 {
                return false;
            }
            while n % r == 0 {
                n /= r;
            }
        }
        r += 1;
    }
    true
}
