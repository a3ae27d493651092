//! Linear seeded extractors and the inner-product two-source extractor.
//!
//! Every seeded extractor here is GF(2)-linear in its source for a fixed
//! seed, so `Ext(., seed)` is a matrix and preimages are affine subspaces.
//! The backward sampler depends on that.

mod ip;
mod trevisan;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use crate::bits::BitString;
pub use ip::{invert_ip, ip_extract, IpSpec};
pub use trevisan::weak_design;

use crate::error::{usage, Error, Result};
use crate::fields::BitMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// Plain Toeplitz hashing. A full seed is `n + m - 1` bits (diagonals,
    /// first column bottom-up then first row); shorter seeds are stretched.
    Toeplitz,
    /// `[I_m | T]` with `T` an `m x (n - m)` Toeplitz block. Full rank for
    /// every seed.
    ModifiedToeplitz,
    /// Hadamard base code over a weak design with pairwise intersections <= 1.
    Trevisan,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Toeplitz => "toeplitz",
            Construction::ModifiedToeplitz => "modified-toeplitz",
            Construction::Trevisan => "trevisan",
        })
    }
}

impl FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toeplitz" => Ok(Construction::Toeplitz),
            "modified-toeplitz" => Ok(Construction::ModifiedToeplitz),
            "trevisan" => Ok(Construction::Trevisan),
            _ => usage(format!("unknown extractor construction {s:?}")),
        }
    }
}

// Seeds up to this many bits get every matrix built once up front.
const CACHE_MAX_SEED_BITS: usize = 12;

#[derive(Clone)]
pub struct SeededExtSpec {
    construction: Construction,
    n: usize,
    d: usize,
    m: usize,
    design: Option<Arc<Vec<Vec<usize>>>>,
    cache: Option<Arc<Vec<BitMatrix>>>,
}

impl PartialEq for SeededExtSpec {
    fn eq(&self, o: &Self) -> bool {
        (self.construction, self.n, self.d, self.m) == (o.construction, o.n, o.d, o.m)
    }
}
impl Eq for SeededExtSpec {}

impl fmt::Debug for SeededExtSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, d={}, m={})", self.construction, self.n, self.d, self.m)
    }
}

impl SeededExtSpec {
    pub fn new(construction: Construction, n: usize, d: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 || d == 0 {
            return usage(format!("{construction}: n, d, m must be positive (got {n}, {d}, {m})"));
        }
        if m > n {
            return usage(format!("{construction}: output {m} exceeds source length {n}"));
        }
        let mut design = None;
        match construction {
            Construction::Toeplitz => {
                if d > n + m - 1 {
                    return usage(format!("toeplitz: seed {d} exceeds n + m - 1 = {}", n + m - 1));
                }
            }
            Construction::ModifiedToeplitz => {}
            Construction::Trevisan => {
                let (c, sets) = weak_design(n, m);
                if d != n * c {
                    return usage(format!(
                        "trevisan: n={n}, m={m} needs a seed of exactly {} bits, got {d}",
                        n * c
                    ));
                }
                design = Some(Arc::new(sets));
            }
        }
        let mut spec = SeededExtSpec {
            construction,
            n,
            d,
            m,
            design,
            cache: None,
        };
        if d <= CACHE_MAX_SEED_BITS {
            let all = (0..1u64 << d)
                .map(|v| spec.build_matrix(&BitString::from_u64(v, d)))
                .collect();
            spec.cache = Some(Arc::new(all));
        }
        Ok(spec)
    }

    /// Trevisan spec with the seed length its weak design dictates.
    pub fn trevisan(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return usage(format!("trevisan: bad shape n={n}, m={m}"));
        }
        Self::new(Construction::Trevisan, n, n * weak_design(n, m).0, m)
    }

    pub fn toeplitz(n: usize, m: usize) -> Result<Self> {
        Self::new(Construction::Toeplitz, n, n + m - 1, m)
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }
    pub fn source_len(&self) -> usize {
        self.n
    }
    pub fn seed_len(&self) -> usize {
        self.d
    }
    pub fn output_len(&self) -> usize {
        self.m
    }

    fn build_matrix(&self, seed: &BitString) -> BitMatrix {
        let (n, m) = (self.n, self.m);
        match self.construction {
            Construction::Toeplitz => toeplitz_block(&stretch(seed, n + m - 1), m, n),
            Construction::ModifiedToeplitz => {
                let mut a = BitMatrix::zeros(m, n);
                for i in 0..m {
                    a.set(i, i, true);
                }
                if n > m {
                    let t = toeplitz_block(&stretch(seed, n - 1), m, n - m);
                    for i in 0..m {
                        for j in 0..n - m {
                            a.set(i, m + j, t.get(i, j));
                        }
                    }
                }
                a
            }
            Construction::Trevisan => {
                let sets = self.design.as_ref().expect("trevisan spec carries its design");
                let mut a = BitMatrix::zeros(m, n);
                for (i, set) in sets.iter().enumerate() {
                    for (j, &pos) in set.iter().enumerate() {
                        a.set(i, j, seed.get(pos));
                    }
                }
                a
            }
        }
    }

    fn check_seed(&self, seed: &BitString) -> Result<()> {
        if seed.len() != self.d {
            return usage(format!("{self:?}: seed has {} bits", seed.len()));
        }
        Ok(())
    }

    /// The `m x n` matrix `A` with `Ext(x, seed) = A x`.
    pub fn matrix_of_seed(&self, seed: &BitString) -> Result<BitMatrix> {
        self.check_seed(seed)?;
        Ok(match &self.cache {
            Some(c) => c[seed.to_u64() as usize].clone(),
            None => self.build_matrix(seed),
        })
    }

    pub fn extract(&self, x: &BitString, seed: &BitString) -> Result<BitString> {
        self.check_seed(seed)?;
        if x.len() != self.n {
            return usage(format!("{self:?}: source has {} bits", x.len()));
        }
        Ok(match &self.cache {
            Some(c) => c[seed.to_u64() as usize].mul_vec_unchecked(x),
            None => self.build_matrix(seed).mul_vec_unchecked(x),
        })
    }

    /// Uniform `x` with `Ext(x, seed) = o`; `Infeasible` when the seed's
    /// matrix misses `o`.
    pub fn invert<R: Rng + ?Sized>(&self, seed: &BitString, o: &BitString, rng: &mut R) -> Result<BitString> {
        if o.len() != self.m {
            return usage(format!("{self:?}: target has {} bits", o.len()));
        }
        self.check_seed(seed)?;
        if self.construction == Construction::ModifiedToeplitz {
            // A = [I | T]: draw x uniformly, then correct the identity part.
            let x = BitString::random(self.n, rng);
            let mut fix = self.extract(&x, seed)?;
            fix.xor_assign(o);
            let mut x = x;
            let head = x.slice(0, self.m).xor(&fix);
            x.splice(0, &head);
            return Ok(x);
        }
        self.matrix_of_seed(seed)?.solve_affine_sample(o, rng)
    }
}

pub fn seeded_extract(spec: &SeededExtSpec, x: &BitString, seed: &BitString) -> Result<BitString> {
    spec.extract(x, seed)
}

pub fn matrix_of_seed(spec: &SeededExtSpec, seed: &BitString) -> Result<BitMatrix> {
    spec.matrix_of_seed(seed)
}

pub fn invert_seeded<R: Rng + ?Sized>(
    spec: &SeededExtSpec,
    seed: &BitString,
    o: &BitString,
    rng: &mut R,
) -> Result<BitString> {
    spec.invert(seed, o, rng)
}

/// Stretches `seed` to `len` bits. Longer seeds are truncated; shorter ones
/// continue with `t[k] = t[k-d] ^ t[k-d+1]` (`t[k] = t[k-1]` when `d = 1`).
fn stretch(seed: &BitString, len: usize) -> BitString {
    let d = seed.len();
    if d >= len {
        return seed.slice(0, len);
    }
    let mut t = BitString::zeros(len);
    t.splice(0, seed);
    for k in d..len {
        let v = if d == 1 {
            t.get(k - 1)
        } else {
            t.get(k - d) ^ t.get(k - d + 1)
        };
        t.set(k, v);
    }
    t
}

/// `rows x cols` Toeplitz matrix with `T[i][j] = diag[j - i + rows - 1]`.
fn toeplitz_block(diag: &BitString, rows: usize, cols: usize) -> BitMatrix {
    debug_assert_eq!(diag.len(), rows + cols - 1);
    let mut t = BitMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            t.set(i, j, diag.get(j + rows - 1 - i));
        }
    }
    t
}

impl Serialize for SeededExtSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SeededExtSpec", 4)?;
        st.serialize_field("construction", &self.construction)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("m", &self.m)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SeededExtSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            construction: Construction,
            n: usize,
            d: usize,
            m: usize,
        }
        let r = Raw::deserialize(d)?;
        SeededExtSpec::new(r.construction, r.n, r.d, r.m).map_err(serde::de::Error::custom)
    }
}
