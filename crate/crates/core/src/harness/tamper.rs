//! Split-state tampering functions. Each family acts on the two halves
//! independently; no half ever sees the other.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::codec::Codeword;
use crate::error::{usage, Result};
use crate::fields::BitMatrix;

/// Largest half length for which explicit lookup tables are allowed.
pub const LOOKUP_MAX_BITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TamperFamily {
    Identity,
    Constant {
        x: BitString,
        y: BitString,
    },
    XorMask {
        x: BitString,
        y: BitString,
    },
    /// `out[i] = in[perm[i]]`.
    BitPermutation {
        x: Vec<usize>,
        y: Vec<usize>,
    },
    Affine {
        ax: BitMatrix,
        bx: BitString,
        ay: BitMatrix,
        by: BitString,
    },
    /// Tables indexed by the half's integer value.
    LookupTable {
        n: usize,
        x: Vec<u64>,
        y: Vec<u64>,
    },
}

fn permute(v: &BitString, perm: &[usize]) -> BitString {
    let mut out = BitString::zeros(v.len());
    for (i, &j) in perm.iter().enumerate() {
        out.set(i, v.get(j));
    }
    out
}

impl TamperFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            TamperFamily::Identity => "identity",
            TamperFamily::Constant { .. } => "constant",
            TamperFamily::XorMask { .. } => "xor_mask",
            TamperFamily::BitPermutation { .. } => "bit_permutation",
            TamperFamily::Affine { .. } => "affine",
            TamperFamily::LookupTable { .. } => "lookup_table",
        }
    }

    /// Checks that the family acts on `n`-bit halves.
    pub fn check_len(&self, n: usize) -> Result<()> {
        let lens: Vec<usize> = match self {
            TamperFamily::Identity => vec![],
            TamperFamily::Constant { x, y } | TamperFamily::XorMask { x, y } => vec![x.len(), y.len()],
            TamperFamily::BitPermutation { x, y } => vec![x.len(), y.len()],
            TamperFamily::Affine { ax, bx, ay, by } => {
                vec![ax.rows(), ax.cols(), bx.len(), ay.rows(), ay.cols(), by.len()]
            }
            TamperFamily::LookupTable { n: m, .. } => vec![*m],
        };
        if lens.iter().any(|&l| l != n) {
            return usage(format!("{} family does not act on {n}-bit halves", self.kind()));
        }
        Ok(())
    }

    /// `(g1(x), g2(y))`. The caller guarantees matching lengths (see
    /// [`TamperFamily::check_len`]).
    pub fn apply(&self, cw: &Codeword) -> Codeword {
        match self {
            TamperFamily::Identity => cw.clone(),
            TamperFamily::Constant { x, y } => Codeword {
                x: x.clone(),
                y: y.clone(),
            },
            TamperFamily::XorMask { x, y } => Codeword {
                x: cw.x.xor(x),
                y: cw.y.xor(y),
            },
            TamperFamily::BitPermutation { x, y } => Codeword {
                x: permute(&cw.x, x),
                y: permute(&cw.y, y),
            },
            TamperFamily::Affine { ax, bx, ay, by } => Codeword {
                x: ax.mul_vec_unchecked(&cw.x).xor(bx),
                y: ay.mul_vec_unchecked(&cw.y).xor(by),
            },
            TamperFamily::LookupTable { n, x, y } => Codeword {
                x: BitString::from_u64(x[cw.x.to_u64() as usize], *n),
                y: BitString::from_u64(y[cw.y.to_u64() as usize], *n),
            },
        }
    }
}

/// A parsed `--family` argument: one family per tampering, `+`-separated.
///
/// Grammar per component: `identity`, `constant[:SEED]`, `xor:x|y|xy[:SEED]`,
/// `perm[:SEED]`, `affine[:SEED]`, `lookup[:SEED]`. Random parameters come
/// from `SEED` (default 0), so a spec string pins the functions exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TamperSpec {
    components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Component {
    Identity,
    Constant(u64),
    Xor { x: bool, y: bool, seed: u64 },
    Perm(u64),
    Affine(u64),
    Lookup(u64),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Identity => write!(f, "identity"),
            Component::Constant(s) => write!(f, "constant:{s}"),
            Component::Xor { x, y, seed } => {
                let which = match (x, y) {
                    (true, true) => "xy",
                    (true, false) => "x",
                    _ => "y",
                };
                write!(f, "xor:{which}:{seed}")
            }
            Component::Perm(s) => write!(f, "perm:{s}"),
            Component::Affine(s) => write!(f, "affine:{s}"),
            Component::Lookup(s) => write!(f, "lookup:{s}"),
        }
    }
}

impl fmt::Display for TamperSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn parse_seed(s: Option<&str>, whole: &str) -> Result<u64> {
    match s {
        None => Ok(0),
        Some(v) => v.parse().or_else(|_| usage(format!("bad seed in family {whole:?}"))),
    }
}

impl FromStr for TamperSpec {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut components = Vec::new();
        for part in s.split('+') {
            let part = part.trim();
            let mut it = part.split(':');
            let name = it.next().unwrap_or_default();
            let c = match name {
                "identity" => Component::Identity,
                "constant" => Component::Constant(parse_seed(it.next(), part)?),
                "perm" => Component::Perm(parse_seed(it.next(), part)?),
                "affine" => Component::Affine(parse_seed(it.next(), part)?),
                "lookup" => Component::Lookup(parse_seed(it.next(), part)?),
                "xor" => {
                    let (x, y) = match it.next() {
                        Some("x") => (true, false),
                        Some("y") => (false, true),
                        Some("xy") => (true, true),
                        _ => return usage(format!("xor family needs a target half x, y or xy: {part:?}")),
                    };
                    Component::Xor {
                        x,
                        y,
                        seed: parse_seed(it.next(), part)?,
                    }
                }
                _ => return usage(format!("unknown tamper family {part:?}")),
            };
            if it.next().is_some() {
                return usage(format!("trailing fields in family {part:?}"));
            }
            components.push(c);
        }
        Ok(TamperSpec { components })
    }
}

fn nonzero(n: usize, rng: &mut ChaCha8Rng) -> BitString {
    loop {
        let v = BitString::random(n, rng);
        if !v.is_zero() || n == 0 {
            return v;
        }
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> BitMatrix {
    let rows: Vec<BitString> = (0..n).map(|_| BitString::random(n, rng)).collect();
    BitMatrix::from_rows(&rows).expect("square rows")
}

impl TamperSpec {
    pub fn arity(&self) -> usize {
        self.components.len()
    }

    /// Instantiates every component for `n`-bit halves.
    pub fn build(&self, n: usize) -> Result<Vec<TamperFamily>> {
        self.components
            .iter()
            .map(|c| {
                let rng = |seed: u64| ChaCha8Rng::seed_from_u64(seed);
                Ok(match *c {
                    Component::Identity => TamperFamily::Identity,
                    Component::Constant(s) => {
                        let mut r = rng(s);
                        TamperFamily::Constant {
                            x: BitString::random(n, &mut r),
                            y: BitString::random(n, &mut r),
                        }
                    }
                    Component::Xor { x, y, seed } => {
                        let mut r = rng(seed);
                        let mx = if x { nonzero(n, &mut r) } else { BitString::zeros(n) };
                        let my = if y { nonzero(n, &mut r) } else { BitString::zeros(n) };
                        TamperFamily::XorMask { x: mx, y: my }
                    }
                    Component::Perm(s) => {
                        let mut r = rng(s);
                        let mut px: Vec<usize> = (0..n).collect();
                        let mut py = px.clone();
                        px.shuffle(&mut r);
                        py.shuffle(&mut r);
                        TamperFamily::BitPermutation { x: px, y: py }
                    }
                    Component::Affine(s) => {
                        let mut r = rng(s);
                        let (ax, bx) = (random_matrix(n, &mut r), BitString::random(n, &mut r));
                        let (ay, by) = (random_matrix(n, &mut r), BitString::random(n, &mut r));
                        TamperFamily::Affine { ax, bx, ay, by }
                    }
                    Component::Lookup(s) => {
                        if n > LOOKUP_MAX_BITS {
                            return usage(format!("lookup tables need n <= {LOOKUP_MAX_BITS}, got {n}"));
                        }
                        let mut r = rng(s);
                        let size = 1usize << n;
                        let x = (0..size).map(|_| r.gen_range(0..size as u64)).collect();
                        let y = (0..size).map(|_| r.gen_range(0..size as u64)).collect();
                        TamperFamily::LookupTable { n, x, y }
                    }
                })
            })
            .collect()
    }
}

/// Applies a `t`-tuple of families to one codeword.
pub fn tamper_apply(t: usize, fams: &[TamperFamily], cw: &Codeword) -> Result<Vec<Codeword>> {
    if fams.len() != t {
        return usage(format!("{} tampering functions for a profile with t = {t}", fams.len()));
    }
    for f in fams {
        f.check_len(cw.x.len())?;
    }
    Ok(fams.iter().map(|f| f.apply(cw)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cw(n: usize, seed: u64) -> Codeword {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        Codeword {
            x: BitString::random(n, &mut r),
            y: BitString::random(n, &mut r),
        }
    }

    #[test]
    fn trivial_families() {
        let c = cw(40, 1);
        assert_eq!(TamperFamily::Identity.apply(&c), c);
        let zero = TamperFamily::XorMask {
            x: BitString::zeros(40),
            y: BitString::zeros(40),
        };
        assert_eq!(zero.apply(&c), c);
        let k = cw(40, 2);
        let konst = TamperFamily::Constant {
            x: k.x.clone(),
            y: k.y.clone(),
        };
        assert_eq!(konst.apply(&c), k);
        assert_eq!(konst.apply(&cw(40, 3)), k);
    }

    #[test]
    fn grammar_round_trips() {
        for s in [
            "identity",
            "constant:5",
            "xor:y:3",
            "xor:xy:0+perm:9",
            "affine:1+lookup:2",
        ] {
            let spec: TamperSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("constant".parse::<TamperSpec>().unwrap().to_string(), "constant:0");
        for bad in ["", "xor", "xor:z:1", "perm:x", "identity:3", "nope"] {
            assert!(bad.parse::<TamperSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn halves_are_tampered_independently() {
        // Changing y never changes the tampered x, for every family.
        for s in ["xor:xy:1", "perm:2", "affine:3", "lookup:4", "constant:5"] {
            let fam = &s.parse::<TamperSpec>().unwrap().build(10).unwrap()[0];
            let a = cw(10, 6);
            let mut b = cw(10, 7);
            b.x = a.x.clone();
            assert_eq!(fam.apply(&a).x, fam.apply(&b).x, "{s}");
        }
    }

    #[test]
    fn arity_and_length_checks() {
        let fams = "identity+identity".parse::<TamperSpec>().unwrap().build(8).unwrap();
        assert!(tamper_apply(1, &fams, &cw(8, 1)).is_err());
        assert_eq!(tamper_apply(2, &fams, &cw(8, 1)).unwrap().len(), 2);
        let xor = "xor:x:1".parse::<TamperSpec>().unwrap().build(8).unwrap();
        assert!(tamper_apply(1, &xor, &cw(9, 1)).is_err());
        assert!("lookup".parse::<TamperSpec>().unwrap().build(13).is_err());
    }
}
