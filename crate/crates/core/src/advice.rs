//! Advice generation: Reed-Solomon fingerprints at positions picked by a
//! chunk sampler seeded from an inner product of the sources' heads.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{usage, Error, Result};
use crate::extractors::{ip_extract, IpSpec};
use crate::fields::{FieldElem, FieldSpec, Mat};

/// Reed-Solomon code `F_q^k -> F_q^n`; position `j` (1-indexed) evaluates the
/// message polynomial at the field element whose integer encoding is `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsSpec {
    pub field: FieldSpec,
    pub k: usize,
    pub n: usize,
}

impl RsSpec {
    pub fn new(field: FieldSpec, k: usize, n: usize) -> Result<Self> {
        if k == 0 || k > n {
            return usage(format!("reed-solomon needs 0 < k <= n (k={k}, n={n})"));
        }
        if n as u64 > field.size() - 1 {
            return usage(format!("reed-solomon length {n} exceeds q - 1 = {}", field.size() - 1));
        }
        Ok(RsSpec { field, k, n })
    }

    fn point(&self, j: usize) -> FieldElem {
        j as FieldElem
    }

    fn check_position(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return usage(format!("codeword position {j} outside 1..={}", self.n));
        }
        Ok(())
    }

    /// Codeword symbol at position `j` (Horner).
    pub fn eval_at(&self, msg: &[FieldElem], j: usize) -> Result<FieldElem> {
        if msg.len() != self.k {
            return usage(format!("message has {} symbols, code expects {}", msg.len(), self.k));
        }
        self.check_position(j)?;
        let p = self.point(j);
        Ok(msg.iter().rev().fold(0, |acc, &m| self.field.mul(acc, p) ^ m))
    }
}

pub fn rs_encode(spec: &RsSpec, msg: &[FieldElem]) -> Result<Vec<FieldElem>> {
    (1..=spec.n).map(|j| spec.eval_at(msg, j)).collect()
}

/// Uniform message `m` with `m_i = l_i` for `i` in `fixed` and
/// `ECC(m)_j = c_j` for `j` in `cols` (both 1-indexed). At most `t` distinct
/// columns, and `|fixed| <= k - t`. Repeated columns must agree.
pub fn rs_constrained_sample<R: Rng + ?Sized>(
    spec: &RsSpec,
    t: usize,
    cols: &[usize],
    c: &[FieldElem],
    fixed: &[usize],
    l: &[FieldElem],
    rng: &mut R,
) -> Result<Vec<FieldElem>> {
    if cols.len() != c.len() || fixed.len() != l.len() {
        return usage("constraint positions and values differ in length");
    }
    if fixed.len() + t > spec.k {
        return usage(format!(
            "{} fixed coordinates leave fewer than t={t} free of k={}",
            fixed.len(),
            spec.k
        ));
    }
    let f = &spec.field;
    let mut cons: Vec<(usize, FieldElem)> = Vec::new();
    for (&j, &v) in cols.iter().zip(c) {
        spec.check_position(j)?;
        if !f.contains(v) {
            return usage("constraint value outside the field");
        }
        match cons.iter().find(|(p, _)| *p == j) {
            Some(&(_, w)) if w != v => {
                return Err(Error::Infeasible(format!("position {j} constrained to two values")));
            }
            Some(_) => {}
            None => cons.push((j, v)),
        }
    }
    if cons.len() > t {
        return usage(format!("{} distinct columns exceed t={t}", cons.len()));
    }
    let mut msg = vec![0; spec.k];
    let mut is_fixed = vec![false; spec.k];
    for (&i, &v) in fixed.iter().zip(l) {
        if i == 0 || i > spec.k {
            return usage(format!("message coordinate {i} outside 1..={}", spec.k));
        }
        if is_fixed[i - 1] {
            return usage(format!("message coordinate {i} fixed twice"));
        }
        if !f.contains(v) {
            return usage("fixed value outside the field");
        }
        is_fixed[i - 1] = true;
        msg[i - 1] = v;
    }
    let free: Vec<usize> = (0..spec.k).filter(|&i| !is_fixed[i]).collect();
    let mut a = Mat::zeros(cons.len(), free.len());
    let mut rhs = Vec::with_capacity(cons.len());
    for (r, &(j, v)) in cons.iter().enumerate() {
        let p = spec.point(j);
        let mut pw = 1;
        let mut acc = v;
        let mut fi = 0;
        for i in 0..spec.k {
            if is_fixed[i] {
                acc ^= f.mul(pw, msg[i]);
            } else {
                a.set(r, fi, pw);
                fi += 1;
            }
            pw = f.mul(pw, p);
        }
        rhs.push(acc);
    }
    let sol = a.solve_affine_sample(f, &rhs, rng)?;
    for (&i, v) in free.iter().zip(sol) {
        msg[i] = v;
    }
    Ok(msg)
}

/// Reads `t1` chunks of `ceil(log2 nu)` bits (most significant bit first)
/// and maps each chunk `v` to `(v mod nu) + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampSpec {
    pub r: usize,
    pub nu: usize,
    pub t1: usize,
}

impl SampSpec {
    pub fn new(r: usize, nu: usize, t1: usize) -> Result<Self> {
        if nu == 0 || t1 == 0 {
            return usage("sampler needs nu >= 1 and t1 >= 1");
        }
        let s = SampSpec { r, nu, t1 };
        if t1 * s.chunk_bits() > r {
            return usage(format!(
                "sampler reads {} bits but the seed has {r}",
                t1 * s.chunk_bits()
            ));
        }
        Ok(s)
    }

    pub fn chunk_bits(&self) -> usize {
        (usize::BITS - (self.nu - 1).leading_zeros()) as usize
    }
}

pub fn samp(spec: &SampSpec, seed: &BitString) -> Result<Vec<usize>> {
    if seed.len() != spec.r {
        return usage(format!("sampler seed has {} bits, expected {}", seed.len(), spec.r));
    }
    let w = spec.chunk_bits();
    Ok((0..spec.t1)
        .map(|c| {
            let v = (0..w).fold(0usize, |acc, i| (acc << 1) | seed.get(c * w + i) as usize);
            v % spec.nu + 1
        })
        .collect())
}

/// Everything needed to compute the advice string from a codeword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdviceSpec {
    /// Length of each codeword half.
    pub total_len: usize,
    /// Length of the head blocks `X1`, `Y1` (= 3 n1).
    pub head_len: usize,
    pub ip: IpSpec,
    pub rs: RsSpec,
    pub samp: SampSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Advice {
    /// `X1 || fingerprint(X2) || Y1 || fingerprint(Y2)`.
    pub g: BitString,
    /// Inner product of the heads; the sampler's seed.
    pub r: BitString,
    /// Sampled codeword positions, 1-indexed, repeats kept.
    pub positions: Vec<usize>,
}

impl AdviceSpec {
    pub fn len(&self) -> usize {
        2 * self.head_len + 2 * self.samp.t1 * self.rs.field.degree() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bits of the tail covered by RS symbols; any remainder is ignored.
    pub fn coded_len(&self) -> usize {
        self.rs.k * self.rs.field.degree() as usize
    }

    /// Fingerprint of a tail (its first `coded_len` bits) at the given positions.
    pub fn fingerprint(&self, tail: &BitString, positions: &[usize]) -> Result<BitString> {
        if tail.len() < self.coded_len() {
            return usage(format!(
                "tail of {} bits is shorter than the {} coded bits",
                tail.len(),
                self.coded_len()
            ));
        }
        let f = &self.rs.field;
        let msg: Vec<FieldElem> = (0..self.rs.k).map(|j| f.symbol(tail, j)).collect();
        let vals = positions
            .iter()
            .map(|&j| self.rs.eval_at(&msg, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.rs.field.to_bits(&vals))
    }

    pub fn positions(&self, x1: &BitString, y1: &BitString) -> Result<(BitString, Vec<usize>)> {
        let r = ip_extract(&self.ip, x1, y1)?;
        let pos = samp(&self.samp, &r)?;
        Ok((r, pos))
    }
}

pub fn advice_gen(spec: &AdviceSpec, x: &BitString, y: &BitString) -> Result<Advice> {
    let (h, n) = (spec.head_len, spec.total_len);
    if x.len() != n || y.len() != n {
        return usage(format!(
            "advice expects {n}-bit halves, got {} and {}",
            x.len(),
            y.len()
        ));
    }
    let (x1, y1) = (x.slice(0, h), y.slice(0, h));
    let (r, positions) = spec.positions(&x1, &y1)?;
    let fx = spec.fingerprint(&x.slice(h, n - h), &positions)?;
    let fy = spec.fingerprint(&y.slice(h, n - h), &positions)?;
    Ok(Advice {
        g: BitString::concat(&[&x1, &fx, &y1, &fy]),
        r,
        positions,
    })
}
