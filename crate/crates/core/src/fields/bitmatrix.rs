use std::fmt;

use rand::Rng;

use crate::bits::BitString;
use crate::error::{usage, Error, Result};

/// Row-major GF(2) matrix with each row packed into `u64` words.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        Ok(())
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitString]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitString::len);
        if rows.iter().any(|r| r.len() != cols) {
            return usage("ragged rows");
        }
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            m.data[i * m.stride..(i + 1) * m.stride].copy_from_slice(r.words());
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.stride + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        let w = &mut self.data[i * self.stride + j / 64];
        if b {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitString {
        let mut r = BitString::zeros(self.cols);
        for j in 0..self.cols {
            r.set(j, self.get(i, j));
        }
        r
    }

    pub fn mul_vec(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.cols {
            return usage(format!("vector of length {} against {} columns", x.len(), self.cols));
        }
        Ok(self.mul_vec_unchecked(x))
    }

    pub(crate) fn mul_vec_unchecked(&self, x: &BitString) -> BitString {
        let xw = x.words();
        let mut out = BitString::zeros(self.rows);
        for i in 0..self.rows {
            let ones: u32 = self
                .row_words(i)
                .iter()
                .zip(xw)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    /// Reduced row echelon form over the first `ncols` columns; returns pivots.
    fn rref(&mut self, ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            if p != r {
                self.swap_rows(p, r);
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref(self.cols).len()
    }

    /// Uniform sample from `{x : self * x = o}`.
    pub fn solve_affine_sample<R: Rng + ?Sized>(&self, o: &BitString, rng: &mut R) -> Result<BitString> {
        if o.len() != self.rows {
            return usage(format!("target of length {} for {} rows", o.len(), self.rows));
        }
        let n = self.cols;
        let mut aug = BitMatrix::zeros(self.rows, n + 1);
        for i in 0..self.rows {
            aug.data[i * aug.stride..i * aug.stride + self.stride].copy_from_slice(self.row_words(i));
            aug.set(i, n, o.get(i));
        }
        let pivots = aug.rref(n);
        if (pivots.len()..aug.rows).any(|i| aug.get(i, n)) {
            return Err(Error::Infeasible("inconsistent linear system".into()));
        }
        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut x = BitString::random(n, rng);
        for &c in &pivots {
            x.set(c, false);
        }
        // Row i reads x_c + sum_{free j} a_ij x_j = o_i; pivot entries of x are zero.
        let xa = {
            let mut t = BitString::zeros(n + 1);
            t.splice(0, &x);
            t
        };
        for (i, &c) in pivots.iter().enumerate() {
            let ones: u32 = aug
                .row_words(i)
                .iter()
                .zip(xa.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            // The row's own pivot bit meets x_c = 0, so `ones` counts free terms only.
            x.set(c, aug.get(i, n) ^ (ones & 1 == 1));
        }
        Ok(x)
    }
}
