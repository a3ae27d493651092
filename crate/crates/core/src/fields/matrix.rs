use rand::Rng;

use super::{FieldElem, FieldSpec};
use crate::error::{usage, Error, Result};

/// Dense row-major matrix over GF(2^k). Entries are not range-checked on
/// every access; constructors and solvers check them once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElem>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return usage("ragged rows");
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Row `i` is `(p_i^0, p_i^1, ..., p_i^(cols-1))`.
    pub fn vandermonde(field: &FieldSpec, points: &[FieldElem], cols: usize) -> Self {
        let mut m = Self::zeros(points.len(), cols);
        for (i, &p) in points.iter().enumerate() {
            let mut v = 1;
            for j in 0..cols {
                m.set(i, j, v);
                v = field.mul(v, p);
            }
        }
        m
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
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, field: &FieldSpec, x: &[FieldElem]) -> Result<Vec<FieldElem>> {
        if x.len() != self.cols {
            return usage(format!("vector of length {} against {} columns", x.len(), self.cols));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(0, |acc, (&a, &b)| acc ^ field.mul(a, b)))
            .collect())
    }

    fn check_entries(&self, field: &FieldSpec) -> Result<()> {
        if self.data.iter().any(|&v| !field.contains(v)) {
            return usage(format!("matrix entry outside {field:?}"));
        }
        Ok(())
    }

    /// Reduced row echelon form in place; returns pivot columns. Pivots are
    /// taken from the first row with a nonzero entry in the current column.
    fn rref(&mut self, field: &FieldSpec, ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in c..self.cols {
                let v = field.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                let f = self.get(i, c);
                if i == r || f == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let v = self.get(i, j) ^ field.mul(f, self.get(r, j));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, field: &FieldSpec) -> Result<usize> {
        self.check_entries(field)?;
        Ok(self.clone().rref(field, self.cols).len())
    }

    /// Uniform sample from `{x : self * x = o}`.
    pub fn solve_affine_sample<R: Rng + ?Sized>(
        &self,
        field: &FieldSpec,
        o: &[FieldElem],
        rng: &mut R,
    ) -> Result<Vec<FieldElem>> {
        if o.len() != self.rows {
            return usage(format!("target of length {} for {} rows", o.len(), self.rows));
        }
        self.check_entries(field)?;
        if o.iter().any(|&v| !field.contains(v)) {
            return usage("target entry outside the field");
        }
        let n = self.cols;
        let mut aug = Mat::zeros(self.rows, n + 1);
        for i in 0..self.rows {
            aug.data[i * (n + 1)..i * (n + 1) + n].copy_from_slice(self.row(i));
            aug.set(i, n, o[i]);
        }
        let pivots = aug.rref(field, n);
        if (pivots.len()..aug.rows).any(|i| aug.get(i, n) != 0) {
            return Err(Error::Infeasible("inconsistent linear system".into()));
        }
        let mut x = vec![0; n];
        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let q = field.size();
        for j in 0..n {
            if !is_pivot[j] {
                x[j] = rng.gen_range(0..q);
            }
        }
        for (i, &c) in pivots.iter().enumerate() {
            let mut v = aug.get(i, n);
            for j in c + 1..n {
                if !is_pivot[j] {
                    v ^= field.mul(aug.get(i, j), x[j]);
                }
            }
            x[c] = v;
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vandermonde_3x5_over_gf8_has_full_rank() {
        let f = FieldSpec::with_poly(3, 0b1011).unwrap();
        let m = Mat::vandermonde(&f, &[1, 2, 3], 5);
        assert_eq!(m.rank(&f).unwrap(), 3);
    }

    #[test]
    fn samples_satisfy_the_system() {
        let f = FieldSpec::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (r, c) = (rng.gen_range(1..5), rng.gen_range(1..7));
            let m = Mat::from_rows((0..r).map(|_| (0..c).map(|_| rng.gen_range(0..16)).collect()).collect()).unwrap();
            let x0: Vec<u64> = (0..c).map(|_| rng.gen_range(0..16)).collect();
            let o = m.mul_vec(&f, &x0).unwrap();
            let x = m.solve_affine_sample(&f, &o, &mut rng).unwrap();
            assert_eq!(m.mul_vec(&f, &x).unwrap(), o);
        }
    }

    #[test]
    fn inconsistent_is_infeasible_and_bad_shape_is_usage() {
        let f = FieldSpec::new(2).unwrap();
        let m = Mat::from_rows(vec![vec![1, 0], vec![0, 0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            m.solve_affine_sample(&f, &[0, 1], &mut rng),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            m.solve_affine_sample(&f, &[0], &mut rng),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            m.solve_affine_sample(&f, &[0, 7], &mut rng),
            Err(Error::Usage(_))
        ));
    }
}
