//! Small dense matrices over exact decimals and over intervals.
//!
//! Everything here is sized for the 7-dimensional extended phase space and
//! its 2x2 / 2x3 blocks, so the representation is a plain row-major vector.

use crate::dec::Dec;
use crate::interval::Interval;

/// Row-major matrix of exact decimals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DMat {
    rows: usize,
    cols: usize,
    data: Vec<Dec>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> DMat {
        DMat { rows, cols, data: vec![Dec::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> DMat {
        let mut m = DMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Dec::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Dec) -> DMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DMat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Dec {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Dec) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &DMat) -> DMat {
        assert_eq!(self.cols, other.rows);
        DMat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Dec::zero();
            for k in 0..self.cols {
                acc = &acc + &(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    pub fn add(&self, other: &DMat) -> DMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &DMat) -> DMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn neg(&self) -> DMat {
        DMat::from_fn(self.rows, self.cols, |i, j| -self.get(i, j))
    }

    pub fn scale(&self, s: &Dec) -> DMat {
        DMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * s)
    }

    /// Sum of absolute values along row `k`.
    pub fn row_sum(&self, k: usize) -> Dec {
        let mut acc = Dec::zero();
        for j in 0..self.cols {
            acc = &acc + &self.get(k, j).abs();
        }
        acc
    }

    /// Sum of absolute values of every entry.
    pub fn mat_sum(&self) -> Dec {
        let mut acc = Dec::zero();
        for k in 0..self.rows {
            acc = &acc + &self.row_sum(k);
        }
        acc
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Dec {
        let mut m = Dec::zero();
        for v in &self.data {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn truncate_entries(&self, dp: i64) -> DMat {
        DMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).truncate(dp))
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_f64()).collect())
            .collect()
    }
}

/// Row-major matrix of intervals (validated enclosures of a real matrix).
#[derive(Clone, Debug)]
pub struct IMat {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IMat {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Interval) -> IMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IMat { rows, cols, data }
    }

    pub fn from_dmat(m: &DMat) -> IMat {
        IMat::from_fn(m.rows(), m.cols(), |i, j| Interval::point(m.get(i, j).clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Interval {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add(&self, other: &IMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IMat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).add(other.get(i, j)))
    }

    pub fn sub_dmat(&self, other: &DMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows(), other.cols()));
        IMat::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).sub(&Interval::point(other.get(i, j).clone()))
        })
    }

    /// Exact matrix times interval matrix.
    pub fn dmat_mul(left: &DMat, right: &IMat) -> IMat {
        assert_eq!(left.cols(), right.rows);
        IMat::from_fn(left.rows(), right.cols, |i, j| {
            let mut acc = Interval::point(Dec::zero());
            for k in 0..left.cols() {
                acc = acc.add(&right.get(k, j).mul_scalar(left.get(i, k)));
            }
            acc
        })
    }

    /// Interval matrix times exact matrix.
    pub fn mul_dmat(&self, right: &DMat) -> IMat {
        assert_eq!(self.cols, right.rows());
        IMat::from_fn(self.rows, right.cols(), |i, j| {
            let mut acc = Interval::point(Dec::zero());
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul_scalar(right.get(k, j)));
            }
            acc
        })
    }

    /// Upper bound on the absolute row sum of any real matrix enclosed here.
    pub fn row_abs_sum_ub(&self, k: usize) -> Dec {
        let mut acc = Dec::zero();
        for j in 0..self.cols {
            acc = &acc + &self.get(k, j).abs_ub();
        }
        acc
    }

    /// Upper bound on the sum of all absolute entries.
    pub fn mat_abs_sum_ub(&self) -> Dec {
        let mut acc = Dec::zero();
        for k in 0..self.rows {
            acc = &acc + &self.row_abs_sum_ub(k);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn di(v: i64) -> Dec {
        Dec::from_int(v)
    }

    #[test]
    fn row_and_mat_sums() {
        let m = DMat::from_fn(2, 2, |i, j| di([[1, -2], [3, 4]][i][j]));
        assert_eq!(m.row_sum(0), di(3));
        assert_eq!(m.row_sum(1), di(7));
        assert_eq!(m.mat_sum(), di(10));
        assert_eq!(DMat::identity(5).mat_sum(), di(5));
    }

    #[test]
    fn submultiplicative_sums() {
        // matSum(AB) <= matSum(A) matSum(B), rowSum(AB)_k <= rowSum(A)_k matSum(B)
        let mut seed = 77u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 40) as i64 % 19) - 9
        };
        for _ in 0..100 {
            let vals: Vec<i64> = (0..18).map(|_| next()).collect();
            let a = DMat::from_fn(3, 3, |i, j| di(vals[i * 3 + j]));
            let b = DMat::from_fn(3, 3, |i, j| di(vals[9 + i * 3 + j]));
            let c = a.mul(&b);
            assert!(c.mat_sum() <= &a.mat_sum() * &b.mat_sum());
            for k in 0..3 {
                assert!(c.row_sum(k) <= &a.row_sum(k) * &b.mat_sum());
            }
        }
    }

    #[test]
    fn interval_products_enclose_point_products() {
        let a = DMat::from_fn(2, 2, |i, j| di([[2, -1], [0, 3]][i][j]));
        let b = DMat::from_fn(2, 2, |i, j| di([[1, 1], [4, -2]][i][j]));
        let ib = IMat::from_dmat(&b);
        let prod = IMat::dmat_mul(&a, &ib);
        let exact = a.mul(&b);
        for i in 0..2 {
            for j in 0..2 {
                assert!(prod.get(i, j).contains(exact.get(i, j)));
            }
        }
    }
}
