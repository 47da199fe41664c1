//! Dense matrix types shared by the graph, spectral and walk modules.
//!
//! [`SymmetricMatrix`] stores a single triangle, so symmetry holds by
//! construction. Products and propagators use `nalgebra` dense matrices.

use nalgebra::{Complex, DMatrix};

pub type Complex64 = Complex<f64>;
pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Real symmetric matrix, packed upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    packed: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            packed: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds from a dense matrix, reading the upper triangle only.
    pub fn from_upper(dense: &RealMatrix) -> Self {
        assert!(dense.is_square(), "matrix must be square");
        let n = dense.nrows();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, dense[(i, j)]);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        // rows 0..r hold n, n-1, ..., n-r+1 entries
        r * self.n - r * (r + 1) / 2 + c
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.offset(i, j);
        self.packed[k] = value;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        let k = self.offset(i, j);
        self.packed[k] += value;
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        SymmetricMatrix {
            n: self.n,
            packed: self
                .packed
                .iter()
                .zip(&other.packed)
                .map(|(x, y)| x + alpha * y)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                sum += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        sum.sqrt()
    }

    pub fn to_dense(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        (0..self.n).map(|j| self.get(i, j)).sum()
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest entry modulus.
pub fn max_abs_complex(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |U U^† - I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint();
    max_abs_complex(&(prod - ComplexMatrix::identity(n, n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_storage_is_symmetric() {
        let mut m = SymmetricMatrix::zeros(4);
        m.set(3, 1, 2.5);
        m.set(0, 0, -1.0);
        assert_eq!(m.get(1, 3), 2.5);
        assert_eq!(m.get(3, 1), 2.5);
        let d = m.to_dense();
        assert_eq!(d, d.transpose());
        assert_eq!(SymmetricMatrix::from_upper(&d), m);
    }

    #[test]
    fn every_slot_is_distinct() {
        let n = 6;
        let mut m = SymmetricMatrix::zeros(n);
        let mut k = 0.0;
        for i in 0..n {
            for j in i..n {
                k += 1.0;
                m.set(i, j, k);
            }
        }
        let mut seen: Vec<f64> = m.packed.clone();
        seen.sort_by(f64::total_cmp);
        seen.dedup();
        assert_eq!(seen.len(), n * (n + 1) / 2);
    }

    #[test]
    fn frobenius_matches_dense() {
        let mut m = SymmetricMatrix::zeros(3);
        m.set(0, 1, 3.0);
        m.set(2, 2, 4.0);
        assert!((m.frobenius_norm() - m.to_dense().norm()).abs() < 1e-14);
    }
}
