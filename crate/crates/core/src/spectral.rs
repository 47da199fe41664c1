//! Symmetric eigendecomposition into spectral projectors.
//!
//! Raw eigenpairs come from cyclic Jacobi rotations. Eigenvalues closer than
//! `cluster_tol * max(1, ||L||_F)` are merged, and each distinct eigenvalue
//! keeps only its orthogonal projector `E_j = sum v v^T`. The propagator
//! `exp(-itL) = sum_j exp(-i mu_j t) E_j` is built from these in
//! [`crate::walk`].
//!
//! [`matrix_exp_oracle`] evaluates `exp(-itH)` by a completely separate route
//! (truncated Taylor series with scaling and squaring) and exists to
//! cross-check the spectral propagator.

use crate::error::{Error, Result};
use crate::matrix::{max_abs, Complex64, ComplexMatrix, RealMatrix, SymmetricMatrix};

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_INT_TOL: f64 = 1e-6;

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    values: Vec<f64>,
    projectors: Vec<RealMatrix>,
    multiplicities: Vec<usize>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Distinct eigenvalues, increasing.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn projectors(&self) -> &[RealMatrix] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `E_j[row][col]` for every distinct eigenvalue, in order.
    pub fn entry_weights(&self, row: usize, col: usize) -> Vec<f64> {
        self.projectors.iter().map(|e| e[(row, col)]).collect()
    }

    /// Worst-case deviations of the four structural identities.
    pub fn check(&self, l: &SymmetricMatrix) -> SpectrumCheck {
        let n = self.n;
        let mut idempotency: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        let mut sum = RealMatrix::zeros(n, n);
        let mut recon = RealMatrix::zeros(n, n);
        for (i, (e, &mu)) in self.projectors.iter().zip(&self.values).enumerate() {
            idempotency = idempotency.max(max_abs(&(e * e - e)));
            for f in &self.projectors[i + 1..] {
                orthogonality = orthogonality.max(max_abs(&(e * f)));
            }
            sum += e;
            recon += e * mu;
        }
        SpectrumCheck {
            idempotency,
            orthogonality,
            completeness: max_abs(&(sum - RealMatrix::identity(n, n))),
            reconstruction: max_abs(&(recon - l.to_dense())),
            reconstruction_scale: self.spectral_radius().max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCheck {
    pub idempotency: f64,
    pub orthogonality: f64,
    pub completeness: f64,
    pub reconstruction: f64,
    pub reconstruction_scale: f64,
}

impl SpectrumCheck {
    pub fn holds(&self) -> bool {
        self.idempotency < 1e-9
            && self.orthogonality < 1e-9
            && self.completeness < 1e-9
            && self.reconstruction < 1e-8 * self.reconstruction_scale
    }
}

/// Raw eigenpairs `(values, vectors)`; eigenvector `k` is column `k`.
/// Order is whatever the rotations leave behind.
pub fn jacobi_eigen(a: &SymmetricMatrix) -> Result<(Vec<f64>, RealMatrix)> {
    let n = a.dim();
    let mut m = a.to_dense();
    let mut v = RealMatrix::identity(n, n);
    let threshold = JACOBI_REL_TOL * a.frobenius_norm();

    let off_norm = |m: &RealMatrix| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * m[(p, q)] * m[(p, q)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&m);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                m[(p, p)] -= t * apq;
                m[(q, q)] += t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = m[(r, p)];
                        let arq = m[(r, q)];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        m[(r, p)] = new_rp;
                        m[(p, r)] = new_rp;
                        m[(r, q)] = new_rq;
                        m[(q, r)] = new_rq;
                    }
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    Ok(((0..n).map(|i| m[(i, i)]).collect(), v))
}

/// Decomposes `l` into distinct eigenvalues and their projectors.
pub fn eigendecompose(l: &SymmetricMatrix, cluster_tol: f64) -> Result<Spectrum> {
    if cluster_tol.is_nan() || cluster_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cluster_tol must be positive, got {cluster_tol}"
        )));
    }
    let n = l.dim();
    let (raw, vecs) = jacobi_eigen(l)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));

    let gap = cluster_tol * l.frobenius_norm().max(1.0);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if raw[k] - raw[*c.last().unwrap()] <= gap => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }

    let mut values = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    for c in clusters {
        values.push(c.iter().map(|&k| raw[k]).sum::<f64>() / c.len() as f64);
        let mut e = RealMatrix::zeros(n, n);
        for &k in &c {
            let col = vecs.column(k);
            e += col * col.transpose();
        }
        projectors.push(e);
        multiplicities.push(c.len());
    }
    Ok(Spectrum {
        n,
        values,
        projectors,
        multiplicities,
    })
}

pub fn is_integral_spectrum(s: &Spectrum, int_tol: f64) -> bool {
    s.values.iter().all(|v| (v - v.round()).abs() <= int_tol)
}

const TAYLOR_DEGREE: u32 = 18;

/// `exp(-i t H)` by scaling and squaring a degree-18 Taylor polynomial.
pub fn matrix_exp_oracle(h: &SymmetricMatrix, t: f64) -> ComplexMatrix {
    let n = h.dim();
    let norm = (t * h.frobenius_norm()).abs();
    let mut squarings = 0u32;
    while norm / 2f64.powi(squarings as i32) > 0.5 {
        squarings += 1;
    }
    let scale = Complex64::new(0.0, -t / 2f64.powi(squarings as i32));
    let b = h.to_complex() * scale;
    let eye = ComplexMatrix::identity(n, n);

    // Horner: I + B/1 (I + B/2 (I + ... (I + B/18)))
    let mut acc = eye.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = &eye + (&b * &acc) / Complex64::new(k as f64, 0.0);
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}
