//! Dense eigenvalue routines and the spectral stability thresholds.
//!
//! `Delta^{-1} A2` is never diagonalized directly: it is similar to the
//! symmetric `Delta^{-1/2} A2 Delta^{-1/2}`, whose spectrum and eigenvectors
//! come from the Jacobi solver in [`jacobi`]. Nonsymmetric Jacobians go
//! through a real Schur decomposition.

pub mod jacobi;

use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph2;

pub use jacobi::{jacobi_eigen, SymmetricEigen};

/// Gap below which the leading eigenvalue is treated as repeated.
pub const SIMPLE_GAP: f64 = 1e-9;

/// Largest matrix accepted by [`general_eigenvalues`].
pub const DENSE_LIMIT: usize = 200;

const SYMMETRY_TOL: f64 = 1e-12;
const REAL_TOL: f64 = 1e-9;

/// Eigenvalues sorted by real part (then imaginary part), ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex<f64>>,
    /// Every imaginary part is below 1e-9 in magnitude.
    pub real_flag: bool,
}

impl Spectrum {
    fn from_unsorted(mut eigenvalues: Vec<Complex<f64>>) -> Self {
        eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let real_flag = eigenvalues.iter().all(|z| z.im.abs() < REAL_TOL);
        Self {
            eigenvalues,
            real_flag,
        }
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.last().map_or(f64::NEG_INFINITY, |z| z.re)
    }
}

/// Infinity norm (max absolute row sum).
pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension {
            what: "matrix columns".into(),
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let deviation = inf_norm(&(m - m.transpose()));
    if deviation >= SYMMETRY_TOL * inf_norm(m).max(1.0) {
        return Err(Error::NotSymmetric { deviation });
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric matrix (ascending eigenvalues).
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    check_symmetric(m)?;
    jacobi_eigen(m)
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Spectrum> {
    let eig = symmetric_eigen(m)?;
    Ok(Spectrum {
        eigenvalues: eig.values.iter().map(|&v| Complex::new(v, 0.0)).collect(),
        real_flag: true,
    })
}

/// Eigenvalues of an arbitrary square matrix via Hessenberg reduction and
/// shifted QR (real Schur form).
pub fn general_eigenvalues(m: &DMatrix<f64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Dimension {
            what: "matrix columns".into(),
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let n = m.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_LIMIT,
        });
    }
    const MAX_ITER: usize = 10_000;
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, MAX_ITER)
        .ok_or(Error::Convergence {
            iterations: MAX_ITER,
        })?;
    Ok(Spectrum::from_unsorted(
        schur.complex_eigenvalues().iter().copied().collect(),
    ))
}

/// `Delta^{-1/2} A2 Delta^{-1/2}`, similar to `Delta^{-1} A2`.
pub fn symmetrized_adjacency(g: &Hypergraph2) -> DMatrix<f64> {
    let a = g.a2().matrix();
    let d = g.degrees();
    DMatrix::from_fn(g.n(), g.n(), |i, j| a[(i, j)] / (d[i] * d[j]).sqrt())
}

/// Eigenvalues of `Delta^{-1} A2`, ascending.
pub fn normalized_adjacency_eigenvalues(g: &Hypergraph2) -> Result<DVector<f64>> {
    Ok(jacobi_eigen(&symmetrized_adjacency(g))?.values)
}

/// Leading eigenvalue of `Delta^{-1} A2` with its right (`v`) and left (`w`)
/// eigenvectors. `v` has unit Euclidean norm and `w^T v = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub lambda: f64,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
    /// `lambda_n - lambda_{n-1}`.
    pub gap: f64,
}

pub fn perron_pair(g: &Hypergraph2) -> Result<PerronPair> {
    let eig = jacobi_eigen(&symmetrized_adjacency(g))?;
    let n = g.n();
    let lambda = eig.values[n - 1];
    let gap = lambda - eig.values[n - 2];
    if gap < SIMPLE_GAP {
        return Err(Error::Multiplicity { gap });
    }
    let mut u = eig.vectors.column(n - 1).into_owned();
    if u.sum() < 0.0 {
        u = -u;
    }
    let sqrt_d = g.degrees().map(f64::sqrt);
    let v = u.component_div(&sqrt_d);
    let v = &v / v.norm();
    let w = u.component_mul(&sqrt_d);
    let w = &w / w.dot(&v);
    if v.iter().chain(w.iter()).any(|&c| c <= 0.0) {
        return Err(Error::NotPositive);
    }
    Ok(PerronPair { lambda, v, w, gap })
}

/// `H = Delta^{-1} (A2 + [1^T B_1; ...; 1^T B_n])`, row-stochastic.
pub fn h_matrix(g: &Hypergraph2) -> DMatrix<f64> {
    let n = g.n();
    let a = g.a2().matrix();
    let d = g.degrees();
    let col_sums: Vec<DVector<f64>> = g
        .a3()
        .slices()
        .iter()
        .map(|b| DVector::from_iterator(n, b.column_iter().map(|c| c.sum())))
        .collect();
    DMatrix::from_fn(n, n, |i, j| (a[(i, j)] + col_sums[i][j]) / d[i])
}

/// Stability thresholds of the origin and of the nontrivial branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Local stability of the origin is lost at `1 / lambda_n(Delta^{-1} A2)`.
    pub pi1: f64,
    /// `1 / lambda_{n-1}(Delta^{-1} A2)`, or `+inf` when that eigenvalue is not positive.
    pub pi2: f64,
    /// Conservative global-stability bound `1 / lambda_n((H + H^T)/2)`.
    pub pi_tilde1: f64,
    /// Fold location under proportional influence.
    pub pi1_star: Option<f64>,
}

impl Thresholds {
    /// `pi_tilde1 <= 1 <= pi1_star <= pi1`, each up to `tol`.
    pub fn ordering_holds(&self, tol: f64) -> bool {
        let outer = self.pi_tilde1 <= 1.0 + tol && 1.0 <= self.pi1 + tol;
        match self.pi1_star {
            Some(star) => outer && 1.0 <= star + tol && star <= self.pi1 + tol,
            None => outer,
        }
    }

    /// Flat `key=value` block; `+inf` is written as `inf`.
    pub fn to_kv(&self) -> String {
        let fmt = |v: f64| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v}")
            }
        };
        let mut out = String::new();
        writeln!(out, "pi1={}", fmt(self.pi1)).unwrap();
        writeln!(out, "pi2={}", fmt(self.pi2)).unwrap();
        writeln!(out, "pi_tilde1={}", fmt(self.pi_tilde1)).unwrap();
        if let Some(star) = self.pi1_star {
            writeln!(out, "pi1_star={}", fmt(star)).unwrap();
        }
        out
    }
}

/// Computes `pi1`, `pi2` and `pi_tilde1`; `pi1_star` is left empty (see
/// [`crate::equilibria::pi1_star`]).
pub fn thresholds(g: &Hypergraph2) -> Result<Thresholds> {
    let n = g.n();
    let values = normalized_adjacency_eigenvalues(g)?;
    let (top, second) = (values[n - 1], values[n - 2]);
    if top - second < SIMPLE_GAP {
        return Err(Error::Multiplicity { gap: top - second });
    }
    let h = h_matrix(g);
    let sym = (&h + h.transpose()) * 0.5;
    let h_top = jacobi_eigen(&sym)?.values[n - 1];
    Ok(Thresholds {
        pi1: 1.0 / top,
        pi2: if second > 0.0 {
            1.0 / second
        } else {
            f64::INFINITY
        },
        pi_tilde1: 1.0 / h_top,
        pi1_star: None,
    })
}
