//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{CcError, Result};

/// Counts `(n₀, n₊, n₋)` of zero, positive and negative eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InertiaTriple {
    pub n0: usize,
    pub n_plus: usize,
    pub n_minus: usize,
}

impl InertiaTriple {
    pub const fn new(n0: usize, n_plus: usize, n_minus: usize) -> Self {
        InertiaTriple { n0, n_plus, n_minus }
    }

    pub fn dim(&self) -> usize {
        self.n0 + self.n_plus + self.n_minus
    }

    pub fn from_eigenvalues(eigs: &[f64], tol_zero: f64) -> Self {
        let mut t = InertiaTriple::new(0, 0, 0);
        for &e in eigs {
            if e.abs() < tol_zero {
                t.n0 += 1;
            } else if e > 0.0 {
                t.n_plus += 1;
            } else {
                t.n_minus += 1;
            }
        }
        t
    }
}

impl std::ops::Add for InertiaTriple {
    type Output = InertiaTriple;
    fn add(self, o: InertiaTriple) -> InertiaTriple {
        InertiaTriple::new(self.n0 + o.n0, self.n_plus + o.n_plus, self.n_minus + o.n_minus)
    }
}

impl std::fmt::Display for InertiaTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.n0, self.n_plus, self.n_minus)
    }
}

/// Eigenvalues of a symmetric matrix, ascending. The input is symmetrized first.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(m)?.0)
}

/// Ascending eigenvalues with matching unit eigenvectors as columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !m.is_square() {
        return Err(CcError::Eigen(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(CcError::Eigen("non-finite matrix entry".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or_else(|| CcError::Eigen("symmetric QR iteration did not converge".into()))?;
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok((vals, vecs))
}

pub fn spectral_radius(eigs: &[f64]) -> f64 {
    eigs.iter().fold(0.0, |a, e| a.max(e.abs()))
}

/// Orthonormal basis (as columns) of the Euclidean complement of `span(vs)` in `R^dim`.
///
/// Vectors in `vs` that are numerically dependent on earlier ones are skipped.
pub fn orthonormal_complement(vs: &[DVector<f64>], dim: usize) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let push_if_new = |v: &DVector<f64>, basis: &mut Vec<DVector<f64>>| -> bool {
        let scale = v.norm();
        if scale == 0.0 {
            return false;
        }
        let mut w = v / scale;
        for _ in 0..2 {
            for b in basis.iter() {
                let p = b.dot(&w);
                w -= b * p;
            }
        }
        let n = w.norm();
        if n > 1e-8 {
            basis.push(w / n);
            true
        } else {
            false
        }
    };
    for v in vs {
        push_if_new(v, &mut basis);
    }
    let k = basis.len();
    let mut out = Vec::with_capacity(dim - k);
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let unit = DVector::from_fn(dim, |r, _| if r == e { 1.0 } else { 0.0 });
        if push_if_new(&unit, &mut basis) {
            out.push(basis.last().expect("just pushed").clone());
        }
    }
    DMatrix::from_columns(&out)
}

/// `Qᵀ H Q`.
pub fn restrict(h: &DMatrix<f64>, q: &DMatrix<f64>) -> DMatrix<f64> {
    q.transpose() * h * q
}

/// Minimum-norm least-squares solution of `J x = r` via the SVD.
pub fn pinv_solve(j: &DMatrix<f64>, r: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(r, rcond * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| CcError::Eigen(format!("SVD solve: {e}")))
}

/// Numerical rank with relative threshold `rtol`.
pub fn rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rtol * smax).count()
}
