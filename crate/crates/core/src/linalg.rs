//! Dense complex linear-algebra helpers shared by the operator modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest singular value, from the top eigenvalue of `m† m`.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    top.max(0.0).sqrt()
}

/// Compression `P m P` onto the coordinate subspace spanned by `indices`.
pub fn compress(m: &CMatrix, indices: &[usize]) -> CMatrix {
    CMatrix::from_fn(indices.len(), indices.len(), |i, j| {
        m[(indices[i], indices[j])]
    })
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `m - m†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !all_finite(m) {
        return Err(Error::NonFinite("hermitian eigensolver input"));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or(Error::NonConvergence("hermitian eigensolver"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Group sorted eigenvalues into levels whose members lie within `tol` of the
/// first member of the level.
pub fn cluster_levels(sorted: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut levels: Vec<(f64, usize, f64)> = Vec::new();
    for &v in sorted {
        match levels.last_mut() {
            Some((sum, count, first)) if (v - *first).abs() <= tol => {
                *sum += v;
                *count += 1;
            }
            _ => levels.push((v, 1, v)),
        }
    }
    levels
        .into_iter()
        .map(|(sum, count, _)| (sum / count as f64, count))
        .collect()
}

pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}
