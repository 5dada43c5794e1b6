//! Operators on the doubled space kept in Kronecker-factored form.
//!
//! A doubled-space operator is stored as `Σ_k L_k ⊗ R_k`, where `L_k` acts on
//! the physical (boson ⊗ fermion) factor and `R_k` on the tilde copy. States
//! on the doubled space are flattened row-major, `ψ[i·d + j] = Ψ[i, j]`, so
//! `(L ⊗ R) ψ` corresponds to `L Ψ Rᵀ` and never needs the `d² × d²` matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};

/// Largest composite dimension [`KronOperator::to_dense`] will materialize.
pub const DENSE_LIMIT: usize = 2500;

#[derive(Clone, Debug)]
pub struct KronTerm {
    pub left: CMatrix,
    pub right: CMatrix,
}

#[derive(Clone, Debug)]
pub struct KronOperator {
    single_dim: usize,
    terms: Vec<KronTerm>,
}

impl KronOperator {
    pub fn zero(single_dim: usize) -> Self {
        KronOperator {
            single_dim,
            terms: Vec::new(),
        }
    }

    pub fn identity(single_dim: usize) -> Self {
        Self::from_term(
            CMatrix::identity(single_dim, single_dim),
            CMatrix::identity(single_dim, single_dim),
        )
    }

    /// `left ⊗ right`; both factors must be square and of equal size.
    pub fn from_term(left: CMatrix, right: CMatrix) -> Self {
        assert!(left.is_square() && right.is_square() && left.nrows() == right.nrows());
        KronOperator {
            single_dim: left.nrows(),
            terms: vec![KronTerm { left, right }],
        }
    }

    pub fn single_dim(&self) -> usize {
        self.single_dim
    }

    pub fn dim(&self) -> usize {
        self.single_dim * self.single_dim
    }

    pub fn terms(&self) -> &[KronTerm] {
        &self.terms
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.single_dim != other.single_dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(KronOperator {
            single_dim: self.single_dim,
            terms,
        }
        .pruned())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        KronOperator {
            single_dim: self.single_dim,
            terms: self
                .terms
                .iter()
                .map(|t| KronTerm {
                    left: &t.left * s,
                    right: t.right.clone(),
                })
                .collect(),
        }
        .pruned()
    }

    /// Operator product, `(L₁ ⊗ R₁)(L₂ ⊗ R₂) = L₁L₂ ⊗ R₁R₂` term by term.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(KronTerm {
                    left: &a.left * &b.left,
                    right: &a.right * &b.right,
                });
            }
        }
        Ok(KronOperator {
            single_dim: self.single_dim,
            terms,
        }
        .pruned())
    }

    pub fn adjoint(&self) -> Self {
        KronOperator {
            single_dim: self.single_dim,
            terms: self
                .terms
                .iter()
                .map(|t| KronTerm {
                    left: t.left.adjoint(),
                    right: t.right.adjoint(),
                })
                .collect(),
        }
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|t| {
            t.left.iter().any(|z| *z != c(0.0)) && t.right.iter().any(|z| *z != c(0.0))
        });
        self
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let n = self.dim();
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim: n,
                limit: DENSE_LIMIT,
            });
        }
        let mut out = CMatrix::zeros(n, n);
        for t in &self.terms {
            out += t.left.kronecker(&t.right);
        }
        Ok(out)
    }

    pub fn compile(&self) -> CompiledKron {
        CompiledKron {
            single_dim: self.single_dim,
            terms: self
                .terms
                .iter()
                .map(|t| (Csr::from_dense(&t.left), Csr::from_dense(&t.right)))
                .collect(),
        }
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let compiled = self.compile();
        let mut out = vec![c(0.0); v.len()];
        compiled.apply_into(v.as_slice(), &mut out);
        Ok(CVector::from_vec(out))
    }
}

#[derive(Clone, Debug)]
struct Csr {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<Complex64>,
    one_norm: f64,
}

impl Csr {
    fn from_dense(m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut col_sums = vec![0.0; m.ncols()];
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z != c(0.0) {
                    col.push(j);
                    val.push(z);
                    col_sums[j] += z.norm();
                }
            }
            row_ptr.push(col.len());
        }
        Csr {
            row_ptr,
            col,
            val,
            one_norm: col_sums.into_iter().fold(0.0, f64::max),
        }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col[lo..hi]
            .iter()
            .cloned()
            .zip(self.val[lo..hi].iter().cloned())
    }
}

/// A [`KronOperator`] with sparse factors, for repeated application.
#[derive(Clone, Debug)]
pub struct CompiledKron {
    single_dim: usize,
    terms: Vec<(Csr, Csr)>,
}

impl CompiledKron {
    pub fn dim(&self) -> usize {
        self.single_dim * self.single_dim
    }

    /// Upper bound on the induced 1-norm: `Σ ‖L‖₁ ‖R‖₁`.
    pub fn one_norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|(l, r)| l.one_norm * r.one_norm)
            .sum()
    }

    /// `out = Σ (L ⊗ R) psi`, overwriting `out`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let d = self.single_dim;
        debug_assert_eq!(psi.len(), d * d);
        out.iter_mut().for_each(|z| *z = c(0.0));
        let mut tmp = vec![c(0.0); d * d];
        for (left, right) in &self.terms {
            // tmp = Ψ Rᵀ, row by row.
            for i in 0..d {
                let psi_row = &psi[i * d..(i + 1) * d];
                let tmp_row = &mut tmp[i * d..(i + 1) * d];
                for (j, slot) in tmp_row.iter_mut().enumerate() {
                    let mut acc = c(0.0);
                    for (k, r) in right.row(j) {
                        acc += r * psi_row[k];
                    }
                    *slot = acc;
                }
            }
            // out += L tmp.
            for i in 0..d {
                let out_row = &mut out[i * d..(i + 1) * d];
                for (k, l) in left.row(i) {
                    let src = &tmp[k * d..(k + 1) * d];
                    for (o, s) in out_row.iter_mut().zip(src.iter()) {
                        *o += l * s;
                    }
                }
            }
        }
    }
}
