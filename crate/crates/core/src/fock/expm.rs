//! Matrix exponentials.
//!
//! Two independent routes are provided for dense matrices: a spectral route
//! for Hermitian or anti-Hermitian input (`U e^Λ U†`) and scaling-and-squaring
//! with a Padé approximant for general input. Large doubled-space generators
//! never get exponentiated densely; [`expm_action`] applies `exp(X)` to a
//! state vector with a scaled truncated Taylor series instead.

use num_complex::Complex64;

use super::kron::CompiledKron;
use crate::error::{Error, Result};
use crate::linalg::{
    all_finite, hermitian_eigen, hermiticity_deviation, max_abs, CMatrix, CVector,
};

/// Structure flag selecting the exponential route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpStructure {
    Hermitian,
    AntiHermitian,
    General,
}

const STRUCTURE_TOL: f64 = 1e-12;

/// `exp(m)`, routed by `structure`.
///
/// (Anti-)Hermitian input goes through the eigendecomposition; the flag is
/// checked against the matrix and a mismatch is an error rather than a silent
/// fallback.
pub fn matrix_exponential(m: &CMatrix, structure: ExpStructure) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let scale = max_abs(m).max(1.0);
    let out = match structure {
        ExpStructure::Hermitian => {
            if hermiticity_deviation(m) > STRUCTURE_TOL * scale {
                return Err(Error::StructureMismatch("Hermitian"));
            }
            spectral_exp(m, |lambda| Complex64::new(lambda.exp(), 0.0))?
        }
        ExpStructure::AntiHermitian => {
            // m = -iK with K = i m Hermitian, so exp(m) = U e^{-iλ} U†.
            let k = m * Complex64::i();
            if hermiticity_deviation(&k) > STRUCTURE_TOL * scale {
                return Err(Error::StructureMismatch("anti-Hermitian"));
            }
            spectral_exp(&k, |lambda| Complex64::new(0.0, -lambda).exp())?
        }
        ExpStructure::General => pade_exponential(m)?,
    };
    if !all_finite(&out) {
        return Err(Error::NonFinite("matrix exponential output"));
    }
    Ok(out)
}

/// Scaling-and-squaring with a Padé approximant (nalgebra's implementation).
pub fn pade_exponential(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let out = m.exp();
    if !all_finite(&out) {
        return Err(Error::NonConvergence("scaling-and-squaring exponential"));
    }
    Ok(out)
}

fn spectral_exp(h: &CMatrix, f: impl Fn(f64) -> Complex64) -> Result<CMatrix> {
    // Symmetrize first so roundoff in the input cannot leak into the solver.
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let (values, vectors) = hermitian_eigen(&sym)?;
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
    }
    Ok(scaled * vectors.adjoint())
}

/// Per-step norm bound for the Taylor series in [`expm_action`].
const TAYLOR_STEP_NORM: f64 = 6.0;
const TAYLOR_MAX_TERMS: usize = 80;

/// `exp(t X) v` for a Kronecker-factored operator `X`, without forming the
/// matrix exponential.
///
/// The interval is split into `s` sub-steps with `|t|·‖X‖₁/s ≤ 6` and each
/// sub-step sums the Taylor series until the next term is below machine
/// precision relative to the running sum.
pub fn expm_action(op: &CompiledKron, t: f64, v: &CVector) -> Result<CVector> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: v.len(),
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("exponential action time"));
    }
    let norm = op.one_norm_bound() * t.abs();
    if norm == 0.0 {
        return Ok(v.clone());
    }
    let steps = (norm / TAYLOR_STEP_NORM).ceil().max(1.0) as usize;
    let h = Complex64::new(t / steps as f64, 0.0);

    let mut state: Vec<Complex64> = v.iter().cloned().collect();
    let mut term = vec![Complex64::new(0.0, 0.0); state.len()];
    let mut next = vec![Complex64::new(0.0, 0.0); state.len()];
    for _ in 0..steps {
        term.copy_from_slice(&state);
        let mut converged = false;
        for k in 1..=TAYLOR_MAX_TERMS {
            op.apply_into(&term, &mut next);
            let factor = h / k as f64;
            let mut term_norm = 0.0;
            for (t_i, n_i) in term.iter_mut().zip(next.iter()) {
                *t_i = n_i * factor;
                term_norm += t_i.norm_sqr();
            }
            let mut sum_norm = 0.0;
            for (s_i, t_i) in state.iter_mut().zip(term.iter()) {
                *s_i += t_i;
                sum_norm += s_i.norm_sqr();
            }
            if term_norm.sqrt() <= f64::EPSILON * 0.5 * sum_norm.sqrt() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence("Taylor exponential action"));
        }
        if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("exponential action"));
        }
    }
    Ok(CVector::from_vec(state))
}
