//! The free and interacting supersymmetric oscillators.
//!
//! The interacting model is the restricted polynomial family
//! `H = F·a + G·b` with `F = ω₁a†` and `G = ω₂b† + α₂a†b† + α₂ab†`, i.e.
//!
//! ```text
//! H = ω₁a†a + ω₂b†b + α₂(a† + a)b†b,   ω₂ = (ω₁² + α₂²)/ω₁,
//! ```
//!
//! with supercharges `G_S = a†·b·exp[(α₂/ω₁)(a† − a)]` and `G_S†`. All
//! Hamiltonians are normal-ordered, so the supersymmetric ground energy is 0.

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraReport;
use crate::error::{Error, Result};
use crate::fock::{
    boson_annihilation, displacement_factor, displacement_report, fermion_annihilation, lift_boson,
    lift_fermion, FockSpaceConfig,
};
use crate::linalg::{c, cluster_levels, compress, hermitian_eigen, spectral_norm, CMatrix};

/// Tolerance for the model-level identities (`[H, G_S]`, `H = ω₁{G_S, G_S†}`).
pub const MODEL_TOLERANCE: f64 = 1e-9;

/// Relative tolerance (in units of ω₁) for grouping degenerate levels.
pub const LEVEL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega1: f64,
    pub alpha2: f64,
    pub omega2: f64,
    pub alpha1: f64,
}

impl ModelParams {
    /// Supersymmetric parameters: `ω₂ = (ω₁² + α₂²)/ω₁`, `α₁ = −α₂`.
    pub fn new(omega1: f64, alpha2: f64) -> Result<Self> {
        check_omega1(omega1)?;
        if !alpha2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha2 must be finite, got {alpha2}"
            )));
        }
        Ok(ModelParams {
            omega1,
            alpha2,
            omega2: (omega1 * omega1 + alpha2 * alpha2) / omega1,
            alpha1: -alpha2,
        })
    }

    /// Parameters with a freely chosen `ω₂`, for negative tests.
    pub fn detuned(omega1: f64, alpha2: f64, omega2: f64) -> Result<Self> {
        let mut p = Self::new(omega1, alpha2)?;
        if !(omega2.is_finite() && omega2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega2 must be positive, got {omega2}"
            )));
        }
        p.omega2 = omega2;
        Ok(p)
    }

    /// Whether `ω₂ω₁ = ω₁² + α₂²` holds to 1e-12 relative.
    pub fn is_supersymmetric(&self) -> bool {
        let lhs = self.omega2 * self.omega1;
        let rhs = self.omega1 * self.omega1 + self.alpha2 * self.alpha2;
        (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE)
    }

    /// Displacement amplitude `α₂/ω₁` dressing the supercharge.
    pub fn dressing(&self) -> f64 {
        self.alpha2 / self.omega1
    }
}

fn check_omega1(omega1: f64) -> Result<()> {
    if !(omega1.is_finite() && omega1 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "omega1 must be positive, got {omega1}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySolution {
    pub omega1_minus: f64,
    pub omega1_plus: f64,
    /// `ξ = ω₂ − 2α₂`.
    pub xi: f64,
    pub degenerate: bool,
}

/// Bosonic frequencies `ω₁±` for which `(ω₁² + α₂²)/ω₁ = ω₂`.
///
/// These are the roots of `x² − ω₂x + α₂² = 0`. The larger root is taken from
/// the quadratic formula and the smaller one from `ω₁₋ω₁₊ = α₂²` to avoid
/// cancellation.
pub fn solve_frequencies(omega2: f64, alpha2: f64) -> Result<FrequencySolution> {
    if !(omega2.is_finite() && omega2 > 0.0) || !alpha2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite omega2 > 0 and finite alpha2, got ({omega2}, {alpha2})"
        )));
    }
    let bound = 2.0 * alpha2.abs();
    let degenerate = (omega2 - bound).abs() <= 1e-12 * omega2;
    if omega2 < bound && !degenerate {
        return Err(Error::ComplexRoots { omega2, bound });
    }
    let (minus, plus) = if degenerate {
        (0.5 * omega2, 0.5 * omega2)
    } else {
        let disc = ((omega2 - bound) * (omega2 + bound)).sqrt();
        let plus = 0.5 * (omega2 + disc);
        (alpha2 * alpha2 / plus, plus)
    };
    Ok(FrequencySolution {
        omega1_minus: minus,
        omega1_plus: plus,
        xi: omega2 - 2.0 * alpha2,
        degenerate,
    })
}

/// Hamiltonian, its free/interaction split and the supercharges, as dense
/// matrices on the single (undoubled) space.
#[derive(Clone, Debug)]
pub struct HamiltonianBundle {
    pub h: CMatrix,
    pub h0: CMatrix,
    pub hint: CMatrix,
    pub g_s: CMatrix,
    pub g_s_dag: CMatrix,
    pub params: ModelParams,
    pub space: FockSpaceConfig,
}

fn assemble(params: ModelParams, cfg: &FockSpaceConfig) -> Result<HamiltonianBundle> {
    let lambda = params.dressing();
    let space = cfg.as_single().with_dressing_guard(lambda)?;
    let a_f = boson_annihilation(space.boson_cutoff);
    let a = lift_boson(&a_f);
    let a_dag = a.adjoint();
    let b = lift_fermion(&fermion_annihilation(), &space);
    let b_dag = b.adjoint();
    let n_b = &a_dag * &a;
    let n_f = &b_dag * &b;

    let h0 = &n_b * c(params.omega1) + &n_f * c(params.omega2);
    let hint = (&a_dag + &a) * &n_f * c(params.alpha2);
    let h = &h0 + &hint;

    let dressing = if lambda == 0.0 {
        CMatrix::identity(space.single_dim(), space.single_dim())
    } else {
        let d = displacement_factor(space.boson_cutoff, lambda)?;
        let rep = displacement_report(&d, &space);
        if rep.deviation() > space.tail_tolerance {
            return Err(Error::InsufficientCutoff {
                cutoff: space.boson_cutoff,
                detail: format!("supercharge dressing deviates by {:.3e}", rep.deviation()),
            });
        }
        lift_boson(&d)
    };
    let g_s = &a_dag * &b * dressing;
    let g_s_dag = g_s.adjoint();
    Ok(HamiltonianBundle {
        h,
        h0,
        hint,
        g_s,
        g_s_dag,
        params,
        space,
    })
}

/// `H = ω₁(a†a + b†b)`, `G_S = a†b`.
pub fn build_free_susy_oscillator(omega1: f64, cfg: &FockSpaceConfig) -> Result<HamiltonianBundle> {
    cfg.validate()?;
    assemble(ModelParams::new(omega1, 0.0)?, cfg)
}

/// The interacting oscillator for `params` (which may be detuned).
///
/// The guard band of the returned bundle's space is widened so that the
/// displacement dressing of `G_S` is certified on the guarded subspace.
pub fn build_interacting_model(
    params: ModelParams,
    cfg: &FockSpaceConfig,
) -> Result<HamiltonianBundle> {
    cfg.validate()?;
    check_omega1(params.omega1)?;
    assemble(params, cfg)
}

impl HamiltonianBundle {
    fn guarded(&self, m: &CMatrix) -> f64 {
        spectral_norm(&compress(m, &self.space.guarded_single_indices()))
    }

    /// `‖H − ω₁{G_S, G_S†}‖` on the guarded subspace.
    pub fn supercharge_identity(&self) -> AlgebraReport {
        let anti = &self.g_s * &self.g_s_dag + &self.g_s_dag * &self.g_s;
        let dev = self.guarded(&(&self.h - anti * c(self.params.omega1)));
        AlgebraReport::new(
            "H = ω₁{G_S, G_S†}",
            dev,
            MODEL_TOLERANCE,
            self.space.guarded_dim(),
        )
    }

    /// `‖G_S²‖` and `‖(G_S†)²‖`, largest of the two.
    pub fn nilpotency(&self) -> AlgebraReport {
        let dev = self
            .guarded(&(&self.g_s * &self.g_s))
            .max(self.guarded(&(&self.g_s_dag * &self.g_s_dag)));
        AlgebraReport::new("G_S² = 0", dev, MODEL_TOLERANCE, self.space.guarded_dim())
    }

    /// `‖H − H₀ − H_int‖` over the whole space.
    pub fn split_residual(&self) -> f64 {
        crate::linalg::max_abs(&(&self.h - &self.h0 - &self.hint))
    }

    pub fn summary(&self, k: usize) -> Result<BundleSummary> {
        let levels = spectrum(self, k)?;
        Ok(BundleSummary {
            params: self.params,
            boson_cutoff: self.space.boson_cutoff,
            guard_band: self.space.guard_band,
            ground_energy: levels.first().map(|l| l.0).unwrap_or(0.0),
            levels,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub params: ModelParams,
    pub boson_cutoff: usize,
    pub guard_band: usize,
    pub ground_energy: f64,
    pub levels: Vec<(f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusyExactness {
    /// `‖[H, G_S]‖` on the guarded subspace.
    pub commutator: AlgebraReport,
    /// Largest of `‖G_S v‖`, `‖G_S† v‖` over the numerical ground space.
    pub annihilation: AlgebraReport,
    pub ground_energy: f64,
    pub ground_multiplicity: usize,
}

impl SusyExactness {
    pub fn passed(&self) -> bool {
        self.commutator.passed && self.annihilation.passed
    }
}

/// Certify unbroken supersymmetry: `[H, G_S] = 0` and both supercharges
/// annihilate the whole lowest eigenspace.
pub fn check_susy_exactness(bundle: &HamiltonianBundle) -> Result<SusyExactness> {
    let comm = &bundle.h * &bundle.g_s - &bundle.g_s * &bundle.h;
    let commutator = AlgebraReport::new(
        "[H, G_S] = 0",
        bundle.guarded(&comm),
        MODEL_TOLERANCE,
        bundle.space.guarded_dim(),
    );

    let (values, vectors) = hermitian_eigen(&bundle.h)?;
    let ground = values[0];
    let tol = LEVEL_TOLERANCE * bundle.params.omega1;
    let ground_cols: Vec<usize> = (0..values.len())
        .filter(|&k| values[k] - ground <= tol)
        .collect();
    let mut worst: f64 = 0.0;
    for &k in &ground_cols {
        let v = vectors.column(k);
        worst = worst
            .max((&bundle.g_s * v).norm())
            .max((&bundle.g_s_dag * v).norm());
    }
    let annihilation = AlgebraReport::new(
        "G_S|0⟩ = G_S†|0⟩ = 0",
        worst,
        MODEL_TOLERANCE,
        ground_cols.len(),
    );
    Ok(SusyExactness {
        commutator,
        annihilation,
        ground_energy: ground,
        ground_multiplicity: ground_cols.len(),
    })
}

/// Lowest `k` eigenvalues of a Hermitian matrix grouped into levels.
pub fn levels(h: &CMatrix, k: usize, tol: f64) -> Result<Vec<(f64, usize)>> {
    let (values, _) = hermitian_eigen(h)?;
    if k > values.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds dimension {}",
            values.len()
        )));
    }
    Ok(cluster_levels(&values[..k], tol))
}

/// Lowest `k` levels of `H` with multiplicities, clustered at `1e-8·ω₁`.
pub fn spectrum(bundle: &HamiltonianBundle, k: usize) -> Result<Vec<(f64, usize)>> {
    let guarded = bundle.space.guarded_dim();
    if k > guarded {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the guarded subspace dimension {guarded}"
        )));
    }
    levels(&bundle.h, k, LEVEL_TOLERANCE * bundle.params.omega1)
}

/// Eigenvalues of `H` lying below `ω₁·(N_b − g)`, where truncation cannot
/// reach them.
pub fn guarded_eigenvalues(bundle: &HamiltonianBundle) -> Result<Vec<f64>> {
    let (values, _) = hermitian_eigen(&bundle.h)?;
    let ceiling = bundle.params.omega1 * bundle.space.guarded_max_level() as f64;
    Ok(values.into_iter().filter(|&v| v <= ceiling).collect())
}
