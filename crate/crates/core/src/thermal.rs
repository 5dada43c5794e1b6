//! Thermo field dynamics: the doubled space, the thermal vacuum and its
//! observables.
//!
//! The thermal vacuum is obtained by rotating the quasiparticle vacuum with
//!
//! ```text
//! −iG = θ_b (a₂†ã₂† − ã₂a₂) + θ_f (b₂†b̃₂† − b̃₂b₂),
//! tanh θ_b = tan θ_f = e^{−βω₁/2},
//! ```
//!
//! the hyperbolic angle on the boson pair giving Bose occupancy and the
//! circular one on the fermion pair giving Fermi occupancy. Traces for the
//! Gibbs oracle and the Witten index are taken on the undoubled space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{canonical_transform, TransformedModes};
use crate::error::{Error, Result};
use crate::fock::{
    boson_level, embed_physical, expm_action, parity, split_parity, FockSpaceConfig, KronOperator,
    KronTerm, ModeOperator, Operator, StateVector, TildeStatistics,
};
use crate::linalg::{c, hermitian_eigen, hermiticity_deviation, max_abs, CMatrix, CVector};
use crate::model::{build_interacting_model, HamiltonianBundle, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    /// Inverse temperature; `f64::INFINITY` selects exact zero temperature.
    pub beta: f64,
    pub omega1: f64,
    pub theta_f: f64,
    pub theta_b: f64,
}

impl ThermalParams {
    pub fn new(beta: f64, omega1: f64) -> Result<Self> {
        if !(omega1.is_finite() && omega1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega1 must be positive, got {omega1}"
            )));
        }
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let x = half_boltzmann(beta, omega1);
        Ok(ThermalParams {
            beta,
            omega1,
            theta_f: x.atan(),
            theta_b: x.atanh(),
        })
    }

    /// From a temperature in units of `ω₁` (Boltzmann constant 1).
    pub fn from_temperature(t_over_omega1: f64, omega1: f64) -> Result<Self> {
        if !(t_over_omega1.is_finite() && t_over_omega1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {t_over_omega1}"
            )));
        }
        Self::new(1.0 / (t_over_omega1 * omega1), omega1)
    }

    pub fn zero_temperature(omega1: f64) -> Result<Self> {
        Self::new(f64::INFINITY, omega1)
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// `βω₁`.
    pub fn reduced_beta(&self) -> f64 {
        self.beta * self.omega1
    }

    /// `e^{−βω₁}`.
    pub fn boltzmann(&self) -> f64 {
        if self.is_zero_temperature() {
            0.0
        } else {
            (-self.reduced_beta()).exp()
        }
    }

    pub fn t_over_omega1(&self) -> f64 {
        1.0 / self.reduced_beta()
    }
}

fn half_boltzmann(beta: f64, omega1: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        (-0.5 * beta * omega1).exp()
    }
}

/// Closed-form thermal vacuum energy `ω₁(e/(1−e) + e/(1+e))`, `e = e^{−βω₁}`.
pub fn closed_form_energy(p: &ThermalParams) -> f64 {
    if p.is_zero_temperature() {
        return 0.0;
    }
    let x = p.reduced_beta();
    p.omega1 * (1.0 / x.exp_m1() + 1.0 / (x.exp() + 1.0))
}

/// Closed-form Witten index `(1−e)/(1+e) = tanh(βω₁/2)`.
pub fn closed_form_witten(p: &ThermalParams) -> f64 {
    if p.is_zero_temperature() {
        return 1.0;
    }
    (0.5 * p.reduced_beta()).tanh()
}

/// Closed-form Goldstino norm `e^{−βω₁/2}/[(1−e)(1+e)]^{1/2}`.
pub fn closed_form_goldstino_norm(p: &ThermalParams) -> f64 {
    if p.is_zero_temperature() {
        return 0.0;
    }
    let x = p.reduced_beta();
    (2.0 * x.sinh()).sqrt().recip()
}

/// `exp[−β(E − E_min)]`, with the zero-temperature limit taken exactly.
fn boltzmann_weights(values: &[f64], beta: f64, tol: f64) -> Vec<f64> {
    let ground = values.iter().cloned().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .map(|&e| {
            if beta.is_infinite() {
                if e - ground <= tol {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-beta * (e - ground)).exp()
            }
        })
        .collect()
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    if hermiticity_deviation(h) > 1e-12 * max_abs(h).max(1.0) {
        return Err(Error::StructureMismatch("Hermitian"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    Ok(())
}

const DEGENERACY_TOL: f64 = 1e-10;

/// Gibbs average `Tr(H e^{−βH}) / Tr(e^{−βH})` by eigendecomposition, with
/// the spectrum shifted to its minimum before exponentiation.
pub fn gibbs_energy_oracle(h: &CMatrix, beta: f64) -> Result<f64> {
    check_hermitian(h)?;
    check_beta(beta)?;
    let (values, _) = hermitian_eigen(h)?;
    let w = boltzmann_weights(&values, beta, DEGENERACY_TOL);
    let z: f64 = w.iter().sum();
    Ok(values.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / z)
}

/// Graded trace `Tr((−1)^F e^{−βH}) / Tr(e^{−βH})`.
pub fn witten_index(h: &CMatrix, fermion_number: &CMatrix, beta: f64) -> Result<f64> {
    check_hermitian(h)?;
    check_beta(beta)?;
    if fermion_number.shape() != h.shape() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: fermion_number.nrows(),
        });
    }
    let (values, vectors) = hermitian_eigen(h)?;
    // (−1)^F for a number operator with spectrum {0, 1} is 1 − 2F.
    let graded = CMatrix::identity(h.nrows(), h.ncols()) - fermion_number * c(2.0);
    let w = boltzmann_weights(&values, beta, DEGENERACY_TOL);
    let z: f64 = w.iter().sum();
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        if *wk == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        acc += wk * v.dotc(&(&graded * v)).re;
    }
    Ok(acc / z)
}

/// Gibbs ensemble of a model bundle on its own (undoubled) space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsEnsemble {
    pub energy: f64,
    pub witten_index: f64,
    /// Thermal weight carried by boson levels above the guarded band.
    pub truncation_weight: f64,
}

pub fn gibbs_ensemble(bundle: &HamiltonianBundle, beta: f64) -> Result<GibbsEnsemble> {
    check_beta(beta)?;
    let (values, vectors) = hermitian_eigen(&bundle.h)?;
    let w = boltzmann_weights(&values, beta, DEGENERACY_TOL);
    let z: f64 = w.iter().sum();
    let top = bundle.space.guarded_max_level();
    let (mut energy, mut graded, mut tail) = (0.0, 0.0, 0.0);
    for (k, wk) in w.iter().enumerate() {
        if *wk == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        let (mut odd, mut high) = (0.0, 0.0);
        for (i, z) in v.iter().enumerate() {
            if i % 2 == 1 {
                odd += z.norm_sqr();
            }
            if boson_level(i) > top {
                high += z.norm_sqr();
            }
        }
        energy += wk * values[k];
        graded += wk * (1.0 - 2.0 * odd);
        tail += wk * high;
    }
    Ok(GibbsEnsemble {
        energy: energy / z,
        witten_index: graded / z,
        truncation_weight: tail / z,
    })
}

/// Tilde conjugate of a doubled-space operator held as `Σ A ⊗ B`.
///
/// Each term is split into fermion-parity homogeneous pieces; a piece
/// `A ⊗ B` of parities `(p, q)` maps to `(−1)^{pq} (B̄ P^p) ⊗ (Ā P^q)`, which
/// swaps the physical and tilde factors, conjugates all coefficients and is
/// exactly involutive. Under commuting tilde statistics the parity factors
/// and the sign are dropped.
pub fn tilde_conjugate_kron(op: &KronOperator, cfg: &FockSpaceConfig) -> KronOperator {
    let d = op.single_dim();
    let conj = |m: &CMatrix| m.map(|z| z.conj());
    let mut out = KronOperator::zero(d);
    let mut push = |left: CMatrix, right: CMatrix| {
        if left.iter().any(|z| *z != c(0.0)) && right.iter().any(|z| *z != c(0.0)) {
            out = out
                .add(&KronOperator::from_term(left, right))
                .expect("same dimension");
        }
    };
    match cfg.tilde_statistics {
        TildeStatistics::Commuting => {
            for KronTerm { left, right } in op.terms() {
                push(conj(right), conj(left));
            }
        }
        TildeStatistics::Anticommuting => {
            let p = parity(cfg);
            for KronTerm { left, right } in op.terms() {
                let (le, lo) = split_parity(left);
                let (re, ro) = split_parity(right);
                push(conj(&re), conj(&le));
                push(conj(&re) * &p, conj(&lo));
                push(conj(&ro), conj(&le) * &p);
                push(-(conj(&ro) * &p), conj(&lo) * &p);
            }
        }
    }
    out
}

/// Tilde conjugate of a mode operator: physical and tilde slots swap, scalar
/// coefficients are conjugated. Applying it twice returns the original.
pub fn tilde_conjugate(op: &ModeOperator) -> Result<ModeOperator> {
    let k = match &op.matrix {
        Operator::Doubled(k) => k,
        Operator::Single(_) => return Err(Error::Undoubled),
    };
    Ok(ModeOperator {
        matrix: Operator::Doubled(tilde_conjugate_kron(k, &op.space)),
        mode: op.mode.tilde(),
        dagger: op.dagger,
        space: op.space,
    })
}

/// `Ĥ = H ⊗ 1 − H̃` on the doubled space.
pub fn double_hamiltonian(
    bundle: &HamiltonianBundle,
    cfg: &FockSpaceConfig,
) -> Result<KronOperator> {
    if !cfg.doubled {
        return Err(Error::Undoubled);
    }
    if cfg.single_dim() != bundle.h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: cfg.single_dim(),
            found: bundle.h.nrows(),
        });
    }
    let h = embed_physical(&bundle.h);
    h.sub(&tilde_conjugate_kron(&h, cfg))
}

fn doubled_modes(modes: &TransformedModes) -> Result<&FockSpaceConfig> {
    if !modes.space.doubled {
        return Err(Error::Undoubled);
    }
    Ok(&modes.space)
}

/// Physical and tilde quasiparticle annihilators `(a₂, ã₂, b₂, b̃₂)`.
fn quasiparticle_ops(modes: &TransformedModes) -> Result<[KronOperator; 4]> {
    let cfg = doubled_modes(modes)?;
    let a2 = embed_physical(&modes.a2_single);
    let b2 = embed_physical(&modes.b2_single);
    let ta2 = tilde_conjugate_kron(&a2, cfg);
    let tb2 = tilde_conjugate_kron(&b2, cfg);
    Ok([a2, ta2, b2, tb2])
}

/// Rotation generator `G` (Hermitian); the vacuum is `e^{−iG}|0⟩`.
pub fn build_thermal_rotation(
    params: &ThermalParams,
    modes: &TransformedModes,
) -> Result<KronOperator> {
    Ok(rotation_exponent(params, modes)?.scale(Complex64::i()))
}

/// `−iG = θ_b(a₂†ã₂† − ã₂a₂) + θ_f(b₂†b̃₂† − b̃₂b₂)`, anti-Hermitian.
fn rotation_exponent(params: &ThermalParams, modes: &TransformedModes) -> Result<KronOperator> {
    let [a2, ta2, b2, tb2] = quasiparticle_ops(modes)?;
    let pair = |x: &KronOperator, tx: &KronOperator, theta: f64| -> Result<KronOperator> {
        let create = x.adjoint().mul(&tx.adjoint())?;
        let destroy = tx.mul(x)?;
        Ok(create.sub(&destroy)?.scale(c(theta)))
    };
    pair(&a2, &ta2, params.theta_b)?.add(&pair(&b2, &tb2, params.theta_f)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VacuumPath {
    MatrixExponential,
    ClosedForm,
}

impl std::fmt::Display for VacuumPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VacuumPath::MatrixExponential => "matrix-exponential",
            VacuumPath::ClosedForm => "closed-form",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ThermalVacuum {
    pub state: StateVector,
    pub params: ThermalParams,
    pub path: VacuumPath,
    pub tail_mass: f64,
}

/// Thermal vacuum built along `path`, failing when its boson tail mass
/// exceeds the space's tolerance.
pub fn thermal_vacuum(
    params: &ThermalParams,
    modes: &TransformedModes,
    path: VacuumPath,
) -> Result<ThermalVacuum> {
    let vac = thermal_vacuum_unchecked(params, modes, path)?;
    let cfg = &modes.space;
    if vac.tail_mass > cfg.tail_tolerance {
        return Err(Error::TailMass {
            cutoff: cfg.boson_cutoff,
            tail_mass: vac.tail_mass,
            tolerance: cfg.tail_tolerance,
        });
    }
    Ok(vac)
}

/// As [`thermal_vacuum`], reporting the tail mass instead of rejecting it.
pub fn thermal_vacuum_unchecked(
    params: &ThermalParams,
    modes: &TransformedModes,
    path: VacuumPath,
) -> Result<ThermalVacuum> {
    let cfg = doubled_modes(modes)?;
    let vacuum = StateVector::vacuum(cfg);
    let state = if params.is_zero_temperature() {
        vacuum
    } else {
        match path {
            VacuumPath::MatrixExponential => {
                let x = rotation_exponent(params, modes)?.compile();
                StateVector::new(expm_action(&x, 1.0, &vacuum.amplitudes)?, cfg)?
            }
            VacuumPath::ClosedForm => closed_form_vacuum(params, modes)?,
        }
    };
    let tail_mass = state.tail_mass();
    Ok(ThermalVacuum {
        state,
        params: *params,
        path,
        tail_mass,
    })
}

/// `(cos θ_f + sin θ_f b₂†b̃₂†)·(1/cosh θ_b) Σ tanhⁿθ_b |n, ñ⟩`, normalized.
fn closed_form_vacuum(params: &ThermalParams, modes: &TransformedModes) -> Result<StateVector> {
    let cfg = doubled_modes(modes)?;
    let d = cfg.single_dim();
    let t = params.theta_b.tanh();
    let mut boson = CVector::zeros(d * d);
    let mut amp = 1.0 / params.theta_b.cosh();
    for n in 0..=cfg.boson_cutoff {
        boson[(2 * n) * d + 2 * n] = c(amp);
        amp *= t;
    }
    let [_, _, b2, tb2] = quasiparticle_ops(modes)?;
    let pair = b2.adjoint().mul(&tb2.adjoint())?;
    let excited = pair.apply(&boson)?;
    let (cf, sf) = (params.theta_f.cos(), params.theta_f.sin());
    let psi = boson * c(cf) + excited * c(sf);
    let norm = psi.norm();
    StateVector::new(psi.unscale(norm), cfg)
}

/// `⟨0(β)|H ⊗ 1|0(β)⟩` for a physical-sector single-space matrix `h`.
pub fn expectation(vac: &ThermalVacuum, h: &CMatrix) -> Result<f64> {
    let cfg = &vac.state.space;
    if h.nrows() != cfg.single_dim() || !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: cfg.single_dim(),
            found: h.nrows(),
        });
    }
    let d = cfg.single_dim();
    // ψ ↦ Ψ (row-major) so that (H ⊗ 1)ψ ↦ HΨ.
    let psi = CMatrix::from_row_slice(d, d, vac.state.amplitudes.as_slice());
    let h_psi = h * &psi;
    Ok(psi
        .iter()
        .zip(h_psi.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum())
}

/// Thermal vacuum energy `⟨0(β)|H|0(β)⟩`, rejecting vacua whose tail mass
/// exceeds the space tolerance.
pub fn thermal_energy(vac: &ThermalVacuum, h: &CMatrix) -> Result<f64> {
    let cfg = &vac.state.space;
    if vac.tail_mass > cfg.tail_tolerance {
        return Err(Error::TailMass {
            cutoff: cfg.boson_cutoff,
            tail_mass: vac.tail_mass,
            tolerance: cfg.tail_tolerance,
        });
    }
    expectation(vac, h)
}

/// `⟨ψ|K|ψ⟩` for a doubled-space operator.
pub fn doubled_expectation(vac: &ThermalVacuum, op: &KronOperator) -> Result<Complex64> {
    let out = op.apply(&vac.state.amplitudes)?;
    Ok(vac.state.amplitudes.dotc(&out))
}

#[derive(Clone, Debug)]
pub struct GoldstinoStates {
    pub norm1: f64,
    /// Normalized `G_2S|0(β)⟩`; `None` when the norm vanishes.
    pub state1: Option<StateVector>,
    pub norm2: f64,
    pub state2: Option<StateVector>,
}

/// Apply `G_2S` and `G_2S†` (doubled-space operators) to the thermal vacuum.
pub fn goldstino_states(
    vac: &ThermalVacuum,
    g_2s: &Operator,
    g_2s_dagger: &Operator,
) -> Result<GoldstinoStates> {
    let cfg = &vac.state.space;
    let one = |g: &Operator| -> Result<(f64, Option<StateVector>)> {
        if g.as_doubled().is_none() {
            return Err(Error::Undoubled);
        }
        let s = StateVector::new(g.apply(&vac.state.amplitudes)?, cfg)?;
        Ok((s.norm(), s.normalized()))
    };
    let (norm1, state1) = one(g_2s)?;
    let (norm2, state2) = one(g_2s_dagger)?;
    Ok(GoldstinoStates {
        norm1,
        state1,
        norm2,
        state2,
    })
}

/// Thermal annihilators `(cosh θ_b a₂ − sinh θ_b ã₂†, cos θ_f b₂ − sin θ_f b̃₂†)`,
/// both of which annihilate the thermal vacuum.
pub fn thermal_annihilators(
    params: &ThermalParams,
    modes: &TransformedModes,
) -> Result<(KronOperator, KronOperator)> {
    let [a2, ta2, b2, tb2] = quasiparticle_ops(modes)?;
    let (ch, sh) = (params.theta_b.cosh(), params.theta_b.sinh());
    let (cf, sf) = (params.theta_f.cos(), params.theta_f.sin());
    let a_beta = a2.scale(c(ch)).sub(&ta2.adjoint().scale(c(sh)))?;
    let b_beta = b2.scale(c(cf)).sub(&tb2.adjoint().scale(c(sf)))?;
    Ok((a_beta, b_beta))
}

/// Boson cutoff policy for thermal evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cutoff {
    Fixed(usize),
    Auto,
}

impl std::str::FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Cutoff::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Cutoff::Fixed(n)),
            _ => Err(Error::InvalidParameter(format!(
                "cutoff must be a positive integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

pub const AUTO_CUTOFF_START: usize = 32;
pub const AUTO_CUTOFF_MAX: usize = 512;
/// Largest cutoff for which sweeps build the vacuum by exponentiation; above
/// it the closed-form path is used.
pub const EXPM_CUTOFF_LIMIT: usize = 64;

/// Everything needed to evaluate one temperature at one cutoff.
#[derive(Clone, Debug)]
pub struct ThermalSystem {
    pub bundle: HamiltonianBundle,
    pub modes: TransformedModes,
}

impl ThermalSystem {
    /// Interacting model and its quasiparticle modes on the doubled space of
    /// `cfg`, sharing one guard band.
    pub fn build(model: ModelParams, cfg: &FockSpaceConfig) -> Result<Self> {
        let bundle = build_interacting_model(model, cfg)?;
        let modes = canonical_transform(&model, &bundle.space.as_doubled())?;
        Ok(ThermalSystem { bundle, modes })
    }

    pub fn cutoff(&self) -> usize {
        self.bundle.space.boson_cutoff
    }
}

/// One evaluated temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalRecord {
    pub beta: f64,
    #[serde(rename = "T_over_omega1")]
    pub t_over_omega1: f64,
    #[serde(rename = "E0_over_omega1")]
    pub e0_over_omega1: f64,
    #[serde(rename = "E0_closed_form")]
    pub e0_closed_form: f64,
    pub gibbs_oracle: f64,
    pub witten_numeric: f64,
    pub witten_closed_form: f64,
    pub goldstino_norm_numeric: f64,
    pub goldstino_norm2_numeric: f64,
    pub goldstino_norm_closed_form: f64,
    #[serde(rename = "N_b_used")]
    pub n_b_used: usize,
    pub tail_mass: f64,
    pub path: VacuumPath,
    /// Set when the tail mass or the Gibbs truncation weight exceeds the
    /// tolerance at the cutoff used.
    pub flagged: bool,
}

/// Pick the cutoff for `params`: the fixed value, or the smallest power-of-two
/// multiple of [`AUTO_CUTOFF_START`] whose closed-form vacuum tail mass is
/// within tolerance (capped at [`AUTO_CUTOFF_MAX`]).
pub fn select_system(
    model: ModelParams,
    params: &ThermalParams,
    cutoff: Cutoff,
    tail_tolerance: f64,
) -> Result<(ThermalSystem, ThermalVacuum)> {
    let build = |n: usize| -> Result<(ThermalSystem, ThermalVacuum)> {
        let cfg = FockSpaceConfig::new(n)?.with_tail_tolerance(tail_tolerance)?;
        let sys = ThermalSystem::build(model, &cfg)?;
        let vac = thermal_vacuum_unchecked(params, &sys.modes, VacuumPath::ClosedForm)?;
        Ok((sys, vac))
    };
    match cutoff {
        Cutoff::Fixed(n) => build(n),
        Cutoff::Auto => {
            let mut n = AUTO_CUTOFF_START;
            loop {
                match build(n) {
                    Ok(found) if found.1.tail_mass <= tail_tolerance || n >= AUTO_CUTOFF_MAX => {
                        return Ok(found)
                    }
                    Err(e) if n >= AUTO_CUTOFF_MAX => return Err(e),
                    Ok(_) | Err(Error::InsufficientCutoff { .. }) => n *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

/// Evaluate every observable at one temperature.
pub fn evaluate(
    model: ModelParams,
    params: &ThermalParams,
    cutoff: Cutoff,
    tail_tolerance: f64,
) -> Result<ThermalRecord> {
    let (sys, closed) = select_system(model, params, cutoff, tail_tolerance)?;
    let n = sys.cutoff();
    let vac = if n <= EXPM_CUTOFF_LIMIT && !params.is_zero_temperature() {
        thermal_vacuum_unchecked(params, &sys.modes, VacuumPath::MatrixExponential)?
    } else {
        closed
    };
    let omega1 = model.omega1;
    let energy = expectation(&vac, &sys.bundle.h)?;
    let gibbs = if params.is_zero_temperature() {
        GibbsEnsemble {
            energy: gibbs_energy_oracle(&sys.bundle.h, params.beta)?,
            witten_index: 1.0,
            truncation_weight: 0.0,
        }
    } else {
        gibbs_ensemble(&sys.bundle, params.beta)?
    };
    let (g, g_dag) = crate::bogoliubov::transformed_supercharges(&sys.modes)?;
    let gold = goldstino_states(&vac, &g, &g_dag)?;
    let flagged = vac.tail_mass > tail_tolerance || gibbs.truncation_weight > tail_tolerance;
    Ok(ThermalRecord {
        beta: params.beta,
        t_over_omega1: params.t_over_omega1(),
        e0_over_omega1: energy / omega1,
        e0_closed_form: closed_form_energy(params) / omega1,
        gibbs_oracle: gibbs.energy / omega1,
        witten_numeric: gibbs.witten_index,
        witten_closed_form: closed_form_witten(params),
        goldstino_norm_numeric: gold.norm1,
        goldstino_norm2_numeric: gold.norm2,
        goldstino_norm_closed_form: closed_form_goldstino_norm(params),
        n_b_used: n,
        tail_mass: vac.tail_mass,
        path: vac.path,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{transform_modes, TransformParams};

    fn doubled(n: usize) -> FockSpaceConfig {
        FockSpaceConfig::new(n).unwrap().as_doubled()
    }

    fn free_modes(n: usize) -> TransformedModes {
        transform_modes(TransformParams::new(0.0, 0.0).unwrap(), &doubled(n)).unwrap()
    }

    #[test]
    fn angles() {
        let p = ThermalParams::new(2f64.ln(), 1.0).unwrap();
        assert!((p.theta_b.tanh() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.theta_f.tan() - 0.5f64.sqrt()).abs() < 1e-15);
        let z = ThermalParams::zero_temperature(1.0).unwrap();
        assert_eq!((z.theta_b, z.theta_f), (0.0, 0.0));
        assert!(ThermalParams::new(0.0, 1.0).is_err());
        assert!(ThermalParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn closed_forms() {
        let p = ThermalParams::new(2f64.ln(), 1.0).unwrap();
        assert!((closed_form_energy(&p) - 4.0 / 3.0).abs() < 1e-15);
        assert!((closed_form_goldstino_norm(&p) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let p = ThermalParams::new(3f64.ln(), 1.0).unwrap();
        assert!((closed_form_energy(&p) - 0.75).abs() < 1e-15);
        assert!((closed_form_witten(&p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tilde_conjugation_is_involutive() {
        let cfg = doubled(3);
        let d = cfg.single_dim();
        let m = CMatrix::from_fn(d, d, |i, j| {
            Complex64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2)
        });
        let k = KronOperator::from_term(m.clone(), m.adjoint());
        let back = tilde_conjugate_kron(&tilde_conjugate_kron(&k, &cfg), &cfg);
        assert!(max_abs(&(back.to_dense().unwrap() - k.to_dense().unwrap())) < 1e-14);
    }

    #[test]
    fn tilde_of_scaled_creation() {
        let cfg = doubled(3);
        let (_, a_dag) = crate::fock::build_boson_ladder(&cfg, false).unwrap();
        let (_, ta_dag) = crate::fock::build_boson_ladder(&cfg, true).unwrap();
        let z = Complex64::new(0.3, 0.7);
        let scaled = ModeOperator {
            matrix: a_dag.matrix.scale(z),
            ..a_dag
        };
        let t = tilde_conjugate(&scaled).unwrap();
        let want = ta_dag.matrix.scale(z.conj()).to_dense().unwrap();
        assert!(max_abs(&(t.matrix.to_dense().unwrap() - want)) < 1e-15);
    }

    #[test]
    fn free_double_hamiltonian_is_traceless() {
        let cfg = FockSpaceConfig::new(4).unwrap();
        let bundle = crate::model::build_free_susy_oscillator(1.0, &cfg).unwrap();
        let hat = double_hamiltonian(&bundle, &cfg.as_doubled())
            .unwrap()
            .to_dense()
            .unwrap();
        assert!(hat.trace().norm() < 1e-12);
        assert!(matches!(
            double_hamiltonian(&bundle, &cfg),
            Err(Error::Undoubled)
        ));
    }

    #[test]
    fn zero_temperature_vacuum_is_bare() {
        let modes = free_modes(6);
        let p = ThermalParams::zero_temperature(1.0).unwrap();
        let v = thermal_vacuum(&p, &modes, VacuumPath::MatrixExponential).unwrap();
        assert_eq!(
            v.state.amplitudes,
            StateVector::vacuum(&modes.space).amplitudes
        );
        assert!(build_thermal_rotation(&p, &modes)
            .unwrap()
            .terms()
            .is_empty());
    }

    #[test]
    fn paths_agree_for_free_modes() {
        let modes = free_modes(40);
        let p = ThermalParams::new(2.0, 1.0).unwrap();
        let a = thermal_vacuum(&p, &modes, VacuumPath::MatrixExponential).unwrap();
        let b = thermal_vacuum(&p, &modes, VacuumPath::ClosedForm).unwrap();
        assert!((&a.state.amplitudes - &b.state.amplitudes).norm() < 1e-8);
        assert!((a.state.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_mass_is_enforced() {
        let modes = free_modes(8);
        let p = ThermalParams::new(0.2, 1.0).unwrap();
        assert!(matches!(
            thermal_vacuum(&p, &modes, VacuumPath::ClosedForm),
            Err(Error::TailMass { .. })
        ));
    }

    #[test]
    fn cutoff_parsing() {
        assert_eq!("auto".parse::<Cutoff>().unwrap(), Cutoff::Auto);
        assert_eq!("64".parse::<Cutoff>().unwrap(), Cutoff::Fixed(64));
        assert!("0".parse::<Cutoff>().is_err());
        assert!("many".parse::<Cutoff>().is_err());
    }

    #[test]
    fn witten_index_limits() {
        let cfg = FockSpaceConfig::new(40).unwrap();
        let bundle = crate::model::build_free_susy_oscillator(1.0, &cfg).unwrap();
        let b = crate::fock::lift_fermion(&crate::fock::fermion_annihilation(), &bundle.space);
        let n_f = b.adjoint() * b;
        assert_eq!(witten_index(&bundle.h, &n_f, f64::INFINITY).unwrap(), 1.0);
        let w = witten_index(&bundle.h, &n_f, 3f64.ln()).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        assert_eq!(gibbs_energy_oracle(&bundle.h, f64::INFINITY).unwrap(), 0.0);
    }
}
