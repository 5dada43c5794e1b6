//! Truncated bosonic and fermionic ladder operators on single and doubled
//! composite spaces.
//!
//! The physical ("single") space is `boson ⊗ fermion` with basis index
//! `i = 2·n_b + n_f`, `n_b ∈ 0..=N_b`, `n_f ∈ {0, 1}`. The doubled space
//! appends a tilde copy, giving the fixed factor ordering
//! `boson ⊗ fermion ⊗ tilde-boson ⊗ tilde-fermion`. Doubled-space operators
//! are kept Kronecker-factored (see [`kron`]).
//!
//! Tilde fermions anticommute with physical fermions by default: the odd part
//! of a tilde-slot operator carries the physical fermion parity string
//! `(-1)^{n_f}`. [`TildeStatistics::Commuting`] drops the string.

pub mod expm;
pub mod kron;

use serde::{Deserialize, Serialize};

pub use expm::{expm_action, matrix_exponential, pade_exponential, ExpStructure};
pub use kron::{CompiledKron, KronOperator, KronTerm};

use crate::error::{Error, Result};
use crate::linalg::{c, compress, spectral_norm, CMatrix, CVector};

/// Leakage bound used when widening the guard band for displacement-dressed
/// operators: `(N_b + 1)·max |⟨N_b|D|n⟩|` over guarded `n`.
pub const DRESSING_LEAKAGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TildeStatistics {
    #[default]
    Anticommuting,
    Commuting,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockSpaceConfig {
    /// Highest retained boson occupation `N_b`.
    pub boson_cutoff: usize,
    /// Number of top boson levels excluded from identity checks.
    pub guard_band: usize,
    pub doubled: bool,
    /// Largest allowed occupation probability above `N_b − g`.
    pub tail_tolerance: f64,
    pub tilde_statistics: TildeStatistics,
}

impl FockSpaceConfig {
    pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;

    /// Undoubled space with the default guard band `max(4, N_b/10)`, clamped
    /// below `N_b` for very small cutoffs.
    pub fn new(boson_cutoff: usize) -> Result<Self> {
        if boson_cutoff == 0 {
            return Err(Error::InvalidConfig("boson cutoff must be positive".into()));
        }
        let cfg = FockSpaceConfig {
            boson_cutoff,
            guard_band: Self::default_guard(boson_cutoff),
            doubled: false,
            tail_tolerance: Self::DEFAULT_TAIL_TOLERANCE,
            tilde_statistics: TildeStatistics::Anticommuting,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn default_guard(boson_cutoff: usize) -> usize {
        4.max(boson_cutoff / 10).min(boson_cutoff.saturating_sub(1))
    }

    pub fn with_guard_band(mut self, guard_band: usize) -> Result<Self> {
        self.guard_band = guard_band;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tail_tolerance(mut self, tail_tolerance: f64) -> Result<Self> {
        self.tail_tolerance = tail_tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tilde_statistics(mut self, statistics: TildeStatistics) -> Self {
        self.tilde_statistics = statistics;
        self
    }

    pub fn as_doubled(mut self) -> Self {
        self.doubled = true;
        self
    }

    pub fn as_single(mut self) -> Self {
        self.doubled = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.boson_cutoff == 0 {
            return Err(Error::InvalidConfig("boson cutoff must be positive".into()));
        }
        if self.guard_band >= self.boson_cutoff {
            return Err(Error::InvalidConfig(format!(
                "guard band {} must be below the cutoff {}",
                self.guard_band, self.boson_cutoff
            )));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(
                "tail tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn boson_dim(&self) -> usize {
        self.boson_cutoff + 1
    }

    /// Dimension of `boson ⊗ fermion`.
    pub fn single_dim(&self) -> usize {
        2 * self.boson_dim()
    }

    /// Composite dimension: `2(N_b+1)` or `(2(N_b+1))²` when doubled.
    pub fn dim(&self) -> usize {
        if self.doubled {
            self.single_dim() * self.single_dim()
        } else {
            self.single_dim()
        }
    }

    /// Highest boson level inside the guarded subspace.
    pub fn guarded_max_level(&self) -> usize {
        self.boson_cutoff - self.guard_band
    }

    pub fn guarded_single_indices(&self) -> Vec<usize> {
        (0..self.single_dim())
            .filter(|&i| boson_level(i) <= self.guarded_max_level())
            .collect()
    }

    /// Guarded composite indices (both boson factors guarded when doubled).
    pub fn guarded_indices(&self) -> Vec<usize> {
        let single = self.guarded_single_indices();
        if !self.doubled {
            return single;
        }
        let d = self.single_dim();
        single
            .iter()
            .flat_map(|&i| single.iter().map(move |&j| i * d + j))
            .collect()
    }

    pub fn guarded_dim(&self) -> usize {
        let s = 2 * (self.guarded_max_level() + 1);
        if self.doubled {
            s * s
        } else {
            s
        }
    }

    /// Widen the guard band until `exp[λ(a† − a)]` leaks less than
    /// [`DRESSING_LEAKAGE_TOL`] from guarded levels into the cutoff level.
    pub fn with_dressing_guard(self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite("displacement amplitude"));
        }
        if lambda == 0.0 {
            return Ok(self);
        }
        let d = displacement_factor(self.boson_cutoff, lambda)?;
        let n = self.boson_cutoff;
        for g in self.guard_band..n {
            let keep = n - g;
            if top_leakage(&d, keep) < DRESSING_LEAKAGE_TOL {
                return self.with_guard_band(g);
            }
        }
        Err(Error::InsufficientCutoff {
            cutoff: n,
            detail: format!(
                "displacement by {lambda} leaks into the cutoff level from every guarded level"
            ),
        })
    }
}

#[inline]
pub fn boson_level(single_index: usize) -> usize {
    single_index / 2
}

#[inline]
pub fn fermion_occupation(single_index: usize) -> usize {
    single_index % 2
}

/// Tensor factor a mode acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    Boson,
    Fermion,
    TildeBoson,
    TildeFermion,
}

impl Slot {
    pub fn is_tilde(self) -> bool {
        matches!(self, Slot::TildeBoson | Slot::TildeFermion)
    }

    pub fn is_fermionic(self) -> bool {
        matches!(self, Slot::Fermion | Slot::TildeFermion)
    }

    /// Physical ↔ tilde partner.
    pub fn tilde(self) -> Slot {
        match self {
            Slot::Boson => Slot::TildeBoson,
            Slot::Fermion => Slot::TildeFermion,
            Slot::TildeBoson => Slot::Boson,
            Slot::TildeFermion => Slot::Fermion,
        }
    }

    pub fn factor_dim(self, cfg: &FockSpaceConfig) -> usize {
        if self.is_fermionic() {
            2
        } else {
            cfg.boson_dim()
        }
    }
}

/// Operator on a composite space: dense on the single space, Kronecker-factored
/// on the doubled space.
#[derive(Clone, Debug)]
pub enum Operator {
    Single(CMatrix),
    Doubled(KronOperator),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Single(m) => m.nrows(),
            Operator::Doubled(k) => k.dim(),
        }
    }

    pub fn identity(cfg: &FockSpaceConfig) -> Self {
        if cfg.doubled {
            Operator::Doubled(KronOperator::identity(cfg.single_dim()))
        } else {
            Operator::Single(CMatrix::identity(cfg.single_dim(), cfg.single_dim()))
        }
    }

    pub fn as_single(&self) -> Option<&CMatrix> {
        match self {
            Operator::Single(m) => Some(m),
            Operator::Doubled(_) => None,
        }
    }

    pub fn as_doubled(&self) -> Option<&KronOperator> {
        match self {
            Operator::Doubled(k) => Some(k),
            Operator::Single(_) => None,
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Operator::Single(m) => Operator::Single(m.adjoint()),
            Operator::Doubled(k) => Operator::Doubled(k.adjoint()),
        }
    }

    pub fn scale(&self, s: num_complex::Complex64) -> Self {
        match self {
            Operator::Single(m) => Operator::Single(m * s),
            Operator::Doubled(k) => Operator::Doubled(k.scale(s)),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        match (self, other) {
            (Operator::Single(a), Operator::Single(b)) => Ok(Operator::Single(a + b)),
            (Operator::Doubled(a), Operator::Doubled(b)) => Ok(Operator::Doubled(a.add(b)?)),
            _ => Err(Error::Mismatch(
                "single- and doubled-space operators".into(),
            )),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        match (self, other) {
            (Operator::Single(a), Operator::Single(b)) => Ok(Operator::Single(a * b)),
            (Operator::Doubled(a), Operator::Doubled(b)) => Ok(Operator::Doubled(a.mul(b)?)),
            _ => Err(Error::Mismatch(
                "single- and doubled-space operators".into(),
            )),
        }
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        match self {
            Operator::Single(m) => Ok(m.clone()),
            Operator::Doubled(k) => k.to_dense(),
        }
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        match self {
            Operator::Single(m) => {
                if m.ncols() != v.len() {
                    return Err(Error::DimensionMismatch {
                        expected: m.ncols(),
                        found: v.len(),
                    });
                }
                Ok(m * v)
            }
            Operator::Doubled(k) => k.apply(v),
        }
    }

    /// Spectral norm of the compression onto the guarded subspace of `cfg`.
    pub fn guarded_norm(&self, cfg: &FockSpaceConfig) -> Result<f64> {
        if self.dim() != cfg.dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.dim(),
                found: self.dim(),
            });
        }
        let dense = self.to_dense()?;
        Ok(spectral_norm(&compress(&dense, &cfg.guarded_indices())))
    }
}

/// A ladder operator (or product) with its mode metadata.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub matrix: Operator,
    pub mode: Slot,
    pub dagger: bool,
    pub space: FockSpaceConfig,
}

impl ModeOperator {
    pub fn dagger(&self) -> ModeOperator {
        dagger(self)
    }
}

/// Conjugate transpose with the dagger flag flipped.
pub fn dagger(op: &ModeOperator) -> ModeOperator {
    ModeOperator {
        matrix: op.matrix.adjoint(),
        mode: op.mode,
        dagger: !op.dagger,
        space: op.space,
    }
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub amplitudes: CVector,
    pub space: FockSpaceConfig,
}

impl StateVector {
    /// `|0⟩` (all factors empty).
    pub fn vacuum(cfg: &FockSpaceConfig) -> Self {
        Self::basis(cfg, 0)
    }

    pub fn basis(cfg: &FockSpaceConfig, index: usize) -> Self {
        let mut amplitudes = CVector::zeros(cfg.dim());
        amplitudes[index] = c(1.0);
        StateVector {
            amplitudes,
            space: *cfg,
        }
    }

    pub fn new(amplitudes: CVector, cfg: &FockSpaceConfig) -> Result<Self> {
        if amplitudes.len() != cfg.dim() {
            return Err(Error::DimensionMismatch {
                expected: cfg.dim(),
                found: amplitudes.len(),
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("state amplitudes"));
        }
        Ok(StateVector {
            amplitudes,
            space: *cfg,
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| StateVector {
            amplitudes: self.amplitudes.unscale(n),
            space: self.space,
        })
    }

    /// Occupation probability on boson levels above `N_b − g` (in either boson
    /// factor when doubled).
    pub fn tail_mass(&self) -> f64 {
        let cfg = &self.space;
        let top = cfg.guarded_max_level();
        let d = cfg.single_dim();
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                if cfg.doubled {
                    boson_level(idx / d) > top || boson_level(idx % d) > top
                } else {
                    boson_level(*idx) > top
                }
            })
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}

/// Boson annihilation matrix on `0..=N_b`: `a|n⟩ = √n |n−1⟩`.
pub fn boson_annihilation(boson_cutoff: usize) -> CMatrix {
    let n = boson_cutoff + 1;
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = c((k as f64).sqrt());
    }
    a
}

/// Fermion annihilation on `{|0⟩, |1⟩}`.
pub fn fermion_annihilation() -> CMatrix {
    let mut b = CMatrix::zeros(2, 2);
    b[(0, 1)] = c(1.0);
    b
}

/// Lift a boson-factor matrix to the single space (`B ⊗ 1₂`).
pub fn lift_boson(m: &CMatrix) -> CMatrix {
    m.kronecker(&CMatrix::identity(2, 2))
}

/// Lift a fermion-factor matrix to the single space (`1 ⊗ F`).
pub fn lift_fermion(m: &CMatrix, cfg: &FockSpaceConfig) -> CMatrix {
    CMatrix::identity(cfg.boson_dim(), cfg.boson_dim()).kronecker(m)
}

/// Physical fermion parity `(-1)^{n_f}` on the single space.
pub fn parity(cfg: &FockSpaceConfig) -> CMatrix {
    let d = cfg.single_dim();
    CMatrix::from_fn(d, d, |i, j| {
        if i != j {
            c(0.0)
        } else if fermion_occupation(i) == 0 {
            c(1.0)
        } else {
            c(-1.0)
        }
    })
}

/// Split a single-space matrix into fermion-parity even and odd parts.
pub fn split_parity(m: &CMatrix) -> (CMatrix, CMatrix) {
    let even = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if fermion_occupation(i) == fermion_occupation(j) {
            m[(i, j)]
        } else {
            c(0.0)
        }
    });
    let odd = m - &even;
    (even, odd)
}

fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| *z == c(0.0))
}

/// `op ⊗ 1` on the doubled space.
pub fn embed_physical(op: &CMatrix) -> KronOperator {
    let d = op.nrows();
    KronOperator::from_term(op.clone(), CMatrix::identity(d, d))
}

/// Tilde-factor embedding; the odd part picks up the parity string under
/// anticommuting statistics.
pub fn embed_tilde(op: &CMatrix, cfg: &FockSpaceConfig) -> KronOperator {
    let d = op.nrows();
    match cfg.tilde_statistics {
        TildeStatistics::Commuting => KronOperator::from_term(CMatrix::identity(d, d), op.clone()),
        TildeStatistics::Anticommuting => {
            let (even, odd) = split_parity(op);
            let mut out = KronOperator::zero(d);
            if !is_zero(&even) {
                out = out
                    .add(&KronOperator::from_term(CMatrix::identity(d, d), even))
                    .expect("same dimension");
            }
            if !is_zero(&odd) {
                out = out
                    .add(&KronOperator::from_term(parity(cfg), odd))
                    .expect("same dimension");
            }
            out
        }
    }
}

/// Place a single-space matrix on the physical or tilde sector of `cfg`.
pub fn embed_single(op: &CMatrix, tilde: bool, cfg: &FockSpaceConfig) -> Result<Operator> {
    if op.nrows() != cfg.single_dim() || !op.is_square() {
        return Err(Error::DimensionMismatch {
            expected: cfg.single_dim(),
            found: op.nrows(),
        });
    }
    match (cfg.doubled, tilde) {
        (false, true) => Err(Error::Undoubled),
        (false, false) => Ok(Operator::Single(op.clone())),
        (true, false) => Ok(Operator::Doubled(embed_physical(op))),
        (true, true) => Ok(Operator::Doubled(embed_tilde(op, cfg))),
    }
}

/// Embed a single-factor matrix into its slot of the composite space.
pub fn tensor_embed(op: &CMatrix, slot: Slot, cfg: &FockSpaceConfig) -> Result<ModeOperator> {
    cfg.validate()?;
    if slot.is_tilde() && !cfg.doubled {
        return Err(Error::SlotOutOfRange(slot));
    }
    let want = slot.factor_dim(cfg);
    if op.nrows() != want || op.ncols() != want {
        return Err(Error::DimensionMismatch {
            expected: want,
            found: op.nrows(),
        });
    }
    let single = if slot.is_fermionic() {
        lift_fermion(op, cfg)
    } else {
        lift_boson(op)
    };
    Ok(ModeOperator {
        matrix: embed_single(&single, slot.is_tilde(), cfg)?,
        mode: slot,
        dagger: false,
        space: *cfg,
    })
}

/// `(a, a†)` on the physical or tilde boson factor.
pub fn build_boson_ladder(
    cfg: &FockSpaceConfig,
    tilde: bool,
) -> Result<(ModeOperator, ModeOperator)> {
    if tilde && !cfg.doubled {
        return Err(Error::Undoubled);
    }
    let slot = if tilde { Slot::TildeBoson } else { Slot::Boson };
    let a = tensor_embed(&boson_annihilation(cfg.boson_cutoff), slot, cfg)?;
    let a_dag = dagger(&a);
    Ok((a, a_dag))
}

/// `(b, b†)` on the physical or tilde fermion factor.
pub fn build_fermion_ladder(
    cfg: &FockSpaceConfig,
    tilde: bool,
) -> Result<(ModeOperator, ModeOperator)> {
    if tilde && !cfg.doubled {
        return Err(Error::Undoubled);
    }
    let slot = if tilde {
        Slot::TildeFermion
    } else {
        Slot::Fermion
    };
    let b = tensor_embed(&fermion_annihilation(), slot, cfg)?;
    let b_dag = dagger(&b);
    Ok((b, b_dag))
}

/// Boson-factor matrix `exp[λ(a† − a)]` on `0..=N_b`.
pub fn displacement_factor(boson_cutoff: usize, lambda: f64) -> Result<CMatrix> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("displacement amplitude"));
    }
    let a = boson_annihilation(boson_cutoff);
    let generator = (a.adjoint() - &a) * c(lambda);
    matrix_exponential(&generator, ExpStructure::AntiHermitian)
}

fn top_leakage(d: &CMatrix, keep: usize) -> f64 {
    let top = d.nrows() - 1;
    let worst = (0..=keep.min(top))
        .map(|n| d[(top, n)].norm())
        .fold(0.0, f64::max);
    worst * d.nrows() as f64
}

/// Accuracy diagnostics of a truncated displacement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DisplacementReport {
    /// `‖P(D†D − 1)P‖` on the guarded boson levels.
    pub unitarity_deviation: f64,
    /// `(N_b+1)·max |⟨N_b|D|n⟩|` over guarded `n`.
    pub leakage: f64,
}

impl DisplacementReport {
    pub fn deviation(&self) -> f64 {
        self.unitarity_deviation.max(self.leakage)
    }
}

pub fn displacement_report(d: &CMatrix, cfg: &FockSpaceConfig) -> DisplacementReport {
    let keep: Vec<usize> = (0..=cfg.guarded_max_level()).collect();
    let gram = d.adjoint() * d - CMatrix::identity(d.nrows(), d.nrows());
    DisplacementReport {
        unitarity_deviation: spectral_norm(&compress(&gram, &keep)),
        leakage: top_leakage(d, cfg.guarded_max_level()),
    }
}

/// `exp[λ(a† − a)]` on the physical boson slot.
///
/// Fails with [`Error::InsufficientCutoff`] when the guarded-subspace
/// deviation exceeds `cfg.tail_tolerance`; widen the guard with
/// [`FockSpaceConfig::with_dressing_guard`] or raise the cutoff.
pub fn displacement_operator(
    cfg: &FockSpaceConfig,
    lambda: f64,
) -> Result<(ModeOperator, DisplacementReport)> {
    cfg.validate()?;
    let d = displacement_factor(cfg.boson_cutoff, lambda)?;
    let report = displacement_report(&d, cfg);
    if report.deviation() > cfg.tail_tolerance {
        return Err(Error::InsufficientCutoff {
            cutoff: cfg.boson_cutoff,
            detail: format!(
                "displacement by {lambda} deviates by {:.3e} on the guarded subspace",
                report.deviation()
            ),
        });
    }
    Ok((tensor_embed(&d, Slot::Boson, cfg)?, report))
}
