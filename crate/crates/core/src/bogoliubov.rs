//! Structure-preserving mode transformation and the reduction of the
//! interacting Hamiltonian to a free supersymmetric oscillator.
//!
//! ```text
//! a₂ = a + β₁ b†b          b₂ = exp[β₂(a† − a)] b
//! ```
//!
//! The ladder algebra survives only for `β₁ = β₂`; otherwise
//! `[a₂, b₂] = (β₂ − β₁) exp[β₂(a† − a)] b`. With `β₁ = β₂ = α₂/ω₁` the model
//! Hamiltonian becomes `ω₁(a₂†a₂ + b₂†b₂)`.

use serde::{Deserialize, Serialize};

use crate::algebra::{LadderSet, TildeLadders};
use crate::error::{Error, Result};
use crate::fock::{
    boson_annihilation, displacement_factor, displacement_report, embed_single,
    fermion_annihilation, lift_boson, lift_fermion, FockSpaceConfig, ModeOperator, Operator, Slot,
};
use crate::linalg::{c, compress, spectral_norm, CMatrix};
use crate::model::{HamiltonianBundle, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub beta1: f64,
    pub beta2: f64,
}

impl TransformParams {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1.is_finite() && beta2.is_finite()) {
            return Err(Error::NonFinite("transformation parameters"));
        }
        Ok(TransformParams { beta1, beta2 })
    }

    /// `β₁ = β₂ = α₂/ω₁`.
    pub fn canonical(model: &ModelParams) -> Self {
        let beta = model.dressing();
        TransformParams {
            beta1: beta,
            beta2: beta,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.beta1 == 0.0 && self.beta2 == 0.0
    }
}

#[derive(Clone, Debug)]
pub struct TransformedModes {
    pub a2: ModeOperator,
    pub a2_dagger: ModeOperator,
    pub b2: ModeOperator,
    pub b2_dagger: ModeOperator,
    pub params: TransformParams,
    /// Source space, with the guard band widened for the `β₂` dressing.
    pub space: FockSpaceConfig,
    /// `a₂` and `b₂` as single-space matrices.
    pub a2_single: CMatrix,
    pub b2_single: CMatrix,
}

fn mode(single: &CMatrix, slot: Slot, dagger: bool, cfg: &FockSpaceConfig) -> Result<ModeOperator> {
    Ok(ModeOperator {
        matrix: embed_single(single, false, cfg)?,
        mode: slot,
        dagger,
        space: *cfg,
    })
}

/// Build `a₂`, `b₂` and their adjoints on the physical sector of `cfg`.
pub fn transform_modes(params: TransformParams, cfg: &FockSpaceConfig) -> Result<TransformedModes> {
    cfg.validate()?;
    let params = TransformParams::new(params.beta1, params.beta2)?;
    let space = cfg.with_dressing_guard(params.beta2)?;

    let a = lift_boson(&boson_annihilation(space.boson_cutoff));
    let b = lift_fermion(&fermion_annihilation(), &space);
    let n_f = b.adjoint() * &b;
    let a2_single = &a + n_f * c(params.beta1);
    let b2_single = if params.beta2 == 0.0 {
        b
    } else {
        let d = displacement_factor(space.boson_cutoff, params.beta2)?;
        let rep = displacement_report(&d, &space);
        if rep.deviation() > space.tail_tolerance {
            return Err(Error::InsufficientCutoff {
                cutoff: space.boson_cutoff,
                detail: format!("fermion dressing deviates by {:.3e}", rep.deviation()),
            });
        }
        lift_boson(&d) * b
    };

    Ok(TransformedModes {
        a2: mode(&a2_single, Slot::Boson, false, &space)?,
        a2_dagger: mode(&a2_single.adjoint(), Slot::Boson, true, &space)?,
        b2: mode(&b2_single, Slot::Fermion, false, &space)?,
        b2_dagger: mode(&b2_single.adjoint(), Slot::Fermion, true, &space)?,
        params,
        space,
        a2_single,
        b2_single,
    })
}

/// The transformation that reduces the model with `model` parameters.
pub fn canonical_transform(model: &ModelParams, cfg: &FockSpaceConfig) -> Result<TransformedModes> {
    transform_modes(TransformParams::canonical(model), cfg)
}

impl TransformedModes {
    /// The transformed modes as a ladder set for the algebra verifier.
    /// Tilde copies are attached on a doubled space.
    pub fn ladder_set(&self) -> Result<LadderSet> {
        let tilde = if self.space.doubled {
            let tilde_of = |single: &CMatrix, slot: Slot, dagger: bool| -> Result<ModeOperator> {
                Ok(ModeOperator {
                    matrix: embed_single(&single.map(|z| z.conj()), true, &self.space)?,
                    mode: slot,
                    dagger,
                    space: self.space,
                })
            };
            Some(TildeLadders {
                a: tilde_of(&self.a2_single, Slot::TildeBoson, false)?,
                a_dag: tilde_of(&self.a2_single.adjoint(), Slot::TildeBoson, true)?,
                b: tilde_of(&self.b2_single, Slot::TildeFermion, false)?,
                b_dag: tilde_of(&self.b2_single.adjoint(), Slot::TildeFermion, true)?,
            })
        } else {
            None
        };
        Ok(LadderSet {
            a: self.a2.clone(),
            a_dag: self.a2_dagger.clone(),
            b: self.b2.clone(),
            b_dag: self.b2_dagger.clone(),
            tilde,
        })
    }

    /// `‖[a₂, b₂]‖` on the guarded subspace.
    pub fn cross_commutator_norm(&self) -> f64 {
        let comm = &self.a2_single * &self.b2_single - &self.b2_single * &self.a2_single;
        spectral_norm(&compress(
            &comm,
            &self.space.as_single().guarded_single_indices(),
        ))
    }

    /// `‖exp[β₂(a† − a)] b‖` on the guarded subspace, the scale of the
    /// cross-commutator obstruction.
    pub fn dressed_fermion_norm(&self) -> f64 {
        spectral_norm(&compress(
            &self.b2_single,
            &self.space.as_single().guarded_single_indices(),
        ))
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub h_reduced: CMatrix,
    /// `‖H − H_reduced‖` on the guarded subspace.
    pub residual: f64,
    pub guarded_dim: usize,
}

/// `H_reduced = ω₁(a₂†a₂ + b₂†b₂)` and its distance from the model Hamiltonian.
pub fn reduce_hamiltonian(
    bundle: &HamiltonianBundle,
    modes: &TransformedModes,
) -> Result<Reduction> {
    if bundle.space.boson_cutoff != modes.space.boson_cutoff {
        return Err(Error::Mismatch(format!(
            "bundle cutoff {} differs from transformation cutoff {}",
            bundle.space.boson_cutoff, modes.space.boson_cutoff
        )));
    }
    let a2 = &modes.a2_single;
    let b2 = &modes.b2_single;
    let h_reduced = (a2.adjoint() * a2 + b2.adjoint() * b2) * c(bundle.params.omega1);
    let guard = bundle.space.guard_band.max(modes.space.guard_band);
    let space = bundle.space.as_single().with_guard_band(guard)?;
    let residual = spectral_norm(&compress(
        &(&bundle.h - &h_reduced),
        &space.guarded_single_indices(),
    ));
    Ok(Reduction {
        h_reduced,
        residual,
        guarded_dim: space.guarded_dim(),
    })
}

/// `G_2S = a₂†b₂` and `G_2S† = b₂†a₂` on the space of `modes`.
pub fn transformed_supercharges(modes: &TransformedModes) -> Result<(Operator, Operator)> {
    let g = modes.a2_dagger.matrix.mul(&modes.b2.matrix)?;
    let g_dag = g.adjoint();
    Ok((g, g_dag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{verify_full_algebra, DEFAULT_TOLERANCE};
    use crate::model::build_interacting_model;

    fn cfg(n: usize) -> FockSpaceConfig {
        FockSpaceConfig::new(n).unwrap()
    }

    #[test]
    fn zero_parameters_give_bare_modes() {
        let c6 = cfg(6);
        let m = transform_modes(TransformParams::new(0.0, 0.0).unwrap(), &c6).unwrap();
        let ladders = LadderSet::canonical(&c6).unwrap();
        assert_eq!(
            m.a2.matrix.to_dense().unwrap(),
            ladders.a.matrix.to_dense().unwrap()
        );
        assert_eq!(
            m.b2.matrix.to_dense().unwrap(),
            ladders.b.matrix.to_dense().unwrap()
        );
        assert!(m.params.is_identity());
    }

    #[test]
    fn canonical_parameters() {
        let p = TransformParams::canonical(&ModelParams::new(2.0, 1.0).unwrap());
        assert_eq!((p.beta1, p.beta2), (0.5, 0.5));
    }

    #[test]
    fn equal_betas_preserve_algebra() {
        let m = transform_modes(TransformParams::new(0.5, 0.5).unwrap(), &cfg(48)).unwrap();
        let reports =
            verify_full_algebra(&m.ladder_set().unwrap(), &m.space, DEFAULT_TOLERANCE).unwrap();
        for r in &reports {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn unequal_betas_break_cross_relation() {
        let m = transform_modes(TransformParams::new(0.5, 0.7).unwrap(), &cfg(48)).unwrap();
        let ratio = m.cross_commutator_norm() / m.dressed_fermion_norm();
        assert!((ratio - 0.2).abs() < 1e-9, "{ratio}");
        let reports =
            verify_full_algebra(&m.ladder_set().unwrap(), &m.space, DEFAULT_TOLERANCE).unwrap();
        assert!(reports
            .iter()
            .any(|r| !r.passed && r.relation == "[a, b] = 0"));
    }

    #[test]
    fn reduction_residual() {
        let params = ModelParams::new(1.0, 0.5).unwrap();
        let bundle = build_interacting_model(params, &cfg(64)).unwrap();
        let modes = canonical_transform(&params, &cfg(64)).unwrap();
        assert!(reduce_hamiltonian(&bundle, &modes).unwrap().residual < 1e-9);

        let off = TransformParams::new(0.45, 0.45).unwrap();
        let wrong = transform_modes(off, &cfg(64)).unwrap();
        assert!(reduce_hamiltonian(&bundle, &wrong).unwrap().residual > 1e-3);

        let other = canonical_transform(&params, &cfg(40)).unwrap();
        assert!(matches!(
            reduce_hamiltonian(&bundle, &other),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn transformed_supercharges_are_nilpotent() {
        let params = ModelParams::new(1.0, 0.5).unwrap();
        let modes = canonical_transform(&params, &cfg(48)).unwrap();
        let (g, g_dag) = transformed_supercharges(&modes).unwrap();
        let g = g.as_single().unwrap();
        let g_dag = g_dag.as_single().unwrap();
        assert!(crate::linalg::max_abs(&(g * g)) < 1e-14);
        let bundle = build_interacting_model(params, &cfg(48)).unwrap();
        let red = reduce_hamiltonian(&bundle, &modes).unwrap();
        let anti = (g * g_dag + g_dag * g) * c(params.omega1);
        let idx = modes.space.guarded_single_indices();
        assert!(spectral_norm(&compress(&(anti - &red.h_reduced), &idx)) < 1e-9);
        let comm = &red.h_reduced * g - g * &red.h_reduced;
        assert!(spectral_norm(&compress(&comm, &idx)) < 1e-9);
    }

    #[test]
    fn zero_coupling_supercharge_is_bare() {
        let modes = canonical_transform(&ModelParams::new(1.0, 0.0).unwrap(), &cfg(8)).unwrap();
        let (g, _) = transformed_supercharges(&modes).unwrap();
        let bare = build_interacting_model(ModelParams::new(1.0, 0.0).unwrap(), &cfg(8)).unwrap();
        assert_eq!(g.as_single().unwrap(), &bare.g_s);
    }
}
