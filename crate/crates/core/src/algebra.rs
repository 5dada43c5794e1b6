//! Wedge/bullet relations of the ladder algebra checked as matrix identities.
//!
//! `A ∧ B` is read as `½[A, B]` and `A • B` as `½{A, B}`. Under that reading
//! the four relations
//!
//! ```text
//! a† ∧ a = −1/2      a† • a = n_b + 1/2
//! b† • b = 1/2       b† ∧ b = n_f − 1/2
//! ```
//!
//! are exact operator identities, with `n_b = a†a` and `n_f = b†b` taken as
//! number-operator matrices. Every deviation is the spectral norm of the
//! compression onto the guarded subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    build_boson_ladder, build_fermion_ladder, FockSpaceConfig, ModeOperator, Operator, Slot,
    TildeStatistics,
};
use crate::linalg::c;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub relation: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub subspace_dim: usize,
}

impl AlgebraReport {
    pub fn new(
        relation: impl Into<String>,
        max_deviation: f64,
        tolerance: f64,
        subspace_dim: usize,
    ) -> Self {
        AlgebraReport {
            relation: relation.into(),
            max_deviation,
            tolerance,
            passed: max_deviation < tolerance,
            subspace_dim,
        }
    }
}

/// Printable symbol for a mode operator, e.g. `b̃†`.
pub fn symbol(op: &ModeOperator) -> String {
    let base = match op.mode {
        Slot::Boson => "a",
        Slot::Fermion => "b",
        Slot::TildeBoson => "ã",
        Slot::TildeFermion => "b̃",
    };
    if op.dagger {
        format!("{base}†")
    } else {
        base.to_string()
    }
}

fn same_space(a: &ModeOperator, b: &ModeOperator, expected: &Operator) -> Result<()> {
    for dim in [b.matrix.dim(), expected.dim()] {
        if dim != a.matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.matrix.dim(),
                found: dim,
            });
        }
    }
    Ok(())
}

fn report(
    name: String,
    residual: Operator,
    cfg: &FockSpaceConfig,
    tolerance: f64,
) -> Result<AlgebraReport> {
    let deviation = residual.guarded_norm(cfg)?;
    Ok(AlgebraReport::new(
        name,
        deviation,
        tolerance,
        cfg.guarded_dim(),
    ))
}

/// `‖½(AB − BA) − expected‖` on the guarded subspace of `a.space`.
pub fn check_wedge(
    a: &ModeOperator,
    b: &ModeOperator,
    expected: &Operator,
    tolerance: f64,
) -> Result<AlgebraReport> {
    same_space(a, b, expected)?;
    let half = a.matrix.commutator(&b.matrix)?.scale(c(0.5));
    let name = format!("{} ∧ {}", symbol(a), symbol(b));
    report(name, half.sub(expected)?, &a.space, tolerance)
}

/// `‖½(AB + BA) − expected‖` on the guarded subspace of `a.space`.
pub fn check_bullet(
    a: &ModeOperator,
    b: &ModeOperator,
    expected: &Operator,
    tolerance: f64,
) -> Result<AlgebraReport> {
    same_space(a, b, expected)?;
    let half = a.matrix.anticommutator(&b.matrix)?.scale(c(0.5));
    let name = format!("{} • {}", symbol(a), symbol(b));
    report(name, half.sub(expected)?, &a.space, tolerance)
}

/// Full commutator `‖[A, B]‖`, used for the cross relations.
pub fn check_commutes(a: &ModeOperator, b: &ModeOperator, tolerance: f64) -> Result<AlgebraReport> {
    let zero = Operator::identity(&a.space).scale(c(0.0));
    same_space(a, b, &zero)?;
    let name = format!("[{}, {}] = 0", symbol(a), symbol(b));
    report(name, a.matrix.commutator(&b.matrix)?, &a.space, tolerance)
}

/// Full anticommutator `‖{A, B}‖`.
pub fn check_anticommutes(
    a: &ModeOperator,
    b: &ModeOperator,
    tolerance: f64,
) -> Result<AlgebraReport> {
    let zero = Operator::identity(&a.space).scale(c(0.0));
    same_space(a, b, &zero)?;
    let name = format!("{{{}, {}}} = 0", symbol(a), symbol(b));
    report(
        name,
        a.matrix.anticommutator(&b.matrix)?,
        &a.space,
        tolerance,
    )
}

#[derive(Clone, Debug)]
pub struct TildeLadders {
    pub a: ModeOperator,
    pub a_dag: ModeOperator,
    pub b: ModeOperator,
    pub b_dag: ModeOperator,
}

/// The four ladder operators of one boson and one fermion mode, plus their
/// tilde copies on a doubled space.
#[derive(Clone, Debug)]
pub struct LadderSet {
    pub a: ModeOperator,
    pub a_dag: ModeOperator,
    pub b: ModeOperator,
    pub b_dag: ModeOperator,
    pub tilde: Option<TildeLadders>,
}

impl LadderSet {
    /// Bare ladder operators of `cfg` (with tilde copies when doubled).
    pub fn canonical(cfg: &FockSpaceConfig) -> Result<Self> {
        let (a, a_dag) = build_boson_ladder(cfg, false)?;
        let (b, b_dag) = build_fermion_ladder(cfg, false)?;
        let tilde = if cfg.doubled {
            let (ta, ta_dag) = build_boson_ladder(cfg, true)?;
            let (tb, tb_dag) = build_fermion_ladder(cfg, true)?;
            Some(TildeLadders {
                a: ta,
                a_dag: ta_dag,
                b: tb,
                b_dag: tb_dag,
            })
        } else {
            None
        };
        Ok(LadderSet {
            a,
            a_dag,
            b,
            b_dag,
            tilde,
        })
    }
}

fn with_space(op: &ModeOperator, cfg: &FockSpaceConfig) -> ModeOperator {
    ModeOperator {
        space: *cfg,
        ..op.clone()
    }
}

fn mode_relations(
    a: &ModeOperator,
    a_dag: &ModeOperator,
    b: &ModeOperator,
    b_dag: &ModeOperator,
    cfg: &FockSpaceConfig,
    tolerance: f64,
) -> Result<Vec<AlgebraReport>> {
    let half_id = Operator::identity(cfg).scale(c(0.5));
    let n_b = a_dag.matrix.mul(&a.matrix)?;
    let n_f = b_dag.matrix.mul(&b.matrix)?;
    let zero = half_id.scale(c(0.0));
    Ok(vec![
        check_wedge(a_dag, a, &half_id.scale(c(-1.0)), tolerance)?,
        check_bullet(a_dag, a, &n_b.add(&half_id)?, tolerance)?,
        check_bullet(b_dag, b, &half_id, tolerance)?,
        check_wedge(b_dag, b, &n_f.sub(&half_id)?, tolerance)?,
        check_bullet(b, b, &zero, tolerance)?,
    ])
}

/// Run the four ladder relations plus the boson–fermion (and, when doubled,
/// physical–tilde) cross relations. The order of the returned reports is fixed.
pub fn verify_full_algebra(
    ops: &LadderSet,
    cfg: &FockSpaceConfig,
    tolerance: f64,
) -> Result<Vec<AlgebraReport>> {
    if cfg.doubled && ops.tilde.is_none() {
        return Err(Error::MissingOperator("tilde ladder operators"));
    }
    let a = with_space(&ops.a, cfg);
    let a_dag = with_space(&ops.a_dag, cfg);
    let b = with_space(&ops.b, cfg);
    let b_dag = with_space(&ops.b_dag, cfg);
    if a.matrix.dim() != cfg.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dim(),
            found: a.matrix.dim(),
        });
    }

    let mut reports = mode_relations(&a, &a_dag, &b, &b_dag, cfg, tolerance)?;
    for (x, y) in [(&a, &b), (&a, &b_dag), (&a_dag, &b), (&a_dag, &b_dag)] {
        reports.push(check_commutes(x, y, tolerance)?);
    }

    if let Some(t) = &ops.tilde {
        let ta = with_space(&t.a, cfg);
        let ta_dag = with_space(&t.a_dag, cfg);
        let tb = with_space(&t.b, cfg);
        let tb_dag = with_space(&t.b_dag, cfg);
        reports.extend(mode_relations(&ta, &ta_dag, &tb, &tb_dag, cfg, tolerance)?);
        for (x, y) in [
            (&a, &ta),
            (&a, &ta_dag),
            (&a, &tb),
            (&a, &tb_dag),
            (&ta, &b),
            (&ta, &b_dag),
        ] {
            reports.push(check_commutes(x, y, tolerance)?);
        }
        for (x, y) in [(&b, &tb), (&b, &tb_dag)] {
            reports.push(match cfg.tilde_statistics {
                TildeStatistics::Anticommuting => check_anticommutes(x, y, tolerance)?,
                TildeStatistics::Commuting => check_commutes(x, y, tolerance)?,
            });
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(n: usize) -> FockSpaceConfig {
        FockSpaceConfig::new(n).unwrap()
    }

    #[test]
    fn wedge_of_boson_pair_is_minus_half() {
        let cfg = single(12);
        let ops = LadderSet::canonical(&cfg).unwrap();
        let r = check_wedge(
            &ops.a_dag,
            &ops.a,
            &Operator::identity(&cfg).scale(c(-0.5)),
            1e-12,
        )
        .unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.relation, "a† ∧ a");
        assert_eq!(r.subspace_dim, 2 * (12 - 4 + 1));
    }

    #[test]
    fn wedge_of_fermion_pair_is_occupation_minus_half() {
        let cfg = single(6);
        let ops = LadderSet::canonical(&cfg).unwrap();
        let n_f = ops.b_dag.matrix.mul(&ops.b.matrix).unwrap();
        let expected = n_f.sub(&Operator::identity(&cfg).scale(c(0.5))).unwrap();
        assert!(
            check_wedge(&ops.b_dag, &ops.b, &expected, 1e-14)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn self_wedge_vanishes() {
        let cfg = single(6);
        let ops = LadderSet::canonical(&cfg).unwrap();
        let zero = Operator::identity(&cfg).scale(c(0.0));
        let r = check_wedge(&ops.a, &ops.a, &zero, 1e-15).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn bullet_relations() {
        let cfg = single(10);
        let ops = LadderSet::canonical(&cfg).unwrap();
        let half = Operator::identity(&cfg).scale(c(0.5));
        assert!(
            check_bullet(&ops.b_dag, &ops.b, &half, 1e-14)
                .unwrap()
                .passed
        );
        let n_b = ops.a_dag.matrix.mul(&ops.a.matrix).unwrap();
        assert!(
            check_bullet(&ops.a_dag, &ops.a, &n_b.add(&half).unwrap(), 1e-12)
                .unwrap()
                .passed
        );
        let zero = half.scale(c(0.0));
        assert_eq!(
            check_bullet(&ops.b, &ops.b, &zero, 1e-15)
                .unwrap()
                .max_deviation,
            0.0
        );
    }

    #[test]
    fn wedge_fails_on_wrong_expectation() {
        let cfg = single(8);
        let ops = LadderSet::canonical(&cfg).unwrap();
        let r = check_wedge(
            &ops.a_dag,
            &ops.a,
            &Operator::identity(&cfg).scale(c(0.5)),
            1e-10,
        )
        .unwrap();
        assert!(!r.passed);
        assert!((r.max_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ops_small = LadderSet::canonical(&single(4)).unwrap();
        let ops_big = LadderSet::canonical(&single(5)).unwrap();
        let zero = Operator::identity(&single(4)).scale(c(0.0));
        assert!(matches!(
            check_wedge(&ops_small.a, &ops_big.a, &zero, 1e-10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn doubled_run_requires_tilde_ops() {
        let cfg = single(4);
        let ops = LadderSet::canonical(&cfg).unwrap();
        assert!(matches!(
            verify_full_algebra(&ops, &cfg.as_doubled(), DEFAULT_TOLERANCE),
            Err(Error::MissingOperator(_))
        ));
    }

    #[test]
    fn canonical_sets_pass() {
        let cfg = single(16);
        let reports = verify_full_algebra(
            &LadderSet::canonical(&cfg).unwrap(),
            &cfg,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(reports.len(), 9);
        assert!(reports.iter().all(|r| r.passed), "{reports:#?}");

        let dcfg = single(6).as_doubled();
        let reports = verify_full_algebra(
            &LadderSet::canonical(&dcfg).unwrap(),
            &dcfg,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(reports.len(), 9 + 5 + 8);
        assert!(reports.iter().all(|r| r.passed), "{reports:#?}");
    }
}
