use proptest::prelude::*;

use susy_tfd::algebra::{verify_full_algebra, LadderSet, DEFAULT_TOLERANCE};
use susy_tfd::bogoliubov::{transform_modes, TransformParams};
use susy_tfd::fock::{FockSpaceConfig, KronOperator};
use susy_tfd::linalg::{max_abs, CMatrix};
use susy_tfd::model::{
    build_free_susy_oscillator, build_interacting_model, solve_frequencies, ModelParams,
};
use susy_tfd::thermal::{
    closed_form_energy, closed_form_goldstino_norm, closed_form_witten, double_hamiltonian,
    doubled_expectation, gibbs_energy_oracle, thermal_annihilators, thermal_vacuum,
    tilde_conjugate_kron, ThermalParams, VacuumPath,
};

use num_complex::Complex64;

fn small_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), d * d).prop_map(move |v| {
        CMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| Complex64::new(re, im)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn canonical_algebra_holds_for_every_cutoff(n in 8usize..48) {
        let cfg = FockSpaceConfig::new(n).unwrap();
        for r in verify_full_algebra(&LadderSet::canonical(&cfg).unwrap(), &cfg, DEFAULT_TOLERANCE).unwrap() {
            prop_assert!(r.passed, "{:?}", r);
        }
    }

    #[test]
    fn doubled_algebra_holds(n in 8usize..=10) {
        let cfg = FockSpaceConfig::new(n).unwrap().as_doubled();
        let reports = verify_full_algebra(&LadderSet::canonical(&cfg).unwrap(), &cfg, DEFAULT_TOLERANCE).unwrap();
        prop_assert_eq!(reports.len(), 22);
        for r in reports {
            prop_assert!(r.passed, "{:?}", r);
        }
    }

    #[test]
    fn derived_omega2_obeys_bound(omega1 in 0.01..10.0f64, alpha2 in -10.0..10.0f64) {
        let p = ModelParams::new(omega1, alpha2).unwrap();
        prop_assert!(p.omega2 >= 2.0 * alpha2.abs() * (1.0 - 1e-15));
        prop_assert!(p.is_supersymmetric());
        prop_assert_eq!(p.alpha1, -alpha2);
    }

    #[test]
    fn frequency_roots_round_trip(omega1 in 0.01..10.0f64, alpha2 in -10.0..10.0f64) {
        let omega2 = (omega1 * omega1 + alpha2 * alpha2) / omega1;
        let s = solve_frequencies(omega2, alpha2).unwrap();
        for r in [s.omega1_minus, s.omega1_plus] {
            let back = (r * r + alpha2 * alpha2) / r;
            prop_assert!(((back - omega2) / omega2).abs() < 1e-10);
            prop_assert!(((r * r - omega2 * r + alpha2 * alpha2) / (omega2 * omega2)).abs() < 1e-10);
        }
        let hit = [s.omega1_minus, s.omega1_plus].iter().any(|r| ((r - omega1) / omega1).abs() < 1e-6);
        prop_assert!(hit || s.degenerate);
    }

    #[test]
    fn complex_roots_below_bound(alpha2 in 0.1..5.0f64, frac in 0.0..0.999f64) {
        let omega2 = 2.0 * alpha2 * frac;
        prop_assume!(omega2 > 0.0);
        prop_assert!(solve_frequencies(omega2, alpha2).is_err());
    }

    #[test]
    fn tilde_conjugation_is_an_exact_involution(a in small_matrix(6), b in small_matrix(6), commuting in any::<bool>()) {
        let mut cfg = FockSpaceConfig::new(2).unwrap().as_doubled();
        if commuting {
            cfg = cfg.with_tilde_statistics(susy_tfd::fock::TildeStatistics::Commuting);
        }
        let k = KronOperator::from_term(a, b);
        let back = tilde_conjugate_kron(&tilde_conjugate_kron(&k, &cfg), &cfg);
        prop_assert_eq!(back.to_dense().unwrap(), k.to_dense().unwrap());
    }

    #[test]
    fn closed_forms_are_physical(x in 0.05..40.0f64, y in 0.05..40.0f64) {
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        prop_assume!(hi - lo > 1e-6);
        let p_lo = ThermalParams::new(lo, 1.0).unwrap();
        let p_hi = ThermalParams::new(hi, 1.0).unwrap();
        prop_assert!(closed_form_energy(&p_lo) > 0.0);
        prop_assert!(closed_form_energy(&p_lo) > closed_form_energy(&p_hi));
        let (w_lo, w_hi) = (closed_form_witten(&p_lo), closed_form_witten(&p_hi));
        prop_assert!((0.0..=1.0).contains(&w_lo) && w_lo <= w_hi);
        prop_assert!(closed_form_goldstino_norm(&p_hi) > 0.0);
        prop_assert!(p_lo.theta_f > 0.0 && p_lo.theta_f <= std::f64::consts::FRAC_PI_4);
        prop_assert!(p_hi.theta_f < p_lo.theta_f && p_hi.theta_b < p_lo.theta_b);
        let (c, s) = (p_lo.theta_b.cosh(), p_lo.theta_b.sinh());
        prop_assert!((c * c - s * s - 1.0).abs() < 1e-12 * c * c);
    }

    #[test]
    fn gibbs_oracle_matches_bose_plus_fermi(omega1 in 0.3..3.0f64, x in 1.0..8.0f64) {
        let bundle = build_free_susy_oscillator(omega1, &FockSpaceConfig::new(60).unwrap()).unwrap();
        let e = (-x).exp();
        let want = omega1 * (e / (1.0 - e) + e / (1.0 + e));
        let got = gibbs_energy_oracle(&bundle.h, x / omega1).unwrap();
        prop_assert!(((got - want) / want).abs() < 1e-9, "{} vs {}", got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn supercharge_identity_on_grid(
        omega1 in prop::sample::select(vec![0.5, 1.0, 2.0]),
        alpha2 in prop::sample::select(vec![0.0, 0.25, 1.0]),
    ) {
        let b = build_interacting_model(ModelParams::new(omega1, alpha2).unwrap(), &FockSpaceConfig::new(64).unwrap()).unwrap();
        let id = b.supercharge_identity();
        prop_assert!(id.max_deviation < 1e-9, "{:?}", id);
        prop_assert!(b.nilpotency().max_deviation < 1e-13);
        prop_assert!(b.split_residual() < 1e-12);
    }

    #[test]
    fn interacting_spectrum_is_free_spectrum(
        omega1 in prop::sample::select(vec![0.5, 1.0, 2.0]),
        alpha2 in prop::sample::select(vec![0.25, 0.5, 1.0]),
    ) {
        let b = build_interacting_model(ModelParams::new(omega1, alpha2).unwrap(), &FockSpaceConfig::new(96).unwrap()).unwrap();
        let values = susy_tfd::model::guarded_eigenvalues(&b).unwrap();
        // Free oscillator: 0, then ω₁k twice for k ≥ 1.
        let top = b.space.guarded_max_level();
        for (i, v) in values.iter().enumerate().take(2 * top - 2) {
            let k = i.div_ceil(2);
            prop_assert!((v - omega1 * k as f64).abs() < 1e-8 * omega1 * (k.max(1) as f64), "level {}: {}", i, v);
        }
    }

    #[test]
    fn equal_betas_preserve_algebra(beta in prop::sample::select(vec![-1.0, -0.5, 0.0, 0.5, 1.0])) {
        let cfg = FockSpaceConfig::new(64).unwrap();
        let m = transform_modes(TransformParams::new(beta, beta).unwrap(), &cfg).unwrap();
        for r in verify_full_algebra(&m.ladder_set().unwrap(), &m.space, DEFAULT_TOLERANCE).unwrap() {
            prop_assert!(r.passed, "{:?}", r);
        }
    }

    #[test]
    fn cross_commutator_scales_with_beta_gap(beta1 in -1.0..1.0f64, gap in 1e-3..0.3f64) {
        let cfg = FockSpaceConfig::new(64).unwrap();
        let m = transform_modes(TransformParams::new(beta1, beta1 + gap).unwrap(), &cfg).unwrap();
        let ratio = m.cross_commutator_norm() / (gap * m.dressed_fermion_norm());
        prop_assert!((ratio - 1.0).abs() < 1e-8, "{}", ratio);
    }

    #[test]
    fn thermal_vacuum_is_annihilated(x in 1.5..6.0f64, alpha2 in prop::sample::select(vec![0.0, 0.25])) {
        let model = ModelParams::new(1.0, alpha2).unwrap();
        let cfg = FockSpaceConfig::new(40).unwrap();
        let sys = susy_tfd::thermal::ThermalSystem::build(model, &cfg).unwrap();
        let p = ThermalParams::new(x, 1.0).unwrap();
        let vac = thermal_vacuum(&p, &sys.modes, VacuumPath::MatrixExponential).unwrap();
        prop_assert!((vac.state.norm() - 1.0).abs() < 1e-10);
        let (a_beta, b_beta) = thermal_annihilators(&p, &sys.modes).unwrap();
        prop_assert!(a_beta.apply(&vac.state.amplitudes).unwrap().norm() < 1e-8);
        prop_assert!(b_beta.apply(&vac.state.amplitudes).unwrap().norm() < 1e-8);
        let hat = double_hamiltonian(&sys.bundle, &sys.modes.space).unwrap();
        prop_assert!(doubled_expectation(&vac, &hat).unwrap().norm() < 1e-8);
    }
}

#[test]
fn tilde_conjugate_of_physical_hamiltonian_commutes() {
    let cfg = FockSpaceConfig::new(4).unwrap();
    let b = build_interacting_model(ModelParams::new(1.0, 0.0).unwrap(), &cfg).unwrap();
    let d = cfg.as_doubled();
    let h = susy_tfd::fock::embed_physical(&b.h);
    let th = tilde_conjugate_kron(&h, &d);
    let comm = h.mul(&th).unwrap().sub(&th.mul(&h).unwrap()).unwrap();
    assert!(max_abs(&comm.to_dense().unwrap()) < 1e-12);
}
