use cornerlab::experiments::*;
use cornerlab::fields::{BoundaryTrace, IncidentField};
use cornerlab::forward::SolverOptions;
use cornerlab::medium::*;
use num_complex::Complex64;

fn square() -> Vec<[f64; 2]> {
    vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]
}

#[test]
fn slope_estimator_recovers_synthetic_orders() {
    for &p in &[0.5, 1.5, 2.5] {
        let cfg = MediumConfig::polygon(square(), vec![CornerRecord::potential(0.5, p, p)]);
        let m = assemble_medium(&cfg, solver_grid(&cfg, 32)).unwrap();
        for c in admissibility_check(&m).corners {
            assert!((c.a_slope.unwrap() - p).abs() <= 0.05, "a {p} {:?}", c.a_slope);
            assert!((c.c_slope.unwrap() - p).abs() <= 0.05, "c {p} {:?}", c.c_slope);
            assert!((c.rho0 - 0.5).abs() <= 1e-3, "{}", c.rho0);
        }
    }
}

fn small_sweep() -> SweepResult {
    let cases = vec![CornerCase {
        name: "square".into(),
        medium: MediumConfig::polygon(square(), vec![CornerRecord::potential(0.5, 2.5, 0.5)]),
        kind: ContrastKind::Potential,
    }];
    let incidents = vec![IncidentField::plane(2.0, 0.3), IncidentField::bessel(2.0, 2)];
    corner_scattering_sweep(&cases, &incidents, &[64, 128], &SolverOptions::default(), 32).unwrap()
}

#[test]
fn sweep_is_reproducible_and_controlled() {
    let a = small_sweep();
    let b = small_sweep();
    let bits = |r: &SweepResult| r.rows.iter().map(|x| (x.l2_norm.to_bits(), x.sup_norm.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let controls: Vec<&SweepRow> = a.rows.iter().filter(|r| r.kind.is_none()).collect();
    assert_eq!(controls.len(), 4);
    assert!(a.noise_floor >= SolverOptions::default().tol);
    assert!(a.rows.iter().all(|r| r.l2_norm >= 0.0 && r.sup_norm >= 0.0));
    assert!(a.passed, "{:?}", a.verdicts);
    assert!(a.verdicts.iter().all(|v| v.passed == Some(true) && v.min_ratio > 10.0));
}

#[test]
fn class_e_pairs_are_recorded_not_asserted() {
    // conductivity jump at a right angle hit by a degree-two Bessel mode
    let cases = vec![CornerCase {
        name: "cond".into(),
        medium: MediumConfig::polygon(square(), vec![CornerRecord::conductivity(0.3, 0.5, 0.5)]),
        kind: ContrastKind::Conductivity,
    }];
    let f = IncidentField::BesselMode { k: 2.0, order: 2, amplitude: Complex64::new(1.0, 0.0), center: [-0.5, -0.5] };
    let r = corner_scattering_sweep(&cases, &[f], &[48, 96], &SolverOptions::default(), 32).unwrap();
    assert!(r.verdicts[0].class_e);
    assert_eq!(r.verdicts[0].passed, None);
}

#[test]
fn uniqueness_identical_media_agree() {
    let cfg = MediumConfig::polygon(square(), vec![CornerRecord::potential(0.5, 2.5, 0.5)]);
    let r = hull_uniqueness_demo(&cfg, &cfg, &IncidentField::plane(2.0, 0.3), 48, &SolverOptions::default(), 32).unwrap();
    assert!(r.discrepancy <= 1e-10);
    assert!(!r.hulls_differ && r.verdict.is_none());
}

#[test]
fn eigenpair_reconstruction_matches() {
    let e = disc_transmission_eigenpair(1.0, 4.0, 0.0, 6.0, 2).unwrap();
    assert!(e.det_residual <= 1e-8 && e.match_residual <= 1e-6);
    assert_eq!(e.v_trace.values.len(), 128);
}

#[test]
fn herglotz_fit_of_plane_wave_saturates() {
    // a plane wave is an exact Herglotz function: ‖g‖ stays bounded as λ → 0
    let k = 3.0;
    let trace = BoundaryTrace::on_circle(&IncidentField::plane(k, 0.7), [0.0, 0.0], 1.0, 128);
    let s = herglotz_study_for(&trace, k, &[1e-2, 1e-4, 1e-6], 64).unwrap();
    assert!(s.misfit_nonincreasing);
    assert!(s.growth < 2.0, "{}", s.growth);
    assert!(s.rows.last().unwrap().misfit < 1e-3);
}

#[test]
fn herglotz_misfit_drops_with_kernel_size() {
    let e = disc_transmission_eigenpair(1.0, 4.0, 0.0, 5.0, 0).unwrap();
    let coarse = herglotz_blowup_study(&e, &[1e-2, 1e-6], 8).unwrap();
    let fine = herglotz_blowup_study(&e, &[1e-2, 1e-6], 64).unwrap();
    assert!(fine.rows[1].misfit <= coarse.rows[1].misfit);
}

#[test]
#[allow(clippy::approx_constant)]
fn classification_examples() {
    let (e, l, n) = classify(&IncidentField::bessel(1.0, 2), 1.5707963, [0.0, 0.0], CLASS_E_TOL).unwrap();
    assert!(e && l == Some(1) && n == 1);
    let (e, l, _) = classify(&IncidentField::plane(1.0, 0.0), std::f64::consts::FRAC_PI_2, [0.0, 0.0], CLASS_E_TOL).unwrap();
    assert!(!e && l.is_none());
}
