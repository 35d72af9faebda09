use cornerlab::error::Error;
use cornerlab::fields::IncidentField;
use cornerlab::forward::*;
use cornerlab::medium::*;
use std::f64::consts::PI;

fn disc() -> MediumConfig {
    MediumConfig::disc([0.0, 0.0], 1.0, 2.0)
}

fn square() -> MediumConfig {
    let sq = vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]];
    MediumConfig::polygon(sq, vec![CornerRecord::potential(0.5, 2.5, 0.5)])
}

fn solve_ff(cfg: &MediumConfig, n: usize, f: &IncidentField, angles: usize) -> FarField {
    let m = assemble_medium(cfg, solver_grid(cfg, n)).unwrap();
    let sol = solve_scattering(&m, f, &SolverOptions::default()).unwrap();
    far_field(&sol, &m, angles)
}

#[test]
fn disc_matches_series() {
    let (k, inc) = (2.0, 0.3);
    let ff = solve_ff(&disc(), 128, &IncidentField::plane(k, inc), 128);
    let want = FarField::new(k, ff.angles.clone(), disc_series_far_field(k, [0.0, 0.0], 1.0, 1.0, 2.0, inc, &ff.angles));
    let rel = ff.l2_distance(&want) / want.l2_norm;
    assert!(rel <= 1e-3, "{rel}");
}

#[test]
fn offset_disc_matches_shifted_series() {
    let (k, inc) = (2.0, 1.1);
    let c = [0.3, -0.2];
    let cfg = MediumConfig::disc(c, 0.8, 1.5);
    let ff = solve_ff(&cfg, 128, &IncidentField::plane(k, inc), 64);
    let want = FarField::new(k, ff.angles.clone(), disc_series_far_field(k, c, 0.8, 1.0, 1.5, inc, &ff.angles));
    assert!(ff.l2_distance(&want) / want.l2_norm <= 2e-3);
}

#[test]
fn series_satisfies_optical_theorem() {
    let angles = uniform_angles(256);
    for &(a, c) in &[(1.0, 2.0), (1.4, 0.6)] {
        let ff = FarField::new(3.0, angles.clone(), disc_series_far_field(3.0, [0.0, 0.0], 1.0, a, c, 0.7, &angles));
        let (lhs, rhs) = optical_theorem_defect(&ff, 0.7);
        assert!((lhs - rhs).abs() <= 1e-9 * lhs, "{lhs} {rhs}");
    }
}

#[test]
fn solver_far_field_satisfies_optical_theorem() {
    let ff = solve_ff(&square(), 96, &IncidentField::plane(2.0, 0.4), 128);
    let (lhs, rhs) = optical_theorem_defect(&ff, 0.4);
    assert!((lhs - rhs).abs() <= 0.02 * lhs, "{lhs} {rhs}");
}

#[test]
fn zero_contrast_gives_zero_field() {
    let sq = vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]];
    let mut rec = CornerRecord::potential(0.0, 2.5, 0.5);
    rec.rho_amp = 0.0;
    rec.gamma_amp = 0.0;
    let cfg = MediumConfig::polygon(sq, vec![rec]);
    let m = assemble_medium(&cfg, solver_grid(&cfg, 64)).unwrap();
    let opts = SolverOptions::default();
    let sol = solve_scattering(&m, &IncidentField::bessel(2.0, 3), &opts).unwrap();
    let sup = sol.u_scattered.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(sup <= 10.0 * opts.tol);
    assert_eq!(far_field(&sol, &m, 32).l2_norm, 0.0);
}

fn reciprocity_defect(cfg: &MediumConfig, n: usize) -> f64 {
    // u∞(π/2; 0) against u∞(π; 3π/2) on an 8-direction grid
    let a = solve_ff(cfg, n, &IncidentField::plane(2.0, 0.0), 8);
    let b = solve_ff(cfg, n, &IncidentField::plane(2.0, 1.5 * PI), 8);
    (a.values[2] - b.values[4]).norm() / a.values[2].norm()
}

#[test]
fn reciprocity_without_gradient_term() {
    let cfg = MediumConfig::disc([0.3, -0.2], 0.8, 2.0);
    assert!(reciprocity_defect(&cfg, 96) <= 1e-10);
}

#[test]
fn reciprocity_with_gradient_term_improves_under_refinement() {
    let coarse = reciprocity_defect(&square(), 64);
    let fine = reciprocity_defect(&square(), 128);
    assert!(fine <= 1e-7 && fine < coarse / 10.0, "{coarse} {fine}");
}

fn disc_with(a: f64, c: f64) -> MediumConfig {
    let mut cfg = MediumConfig::disc([0.0, 0.0], 1.0, c);
    if let MediumConfig::Disc(d) = &mut cfg {
        d.a = a;
    }
    cfg
}

fn series_error(a: f64, c: f64, n: usize) -> f64 {
    let ff = solve_ff(&disc_with(a, c), n, &IncidentField::plane(2.0, 0.3), 64);
    let want = FarField::new(2.0, ff.angles.clone(), disc_series_far_field(2.0, [0.0, 0.0], 1.0, a, c, 0.3, &ff.angles));
    ff.l2_distance(&want)
}

#[test]
fn disc_error_halves_under_refinement() {
    let (e1, e2) = (series_error(1.0, 2.0, 128), series_error(1.0, 2.0, 256));
    assert!(e1 >= 2.0 * e2, "{e1} {e2}");
}

#[test]
fn conductivity_disc_converges_to_series() {
    let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| series_error(1.4, 0.6, n)).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[2] / errs[0] <= 0.5);
}

#[test]
fn self_convergence_on_disc() {
    // Cauchy differences; the interface limits the rate to about first order
    let f = IncidentField::plane(2.0, 0.3);
    let ffs: Vec<FarField> = [64, 128, 256].iter().map(|&n| solve_ff(&disc(), n, &f, 64)).collect();
    let d1 = ffs[0].l2_distance(&ffs[1]);
    let d2 = ffs[1].l2_distance(&ffs[2]);
    assert!(d1 >= 1.8 * d2, "{d1} {d2}");
}

#[test]
fn coarse_grid_is_rejected() {
    let cfg = disc();
    let m = assemble_medium(&cfg, solver_grid(&cfg, 16)).unwrap();
    let r = solve_scattering(&m, &IncidentField::plane(6.0, 0.0), &SolverOptions::default());
    assert!(matches!(r, Err(Error::ResolutionTooCoarse { .. })));
}

#[test]
fn norms_are_recomputable() {
    let mut ff = solve_ff(&square(), 64, &IncidentField::plane(2.0, 1.0), 64);
    let (l2, sup) = (ff.l2_norm, ff.sup_norm);
    ff.recompute_norms();
    assert_eq!((l2, sup), (ff.l2_norm, ff.sup_norm));
    assert!(l2 > 0.0 && sup >= l2 / (2.0 * PI).sqrt());
}
