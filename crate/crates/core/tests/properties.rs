use cornerlab::asymptotics::{fit_decay, geometric_taus};
use cornerlab::experiments::{disc_determinant, disc_transmission_eigenpair};
use cornerlab::forward::{disc_series_far_field, optical_theorem_defect, uniform_angles, FarField};
use cornerlab::geometry::{exceptional_angle, wrap_angle, Sector};
use cornerlab::medium::fit_log_slope;
use cornerlab::special::{hankel1, hankel1_prime};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decay_fit_recovers_exponent(p in 0.5f64..2.5, re in -3.0f64..3.0, im in -3.0f64..3.0, wiggle in 0.0f64..0.02) {
        prop_assume!(re.hypot(im) > 1e-3);
        let c = Complex64::new(re, im);
        let taus = geometric_taus(50.0, 400.0, 8);
        let vals: Vec<Complex64> = taus.iter().map(|t| c * t.powf(-p) * (1.0 + wiggle * (t / 7.0).sin())).collect();
        let fit = fit_decay(&taus, &vals).unwrap();
        prop_assert!((fit.exponent + p).abs() <= 0.05);
    }

    #[test]
    fn log_slope_recovers_power(s in 0.1f64..3.0, c in 0.01f64..10.0) {
        let rs: Vec<f64> = (1..12).map(|j| 0.5f64.powi(j)).collect();
        let vals: Vec<f64> = rs.iter().map(|r| c * r.powf(s)).collect();
        prop_assert!((fit_log_slope(&rs, &vals).unwrap() - s).abs() <= 1e-9);
    }

    #[test]
    fn wrapped_angles_land_in_range(t in -100.0f64..100.0, m in -5i32..5) {
        let w = wrap_angle(t);
        prop_assert!((0.0..2.0 * PI).contains(&w));
        let d = wrap_angle(t + 2.0 * PI * m as f64) - w;
        prop_assert!(d.abs() <= 1e-9 || d.abs() >= 2.0 * PI - 1e-9);
    }

    #[test]
    fn exceptional_angles_are_detected(n in 0usize..12, l in 1u32..6) {
        let psi0 = l as f64 * PI / (n + 1) as f64;
        prop_assume!(psi0 < 2.0 * PI);
        prop_assert_eq!(exceptional_angle(psi0, n), Some(l));
        prop_assert_eq!(exceptional_angle(psi0 * (1.0 + 1e-6), n), None);
    }

    #[test]
    fn sector_holds_interior_rays(vx in -2.0f64..2.0, vy in -2.0f64..2.0, th in 0.0f64..TAU, ap in 0.1f64..3.1, t in 0.01f64..0.99, r in 0.01f64..0.99) {
        let s = Sector::new([vx, vy], th, ap, 1.0).unwrap();
        prop_assert!(s.contains(s.point(r, t * ap)));
        prop_assert!(!s.contains(s.point(r, ap + t * (2.0 * PI - ap))));
        prop_assert!(!s.contains(s.point(1.0 + r, t * ap)));
    }

    #[test]
    fn hankel_wronskian(n in 0i32..12, x in 0.5f64..30.0) {
        // W[J_n, Y_n] = 2/(πx)
        let (h, dh) = (hankel1(n, x), hankel1_prime(n, x));
        let w = h.re * dh.im - dh.re * h.im;
        prop_assert!((w * PI * x / 2.0 - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn far_field_norms_are_recomputable(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..64)) {
        let values: Vec<Complex64> = vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let mut ff = FarField::new(1.0, uniform_angles(values.len()), values.clone());
        let (l2, sup) = (ff.l2_norm, ff.sup_norm);
        ff.recompute_norms();
        prop_assert_eq!((l2, sup), (ff.l2_norm, ff.sup_norm));
        let want = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * 2.0 * PI / values.len() as f64).sqrt();
        prop_assert!((l2 - want).abs() <= 1e-12 * want.max(1.0));
        prop_assert!(sup * (2.0 * PI).sqrt() >= l2 * (1.0 - 1e-12));
    }

    #[test]
    fn series_conserves_energy(k in 0.5f64..4.0, a in 0.5f64..2.0, c in 0.5f64..3.0, inc in 0.0f64..TAU) {
        let angles = uniform_angles(256);
        let ff = FarField::new(k, angles.clone(), disc_series_far_field(k, [0.0, 0.0], 1.0, a, c, inc, &angles));
        let (lhs, rhs) = optical_theorem_defect(&ff, inc);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.max(1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigenpair_bracket_changes_sign(n0 in 2.0f64..8.0, radius in 0.5f64..1.5, mode in 0i32..3) {
        let e = disc_transmission_eigenpair(radius, n0, 0.0, 12.0 / radius, mode).unwrap();
        let [lo, hi] = e.bracket;
        let (dl, dh) = (disc_determinant(lo, n0, radius, e.mode), disc_determinant(hi, n0, radius, e.mode));
        prop_assert!(dl * dh < 0.0);
        prop_assert!(lo <= e.kappa && e.kappa <= hi);
        prop_assert!(e.match_residual <= 1e-6);
    }
}
