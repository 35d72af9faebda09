use cornerlab::asymptotics::EtaVector;
use cornerlab::cgo::*;
use cornerlab::error::Error;
use cornerlab::geometry::{Point, Sector};
use cornerlab::grid::{max_abs, Grid2, Spectral};
use num_complex::Complex64;

fn gaussian(g: &Grid2, c: Point, s: f64, amp: f64) -> Vec<f64> {
    g.sample(|x| amp * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * s * s)).exp())
}

fn smooth_medium(g: &Grid2) -> (Vec<f64>, Vec<f64>) {
    let gam: Vec<f64> = gaussian(g, [0.1, -0.05], 0.22, 0.4).iter().map(|v| 1.0 + v).collect();
    let rho: Vec<f64> = gaussian(g, [-0.1, 0.1], 0.22, 0.3).iter().map(|v| 1.0 + v).collect();
    (gam, rho)
}

#[test]
fn manufactured_solution_is_recovered() {
    let g = Grid2::centered(256, 8.0, [0.0, 0.0]);
    let sp = Spectral::new(g, true);
    let (c, s) = ([0.2, -0.1], 0.4);
    for &(tau, phi, br) in &[(50.0, 0.3, 1), (200.0, 2.0, -1)] {
        let eta = EtaVector::new(tau, phi, br).unwrap();
        let e = eta.eta();
        let mut gv = Vec::new();
        let f: Vec<Complex64> = g
            .points()
            .iter()
            .map(|x| {
                let dx = x[0] - c[0];
                let dy = x[1] - c[1];
                let v = (-(dx * dx + dy * dy) / (2.0 * s * s)).exp();
                gv.push(Complex64::new(v, 0.0));
                let lap = v * ((dx * dx + dy * dy) / s.powi(4) - 2.0 / (s * s));
                let grad = [-v * dx / (s * s), -v * dy / (s * s)];
                lap + 2.0 * (e[0] * grad[0] + e[1] * grad[1])
            })
            .collect();
        let r = faddeev_apply(&sp, &f, &eta).unwrap();
        let err = r.iter().zip(&gv).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("tau {tau}: manufactured error {err:e}");
        assert!(err < 1e-8 * max_abs(&gv));
        let back = faddeev_operator(&sp, &r, &eta);
        let err = back.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10 * max_abs(&f));
    }
}

#[test]
fn faddeev_is_linear() {
    let g = Grid2::centered(64, 8.0, [0.0, 0.0]);
    let sp = Spectral::new(g, true);
    let eta = EtaVector::new(20.0, 1.0, 1).unwrap();
    let f: Vec<Complex64> = bump(&g, [0.0, 0.0], 1.0, 1.0).iter().map(|&v| Complex64::new(v, 0.5 * v)).collect();
    let f2: Vec<Complex64> = f.iter().map(|v| 2.0 * v).collect();
    let a = faddeev_apply(&sp, &f, &eta).unwrap();
    let b = faddeev_apply(&sp, &f2, &eta).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((2.0 * x - y).norm() <= 1e-15 * y.norm().max(1e-300) * 10.0);
    }
}

#[test]
fn full_equation_holds_under_window() {
    let g = Grid2::centered(256, 8.0, [0.0, 0.0]);
    let (gam, rho) = smooth_medium(&g);
    let k = 1.0;
    let window = plateau(&g, [0.0, 0.0], 0.8, 1.9);
    let q = build_q(g, &gam, &rho, k).unwrap().with_background(k, window.clone()).unwrap();
    for &tau in &[50.0, 120.0] {
        let eta = EtaVector::new(tau, 0.4, 1).unwrap();
        let sol = solve_cgo(&q, &eta, 1e-13, 100).unwrap();
        let pde = sol.pde_residual(&q, 0);
        let full = sol.full_pde_residual(&gam, &rho, k, |i| window[i] == 1.0);
        let drift = drift_field(g, &gam);
        let gid = sol.gradient_identity_residual(&gam, &drift);
        println!("tau {tau}: it {} fp {:e} pde {pde:e} full {full:e} grad {gid:e}", sol.iterations, sol.fixed_point_residual);
        assert!(pde <= 1e-8);
        assert!(full <= 1e-6);
        assert!(gid <= 1e-8);
    }
}

#[test]
fn small_tau_does_not_contract() {
    let g = Grid2::centered(64, 8.0, [0.0, 0.0]);
    let vals = bump(&g, [0.0, 0.0], 1.5, 5.0).iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let q = ContrastPotential::from_values(g, vals).unwrap();
    let r = solve_cgo(&q, &EtaVector::new(0.1, 0.0, 1).unwrap(), 1e-10, 200);
    assert!(matches!(r, Err(Error::NoContraction { .. })));
    assert!(solve_cgo(&q, &EtaVector::new(50.0, 0.0, 1).unwrap(), 1e-10, 200).is_ok());
}

#[test]
fn residual_norm_decays() {
    let g = Grid2::centered(256, 8.0, [0.0, 0.0]);
    let (gam, rho) = bump_medium(g, [0.0, 0.0], 1.0, 0.3, 0.3);
    let q = build_q(g, &gam, &rho, 1.0).unwrap();
    let sector = Sector::new([0.0, 0.0], 0.3, 1.2, 0.8).unwrap();
    let taus = cornerlab::asymptotics::geometric_taus(50.0, 400.0, 6);
    for p in [2.0, 4.0] {
        let rep = residual_decay_report(&q, &sector, &taus, p).unwrap();
        println!("p {p}: {:?} {:?}", rep.fit, rep.rows.iter().map(|r| r.norm).collect::<Vec<_>>());
        assert!(rep.passed);
        assert!(rep.rows.windows(2).all(|w| w[1].norm < w[0].norm));
    }
}
