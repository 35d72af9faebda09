//! Built-in experiment suites, one per acceptance criterion.

use crate::asymptotics::{
    c0_constant, c1_constant, corner_integral, ctilde_constants, ctilde_constants_printed, fit_decay, general_bound_check,
    geometric_taus, incomplete_gamma_check, tau_ladder, Angular, CornerIntegrand, CtildeInput, EtaVector, LocalExpansion,
};
use crate::cgo::{
    build_q, faddeev_apply, plateau, residual_decay_report, solve_cgo, bump_medium, CgoField, ContrastPotential,
};
use crate::error::{Error, Result};
use crate::experiments::{
    corner_scattering_sweep, disc_transmission_eigenpair, herglotz_blowup_study, herglotz_study_for, hull_uniqueness_demo,
    ContrastKind, CornerCase,
};
use crate::fields::{taylor_jet, verify_jet_structure, BoundaryTrace, HarmonicPolynomial2D, IncidentField};
use crate::forward::{
    disc_series_far_field, far_field, optical_theorem_defect, points_per_wavelength, solve_scattering, FarField,
    SolverOptions,
};
use crate::geometry::{exceptional_angle, unit, ConvexPolygon, Sector};
use crate::grid::{max_abs, Grid2, Spectral};
use crate::identities::{sector_identity_residual, transmission_identity_residual, ExpField, ManufacturedCornerPair};
use crate::medium::{assemble_medium, solver_grid, ConstantMedium, CornerRecord, MediumConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunProfile {
    /// Full sizes.
    #[default]
    Laptop,
    /// Reduced grids for quick runs.
    Ci,
}

impl std::str::FromStr for RunProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laptop" => Ok(Self::Laptop),
            "ci" => Ok(Self::Ci),
            _ => Err(Error::Config { field: "profile".into(), message: format!("unknown profile {s:?}") }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
    #[serde(skip)]
    pub csv: String,
    pub seconds: f64,
}

impl SuiteOutcome {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

type Body = (Vec<Check>, serde_json::Value, String);

pub struct Suite {
    pub name: &'static str,
    pub description: &'static str,
    body: fn(RunProfile) -> Result<Body>,
}

impl Suite {
    pub fn run(&self, profile: RunProfile) -> Result<SuiteOutcome> {
        let t = Instant::now();
        let (checks, summary, csv) = (self.body)(profile)?;
        Ok(SuiteOutcome {
            suite: self.name.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            summary,
            csv,
            seconds: t.elapsed().as_secs_f64(),
        })
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("flat csv row");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv")
}

pub fn registry() -> &'static [Suite] {
    const SUITES: &[Suite] = &[
        Suite {
            name: "incomplete_gamma_law",
            description: "quadrature of t^{b-1}e^{-mu t} on [0,1] against Gamma(b)/mu^b",
            body: incomplete_gamma_law,
        },
        Suite {
            name: "corner_volume_constant",
            description: "tau^2 times the sector integral of e^{eta.x} against the closed-form C1",
            body: corner_volume_constant,
        },
        Suite {
            name: "lemma53_constants",
            description: "decay of the gradient corner integral and its vanishing at exceptional apertures",
            body: lemma53_constants,
        },
        Suite {
            name: "degenerate_corner_constant",
            description: "direction search for a nonzero combined corner constant with a Bessel J0 field",
            body: degenerate_corner_constant,
        },
        Suite {
            name: "corner_decay_bounds",
            description: "fitted decay of gradient and potential corner terms against the general bounds",
            body: corner_decay_bounds,
        },
        Suite { name: "cgo_correctness", description: "Faddeev inversion, CGO equation residual and remainder decay", body: cgo_correctness },
        Suite { name: "disc_mie_validation", description: "volume-integral solver against the disc series far field", body: disc_mie_validation },
        Suite {
            name: "transmission_identities",
            description: "domain and sector integral identities on manufactured data",
            body: transmission_identities,
        },
        Suite {
            name: "corner_scattering_sweep",
            description: "far-field positivity of corner media against a zero-contrast control",
            body: corner_sweep_suite,
        },
        Suite {
            name: "hull_uniqueness_square",
            description: "far-field discrepancy of two squares differing in one vertex",
            body: hull_uniqueness_square,
        },
        Suite { name: "herglotz_blowup", description: "regularized Herglotz fits to a disc transmission eigenfunction", body: herglotz_blowup },
        Suite { name: "jet_structure", description: "structural properties of Taylor jets over random fields", body: jet_structure },
    ];
    SUITES
}

pub fn find_suite(name: &str) -> Option<&'static Suite> {
    registry().iter().find(|s| s.name == name)
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GammaRow {
    b: f64,
    mu_re: f64,
    mu_im: f64,
    error: f64,
    bound: f64,
    passed: bool,
}

fn incomplete_gamma_law(_: RunProfile) -> Result<Body> {
    let mut rows = Vec::new();
    for &b in &[0.5, 1.0, 2.0, 3.5] {
        for &re in &[50.0, 100.0, 500.0] {
            for mu in [Complex64::new(re, 0.0), Complex64::new(re, re), Complex64::new(re, -re)] {
                let g = incomplete_gamma_check(b, mu, 1.0)?;
                let bound = 10.0 * (-re / 2.0f64).exp();
                rows.push(GammaRow { b, mu_re: mu.re, mu_im: mu.im, error: g.error, bound, passed: g.error <= bound });
            }
        }
    }
    let worst = rows.iter().map(|r| r.error / r.bound).fold(0.0, f64::max);
    let checks = vec![check("error_within_bound", rows.iter().all(|r| r.passed), format!("max error/bound {worst:.3e} over {} cases", rows.len()))];
    Ok((checks, json!({ "cases": rows.len(), "max_error_over_bound": worst }), to_csv(&rows)))
}

#[derive(Serialize)]
struct C1Row {
    psi0: f64,
    phi: f64,
    quadrature_re: f64,
    quadrature_im: f64,
    closed_re: f64,
    closed_im: f64,
    rel_error: f64,
}

fn corner_volume_constant(_: RunProfile) -> Result<Body> {
    let tau = 200.0;
    let mut rows = Vec::new();
    for i in 0..5 {
        let psi0 = 0.5 + 0.5 * i as f64;
        let s = Sector::new([0.0, 0.0], 0.0, psi0, 1.0)?;
        for &f in &[-0.7, -0.35, 0.0, 0.35, 0.7] {
            let phi = psi0 / 2.0 + f * (FRAC_PI_2 - psi0 / 2.0);
            let eta = EtaVector::new(tau, phi, 1)?;
            let integrand = CornerIntegrand { radial_power: 0.0, angular: Angular::Constant(Complex64::new(1.0, 0.0)) };
            let q = corner_integral(&s, &integrand, &eta)? * tau * tau;
            let c = c1_constant(psi0, &eta);
            rows.push(C1Row {
                psi0,
                phi,
                quadrature_re: q.re,
                quadrature_im: q.im,
                closed_re: c.re,
                closed_im: c.im,
                rel_error: (q - c).norm() / c.norm(),
            });
        }
    }
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let min_c = rows.iter().map(|r| Complex64::new(r.closed_re, r.closed_im).norm()).fold(f64::INFINITY, f64::min);
    let checks = vec![
        check("relative_error", worst <= 1e-4, format!("max rel error {worst:.3e}")),
        check("constant_nonzero", min_c > 1e-8, format!("min |C1| {min_c:.3e}")),
    ];
    Ok((checks, json!({ "tau": tau, "max_rel_error": worst, "min_abs_c1": min_c }), to_csv(&rows)))
}

#[derive(Serialize)]
struct DecayRow {
    degree_n: usize,
    psi0: f64,
    exceptional: bool,
    exponent: f64,
    expected: f64,
    prefactor_300: f64,
}

fn lemma53_constants(_: RunProfile) -> Result<Body> {
    let taus = geometric_taus(50.0, 400.0, 8);
    let mut rows = Vec::new();
    let mut exp_ok = true;
    let mut exc_ok = true;
    let mut ratios = Vec::new();
    for n in 0..=3usize {
        let v = HarmonicPolynomial2D::new(n + 1, Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0));
        let grad = |psi: f64| v.gradient(unit(psi));
        let integrand = CornerIntegrand { radial_power: n as f64, angular: Angular::EtaDot(&grad) };
        let prefactor = |psi0: f64| -> Result<(f64, Option<f64>)> {
            let s = Sector::new([0.0, 0.0], 0.0, psi0, 1.0)?;
            let eta = EtaVector::new(1.0, psi0 / 2.0, 1)?;
            let at300 = corner_integral(&s, &integrand, &eta.with_tau(300.0))?.norm() * 300f64.powi(n as i32 + 1);
            let vals = tau_ladder(&s, &integrand, &eta, &taus)?;
            let fit = fit_decay(&taus, &vals).ok().map(|f| f.exponent);
            Ok((at300, fit))
        };
        let expected = -1.0 - n as f64;
        let mut regular = Vec::new();
        for &psi0 in &[0.9, 1.3, 1.9, 2.6] {
            let (p, fit) = prefactor(psi0)?;
            let e = fit.unwrap_or(f64::NAN);
            exp_ok &= (e - expected).abs() <= 0.05;
            regular.push(p);
            rows.push(DecayRow { degree_n: n, psi0, exceptional: false, exponent: e, expected, prefactor_300: p });
        }
        regular.sort_by(f64::total_cmp);
        let median = 0.5 * (regular[1] + regular[2]);
        for l in 1..=n {
            let psi0 = l as f64 * PI / (n + 1) as f64;
            exc_ok &= exceptional_angle(psi0, n).is_some();
            let (p, _) = prefactor(psi0)?;
            ratios.push(p / median);
            exc_ok &= p <= 1e-3 * median;
            rows.push(DecayRow { degree_n: n, psi0, exceptional: true, exponent: f64::NAN, expected, prefactor_300: p });
        }
        // the closed form agrees with the rescaled quadrature away from exceptional angles
        let s = Sector::new([0.0, 0.0], 0.0, 1.3, 1.0)?;
        let eta = EtaVector::new(300.0, 0.65, 1)?;
        let q = corner_integral(&s, &integrand, &eta)? * 300f64.powi(n as i32 + 1);
        let c = c0_constant(&v, 1.3, &eta)?;
        exp_ok &= (q - c).norm() <= 1e-3 * c.norm();
    }
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let checks = vec![
        check("decay_exponents", exp_ok, "fitted exponents within 0.05 of 1-n-N and closed forms match".into()),
        check("exceptional_vanishing", exc_ok, format!("max exceptional/median prefactor {worst:.3e}")),
    ];
    Ok((checks, json!({ "max_exceptional_ratio": worst, "rows": rows.len() }), to_csv(&rows)))
}

#[derive(Serialize)]
struct CtildeRow {
    psi0: f64,
    rho0: f64,
    gamma0: f64,
    degenerate: bool,
    max_ctilde1: f64,
    max_ctilde1_printed: f64,
    quadrature_rel_error: f64,
}

fn degenerate_corner_constant(_: RunProfile) -> Result<Body> {
    let k = 1.0;
    let jet = taylor_jet(&IncidentField::bessel(k, 0), [0.0, 0.0], 4)?;
    let v0 = jet.terms[0][0];
    let v2 = jet.terms[2].clone();
    let mut rows = Vec::new();
    for &psi0 in &[PI / 3.0, FRAC_PI_2, 2.0] {
        let s = Sector::new([0.0, 0.0], 0.0, psi0, 1.0)?;
        let half = FRAC_PI_2 - psi0 / 2.0;
        let phis: Vec<f64> = (0..64).map(|j| psi0 / 2.0 + half * (-0.95 + 1.9 * j as f64 / 63.0)).collect();
        // one quadrature cross-check of C̃₀ per aperture
        let eta = EtaVector::new(300.0, psi0 / 2.0, 1)?;
        let grad = |psi: f64| {
            let x = unit(psi);
            [crate::poly::eval(&crate::poly::d1(&v2), x), crate::poly::eval(&crate::poly::d2(&v2), x)]
        };
        let f = CornerIntegrand { radial_power: 1.0, angular: Angular::EtaDot(&grad) };
        let q = corner_integral(&s, &f, &eta)? * 300.0 * 300.0;
        let inp0 = CtildeInput { v0, gamma0: 1.0, rho0: 0.0, k };
        let (c0, _) = ctilde_constants(&v2, &inp0, psi0, &eta)?;
        let qerr = (q - c0).norm() / c0.norm().max(1e-300);
        for &rho0 in &[0.0, 0.5] {
            for &gamma0 in &[0.3, 0.7] {
                let inp = CtildeInput { v0, gamma0, rho0, k };
                let mut best: f64 = 0.0;
                let mut best_printed: f64 = 0.0;
                for &phi in &phis {
                    let eta = EtaVector::new(1.0, phi, 1)?;
                    best = best.max(ctilde_constants(&v2, &inp, psi0, &eta)?.1.norm());
                    best_printed = best_printed.max(ctilde_constants_printed(&v2, &inp, psi0, &eta)?.1.norm());
                }
                let degenerate = (psi0 - FRAC_PI_2).abs() < 1e-12 && rho0 == 0.0;
                rows.push(CtildeRow {
                    psi0,
                    rho0,
                    gamma0,
                    degenerate,
                    max_ctilde1: best,
                    max_ctilde1_printed: best_printed,
                    quadrature_rel_error: qerr,
                });
            }
        }
    }
    let nondeg_min = rows.iter().filter(|r| !r.degenerate).map(|r| r.max_ctilde1).fold(f64::INFINITY, f64::min);
    let deg_max = rows.iter().filter(|r| r.degenerate).map(|r| r.max_ctilde1).fold(0.0, f64::max);
    let deg_printed = rows.iter().filter(|r| r.degenerate).map(|r| r.max_ctilde1_printed).fold(0.0, f64::max);
    let qerr = rows.iter().map(|r| r.quadrature_rel_error).fold(0.0, f64::max);
    let checks = vec![
        check("nondegenerate_nonzero", nondeg_min > 1e-6, format!("min over cases of max |C~1| {nondeg_min:.3e}")),
        check(
            "degenerate_vanishes",
            deg_max <= 1e-10,
            format!("max |C~1| at right angle, rho0=0: {deg_max:.3e} (printed formula {deg_printed:.3e})"),
        ),
        check("quadrature_agreement", qerr <= 1e-3, format!("max rel error of C~0 against quadrature {qerr:.3e}")),
    ];
    let summary = json!({ "nondegenerate_min": nondeg_min, "degenerate_max": deg_max, "degenerate_max_printed": deg_printed });
    Ok((checks, summary, to_csv(&rows)))
}

#[derive(Serialize)]
struct BoundRow {
    psi0: f64,
    alpha: f64,
    beta: f64,
    gradient_exponent: f64,
    gradient_bound: f64,
    potential_exponent: f64,
    potential_bound: f64,
    passed: bool,
}

fn corner_decay_bounds(_: RunProfile) -> Result<Body> {
    let taus = geometric_taus(20.0, 300.0, 8);
    let mut rows = Vec::new();
    for &psi0 in &[1.2, 2.0] {
        let s = Sector::new([0.0, 0.0], 0.0, psi0, 1.0)?;
        let eta = EtaVector::new(1.0, psi0 / 2.0 + 0.1, 1)?;
        for alpha in 0..3 {
            for beta in 0..3 {
                let (a, b) = (alpha as f64, beta as f64);
                let le = LocalExpansion::constant(psi0, a, b, a, b);
                let r = general_bound_check(&le, &s, &eta, &taus, 1.5)?;
                rows.push(BoundRow {
                    psi0,
                    alpha: a,
                    beta: b,
                    gradient_exponent: r.gradient.fit.exponent,
                    gradient_bound: r.gradient.bound,
                    potential_exponent: r.potential.fit.exponent,
                    potential_bound: r.potential.bound,
                    passed: r.passed(),
                });
            }
        }
    }
    let ok = rows.iter().all(|r| r.passed);
    let slack = rows
        .iter()
        .map(|r| (r.gradient_exponent - r.gradient_bound).max(r.potential_exponent - r.potential_bound))
        .fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![check("exponents_within_bounds", ok, format!("max exponent minus bound {slack:.3e}"))];
    Ok((checks, json!({ "max_excess": slack }), to_csv(&rows)))
}

#[derive(Serialize)]
struct CgoRow {
    quantity: String,
    parameter: f64,
    value: f64,
    threshold: f64,
    passed: bool,
}

fn gaussian(g: &Grid2, c: [f64; 2], s: f64, amp: f64) -> Vec<f64> {
    g.sample(|x| amp * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (2.0 * s * s)).exp())
}

fn cgo_correctness(p: RunProfile) -> Result<Body> {
    let n = if p == RunProfile::Laptop { 512 } else { 256 };
    let g = Grid2::centered(n, 8.0, [0.0, 0.0]);
    let mut rows = Vec::new();
    // manufactured solution through the Faddeev inverse
    let sp = Spectral::new(g, true);
    let (c, s) = ([0.2, -0.1], 0.4);
    for &(tau, phi, br) in &[(50.0, 0.3, 1), (200.0, 2.0, -1)] {
        let eta = EtaVector::new(tau, phi, br)?;
        let e = eta.eta();
        let mut want = Vec::with_capacity(g.len());
        let f: Vec<Complex64> = g
            .points()
            .iter()
            .map(|x| {
                let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
                let v = (-(dx * dx + dy * dy) / (2.0 * s * s)).exp();
                want.push(Complex64::new(v, 0.0));
                let lap = v * ((dx * dx + dy * dy) / s.powi(4) - 2.0 / (s * s));
                lap + 2.0 * (e[0] * (-v * dx / (s * s)) + e[1] * (-v * dy / (s * s)))
            })
            .collect();
        let r = faddeev_apply(&sp, &f, &eta)?;
        let err = r.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / max_abs(&want);
        rows.push(CgoRow { quantity: "manufactured".into(), parameter: tau, value: err, threshold: 1e-8, passed: err <= 1e-8 });
    }
    // divergence-form equation for the full CGO solution
    let gam: Vec<f64> = gaussian(&g, [0.1, -0.05], 0.22, 0.4).iter().map(|v| 1.0 + v).collect();
    let rho: Vec<f64> = gaussian(&g, [-0.1, 0.1], 0.22, 0.3).iter().map(|v| 1.0 + v).collect();
    let k = 1.0;
    let window = plateau(&g, [0.0, 0.0], 0.8, 1.9);
    let q = build_q(g, &gam, &rho, k)?.with_background(k, window.clone())?;
    for &tau in &[50.0, 120.0] {
        let sol = solve_cgo(&q, &EtaVector::new(tau, 0.4, 1)?, 1e-13, 100)?;
        let full = sol.full_pde_residual(&gam, &rho, k, |i| window[i] == 1.0);
        rows.push(CgoRow { quantity: "pde".into(), parameter: tau, value: full, threshold: 1e-6, passed: full <= 1e-6 });
    }
    // remainder decay for a smooth bump
    let (gb, rb) = bump_medium(g, [0.0, 0.0], 1.0, 0.3, 0.3);
    let qb = build_q(g, &gb, &rb, 1.0)?;
    let sector = Sector::new([0.0, 0.0], 0.3, 1.2, 0.8)?;
    let taus = geometric_taus(50.0, 400.0, 6);
    for pw in [2.0, 4.0] {
        let rep = residual_decay_report(&qb, &sector, &taus, pw)?;
        let e = rep.fit.map(|f| f.exponent).unwrap_or(f64::NEG_INFINITY);
        rows.push(CgoRow { quantity: "decay".into(), parameter: pw, value: e, threshold: rep.bound, passed: rep.passed });
    }
    let part = |q: &str| rows.iter().filter(|r| r.quantity == q).all(|r| r.passed);
    let worst = |q: &str| rows.iter().filter(|r| r.quantity == q).map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let checks = vec![
        check("manufactured_recovery", part("manufactured"), format!("max rel error {:.3e}", worst("manufactured"))),
        check("pde_residual", part("pde"), format!("max rel residual {:.3e}", worst("pde"))),
        check("remainder_decay", part("decay"), format!("max fitted exponent {:.3}", worst("decay"))),
    ];
    Ok((checks, json!({ "grid": n }), to_csv(&rows)))
}

#[derive(Serialize)]
struct FarFieldRow {
    angle: f64,
    re: f64,
    im: f64,
    oracle_re: f64,
    oracle_im: f64,
}

fn disc_mie_validation(p: RunProfile) -> Result<Body> {
    let n = if p == RunProfile::Laptop { 256 } else { 128 };
    let (k, inc) = (2.0, 0.3);
    let cfg = MediumConfig::disc([0.0, 0.0], 1.0, 2.0);
    let m = assemble_medium(&cfg, solver_grid(&cfg, n))?;
    let ppw = points_per_wavelength(&m, k);
    let sol = solve_scattering(&m, &IncidentField::plane(k, inc), &SolverOptions::default())?;
    let ff = far_field(&sol, &m, 128);
    let oracle = FarField::new(k, ff.angles.clone(), disc_series_far_field(k, [0.0, 0.0], 1.0, 1.0, 2.0, inc, &ff.angles));
    let rel = ff.l2_distance(&oracle) / oracle.l2_norm;
    let (lhs, rhs) = optical_theorem_defect(&ff, inc);
    let opt = (lhs - rhs).abs() / lhs;
    let rows: Vec<FarFieldRow> = ff
        .angles
        .iter()
        .zip(ff.values.iter().zip(&oracle.values))
        .map(|(&angle, (v, o))| FarFieldRow { angle, re: v.re, im: v.im, oracle_re: o.re, oracle_im: o.im })
        .collect();
    let checks = vec![
        check("series_agreement", rel <= 1e-3, format!("relative L2 {rel:.3e}")),
        check("resolution", ppw >= 10.0, format!("{ppw:.1} points per wavelength")),
        check("optical_theorem", opt <= 0.02, format!("relative defect {opt:.3e}")),
    ];
    let summary = json!({ "grid": n, "relative_l2": rel, "ppw": ppw, "optical_defect": opt, "iterations": sol.iterations });
    Ok((checks, summary, to_csv(&rows)))
}

#[derive(Serialize)]
struct IdentityRow {
    identity: String,
    parameter: f64,
    residual: f64,
    boundary_term: f64,
}

fn transmission_identities(p: RunProfile) -> Result<Body> {
    let k = 2.0;
    let med = ConstantMedium { a: 1.3, c: 2.0 };
    let kappa = k * (2.0f64 / 1.3).sqrt();
    let omega = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.1], [1.2, 0.8], [0.5, 1.2], [-0.2, 0.6]])?;
    let u = IncidentField::plane(kappa, 0.3);
    let v = IncidentField::plane(k, 1.2);
    let w = ExpField::cgo_like(5.0, 0.7, kappa);
    let mut rows = Vec::new();
    let hs = [0.1, 0.05, 0.025, 0.0125];
    for &h in &hs {
        let r = transmission_identity_residual(&med, k, &u, &v, &w, &omega, h)?;
        rows.push(IdentityRow { identity: "domain".into(), parameter: h, residual: r.residual, boundary_term: r.boundary_term });
    }
    let dom: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let order = (dom[0] / dom[3]).ln() / (hs[0] / hs[3]).ln();
    let finest = dom[3];

    let sector = Sector::new([0.0, 0.0], 0.2, FRAC_PI_2, 0.5)?;
    let pair = ManufacturedCornerPair::new(k, sector);
    let n = if p == RunProfile::Laptop { 128 } else { 96 };
    let g = Grid2::centered(n, 8.0, [0.0, 0.0]);
    let qv = g.sample(|x| -k * k * pair.contrast(x));
    let q = ContrastPotential::from_values(g, qv)?.with_background(k, plateau(&g, [0.0, 0.0], 0.7, 1.5))?;
    let mut sector_res = Vec::new();
    let mut boundary = Vec::new();
    for &tau in &[100.0, 200.0] {
        let eta = EtaVector::new(tau, sector.bisector(), 1)?;
        let sol = solve_cgo(&q, &eta, 1e-13, 100)?;
        let wf = CgoField::new(&sol);
        let r = sector_identity_residual(&pair, k, &pair.u(), &pair.v_field(), &wf, &sector, 1.0 / tau)?;
        sector_res.push(r.residual);
        boundary.push(r.boundary_term);
        rows.push(IdentityRow { identity: "sector".into(), parameter: tau, residual: r.residual, boundary_term: r.boundary_term });
    }
    // O(τe^{−δτε}) with d on the bisector gives δ = cos(ψ₀/2)
    let delta = (sector.aperture / 2.0).cos();
    let law = 2.0 * (-delta * sector.radius * 100.0).exp();
    let ratio = boundary[1] / boundary[0];
    let sector_max = sector_res.iter().cloned().fold(0.0, f64::max);
    let checks = vec![
        check("domain_residual", finest <= 1e-5, format!("residual at h={} is {finest:.3e}", hs[3])),
        check("domain_order", order >= 1.8, format!("observed order {order:.2}")),
        check("sector_residual", sector_max <= 1e-5, format!("max sector residual {sector_max:.3e}")),
        check(
            "boundary_decay",
            boundary[0] > 0.0 && ratio <= 2.0 * law,
            format!("boundary ratio tau 200/100 {ratio:.3e} against law {law:.3e}"),
        ),
    ];
    let summary = json!({ "domain_order": order, "domain_finest": finest, "sector_max": sector_max, "boundary_ratio": ratio, "law": law });
    Ok((checks, summary, to_csv(&rows)))
}

fn unit_square() -> Vec<[f64; 2]> {
    vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]
}

fn corner_sweep_suite(p: RunProfile) -> Result<Body> {
    let k = 2.0;
    let potential = MediumConfig::polygon(unit_square(), vec![CornerRecord::potential(0.5, 2.5, 0.5)]);
    let mut rc = CornerRecord::conductivity(0.3, 0.0, 0.5);
    rc.rho_amp = 0.0;
    let tri = vec![[0.0, 0.0], [1f64.cos(), -1f64.sin()], [1f64.cos(), 1f64.sin()]];
    let conductivity = MediumConfig::polygon(tri, vec![rc]);
    let square_cond = MediumConfig::polygon(unit_square(), vec![rc]);
    let cases = vec![
        CornerCase { name: "potential_square".into(), medium: potential, kind: ContrastKind::Potential },
        CornerCase { name: "conductivity_two_radian".into(), medium: conductivity, kind: ContrastKind::Conductivity },
        CornerCase { name: "conductivity_square".into(), medium: square_cond, kind: ContrastKind::Conductivity },
    ];
    let bessel = IncidentField::BesselMode { k, order: 2, amplitude: Complex64::new(1.0, 0.0), center: [-0.5, -0.5] };
    let incidents = vec![IncidentField::plane(k, 0.3), bessel];
    let levels: &[usize] = if p == RunProfile::Laptop { &[64, 128] } else { &[48, 96] };
    let r = corner_scattering_sweep(&cases, &incidents, levels, &SolverOptions::default(), 128)?;
    let asserted = r.verdicts.iter().filter(|v| v.passed.is_some()).count();
    let flagged = r.verdicts.iter().filter(|v| v.class_e).count();
    let worst_ratio = r.verdicts.iter().filter(|v| !v.class_e).map(|v| v.min_ratio).fold(f64::INFINITY, f64::min);
    let worst_drift = r.verdicts.iter().filter(|v| !v.class_e).map(|v| v.max_drift).fold(0.0, f64::max);
    let checks = vec![
        check(
            "positivity",
            r.passed && asserted > 0,
            format!("{asserted} asserted pairs, min ratio {worst_ratio:.3e}, max drift {worst_drift:.3e}"),
        ),
        check("class_e_recorded", flagged >= 1, format!("{flagged} class-E pairs recorded without assertion")),
    ];
    let summary = json!({ "noise_floor": r.noise_floor, "verdicts": r.verdicts });
    Ok((checks, summary, to_csv(&r.rows)))
}

fn hull_uniqueness_square(p: RunProfile) -> Result<Body> {
    let k = 2.0;
    let corner = vec![CornerRecord::potential(0.5, 2.5, 0.5)];
    let sq = unit_square();
    let mut moved = sq.clone();
    let d = 0.2 / 2f64.sqrt();
    moved[2] = [0.5 + d, 0.5 + d];
    let m1 = MediumConfig::polygon(sq, corner.clone());
    let m2 = MediumConfig::polygon(moved, corner);
    let f = IncidentField::plane(k, 0.3);
    let n = if p == RunProfile::Laptop { 64 } else { 48 };
    let opts = SolverOptions::default();
    let r = hull_uniqueness_demo(&m1, &m2, &f, n, &opts, 128)?;
    let same = hull_uniqueness_demo(&m1, &m1, &f, n, &opts, 128)?;
    let checks = vec![
        check(
            "discrimination",
            r.verdict == Some(true),
            format!("discrepancy {:.3e} against self-convergence {:.3e}", r.discrepancy, r.self_convergence),
        ),
        check("identical_media", same.discrepancy <= 1e-10, format!("identical discrepancy {:.3e}", same.discrepancy)),
    ];
    #[derive(Serialize)]
    struct Row {
        pair: &'static str,
        discrepancy: f64,
        self_convergence: f64,
        hulls_differ: bool,
        admissible: bool,
    }
    let rows = [("moved_vertex", &r), ("identical", &same)].map(|(pair, x)| Row {
        pair,
        discrepancy: x.discrepancy,
        self_convergence: x.self_convergence,
        hulls_differ: x.hulls_differ,
        admissible: x.admissibility.iter().all(|a| a.admissible),
    });
    Ok((checks, json!({ "report": r }), to_csv(&rows)))
}

#[derive(Serialize)]
struct HerglotzCsv {
    target: &'static str,
    lambda: f64,
    misfit: f64,
    g_norm: f64,
}

fn herglotz_blowup(_: RunProfile) -> Result<Body> {
    let e = disc_transmission_eigenpair(1.0, 4.0, 0.0, 5.0, 0)?;
    let lambdas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let study = herglotz_blowup_study(&e, &lambdas, 64)?;
    let plane = BoundaryTrace::on_circle(&IncidentField::plane(e.kappa, 0.0), [0.0, 0.0], 1.0, 128);
    let control = herglotz_study_for(&plane, e.kappa, &lambdas, 64)?;
    let mut rows: Vec<HerglotzCsv> = study
        .rows
        .iter()
        .map(|r| HerglotzCsv { target: "eigenfunction", lambda: r.lambda, misfit: r.misfit, g_norm: r.g_norm })
        .collect();
    rows.extend(control.rows.iter().map(|r| HerglotzCsv { target: "plane_wave", lambda: r.lambda, misfit: r.misfit, g_norm: r.g_norm }));
    let checks = vec![
        check("eigenpair", e.det_residual <= 1e-8 && e.match_residual <= 1e-6, format!("kappa {:.10}, |det| {:.2e}", e.kappa, e.det_residual)),
        check("misfit_nonincreasing", study.misfit_nonincreasing, "misfit over decreasing lambda".into()),
        check("g_growth", study.g_nondecreasing && study.growth >= 10.0, format!("norm growth factor {:.4}", study.growth)),
    ];
    let summary = json!({ "eigenpair": { "kappa": e.kappa, "mode": e.mode, "det": e.det_residual }, "study": study, "plane_wave_growth": control.growth });
    Ok((checks, summary, to_csv(&rows)))
}

#[derive(Serialize)]
struct JetRow {
    config: usize,
    descriptor: String,
    leading_n: usize,
    max_residual: f64,
    passed: bool,
}

fn jet_structure(_: RunProfile) -> Result<Body> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let mut rows = Vec::new();
    for i in 0..100 {
        let k = rng.gen_range(0.5..3.0);
        let f = if i % 2 == 0 {
            IncidentField::plane(k, rng.gen_range(0.0..2.0 * PI))
        } else {
            IncidentField::BesselMode {
                k,
                order: rng.gen_range(0..=5),
                amplitude: Complex64::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)),
                center: [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)],
            }
        };
        // vertices at, near, or away from the Bessel centre
        let center = match (&f, i % 3) {
            (IncidentField::BesselMode { center, .. }, 0) => *center,
            _ => [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)],
        };
        let jet = taylor_jet(&f, center, 6)?;
        let rep = verify_jet_structure(&jet, 1e-10);
        rows.push(JetRow { config: i, descriptor: f.descriptor(), leading_n: jet.n, max_residual: rep.max_residual(), passed: rep.all_passed() });
    }
    let ok = rows.iter().all(|r| r.passed);
    let worst = rows.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let checks = vec![check("structure", ok, format!("max residual {worst:.3e} over {} configurations", rows.len()))];
    Ok((checks, json!({ "max_residual": worst }), to_csv(&rows)))
}

/// Consolidated report over the closed-form and τ-ladder suites.
pub fn asymptotics_report(profile: RunProfile) -> Result<Vec<SuiteOutcome>> {
    ["incomplete_gamma_law", "corner_volume_constant", "lemma53_constants", "degenerate_corner_constant", "corner_decay_bounds"]
        .iter()
        .map(|n| find_suite(n).expect("registered").run(profile))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let r = registry();
        assert_eq!(r.len(), 12);
        let mut names: Vec<_> = r.iter().map(|s| s.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 12);
        for n in ["lemma53_constants", "disc_mie_validation", "hull_uniqueness_square"] {
            assert!(find_suite(n).is_some());
        }
    }

    #[test]
    fn csv_has_header() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: bool,
        }
        let s = to_csv(&[R { a: 1.5, b: true }]);
        assert_eq!(s, "a,b\n1.5,true\n");
    }
}
