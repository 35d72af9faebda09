//! Studies combining the forward solver, the corner asymptotics and the
//! transmission-eigenvalue oracle.

use crate::error::{Error, Result};
use crate::fields::{class_e_membership, herglotz_least_squares, taylor_jet, BoundaryTrace, IncidentField};
use crate::forward::{far_field, solve_scattering, FarField, SolverOptions};
use crate::geometry::{corner_sectors, exceptional_angle_within};
use crate::medium::{assemble_medium, fit_log_slope, solver_grid, MediumConfig, MediumSpec};
use crate::special::{bessel_j, bessel_j_prime};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastKind {
    Conductivity,
    Potential,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerCase {
    pub name: String,
    pub medium: MediumConfig,
    pub kind: ContrastKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub case: String,
    pub psi0: f64,
    pub kind: Option<ContrastKind>,
    pub incident: String,
    pub class_e: bool,
    pub l2_norm: f64,
    pub sup_norm: f64,
    pub level: usize,
    pub error: Option<String>,
}

/// Verdict for one (case, incident) pair across grid levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairVerdict {
    pub case: String,
    pub incident: String,
    pub class_e: bool,
    /// Smallest `‖u^∞‖ / floor` over levels.
    pub min_ratio: f64,
    /// Largest relative far-field change between successive levels.
    pub max_drift: f64,
    /// `None` for class-𝓔 pairs, which are recorded only.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<PairVerdict>,
    pub noise_floor: f64,
    pub passed: bool,
}

/// Tolerance used to classify floating-point apertures.
pub const CLASS_E_TOL: f64 = 1e-6;

fn class_e_flag(m: &MediumSpec, kind: ContrastKind, f: &IncidentField) -> Result<bool> {
    if kind == ContrastKind::Potential {
        return Ok(false);
    }
    let eps = 0.25 * m.hull.min_edge();
    for s in corner_sectors(&m.hull, eps)? {
        let jet = taylor_jet(f, s.vertex, 8)?;
        if exceptional_angle_within(s.aperture, jet.n, CLASS_E_TOL).is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

fn zero_control(cfg: &MediumConfig) -> MediumConfig {
    match cfg {
        MediumConfig::Polygon(p) => {
            let mut p = p.clone();
            for c in &mut p.corners {
                c.rho0 = 0.0;
                c.gamma0 = 0.0;
                c.rho_amp = 0.0;
                c.gamma_amp = 0.0;
            }
            p.bulk_a = 0.0;
            p.bulk_c = 0.0;
            MediumConfig::Polygon(p)
        }
        MediumConfig::Disc(d) => {
            let mut d = d.clone();
            d.a = 1.0;
            d.c = 1.0;
            MediumConfig::Disc(d)
        }
    }
}

/// Far fields of every (case, incident) pair at every grid level, plus a
/// zero-contrast control per incident and level.
pub fn corner_scattering_sweep(
    cases: &[CornerCase],
    incidents: &[IncidentField],
    levels: &[usize],
    opts: &SolverOptions,
    n_angles: usize,
) -> Result<SweepResult> {
    if cases.is_empty() || levels.is_empty() {
        return Err(Error::PreconditionViolated("sweep needs cases and grid levels".into()));
    }
    let mut rows = Vec::new();
    let mut floor: f64 = 0.0;
    let control = zero_control(&cases[0].medium);
    for f in incidents {
        for &n in levels {
            let m = assemble_medium(&control, solver_grid(&control, n))?;
            let ff = solve_scattering(&m, f, opts).map(|s| far_field(&s, &m, n_angles));
            let (l2, sup, err) = match &ff {
                Ok(ff) => (ff.l2_norm, ff.sup_norm, None),
                Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
            };
            floor = floor.max(if l2.is_finite() { l2 } else { 0.0 });
            rows.push(SweepRow {
                case: "zero_contrast_control".into(),
                psi0: m.hull.interior_angles()[0],
                kind: None,
                incident: f.descriptor(),
                class_e: false,
                l2_norm: l2,
                sup_norm: sup,
                level: n,
                error: err,
            });
        }
    }
    // A vanishing control still leaves the solver tolerance as the floor.
    let noise_floor = floor.max(opts.tol);
    let mut verdicts = Vec::new();
    for case in cases {
        for f in incidents {
            let mut prev: Option<FarField> = None;
            let mut min_ratio = f64::INFINITY;
            let mut max_drift: f64 = 0.0;
            let mut class_e = false;
            let mut failed = false;
            for &n in levels {
                let res = assemble_medium(&case.medium, solver_grid(&case.medium, n)).and_then(|m| {
                    let flag = class_e_flag(&m, case.kind, f)?;
                    let sol = solve_scattering(&m, f, opts)?;
                    Ok((m.hull.interior_angles()[0], flag, far_field(&sol, &m, n_angles)))
                });
                match res {
                    Ok((psi0, flag, ff)) => {
                        class_e = flag;
                        min_ratio = min_ratio.min(ff.l2_norm / noise_floor);
                        if let Some(p) = &prev {
                            max_drift = max_drift.max(p.l2_distance(&ff) / ff.l2_norm.max(f64::MIN_POSITIVE));
                        }
                        rows.push(SweepRow {
                            case: case.name.clone(),
                            psi0,
                            kind: Some(case.kind),
                            incident: f.descriptor(),
                            class_e: flag,
                            l2_norm: ff.l2_norm,
                            sup_norm: ff.sup_norm,
                            level: n,
                            error: None,
                        });
                        prev = Some(ff);
                    }
                    Err(e) => {
                        failed = true;
                        rows.push(SweepRow {
                            case: case.name.clone(),
                            psi0: f64::NAN,
                            kind: Some(case.kind),
                            incident: f.descriptor(),
                            class_e: false,
                            l2_norm: f64::NAN,
                            sup_norm: f64::NAN,
                            level: n,
                            error: Some(e.to_string()),
                        });
                    }
                }
            }
            let passed = if class_e {
                None
            } else {
                Some(!failed && levels.len() >= 2 && min_ratio > 10.0 && max_drift <= 0.05)
            };
            verdicts.push(PairVerdict {
                case: case.name.clone(),
                incident: f.descriptor(),
                class_e,
                min_ratio,
                max_drift,
                passed,
            });
        }
    }
    let passed = verdicts.iter().all(|v| v.passed != Some(false));
    Ok(SweepResult { rows, verdicts, noise_floor, passed })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CornerAdmissibility {
    pub index: usize,
    pub rho0: f64,
    pub sigma: f64,
    /// Fitted vanishing order of `a − 1`; `None` when identically zero.
    pub a_slope: Option<f64>,
    /// Fitted order of `c − 1 − ρ₀`; `None` when identically zero.
    pub c_slope: Option<f64>,
    pub a_ok: bool,
    pub c_ok: bool,
    pub rho_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub corners: Vec<CornerAdmissibility>,
    pub admissible: bool,
}

/// Bisector sampling of every corner: `a − 1` must vanish to order
/// `2+σ−0.1`, `c − 1 − ρ₀` to order `σ−0.1`, and `ρ₀ ≠ 0`.
pub fn admissibility_check(m: &MediumSpec) -> AdmissibilityReport {
    let corners: Vec<CornerAdmissibility> = m
        .corners
        .iter()
        .enumerate()
        .map(|(j, rec)| {
            let s = m.bisector_samples(j, 24);
            let rs: Vec<f64> = s.iter().map(|t| t.0).collect();
            let a: Vec<f64> = s.iter().map(|t| t.1).collect();
            // ρ₀ from the two innermost samples, removing the r^σ term
            let q = (s[1].0 / s[0].0).powf(rec.sigma);
            let rho0 = (q * s[0].2 - s[1].2) / (q - 1.0);
            let c: Vec<f64> = s.iter().map(|t| t.2 - rec.rho0).collect();
            let a_slope = fit_log_slope(&rs, &a);
            let c_slope = fit_log_slope(&rs, &c);
            CornerAdmissibility {
                index: j,
                rho0,
                sigma: rec.sigma,
                a_slope,
                c_slope,
                a_ok: a_slope.is_none_or(|p| p >= 2.0 + rec.sigma - 0.1),
                c_ok: c_slope.is_none_or(|p| p >= rec.sigma - 0.1),
                rho_ok: rho0.abs() > 1e-8,
            }
        })
        .collect();
    let admissible = !corners.is_empty() && corners.iter().all(|c| c.a_ok && c.c_ok && c.rho_ok);
    AdmissibilityReport { corners, admissible }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub discrepancy: f64,
    pub self_convergence: f64,
    pub admissibility: [AdmissibilityReport; 2],
    pub hulls_differ: bool,
    /// Asserted only for distinct hulls with both media admissible.
    pub verdict: Option<bool>,
}

/// Far-field discrepancy of two media at grid `2n`, against the
/// self-convergence error of the first medium between `n` and `2n`.
pub fn hull_uniqueness_demo(
    m1: &MediumConfig,
    m2: &MediumConfig,
    f: &IncidentField,
    n: usize,
    opts: &SolverOptions,
    n_angles: usize,
) -> Result<UniquenessReport> {
    let solve = |cfg: &MediumConfig, n: usize| -> Result<(MediumSpec, FarField)> {
        let m = assemble_medium(cfg, solver_grid(cfg, n))?;
        let sol = solve_scattering(&m, f, opts)?;
        let ff = far_field(&sol, &m, n_angles);
        Ok((m, ff))
    };
    let (_, coarse) = solve(m1, n)?;
    let (a, f1) = solve(m1, 2 * n)?;
    let (b, f2) = solve(m2, 2 * n)?;
    let discrepancy = f1.l2_distance(&f2);
    let self_convergence = coarse.l2_distance(&f1);
    let hulls_differ = a.hull != b.hull;
    let admissibility = [admissibility_check(&a), admissibility_check(&b)];
    let verdict = (hulls_differ && admissibility[0].admissible && admissibility[1].admissible)
        .then_some(discrepancy > 10.0 * self_convergence);
    Ok(UniquenessReport { discrepancy, self_convergence, admissibility, hulls_differ, verdict })
}

/// Mode-`m` matching determinant for `Δu + k²n₀u = 0`, `Δv + k²v = 0` on a
/// disc of radius `R` with equal Cauchy data.
pub fn disc_determinant(k: f64, n0: f64, radius: f64, m: i32) -> f64 {
    let kn = k * n0.sqrt();
    bessel_j(m, kn * radius) * k * bessel_j_prime(m, k * radius)
        - kn * bessel_j_prime(m, kn * radius) * bessel_j(m, k * radius)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenpairDisc {
    pub radius: f64,
    pub n0: f64,
    pub mode: i32,
    pub kappa: f64,
    pub bracket: [f64; 2],
    pub det_residual: f64,
    /// `u = alpha·J_m(κ√n₀ r)e^{imθ}`, `v = J_m(κr)e^{imθ}`.
    pub alpha: f64,
    /// Relative Cauchy-data mismatch of the reconstructed `u`, `v` on the circle.
    pub match_residual: f64,
    pub v_trace: BoundaryTrace,
}

impl EigenpairDisc {
    pub fn v_field(&self) -> IncidentField {
        IncidentField::BesselMode { k: self.kappa, order: self.mode, amplitude: Complex64::new(1.0, 0.0), center: [0.0, 0.0] }
    }
}

/// Smallest root over modes `0..=max_mode` of the matching determinant in
/// `(lo, hi)`, polished by bisection.
pub fn disc_transmission_eigenpair(radius: f64, n0: f64, lo: f64, hi: f64, max_mode: i32) -> Result<EigenpairDisc> {
    if !(n0 > 0.0) || (n0 - 1.0).abs() < 1e-12 {
        return Err(Error::PreconditionViolated(format!("refractive index {n0} must be positive and differ from 1")));
    }
    if !(radius > 0.0 && hi > lo && lo >= 0.0) {
        return Err(Error::PreconditionViolated("need radius > 0 and 0 <= lo < hi".into()));
    }
    let start = lo.max(1e-3 * hi);
    let steps = 4000;
    let dk = (hi - start) / steps as f64;
    let mut best: Option<(f64, f64, i32)> = None;
    for m in 0..=max_mode {
        let mut k0 = start;
        let mut f0 = disc_determinant(k0, n0, radius, m);
        for i in 1..=steps {
            let k1 = start + i as f64 * dk;
            let f1 = disc_determinant(k1, n0, radius, m);
            if f0 * f1 < 0.0 {
                if best.is_none_or(|b| k0 < b.0) {
                    best = Some((k0, k1, m));
                }
                break;
            }
            k0 = k1;
            f0 = f1;
        }
    }
    let (mut a, mut b, mode) = best.ok_or(Error::NoRootInInterval { lo, hi })?;
    let bracket = [a, b];
    let mut fa = disc_determinant(a, n0, radius, mode);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = disc_determinant(mid, n0, radius, mode);
        if fm == 0.0 || b - a < 1e-15 * b {
            a = mid;
            b = mid;
            break;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let kappa = 0.5 * (a + b);
    let det_residual = disc_determinant(kappa, n0, radius, mode).abs();
    if det_residual > 1e-8 {
        return Err(Error::NoConvergence { residual: det_residual, iterations: 200 });
    }
    let kn = kappa * n0.sqrt();
    let (ju, jv) = (bessel_j(mode, kn * radius), bessel_j(mode, kappa * radius));
    let alpha = if ju.abs() > 1e-8 {
        jv / ju
    } else {
        kappa * bessel_j_prime(mode, kappa * radius) / (kn * bessel_j_prime(mode, kn * radius))
    };
    let du = alpha * kn * bessel_j_prime(mode, kn * radius);
    let dv = kappa * bessel_j_prime(mode, kappa * radius);
    let scale = jv.abs().max(dv.abs());
    let match_residual = ((alpha * ju - jv).abs()).max((du - dv).abs()) / scale;
    let mut e = EigenpairDisc {
        radius,
        n0,
        mode,
        kappa,
        bracket,
        det_residual,
        alpha,
        match_residual,
        v_trace: BoundaryTrace::empty(),
    };
    e.v_trace = BoundaryTrace::on_circle(&e.v_field(), [0.0, 0.0], radius, 128);
    Ok(e)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HerglotzRow {
    pub lambda: f64,
    pub misfit: f64,
    pub g_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HerglotzStudy {
    pub rows: Vec<HerglotzRow>,
    pub misfit_nonincreasing: bool,
    pub g_nondecreasing: bool,
    /// `‖g‖` at the smallest λ over `‖g‖` at the largest.
    pub growth: f64,
    pub passed: bool,
}

/// Regularized Herglotz fits to the eigenfunction trace for decreasing `λ`.
pub fn herglotz_blowup_study(e: &EigenpairDisc, lambdas: &[f64], kernel_size: usize) -> Result<HerglotzStudy> {
    herglotz_study_for(&e.v_trace, e.kappa, lambdas, kernel_size)
}

/// Same study for an arbitrary boundary trace.
pub fn herglotz_study_for(trace: &BoundaryTrace, k: f64, lambdas: &[f64], kernel_size: usize) -> Result<HerglotzStudy> {
    if lambdas.windows(2).any(|w| w[1] >= w[0]) || lambdas.len() < 2 {
        return Err(Error::PreconditionViolated("lambdas must be at least two, strictly decreasing".into()));
    }
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let fit = herglotz_least_squares(trace, k, kernel_size, lambda)?;
            Ok(HerglotzRow { lambda, misfit: fit.misfit, g_norm: fit.g_norm })
        })
        .collect::<Result<Vec<_>>>()?;
    let misfit_nonincreasing = rows.windows(2).all(|w| w[1].misfit <= w[0].misfit * (1.0 + 1e-9) + 1e-15);
    let g_nondecreasing = rows.windows(2).all(|w| w[1].g_norm >= w[0].g_norm * (1.0 - 1e-9));
    let growth = rows.last().unwrap().g_norm / rows[0].g_norm;
    let passed = misfit_nonincreasing && g_nondecreasing && growth >= 10.0;
    Ok(HerglotzStudy { rows, misfit_nonincreasing, g_nondecreasing, growth, passed })
}

/// `class_E` and the integer `l` for an incident field at a corner of
/// aperture `psi0` with vertex `vertex`.
pub fn classify(f: &IncidentField, psi0: f64, vertex: [f64; 2], tol: f64) -> Result<(bool, Option<u32>, usize)> {
    let s = crate::geometry::Sector::new(vertex, 0.0, psi0, 1.0)?;
    let jet = taylor_jet(f, s.vertex, 8)?;
    let l = exceptional_angle_within(psi0, jet.n, tol);
    // exact-tolerance recomputation agrees whenever tol ≤ 1e-12
    if tol <= 1e-12 {
        debug_assert_eq!(l, class_e_membership(f, &s, 8)?);
    }
    Ok((l.is_some(), l, jet.n))
}
