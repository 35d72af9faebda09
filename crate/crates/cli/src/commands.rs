//! Command execution. Every assertion here is one made by the library.

use crate::artifacts::RunDir;
use crate::config::{Command, ConfigError, RunConfig, ASYMPTOTIC_SUITES};
use cornerlab::asymptotics::EtaVector;
use cornerlab::cgo::{build_q, bump_medium, residual_decay_report, solve_cgo};
use cornerlab::error::Error;
use cornerlab::experiments::{
    classify, corner_scattering_sweep, disc_transmission_eigenpair, herglotz_blowup_study, hull_uniqueness_demo,
};
use cornerlab::fields::IncidentField;
use cornerlab::forward::{disc_series_far_field, far_field, points_per_wavelength, solve_scattering, FarField};
use cornerlab::geometry::Sector;
use cornerlab::grid::Grid2;
use cornerlab::medium::{assemble_medium, solver_grid, MediumConfig};
use cornerlab::suites::{find_suite, to_csv, RunProfile, SuiteOutcome};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { field, message } => RunError::Config(ConfigError::new(field, message)),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(format!("io: {e}"))
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            RunError::Config(e) => json!({ "error": "config", "field": e.field, "message": e.message }),
            RunError::Runtime(m) => json!({ "error": "runtime", "message": m }),
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    /// Printed on stdout when present.
    pub stdout: Option<Value>,
    pub run_dir: PathBuf,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn failure_json(&self) -> Value {
        json!({ "error": "assertion", "failures": self.failures, "run_dir": self.run_dir })
    }
}

struct Report {
    passed: bool,
    failures: Vec<String>,
    stdout: Option<Value>,
    extra: Value,
}

impl Report {
    fn new(checks: &[(&str, bool)]) -> Self {
        let failures: Vec<String> = checks.iter().filter(|c| !c.1).map(|c| c.0.to_string()).collect();
        Self { passed: failures.is_empty(), failures, stdout: None, extra: Value::Null }
    }
}

pub fn execute(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome, RunError> {
    let t = Instant::now();
    let hash = cfg.hash();
    let base = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    let mut dir = RunDir::create(&base, &hash)?;
    let rep = match &cfg.command {
        Command::Asymptotics(p) => run_asymptotics(p, &mut dir)?,
        Command::Cgo(p) => run_cgo(p, &mut dir)?,
        Command::Forward(p) => run_forward(p, &mut dir)?,
        Command::Sweep(p) => run_sweep(p, &mut dir)?,
        Command::Uniqueness(p) => run_uniqueness(p, &mut dir)?,
        Command::Herglotz(p) => run_herglotz(p, &mut dir)?,
        Command::Classify(p) => run_classify(p, &mut dir)?,
    };
    let config = serde_json::to_value(&cfg.command).map_err(|e| RunError::Runtime(e.to_string()))?;
    let run_dir = dir.finish(cfg.command.name(), &hash, &config, rep.passed, t.elapsed().as_secs_f64(), rep.extra)?;
    Ok(Outcome { passed: rep.passed, stdout: rep.stdout, run_dir, failures: rep.failures })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    suite: &'a str,
    check: &'a str,
    passed: bool,
    detail: &'a str,
}

fn suite_summary(o: &SuiteOutcome) -> Value {
    json!({ "suite": o.suite, "passed": o.passed, "checks": o.checks, "summary": o.summary })
}

fn run_asymptotics(p: &crate::config::AsymptoticsParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let names: Vec<String> = p.suites.clone().unwrap_or_else(|| ASYMPTOTIC_SUITES.iter().map(|s| s.to_string()).collect());
    let mut outcomes = Vec::new();
    for n in &names {
        let suite = find_suite(n).ok_or_else(|| ConfigError::new("parameters.suites", format!("unknown suite {n:?}")))?;
        outcomes.push(suite.run(p.profile)?);
    }
    let rows: Vec<CheckRow> = outcomes
        .iter()
        .flat_map(|o| o.checks.iter().map(|c| CheckRow { suite: &o.suite, check: &c.name, passed: c.passed, detail: &c.detail }))
        .collect();
    dir.write_text("asymptotics.csv", &to_csv(&rows))?;
    for o in &outcomes {
        dir.write_text(&format!("{}.csv", o.suite), &o.csv)?;
    }
    let summary: Vec<Value> = outcomes.iter().map(suite_summary).collect();
    dir.write_json("summary.json", &summary)?;
    let failures: Vec<String> = rows.iter().filter(|r| !r.passed).map(|r| format!("{}/{}", r.suite, r.check)).collect();
    let timings: Value = outcomes.iter().map(|o| (o.suite.clone(), json!(o.seconds))).collect::<serde_json::Map<_, _>>().into();
    Ok(Report { passed: failures.is_empty(), failures, stdout: None, extra: json!({ "suite_seconds": timings }) })
}

fn run_cgo(p: &crate::config::CgoParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let g = Grid2::centered(p.grid, p.box_side, [0.0, 0.0]);
    let (gam, rho) = bump_medium(g, [0.0, 0.0], p.medium.radius, p.medium.gamma_amp, p.medium.rho_amp);
    let q = build_q(g, &gam, &rho, p.k)?;
    let s = Sector::new(p.sector.vertex, p.sector.theta_ref, p.sector.aperture, p.sector.epsilon)?;
    #[derive(Serialize)]
    struct Row {
        p: f64,
        tau: f64,
        norm: f64,
        iterations: usize,
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &pw in &p.p_values {
        let rep = residual_decay_report(&q, &s, &p.taus, pw)?;
        rows.extend(rep.rows.iter().map(|r| Row { p: pw, tau: r.tau, norm: r.norm, iterations: r.iterations }));
        reports.push(rep);
    }
    let tau = p.taus.iter().cloned().fold(0.0, f64::max);
    let sol = solve_cgo(&q, &EtaVector::new(tau, s.bisector(), 1)?, 1e-12, 200)?;
    dir.write_grid("cgo_remainder", &g, &sol.r_values, &format!("r at tau={tau}"))?;
    dir.write_text("cgo_decay.csv", &to_csv(&rows))?;
    let pde = sol.pde_residual(&q, 0);
    dir.write_json("summary.json", &json!({ "decay": reports, "pde_residual_at_max_tau": pde }))?;
    let checks: Vec<(String, bool)> = reports.iter().map(|r| (format!("decay_p{}", r.p), r.passed)).collect();
    let checks: Vec<(&str, bool)> = checks.iter().map(|(n, b)| (n.as_str(), *b)).collect();
    Ok(Report::new(&checks))
}

fn plane_angle(f: &IncidentField) -> Option<f64> {
    match f {
        IncidentField::PlaneWave { direction, .. } => Some(direction[1].atan2(direction[0])),
        _ => None,
    }
}

fn run_forward(p: &crate::config::ForwardParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let f = p.incident.field();
    let m = assemble_medium(&p.medium, solver_grid(&p.medium, p.grid))?;
    let k = f.k();
    let sol = solve_scattering(&m, &f, &p.solver.options())?;
    let ff = far_field(&sol, &m, p.n_angles);
    dir.write_far_field("far_field.csv", &ff)?;
    dir.write_grid("u_scattered", &sol.grid, &sol.u_scattered, "scattered field")?;
    let mut oracle_rel = None;
    if let (MediumConfig::Disc(d), Some(inc)) = (&p.medium, plane_angle(&f)) {
        let want = disc_series_far_field(k, d.center, d.radius, d.a, d.c, inc, &ff.angles);
        let w = FarField::new(k, ff.angles.clone(), want);
        oracle_rel = Some(ff.l2_distance(&w) / w.l2_norm.max(f64::MIN_POSITIVE));
    }
    let summary = json!({
        "k": k,
        "incident": f.descriptor(),
        "l2_norm": ff.l2_norm,
        "sup_norm": ff.sup_norm,
        "iterations": sol.iterations,
        "solver_residual": sol.solver_residual,
        "points_per_wavelength": points_per_wavelength(&m, k),
        "oracle_relative_l2": oracle_rel,
    });
    dir.write_json("summary.json", &summary)?;
    let oracle_ok = oracle_rel.is_none_or(|r| r <= p.oracle_tolerance);
    Ok(Report::new(&[("solver_converged", sol.solver_residual <= p.solver.tol), ("series_oracle", oracle_ok)]))
}

fn run_sweep(p: &crate::config::SweepParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let incidents: Vec<IncidentField> = p.incidents.iter().map(|s| s.field()).collect();
    let r = corner_scattering_sweep(&p.cases, &incidents, &p.levels, &p.solver.options(), p.n_angles)?;
    dir.write_text("sweep.csv", &to_csv(&r.rows))?;
    dir.write_json("summary.json", &json!({ "noise_floor": r.noise_floor, "verdicts": r.verdicts, "passed": r.passed }))?;
    let failures: Vec<String> = r
        .verdicts
        .iter()
        .filter(|v| v.passed == Some(false))
        .map(|v| format!("positivity/{}/{}", v.case, v.incident))
        .collect();
    Ok(Report { passed: r.passed, failures, stdout: None, extra: Value::Null })
}

fn run_uniqueness(p: &crate::config::UniquenessParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let f = p.incident.field();
    let r = hull_uniqueness_demo(&p.medium1, &p.medium2, &f, p.grid, &p.solver.options(), p.n_angles)?;
    #[derive(Serialize)]
    struct Row {
        discrepancy: f64,
        self_convergence: f64,
        hulls_differ: bool,
        admissible_1: bool,
        admissible_2: bool,
        verdict: Option<bool>,
    }
    let row = Row {
        discrepancy: r.discrepancy,
        self_convergence: r.self_convergence,
        hulls_differ: r.hulls_differ,
        admissible_1: r.admissibility[0].admissible,
        admissible_2: r.admissibility[1].admissible,
        verdict: r.verdict,
    };
    dir.write_text("uniqueness.csv", &to_csv(&[row]))?;
    dir.write_json("summary.json", &r)?;
    Ok(Report::new(&[("discrimination", r.verdict != Some(false))]))
}

fn run_herglotz(p: &crate::config::HerglotzParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let e = disc_transmission_eigenpair(p.radius, p.n0, p.k_min, p.k_max, p.max_mode)?;
    let study = herglotz_blowup_study(&e, &p.lambdas, p.kernel_size)?;
    dir.write_text("herglotz.csv", &to_csv(&study.rows))?;
    let eig = json!({
        "kappa": e.kappa,
        "mode": e.mode,
        "bracket": e.bracket,
        "det_residual": e.det_residual,
        "match_residual": e.match_residual,
    });
    dir.write_json("summary.json", &json!({ "eigenpair": eig, "study": study }))?;
    Ok(Report::new(&[
        ("eigenpair", e.det_residual <= 1e-8 && e.match_residual <= 1e-6),
        ("misfit_nonincreasing", study.misfit_nonincreasing),
        ("g_growth", study.g_nondecreasing && study.growth >= 10.0),
    ]))
}

fn run_classify(p: &crate::config::ClassifyParams, dir: &mut RunDir) -> Result<Report, RunError> {
    let f = p.incident.field();
    let (class_e, l, n) = classify(&f, p.psi0, p.vertex, p.tolerance)?;
    let out = json!({ "class_E": class_e, "l": l, "N": n });
    #[derive(Serialize)]
    struct Row {
        incident: String,
        psi0: f64,
        n: usize,
        class_e: bool,
        l: Option<u32>,
    }
    dir.write_text("classify.csv", &to_csv(&[Row { incident: f.descriptor(), psi0: p.psi0, n, class_e, l }]))?;
    dir.write_json("summary.json", &out)?;
    let mut rep = Report::new(&[]);
    rep.stdout = Some(out);
    Ok(rep)
}

/// Runs a registered suite into `out/<suite>`.
pub fn run_suite(name: &str, profile: RunProfile, out: &Path) -> Result<(SuiteOutcome, PathBuf), RunError> {
    let suite = find_suite(name).ok_or_else(|| ConfigError::new("suite", format!("unknown suite {name:?}")))?;
    let t = Instant::now();
    let o = suite.run(profile)?;
    let cfg = json!({ "suite": name, "profile": profile });
    let hash = hex::encode(Sha256::digest(serde_json::to_vec(&cfg).expect("json")));
    let mut dir = RunDir::create(out, &hash)?;
    dir.write_text(&format!("{name}.csv"), &o.csv)?;
    dir.write_json("summary.json", &suite_summary(&o))?;
    let path = dir.finish("run-suite", &hash, &cfg, o.passed, t.elapsed().as_secs_f64(), Value::Null)?;
    Ok((o, path))
}
