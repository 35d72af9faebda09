//! Run configuration: one TOML file with `command`, `output_dir` and a
//! command-specific `[parameters]` table.

use cornerlab::experiments::CornerCase;
use cornerlab::fields::IncidentField;
use cornerlab::medium::{assemble_medium, solver_grid, MediumConfig};
use cornerlab::suites::RunProfile;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

type Checked<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: String,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    parameters: Option<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidentSpec {
    Plane {
        k: f64,
        angle: f64,
    },
    Bessel {
        k: f64,
        order: i32,
        #[serde(default = "one")]
        amplitude_re: f64,
        #[serde(default)]
        amplitude_im: f64,
        #[serde(default)]
        center: [f64; 2],
    },
}

fn one() -> f64 {
    1.0
}

impl IncidentSpec {
    pub fn field(&self) -> IncidentField {
        match *self {
            IncidentSpec::Plane { k, angle } => IncidentField::plane(k, angle),
            IncidentSpec::Bessel { k, order, amplitude_re, amplitude_im, center } => {
                IncidentField::BesselMode { k, order, amplitude: Complex64::new(amplitude_re, amplitude_im), center }
            }
        }
    }

    fn validate(&self, field: &str) -> Checked<()> {
        let k = match *self {
            IncidentSpec::Plane { k, .. } | IncidentSpec::Bessel { k, .. } => k,
        };
        positive(&format!("{field}.k"), k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsParams {
    #[serde(default)]
    pub suites: Option<Vec<String>>,
    #[serde(default)]
    pub profile: RunProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_bump")]
    pub gamma_amp: f64,
    #[serde(default = "default_bump")]
    pub rho_amp: f64,
}

fn default_bump() -> f64 {
    0.3
}

impl Default for BumpSpec {
    fn default() -> Self {
        Self { radius: 1.0, gamma_amp: 0.3, rho_amp: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    #[serde(default)]
    pub vertex: [f64; 2],
    #[serde(default)]
    pub theta_ref: f64,
    pub aperture: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgoParams {
    #[serde(default = "default_cgo_grid")]
    pub grid: usize,
    #[serde(default = "default_box")]
    pub box_side: f64,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default)]
    pub medium: BumpSpec,
    pub sector: SectorSpec,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_p")]
    pub p_values: Vec<f64>,
}

fn default_cgo_grid() -> usize {
    256
}
fn default_box() -> f64 {
    8.0
}
fn default_taus() -> Vec<f64> {
    vec![50.0, 75.0, 110.0, 170.0, 260.0, 400.0]
}
fn default_p() -> Vec<f64> {
    vec![2.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_restart")]
    pub restart: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-10
}
fn default_restart() -> usize {
    40
}
fn default_max_iter() -> usize {
    600
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { tol: default_tol(), restart: default_restart(), max_iter: default_max_iter() }
    }
}

impl SolverSpec {
    pub fn options(&self) -> cornerlab::forward::SolverOptions {
        cornerlab::forward::SolverOptions { tol: self.tol, restart: self.restart, max_iter: self.max_iter }
    }

    fn validate(&self) -> Checked<()> {
        positive("parameters.solver.tol", self.tol)?;
        at_least("parameters.solver.restart", self.restart, 1)?;
        at_least("parameters.solver.max_iter", self.max_iter, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardParams {
    pub medium: MediumConfig,
    pub incident: IncidentSpec,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_angles")]
    pub n_angles: usize,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Relative far-field tolerance against the series for disc media.
    #[serde(default = "default_oracle_tol")]
    pub oracle_tolerance: f64,
}

fn default_grid() -> usize {
    128
}
fn default_angles() -> usize {
    128
}
fn default_oracle_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub cases: Vec<CornerCase>,
    pub incidents: Vec<IncidentSpec>,
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_angles")]
    pub n_angles: usize,
    #[serde(default)]
    pub solver: SolverSpec,
}

fn default_levels() -> Vec<usize> {
    vec![64, 128]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessParams {
    pub medium1: MediumConfig,
    pub medium2: MediumConfig,
    pub incident: IncidentSpec,
    #[serde(default = "default_uniq_grid")]
    pub grid: usize,
    #[serde(default = "default_angles")]
    pub n_angles: usize,
    #[serde(default)]
    pub solver: SolverSpec,
}

fn default_uniq_grid() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HerglotzParams {
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_n0")]
    pub n0: f64,
    #[serde(default)]
    pub k_min: f64,
    #[serde(default = "default_kmax")]
    pub k_max: f64,
    #[serde(default)]
    pub max_mode: i32,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_kernel")]
    pub kernel_size: usize,
}

fn default_n0() -> f64 {
    4.0
}
fn default_kmax() -> f64 {
    5.0
}
fn default_lambdas() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}
fn default_kernel() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    pub incident: IncidentSpec,
    pub psi0: f64,
    #[serde(default)]
    pub vertex: [f64; 2],
    #[serde(default = "default_class_tol")]
    pub tolerance: f64,
}

fn default_class_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", content = "parameters", rename_all = "snake_case")]
pub enum Command {
    Asymptotics(AsymptoticsParams),
    Cgo(CgoParams),
    Forward(ForwardParams),
    Sweep(SweepParams),
    Uniqueness(UniquenessParams),
    Herglotz(HerglotzParams),
    Classify(ClassifyParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Asymptotics(_) => "asymptotics",
            Command::Cgo(_) => "cgo",
            Command::Forward(_) => "forward",
            Command::Sweep(_) => "sweep",
            Command::Uniqueness(_) => "uniqueness",
            Command::Herglotz(_) => "herglotz",
            Command::Classify(_) => "classify",
        }
    }
}

pub const COMMANDS: [&str; 7] = ["asymptotics", "cgo", "forward", "sweep", "uniqueness", "herglotz", "classify"];

pub const ASYMPTOTIC_SUITES: [&str; 5] =
    ["incomplete_gamma_law", "corner_volume_constant", "lemma53_constants", "degenerate_corner_constant", "corner_decay_bounds"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// SHA-256 over the canonical JSON of the parsed command, with every
    /// default filled in.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.command).expect("serializable config");
        hex::encode(Sha256::digest(canonical))
    }
}

fn typed<T: DeserializeOwned>(table: toml::Table) -> Checked<T> {
    let v = toml::Value::Table(table);
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." || path.is_empty() { "parameters".to_string() } else { format!("parameters.{path}") };
        ConfigError::new(field, e.into_inner().to_string())
    })
}

fn positive(field: &str, v: f64) -> Checked<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be positive and finite, got {v}")))
    }
}

fn at_least(field: &str, v: usize, lo: usize) -> Checked<()> {
    if v >= lo {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be at least {lo}, got {v}")))
    }
}

fn validate_medium(field: &str, m: &MediumConfig) -> Checked<()> {
    // a coarse assembly runs every geometric and coefficient check
    assemble_medium(m, solver_grid(m, 16)).map(|_| ()).map_err(|e| match e {
        cornerlab::error::Error::Config { field: f, message } => ConfigError::new(format!("{field}.{f}"), message),
        other => ConfigError::new(field, other.to_string()),
    })
}

fn validate_grid(field: &str, n: usize) -> Checked<()> {
    if n >= 8 && n.is_multiple_of(2) {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be an even size of at least 8, got {n}")))
    }
}

fn decreasing(field: &str, v: &[f64]) -> Checked<()> {
    if v.len() >= 2 && v.iter().all(|x| *x > 0.0) && v.windows(2).all(|w| w[1] < w[0]) {
        Ok(())
    } else {
        Err(ConfigError::new(field, "needs at least two positive, strictly decreasing values"))
    }
}

impl Command {
    fn validate(&self) -> Checked<()> {
        match self {
            Command::Asymptotics(p) => {
                if let Some(names) = &p.suites {
                    for (i, n) in names.iter().enumerate() {
                        if !ASYMPTOTIC_SUITES.contains(&n.as_str()) {
                            return Err(ConfigError::new(format!("parameters.suites[{i}]"), format!("unknown suite {n:?}")));
                        }
                    }
                }
                Ok(())
            }
            Command::Cgo(p) => {
                validate_grid("parameters.grid", p.grid)?;
                positive("parameters.box_side", p.box_side)?;
                positive("parameters.k", p.k)?;
                positive("parameters.medium.radius", p.medium.radius)?;
                positive("parameters.sector.epsilon", p.sector.epsilon)?;
                positive("parameters.sector.aperture", p.sector.aperture)?;
                if p.sector.aperture >= std::f64::consts::PI {
                    return Err(ConfigError::new("parameters.sector.aperture", "must be below pi"));
                }
                if p.taus.len() < 2 || p.taus.iter().any(|t| !(*t > 0.0)) {
                    return Err(ConfigError::new("parameters.taus", "needs at least two positive values"));
                }
                for (i, v) in p.p_values.iter().enumerate() {
                    if !(*v >= 1.0) {
                        return Err(ConfigError::new(format!("parameters.p_values[{i}]"), "must be at least 1"));
                    }
                }
                Ok(())
            }
            Command::Forward(p) => {
                validate_medium("parameters.medium", &p.medium)?;
                p.incident.validate("parameters.incident")?;
                validate_grid("parameters.grid", p.grid)?;
                at_least("parameters.n_angles", p.n_angles, 4)?;
                positive("parameters.oracle_tolerance", p.oracle_tolerance)?;
                p.solver.validate()
            }
            Command::Sweep(p) => {
                if p.cases.is_empty() {
                    return Err(ConfigError::new("parameters.cases", "needs at least one case"));
                }
                for (i, c) in p.cases.iter().enumerate() {
                    validate_medium(&format!("parameters.cases[{i}].medium"), &c.medium)?;
                }
                if p.incidents.is_empty() {
                    return Err(ConfigError::new("parameters.incidents", "needs at least one incident field"));
                }
                for (i, f) in p.incidents.iter().enumerate() {
                    f.validate(&format!("parameters.incidents[{i}]"))?;
                }
                if p.levels.len() < 2 {
                    return Err(ConfigError::new("parameters.levels", "needs at least two grid levels"));
                }
                for (i, n) in p.levels.iter().enumerate() {
                    validate_grid(&format!("parameters.levels[{i}]"), *n)?;
                }
                at_least("parameters.n_angles", p.n_angles, 4)?;
                p.solver.validate()
            }
            Command::Uniqueness(p) => {
                validate_medium("parameters.medium1", &p.medium1)?;
                validate_medium("parameters.medium2", &p.medium2)?;
                p.incident.validate("parameters.incident")?;
                validate_grid("parameters.grid", p.grid)?;
                at_least("parameters.n_angles", p.n_angles, 4)?;
                p.solver.validate()
            }
            Command::Herglotz(p) => {
                positive("parameters.radius", p.radius)?;
                positive("parameters.n0", p.n0)?;
                if (p.n0 - 1.0).abs() < 1e-12 {
                    return Err(ConfigError::new("parameters.n0", "must differ from 1"));
                }
                if !(p.k_min >= 0.0 && p.k_max > p.k_min) {
                    return Err(ConfigError::new("parameters.k_max", "must exceed k_min >= 0"));
                }
                if p.max_mode < 0 {
                    return Err(ConfigError::new("parameters.max_mode", "must be nonnegative"));
                }
                decreasing("parameters.lambdas", &p.lambdas)?;
                at_least("parameters.kernel_size", p.kernel_size, 4)
            }
            Command::Classify(p) => {
                p.incident.validate("parameters.incident")?;
                if !(p.psi0 > 0.0 && p.psi0 < std::f64::consts::PI) {
                    return Err(ConfigError::new("parameters.psi0", format!("must lie in (0, pi), got {}", p.psi0)));
                }
                positive("parameters.tolerance", p.tolerance)
            }
        }
    }
}

/// Parses and validates a configuration before any computation.
pub fn parse_config(text: &str) -> Checked<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        // unknown or missing top-level keys are named in the message
        let field = ["command", "output_dir", "parameters"]
            .into_iter()
            .find(|k| msg.contains(&format!("`{k}`")))
            .map(str::to_string)
            .or_else(|| msg.split('`').nth(1).map(str::to_string))
            .unwrap_or_else(|| "config".into());
        ConfigError::new(field, msg)
    })?;
    let params = raw.parameters.unwrap_or_default();
    let command = match raw.command.as_str() {
        "asymptotics" => Command::Asymptotics(typed(params)?),
        "cgo" => Command::Cgo(typed(params)?),
        "forward" => Command::Forward(typed(params)?),
        "sweep" => Command::Sweep(typed(params)?),
        "uniqueness" => Command::Uniqueness(typed(params)?),
        "herglotz" => Command::Herglotz(typed(params)?),
        "classify" => Command::Classify(typed(params)?),
        other => {
            return Err(ConfigError::new("command", format!("unknown command {other:?}, expected one of {}", COMMANDS.join(", "))))
        }
    };
    command.validate()?;
    Ok(RunConfig { command, output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("runs")) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_defaults() {
        let c = parse_config(
            "command = \"classify\"\n[parameters]\npsi0 = 1.5707963\nincident = { kind = \"bessel\", k = 1.0, order = 2 }\n",
        )
        .unwrap();
        match &c.command {
            Command::Classify(p) => {
                assert_eq!(p.tolerance, 1e-6);
                assert_eq!(p.vertex, [0.0, 0.0]);
            }
            _ => panic!("wrong command"),
        }
        assert_eq!(c.output_dir, PathBuf::from("runs"));
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn unknown_parameter_is_named() {
        let e = parse_config("command = \"herglotz\"\n[parameters]\nradius = 1.0\nbogus = 2\n").unwrap_err();
        assert!(e.message.contains("bogus"), "{e:?}");
        let e = parse_config("command = \"herglotz\"\nextra = 1\n").unwrap_err();
        assert!(e.message.contains("extra"), "{e:?}");
    }

    #[test]
    fn nested_field_path() {
        let e = parse_config(
            "command = \"cgo\"\n[parameters.sector]\naperture = 1.2\nepsilon = -0.5\n",
        )
        .unwrap_err();
        assert_eq!(e.field, "parameters.sector.epsilon");
        let e = parse_config("command = \"classify\"\n[parameters]\npsi0 = \"x\"\nincident = { kind = \"plane\", k = 1.0, angle = 0.0 }\n")
            .unwrap_err();
        assert_eq!(e.field, "parameters.psi0");
    }

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a = parse_config("command = \"herglotz\"\n").unwrap();
        let b = parse_config("command = \"herglotz\"\n[parameters]\nn0 = 4.0\n").unwrap();
        let c = parse_config("command = \"herglotz\"\n[parameters]\nn0 = 3.0\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
