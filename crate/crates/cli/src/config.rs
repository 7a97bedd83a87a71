//! Job configuration: a JSON document whose fields can be overridden from the
//! command line with dotted flags such as `--system.mu 0.01`.
//!
//! ```json
//! {
//!   "system": { "mu": 0.01, "q1": 0.995, "a2": 1e-4, "cd": 1000 },
//!   "job": { "t_end": 62.83, "initial": { "x": 0.49, "y": 0.86 } },
//!   "output": { "path": "traj.csv", "format": "csv", "precision": 17 }
//! }
//! ```

use std::path::{Path, PathBuf};

use pr3bp_core::{
    mass_reduction_from_grain, Branch, GrainProperties, IntegratorConfig, SystemParams, Window,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobKind {
    Equilibria,
    Integrate,
    Zvc,
    Sweep,
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::Equilibria => "equilibria",
            JobKind::Integrate => "integrate",
            JobKind::Zvc => "zvc",
            JobKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrainConfig {
    pub radius_a: f64,
    pub density_rho: f64,
    pub efficiency_chi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub mu: f64,
    pub q1: Option<f64>,
    #[serde(default)]
    pub a2: f64,
    pub cd: Option<f64>,
    pub w1: Option<f64>,
    pub grain: Option<GrainConfig>,
    pub collision_guard: Option<f64>,
}

impl SystemConfig {
    pub fn build(&self) -> Result<SystemParams> {
        let cfg_err = |field: &str, e: pr3bp_core::Error| CliError::Config(format!("{field}: {e}"));
        let q1 = match (self.q1, &self.grain) {
            (Some(q1), None) => q1,
            (None, Some(g)) => {
                let grain = GrainProperties::new(g.radius_a, g.density_rho, g.efficiency_chi)
                    .map_err(|e| cfg_err("system.grain", e))?;
                mass_reduction_from_grain(&grain).map_err(|e| cfg_err("system.grain", e))?
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "system: `system.q1` and `system.grain` are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "system: one of `system.q1` or `system.grain` must be given".into(),
                ))
            }
        };
        let params = match (self.cd, self.w1) {
            (Some(cd), None) => SystemParams::new(self.mu, q1, self.a2, cd),
            (None, Some(w1)) => SystemParams::with_w1(self.mu, q1, self.a2, w1),
            _ => {
                return Err(CliError::Config(
                    "system: exactly one of `system.cd` or `system.w1` must be given".into(),
                ))
            }
        }
        .map_err(|e| cfg_err("system", e))?;
        match self.collision_guard {
            Some(g) => params
                .with_collision_guard(g)
                .map_err(|e| cfg_err("system.collision_guard", e)),
            None => Ok(params),
        }
    }
}

fn default_tol() -> f64 {
    pr3bp_core::equilibria::DEFAULT_TOL
}

fn default_max_iter() -> usize {
    pr3bp_core::equilibria::DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaJob {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub vx: f64,
    #[serde(default)]
    pub vy: f64,
    #[serde(default)]
    pub t: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateJob {
    pub initial: InitialState,
    pub t_end: f64,
    #[serde(default = "default_tol")]
    pub rtol: f64,
    #[serde(default = "default_tol")]
    pub atol: f64,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default = "default_escape")]
    pub escape_radius: f64,
    pub max_step: Option<f64>,
}

fn default_sample_dt() -> f64 {
    1e-2
}

fn default_escape() -> f64 {
    pr3bp_core::dynamics::DEFAULT_ESCAPE_RADIUS
}

impl IntegrateJob {
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            sample_dt: self.sample_dt,
            escape_radius: self.escape_radius,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum BranchName {
    L4,
    L5,
}

impl From<BranchName> for Branch {
    fn from(b: BranchName) -> Self {
        match b {
            BranchName::L4 => Branch::L4,
            BranchName::L5 => Branch::L5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZvcJob {
    /// Explicit Jacobi level.
    pub level_c: Option<f64>,
    /// Use the Jacobi level of the refined triangular point instead.
    pub level_at: Option<BranchName>,
    /// Added to the `level_at` level.
    #[serde(default)]
    pub level_offset: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 4],
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_window() -> [f64; 4] {
    [-1.5, 1.5, -1.5, 1.5]
}

fn default_resolution() -> usize {
    200
}

impl ZvcJob {
    pub fn window(&self) -> Result<Window> {
        let [xmin, xmax, ymin, ymax] = self.window;
        Window::new(xmin, xmax, ymin, ymax)
            .map_err(|e| CliError::Config(format!("job.window: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    W1,
    A2,
    Q1,
    Mu,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::W1 => "w1",
            SweepVariable::A2 => "a2",
            SweepVariable::Q1 => "q1",
            SweepVariable::Mu => "mu",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub spacing: Spacing,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepJob {
    pub variable: SweepVariable,
    pub grid: Option<GridConfig>,
    pub values: Option<Vec<f64>>,
    #[serde(default = "default_branch")]
    pub branch: BranchName,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_branch() -> BranchName {
    BranchName::L4
}

impl SweepJob {
    /// Grid values, validated to be nonempty and strictly monotone.
    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match (&self.grid, &self.values) {
            (Some(g), None) => {
                if g.count == 0 {
                    return Err(CliError::Config(
                        "job.grid.count: must be at least 1".into(),
                    ));
                }
                if g.count > 1 && g.start == g.stop {
                    return Err(CliError::Config(
                        "job.grid: start and stop must differ when count > 1".into(),
                    ));
                }
                let steps = (g.count.max(2) - 1) as f64;
                match g.spacing {
                    Spacing::Linear => (0..g.count)
                        .map(|k| g.start + (g.stop - g.start) * k as f64 / steps)
                        .collect(),
                    Spacing::Geometric => {
                        if !(g.start > 0.0 && g.stop > 0.0) {
                            return Err(CliError::Config(
                                "job.grid: geometric spacing needs positive start and stop".into(),
                            ));
                        }
                        (0..g.count)
                            .map(|k| g.start * (g.stop / g.start).powf(k as f64 / steps))
                            .collect()
                    }
                }
            }
            (None, Some(v)) => v.clone(),
            _ => {
                return Err(CliError::Config(
                    "job: exactly one of `job.grid` or `job.values` must be given".into(),
                ))
            }
        };
        if values.is_empty() {
            return Err(CliError::Config("job.values: sweep range is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("job.values: values must be finite".into()));
        }
        let increasing = values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(CliError::Config(
                "job.values: sweep range must be strictly monotone".into(),
            ));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone)]
pub enum Job {
    Equilibria(EquilibriaJob),
    Integrate(IntegrateJob),
    Zvc(ZvcJob),
    Sweep(SweepJob),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
            precision: default_precision(),
        }
    }
}

fn default_precision() -> usize {
    17
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub system: SystemConfig,
    pub job: Job,
    pub output: OutputConfig,
}

fn parse_at<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            prefix.to_string()
        } else {
            format!("{prefix}.{path}")
        };
        CliError::Config(format!("{field}: {}", e.inner()))
    })
}

impl JobConfig {
    /// Validates a raw JSON document for the given job kind.
    pub fn from_value(mut doc: Value, kind: JobKind) -> Result<Self> {
        let root = doc
            .as_object_mut()
            .ok_or_else(|| CliError::Config("config: top level must be a JSON object".into()))?;
        if let Some(unknown) = root
            .keys()
            .find(|k| !["system", "job", "output"].contains(&k.as_str()))
        {
            return Err(CliError::Config(format!(
                "{unknown}: unknown top-level field"
            )));
        }
        let system = root
            .remove("system")
            .ok_or_else(|| CliError::Config("system: missing".into()))?;
        let system: SystemConfig = parse_at(system, "system")?;

        let mut job = root
            .remove("job")
            .unwrap_or_else(|| Value::Object(Map::new()));
        if let Some(obj) = job.as_object_mut() {
            if let Some(declared) = obj.remove("kind") {
                if declared.as_str() != Some(kind.name()) {
                    return Err(CliError::Config(format!(
                        "job.kind: config declares {declared} but the `{}` subcommand was run",
                        kind.name()
                    )));
                }
            }
        }
        let job = match kind {
            JobKind::Equilibria => Job::Equilibria(parse_at(job, "job")?),
            JobKind::Integrate => Job::Integrate(parse_at(job, "job")?),
            JobKind::Zvc => Job::Zvc(parse_at(job, "job")?),
            JobKind::Sweep => Job::Sweep(parse_at(job, "job")?),
        };

        let output = match root.remove("output") {
            Some(v) => parse_at(v, "output")?,
            None => OutputConfig::default(),
        };
        if !(1..=17).contains(&output.precision) {
            return Err(CliError::Config(format!(
                "output.precision: must lie in 1..=17, got {}",
                output.precision
            )));
        }

        let cfg = Self {
            system,
            job,
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.system.build()?;
        let positive = |v: f64, field: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{field}: must be positive and finite, got {v}"
                )))
            }
        };
        match &self.job {
            Job::Equilibria(j) => positive(j.tol, "job.tol")?,
            Job::Integrate(j) => {
                positive(j.t_end, "job.t_end")?;
                if j.t_end <= j.initial.t {
                    return Err(CliError::Config(format!(
                        "job.t_end: must exceed job.initial.t = {}",
                        j.initial.t
                    )));
                }
                positive(j.rtol, "job.rtol")?;
                positive(j.atol, "job.atol")?;
                positive(j.sample_dt, "job.sample_dt")?;
                positive(j.escape_radius, "job.escape_radius")?;
                if let Some(h) = j.max_step {
                    positive(h, "job.max_step")?;
                }
            }
            Job::Zvc(j) => {
                if j.level_c.is_some() == j.level_at.is_some() {
                    return Err(CliError::Config(
                        "job: exactly one of `job.level_c` or `job.level_at` must be given".into(),
                    ));
                }
                if j.resolution < pr3bp_core::dynamics::MIN_RESOLUTION {
                    return Err(CliError::Config(format!(
                        "job.resolution: must be at least {}, got {}",
                        pr3bp_core::dynamics::MIN_RESOLUTION,
                        j.resolution
                    )));
                }
                j.window()?;
            }
            Job::Sweep(j) => {
                positive(j.tol, "job.tol")?;
                j.values()?;
            }
        }
        Ok(())
    }
}

/// Reads the config file, if any, as a JSON value.
pub fn read_document(path: Option<&Path>) -> Result<Value> {
    match path {
        None => Ok(Value::Object(Map::new())),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("config: cannot read {}: {e}", p.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config: {}: {e}", p.display())))
        }
    }
}

/// Sets `value` at a dotted path, creating intermediate objects. The value is
/// parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, dotted: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = dotted.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "--{dotted}: malformed override path"
        )));
    }
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| {
            CliError::Config(format!(
                "--{dotted}: `{}` is not an object",
                parts[..i].join(".")
            ))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("override path has at least one component")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc() -> Value {
        json!({ "system": { "mu": 0.1, "q1": 1.0, "a2": 0.0, "w1": 0.0 } })
    }

    fn config_error(r: Result<JobConfig>) -> String {
        match r {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_equilibria_config() {
        let cfg = JobConfig::from_value(doc(), JobKind::Equilibria).unwrap();
        assert!(matches!(
            cfg.job,
            Job::Equilibria(EquilibriaJob { max_iter: 50, .. })
        ));
        assert_eq!(cfg.output.precision, 17);
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn drag_source_must_be_unique() {
        let mut d = doc();
        d["system"].as_object_mut().unwrap().remove("w1");
        assert!(
            config_error(JobConfig::from_value(d.clone(), JobKind::Equilibria))
                .contains("system.cd")
        );
        d["system"]["cd"] = json!(10.0);
        d["system"]["w1"] = json!(0.0);
        assert!(config_error(JobConfig::from_value(d, JobKind::Equilibria)).contains("exactly one"));
    }

    #[test]
    fn grain_and_q1_exclusive() {
        let mut d = doc();
        d["system"]["grain"] =
            json!({ "radius_a": 1e-3, "density_rho": 2.0, "efficiency_chi": 1.0 });
        assert!(
            config_error(JobConfig::from_value(d.clone(), JobKind::Equilibria))
                .contains("mutually exclusive")
        );
        d["system"].as_object_mut().unwrap().remove("q1");
        d["system"]["w1"] = json!(1e-4);
        let cfg = JobConfig::from_value(d, JobKind::Equilibria).unwrap();
        assert!((cfg.system.build().unwrap().q1() - 0.972).abs() < 1e-14);
    }

    #[test]
    fn field_paths_in_messages() {
        let mut d = doc();
        d["job"] = json!({ "initial": { "x": 0.4, "y": "up" }, "t_end": 1.0 });
        let msg = config_error(JobConfig::from_value(d, JobKind::Integrate));
        assert!(msg.starts_with("job.initial.y"), "{msg}");

        let mut d = doc();
        d["system"]["mu"] = json!(0.7);
        assert!(config_error(JobConfig::from_value(d, JobKind::Equilibria)).starts_with("system"));

        let mut d = doc();
        d["job"] = json!({ "bogus": 1 });
        assert!(config_error(JobConfig::from_value(d, JobKind::Equilibria)).contains("bogus"));
    }

    #[test]
    fn integrate_validation() {
        let mut d = doc();
        d["job"] = json!({ "initial": { "x": 0.4, "y": 0.8 }, "t_end": 0.0 });
        assert!(config_error(JobConfig::from_value(d, JobKind::Integrate)).starts_with("job.t_end"));
    }

    #[test]
    fn zvc_validation() {
        let mut d = doc();
        d["job"] = json!({ "level_c": 3.2, "resolution": 8 });
        assert!(config_error(JobConfig::from_value(d.clone(), JobKind::Zvc))
            .starts_with("job.resolution"));
        d["job"] = json!({ "level_c": 3.2, "level_at": "L4" });
        assert!(
            config_error(JobConfig::from_value(d.clone(), JobKind::Zvc)).contains("exactly one")
        );
        d["job"] = json!({ "level_at": "L5", "window": [1.0, -1.0, 0.0, 1.0] });
        assert!(config_error(JobConfig::from_value(d, JobKind::Zvc)).starts_with("job.window"));
    }

    #[test]
    fn sweep_grids() {
        let job = |v: Value| -> Result<Vec<f64>> {
            let mut d = doc();
            d["job"] = v;
            match JobConfig::from_value(d, JobKind::Sweep)?.job {
                Job::Sweep(s) => s.values(),
                _ => unreachable!(),
            }
        };
        let v = job(json!({ "variable": "w1", "grid": { "spacing": "geometric", "start": 1e-4, "stop": 1e-2, "count": 3 } })).unwrap();
        assert!((v[1] - 1e-3).abs() < 1e-18);
        let v = job(json!({ "variable": "a2", "grid": { "spacing": "linear", "start": 0.0, "stop": 1.0, "count": 5 } })).unwrap();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(job(json!({ "variable": "q1", "values": [0.9, 0.95, 0.93] })).is_err());
        assert!(job(json!({ "variable": "q1", "values": [] })).is_err());
        assert!(job(json!({ "variable": "mu", "grid": { "spacing": "geometric", "start": 0.0, "stop": 1.0, "count": 3 } })).is_err());
        assert!(job(json!({ "variable": "w1" })).is_err());
        assert_eq!(
            job(json!({ "variable": "q1", "values": [0.9] })).unwrap(),
            vec![0.9]
        );
    }

    #[test]
    fn kind_mismatch() {
        let mut d = doc();
        d["job"] = json!({ "kind": "zvc" });
        assert!(config_error(JobConfig::from_value(d, JobKind::Equilibria)).starts_with("job.kind"));
    }

    #[test]
    fn overrides() {
        let mut d = doc();
        apply_override(&mut d, "system.mu", "0.01").unwrap();
        apply_override(&mut d, "job.window", "[-2, 2, -2, 2]").unwrap();
        apply_override(&mut d, "job.level_at", "L4").unwrap();
        apply_override(&mut d, "output.path", "out/zvc.csv").unwrap();
        assert_eq!(d["system"]["mu"], json!(0.01));
        assert_eq!(d["job"]["window"], json!([-2, 2, -2, 2]));
        assert_eq!(d["job"]["level_at"], json!("L4"));
        assert_eq!(d["output"]["path"], json!("out/zvc.csv"));
        assert!(apply_override(&mut d, "system.mu.deep", "1").is_err());
        assert!(apply_override(&mut d, "system..mu", "1").is_err());
    }
}
