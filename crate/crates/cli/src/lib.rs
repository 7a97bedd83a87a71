//! Command-line front end: config loading with dotted overrides, the four
//! jobs, and CSV/JSON output.

pub mod config;
pub mod error;
pub mod jobs;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{apply_override, read_document, Format, JobConfig, JobKind};
pub use error::{CliError, Result};
use output::Report;

#[derive(Debug, Parser)]
#[command(
    name = "pr3bp",
    version,
    about = "Triangular points, trajectories and zero-velocity curves of the restricted three-body problem with radiation drag and oblateness"
)]
pub struct Cli {
    /// JSON config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output file; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate L4 and L5 analytically and numerically.
    Equilibria(JobArgs),
    /// Integrate a trajectory and audit its Jacobi quantity.
    Integrate(JobArgs),
    /// Trace zero-velocity curves at a Jacobi level.
    Zvc(JobArgs),
    /// Compare analytic and refined points across a parameter grid.
    Sweep(JobArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// Config overrides as `--section.key VALUE` or `--section.key=VALUE`.
    #[arg(value_name = "OVERRIDES", trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    pub overrides: Vec<String>,
}

impl Command {
    fn parts(&self) -> (JobKind, &JobArgs) {
        match self {
            Command::Equilibria(a) => (JobKind::Equilibria, a),
            Command::Integrate(a) => (JobKind::Integrate, a),
            Command::Zvc(a) => (JobKind::Zvc, a),
            Command::Sweep(a) => (JobKind::Sweep, a),
        }
    }
}

/// Splits `--key value` / `--key=value` tokens into pairs.
pub fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut it = tokens.iter();
    while let Some(tok) = it.next() {
        let key = tok.strip_prefix("--").ok_or_else(|| {
            CliError::Config(format!(
                "{tok}: expected an override of the form --key value"
            ))
        })?;
        match key.split_once('=') {
            Some((k, v)) => pairs.push((k.to_string(), v.to_string())),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("--{key}: missing value")))?;
                pairs.push((key.to_string(), v.clone()));
            }
        }
    }
    Ok(pairs)
}

/// Builds the validated config: file, then dotted overrides, then the global
/// `--output` and `--format` flags.
pub fn build_config(cli: &Cli) -> Result<JobConfig> {
    let (kind, args) = cli.command.parts();
    let pairs = parse_overrides(&args.overrides)?;
    let mut config_path = cli.config.clone();
    let mut output = cli.output.clone();
    let mut format = cli.format;
    let mut dotted = Vec::new();
    for (k, v) in pairs {
        match k.as_str() {
            "config" => config_path = Some(PathBuf::from(v)),
            "output" => output = output.or(Some(PathBuf::from(v))),
            "format" => {
                let f = <Format as clap::ValueEnum>::from_str(&v, true).map_err(|_| {
                    CliError::Config(format!("--format: expected csv or json, got {v}"))
                })?;
                format = format.or(Some(f));
            }
            _ => dotted.push((k, v)),
        }
    }
    let mut doc = read_document(config_path.as_deref())?;
    for (k, v) in &dotted {
        apply_override(&mut doc, k, v)?;
    }
    if let Some(path) = output {
        apply_override(
            &mut doc,
            "output.path",
            &serde_json::to_string(&path).expect("path serializes"),
        )?;
    }
    if let Some(f) = format {
        let name = match f {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        apply_override(&mut doc, "output.format", name)?;
    }
    JobConfig::from_value(doc, kind)
}

/// `traj.csv` becomes `traj.meta.json`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Writes the report where the config says. CSV output to a file gets a
/// `.meta.json` sidecar; JSON output embeds the metadata.
pub fn write_report(cfg: &JobConfig, report: &Report) -> Result<()> {
    let text = output::render(report, cfg.output.format, cfg.output.precision);
    match &cfg.output.path {
        Some(path) => {
            std::fs::write(path, text)?;
            if let (Format::Csv, Some(meta)) = (cfg.output.format, &report.meta) {
                let mut m = serde_json::to_string_pretty(meta).expect("JSON values serialize");
                m.push('\n');
                std::fs::write(meta_path(path), m)?;
            }
        }
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = build_config(cli)?;
    let report = jobs::run(&cfg)?;
    if let Some(w) = report.meta.as_ref().and_then(|m| m.get("warnings")) {
        let count = w
            .as_array()
            .map(|a| a.len() as u64)
            .or_else(|| w.as_u64())
            .unwrap_or(0);
        if count > 0 {
            eprintln!("warnings: {count}");
        }
    }
    write_report(&cfg, &report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn override_tokens() {
        let pairs = parse_overrides(&toks(&[
            "--system.mu",
            "0.1",
            "--job.t_end=5",
            "--output",
            "a.csv",
        ]))
        .unwrap();
        assert_eq!(pairs[0], ("system.mu".into(), "0.1".into()));
        assert_eq!(pairs[1], ("job.t_end".into(), "5".into()));
        assert_eq!(pairs[2], ("output".into(), "a.csv".into()));
        assert!(parse_overrides(&toks(&["system.mu", "0.1"])).is_err());
        assert!(parse_overrides(&toks(&["--system.mu"])).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            meta_path(Path::new("out/traj.csv")),
            Path::new("out/traj.meta.json")
        );
    }

    #[test]
    fn flags_after_overrides() {
        let cli = Cli::parse_from([
            "pr3bp",
            "equilibria",
            "--system.mu",
            "0.1",
            "--system.q1",
            "1",
            "--system.w1",
            "0",
            "--format",
            "json",
        ]);
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.output.format, Format::Json);
        assert_eq!(cfg.system.mu, 0.1);
    }
}
