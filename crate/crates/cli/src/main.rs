//! `nlac`: batch front end for the solvers. Reads a JSON config (unit-suffixed
//! keys, unknown keys rejected), applies `--set key=value` overrides, runs one
//! experiment and writes CSV/JSON artifacts plus `metadata.json` into `--out`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver error
//! or failed self-test. Failures also write `error.json`.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use config::{apply_override, RunConfig};

const TOOL: &str = "nlac";
const VERSION: &str = env!("NLAC_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    Simulate,
    SweepTau,
    SweepDelta,
    Harmonics,
    Cascade,
    Invert,
    FracSelftest,
}

#[derive(Parser, Debug)]
#[command(name = TOOL, version = VERSION, about = "1-D nonlinear acoustics experiments")]
struct Args {
    command: Command,
    /// JSON config, or a `metadata.json` from an earlier run.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Dotted override, e.g. `--set medium.c_m_per_s=1480`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (created if missing).
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Solver(nlac::Error),
    Check(String),
    Io(String),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Solver(nlac::Error::InvalidParameter(_) | nlac::Error::DimensionMismatch { .. }) => 2,
            CliError::Solver(_) | CliError::Check(_) => 3,
        }
    }

    fn payload(&self) -> Value {
        let (kind, message) = match self {
            CliError::Schema(m) => ("SchemaError", m.clone()),
            CliError::Solver(e) => (e.kind(), e.to_string()),
            CliError::Check(m) => ("SelfTestFailed", m.clone()),
            CliError::Io(m) => ("IoError", m.clone()),
        };
        json!({"error": kind, "message": message, "exit_code": self.exit_code()})
    }
}

impl From<nlac::Error> for CliError {
    fn from(e: nlac::Error) -> Self {
        CliError::Solver(e)
    }
}

/// Reads the config document; a metadata file contributes its `config`.
fn load(path: Option<&Path>, command: Command) -> Result<Value, CliError> {
    let Some(path) = path else {
        return Ok(json!({}));
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    if doc.get("tool").and_then(Value::as_str) == Some(TOOL) {
        let recorded: Command = serde_json::from_value(doc.get("command").cloned().unwrap_or(Value::Null))
            .map_err(|e| CliError::Schema(format!("metadata command: {e}")))?;
        if recorded != command {
            return Err(CliError::Schema(format!(
                "metadata was written by '{}', not '{}'",
                command_name(recorded),
                command_name(command)
            )));
        }
        return doc
            .get("config")
            .cloned()
            .ok_or_else(|| CliError::Schema("metadata has no 'config'".into()));
    }
    Ok(doc)
}

fn command_name(c: Command) -> String {
    c.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let mut doc = load(args.config.as_deref(), args.command)?;
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Schema(format!("override '{o}' is not KEY=VALUE")))?;
        apply_override(&mut doc, k.trim(), v.trim()).map_err(CliError::Schema)?;
    }
    serde_json::from_value(doc).map_err(|e| CliError::Schema(e.to_string()))
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let metadata = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": args.command,
        "config": cfg,
    });
    commands::write_json(&args.out.join("metadata.json"), &metadata)?;
    let out = args.out.as_path();
    match args.command {
        Command::Simulate => commands::simulate(&cfg, out),
        Command::SweepTau => commands::sweep_tau(&cfg, out),
        Command::SweepDelta => commands::sweep_delta(&cfg, out),
        Command::Harmonics => commands::harmonics(&cfg, out),
        Command::Cascade => commands::cascade(&cfg, out),
        Command::Invert => commands::invert(&cfg, out),
        Command::FracSelftest => commands::frac_selftest(&cfg, out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = fs::create_dir_all(&args.out) {
        let err = CliError::Schema(format!("cannot create {}: {e}", args.out.display()));
        eprintln!("{}", err.payload());
        return ExitCode::from(err.exit_code());
    }
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = err.payload();
            eprintln!("{payload}");
            // best effort; the payload is already on stderr
            let _ = commands::write_json(&args.out.join("error.json"), &payload);
            ExitCode::from(err.exit_code())
        }
    }
}
