//! Command-line runner: one JSON config per run, artifacts named after the
//! command and a hash of the effective config.
//!
//! Exit status is 0 on success, 1 for invalid input, 2 for numerical
//! blow-up, and 3 for I/O failures. Failures print one JSON object on
//! standard error.

pub mod config;
mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::io::{artifact_name, config_hash};
use config::Diagnostic;

#[derive(Parser, Debug)]
#[command(name = "loewner-witt", version, about = "Löwner-Kufarev evolution, Witt algebra checks, geodesics and chordal SLE")]
pub struct Cli {
    /// JSON config file; omitted means an empty object.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for Monte-Carlo ensembles (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Suppress the summary line.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Overrides the `n` field of the config.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Integrate the coefficient (and momentum) flow; writes a CSV trajectory.
    Evolve,
    /// Track the conserved Laurent coefficients along a trajectory.
    Conserve,
    /// Build L_0, L_{-1}, ... and run their consistency checks.
    BuildLneg,
    /// Witt brackets of the Kirillov fields and the P-polynomial oracle.
    WittCheck,
    /// Integrate the geodesic velocity flow and report energy drift.
    Geodesic,
    /// Constant-velocity geodesics: exact polynomials against RK4.
    GeodesicConst,
    /// Simulate chordal SLE paths and check the deterministic map.
    SleSim,
    /// Monte-Carlo martingale test of a drift-less observable.
    SleMartingale,
    /// Duality of the one-forms with the Kirillov fields and the L_0 expansion.
    DualityCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Conserve => "conserve",
            Command::BuildLneg => "build-lneg",
            Command::WittCheck => "witt-check",
            Command::Geodesic => "geodesic",
            Command::GeodesicConst => "geodesic-const",
            Command::SleSim => "sle-sim",
            Command::SleMartingale => "sle-martingale",
            Command::DualityCheck => "duality-check",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Validation { message: String, diagnostics: Vec<Diagnostic> },
    Numerical(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation { .. } => 1,
            Failure::Numerical(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Validation { message, diagnostics } => {
                json!({"error": "validation", "message": message, "diagnostics": diagnostics})
            }
            Failure::Numerical(m) => json!({"error": "numerical", "message": m}),
            Failure::Io(m) => json!({"error": "io", "message": m}),
        }
    }

    fn invalid(diagnostics: Vec<Diagnostic>) -> Self {
        Failure::Validation {
            message: format!("{} invalid config field(s)", diagnostics.len()),
            diagnostics,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowUp { .. } | Error::Degenerate { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Validation {
                message: other.to_string(),
                diagnostics: Vec::new(),
            },
        }
    }
}

/// What a command produced.
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Artifact sink shared by the commands.
pub struct Context {
    pub command: Command,
    pub out: PathBuf,
    pub hash: String,
}

impl Context {
    pub fn write(&self, ext: &str, contents: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out).map_err(|e| Failure::Io(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(artifact_name(self.command.name(), &self.hash, ext));
        fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> Result<PathBuf, Failure> {
        let text = crate::io::to_json_string(value).map_err(|e| Failure::Io(e.to_string()))?;
        self.write("json", &text)
    }
}

fn load_config(path: Option<&Path>) -> Result<Map<String, Value>, Failure> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(Map::new());
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Validation {
        message: format!("config is not valid JSON: {e}"),
        diagnostics: Vec::new(),
    })?;
    match value {
        Value::Object(m) => Ok(m),
        other => Err(Failure::Validation {
            message: format!("config must be a JSON object, got {other}"),
            diagnostics: Vec::new(),
        }),
    }
}

fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    let mut cfg = load_config(cli.config.as_deref())?;
    if let Some(n) = cli.n {
        cfg.insert("n".into(), Value::from(n));
    }
    let hash = config_hash(&json!({"command": cli.command.name(), "config": Value::Object(cfg.clone())}));
    let ctx = Context {
        command: cli.command,
        out: cli.out.clone(),
        hash,
    };
    if cli.threads > 0 {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match cli.command {
        Command::Evolve => commands::evolve(&cfg, &ctx),
        Command::Conserve => commands::conserve(&cfg, &ctx),
        Command::BuildLneg => commands::build_lneg(&cfg, &ctx),
        Command::WittCheck => commands::witt_check(&cfg, &ctx),
        Command::Geodesic => commands::geodesic(&cfg, &ctx),
        Command::GeodesicConst => commands::geodesic_const(&cfg, &ctx),
        Command::SleSim => commands::sle_sim(&cfg, &ctx),
        Command::SleMartingale => commands::sle_martingale(&cfg, &ctx),
        Command::DualityCheck => commands::duality_check(&cfg, &ctx),
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let f = Failure::Validation {
                message: e.to_string().trim().to_string(),
                diagnostics: Vec::new(),
            };
            eprintln!("{}", f.to_json());
            return f.exit_code();
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("{}", json!({"warning": w}));
            }
            if !cli.quiet {
                println!("{}", outcome.summary);
            }
            0
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            f.exit_code()
        }
    }
}

pub(crate) fn check(diags: Vec<Diagnostic>) -> Result<(), Failure> {
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Failure::invalid(diags))
    }
}
