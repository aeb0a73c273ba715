mod commands;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use likewise_theta::document::SpecDocument;
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    EvalTheta,
    EvalBasis,
    Bargmann,
    Verify,
    GramTable,
}

/// Evaluate likewise theta functions, their Fock images and the theta
/// kernel, or run the verification suite on a JSON space document.
#[derive(Debug, Parser)]
#[command(name = "likewise", version)]
struct RunConfig {
    /// JSON space document.
    #[arg(long)]
    spec: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Numerical tolerance for theta truncation and quadrature error estimates.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for the randomized checks of `verify`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    command: Command,
}

/// Failure reported as `{"error": {"code", "message"}}`.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl From<likewise_theta::Error> for CliError {
    fn from(e: likewise_theta::Error) -> Self {
        Self { code: e.code(), message: e.to_string() }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self { code: "IoError", message: e.to_string() }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: "IoError", message: format!("{}: {e}", path.display()) }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_error(p, e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

/// Runs one command; `Ok(false)` means a verification check failed.
fn run(cfg: &RunConfig) -> Result<bool, CliError> {
    if !(cfg.tol > 0.0 && cfg.tol < 1.0) {
        return Err(CliError { code: "InvalidInput", message: format!("--tol must lie in (0, 1), got {}", cfg.tol) });
    }
    let text = fs::read_to_string(&cfg.spec).map_err(|e| io_error(&cfg.spec, e))?;
    let doc = SpecDocument::from_json(&text)?;
    let (bytes, passed) = match cfg.command {
        Command::EvalTheta => (commands::eval_theta(&doc, cfg.tol)?, true),
        Command::EvalBasis => (commands::eval_basis(&doc)?, true),
        Command::Bargmann => (commands::bargmann(&doc, cfg.tol)?, true),
        Command::GramTable => (commands::gram_table(&doc, cfg.tol)?, true),
        Command::Verify => {
            let report = verify::run_suite(&doc, cfg.tol, cfg.seed)?;
            let passed = report.all_passed;
            let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
            bytes.push(b'\n');
            (bytes, passed)
        }
    };
    write_output(cfg.out.as_deref(), &bytes)?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let doc = json!({ "error": { "code": e.code, "message": e.message } });
            eprintln!("{doc}");
            ExitCode::from(2)
        }
    }
}
