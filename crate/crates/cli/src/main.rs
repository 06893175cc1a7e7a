//! `frame-lr`: command-line driver for the magnetic-frame analyses.
//!
//! Exit status: 0 when the selected verification passes, 1 when it fails, 2 for
//! configuration, input or numerical errors. Failures leave `failure.json` in the
//! output directory and print the same record on stderr.

mod commands;
mod config;
mod output;
mod plot;
mod run_config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{failure_record, Outcome};
use config::{Config, ConfigError};
use output::{Json, OutDir};
use run_config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(ConfigError),
    #[error("{0}")]
    Module(#[from] frame_lr::Error),
    #[error("cannot access {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{path}: {reason}")]
    Input { path: String, reason: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), reason: e.to_string() }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Module(_) => "module",
            CliError::Io { .. } => "io",
            CliError::Input { .. } => "input",
            CliError::Internal(_) => "internal",
        }
    }

    fn record(&self, analysis: &str) -> String {
        let mut j = Json::new().str("status", "error").str("kind", self.kind()).str("analysis", analysis);
        match self {
            CliError::Config(c) => {
                j = j.str("field", c.field.as_deref().unwrap_or(""));
                j = match c.line {
                    Some(l) => j.int("line", l as u64),
                    None => j.str("line", ""),
                };
                j = j.str("reason", &c.reason);
            }
            CliError::Module(e) => {
                j = j.str("error", module_error_name(e)).str("reason", &e.to_string());
            }
            CliError::Io { path, reason } | CliError::Input { path, reason } => {
                j = j.str("path", path).str("reason", reason);
            }
            CliError::Internal(m) => j = j.str("reason", m),
        }
        j.render()
    }
}

fn module_error_name(e: &frame_lr::Error) -> &'static str {
    use frame_lr::Error::*;
    match e {
        InvalidParameter { .. } => "invalid_parameter",
        EmptySet(_) => "empty_set",
        Regime { .. } => "regime",
        Truncation { .. } => "truncation",
        Dimension(_) => "dimension",
        NotNormalOrdered => "not_normal_ordered",
        NotProjection(_) => "not_projection",
        NotNested(_) => "not_nested",
        UnknownSite(_) => "unknown_site",
        Numerical(_) => "numerical",
        Parse { .. } => "parse",
    }
}

#[derive(Debug, Parser)]
#[command(name = "frame-lr", version, about = "Magnetic coherent-state frames and Lieb-Robinson checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (sectioned key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomised sampling; overrides `[run] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run `lr` with the velocity multiplied by `[lr] negative_control_scale`.
    #[arg(long, global = true)]
    negative_control: bool,
    /// Worker threads; overrides `[run] threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Gram matrix of the window.
    Gram,
    /// Frame-bound estimates over nested windows.
    Bounds,
    /// Decay certificate for S^-p and its verification.
    Decay,
    /// The C_Phi constant and the Lieb-Robinson velocity.
    Cphi,
    /// Two-body kernel values against their decay bound.
    Wkernel,
    /// Landau quadratic coefficients against their decay bound.
    Landau,
    /// Exact dynamics against the Lieb-Robinson bound.
    Lr,
    /// Finite-volume convergence of the dynamics.
    Converge,
    /// Long-format plot data from report CSVs.
    Plotdata {
        /// Report files (lr.csv, converge.csv, decay.csv, landau.csv, wkernel.csv, bounds.csv).
        inputs: Vec<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gram => "gram",
            Command::Bounds => "bounds",
            Command::Decay => "decay",
            Command::Cphi => "cphi",
            Command::Wkernel => "wkernel",
            Command::Landau => "landau",
            Command::Lr => "lr",
            Command::Converge => "converge",
            Command::Plotdata { .. } => "plotdata",
        }
    }
}

fn plotdata(inputs: &[PathBuf], out: &OutDir) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let source = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        rows.extend(
            plot::plot_rows(source, &text)
                .map_err(|reason| CliError::Input { path: path.display().to_string(), reason })?,
        );
    }
    out.write("plot.csv", &plot::plot_csv(&rows))?;
    Ok(Outcome { passed: true, reason: format!("{} rows", rows.len()), report: String::new() })
}

fn run(cli: &Cli, out: &OutDir) -> Result<Outcome, CliError> {
    if let Command::Plotdata { inputs } = &cli.command {
        return plotdata(inputs, out);
    }
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::Config(ConfigError { line: None, field: None, reason: "--config is required".into() })
    })?;
    let rc = RunConfig::from_config(&Config::load(path)?)?;
    if let Some(n) = cli.threads.or(rc.threads) {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let seed = cli.seed.unwrap_or(rc.seed);
    match &cli.command {
        Command::Gram => commands::gram_cmd(&rc, out),
        Command::Bounds => commands::bounds_cmd(&rc, out),
        Command::Decay => commands::decay_cmd(&rc, out),
        Command::Cphi => commands::cphi_cmd(&rc, out),
        Command::Wkernel => commands::wkernel_cmd(&rc, out, seed),
        Command::Landau => commands::landau_cmd(&rc, out),
        Command::Lr => commands::lr_cmd(&rc, out, cli.negative_control),
        Command::Converge => commands::converge_cmd(&rc, out),
        Command::Plotdata { .. } => unreachable!("handled above"),
    }
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panic".into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let analysis = cli.command.name();
    let failure_path = cli.out.join("failure.json");
    let result = OutDir::create(&cli.out).and_then(|out| {
        let _ = std::fs::remove_file(&failure_path);
        std::panic::set_hook(Box::new(|_| {}));
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli, &out)))
            .unwrap_or_else(|p| Err(CliError::Internal(panic_message(p))))
    });
    let (record, code) = match result {
        Ok(o) if o.passed => {
            println!("{analysis}: pass ({})", o.reason);
            return ExitCode::SUCCESS;
        }
        Ok(o) => {
            print!("{}", o.report);
            (failure_record(analysis, &o), 1)
        }
        Err(e) => (e.record(analysis), 2),
    };
    eprint!("{record}");
    let _ = std::fs::write(&failure_path, &record);
    ExitCode::from(code)
}
