//! Config-driven runner for the `lyapsize` library: reads a JSON [`RunConfig`],
//! dispatches to the requested mode, and writes CSV/JSON artifacts.

mod config;
mod run;
mod sampling;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lyapsize::dynamics::CatalogId;

pub use config::{
    AuditConfig, ExpansiveConfig, IntegrateConfig, IoConfig, Mode, MuConfig, NeighborhoodConfig, RunConfig,
    SamplingConfig, SystemConfig,
};
pub use run::{run_config, LyapSummary, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;
pub const EXIT_COUNTEREXAMPLE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] lyapsize::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lyapsize", version, about = "Whitney-size Lyapunov functions and expansivity checks")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV/JSON outputs (default: the config's `io.out_dir`, else `.`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Only print what the mode's contract requires.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Whitney size of a point set: prints `value,tail_bound`.
    Size(SetArgs),
    /// Hausdorff distance of two point sets: prints `value,tail_bound`.
    Hausdorff(SetArgs),
    /// Lyapunov audit along sampled orbits (any `lyap-*` config mode).
    Lyap,
    /// Pair separation check for a map.
    Expansive(ExpansiveArgs),
    /// Chain (continuum) separation check for a map.
    CwExpansive(ExpansiveArgs),
    /// Strict-decrease audit of a `param,V` series.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct SetArgs {
    /// Point-set CSV files.
    pub files: Vec<PathBuf>,
    /// Truncation depth of the size series.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Catalog system whose space the points live in.
    #[arg(long, value_parser = parse_catalog)]
    pub system: Option<CatalogId>,
    /// Comma-separated system parameters.
    #[arg(long)]
    pub params: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExpansiveArgs {
    #[arg(long, value_parser = parse_catalog)]
    pub system: Option<CatalogId>,
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Pair rows (2 * dim columns) or chain endpoint rows (`id,coords`).
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Number of random samples when no sample file is given.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Headerless CSV of `param,V` rows.
    pub series: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
}

fn parse_catalog(s: &str) -> Result<CatalogId, String> {
    s.parse().map_err(|e: lyapsize::Error| e.to_string())
}

fn parse_params(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|f| !f.trim().is_empty())
        .map(|f| f.trim().parse().map_err(|_| CliError::Config(format!("`--params`: bad number {f:?}"))))
        .collect()
}

fn default_mode(cmd: &Command) -> Mode {
    match cmd {
        Command::Size(_) => Mode::Size,
        Command::Hausdorff(_) => Mode::Hausdorff,
        Command::Lyap => Mode::LyapAsymptotic,
        Command::Expansive(_) => Mode::Expansive,
        Command::CwExpansive(_) => Mode::CwExpansive,
        Command::Audit(_) => Mode::Audit,
    }
}

fn accepts(cmd: &Command, mode: Mode) -> bool {
    match cmd {
        Command::Lyap => mode.is_lyap(),
        other => default_mode(other) == mode,
    }
}

fn set_system(cfg: &mut RunConfig, id: Option<CatalogId>, params: &Option<String>) -> Result<(), CliError> {
    if let Some(id) = id {
        cfg.system = Some(SystemConfig { id, params: Vec::new() });
    }
    if let Some(p) = params {
        let sys = cfg.system.as_mut().ok_or_else(|| CliError::Config("`--params` needs `--system`".into()))?;
        sys.params = parse_params(p)?;
    }
    Ok(())
}

/// Merge the config file (if any) with command-line overrides.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(default_mode(&cli.command)),
    };
    if !accepts(&cli.command, cfg.mode) {
        return Err(CliError::Config(format!("config mode {} does not match this subcommand", cfg.mode.name())));
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match &cli.command {
        Command::Size(a) | Command::Hausdorff(a) => {
            if !a.files.is_empty() {
                cfg.io.inputs = a.files.clone();
            }
            if let Some(d) = a.depth {
                cfg.mu.depth = d;
            }
            set_system(&mut cfg, a.system, &a.params)?;
        }
        Command::Expansive(a) | Command::CwExpansive(a) => {
            set_system(&mut cfg, a.system, &a.params)?;
            if let Some(d) = a.delta {
                cfg.expansive.delta = d;
            }
            if let Some(h) = a.horizon {
                cfg.expansive.horizon = h;
            }
            if let Some(s) = &a.samples {
                cfg.io.inputs = vec![s.clone()];
            }
            if let Some(c) = a.count {
                cfg.sampling.count = c;
            }
        }
        Command::Audit(a) => {
            if let Some(s) = &a.series {
                cfg.io.inputs = vec![s.clone()];
            }
            if a.tol.is_some() {
                cfg.audit.tol = a.tol;
            }
        }
        Command::Lyap => {
            if cli.config.is_none() {
                return Err(CliError::Config("`lyap` needs `--config`".into()));
            }
        }
    }
    Ok(cfg)
}

/// Run a parsed command line; artifacts go to disk, the contract's stdout text is returned.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = resolve(cli)?;
    let out_dir = cli.out_dir.clone().or_else(|| cfg.io.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    run_config(&cfg, &out_dir, cli.quiet)
}
