//! `crepant`: batch verifications with JSON reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation errors out, 2 on usage or configuration errors.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crepant::cohomology::Space;
use serde_json::json;

use config::RunConfig;
use report::{Check, Outcome, Report, VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] crepant::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(name = "crepant", version, about = "Crepant resolution checks for A_{n-1} surface singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Laurent window of an equivariant I-function
    Iseries,
    /// Flat coordinates f_k, S_k and q_k
    MirrorMap,
    /// GKZ residuals of the mirror maps
    GkzCheck,
    /// Picard-Fuchs residuals of both I-functions
    PfCheck,
    /// Track the roots of W along the two-leg path
    ContinueRoots,
    /// Continue the flat coordinates from Y to the orbifold point
    VerifyCrc,
    /// Pairings and the Cartan matrix
    Pairing,
    /// Quantum structure constants with algebraic checks
    Products,
    /// Small quantum products of Y at the root of unity against those of X
    CorollaryCheck,
    /// Every check above
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Iseries => "iseries",
            Command::MirrorMap => "mirror-map",
            Command::GkzCheck => "gkz-check",
            Command::PfCheck => "pf-check",
            Command::ContinueRoots => "continue-roots",
            Command::VerifyCrc => "verify-crc",
            Command::Pairing => "pairing",
            Command::Products => "products",
            Command::CorollaryCheck => "corollary-check",
            Command::All => "all",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SideArg {
    #[value(name = "X", alias = "x")]
    X,
    #[value(name = "Y", alias = "y")]
    Y,
}

#[derive(Args, Debug)]
struct Overrides {
    /// TOML or JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    degree: Option<usize>,
    #[arg(long = "z-order", global = true)]
    z_order: Option<usize>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    precision: Option<String>,
    #[arg(long, global = true, value_enum)]
    side: Option<SideArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// one sample `a,b`; replaces the configured list
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long = "output-dir", global = true, env = "CREPANT_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, env = "CREPANT_WORKERS")]
    workers: Option<usize>,
    /// include wall time in the report
    #[arg(long, global = true)]
    timing: bool,
    /// print the report compactly on one line
    #[arg(long, global = true)]
    compact: bool,
}

fn parse_lambda(s: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("--lambda expects `a,b`, got {s:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    Ok([parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?])
}

fn resolve(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = o.n {
        cfg.n = v;
    }
    if o.degree.is_some() {
        cfg.degree = o.degree;
    }
    if o.z_order.is_some() {
        cfg.z_order = o.z_order;
    }
    if let Some(v) = o.steps {
        cfg.steps = v;
    }
    if let Some(v) = &o.precision {
        cfg.precision = v.clone();
    }
    if let Some(s) = o.side {
        cfg.side = match s {
            SideArg::X => Space::Orbifold,
            SideArg::Y => Space::Resolution,
        };
    }
    if let Some(v) = o.x0 {
        cfg.x0 = v;
    }
    if let Some(l) = &o.lambda {
        cfg.lambda = vec![parse_lambda(l)?];
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.samples {
        cfg.samples = v;
    }
    if o.output_dir.is_some() {
        cfg.output_dir = o.output_dir.clone();
    }
    if o.workers.is_some() {
        cfg.workers = o.workers;
    }
    Ok(cfg)
}

fn run_one(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let record = cfg.output_dir.is_some();
    match cmd {
        Command::Iseries => commands::iseries(cfg),
        Command::MirrorMap => commands::mirror_map(cfg),
        Command::GkzCheck => commands::gkz_check(cfg),
        Command::PfCheck => commands::pf_check(cfg),
        Command::ContinueRoots => commands::continue_roots(cfg, record),
        Command::VerifyCrc => commands::verify_crc(cfg),
        Command::Pairing => commands::pairing(cfg),
        Command::Products => commands::products(cfg),
        Command::CorollaryCheck => commands::corollary_check(cfg),
        Command::All => run_all(cfg),
    }
}

/// Computation errors become a failing check so a report is still written.
fn outcome_or_failure(r: Result<Outcome, CliError>) -> Result<Outcome, CliError> {
    match r {
        Ok(o) => Ok(o),
        Err(CliError::Core(e)) => Ok(Outcome {
            checks: vec![Check::failed("error", e.to_string())],
            ..Outcome::default()
        }),
        Err(e) => Err(e),
    }
}

fn run_all(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut jobs: Vec<(String, Command, RunConfig)> = [
        Command::MirrorMap,
        Command::GkzCheck,
        Command::PfCheck,
        Command::ContinueRoots,
        Command::VerifyCrc,
        Command::Pairing,
    ]
    .into_iter()
    .map(|c| (c.name().to_string(), c, cfg.clone()))
    .collect();
    for side in [Space::Orbifold, Space::Resolution] {
        let mut c = cfg.clone();
        c.side = side;
        let tag = if side == Space::Orbifold { "X" } else { "Y" };
        jobs.push((format!("products {tag}"), Command::Products, c));
    }
    if cfg.n <= 3 {
        jobs.push(("corollary-check".into(), Command::CorollaryCheck, cfg.clone()));
    }
    let mut checks = Vec::new();
    let mut summary = serde_json::Map::new();
    let mut budget = None;
    let mut tables = Vec::new();
    for (name, cmd, c) in jobs {
        let o = outcome_or_failure(run_one(cmd, &c))?;
        let pass = o.checks.iter().all(|k| k.pass);
        summary.insert(name.clone(), json!({ "pass": pass, "checks": o.checks.len() }));
        if cmd == Command::VerifyCrc {
            budget = o.error_budget;
        }
        tables.extend(o.tables);
        checks.extend(o.checks.into_iter().map(|mut k| {
            k.name = format!("{name}: {}", k.name);
            k
        }));
    }
    Ok(Outcome {
        checks,
        data: serde_json::Value::Object(summary),
        error_budget: budget,
        tables,
    })
}

fn write_artifacts(cfg: &RunConfig, command: &str, report: &mut Report, tables: &[report::Table]) -> Result<(), CliError> {
    let Some(dir) = &cfg.output_dir else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    for t in tables {
        let mut w = csv::Writer::from_path(dir.join(&t.file))?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        report.artifacts.push(t.file.clone());
    }
    let file = format!("{command}.json");
    report.artifacts.push(file.clone());
    std::fs::write(dir.join(file), serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let cfg = resolve(&cli.opts)?;
    cfg.validate(cli.command == Command::Iseries)?;
    if let Some(w) = cfg.workers {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let outcome = outcome_or_failure(run_one(cli.command, &cfg))?;
    let pass = outcome.checks.iter().all(|c| c.pass);
    let mut report = Report {
        command: cli.command.name().to_string(),
        version: VERSION,
        config: cfg.clone(),
        pass,
        checks: outcome.checks,
        error_budget: outcome.error_budget,
        data: outcome.data,
        artifacts: Vec::new(),
        wall_time: None,
    };
    if cli.opts.timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    write_artifacts(&cfg, cli.command.name(), &mut report, &outcome.tables)?;
    let text = if cli.opts.compact {
        serde_json::to_string(&report)?
    } else {
        serde_json::to_string_pretty(&report)?
    };
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("crepant: {m}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("crepant: {e}");
            ExitCode::from(1)
        }
    }
}
