use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use stablab::limit_lab::{self, default_selftest_config, ExperimentConfig, ExperimentKind, ExperimentReport};
use stablab::LabError;

/// Seeded Monte Carlo experiments for stable limit theorems of
/// Gibbs-Markov systems and their excursion processes.
///
/// Exit status: 0 when every criterion passes, 2 when a statistical
/// criterion fails, 1 on usage or configuration errors.
#[derive(Debug, Parser)]
#[command(name = "stablab", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config as JSON; a report JSON is accepted too and its
    /// embedded config is rerun.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed, overriding the one in the config.
    #[arg(long, global = true, env = "LAB_SEED")]
    seed: Option<u64>,

    /// Directory for the report files [default: the config's output_dir, else .]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads. Changes wall-clock time only, never results.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Print the resolved config and the files written.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Marginal at time 1 against the stable limit.
    Marginal,
    /// Finite-dimensional distributions and increments.
    Fdd,
    /// Exceedance tables of the modulus of continuity.
    Tightness,
    /// Maximal inequalities and the weighted tail constants.
    Maxineq,
    /// Occupation fractions of the Z-extension against the arcsine law.
    Arcsine,
    /// Tail indices and disjointness of the intermittent excursions.
    Excursions,
    /// Asymptotic independence of the two excursion processes.
    Independence,
    /// J1-continuous functionals against reference Levy paths.
    J1probe,
    /// Pathwise-exact invariants; runs without a config.
    Selftest,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Marginal => ExperimentKind::Marginal,
            Command::Fdd => ExperimentKind::Fdd,
            Command::Tightness => ExperimentKind::Tightness,
            Command::Maxineq => ExperimentKind::Maxineq,
            Command::Arcsine => ExperimentKind::Arcsine,
            Command::Excursions => ExperimentKind::Excursions,
            Command::Independence => ExperimentKind::Independence,
            Command::J1probe => ExperimentKind::J1probe,
            Command::Selftest => ExperimentKind::Selftest,
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, LabError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    match value.get("config") {
        Some(embedded) if value.get("experiment").is_some() => {
            let cfg: ExperimentConfig = serde_json::from_value(embedded.clone())?;
            cfg.validate()?;
            Ok(cfg)
        }
        _ => ExperimentConfig::from_json(&text),
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(path), _) => load_config(path)?,
        (None, Command::Selftest) => default_selftest_config(0),
        (None, _) => return Err(LabError::Config("this experiment needs --config <PATH>".into())),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(
    report: &ExperimentReport,
    dir: &Path,
    seconds: f64,
    workers: usize,
) -> Result<Vec<PathBuf>, LabError> {
    let mut written = report.write(dir)?;
    // wall-clock lives beside the report so the report itself stays reproducible
    let timing = dir.join(format!("{}.timing.json", report.stem()));
    let body = serde_json::json!({ "wall_seconds": seconds, "workers": workers });
    std::fs::write(&timing, format!("{body}\n"))?;
    written.push(timing);
    Ok(written)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}\n");
            use clap::CommandFactory;
            eprintln!("{}", Cli::command().render_usage());
            return ExitCode::from(1);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 || rayon::ThreadPoolBuilder::new().num_threads(w).build_global().is_err() {
            eprintln!("error: cannot start {w} workers");
            return ExitCode::from(1);
        }
    }
    let workers = rayon::current_num_threads();
    let resolved = serde_json::to_string(&cfg).unwrap_or_default();
    if cli.verbose > 0 {
        eprintln!("config: {resolved}");
    }

    let start = Instant::now();
    let report = match limit_lab::run(cli.command.kind(), &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let dir = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    match write_outputs(&report, &dir, seconds, workers) {
        Ok(files) if cli.verbose > 0 => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Ok(_) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    print!("{}", report.summary());
    println!("{} {} in {seconds:.1}s", if report.passed { "PASS" } else { "FAIL" }, report.experiment);
    ExitCode::from(if report.passed { 0 } else { 2 })
}
