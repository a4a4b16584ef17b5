use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use proxpoint::experiment::problem_config::ProblemConfig;
use proxpoint::experiment::{
    emit_csv, run_experiment, write_signal, ExperimentConfig, TraceRow, Variant,
};
use proxpoint::solver::{Solver, Status};
use proxpoint::suite::run_suites;

const SEED_VAR: &str = "PROXPOINT_SEED";

#[derive(Parser)]
#[command(
    name = "proxpoint",
    version,
    about = "Best approximation with prescribed proximal points"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem described in a JSON file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Directory for solution.csv and trace.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the band-limited signal recovery experiment.
    Demo {
        #[arg(long, value_enum, default_value_t = Scale::Desk)]
        scale: Scale,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        /// Overrides both the config and PROXPOINT_SEED.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value = "demo_out")]
        out: PathBuf,
        /// Experiment config in JSON; replaces the scale preset.
        #[arg(long, conflicts_with = "scale")]
        config: Option<PathBuf>,
    },
    /// Run the randomized property suites.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Desk,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Affine,
    Plain,
    Both,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Affine => Variant::Affine,
            VariantArg::Plain => Variant::Plain,
            VariantArg::Both => Variant::Both,
        }
    }
}

enum Failure {
    Config(anyhow::Error),
    Infeasible(String),
    Checks(usize),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 3,
            Failure::Infeasible(_) => 2,
            Failure::Checks(_) | Failure::Other(_) => 1,
        }
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn other(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Other(e.into())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_VAR}={s:?} is not an unsigned integer"))
            .map_err(Failure::Config),
        Err(_) => Ok(None),
    }
}

fn solve(config: &Path, out: &Path) -> Result<(), Failure> {
    let cfg = ProblemConfig::from_json(&read_text(config)?)
        .with_context(|| format!("parsing {}", config.display()))
        .map_err(Failure::Config)?;
    let (problem, control) = cfg.build().map_err(config_err)?;
    let solver = Solver::new(&problem, &control).map_err(config_err)?;
    let mut rows = Vec::new();
    let (x, trace) = solver
        .run_with(|n, _, rec| {
            rows.push(TraceRow {
                n,
                variant: "solve".into(),
                theta: Some(rec.theta),
                lambda: rec.lambda,
                step_norm: Some(rec.step_norm),
                normalized_error: None,
            })
        })
        .map_err(other)?;
    fs::create_dir_all(out).map_err(other)?;
    write_signal(&x, &out.join("solution.csv")).map_err(other)?;
    emit_csv(&rows, &out.join("trace.csv")).map_err(other)?;
    println!("status      {:?}", trace.status);
    println!("iterations  {}", trace.iterations);
    for (c, r) in problem.constraints().iter().zip(&trace.residuals) {
        println!("residual    {:<40} {r:.3e}", c.label());
    }
    println!("wrote       {}", out.display());
    if trace.status == Status::Infeasible {
        let diag = trace
            .infeasibility
            .map(|d| format!("{d:?}"))
            .unwrap_or_default();
        return Err(Failure::Infeasible(diag));
    }
    Ok(())
}

fn demo(
    scale: Scale,
    variant: Option<VariantArg>,
    seed: Option<u64>,
    iters: Option<usize>,
    out: &Path,
    config: Option<&Path>,
) -> Result<(), Failure> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::from_json(&read_text(path)?)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(Failure::Config)?,
        None => match scale {
            Scale::Desk => ExperimentConfig::desk(),
            Scale::Full => ExperimentConfig::full(),
        },
    };
    if let Some(s) = env_seed()? {
        cfg.seed = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(v) = variant {
        cfg.variant = v.into();
    }
    if let Some(n) = iters {
        cfg.iters = n;
    }
    cfg.output_dir = Some(out.to_path_buf());
    cfg.validate().map_err(config_err)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }

    let outcome = run_experiment(&cfg).map_err(other)?;
    println!(
        "N={} B={} K={} block_dim={} seed={} gamma={:.6}",
        cfg.n, cfg.b, cfg.k, cfg.block_dim, cfg.seed, outcome.setup.gamma
    );
    let r = &outcome.reference;
    println!(
        "reference   {:?} after {} iterations, max prescription residual {:.3e}",
        r.status, r.iterations, r.residuals.max_prescription
    );
    for run in &outcome.runs {
        let err = run.rows.last().and_then(|t| t.normalized_error);
        println!(
            "{:<11} {:?} after {} iterations, normalized error {}",
            run.variant.label(),
            run.status,
            run.iterations,
            err.map_or("n/a".to_string(), |e| format!("{e:.4e}"))
        );
    }
    println!("wrote       {}", out.display());
    if outcome.infeasible() {
        return Err(Failure::Infeasible(
            "a run stopped on empty Haugazeau halfspaces".into(),
        ));
    }
    Ok(())
}

fn check(seed: u64, trials: usize) -> Result<(), Failure> {
    let results = run_suites(seed, trials).map_err(other)?;
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {:<28} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { config, out } => solve(config, out),
        Command::Demo {
            scale,
            variant,
            seed,
            iters,
            out,
            config,
        } => demo(*scale, *variant, *seed, *iters, out, config.as_deref()),
        Command::Check { seed, trials } => check(*seed, *trials),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("config error: {e:#}"),
                Failure::Infeasible(d) => eprintln!("infeasible: {d}"),
                Failure::Checks(n) => eprintln!("{n} suite(s) failed"),
                Failure::Other(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
