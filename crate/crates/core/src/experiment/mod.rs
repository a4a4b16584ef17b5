//! Recovery of a band-limited signal from a total-variation bound and
//! isotonic regressions of random projections, solved with and without
//! extrapolation through the band-limit subspace.

mod csv;
pub mod problem_config;

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use csv::{
    emit_csv, format_signal, format_trace, parse_trace, read_signal, write_signal, TraceRow,
    TRACE_HEADER,
};

use crate::catalog::{
    bandlimit_projector, cocoercive_aggregate, tv, tv_level_projector, ConvexSet,
    EquivalentPrescription, ObservationSpec,
};
use crate::check::gaussian_signal;
use crate::operator::{LinearMap, Operator};
use crate::signal::Signal;
use crate::solver::{
    AffineSelector, Constraint, ControlConfig, Problem, RelaxationRule, ScheduleSpec, Solver,
    Status,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Extrapolation through the band-limit subspace.
    Affine,
    /// Band limit treated as an ordinary activated constraint.
    Plain,
    Both,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Self::Affine => "affine",
            Self::Plain => "plain",
            Self::Both => "both",
        }
    }

    pub fn expand(self) -> Vec<Variant> {
        match self {
            Self::Both => vec![Self::Affine, Self::Plain],
            v => vec![v],
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "affine" => Ok(Self::Affine),
            "plain" => Ok(Self::Plain),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Signal length.
    #[serde(rename = "N")]
    pub n: usize,
    /// Number of retained DFT bins (odd).
    #[serde(rename = "B")]
    pub b: usize,
    /// Number of observation blocks.
    #[serde(rename = "K")]
    pub k: usize,
    pub block_dim: usize,
    /// `γ = gamma_factor · tv(x̄)`
    pub gamma_factor: f64,
    pub seed: u64,
    pub iters: usize,
    pub variant: Variant,
    pub epsilon: f64,
    /// The reference solution runs the affine variant this many times longer.
    pub reference_factor: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    pub fn desk() -> Self {
        Self {
            n: 128,
            b: 13,
            k: 6,
            block_dim: 4,
            gamma_factor: 1.5,
            seed: 0,
            iters: 1000,
            variant: Variant::Both,
            epsilon: 0.01,
            reference_factor: 20,
            output_dir: None,
        }
    }

    pub fn full() -> Self {
        Self {
            n: 1024,
            b: 103,
            k: 25,
            block_dim: 10,
            ..Self::desk()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.b == 0 || self.b % 2 == 0 || self.b > self.n {
            return bad(format!(
                "B must be odd and at most N, got B={} N={}",
                self.b, self.n
            ));
        }
        if self.n < 2 {
            return bad("N must be at least 2".into());
        }
        if self.k == 0 || self.block_dim == 0 {
            return bad("K and block_dim must be positive".into());
        }
        if !(self.gamma_factor >= 1.0 && self.gamma_factor.is_finite()) {
            return bad(format!(
                "gamma_factor must be at least 1, got {}",
                self.gamma_factor
            ));
        }
        if self.iters == 0 || self.reference_factor == 0 {
            return bad("iters and reference_factor must be positive".into());
        }
        // the plain variant averages three activations
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0 / 3.0) {
            return bad(format!(
                "epsilon must lie in (0, 1/3], got {}",
                self.epsilon
            ));
        }
        Ok(())
    }

    /// Soft recommendations that do not prevent a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.k * self.block_dim > self.n {
            w.push(format!(
                "K·block_dim = {} exceeds N = {}",
                self.k * self.block_dim,
                self.n
            ));
        }
        w
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Band-limited test signal with unit sup-norm.
pub fn generate_signal(n: usize, b: usize, seed: u64) -> Result<Signal> {
    let p = bandlimit_projector(n, b)?;
    let raw = gaussian_signal(&mut rng(seed, 0), n);
    let x = p.apply(&raw);
    let m = x.sup_norm();
    if m == 0.0 {
        return Err(Error::Config("generated signal vanishes".into()));
    }
    Ok(x.scale(1.0 / m))
}

/// For each block `k`, `q_k` is the isotonic regression of `block_dim`
/// Gaussian projections of `x̄`, prescribed through
/// `F_k = ‖L_k‖⁻² L_k* ∘ proj_iso ∘ L_k` and `p_k = ‖L_k‖⁻² L_k* q_k`.
pub fn build_observations(
    xbar: &Signal,
    k: usize,
    block_dim: usize,
    seed: u64,
) -> Result<Vec<EquivalentPrescription>> {
    let mut r = rng(seed, 1);
    let iso = ConvexSet::isotonic_cone(block_dim).projector();
    (0..k)
        .map(|i| {
            let rows = (0..block_dim)
                .map(|_| gaussian_signal(&mut r, xbar.dim()).into_vec())
                .collect();
            let spec =
                ObservationSpec::observe(LinearMap::from_rows(rows)?, iso.clone(), 1.0, xbar)?;
            let mut e = cocoercive_aggregate(&[spec])?;
            e.provenance = format!("isotonic_block_{i}");
            Ok(e)
        })
        .collect()
}

/// Ground truth, constraint data and observations of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub xbar: Signal,
    pub gamma: f64,
    pub bandlimit: Operator,
    pub observations: Vec<EquivalentPrescription>,
    pub epsilon: f64,
}

/// Residuals of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `‖P x − x‖`
    pub bandlimit: f64,
    pub tv: f64,
    /// `max(tv(x) − γ, 0)`
    pub tv_excess: f64,
    /// `max_k ‖F_k x − p_k‖`
    pub max_prescription: f64,
}

impl ExperimentSetup {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let xbar = generate_signal(cfg.n, cfg.b, cfg.seed)?;
        let gamma = cfg.gamma_factor * tv(&xbar)?;
        Ok(Self {
            bandlimit: bandlimit_projector(cfg.n, cfg.b)?,
            observations: build_observations(&xbar, cfg.k, cfg.block_dim, cfg.seed)?,
            xbar,
            gamma,
            epsilon: cfg.epsilon,
        })
    }

    /// Constraint 0 is the band limit, 1 the TV bound, the rest the
    /// prescriptions. The TV bound is active at every iteration and one
    /// prescription is swept per iteration; the plain variant also activates
    /// the band limit.
    pub fn problem(&self, variant: Variant, max_iter: usize) -> Result<(Problem, ControlConfig)> {
        let n = self.xbar.dim();
        let mut cons = vec![
            Constraint::affine(self.bandlimit.clone())?.with_label("bandlimit"),
            Constraint::convex_set(tv_level_projector(n, self.gamma)?)?.with_label("tv"),
        ];
        for e in &self.observations {
            cons.push(Constraint::from_prescription(e.clone())?);
        }
        let (family, always) = match variant {
            Variant::Affine => (vec![AffineSelector::Constraint(0)], vec![1]),
            Variant::Plain => (vec![AffineSelector::Ambient], vec![0, 1]),
            Variant::Both => return Err(Error::Config("pick a single variant".into())),
        };
        let problem = Problem::new(Signal::zeros(n), cons, family)?;
        let control = ControlConfig {
            epsilon: self.epsilon,
            schedule: ScheduleSpec {
                always_active: always,
                block_size: Some(1),
            },
            relaxation: RelaxationRule::Alternating,
            max_iter,
            keep_records: false,
            ..ControlConfig::default()
        };
        Ok((problem, control))
    }

    pub fn residuals(&self, x: &Signal) -> ResidualReport {
        let t = tv(x).unwrap_or(0.0);
        ResidualReport {
            bandlimit: self.bandlimit.apply(x).distance(x),
            tv: t,
            tv_excess: (t - self.gamma).max(0.0),
            max_prescription: self
                .observations
                .iter()
                .map(|e| e.residual(x))
                .fold(0.0, f64::max),
        }
    }

    /// Runs one variant without keeping any per-iteration data.
    pub fn solve(&self, variant: Variant, iters: usize) -> Result<(Signal, Status)> {
        let (problem, control) = self.problem(variant, iters)?;
        let (x, trace) = Solver::new(&problem, &control)?.run()?;
        Ok((x, trace.status))
    }

    /// Runs one variant for `iters` iterations, recording the error curve
    /// against `reference` when given.
    pub fn run(
        &self,
        variant: Variant,
        iters: usize,
        reference: Option<&Signal>,
    ) -> Result<VariantRun> {
        let (problem, control) = self.problem(variant, iters)?;
        let solver = Solver::new(&problem, &control)?;
        let x0 = problem.x0().clone();
        let scale = reference.map(|r| r.distance(&x0)).filter(|d| *d > 0.0);
        let error = |x: &Signal| match (reference, scale) {
            (Some(r), Some(s)) => Some(x.distance(r) / s),
            _ => None,
        };
        let label = variant.label().to_string();
        let mut rows = Vec::with_capacity(iters + 1);
        let mut current = error(&x0);
        let (x, trace) = solver.run_with(|n, next, rec| {
            rows.push(TraceRow {
                n,
                variant: label.clone(),
                theta: Some(rec.theta),
                lambda: rec.lambda,
                step_norm: Some(rec.step_norm),
                normalized_error: current,
            });
            current = error(next);
        })?;
        rows.push(TraceRow {
            n: trace.iterations,
            variant: label,
            theta: None,
            lambda: None,
            step_norm: None,
            normalized_error: current,
        });
        Ok(VariantRun {
            variant,
            residuals: self.residuals(&x),
            status: trace.status,
            iterations: trace.iterations,
            degenerate_steps: trace.degenerate_steps,
            solution: x,
            rows,
        })
    }
}

#[derive(Debug, Clone)]
pub struct VariantRun {
    pub variant: Variant,
    pub solution: Signal,
    pub rows: Vec<TraceRow>,
    pub status: Status,
    pub iterations: usize,
    pub degenerate_steps: usize,
    pub residuals: ResidualReport,
}

impl VariantRun {
    /// Normalized error after `n` iterations, if recorded.
    pub fn error_at(&self, n: usize) -> Option<f64> {
        self.rows.get(n).and_then(|r| r.normalized_error)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub setup: ExperimentSetup,
    pub reference: VariantRun,
    pub runs: Vec<VariantRun>,
}

impl ExperimentOutcome {
    pub fn infeasible(&self) -> bool {
        std::iter::once(&self.reference)
            .chain(&self.runs)
            .any(|r| r.status == Status::Infeasible)
    }
}

#[derive(Serialize)]
struct RunSummary<'a> {
    variant: &'a str,
    status: Status,
    iterations: usize,
    degenerate_steps: usize,
    final_normalized_error: Option<f64>,
    residuals: ResidualReport,
}

fn summarize(r: &VariantRun) -> RunSummary<'_> {
    RunSummary {
        variant: r.variant.label(),
        status: r.status,
        iterations: r.iterations,
        degenerate_steps: r.degenerate_steps,
        final_normalized_error: r.rows.last().and_then(|t| t.normalized_error),
        residuals: r.residuals,
    }
}

/// Builds the setup, computes the reference `x∞` with the affine variant
/// run `reference_factor` times longer, runs the requested variants, and
/// writes the outputs when `output_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let setup = ExperimentSetup::build(cfg)?;
    let reference = setup.run(Variant::Affine, cfg.iters * cfg.reference_factor, None)?;
    let runs = cfg
        .variant
        .expand()
        .into_iter()
        .map(|v| setup.run(v, cfg.iters, Some(&reference.solution)))
        .collect::<Result<Vec<_>>>()?;
    let outcome = ExperimentOutcome {
        setup,
        reference,
        runs,
    };
    if let Some(dir) = &cfg.output_dir {
        write_outputs(cfg, &outcome, dir)?;
    }
    Ok(outcome)
}

/// `signal.csv`, `reference.csv`, `solution_<v>.csv`, `trace_<v>.csv` and
/// `summary.json`.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    outcome: &ExperimentOutcome,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_signal(&outcome.setup.xbar, &dir.join("signal.csv"))?;
    write_signal(&outcome.reference.solution, &dir.join("reference.csv"))?;
    for r in &outcome.runs {
        let v = r.variant.label();
        write_signal(&r.solution, &dir.join(format!("solution_{v}.csv")))?;
        emit_csv(&r.rows, &dir.join(format!("trace_{v}.csv")))?;
    }
    let summary = serde_json::json!({
        "config": cfg,
        "gamma": outcome.setup.gamma,
        "reference": summarize(&outcome.reference),
        "runs": outcome.runs.iter().map(summarize).collect::<Vec<_>>(),
    });
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(())
}
