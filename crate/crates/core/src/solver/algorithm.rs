use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{AffineSelector, Problem};
use super::schedule::{schedule_round_robin, RoundRobin, ScheduleSpec};
use crate::haugazeau::{q_operator, Branch, QDiagnostics};
use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

/// `‖y‖² ≤ DEGENERATE_Y·‖d − z‖²` is treated as `y = 0`.
pub const DEGENERATE_Y: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// `ω_i = 1/card I_n`
    #[default]
    Uniform,
    /// `ω_i ∝ θ_i`, uniform when every `θ_i` vanishes.
    ThetaProportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationRule {
    /// `λ = θ/‖y‖²`
    #[default]
    UpperBound,
    /// `θ/(2‖y‖²)` when `n ≡ 0 mod 3`, `θ/‖y‖²` otherwise.
    Alternating,
    /// Fixed fraction of the upper bound, clamped to the admissible interval.
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    pub epsilon: f64,
    pub schedule: ScheduleSpec,
    pub weights: WeightRule,
    pub relaxation: RelaxationRule,
    pub max_iter: usize,
    pub theta_tol: f64,
    pub step_tol: f64,
    /// Evaluate the activations of one iteration concurrently.
    pub parallel: bool,
    /// Store all constraint residuals in every record.
    pub record_residuals: bool,
    /// Keep every [`IterationRecord`] in the returned trace.
    pub keep_records: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            schedule: ScheduleSpec::default(),
            weights: WeightRule::Uniform,
            relaxation: RelaxationRule::UpperBound,
            max_iter: 100_000,
            theta_tol: 1e-12,
            step_tol: 1e-9,
            parallel: false,
            record_residuals: false,
            keep_records: true,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidControl(m));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(self.theta_tol >= 0.0 && self.step_tol >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        if let RelaxationRule::Fraction(f) = self.relaxation {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("relaxation fraction must lie in (0, 1], got {f}"));
            }
        }
        Ok(())
    }

    pub fn schedule_for(&self, problem: &Problem) -> Result<RoundRobin> {
        let num = problem.constraints().len();
        schedule_round_robin(
            num,
            problem.affine(),
            &self.schedule.always_active,
            self.schedule.block_size.unwrap_or(num),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    pub affine: AffineSelector,
    pub active: Vec<usize>,
    /// `j_n`
    pub argmax: usize,
    pub theta: f64,
    pub lambda: Option<f64>,
    /// Admissible interval for `λ_n`, when `θ_n > theta_tol`.
    pub lambda_bounds: Option<(f64, f64)>,
    /// `y_n` was numerically zero and `t_n = z_n` was used.
    pub degenerate: bool,
    /// `‖x_{n+1} − x_n‖`
    pub step_norm: f64,
    /// `‖x_n − x_0‖`
    pub anchor_distance: f64,
    pub branch: Option<Branch>,
    pub residuals: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTrace {
    /// Empty unless `keep_records` is set.
    pub records: Vec<IterationRecord>,
    pub iterations: usize,
    pub degenerate_steps: usize,
    pub status: Status,
    /// Set when the run stopped on empty Haugazeau halfspaces.
    pub infeasibility: Option<QDiagnostics>,
    pub coverage: Vec<usize>,
    /// Residuals of the returned point, one per constraint.
    pub residuals: Vec<f64>,
}

/// Internal quantities of one iteration, kept for testing.
#[derive(Debug, Clone)]
pub struct StepDetail {
    pub z: Signal,
    pub t: Signal,
    pub d: Option<Signal>,
    pub y: Option<Signal>,
    pub activations: Vec<Signal>,
    pub weights: Vec<f64>,
}

/// Runs the block-iterative extrapolated method on a fixed problem.
pub struct Solver<'a> {
    problem: &'a Problem,
    config: &'a ControlConfig,
    schedule: RoundRobin,
}

impl<'a> Solver<'a> {
    pub fn new(problem: &'a Problem, config: &'a ControlConfig) -> Result<Self> {
        config.validate()?;
        let schedule = config.schedule_for(problem)?;
        if config.weights == WeightRule::Uniform {
            let widest = schedule.max_block();
            if config.epsilon > 1.0 / widest as f64 {
                return Err(Error::InvalidControl(format!(
                    "epsilon {} exceeds the uniform weight 1/{widest}",
                    config.epsilon
                )));
            }
        }
        Ok(Self {
            problem,
            config,
            schedule,
        })
    }

    pub fn schedule(&self) -> &RoundRobin {
        &self.schedule
    }

    fn weights(&self, thetas: &[f64], argmax: usize) -> Result<Vec<f64>> {
        let m = thetas.len();
        let w = match self.config.weights {
            WeightRule::Uniform => vec![1.0 / m as f64; m],
            WeightRule::ThetaProportional => {
                let total: f64 = thetas.iter().sum();
                if total > 0.0 {
                    thetas.iter().map(|t| t / total).collect()
                } else {
                    vec![1.0 / m as f64; m]
                }
            }
        };
        let sum: f64 = w.iter().sum();
        if w.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidControl(format!(
                "weights {w:?} are not a convex combination"
            )));
        }
        if w[argmax] < self.config.epsilon {
            return Err(Error::InvalidControl(format!(
                "weight {} of the maximizing index is below epsilon {}",
                w[argmax], self.config.epsilon
            )));
        }
        Ok(w)
    }

    fn lambda(&self, n: usize, upper: f64, lower: f64) -> f64 {
        let raw = match self.config.relaxation {
            RelaxationRule::UpperBound => upper,
            RelaxationRule::Alternating if n % 3 == 0 => upper / 2.0,
            RelaxationRule::Alternating => upper,
            RelaxationRule::Fraction(f) => f * upper,
        };
        raw.clamp(lower.min(upper), upper)
    }

    /// Computes `x_{n+1}` from `x_n`.
    pub fn step(&self, x: &Signal, n: usize) -> Result<(Signal, IterationRecord)> {
        self.step_detailed(x, n).map(|(x, r, _)| (x, r))
    }

    pub fn step_detailed(
        &self,
        x: &Signal,
        n: usize,
    ) -> Result<(Signal, IterationRecord, StepDetail)> {
        let problem = self.problem;
        let x0 = problem.x0();
        let (sel, active) = self.schedule.select(n);
        let z = problem.project_affine(sel, x);

        let constraints = problem.constraints();
        let activate = |&i: &usize| constraints[i].activate(n, &z);
        let activations: Vec<Signal> = if self.config.parallel && active.len() > 1 {
            active.par_iter().map(activate).collect()
        } else {
            active.iter().map(activate).collect()
        };
        let thetas: Vec<f64> = activations.iter().map(|a| a.distance_sq(&z)).collect();
        let mut argmax = 0;
        for (k, &th) in thetas.iter().enumerate() {
            if th > thetas[argmax] {
                argmax = k;
            }
        }
        let weights = self.weights(&thetas, argmax)?;
        let theta: f64 = weights
            .iter()
            .zip(&thetas)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, th)| w * th)
            .sum();

        let mut lambda = None;
        let mut bounds = None;
        let mut degenerate = false;
        let mut d_out = None;
        let mut y_out = None;
        let t = if theta <= self.config.theta_tol {
            z.clone()
        } else {
            let mut d = Signal::zeros(z.dim());
            for (w, a) in weights.iter().zip(&activations) {
                if *w > 0.0 {
                    d.axpy_mut(*w, a);
                }
            }
            let y = problem.project_affine(sel, &d).sub(&z);
            let yy = dot_unchecked(&y, &y);
            let dz = d.distance_sq(&z);
            let t = if yy <= DEGENERATE_Y * dz {
                degenerate = true;
                z.clone()
            } else {
                let upper = theta / yy;
                let lower = self.config.epsilon * theta / dz;
                let l = self.lambda(n, upper, lower);
                lambda = Some(l);
                bounds = Some((lower, upper));
                z.axpy(l, &y)
            };
            d_out = Some(d);
            y_out = Some(y);
            t
        };

        let (next, diag) = q_operator(x0, x, &t)?;
        let record = IterationRecord {
            n,
            affine: sel,
            argmax: active[argmax],
            active,
            theta,
            lambda,
            lambda_bounds: bounds,
            degenerate,
            step_norm: next.distance(x),
            anchor_distance: x.distance(x0),
            branch: Some(diag.branch),
            residuals: self
                .config
                .record_residuals
                .then(|| problem.residuals(&next)),
        };
        let detail = StepDetail {
            z,
            t,
            d: d_out,
            y: y_out,
            activations,
            weights,
        };
        Ok((next, record, detail))
    }

    /// Iterates from `x0`, calling `observe(n, x_{n+1}, record)` after
    /// every step.
    pub fn run_with<F>(&self, mut observe: F) -> Result<(Signal, SolveTrace)>
    where
        F: FnMut(usize, &Signal, &IterationRecord),
    {
        let mut x = self.problem.x0().clone();
        let mut records = Vec::new();
        let window = self.schedule.max_coverage();
        let mut quiet = 0usize;
        let mut status = Status::MaxIter;
        let mut infeasibility = None;
        let mut iterations = 0;
        let mut degenerate_steps = 0;
        for n in 0..self.config.max_iter {
            match self.step(&x, n) {
                Ok((next, rec)) => {
                    if rec.theta <= self.config.theta_tol && rec.step_norm <= self.config.step_tol {
                        quiet += 1;
                    } else {
                        quiet = 0;
                    }
                    observe(n, &next, &rec);
                    iterations += 1;
                    degenerate_steps += rec.degenerate as usize;
                    if self.config.keep_records {
                        records.push(rec);
                    }
                    x = next;
                    if quiet >= window {
                        status = Status::Converged;
                        break;
                    }
                }
                Err(Error::InfeasibleHalfspaces(diag)) => {
                    status = Status::Infeasible;
                    infeasibility = Some(diag);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let residuals = self.problem.residuals(&x);
        Ok((
            x,
            SolveTrace {
                records,
                iterations,
                degenerate_steps,
                status,
                infeasibility,
                coverage: self.schedule.coverage().to_vec(),
                residuals,
            },
        ))
    }

    pub fn run(&self) -> Result<(Signal, SolveTrace)> {
        self.run_with(|_, _, _| {})
    }
}

/// One iteration of the method from `x`, building the schedule on the fly.
pub fn step(
    x: &Signal,
    problem: &Problem,
    config: &ControlConfig,
    n: usize,
) -> Result<(Signal, IterationRecord)> {
    Solver::new(problem, config)?.step(x, n)
}

/// Iterates until stationarity or `max_iter`. An empty Haugazeau pair ends
/// the run with [`Status::Infeasible`] rather than an error.
pub fn solve(problem: &Problem, config: &ControlConfig) -> Result<(Signal, SolveTrace)> {
    Solver::new(problem, config)?.run()
}
