//! Running checks of the trajectory invariants of a solver run.

use super::algorithm::IterationRecord;

/// Folds iteration records into the quantities the method guarantees:
/// `‖x_n − x0‖` never decreases, `λ_n` stays in its admissible interval and
/// `Σ‖x_{n+1} − x_n‖²` is bounded by `‖x∞ − x0‖²`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryMonitor {
    pub steps: usize,
    /// Largest decrease of `‖x_n − x0‖` between consecutive records.
    pub anchor_drop: f64,
    pub lambda_violations: usize,
    /// `Σ‖x_{n+1} − x_n‖²`
    pub step_energy: f64,
    last_anchor: Option<f64>,
}

impl TrajectoryMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, rec: &IterationRecord) {
        if let Some(prev) = self.last_anchor {
            self.anchor_drop = self.anchor_drop.max(prev - rec.anchor_distance);
        }
        self.last_anchor = Some(rec.anchor_distance);
        if let (Some(l), Some((lo, hi))) = (rec.lambda, rec.lambda_bounds) {
            if !(lo..=hi).contains(&l) {
                self.lambda_violations += 1;
            }
        }
        self.step_energy += rec.step_norm * rec.step_norm;
        self.steps += 1;
    }

    pub fn anchor_monotone(&self, tol: f64) -> bool {
        self.anchor_drop <= tol
    }

    /// `Σ‖x_{n+1} − x_n‖² ≤ limit_sq·(1 + rel)`, with `limit_sq = ‖x∞ − x0‖²`.
    pub fn energy_within(&self, limit_sq: f64, rel: f64) -> bool {
        self.step_energy <= limit_sq * (1.0 + rel)
    }

    /// All three invariants at the given tolerances.
    pub fn holds(&self, limit_sq: f64, anchor_tol: f64, rel: f64) -> bool {
        self.anchor_monotone(anchor_tol)
            && self.lambda_violations == 0
            && self.energy_within(limit_sq, rel)
    }
}
