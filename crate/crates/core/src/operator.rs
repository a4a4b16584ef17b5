//! Operator objects and bounded linear maps.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

/// Regularity class an operator is declared to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// `‖Fx−Fy‖² + ‖(Id−F)x−(Id−F)y‖² ≤ ‖x−y‖²` for all pairs.
    FirmlyNonexpansive,
    /// Firmly quasinonexpansive: `⟨y−Tx, x−Tx⟩ ≤ 0` for every fixed point `y`.
    ClassT,
    General,
}

type MapFn = dyn Fn(&Signal) -> Signal + Send + Sync;

/// A deterministic map from signals of dimension `dim` to signals of the same
/// dimension, tagged with a declared regularity class.
///
/// Cloning is cheap: the map itself is shared.
#[derive(Clone)]
pub struct Operator {
    dim: usize,
    regularity: Regularity,
    label: String,
    map: Arc<MapFn>,
}

impl Operator {
    pub fn new<F>(dim: usize, regularity: Regularity, label: impl Into<String>, map: F) -> Self
    where
        F: Fn(&Signal) -> Signal + Send + Sync + 'static,
    {
        Self {
            dim,
            regularity,
            label: label.into(),
            map: Arc::new(map),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, Regularity::FirmlyNonexpansive, "identity", |x| {
            x.clone()
        })
    }

    /// Applies the same scalar map to every coordinate.
    pub fn coordinatewise<F>(
        dim: usize,
        regularity: Regularity,
        label: impl Into<String>,
        scalar: F,
    ) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(dim, regularity, label, move |x| x.map(&scalar))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates the operator. The caller guarantees `x.dim() == self.dim()`.
    pub fn apply(&self, x: &Signal) -> Signal {
        debug_assert_eq!(x.dim(), self.dim, "operator `{}`", self.label);
        (self.map)(x)
    }

    pub fn try_apply(&self, x: &Signal) -> Result<Signal> {
        x.ensure_dim(self.dim)?;
        Ok(self.apply(x))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("regularity", &self.regularity)
            .finish()
    }
}

/// A bounded linear map `ℝⁿ → ℝᵐ` given by its forward action and adjoint,
/// together with an upper bound on its operator norm.
#[derive(Clone)]
pub struct LinearMap {
    in_dim: usize,
    out_dim: usize,
    norm_bound: f64,
    forward: Arc<MapFn>,
    adjoint: Arc<MapFn>,
}

const POWER_ITERATIONS: usize = 200;
const POWER_REL_TOL: f64 = 1e-12;
const NORM_INFLATION: f64 = 1e-9;

impl LinearMap {
    /// Builds a map from closures. `norm_bound` must be a true upper bound on
    /// the operator norm.
    pub fn from_fns<F, G>(
        in_dim: usize,
        out_dim: usize,
        norm_bound: f64,
        forward: F,
        adjoint: G,
    ) -> Result<Self>
    where
        F: Fn(&Signal) -> Signal + Send + Sync + 'static,
        G: Fn(&Signal) -> Signal + Send + Sync + 'static,
    {
        if !(norm_bound.is_finite() && norm_bound > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "linear map norm bound must be finite and positive, got {norm_bound}"
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            norm_bound,
            forward: Arc::new(forward),
            adjoint: Arc::new(adjoint),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// `x ↦ c·x`, with the exact norm `|c|`.
    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        assert!(c != 0.0 && c.is_finite());
        Self {
            in_dim: dim,
            out_dim: dim,
            norm_bound: c.abs(),
            forward: Arc::new(move |x: &Signal| x.scale(c)),
            adjoint: Arc::new(move |y: &Signal| y.scale(c)),
        }
    }

    /// Dense matrix given by its rows; each row is an analysis vector so that
    /// `(Lx)_j = ⟨x, row_j⟩`. The norm bound comes from power iteration.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let out_dim = rows.len();
        if out_dim == 0 {
            return Err(Error::InvalidProblem("matrix has no rows".into()));
        }
        let in_dim = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != in_dim) {
            return Err(Error::DimensionMismatch {
                expected: in_dim,
                found: bad.len(),
            });
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem(
                "matrix has non-finite entries".into(),
            ));
        }
        let rows = Arc::new(rows);
        let fwd_rows = Arc::clone(&rows);
        let forward = move |x: &Signal| -> Signal {
            fwd_rows
                .iter()
                .map(|r| r.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect::<Vec<f64>>()
                .into()
        };
        let adj_rows = Arc::clone(&rows);
        let adjoint = move |y: &Signal| -> Signal {
            let mut out = vec![0.0; in_dim];
            for (r, &c) in adj_rows.iter().zip(y.iter()) {
                for (o, a) in out.iter_mut().zip(r) {
                    *o += c * a;
                }
            }
            out.into()
        };
        let norm = power_iteration_norm(in_dim, &forward, &adjoint);
        if norm == 0.0 {
            return Err(Error::InvalidProblem("linear map is zero".into()));
        }
        Self::from_fns(
            in_dim,
            out_dim,
            norm * (1.0 + NORM_INFLATION),
            forward,
            adjoint,
        )
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn apply(&self, x: &Signal) -> Signal {
        debug_assert_eq!(x.dim(), self.in_dim);
        (self.forward)(x)
    }

    pub fn apply_adjoint(&self, y: &Signal) -> Signal {
        debug_assert_eq!(y.dim(), self.out_dim);
        (self.adjoint)(y)
    }
}

impl fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearMap")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("norm_bound", &self.norm_bound)
            .finish()
    }
}

/// Estimates `‖L‖` as `sqrt(λ_max(L*L))` by power iteration from a fixed
/// pseudo-random start.
fn power_iteration_norm(
    in_dim: usize,
    forward: &impl Fn(&Signal) -> Signal,
    adjoint: &impl Fn(&Signal) -> Signal,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Signal = (0..in_dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect::<Vec<f64>>()
        .into();
    let n = v.norm();
    v = v.scale(1.0 / n);
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = adjoint(&forward(&v));
        let next = dot_unchecked(&v, &w);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w.scale(1.0 / wn);
        let done = (next - estimate).abs() <= POWER_REL_TOL * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    // one more Rayleigh quotient on the final vector
    let w = adjoint(&forward(&v));
    estimate.max(dot_unchecked(&v, &w)).max(0.0).sqrt()
}
