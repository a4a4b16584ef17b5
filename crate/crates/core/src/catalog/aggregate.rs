//! Aggregation of cocoercive observations of linear measurements into one
//! firmly nonexpansive prescription.

use std::sync::Arc;

use crate::catalog::EquivalentPrescription;
use crate::operator::{LinearMap, Operator, Regularity};
use crate::signal::Signal;
use crate::{Error, Result};

/// One observation `q_i = Q_i(L_i x̄)` with `Q_i` being `β_i`-cocoercive on
/// the codomain of `L_i`.
#[derive(Debug, Clone)]
pub struct ObservationSpec {
    pub map: LinearMap,
    pub nonlinearity: Operator,
    pub beta: f64,
    pub observation: Signal,
}

impl ObservationSpec {
    pub fn new(
        map: LinearMap,
        nonlinearity: Operator,
        beta: f64,
        observation: Signal,
    ) -> Result<Self> {
        if nonlinearity.dim() != map.out_dim() {
            return Err(Error::DimensionMismatch {
                expected: map.out_dim(),
                found: nonlinearity.dim(),
            });
        }
        observation.ensure_dim(map.out_dim())?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "cocoercivity constant must be positive, got {beta}"
            )));
        }
        Ok(Self {
            map,
            nonlinearity,
            beta,
            observation,
        })
    }

    /// Builds the spec from the true signal, `q = Q(L x̄)`.
    pub fn observe(
        map: LinearMap,
        nonlinearity: Operator,
        beta: f64,
        truth: &Signal,
    ) -> Result<Self> {
        truth.ensure_dim(map.in_dim())?;
        let q = nonlinearity.try_apply(&map.apply(truth))?;
        Self::new(map, nonlinearity, beta, q)
    }

    /// `‖Q(L x) − q‖`
    pub fn residual(&self, x: &Signal) -> f64 {
        self.nonlinearity
            .apply(&self.map.apply(x))
            .distance(&self.observation)
    }
}

/// Aggregates the observations into `F = β Σ L_i*∘Q_i∘L_i` and
/// `p = β Σ L_i* q_i` with `β = 1 / Σ ‖L_i‖²/β_i`.
///
/// `F` is firmly nonexpansive and `F x = p` holds exactly when every
/// `Q_i(L_i x) = q_i`.
pub fn cocoercive_aggregate(specs: &[ObservationSpec]) -> Result<EquivalentPrescription> {
    let first = specs.first().ok_or(Error::EmptySpecs)?;
    let dim = first.map.in_dim();
    for s in specs {
        if s.map.in_dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.map.in_dim(),
            });
        }
        if !s.map.norm_bound().is_finite() {
            return Err(Error::InvalidProblem(
                "observation map has no finite norm bound".into(),
            ));
        }
    }
    let beta = 1.0
        / specs
            .iter()
            .map(|s| s.map.norm_bound().powi(2) / s.beta)
            .sum::<f64>();

    let mut p = Signal::zeros(dim);
    for s in specs {
        p.axpy_mut(1.0, &s.map.apply_adjoint(&s.observation));
    }
    let p = p.scale(beta);

    let parts: Arc<Vec<(LinearMap, Operator)>> = Arc::new(
        specs
            .iter()
            .map(|s| (s.map.clone(), s.nonlinearity.clone()))
            .collect(),
    );
    let f = Operator::new(
        dim,
        Regularity::FirmlyNonexpansive,
        format!("cocoercive_aggregate[{}]", specs.len()),
        move |x| {
            let mut acc = Signal::zeros(x.dim());
            for (l, q) in parts.iter() {
                acc.axpy_mut(1.0, &l.apply_adjoint(&q.apply(&l.apply(x))));
            }
            acc.scale(beta)
        },
    );
    let provenance = specs
        .iter()
        .map(|s| {
            format!(
                "{}∘L[{}x{}]",
                s.nonlinearity.label(),
                s.map.out_dim(),
                s.map.in_dim()
            )
        })
        .collect::<Vec<_>>()
        .join(" + ");
    Ok(EquivalentPrescription { f, p, provenance })
}
