//! JSON description of a general problem for the `solve` command.
//!
//! ```json
//! {
//!   "dim": 3,
//!   "x0": [0, 0, 0],
//!   "constraints": [
//!     {"type": "hyperplane", "normal": [1, 1, 1], "offset": 1},
//!     {"type": "halfspace", "normal": [-1, 0, 0], "offset": 0},
//!     {"type": "prescription",
//!      "operator": {"name": "soft_threshold", "lo": -0.5, "hi": 0.5},
//!      "truth": [0.9, 0.1, 0.0]}
//!   ],
//!   "affine": [{"constraint": 0}],
//!   "control": {"max_iter": 5000, "relaxation": "alternating"}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::catalog::{
    bandlimit_projector, cocoercive_aggregate, distance_prox_operator,
    group_soft_threshold_operator, hard_clip, soft_clip, soft_threshold, tv_level_projector,
    BlockPartition, ConvexSet, Interval, ObservationSpec, SoftClip,
};
use crate::operator::{LinearMap, Operator, Regularity};
use crate::signal::Signal;
use crate::solver::{AffineSelector, Constraint, ControlConfig, Problem};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub dim: usize,
    /// Anchor; zero when omitted.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub constraints: Vec<ConstraintSpec>,
    /// Extrapolation family; the ambient space when omitted.
    #[serde(default = "ambient")]
    pub affine: Vec<AffineSelector>,
    #[serde(default)]
    pub control: ControlConfig,
}

fn ambient() -> Vec<AffineSelector> {
    vec![AffineSelector::Ambient]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(rename = "box")]
    Boxed {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    IsotonicCone {
        dim: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// Affine: band-limited signals.
    Bandlimit {
        retained: usize,
    },
    /// Affine: `⟨a, x⟩ = b`.
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `⟨a, x⟩ ≤ b`
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(rename = "box")]
    Boxed {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    IsotonicCone {},
    /// `tv(x) ≤ γ`, activated by its subgradient projector.
    TvLevel {
        gamma: f64,
    },
    /// `F x = p`; give `p` directly or a `truth` with `p = F(truth)`.
    Prescription {
        operator: OperatorSpec,
        #[serde(default)]
        p: Option<Vec<f64>>,
        #[serde(default)]
        truth: Option<Vec<f64>>,
    },
}

/// Firmly nonexpansive catalog operators, by name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity {},
    SoftThreshold {
        lo: f64,
        hi: f64,
    },
    HardClip {
        lo: f64,
        hi: f64,
    },
    SoftClip {
        kind: SoftClip,
    },
    GroupSoftThreshold {
        sizes: Vec<usize>,
        rho: Vec<f64>,
    },
    Projector {
        set: SetSpec,
    },
    DistanceProx {
        set: SetSpec,
        omega: f64,
    },
    /// `‖L‖⁻² L* ∘ proj_iso ∘ L` with `L` given by its rows.
    IsotonicObservation {
        rows: Vec<Vec<f64>>,
    },
}

fn signal(v: &[f64], dim: usize) -> Result<Signal> {
    let s = Signal::new(v.to_vec())?;
    s.ensure_dim(dim)?;
    Ok(s)
}

impl SetSpec {
    pub fn build(&self, dim: usize) -> Result<ConvexSet> {
        let set = match self {
            Self::Ball { center, radius } => ConvexSet::ball(signal(center, dim)?, *radius)?,
            Self::Boxed { lo, hi } => ConvexSet::boxed(lo.clone(), hi.clone())?,
            Self::Halfspace { normal, offset } => {
                ConvexSet::halfspace(signal(normal, dim)?, *offset)?
            }
            Self::Hyperplane { normal, offset } => {
                ConvexSet::hyperplane(signal(normal, dim)?, *offset)?
            }
            Self::IsotonicCone { dim: d } => ConvexSet::isotonic_cone(*d),
        };
        if set.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: set.dim(),
            });
        }
        Ok(set)
    }
}

fn scalar_op(
    dim: usize,
    label: String,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Operator {
    Operator::coordinatewise(dim, Regularity::FirmlyNonexpansive, label, f)
}

impl OperatorSpec {
    pub fn build(&self, dim: usize) -> Result<Operator> {
        Ok(match self {
            Self::Identity {} => Operator::identity(dim),
            Self::SoftThreshold { lo, hi } => {
                let w = Interval::new(*lo, *hi)?;
                scalar_op(dim, format!("soft_threshold[{lo}, {hi}]"), move |t| {
                    soft_threshold(t, &w)
                })
            }
            Self::HardClip { lo, hi } => {
                let w = Interval::new(*lo, *hi)?;
                scalar_op(dim, format!("hard_clip[{lo}, {hi}]"), move |t| {
                    hard_clip(t, &w)
                })
            }
            Self::SoftClip { kind } => {
                let k = *kind;
                scalar_op(dim, format!("soft_clip_{k}"), move |t| soft_clip(t, k))
            }
            Self::GroupSoftThreshold { sizes, rho } => {
                let part = BlockPartition::from_sizes(sizes)?;
                if part.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: part.dim(),
                    });
                }
                group_soft_threshold_operator(part, rho.clone())?
            }
            Self::Projector { set } => set.build(dim)?.projector(),
            Self::DistanceProx { set, omega } => distance_prox_operator(set.build(dim)?, *omega)?,
            Self::IsotonicObservation { rows } => {
                let l = LinearMap::from_rows(rows.clone())?;
                if l.in_dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: l.in_dim(),
                    });
                }
                let iso = ConvexSet::isotonic_cone(l.out_dim()).projector();
                let q = Signal::zeros(l.out_dim());
                cocoercive_aggregate(&[ObservationSpec::new(l, iso, 1.0, q)?])?.f
            }
        })
    }
}

impl ConstraintSpec {
    pub fn build(&self, dim: usize) -> Result<Constraint> {
        let convex = |s: ConvexSet| Constraint::convex_set(s.projector());
        match self {
            Self::Bandlimit { retained } => {
                Constraint::affine(bandlimit_projector(dim, *retained)?)
            }
            Self::Hyperplane { normal, offset } => Constraint::affine(
                ConvexSet::hyperplane(signal(normal, dim)?, *offset)?.projector(),
            ),
            Self::Halfspace { normal, offset } => {
                convex(ConvexSet::halfspace(signal(normal, dim)?, *offset)?)
            }
            Self::Ball { center, radius } => {
                convex(ConvexSet::ball(signal(center, dim)?, *radius)?)
            }
            Self::Boxed { lo, hi } => {
                let b = ConvexSet::boxed(lo.clone(), hi.clone())?;
                if b.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: b.dim(),
                    });
                }
                convex(b)
            }
            Self::IsotonicCone {} => convex(ConvexSet::isotonic_cone(dim)),
            Self::TvLevel { gamma } => Constraint::convex_set(tv_level_projector(dim, *gamma)?),
            Self::Prescription { operator, p, truth } => {
                let f = operator.build(dim)?;
                let p = match (p, truth) {
                    (Some(p), None) => signal(p, dim)?,
                    (None, Some(t)) => f.apply(&signal(t, dim)?),
                    _ => {
                        return Err(Error::Config(
                            "prescription needs exactly one of `p` and `truth`".into(),
                        ))
                    }
                };
                Constraint::prescription(f, p)
            }
        }
    }
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<(Problem, ControlConfig)> {
        let x0 = match &self.x0 {
            Some(v) => signal(v, self.dim)?,
            None => Signal::zeros(self.dim),
        };
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                c.build(self.dim)
                    .map_err(|e| Error::Config(format!("constraint {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let problem = Problem::new(x0, constraints, self.affine.clone())?;
        self.control.validate()?;
        Ok((problem, self.control.clone()))
    }
}
