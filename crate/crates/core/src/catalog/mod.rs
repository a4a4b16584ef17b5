//! Catalog of observation operators and prescription transforms.
//!
//! Every constructor that returns an [`Operator`] tags it with the
//! regularity class it provably belongs to; the property checkers in
//! [`crate::check`] are used by the test-suite to confirm the tags.

pub mod aggregate;
pub mod block;
pub mod fourier;
pub mod scalar;
pub mod sets;
pub mod tv;

pub use aggregate::{cocoercive_aggregate, ObservationSpec};
pub use block::{
    basis_operator, block_norm_shrink, coordinatewise_basis_operator, group_soft_threshold,
    group_soft_threshold_operator, Basis, BlockPartition, CoefficientMap,
};
pub use fourier::bandlimit_projector;
pub use scalar::{
    hard_clip, hard_threshold, hard_threshold_prescription, hard_threshold_transform,
    logistic_encoder, soft_clip, soft_threshold, sqrt_sampler, sqrt_sampler_prescription,
    sqrt_sampler_transform, Interval, ScalarMap, SoftClip,
};
pub use sets::{
    ball_saturation, distance_prox, distance_prox_operator, distance_threshold_transform,
    equivalent_prescription_from_hard, isotonic_projection, vector_hard_threshold_observation,
    ConvexSet,
};
pub use tv::{subgradient_projector, tv, tv_level_projector, tv_subgradient};

use crate::operator::Operator;
use crate::signal::Signal;

/// A prescription `F x = p` with `F` firmly nonexpansive, together with a
/// description of the raw observation it was derived from.
#[derive(Debug, Clone)]
pub struct EquivalentPrescription {
    pub f: Operator,
    pub p: Signal,
    pub provenance: String,
}

impl EquivalentPrescription {
    /// `‖F x − p‖`
    pub fn residual(&self, x: &Signal) -> f64 {
        self.f.apply(x).distance(&self.p)
    }
}
