//! Convex sets with exact projectors, and the set-distance observation
//! operators built from them.

use std::fmt;
use std::sync::Arc;

use crate::catalog::EquivalentPrescription;
use crate::operator::{Operator, Regularity};
use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

type ProjFn = dyn Fn(&Signal) -> Signal + Send + Sync;

/// Nonempty closed convex subset of `ℝⁿ` given by its exact projector.
#[derive(Clone)]
pub struct ConvexSet {
    dim: usize,
    label: String,
    project: Arc<ProjFn>,
}

impl fmt::Debug for ConvexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConvexSet({}, dim {})", self.label, self.dim)
    }
}

impl ConvexSet {
    /// Wraps a user-supplied exact projector.
    pub fn from_projector<F>(dim: usize, label: impl Into<String>, project: F) -> Self
    where
        F: Fn(&Signal) -> Signal + Send + Sync + 'static,
    {
        Self {
            dim,
            label: label.into(),
            project: Arc::new(project),
        }
    }

    pub fn singleton(point: Signal) -> Self {
        Self::from_projector(point.dim(), "singleton", move |_| point.clone())
    }

    pub fn ball(center: Signal, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self::from_projector(center.dim(), "ball", move |x| {
            center.add(&ball_saturation(&x.sub(&center), radius))
        }))
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`; bounds may be infinite.
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidProblem("box has lo > hi".into()));
        }
        Ok(Self::from_projector(lo.len(), "box", move |x| {
            x.iter()
                .zip(lo.iter().zip(&hi))
                .map(|(v, (l, h))| v.max(*l).min(*h))
                .collect::<Vec<f64>>()
                .into()
        }))
    }

    /// Halfspace `{x : ⟨a, x⟩ ≤ b}`.
    pub fn halfspace(normal: Signal, offset: f64) -> Result<Self> {
        let nn = normal.norm_sq();
        if nn == 0.0 {
            return Err(Error::InvalidProblem("halfspace normal is zero".into()));
        }
        Ok(Self::from_projector(normal.dim(), "halfspace", move |x| {
            let excess = dot_unchecked(x, &normal) - offset;
            if excess > 0.0 {
                x.axpy(-excess / nn, &normal)
            } else {
                x.clone()
            }
        }))
    }

    /// Hyperplane `{x : ⟨a, x⟩ = b}` (an affine subspace).
    pub fn hyperplane(normal: Signal, offset: f64) -> Result<Self> {
        let nn = normal.norm_sq();
        if nn == 0.0 {
            return Err(Error::InvalidProblem("hyperplane normal is zero".into()));
        }
        Ok(Self::from_projector(normal.dim(), "hyperplane", move |x| {
            let excess = dot_unchecked(x, &normal) - offset;
            x.axpy(-excess / nn, &normal)
        }))
    }

    /// Monotone cone `{x : x_1 ≤ … ≤ x_n}`.
    pub fn isotonic_cone(dim: usize) -> Self {
        Self::from_projector(dim, "isotonic_cone", isotonic_projection)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn project(&self, x: &Signal) -> Signal {
        debug_assert_eq!(x.dim(), self.dim);
        (self.project)(x)
    }

    pub fn distance(&self, x: &Signal) -> f64 {
        self.project(x).distance(x)
    }

    pub fn contains(&self, x: &Signal, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// The projector as a firmly nonexpansive [`Operator`].
    pub fn projector(&self) -> Operator {
        let p = Arc::clone(&self.project);
        Operator::new(
            self.dim,
            Regularity::FirmlyNonexpansive,
            format!("proj_{}", self.label),
            move |x| p(x),
        )
    }
}

/// Euclidean projection onto the monotone cone by pool-adjacent-violators.
///
/// Scans left to right keeping a stack of pooled blocks (sum, count); a new
/// block is merged with its predecessor while the predecessor's mean is
/// strictly larger. Equal adjacent means are left unpooled.
pub fn isotonic_projection(v: &Signal) -> Signal {
    let mut sums: Vec<f64> = Vec::with_capacity(v.dim());
    let mut counts: Vec<usize> = Vec::with_capacity(v.dim());
    for &x in v {
        let mut sum = x;
        let mut count = 1usize;
        while let (Some(&ps), Some(&pc)) = (sums.last(), counts.last()) {
            if ps / pc as f64 > sum / count as f64 {
                sum += ps;
                count += pc;
                sums.pop();
                counts.pop();
            } else {
                break;
            }
        }
        sums.push(sum);
        counts.push(count);
    }
    let mut out = Vec::with_capacity(v.dim());
    for (s, c) in sums.into_iter().zip(counts) {
        let mean = s / c as f64;
        out.extend(std::iter::repeat_n(mean, c));
    }
    out.into()
}

/// Radial projection onto the centred ball of radius `rho`.
pub fn ball_saturation(y: &Signal, rho: f64) -> Signal {
    let n = y.norm();
    if n > rho {
        y.scale(rho / n)
    } else {
        y.clone()
    }
}

/// Proximity operator of `ω·d_C`: moves `x` a distance `ω` towards its
/// projection, or onto it when closer than `ω`.
pub fn distance_prox(x: &Signal, set: &ConvexSet, omega: f64) -> Signal {
    let p = set.project(x);
    let d = p.distance(x);
    if d > omega {
        p.add(&x.sub(&p).scale(1.0 - omega / d))
    } else {
        p
    }
}

pub fn distance_prox_operator(set: ConvexSet, omega: f64) -> Result<Operator> {
    check_omega(omega)?;
    Ok(Operator::new(
        set.dim(),
        Regularity::FirmlyNonexpansive,
        format!("distance_prox_{}", set.label()),
        move |x| distance_prox(x, &set, omega),
    ))
}

/// Vector hard thresholder relative to `C`: keeps `x` when `d_C(x) > ω` and
/// replaces it by its projection otherwise. Discontinuous.
pub fn vector_hard_threshold_observation(x: &Signal, set: &ConvexSet, omega: f64) -> Signal {
    let p = set.project(x);
    if p.distance(x) > omega {
        x.clone()
    } else {
        p
    }
}

/// Points closer than this (relative to `1 + ‖x‖`) to their projection count
/// as members of `C` in [`distance_threshold_transform`].
const MEMBERSHIP_RTOL: f64 = 1e-14;

/// The transform `S` mapping a hard-threshold observation to the equivalent
/// distance-prox value: moves points outside `C` a distance `ω` towards `C`
/// and fixes members.
pub fn distance_threshold_transform(x: &Signal, set: &ConvexSet, omega: f64) -> Signal {
    let p = set.project(x);
    let d = p.distance(x);
    if d > MEMBERSHIP_RTOL * (1.0 + x.norm()) {
        x.add(&p.sub(x).scale(omega / d))
    } else {
        x.clone()
    }
}

/// Turns a raw observation `q = Q(x̄)` of the vector hard thresholder into
/// the equivalent proximal prescription `(prox_{ω d_C}, S(q))`.
pub fn equivalent_prescription_from_hard(
    q: &Signal,
    set: &ConvexSet,
    omega: f64,
) -> Result<EquivalentPrescription> {
    check_omega(omega)?;
    q.ensure_dim(set.dim())?;
    let p = distance_threshold_transform(q, set, omega);
    let f = distance_prox_operator(set.clone(), omega)?;
    Ok(EquivalentPrescription {
        f,
        p,
        provenance: format!("hard_threshold(C={}, omega={omega})", set.label()),
    })
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!(
            "omega must be positive, got {omega}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::{check_firmly_nonexpansive, GaussianSampler, Sampler};

    fn s(v: &[f64]) -> Signal {
        Signal::from(v)
    }

    #[test]
    fn isotonic_examples() {
        assert_eq!(
            isotonic_projection(&s(&[1.0, 2.0, 3.0])),
            s(&[1.0, 2.0, 3.0])
        );
        assert_eq!(
            isotonic_projection(&s(&[3.0, 1.0, 2.0])),
            s(&[2.0, 2.0, 2.0])
        );
        assert_eq!(isotonic_projection(&s(&[2.0, 1.0])), s(&[1.5, 1.5]));
        assert_eq!(isotonic_projection(&s(&[5.0])), s(&[5.0]));
        assert_eq!(
            isotonic_projection(&s(&[1.0, 3.0, 2.0, 2.0, 0.0, 4.0])),
            s(&[1.0, 1.75, 1.75, 1.75, 1.75, 4.0])
        );
    }

    /// Exact oracle: enumerate every split into consecutive blocks, set each
    /// block to its mean, keep monotone candidates and pick the closest.
    fn isotonic_by_enumeration(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0u32..(1 << (n - 1)) {
            let mut out = Vec::with_capacity(n);
            let mut start = 0;
            for i in 0..n {
                let cut = i == n - 1 || mask & (1 << i) != 0;
                if cut {
                    let m = v[start..=i].iter().sum::<f64>() / (i + 1 - start) as f64;
                    out.extend(std::iter::repeat_n(m, i + 1 - start));
                    start = i + 1;
                }
            }
            if out.windows(2).all(|w| w[0] <= w[1]) {
                let d: f64 = out.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, out));
                }
            }
        }
        best.unwrap().1
    }

    #[test]
    fn isotonic_matches_enumeration() {
        let mut sampler = GaussianSampler::new(7, 21);
        for _ in 0..300 {
            let v = sampler.point();
            let pava = isotonic_projection(&v);
            let oracle = Signal::from(isotonic_by_enumeration(v.as_slice()));
            assert!(pava.distance(&oracle) < 1e-12);
        }
    }

    #[test]
    fn ball_saturation_examples() {
        assert_eq!(ball_saturation(&s(&[3.0, 4.0]), 5.0), s(&[3.0, 4.0]));
        let y = ball_saturation(&s(&[3.0, 4.0]), 1.0);
        assert!(y.distance(&s(&[0.6, 0.8])) < 1e-15);
        assert_eq!(ball_saturation(&Signal::zeros(3), 0.1), Signal::zeros(3));
    }

    #[test]
    fn distance_prox_examples() {
        let origin = ConvexSet::singleton(Signal::zeros(1));
        assert!((distance_prox(&s(&[3.0]), &origin, 1.0)[0] - 2.0).abs() < 1e-15);
        assert_eq!(distance_prox(&s(&[0.5]), &origin, 1.0)[0], 0.0);
        let b = ConvexSet::ball(Signal::zeros(2), 1.0).unwrap();
        let inside = s(&[0.3, -0.2]);
        assert_eq!(distance_prox(&inside, &b, 0.5), inside);
    }

    #[test]
    fn hard_threshold_observation_examples() {
        let origin = ConvexSet::singleton(Signal::zeros(1));
        assert_eq!(
            vector_hard_threshold_observation(&s(&[3.0]), &origin, 1.0)[0],
            3.0
        );
        assert_eq!(
            vector_hard_threshold_observation(&s(&[0.5]), &origin, 1.0)[0],
            0.0
        );
        let b = ConvexSet::ball(Signal::zeros(2), 1.0).unwrap();
        let inside = s(&[0.3, -0.2]);
        assert_eq!(vector_hard_threshold_observation(&inside, &b, 0.5), inside);
    }

    #[test]
    fn equivalent_prescription_scalar_example() {
        let origin = ConvexSet::singleton(Signal::zeros(1));
        let q = vector_hard_threshold_observation(&s(&[3.0]), &origin, 1.0);
        let e = equivalent_prescription_from_hard(&q, &origin, 1.0).unwrap();
        assert!((e.p[0] - 2.0).abs() < 1e-15);
        assert!((e.f.apply(&s(&[3.0]))[0] - 2.0).abs() < 1e-15);
        assert_eq!(e.f.apply(&s(&[0.5]))[0], 0.0);
        // S reduces to ξ − ω·sign(ξ) on the line
        for xi in [-4.0, -0.3, 0.2, 7.5] {
            let sx = distance_threshold_transform(&s(&[xi]), &origin, 1.0)[0];
            assert!((sx - (xi - xi.signum())).abs() < 1e-15);
        }
    }

    #[test]
    fn transform_fixes_members() {
        let b = ConvexSet::boxed(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let q = s(&[0.2, -1.0, 0.9]);
        let e = equivalent_prescription_from_hard(&q, &b, 0.4).unwrap();
        assert_eq!(e.p, q);
    }

    #[test]
    fn distance_prox_is_prox_variationally() {
        let sets = vec![
            ConvexSet::ball(s(&[1.0, 0.0, -1.0]), 0.7).unwrap(),
            ConvexSet::boxed(vec![0.0, -1.0, -2.0], vec![1.0, 1.0, f64::INFINITY]).unwrap(),
            ConvexSet::halfspace(s(&[1.0, 2.0, -1.0]), 0.5).unwrap(),
            ConvexSet::isotonic_cone(3),
            ConvexSet::singleton(s(&[0.5, 0.5, 0.5])),
        ];
        let mut sampler = GaussianSampler::with_scale(3, 31, 2.0);
        for set in &sets {
            for omega in [0.1, 1.0, 3.0] {
                for _ in 0..20 {
                    let x = sampler.point();
                    let fx = distance_prox(&x, set, omega);
                    let obj = |y: &Signal| omega * set.distance(y) + 0.5 * x.distance_sq(y);
                    let best = obj(&fx);
                    for _ in 0..100 {
                        let y = fx.add(&sampler.point().scale(0.3));
                        assert!(best <= obj(&y) + 1e-8, "{set:?} omega {omega}");
                    }
                }
            }
        }
    }

    #[test]
    fn set_projectors_and_distance_prox_are_fne() {
        let sets = vec![
            ConvexSet::ball(s(&[1.0, 0.0, -1.0, 2.0]), 0.7).unwrap(),
            ConvexSet::isotonic_cone(4),
            ConvexSet::halfspace(s(&[1.0, 2.0, -1.0, 0.0]), 0.5).unwrap(),
            ConvexSet::hyperplane(s(&[0.0, 1.0, 1.0, 1.0]), -0.5).unwrap(),
        ];
        for (k, set) in sets.iter().enumerate() {
            let mut sampler = GaussianSampler::with_scale(4, 40 + k as u64, 2.0);
            assert!(check_firmly_nonexpansive(&set.projector(), &mut sampler, 5000, 1e-10).pass);
            let op = distance_prox_operator(set.clone(), 0.8).unwrap();
            assert!(check_firmly_nonexpansive(&op, &mut sampler, 5000, 1e-10).pass);
        }
    }

    #[test]
    fn set_constructors_validate() {
        assert!(ConvexSet::ball(Signal::zeros(2), 0.0).is_err());
        assert!(ConvexSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(ConvexSet::halfspace(Signal::zeros(2), 1.0).is_err());
        assert!(distance_prox_operator(ConvexSet::isotonic_cone(2), -1.0).is_err());
    }
}
