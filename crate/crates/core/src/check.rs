//! Randomized property checkers for the operator classes used by the solver.
//!
//! All checkers draw from a [`Sampler`]; the bundled [`GaussianSampler`] is
//! seeded so every report can be reproduced from its `seed` field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{LinearMap, Operator};
use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

/// Source of random test points.
pub trait Sampler {
    fn dim(&self) -> usize;
    fn point(&mut self) -> Signal;
    fn pair(&mut self) -> (Signal, Signal) {
        (self.point(), self.point())
    }
    /// Seed that reproduces the stream, when there is one.
    fn seed(&self) -> Option<u64> {
        None
    }
}

/// Independent `scale·N(0, I)` draws from a seeded ChaCha stream.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    dim: usize,
    scale: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl GaussianSampler {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self::with_scale(dim, seed, 1.0)
    }

    pub fn with_scale(dim: usize, seed: u64, scale: f64) -> Self {
        Self {
            dim,
            scale,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl Sampler for GaussianSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn point(&mut self) -> Signal {
        gaussian_signal(&mut self.rng, self.dim).scale(self.scale)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

/// Standard-normal vector of length `dim`.
pub fn gaussian_signal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Signal {
    (0..dim)
        .map(|_| StandardNormal.sample(rng))
        .collect::<Vec<f64>>()
        .into()
}

/// Outcome of [`check_firmly_nonexpansive`].
#[derive(Debug, Clone)]
pub struct FneReport {
    pub pass: bool,
    pub trials: usize,
    /// Largest value of `‖Fx−Fy‖² + ‖(x−Fx)−(y−Fy)‖² − ‖x−y‖²` observed.
    pub worst_violation: f64,
    pub witness: Option<(Signal, Signal)>,
    pub seed: Option<u64>,
}

/// Tests the firm nonexpansiveness inequality on `trials` sampled pairs.
pub fn check_firmly_nonexpansive<S: Sampler + ?Sized>(
    op: &Operator,
    sampler: &mut S,
    trials: usize,
    tol: f64,
) -> FneReport {
    assert!(trials >= 1 && tol > 0.0);
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..trials {
        let (x, y) = sampler.pair();
        let v = fne_violation(op, &x, &y);
        if v > worst || v.is_nan() {
            worst = if v.is_nan() { f64::INFINITY } else { v };
            witness = Some((x, y));
        }
    }
    FneReport {
        pass: worst <= tol,
        trials,
        worst_violation: worst,
        witness,
        seed: sampler.seed(),
    }
}

/// `‖Fx−Fy‖² + ‖(Id−F)x−(Id−F)y‖² − ‖x−y‖²` for one pair.
pub fn fne_violation(op: &Operator, x: &Signal, y: &Signal) -> f64 {
    let fx = op.apply(x);
    let fy = op.apply(y);
    let df = fx.sub(&fy);
    let dx = x.sub(y);
    let dr = dx.sub(&df);
    df.norm_sq() + dr.norm_sq() - dx.norm_sq()
}

/// Outcome of [`check_class_t`].
#[derive(Debug, Clone)]
pub struct ClassTReport {
    pub pass: bool,
    pub trials: usize,
    /// Largest `⟨y−Tx, x−Tx⟩` over sampled `x` and supplied fixed points `y`.
    pub worst_violation: f64,
    pub witness: Option<(Signal, Signal)>,
    pub seed: Option<u64>,
}

/// Tests `⟨y−Tx, x−Tx⟩ ≤ tol` for sampled `x` and each supplied fixed point.
///
/// Fails with [`Error::NotFixedPoint`] when a supplied point moves by more
/// than `tol` under `T`.
pub fn check_class_t<S: Sampler + ?Sized>(
    op: &Operator,
    fixed_points: &[Signal],
    sampler: &mut S,
    trials: usize,
    tol: f64,
) -> Result<ClassTReport> {
    assert!(trials >= 1 && tol > 0.0);
    for y in fixed_points {
        y.ensure_dim(op.dim())?;
        let displacement = op.apply(y).distance(y);
        if displacement > tol {
            return Err(Error::NotFixedPoint { displacement });
        }
    }
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..trials {
        let x = sampler.point();
        let tx = op.apply(&x);
        let r = x.sub(&tx);
        for y in fixed_points {
            let v = dot_unchecked(&y.sub(&tx), &r);
            if v > worst {
                worst = v;
                witness = Some((x.clone(), y.clone()));
            }
        }
    }
    Ok(ClassTReport {
        pass: worst <= tol,
        trials,
        worst_violation: worst,
        witness,
        seed: sampler.seed(),
    })
}

/// Largest relative adjoint-identity defect `|⟨Lx,y⟩ − ⟨x,L*y⟩|` and the
/// largest ratio `‖Lx‖ / (norm_bound·‖x‖)` over random draws.
pub fn check_linear_map(map: &LinearMap, seed: u64, trials: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_adjoint: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..trials {
        let x = gaussian_signal(&mut rng, map.in_dim());
        let y = gaussian_signal(&mut rng, map.out_dim());
        let lx = map.apply(&x);
        let lhs = dot_unchecked(&lx, &y);
        let rhs = dot_unchecked(&x, &map.apply_adjoint(&y));
        let scale = lx.norm() * y.norm() + 1e-300;
        worst_adjoint = worst_adjoint.max((lhs - rhs).abs() / scale);
        worst_ratio = worst_ratio.max(lx.norm() / (map.norm_bound() * x.norm()));
    }
    (worst_adjoint, worst_ratio)
}

/// Checks that a scalar map is nondecreasing and 1-Lipschitz on a uniform
/// grid of `points` over `[lo, hi]` (equivalent to scalar firm
/// nonexpansiveness). Returns the largest violation of either property.
pub fn scalar_fne_defect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    assert!(points >= 2 && hi > lo);
    let h = (hi - lo) / (points - 1) as f64;
    let mut worst: f64 = 0.0;
    let mut prev_x = lo;
    let mut prev = f(lo);
    for k in 1..points {
        let x = lo + k as f64 * h;
        let v = f(x);
        let dv = v - prev;
        let dx = x - prev_x;
        worst = worst.max(-dv).max(dv - dx);
        prev = v;
        prev_x = x;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Regularity;

    #[test]
    fn identity_passes_with_zero_residual() {
        let op = Operator::identity(5);
        let mut s = GaussianSampler::new(5, 1);
        let r = check_firmly_nonexpansive(&op, &mut s, 1000, 1e-10);
        assert!(r.pass);
        assert!(r.worst_violation <= 0.0);
        assert_eq!(r.seed, Some(1));
    }

    #[test]
    fn soft_threshold_passes_fne() {
        let op = Operator::coordinatewise(8, Regularity::FirmlyNonexpansive, "soft", |v: f64| {
            v.signum() * (v.abs() - 1.0).max(0.0)
        });
        let mut s = GaussianSampler::with_scale(8, 2, 2.0);
        let r = check_firmly_nonexpansive(&op, &mut s, 10_000, 1e-10);
        assert!(r.pass, "worst {}", r.worst_violation);
    }

    #[test]
    fn hard_threshold_fails_fne_with_straddling_witness() {
        let op = Operator::coordinatewise(1, Regularity::General, "hard", |v: f64| {
            if v.abs() > 1.0 {
                v
            } else {
                0.0
            }
        });
        let mut s = GaussianSampler::with_scale(1, 3, 1.5);
        let r = check_firmly_nonexpansive(&op, &mut s, 10_000, 1e-10);
        assert!(!r.pass);
        let (x, y) = r.witness.unwrap();
        // the worst pair lies on opposite sides of a threshold
        assert!((x[0].abs() > 1.0) != (y[0].abs() > 1.0));
        // explicit near-threshold pair
        let eps = 1e-3;
        let v = fne_violation(
            &op,
            &Signal::from(vec![1.0 + eps]),
            &Signal::from(vec![1.0 - eps]),
        );
        assert!(v > 0.5);
    }

    #[test]
    fn doubling_map_is_not_class_t() {
        let op = Operator::new(3, Regularity::General, "2x", |x: &Signal| x.scale(2.0));
        let mut s = GaussianSampler::new(3, 4);
        let r = check_class_t(&op, &[Signal::zeros(3)], &mut s, 100, 1e-10).unwrap();
        assert!(!r.pass);
        assert!(r.worst_violation > 0.0);
    }

    #[test]
    fn class_t_rejects_non_fixed_point() {
        let op = Operator::new(2, Regularity::General, "shift", |x: &Signal| {
            x.add(&Signal::from(vec![1.0, 0.0]))
        });
        let mut s = GaussianSampler::new(2, 5);
        assert!(matches!(
            check_class_t(&op, &[Signal::zeros(2)], &mut s, 10, 1e-10),
            Err(Error::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn halfspace_projector_is_class_t() {
        // {x : x_0 <= 1}
        let op = Operator::new(
            3,
            Regularity::FirmlyNonexpansive,
            "halfspace",
            |x: &Signal| {
                let mut y = x.clone();
                y[0] = y[0].min(1.0);
                y
            },
        );
        let fixed = vec![
            Signal::from(vec![1.0, 2.0, -3.0]),
            Signal::from(vec![-5.0, 0.0, 0.0]),
        ];
        let mut s = GaussianSampler::with_scale(3, 6, 3.0);
        let r = check_class_t(&op, &fixed, &mut s, 1000, 1e-10).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn linear_map_checks() {
        let l = LinearMap::from_rows(vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 0.0]]).unwrap();
        let (adj, ratio) = check_linear_map(&l, 7, 200);
        assert!(adj < 1e-10);
        assert!(ratio <= 1.0);
    }

    #[test]
    fn scalar_defect_flags_steep_map() {
        assert!(scalar_fne_defect(|x| x.tanh(), -5.0, 5.0, 10_000) <= 1e-12);
        assert!(scalar_fne_defect(|x| 2.0 * x, -1.0, 1.0, 100) > 0.0);
        assert!(scalar_fne_defect(|x| -x, -1.0, 1.0, 100) > 0.0);
    }
}
