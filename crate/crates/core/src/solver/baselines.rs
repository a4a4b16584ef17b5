//! Classical best-approximation iterations used as references.

use crate::haugazeau::q_operator;
use crate::operator::Operator;
use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

use super::algorithm::DEGENERATE_Y;

fn check(x0: &Signal, projectors: &[Operator]) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::InvalidProblem("no projectors".into()));
    }
    for p in projectors {
        if p.dim() != x0.dim() {
            return Err(Error::DimensionMismatch {
                expected: x0.dim(),
                found: p.dim(),
            });
        }
    }
    Ok(())
}

/// `t_n = P_{n mod m} x_n`, `x_{n+1} = Q(x0, x_n, t_n)`.
pub fn haugazeau_periodic(x0: &Signal, projectors: &[Operator], iters: usize) -> Result<Signal> {
    check(x0, projectors)?;
    let mut x = x0.clone();
    for n in 0..iters {
        let t = projectors[n % projectors.len()].apply(&x);
        x = q_operator(x0, &x, &t)?.0;
    }
    Ok(x)
}

/// Parallel projections with uniform weights and extrapolation
/// `λ_n = θ_n/‖y_n‖²`. Returns the final iterate and every `λ_n` used.
pub fn pierra_parallel(
    x0: &Signal,
    projectors: &[Operator],
    iters: usize,
) -> Result<(Signal, Vec<f64>)> {
    check(x0, projectors)?;
    let w = 1.0 / projectors.len() as f64;
    let mut x = x0.clone();
    let mut lambdas = Vec::with_capacity(iters);
    for _ in 0..iters {
        let mut theta = 0.0;
        let mut d = Signal::zeros(x.dim());
        for p in projectors {
            let a = p.apply(&x);
            theta += w * a.distance_sq(&x);
            d.axpy_mut(w, &a);
        }
        // below this level θ is rounding noise of the projections
        let t = if theta <= f64::EPSILON * f64::EPSILON * (1.0 + x.norm_sq()) {
            x.clone()
        } else {
            let y = d.sub(&x);
            let yy = dot_unchecked(&y, &y);
            if yy <= DEGENERATE_Y * theta {
                x.clone()
            } else {
                let lambda = theta / yy;
                lambdas.push(lambda);
                x.axpy(lambda, &y)
            }
        };
        x = q_operator(x0, &x, &t)?.0;
    }
    Ok((x, lambdas))
}

/// `x_{n+1} = p + P_U x_n − P_V P_U x_n`, started at `x_init`.
pub fn youla_iteration(
    p: &Signal,
    proj_u: &Operator,
    proj_v: &Operator,
    x_init: &Signal,
    iters: usize,
) -> Result<Signal> {
    for op in [proj_u, proj_v] {
        if op.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: op.dim(),
            });
        }
    }
    x_init.ensure_dim(p.dim())?;
    let mut x = x_init.clone();
    for _ in 0..iters {
        let u = proj_u.apply(&x);
        let mut next = p.add(&u);
        next.axpy_mut(-1.0, &proj_v.apply(&u));
        x = next;
    }
    Ok(x)
}
