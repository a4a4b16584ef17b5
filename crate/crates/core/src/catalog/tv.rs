//! Total variation and subgradient projection onto its lower level sets.

use crate::catalog::scalar::sign;
use crate::operator::{Operator, Regularity};
use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

/// `Σ |x_{i+1} − x_i|`
pub fn tv(x: &Signal) -> Result<f64> {
    if x.dim() < 2 {
        return Err(Error::TooShort {
            min: 2,
            found: x.dim(),
        });
    }
    Ok(tv_unchecked(x))
}

fn tv_unchecked(x: &Signal) -> f64 {
    x.as_slice().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Subgradient `Dᵀ sign(D x)` of [`tv`], with `D` the forward difference and
/// `sign(0) = 0`.
pub fn tv_subgradient(x: &Signal) -> Signal {
    let v = x.as_slice();
    let n = v.len();
    let mut g = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let s = sign(v[i + 1] - v[i]);
        g[i] -= s;
        g[i + 1] += s;
    }
    g.into()
}

/// Subgradient projector onto `{f ≤ 0}`:
/// `x − f(x)/‖s(x)‖² · s(x)` when `f(x) > 0`, otherwise `x`.
pub fn subgradient_projector(
    f: impl Fn(&Signal) -> f64,
    subgradient: impl Fn(&Signal) -> Signal,
    x: &Signal,
) -> Result<Signal> {
    let value = f(x);
    if value <= 0.0 {
        return Ok(x.clone());
    }
    let s = subgradient(x);
    let ss = dot_unchecked(&s, &s);
    if ss == 0.0 {
        return Err(Error::ZeroSubgradient { value });
    }
    Ok(x.axpy(-value / ss, &s))
}

/// Class-𝔗 activation of `{x : tv(x) ≤ γ}` by its subgradient projector.
pub fn tv_level_projector(dim: usize, gamma: f64) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::TooShort { min: 2, found: dim });
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidProblem(format!(
            "tv bound must be nonnegative, got {gamma}"
        )));
    }
    Ok(Operator::new(
        dim,
        Regularity::ClassT,
        format!("sproj_tv(gamma={gamma})"),
        move |x| {
            // tv(x) > γ ≥ 0 forces D x ≠ 0, and then Dᵀ sign(D x) ≠ 0
            subgradient_projector(|y| tv_unchecked(y) - gamma, tv_subgradient, x)
                .expect("tv subgradient vanishes only on constants")
        },
    ))
}
