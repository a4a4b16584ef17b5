//! Projection of an anchor onto the intersection of two halfspaces.
//!
//! For `x0, s, t` let
//! `D = {x : ⟨x − s, x0 − s⟩ ≤ 0} ∩ {x : ⟨x − t, s − t⟩ ≤ 0}`.
//! [`q_operator`] returns `proj_D x0` in closed form;
//! [`halfspace_pair_projection_oracle`] computes the same point by
//! enumerating KKT candidates and is kept as an independent check.

use serde::Serialize;

use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

/// Relative threshold under which `ρ = μν − χ²` is treated as zero.
pub const RHO_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `ρ = 0, χ ≥ 0`: the answer is `t`.
    B1,
    /// `ρ > 0, χν ≥ ρ`: projection onto the second hyperplane.
    B2,
    /// `ρ > 0, χν < ρ`: both constraints active.
    B3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QDiagnostics {
    pub chi: f64,
    pub mu: f64,
    pub nu: f64,
    /// Value after clamping.
    pub rho: f64,
    pub branch: Branch,
}

fn check_dims(x0: &Signal, s: &Signal, t: &Signal) -> Result<()> {
    s.ensure_dim(x0.dim())?;
    t.ensure_dim(x0.dim())
}

/// `Q(x0, s, t) = proj_D x0`, with the branch that produced it.
///
/// Fails with [`Error::InfeasibleHalfspaces`] when `ρ = 0` and `χ < 0`, in
/// which case `D` is empty.
pub fn q_operator(x0: &Signal, s: &Signal, t: &Signal) -> Result<(Signal, QDiagnostics)> {
    check_dims(x0, s, t)?;
    let a = x0.sub(s);
    let b = s.sub(t);
    let chi = dot_unchecked(&a, &b);
    let mu = dot_unchecked(&a, &a);
    let nu = dot_unchecked(&b, &b);
    let mut rho = mu * nu - chi * chi;
    if rho <= RHO_CLAMP * mu * nu {
        rho = 0.0;
    }
    let diag = |branch| QDiagnostics {
        chi,
        mu,
        nu,
        rho,
        branch,
    };

    if rho == 0.0 {
        if chi < 0.0 {
            return Err(Error::InfeasibleHalfspaces(diag(Branch::B1)));
        }
        return Ok((t.clone(), diag(Branch::B1)));
    }
    if chi * nu >= rho {
        // x0 + (1 + χ/ν)(t − s)
        return Ok((x0.axpy(-(1.0 + chi / nu), &b), diag(Branch::B2)));
    }
    // s + (ν/ρ)(χ(x0 − s) + μ(t − s))
    let c = nu / rho;
    let mut x = s.clone();
    x.axpy_mut(c * chi, &a);
    x.axpy_mut(-c * mu, &b);
    Ok((x, diag(Branch::B3)))
}

/// Violations `(⟨x − s, x0 − s⟩, ⟨x − t, s − t⟩)`; both are `≤ 0` on `D`.
pub fn halfspace_violations(x: &Signal, x0: &Signal, s: &Signal, t: &Signal) -> (f64, f64) {
    (
        dot_unchecked(&x.sub(s), &x0.sub(s)),
        dot_unchecked(&x.sub(t), &s.sub(t)),
    )
}

/// `proj_D x0` by enumeration of KKT candidates: `x0`, its projection on
/// each boundary hyperplane, and its projection on their intersection. The
/// closest feasible candidate wins.
pub fn halfspace_pair_projection_oracle(x0: &Signal, s: &Signal, t: &Signal) -> Result<Signal> {
    check_dims(x0, s, t)?;
    // ⟨a_i, x⟩ ≤ b_i
    let a = [x0.sub(s), s.sub(t)];
    let b = [dot_unchecked(&a[0], s), dot_unchecked(&a[1], t)];
    let r = [
        dot_unchecked(&a[0], x0) - b[0],
        dot_unchecked(&a[1], x0) - b[1],
    ];
    let g = [
        [dot_unchecked(&a[0], &a[0]), dot_unchecked(&a[0], &a[1])],
        [dot_unchecked(&a[1], &a[0]), dot_unchecked(&a[1], &a[1])],
    ];

    let mut candidates = vec![x0.clone()];
    for i in 0..2 {
        if g[i][i] > 0.0 {
            candidates.push(x0.axpy(-r[i] / g[i][i], &a[i]));
        }
    }
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det.abs() > 1e-14 * g[0][0] * g[1][1] && det != 0.0 {
        let c0 = (r[0] * g[1][1] - r[1] * g[0][1]) / det;
        let c1 = (g[0][0] * r[1] - g[1][0] * r[0]) / det;
        let mut x = x0.axpy(-c0, &a[0]);
        x.axpy_mut(-c1, &a[1]);
        candidates.push(x);
    }

    let feasible = |x: &Signal| {
        (0..2).all(|i| {
            let slack = dot_unchecked(&a[i], x) - b[i];
            let scale = g[i][i].sqrt() * (1.0 + x.norm() + s.norm() + t.norm());
            slack <= 1e-9 * scale.max(1e-300)
        })
    };
    candidates
        .into_iter()
        .filter(|x| feasible(x))
        .min_by(|p, q| p.distance_sq(x0).total_cmp(&q.distance_sq(x0)))
        .ok_or(Error::EmptyHalfspacePair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::gaussian_signal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Signal {
        Signal::from(x.to_vec())
    }

    #[test]
    fn spec_examples() {
        let x0 = v(&[0.0, 0.0]);
        let (q, d) = q_operator(&x0, &v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert_eq!(d.branch, Branch::B3);
        assert!(q.distance(&v(&[1.0, 1.0])) < 1e-14);

        let (q, d) = q_operator(&x0, &v(&[1.0, 0.0]), &v(&[2.0, -1.0])).unwrap();
        assert_eq!(d.branch, Branch::B2);
        assert_eq!((d.chi, d.nu, d.rho), (1.0, 2.0, 1.0));
        assert!(q.distance(&v(&[1.5, -1.5])) < 1e-14);

        let t = v(&[3.0, -2.0]);
        let (q, d) = q_operator(&x0, &x0, &t).unwrap();
        assert_eq!(d.branch, Branch::B1);
        assert_eq!(q, t);
    }

    #[test]
    fn oracle_examples() {
        let x0 = v(&[0.0, 0.0]);
        let q = halfspace_pair_projection_oracle(&x0, &v(&[1.0, 0.0]), &v(&[1.0, 1.0])).unwrap();
        assert!(q.distance(&v(&[1.0, 1.0])) < 1e-14);
        // x0 lies in both halfspaces when s = x0 and t is on the far side
        let x0 = v(&[0.5, 0.5]);
        let q = halfspace_pair_projection_oracle(&x0, &x0, &v(&[0.5, 0.5])).unwrap();
        assert_eq!(q, x0);
    }

    #[test]
    fn s_equal_t_returns_t() {
        let x0 = v(&[1.0, 2.0, 3.0]);
        let s = v(&[0.0, 1.0, 0.0]);
        let (q, d) = q_operator(&x0, &s, &s).unwrap();
        assert_eq!(d.branch, Branch::B1);
        assert_eq!(q, s);
    }

    #[test]
    fn empty_pair_is_reported() {
        // H1 = {x ≥ 1}, H2 = {x ≤ 0.5}
        let r = q_operator(&v(&[0.0]), &v(&[1.0]), &v(&[0.5]));
        assert!(matches!(r, Err(Error::InfeasibleHalfspaces(_))));
        let r = halfspace_pair_projection_oracle(&v(&[0.0]), &v(&[1.0]), &v(&[0.5]));
        assert!(matches!(r, Err(Error::EmptyHalfspacePair)));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(q_operator(&v(&[0.0]), &v(&[1.0, 2.0]), &v(&[1.0])).is_err());
    }

    fn random_triple(rng: &mut ChaCha8Rng) -> (Signal, Signal, Signal) {
        let dim = rng.random_range(2..=5);
        let x0 = gaussian_signal(rng, dim);
        let s = gaussian_signal(rng, dim);
        let t = gaussian_signal(rng, dim);
        (x0, s, t)
    }

    #[test]
    fn matches_oracle_and_is_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = [0usize; 3];
        for _ in 0..1000 {
            let (x0, s, t) = random_triple(&mut rng);
            let (q, d) = q_operator(&x0, &s, &t).unwrap();
            seen[d.branch as usize] += 1;
            let o = halfspace_pair_projection_oracle(&x0, &s, &t).unwrap();
            assert!(q.distance(&o) <= 1e-9 * (1.0 + o.norm()), "{d:?}");
            let (h1, h2) = halfspace_violations(&q, &x0, &s, &t);
            assert!(h1 <= 1e-9 && h2 <= 1e-9);
            let dist = q.distance(&x0);
            let mut tested = 0;
            while tested < 100 {
                let r: f64 = rng.random_range(0.0..2.0);
                let z = q.axpy(r, &gaussian_signal(&mut rng, x0.dim()));
                let (z1, z2) = halfspace_violations(&z, &x0, &s, &t);
                if z1 <= 0.0 && z2 <= 0.0 {
                    assert!(dist <= z.distance(&x0) + 1e-12);
                    tested += 1;
                }
            }
        }
        assert!(seen[1] > 0 && seen[2] > 0);
    }

    #[test]
    fn near_degenerate_triples_agree_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let dim = rng.random_range(2..=5);
            let x0 = gaussian_signal(&mut rng, dim);
            let s = gaussian_signal(&mut rng, dim);
            // t − s nearly parallel to s − x0, so D is a thin slab
            let k: f64 = rng.random_range(0.1..2.0);
            let jitter = gaussian_signal(&mut rng, dim).scale(1e-9);
            let t = s.axpy(k, &s.sub(&x0)).add(&jitter);
            let (q, _) = q_operator(&x0, &s, &t).unwrap();
            let o = halfspace_pair_projection_oracle(&x0, &s, &t).unwrap();
            assert!(q.distance(&o) <= 1e-6, "{}", q.distance(&o));
        }
    }
}
