//! Scalar observation maps and the transforms that turn non-cocoercive
//! scalar observations into soft-thresholder prescriptions.

use std::f64::consts::FRAC_2_PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shared scalar map.
pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Nonempty closed interval of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let ok = !lo.is_nan()
            && !hi.is_nan()
            && lo <= hi
            && lo != f64::INFINITY
            && hi != f64::NEG_INFINITY;
        if !ok {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `[-w, w]`
    pub fn symmetric(w: f64) -> Result<Self> {
        Self::new(-w, w)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Soft thresholder on `omega`: shifts the part of `xi` lying outside the
/// interval back to the origin and maps the interval itself to 0.
pub fn soft_threshold(xi: f64, omega: &Interval) -> f64 {
    if xi > omega.hi {
        xi - omega.hi
    } else if xi < omega.lo {
        xi - omega.lo
    } else {
        0.0
    }
}

/// Projection of `xi` onto `d` (hard clipping).
pub fn hard_clip(xi: f64, d: &Interval) -> f64 {
    if xi > d.hi {
        d.hi
    } else if xi < d.lo {
        d.lo
    } else {
        xi
    }
}

/// Saturating soft clipping nonlinearities. Each is odd, increasing and
/// 1-Lipschitz, hence firmly nonexpansive as a scalar map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoftClip {
    Tanh,
    /// `(2/π)·arctan`
    Atan,
    /// `ξ / (1 + |ξ|)`
    Rational,
    /// `sign(ξ)·(1 − exp(−|ξ|))`
    ExpSat,
}

impl SoftClip {
    pub const ALL: [SoftClip; 4] = [Self::Tanh, Self::Atan, Self::Rational, Self::ExpSat];

    pub fn apply(self, xi: f64) -> f64 {
        match self {
            Self::Tanh => xi.tanh(),
            Self::Atan => FRAC_2_PI * xi.atan(),
            Self::Rational => xi / (1.0 + xi.abs()),
            Self::ExpSat => sign(xi) * -(-xi.abs()).exp_m1(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Tanh => "tanh",
            Self::Atan => "atan",
            Self::Rational => "rational",
            Self::ExpSat => "exp_sat",
        }
    }
}

impl fmt::Display for SoftClip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SoftClip {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownSoftClip(s.to_owned()))
    }
}

pub fn soft_clip(xi: f64, kind: SoftClip) -> f64 {
    kind.apply(xi)
}

/// Logistic encoder `1 / (1 + exp(η − ξ))`.
pub fn logistic_encoder(xi: f64, eta: f64) -> f64 {
    let z = eta - xi;
    // evaluate on the side that cannot overflow
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Hard thresholder on `[-ω, ω]`: keeps `xi` when `|xi| > ω`, else 0.
/// Discontinuous, hence not firmly nonexpansive.
pub fn hard_threshold(xi: f64, omega: f64) -> f64 {
    if xi.abs() > omega {
        xi
    } else {
        0.0
    }
}

/// `σ(χ) = χ − ω·sign(χ)`: composing it with [`hard_threshold`] gives the
/// soft thresholder on `[-ω, ω]`.
pub fn hard_threshold_transform(chi: f64, omega: f64) -> f64 {
    chi - omega * sign(chi)
}

/// Non-Lipschitz sampler `sign(ξ)·sqrt(ξ² − ω²)` outside the dead zone.
pub fn sqrt_sampler(xi: f64, omega: f64) -> f64 {
    if xi.abs() > omega {
        sign(xi) * (xi * xi - omega * omega).sqrt()
    } else {
        0.0
    }
}

/// `σ(χ) = sign(χ)·(sqrt(χ² + ω²) − ω)`: composing it with [`sqrt_sampler`]
/// gives the soft thresholder on `[-ω, ω]`.
pub fn sqrt_sampler_transform(chi: f64, omega: f64) -> f64 {
    sign(chi) * ((chi * chi + omega * omega).sqrt() - omega)
}

/// Converts a raw sqrt-sampler observation `chi` into the equivalent
/// prescribed value `σ(chi)` and returns the firmly nonexpansive map
/// `φ = σ∘ρ` against which it is prescribed.
pub fn sqrt_sampler_prescription(chi: f64, omega: f64) -> (f64, ScalarMap) {
    let phi: ScalarMap = Arc::new(move |xi| sqrt_sampler_transform(sqrt_sampler(xi, omega), omega));
    (sqrt_sampler_transform(chi, omega), phi)
}

/// Same construction for the hard thresholder.
pub fn hard_threshold_prescription(chi: f64, omega: f64) -> (f64, ScalarMap) {
    let phi: ScalarMap =
        Arc::new(move |xi| hard_threshold_transform(hard_threshold(xi, omega), omega));
    (hard_threshold_transform(chi, omega), phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::scalar_fne_defect;

    fn unit() -> Interval {
        Interval::symmetric(1.0).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(1.0, -1.0).is_err());
        assert!(Interval::new(f64::INFINITY, f64::INFINITY).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, f64::NEG_INFINITY).is_err());
        assert!(Interval::new(f64::NAN, 0.0).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, 1.0).is_ok());
        assert!(Interval::new(2.0, 2.0).is_ok());
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, &unit()), 2.0);
        assert_eq!(soft_threshold(0.5, &unit()), 0.0);
        assert_eq!(soft_threshold(-2.5, &unit()), -1.5);
        // boundary uses the closed branch
        assert_eq!(soft_threshold(1.0, &unit()), 0.0);
        // one-sided interval
        let half = Interval::new(f64::NEG_INFINITY, 1.0).unwrap();
        assert_eq!(soft_threshold(-100.0, &half), 0.0);
        assert_eq!(soft_threshold(3.0, &half), 2.0);
    }

    #[test]
    fn hard_clip_examples() {
        assert_eq!(hard_clip(2.0, &unit()), 1.0);
        assert_eq!(hard_clip(0.0, &unit()), 0.0);
        assert_eq!(hard_clip(-3.0, &unit()), -1.0);
    }

    #[test]
    fn soft_clip_examples() {
        for k in SoftClip::ALL {
            assert_eq!(soft_clip(0.0, k), 0.0);
        }
        assert!((soft_clip(2f64.ln(), SoftClip::ExpSat) - 0.5).abs() < 1e-15);
        assert_eq!(soft_clip(1.0, SoftClip::Rational), 0.5);
        assert!((soft_clip(1.0, SoftClip::Atan) - 0.5).abs() < 1e-15);
        assert!(matches!(
            "cubic".parse::<SoftClip>(),
            Err(Error::UnknownSoftClip(_))
        ));
        assert_eq!("exp_sat".parse::<SoftClip>().unwrap(), SoftClip::ExpSat);
    }

    #[test]
    fn logistic_examples() {
        assert_eq!(logistic_encoder(0.0, 0.0), 0.5);
        assert_eq!(logistic_encoder(3.7, 3.7), 0.5);
        assert!((logistic_encoder(800.0, 1.0) - 1.0).abs() < 1e-15);
        assert!(logistic_encoder(-800.0, 1.0) >= 0.0);
        assert!(logistic_encoder(-800.0, 1.0).is_finite());
    }

    #[test]
    fn scalar_maps_are_monotone_and_one_lipschitz() {
        let maps: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
            ("soft", Box::new(|x| soft_threshold(x, &unit()))),
            ("clip", Box::new(|x| hard_clip(x, &unit()))),
            ("tanh", Box::new(|x| soft_clip(x, SoftClip::Tanh))),
            ("atan", Box::new(|x| soft_clip(x, SoftClip::Atan))),
            ("rational", Box::new(|x| soft_clip(x, SoftClip::Rational))),
            ("exp_sat", Box::new(|x| soft_clip(x, SoftClip::ExpSat))),
            ("logistic", Box::new(|x| logistic_encoder(x, 0.7))),
            ("sqrt phi", {
                let phi = sqrt_sampler_prescription(0.0, 1.3).1;
                Box::new(move |x| phi(x))
            }),
            ("hard phi", {
                let phi = hard_threshold_prescription(0.0, 0.4).1;
                Box::new(move |x| phi(x))
            }),
        ];
        for (name, f) in &maps {
            let d = scalar_fne_defect(f, -10.0, 10.0, 10_000);
            assert!(d <= 1e-12, "{name}: defect {d}");
        }
        assert!(scalar_fne_defect(|x| hard_threshold(x, 1.0), -3.0, 3.0, 10_000) > 0.1);
    }

    #[test]
    fn sqrt_sampler_transform_example() {
        let xi = 2f64.sqrt();
        assert!((sqrt_sampler(xi, 1.0) - 1.0).abs() < 1e-15);
        let (p, _) = sqrt_sampler_prescription(1.0, 1.0);
        assert!((p - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((p - soft_threshold(xi, &unit())).abs() < 1e-15);
        assert_eq!(sqrt_sampler(0.7, 1.0), 0.0);
        assert_eq!(sqrt_sampler_transform(0.0, 1.0), 0.0);
    }

    #[test]
    fn transforms_reproduce_soft_threshold_on_grid() {
        for omega in [0.25, 1.0, 3.0] {
            let iv = Interval::symmetric(omega).unwrap();
            let (_, phi_sqrt) = sqrt_sampler_prescription(0.0, omega);
            let (_, phi_hard) = hard_threshold_prescription(0.0, omega);
            for k in 0..1000 {
                let xi = -10.0 + 20.0 * k as f64 / 999.0;
                let soft = soft_threshold(xi, &iv);
                assert!((phi_sqrt(xi) - soft).abs() <= 1e-12);
                assert!((phi_hard(xi) - soft).abs() <= 1e-12);
            }
        }
    }
}
