//! Block and basis constructions: operators that act separately on the
//! blocks of a partition or on the coefficients in an orthonormal basis.

use std::ops::Range;
use std::sync::Arc;

use crate::catalog::scalar::ScalarMap;
use crate::check::scalar_fne_defect;
use crate::operator::{Operator, Regularity};
use crate::signal::{dot_unchecked, Signal};
use crate::{Error, Result};

/// Ordered partition of `0..n` into nonempty contiguous ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    dim: usize,
    blocks: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn new(dim: usize, blocks: Vec<Range<usize>>) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.start != next {
                return Err(Error::InvalidPartition(format!(
                    "block {b:?} does not start at {next}"
                )));
            }
            if b.is_empty() {
                return Err(Error::InvalidPartition(format!("empty block {b:?}")));
            }
            next = b.end;
        }
        if next != dim || blocks.is_empty() {
            return Err(Error::InvalidPartition(format!(
                "blocks cover 0..{next}, expected 0..{dim}"
            )));
        }
        Ok(Self { dim, blocks })
    }

    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut start = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect();
        Self::new(start, blocks)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }
}

fn block_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_block_params(x: &Signal, part: &BlockPartition, n: usize) -> Result<()> {
    x.ensure_dim(part.dim())?;
    if n != part.len() {
        return Err(Error::DimensionMismatch {
            expected: part.len(),
            found: n,
        });
    }
    Ok(())
}

/// Group soft thresholding: block `i` is scaled by `1 − ρ_i / max(‖x_i‖, ρ_i)`,
/// so blocks with norm at most `ρ_i` are zeroed.
pub fn group_soft_threshold(x: &Signal, part: &BlockPartition, rho: &[f64]) -> Result<Signal> {
    check_block_params(x, part, rho.len())?;
    if let Some(r) = rho.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::InvalidProblem(format!(
            "group threshold must be positive, got {r}"
        )));
    }
    Ok(group_soft_threshold_unchecked(x, part, rho))
}

fn group_soft_threshold_unchecked(x: &Signal, part: &BlockPartition, rho: &[f64]) -> Signal {
    let mut out = x.clone();
    for (b, &r) in part.blocks().iter().zip(rho) {
        let xb = &mut out.as_mut_slice()[b.clone()];
        let factor = 1.0 - r / block_norm(xb).max(r);
        xb.iter_mut().for_each(|v| *v *= factor);
    }
    out
}

pub fn group_soft_threshold_operator(part: BlockPartition, rho: Vec<f64>) -> Result<Operator> {
    group_soft_threshold(&Signal::zeros(part.dim()), &part, &rho)?;
    Ok(Operator::new(
        part.dim(),
        Regularity::FirmlyNonexpansive,
        "group_soft_threshold",
        move |x| group_soft_threshold_unchecked(x, &part, &rho),
    ))
}

/// Block shrinkage through the proximity operator of an even potential of the
/// block norm: block `i` becomes `prox_i(‖x_i‖)·x_i/‖x_i‖` when
/// `‖x_i‖ > ρ_i` and zero otherwise.
///
/// `scalar_prox[i]` must be the prox of an even convex `φ_i` with
/// `φ_i(0) = 0`, and `rho[i] = max ∂φ_i(0)`.
pub fn block_norm_shrink(
    x: &Signal,
    part: &BlockPartition,
    scalar_prox: &[ScalarMap],
    rho: &[f64],
) -> Result<Signal> {
    check_block_params(x, part, rho.len())?;
    check_block_params(x, part, scalar_prox.len())?;
    let mut out = x.clone();
    for ((b, prox), &r) in part.blocks().iter().zip(scalar_prox).zip(rho) {
        let xb = &mut out.as_mut_slice()[b.clone()];
        let n = block_norm(xb);
        if n > r {
            let factor = prox(n) / n;
            xb.iter_mut().for_each(|v| *v *= factor);
        } else {
            xb.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    Ok(out)
}

/// Orthonormal basis of the ambient space used to analyse a signal.
#[derive(Debug, Clone)]
pub enum Basis {
    /// Standard basis of the given dimension.
    Identity(usize),
    /// Explicit basis vectors `e_i`.
    Orthonormal(Vec<Signal>),
}

impl Basis {
    /// Validates orthonormality of the explicit vectors to `1e-10`.
    pub fn orthonormal(vectors: Vec<Signal>) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::NonOrthonormalBasis {
                deviation: f64::INFINITY,
            });
        }
        for v in &vectors {
            v.ensure_dim(n)?;
        }
        let mut deviation: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let g = dot_unchecked(&vectors[i], &vectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((g - target).abs());
            }
        }
        if deviation > 1e-10 {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
        Ok(Self::Orthonormal(vectors))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Identity(n) => *n,
            Self::Orthonormal(v) => v.len(),
        }
    }

    fn coefficients(&self, x: &Signal) -> Vec<f64> {
        match self {
            Self::Identity(_) => x.as_slice().to_vec(),
            Self::Orthonormal(v) => v.iter().map(|e| dot_unchecked(x, e)).collect(),
        }
    }

    fn synthesize(&self, c: &[f64]) -> Signal {
        match self {
            Self::Identity(_) => Signal::from(c),
            Self::Orthonormal(v) => {
                let mut out = Signal::zeros(v.len());
                for (e, &ci) in v.iter().zip(c) {
                    out.axpy_mut(ci, e);
                }
                out
            }
        }
    }
}

/// A scalar map `ρ_i` acting on coefficient `i`, declared increasing and
/// `1/β_i`-Lipschitz.
#[derive(Clone)]
pub struct CoefficientMap {
    pub beta: f64,
    pub rho: ScalarMap,
}

impl CoefficientMap {
    pub fn new(beta: f64, rho: ScalarMap) -> Self {
        Self { beta, rho }
    }

    pub fn unit(rho: ScalarMap) -> Self {
        Self { beta: 1.0, rho }
    }
}

const SPOT_CHECK_RANGE: f64 = 10.0;
const SPOT_CHECK_POINTS: usize = 2001;

fn validate_coefficient_maps(basis: &Basis, maps: &[CoefficientMap]) -> Result<()> {
    if maps.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: maps.len(),
        });
    }
    for (i, m) in maps.iter().enumerate() {
        if !(m.beta > 0.0 && m.beta.is_finite()) {
            return Err(Error::InvalidProblem(format!("beta_{i} must be positive")));
        }
        let beta = m.beta;
        let rho = &m.rho;
        let defect = scalar_fne_defect(
            |t| beta * rho(t),
            -SPOT_CHECK_RANGE,
            SPOT_CHECK_RANGE,
            SPOT_CHECK_POINTS,
        );
        if defect > 1e-9 {
            return Err(Error::InvalidProblem(format!(
                "coefficient map {i} is not increasing and 1/beta-Lipschitz (defect {defect:e})"
            )));
        }
    }
    Ok(())
}

/// `Σ_i β_i ρ_i(⟨x, e_i⟩) e_i`.
pub fn coordinatewise_basis_operator(
    x: &Signal,
    basis: &Basis,
    maps: &[CoefficientMap],
) -> Result<Signal> {
    x.ensure_dim(basis.dim())?;
    validate_coefficient_maps(basis, maps)?;
    Ok(apply_basis_maps(x, basis, maps))
}

fn apply_basis_maps(x: &Signal, basis: &Basis, maps: &[CoefficientMap]) -> Signal {
    let c: Vec<f64> = basis
        .coefficients(x)
        .into_iter()
        .zip(maps)
        .map(|(c, m)| m.beta * (m.rho)(c))
        .collect();
    basis.synthesize(&c)
}

/// Operator form of [`coordinatewise_basis_operator`]; firmly nonexpansive.
pub fn basis_operator(basis: Basis, maps: Vec<CoefficientMap>) -> Result<Operator> {
    validate_coefficient_maps(&basis, &maps)?;
    let dim = basis.dim();
    let basis = Arc::new(basis);
    Ok(Operator::new(
        dim,
        Regularity::FirmlyNonexpansive,
        "coordinatewise_basis_operator",
        move |x| apply_basis_maps(x, &basis, &maps),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::scalar::{soft_threshold, Interval};
    use crate::check::{check_firmly_nonexpansive, GaussianSampler};

    #[test]
    fn partition_validation() {
        assert!(BlockPartition::new(4, vec![0..2, 2..4]).is_ok());
        assert!(BlockPartition::new(4, vec![0..2, 3..4]).is_err());
        assert!(BlockPartition::new(4, vec![0..2, 2..2, 2..4]).is_err());
        assert!(BlockPartition::new(4, vec![0..3]).is_err());
        assert!(BlockPartition::new(0, vec![]).is_err());
        assert_eq!(
            BlockPartition::from_sizes(&[1, 3]).unwrap().blocks(),
            &[0..1, 1..4]
        );
    }

    #[test]
    fn group_soft_threshold_examples() {
        let part = BlockPartition::from_sizes(&[2]).unwrap();
        let x = Signal::from(vec![3.0, 4.0]);
        let y = group_soft_threshold(&x, &part, &[1.0]).unwrap();
        assert!((y[0] - 2.4).abs() < 1e-15 && (y[1] - 3.2).abs() < 1e-15);

        let small = group_soft_threshold(&x, &part, &[5.0]).unwrap();
        assert_eq!(small.as_slice(), &[0.0, 0.0]);

        let tiny = group_soft_threshold(&x, &part, &[1e-300]).unwrap();
        assert_eq!(tiny, x);

        assert!(group_soft_threshold(&x, &part, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn block_norm_shrink_matches_group_soft() {
        let part = BlockPartition::from_sizes(&[2, 3, 1]).unwrap();
        let rho = [0.5, 2.0, 0.3];
        let proxes: Vec<ScalarMap> = rho
            .iter()
            .map(|&r| {
                let iv = Interval::symmetric(r).unwrap();
                Arc::new(move |t| soft_threshold(t, &iv)) as ScalarMap
            })
            .collect();
        let mut s = GaussianSampler::with_scale(6, 11, 1.5);
        use crate::check::Sampler;
        for _ in 0..200 {
            let x = s.point();
            let a = block_norm_shrink(&x, &part, &proxes, &rho).unwrap();
            let b = group_soft_threshold(&x, &part, &rho).unwrap();
            assert!(a.distance(&b) <= 1e-14, "{a:?} vs {b:?}");
        }
        let zero = Signal::zeros(6);
        assert_eq!(
            block_norm_shrink(&zero, &part, &proxes, &rho).unwrap(),
            zero
        );
    }

    #[test]
    fn dim_one_blocks_reduce_to_scalar_soft_threshold() {
        let part = BlockPartition::from_sizes(&[1, 1, 1]).unwrap();
        let prox: ScalarMap = Arc::new(|t: f64| (t - 1.0).max(0.0));
        let proxes = vec![prox.clone(), prox.clone(), prox];
        let x = Signal::from(vec![3.0, -0.5, -2.5]);
        let y = block_norm_shrink(&x, &part, &proxes, &[1.0; 3]).unwrap();
        let unit = Interval::symmetric(1.0).unwrap();
        for i in 0..3 {
            assert!((y[i] - soft_threshold(x[i], &unit)).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_basis_with_identity_maps_is_identity() {
        let id: ScalarMap = Arc::new(|t| t);
        let maps = vec![CoefficientMap::unit(id); 3];
        let x = Signal::from(vec![1.0, -2.0, 0.5]);
        let y = coordinatewise_basis_operator(&x, &Basis::Identity(3), &maps).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn identity_basis_soft_threshold_is_coordinate_shrinkage() {
        let w = 0.7;
        let iv = Interval::symmetric(w).unwrap();
        let soft: ScalarMap = Arc::new(move |t| soft_threshold(t, &iv));
        let maps = vec![CoefficientMap::unit(soft); 4];
        let x = Signal::from(vec![2.0, -0.3, -1.0, 0.7]);
        let y = coordinatewise_basis_operator(&x, &Basis::Identity(4), &maps).unwrap();
        for i in 0..4 {
            let expect = x[i].signum() * (x[i].abs() - w).max(0.0);
            assert!((y[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_orthonormal_basis_and_steep_maps() {
        let v = vec![Signal::from(vec![1.0, 0.0]), Signal::from(vec![1.0, 1.0])];
        assert!(matches!(
            Basis::orthonormal(v),
            Err(Error::NonOrthonormalBasis { .. })
        ));
        let steep: ScalarMap = Arc::new(|t| 3.0 * t);
        let maps = vec![
            CoefficientMap::new(1.0, steep.clone()),
            CoefficientMap::new(0.5, steep),
        ];
        assert!(basis_operator(Basis::Identity(2), maps).is_err());
        // the same map scaled by beta = 1/3 is admissible
        let ok: ScalarMap = Arc::new(|t| 3.0 * t);
        assert!(
            basis_operator(Basis::Identity(1), vec![CoefficientMap::new(1.0 / 3.0, ok)]).is_ok()
        );
    }

    #[test]
    fn rotated_tanh_is_firmly_nonexpansive() {
        // rotation by 30 degrees in the plane
        let (s, c) = (0.5f64, 3f64.sqrt() / 2.0);
        let basis =
            Basis::orthonormal(vec![Signal::from(vec![c, s]), Signal::from(vec![-s, c])]).unwrap();
        let tanh: ScalarMap = Arc::new(f64::tanh);
        let op = basis_operator(basis, vec![CoefficientMap::unit(tanh); 2]).unwrap();
        let mut sampler = GaussianSampler::with_scale(2, 12, 2.0);
        assert!(check_firmly_nonexpansive(&op, &mut sampler, 10_000, 1e-10).pass);
    }
}
