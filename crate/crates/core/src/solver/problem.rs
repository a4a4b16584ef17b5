use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::EquivalentPrescription;
use crate::check::{check_class_t, check_firmly_nonexpansive, GaussianSampler, Sampler};
use crate::operator::{Operator, Regularity};
use crate::signal::Signal;
use crate::{Error, Result};

/// Iteration-indexed source of class-𝔗 operators sharing one fixed set.
pub type ActivationFactory = Arc<dyn Fn(usize) -> Operator + Send + Sync>;

#[derive(Clone)]
pub enum ConstraintKind {
    /// Closed affine subspace given by its (exact) projector.
    AffineSubspace(Operator),
    /// Closed convex set activated at iteration `n` by `factory(n)`.
    ConvexSet(ActivationFactory),
    /// `F x = p` with `F` firmly nonexpansive.
    Prescription { f: Operator, p: Signal },
}

#[derive(Clone)]
pub struct Constraint {
    dim: usize,
    label: String,
    kind: ConstraintKind,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConstraintKind::AffineSubspace(_) => "affine",
            ConstraintKind::ConvexSet(_) => "convex_set",
            ConstraintKind::Prescription { .. } => "prescription",
        };
        f.debug_struct("Constraint")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .field("label", &self.label)
            .finish()
    }
}

fn require(op: &Operator, allowed: &[Regularity]) -> Result<()> {
    if allowed.contains(&op.regularity()) {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!(
            "operator `{}` is declared {:?}, expected one of {allowed:?}",
            op.label(),
            op.regularity()
        )))
    }
}

impl Constraint {
    pub fn affine(projector: Operator) -> Result<Self> {
        require(&projector, &[Regularity::FirmlyNonexpansive])?;
        Ok(Self {
            dim: projector.dim(),
            label: projector.label().to_string(),
            kind: ConstraintKind::AffineSubspace(projector),
        })
    }

    /// Convex set activated by the same operator at every iteration.
    pub fn convex_set(activation: Operator) -> Result<Self> {
        require(
            &activation,
            &[Regularity::FirmlyNonexpansive, Regularity::ClassT],
        )?;
        let dim = activation.dim();
        let label = activation.label().to_string();
        Ok(Self {
            dim,
            label,
            kind: ConstraintKind::ConvexSet(Arc::new(move |_| activation.clone())),
        })
    }

    /// The factory must return class-𝔗 operators with a common fixed set.
    pub fn convex_set_with_factory(
        dim: usize,
        label: impl Into<String>,
        factory: ActivationFactory,
    ) -> Self {
        Self {
            dim,
            label: label.into(),
            kind: ConstraintKind::ConvexSet(factory),
        }
    }

    pub fn prescription(f: Operator, p: Signal) -> Result<Self> {
        require(&f, &[Regularity::FirmlyNonexpansive])?;
        p.ensure_dim(f.dim())?;
        if !p.is_finite() {
            return Err(Error::InvalidProblem(
                "prescribed point is not finite".into(),
            ));
        }
        Ok(Self {
            dim: f.dim(),
            label: format!("{} = p", f.label()),
            kind: ConstraintKind::Prescription { f, p },
        })
    }

    pub fn from_prescription(e: EquivalentPrescription) -> Result<Self> {
        let label = e.provenance.clone();
        Ok(Self::prescription(e.f, e.p)?.with_label(label))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, ConstraintKind::AffineSubspace(_))
    }

    /// `a_{i,n}` evaluated at `z`.
    pub fn activate(&self, n: usize, z: &Signal) -> Signal {
        match &self.kind {
            ConstraintKind::AffineSubspace(p) => p.apply(z),
            ConstraintKind::ConvexSet(factory) => factory(n).apply(z),
            ConstraintKind::Prescription { f, p } => {
                let mut a = p.add(z);
                a.axpy_mut(-1.0, &f.apply(z));
                a
            }
        }
    }

    /// `‖P x − x‖`, `‖T₀ x − x‖` or `‖F x − p‖` depending on the kind.
    pub fn residual(&self, x: &Signal) -> f64 {
        match &self.kind {
            ConstraintKind::AffineSubspace(p) => p.apply(x).distance(x),
            ConstraintKind::ConvexSet(factory) => factory(0).apply(x).distance(x),
            ConstraintKind::Prescription { f, p } => f.apply(x).distance(p),
        }
    }

    /// Randomized checks of the declared structure: idempotence and
    /// affineness of subspace projectors, firm nonexpansiveness of
    /// prescription operators, class 𝔗 of convex-set activations against
    /// the supplied feasible points.
    pub fn verify(&self, feasible: &[Signal], trials: usize, seed: u64) -> Result<()> {
        let mut s = GaussianSampler::new(self.dim, seed);
        let fail = |what: &str, v: f64| {
            Err(Error::InvalidProblem(format!(
                "constraint `{}` fails {what} check (defect {v:e})",
                self.label
            )))
        };
        match &self.kind {
            ConstraintKind::AffineSubspace(p) => {
                for _ in 0..trials {
                    let (x, y) = s.pair();
                    let alpha: f64 = s.point()[0];
                    let px = p.apply(&x);
                    let py = p.apply(&y);
                    let idem = p.apply(&px).distance(&px);
                    let lhs = p.apply(&x.scale(alpha).axpy(1.0 - alpha, &y));
                    let rhs = px.scale(alpha).axpy(1.0 - alpha, &py);
                    let aff = lhs.distance(&rhs);
                    let scale = 1.0 + x.norm() + y.norm();
                    if idem > 1e-10 * scale {
                        return fail("idempotence", idem);
                    }
                    if aff > 1e-10 * scale * (1.0 + alpha.abs()) {
                        return fail("affineness", aff);
                    }
                }
            }
            ConstraintKind::Prescription { f, .. } => {
                let r = check_firmly_nonexpansive(f, &mut s, trials, 1e-10);
                if !r.pass {
                    return fail("firm nonexpansiveness", r.worst_violation);
                }
            }
            ConstraintKind::ConvexSet(factory) => {
                for n in 0..3 {
                    let r = check_class_t(&factory(n), feasible, &mut s, trials, 1e-10)?;
                    if !r.pass {
                        return fail("class 𝔗", r.worst_violation);
                    }
                }
            }
        }
        Ok(())
    }
}

/// `T x = p + x − F x`; firmly nonexpansive when `F` is, with
/// `Fix T = {x : F x = p}`.
pub fn fixed_point_activation(f: &Operator, p: &Signal) -> Result<Operator> {
    p.ensure_dim(f.dim())?;
    let f = f.clone();
    let p = p.clone();
    let label = format!("p + Id - {}", f.label());
    let regularity = match f.regularity() {
        Regularity::FirmlyNonexpansive => Regularity::FirmlyNonexpansive,
        _ => Regularity::General,
    };
    Ok(Operator::new(f.dim(), regularity, label, move |x| {
        let mut t = p.add(x);
        t.axpy_mut(-1.0, &f.apply(x));
        t
    }))
}

/// Member of the extrapolation family `I′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffineSelector {
    /// The whole space, with the identity as projector.
    Ambient,
    /// An `AffineSubspace` constraint, by index.
    Constraint(usize),
}

#[derive(Debug, Clone)]
pub struct Problem {
    x0: Signal,
    constraints: Vec<Constraint>,
    affine: Vec<AffineSelector>,
}

impl Problem {
    /// `affine` lists `I′`; it must be nonempty and name only affine
    /// constraints.
    pub fn new(
        x0: Signal,
        constraints: Vec<Constraint>,
        affine: Vec<AffineSelector>,
    ) -> Result<Self> {
        if constraints.is_empty() {
            return Err(Error::InvalidProblem("no constraints".into()));
        }
        if affine.is_empty() {
            return Err(Error::InvalidProblem(
                "extrapolation family is empty".into(),
            ));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidProblem("anchor is not finite".into()));
        }
        for c in &constraints {
            if c.dim != x0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: x0.dim(),
                    found: c.dim,
                });
            }
        }
        for sel in &affine {
            if let AffineSelector::Constraint(id) = *sel {
                match constraints.get(id) {
                    Some(c) if c.is_affine() => {}
                    Some(c) => {
                        return Err(Error::InvalidProblem(format!(
                            "constraint {id} (`{}`) is not an affine subspace",
                            c.label
                        )))
                    }
                    None => {
                        return Err(Error::InvalidProblem(format!("no constraint with id {id}")))
                    }
                }
            }
        }
        Ok(Self {
            x0,
            constraints,
            affine,
        })
    }

    /// Problem with `I′ = {ambient}`.
    pub fn without_extrapolation_family(x0: Signal, constraints: Vec<Constraint>) -> Result<Self> {
        Self::new(x0, constraints, vec![AffineSelector::Ambient])
    }

    pub fn x0(&self) -> &Signal {
        &self.x0
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn affine(&self) -> &[AffineSelector] {
        &self.affine
    }

    pub fn project_affine(&self, sel: AffineSelector, x: &Signal) -> Signal {
        match sel {
            AffineSelector::Ambient => x.clone(),
            AffineSelector::Constraint(id) => match &self.constraints[id].kind {
                ConstraintKind::AffineSubspace(p) => p.apply(x),
                _ => unreachable!("validated in Problem::new"),
            },
        }
    }

    pub fn residuals(&self, x: &Signal) -> Vec<f64> {
        self.constraints.iter().map(|c| c.residual(x)).collect()
    }
}
