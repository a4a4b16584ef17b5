//! Randomized property suites run by `proxpoint check`.
//!
//! Each suite draws its instances from a seeded stream and reports a single
//! pass/fail verdict with a short description of the worst case seen.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{
    bandlimit_projector, basis_operator, block_norm_shrink, cocoercive_aggregate,
    distance_prox_operator, group_soft_threshold_operator, hard_clip, hard_threshold,
    hard_threshold_prescription, isotonic_projection, logistic_encoder, soft_threshold,
    sqrt_sampler_prescription, Basis, BlockPartition, CoefficientMap, ConvexSet, Interval,
    ObservationSpec, ScalarMap, SoftClip,
};
use crate::check::{check_firmly_nonexpansive, gaussian_signal, GaussianSampler};
use crate::experiment::{build_observations, generate_signal};
use crate::haugazeau::{halfspace_pair_projection_oracle, halfspace_violations, q_operator};
use crate::operator::{LinearMap, Operator, Regularity};
use crate::signal::{dot_unchecked, Signal};
use crate::solver::{
    AffineSelector, Constraint, ControlConfig, Problem, RelaxationRule, Solver, TrajectoryMonitor,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, detail }
    }
}

/// Orthonormalizes Gaussian draws by modified Gram–Schmidt.
pub fn random_orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Basis {
    loop {
        let mut vecs: Vec<Signal> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut v = gaussian_signal(rng, dim);
            for e in &vecs {
                let c = dot_unchecked(&v, e);
                v.axpy_mut(-c, e);
            }
            let n = v.norm();
            if n < 1e-6 {
                break;
            }
            vecs.push(v.scale(1.0 / n));
        }
        if vecs.len() == dim {
            if let Ok(b) = Basis::orthonormal(vecs) {
                return b;
            }
        }
    }
}

fn scalar(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarMap {
    Arc::new(f)
}

/// One instance of every firmly nonexpansive constructor in the catalog,
/// in dimension `dim ≥ 4`.
pub fn fne_catalog(dim: usize, seed: u64) -> Result<Vec<Operator>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = Vec::new();
    let omega = Interval::new(-0.5, 0.7)?;
    let clip = Interval::new(-1.0, 0.3)?;

    ops.push(
        basis_operator(
            Basis::Identity(dim),
            vec![CoefficientMap::unit(scalar(move |t| soft_threshold(t, &omega))); dim],
        )?
        .with_label("soft_threshold"),
    );
    ops.push(
        basis_operator(
            Basis::Identity(dim),
            vec![CoefficientMap::unit(scalar(move |t| hard_clip(t, &clip))); dim],
        )?
        .with_label("hard_clip"),
    );
    for kind in SoftClip::ALL {
        let basis = random_orthonormal_basis(&mut rng, dim);
        ops.push(
            basis_operator(
                basis,
                vec![CoefficientMap::unit(scalar(move |t| kind.apply(t))); dim],
            )?
            .with_label(format!("soft_clip_{}", kind.name())),
        );
    }
    let basis = random_orthonormal_basis(&mut rng, dim);
    ops.push(
        basis_operator(
            basis,
            vec![CoefficientMap::new(4.0, scalar(|t| logistic_encoder(t, 0.3))); dim],
        )?
        .with_label("logistic_encoder(beta=4)"),
    );
    let (_, phi) = sqrt_sampler_prescription(0.0, 0.8);
    ops.push(
        basis_operator(Basis::Identity(dim), vec![CoefficientMap::unit(phi); dim])?
            .with_label("sqrt_sampler_prescription"),
    );
    let (_, phi) = hard_threshold_prescription(0.0, 0.8);
    ops.push(
        basis_operator(Basis::Identity(dim), vec![CoefficientMap::unit(phi); dim])?
            .with_label("hard_threshold_prescription"),
    );

    let half = dim / 2;
    let part = BlockPartition::from_sizes(&[half, dim - half])?;
    ops.push(group_soft_threshold_operator(part.clone(), vec![0.5, 1.2])?);
    let rho = vec![0.4, 0.9];
    let prox: Vec<ScalarMap> = rho
        .iter()
        .map(|&r| scalar(move |n: f64| (n - r).max(0.0) / 2.0))
        .collect();
    ops.push(Operator::new(
        dim,
        Regularity::FirmlyNonexpansive,
        "block_norm_shrink",
        move |x| block_norm_shrink(x, &part, &prox, &rho).expect("validated partition"),
    ));

    let center = gaussian_signal(&mut rng, dim);
    let ball = ConvexSet::ball(center, 0.8)?;
    let lo: Vec<f64> = (0..dim).map(|i| -0.5 - 0.1 * i as f64).collect();
    let hi: Vec<f64> = (0..dim).map(|i| 0.2 + 0.1 * i as f64).collect();
    let bx = ConvexSet::boxed(lo, hi)?;
    let a = gaussian_signal(&mut rng, dim);
    let sets = [
        ball.clone(),
        bx.clone(),
        ConvexSet::halfspace(a.clone(), 0.3)?,
        ConvexSet::hyperplane(a, -0.2)?,
        ConvexSet::isotonic_cone(dim),
        ConvexSet::singleton(gaussian_signal(&mut rng, dim)),
    ];
    for s in &sets {
        ops.push(s.projector());
    }
    ops.push(distance_prox_operator(ball, 0.6)?);
    ops.push(distance_prox_operator(bx, 1.5)?);
    ops.push(bandlimit_projector(dim, 3)?);

    let mut specs = Vec::new();
    for (m, q) in [
        (3, ConvexSet::isotonic_cone(3).projector()),
        (
            2,
            Operator::coordinatewise(2, Regularity::FirmlyNonexpansive, "tanh", f64::tanh),
        ),
    ] {
        let rows = (0..m)
            .map(|_| gaussian_signal(&mut rng, dim).into_vec())
            .collect();
        let truth = gaussian_signal(&mut rng, dim);
        specs.push(ObservationSpec::observe(
            LinearMap::from_rows(rows)?,
            q,
            1.0,
            &truth,
        )?);
    }
    ops.push(cocoercive_aggregate(&specs)?.f);
    Ok(ops)
}

/// Operators that are not firmly nonexpansive: the hard thresholder and
/// `x ↦ 2x`.
pub fn negative_controls(dim: usize) -> Vec<Operator> {
    vec![
        Operator::coordinatewise(dim, Regularity::General, "hard_threshold(0.5)", |t| {
            hard_threshold(t, 0.5)
        }),
        Operator::new(dim, Regularity::General, "double", |x| x.scale(2.0)),
    ]
}

fn fne_suite(seed: u64, trials: usize) -> Result<SuiteResult> {
    let ops = fne_catalog(6, seed)?;
    let mut failed = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (k, op) in ops.iter().enumerate() {
        let mut sampler = GaussianSampler::with_scale(op.dim(), seed ^ (k as u64 + 1), 2.0);
        let r = check_firmly_nonexpansive(op, &mut sampler, trials, 1e-10);
        worst = worst.max(r.worst_violation);
        if !r.pass {
            failed.push(op.label().to_string());
        }
    }
    let detail = if failed.is_empty() {
        format!("{} operators, worst violation {worst:.2e}", ops.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok(SuiteResult::new(
        "firm_nonexpansiveness",
        failed.is_empty(),
        detail,
    ))
}

fn negative_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut missed = Vec::new();
    let mut found = Vec::new();
    for op in negative_controls(6) {
        let mut sampler = GaussianSampler::new(op.dim(), seed);
        let r = check_firmly_nonexpansive(&op, &mut sampler, trials, 1e-10);
        if r.pass || r.witness.is_none() {
            missed.push(op.label().to_string());
        } else {
            found.push(format!("{} ({:.2e})", op.label(), r.worst_violation));
        }
    }
    let detail = if missed.is_empty() {
        format!("rejected {}", found.join(", "))
    } else {
        format!("accepted: {}", missed.join(", "))
    };
    SuiteResult::new("negative_controls", missed.is_empty(), detail)
}

fn haugazeau_suite(seed: u64, trials: usize) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dim = rng.random_range(2..=5);
        let x0 = gaussian_signal(&mut rng, dim);
        let s = gaussian_signal(&mut rng, dim);
        let t = gaussian_signal(&mut rng, dim);
        let Ok(oracle) = halfspace_pair_projection_oracle(&x0, &s, &t) else {
            continue;
        };
        let (q, _) = q_operator(&x0, &s, &t)?;
        let scale = 1.0 + x0.norm() + s.norm() + t.norm();
        let (v1, v2) = halfspace_violations(&q, &x0, &s, &t);
        worst = worst
            .max(q.distance(&oracle) / scale)
            .max(v1.max(v2).max(0.0) / (scale * scale));
    }
    Ok(SuiteResult::new(
        "haugazeau_oracle",
        worst <= 1e-9,
        format!("{trials} triples, worst relative defect {worst:.2e}"),
    ))
}

/// `P v` is the projection onto the nondecreasing cone iff it is
/// nondecreasing, `r = v − P v` sums to zero, every tail sum of `r` is
/// nonpositive and `⟨r, P v⟩ = 0`.
fn isotonic_defect(v: &Signal) -> f64 {
    candidate_defect(v, &isotonic_projection(v))
}

fn candidate_defect(v: &Signal, p: &Signal) -> f64 {
    let r = v.sub(p);
    let scale = 1.0 + v.norm();
    let mut defect: f64 = 0.0;
    for w in p.as_slice().windows(2) {
        defect = defect.max(w[0] - w[1]);
    }
    let mut tail = 0.0;
    for &ri in r.as_slice().iter().rev() {
        tail += ri;
        defect = defect.max(tail / scale);
    }
    defect
        .max(tail.abs() / scale)
        .max(dot_unchecked(&r, p).abs() / (scale * scale))
}

fn isotonic_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dim = rng.random_range(1..=12);
        worst = worst.max(isotonic_defect(&gaussian_signal(&mut rng, dim)));
    }
    SuiteResult::new(
        "isotonic_projection",
        worst <= 1e-12,
        format!("{trials} vectors, worst optimality defect {worst:.2e}"),
    )
}

fn prescription_suite(seed: u64) -> Result<SuiteResult> {
    let xbar = generate_signal(32, 5, seed)?;
    let obs = build_observations(&xbar, 4, 4, seed)?;
    let mut worst_res: f64 = 0.0;
    let mut pass = true;
    for (k, e) in obs.iter().enumerate() {
        worst_res = worst_res.max(e.residual(&xbar));
        let mut sampler = GaussianSampler::new(32, seed.wrapping_add(k as u64));
        pass &= check_firmly_nonexpansive(&e.f, &mut sampler, 200, 1e-10).pass;
    }
    Ok(SuiteResult::new(
        "observation_prescriptions",
        pass && worst_res <= 1e-10,
        format!("{} blocks, residual at truth {worst_res:.2e}", obs.len()),
    ))
}

fn trajectory_suite(seed: u64, problems: usize) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for k in 0..problems {
        let n = rng.random_range(2..=6);
        let xbar = gaussian_signal(&mut rng, n);
        let mut cons = Vec::new();
        for _ in 0..rng.random_range(1..=4) {
            let a = gaussian_signal(&mut rng, n);
            let slack: f64 = rng.random_range(0.0..0.5);
            let h = ConvexSet::halfspace(a.clone(), dot_unchecked(&a, &xbar) + slack)?;
            cons.push(Constraint::convex_set(h.projector())?);
        }
        let ball = ConvexSet::ball(gaussian_signal(&mut rng, n), 0.5)?;
        cons.push(Constraint::prescription(
            ball.projector(),
            ball.project(&xbar),
        )?);
        let a = gaussian_signal(&mut rng, n);
        cons.push(Constraint::affine(
            ConvexSet::hyperplane(a.clone(), dot_unchecked(&a, &xbar))?.projector(),
        )?);
        let family = vec![AffineSelector::Constraint(cons.len() - 1)];
        let problem = Problem::new(gaussian_signal(&mut rng, n).scale(3.0), cons, family)?;
        let control = ControlConfig {
            max_iter: 300,
            relaxation: if k % 2 == 0 {
                RelaxationRule::UpperBound
            } else {
                RelaxationRule::Alternating
            },
            keep_records: false,
            ..ControlConfig::default()
        };
        let mut monitor = TrajectoryMonitor::new();
        Solver::new(&problem, &control)?.run_with(|_, _, rec| monitor.observe(rec))?;
        // x̄ is feasible, so the limit is no farther from x0 than x̄
        if !monitor.holds(xbar.distance_sq(problem.x0()), 1e-10, 1e-9) {
            bad += 1;
        }
    }
    Ok(SuiteResult::new(
        "trajectory_invariants",
        bad == 0,
        format!("{problems} random problems, {bad} with violations"),
    ))
}

/// Runs every suite. `trials` sets the number of random draws per check.
pub fn run_suites(seed: u64, trials: usize) -> Result<Vec<SuiteResult>> {
    let trials = trials.max(1);
    Ok(vec![
        fne_suite(seed, trials)?,
        negative_suite(seed, trials),
        haugazeau_suite(seed, trials)?,
        isotonic_suite(seed, trials),
        prescription_suite(seed)?,
        trajectory_suite(seed, (trials / 50).clamp(4, 40))?,
    ])
}
