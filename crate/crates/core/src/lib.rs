//! Best approximation from convex constraints and prescribed proximal points.
//!
//! The crate is organised bottom-up:
//!
//! * [`signal`], [`operator`] and [`check`]: finite-dimensional vectors,
//!   operator objects tagged with their regularity class, and randomized
//!   checkers for firm nonexpansiveness and firm quasinonexpansiveness.
//! * [`catalog`]: concrete observation operators (thresholders, clipping
//!   maps, isotonic and ball projections, distance proxes, cocoercive
//!   aggregation, band-limiting, total-variation subgradient projection)
//!   and the transforms turning raw observations into equivalent proximal
//!   prescriptions `F x = p`.
//! * [`haugazeau`]: the closed-form projection of an anchor onto the
//!   intersection of two halfspaces, plus an enumeration oracle.
//! * [`solver`]: the block-iterative extrapolated best-approximation method
//!   and the classical periodic / parallel baselines.
//! * [`experiment`]: the band-limited signal recovery experiment, config
//!   parsing and CSV trace output.
//!
//! ```
//! use proxpoint::haugazeau::q_operator;
//! use proxpoint::Signal;
//!
//! let x0 = Signal::zeros(2);
//! let s = Signal::from(vec![1.0, 0.0]);
//! let t = Signal::from(vec![1.0, 1.0]);
//! let (x, _diag) = q_operator(&x0, &s, &t).unwrap();
//! assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
//! ```

pub mod catalog;
pub mod check;
pub mod error;
pub mod experiment;
pub mod haugazeau;
pub mod operator;
pub mod signal;
pub mod solver;
pub mod suite;

pub use error::{Error, Result};
pub use operator::{LinearMap, Operator, Regularity};
pub use signal::{dot, Signal};

/// Tolerance used for algebraic identities (adjoint tests, idempotence, ...).
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Tolerance used for results of iterative procedures.
pub const ITERATIVE_TOL: f64 = 1e-6;
