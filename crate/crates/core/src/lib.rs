//! Constrained dynamic optimal transport by augmented-Lagrangian iterations.
//!
//! The density path `ρ(t, x)` and momentum `m(t, x)` between two
//! nonnegative densities `ρ₀`, `ρ₁` of equal mass minimise the kinetic action
//! `∫∫ |m|²/(2ρ)` subject to `∂ₜρ + div m = 0` and a user-supplied convex
//! constraint on `(ρ, m)` (density bounds, fixed regions, congestion
//! penalties on the momentum).
//!
//! ```no_run
//! use cmot::{Algorithm, ConstraintSpec, GridSpec, SolverParams, SpaceBoundary, SpatialField, Solver, TransportProblem};
//!
//! let grid = GridSpec::unit(16, 32, 32, SpaceBoundary::Periodic).unwrap();
//! let bump = |cx: f64| SpatialField::from_fn(&grid, move |x, y| (-((x - cx).powi(2) + (y - 0.5).powi(2)) / 0.02).exp());
//! let problem = TransportProblem::new(grid, bump(0.3), bump(0.7), ConstraintSpec::unconstrained());
//! let solution = Solver::new(problem, SolverParams::default()).unwrap().run(Algorithm::Alg3).unwrap();
//! println!("energy {:.4e} after {} iterations", solution.energy, solution.iterations);
//! ```

pub mod cli;
pub mod constraint;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod operators;
pub mod poisson;
pub mod projection;
pub mod solver;

pub use constraint::{CompiledConstraint, ConstraintSpec, ConstraintTerm};
pub use diagnostics::{History, IterationRecord};
pub use error::{ConstraintError, GridError, OutputError, PoissonError, ProblemError, SolverError};
pub use field::{PairField, ScalarField, SpatialField};
pub use grid::{GridSpec, SpaceBoundary};
pub use projection::{project_k, PairPoint};
pub use solver::{Algorithm, Solution, Solver, SolverParams, SolverState, TransportProblem};
