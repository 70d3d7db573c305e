//! Independent oracles: periodic trapezoid error measurement, manufactured
//! solutions, refinement studies and a dense assembly of the steady system.

pub mod convergence;
pub mod dense;
pub mod manufactured;
pub mod trapezoid;

pub use convergence::{run_convergence_study, ConvergenceStudy, StudyKind, StudyLevel};
pub use dense::{assemble_dense_system, DenseSystem, DENSE_CAP};
pub use manufactured::{manufactured_source, manufactured_problem, ManufacturedSolution};
pub use trapezoid::{analytic_kernel_bound, trapezoid_error, TrapezoidError};
