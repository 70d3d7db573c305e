//! Explicit upwind finite-difference solver for the time-dependent radiative
//! transport equation on rectangular 2D and 3D domains.
//!
//! The scheme advances
//! `c^-1 dI/dt + xi . grad I + (mu_a + mu_s) I = mu_s int p I' + q`
//! with first-order upwind transport, a removal term taken at the new time
//! level, and a trapezoidal angular quadrature for scattering. Stability,
//! positivity and the rate of convergence to the steady state are checked
//! against computable sufficient conditions before a run starts.

pub mod error;
pub mod io;
pub mod operators;
pub mod phase;
pub mod phase_space;
pub mod quadrature;
pub mod scheme3d;
pub mod sources;
pub mod stationary;
pub mod transient;
pub mod verification;

pub use error::{ConfigError, MediumError, PhaseError, SolverError};
pub use phase::{ConditionResult, PhaseFunction};
pub use phase_space::{Field, Grid2D, Grid3D, GridConfig2D, GridConfig3D, Medium};
pub use sources::{PhaseSpaceFn, Problem, Sources};
pub use stationary::{solve_stationary, SteadyOptions, SteadyResult};
pub use transient::{run_transient, StabilityReport, TransientOptions, TransientResult};
