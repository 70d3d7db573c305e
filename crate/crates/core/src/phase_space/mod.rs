//! Grids, grid functions, media and the discrete inflow boundary for 2D and
//! 3D rectangular phase spaces.

mod field;
mod grid;
mod inflow;
mod medium;

pub use field::{sup_norm, Field};
pub use grid::{
    AngularLayout, Direction, Grid, Grid2D, Grid3D, GridConfig2D, GridConfig3D, QuadratureNode,
};
pub use inflow::{classify_inflow, InflowPoint, InflowSet};
pub use medium::{
    Coefficient, DeclaredBounds, Medium, MediumBounds, SampledMedium, SpatialFn,
    DECLARED_BOUND_RTOL,
};
