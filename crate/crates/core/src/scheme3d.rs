//! Three-dimensional specifics: the polar/azimuthal resolution condition,
//! spherical row sums and 3D entry points to the shared drivers.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::SolverError;
use crate::phase::{scattering_row_sum, ConditionResult, PhaseFunction, SUP_SAFETY};
use crate::phase_space::{Field, Grid3D, MediumBounds};
use crate::sources::Problem;
use crate::stationary::{solve_stationary, SteadyOptions, SteadyResult};
use crate::transient::{run_transient, stability_report, StabilityReport, TransientOptions, TransientResult};

pub type StabilityReport3D = StabilityReport;

/// Samples of the sphere used for the sups in the angular condition.
pub const THETA_SAMPLES: usize = 512;
pub const PHI_SAMPLES: usize = 512;
/// Representative directions `xi = (sin b, 0, cos b)` for `b = k pi / BETA_SAMPLES`.
pub const BETA_SAMPLES: usize = 32;

/// `sup |d^2/dtheta^2 (p sin theta)|` and `sup |d^2/dphi^2 (p sin theta)|`
/// for `p = p(xi, xi'(theta, phi))`, with `xi` at polar angle `beta`.
pub fn angular_second_derivative_sups(pf: &PhaseFunction, beta: f64) -> (f64, f64) {
    let (sb, cb) = beta.sin_cos();
    let x = [0.0; 3];
    let closed = pf.cos_derivatives(0.0).is_some();
    let fd_h = 1e-4;
    let g = |th: f64, ph: f64| {
        let u = (sb * th.sin() * ph.cos() + cb * th.cos()).clamp(-1.0, 1.0);
        pf.eval(&x, u.acos()) * th.sin()
    };
    (0..=THETA_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let th = PI * i as f64 / THETA_SAMPLES as f64;
            let (st, ct) = th.sin_cos();
            let mut best = (0.0f64, 0.0f64);
            for j in 0..PHI_SAMPLES {
                let ph = 2.0 * PI * j as f64 / PHI_SAMPLES as f64;
                let (sp, cp) = ph.sin_cos();
                let (d_th, d_ph) = if closed {
                    let u = sb * st * cp + cb * ct;
                    let [p, p1, p2] = pf.cos_derivatives(u).unwrap();
                    let u_t = sb * ct * cp - cb * st;
                    let u_tt = -u;
                    let u_p = -sb * st * sp;
                    let u_pp = -sb * st * cp;
                    (
                        p2 * u_t * u_t * st + p1 * u_tt * st + 2.0 * p1 * u_t * ct - p * st,
                        st * (p2 * u_p * u_p + p1 * u_pp),
                    )
                } else {
                    let c = g(th, ph);
                    (
                        (g(th + fd_h, ph) - 2.0 * c + g(th - fd_h, ph)) / (fd_h * fd_h),
                        (g(th, ph + fd_h) - 2.0 * c + g(th, ph - fd_h)) / (fd_h * fd_h),
                    )
                };
                best.0 = best.0.max(d_th.abs());
                best.1 = best.1.max(d_ph.abs());
            }
            best
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
}

/// `dtheta^2 S_theta + (dphi^2 / 2) S_phi <= (6 / pi^2) mu*`.
pub fn theta_phi_condition(pf: &PhaseFunction, dtheta: f64, dphi: f64, mu_star: f64) -> ConditionResult {
    let (s_th, s_ph) = (0..=BETA_SAMPLES / 2)
        .map(|k| angular_second_derivative_sups(pf, PI * k as f64 / BETA_SAMPLES as f64))
        .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let lhs = SUP_SAFETY * (dtheta * dtheta * s_th + 0.5 * dphi * dphi * s_ph);
    let bound = 6.0 / (PI * PI) * mu_star;
    ConditionResult {
        name: "theta_phi",
        applicable: true,
        lhs,
        bound,
        pass: lhs <= bound,
        strict_pass: lhs < bound,
        margin: bound - lhs,
        threshold: None,
        min_directions: None,
        note: None,
    }
}

/// CFL and polar/azimuthal conditions for a 3D grid.
pub fn check_stability_3d(grid: &Grid3D, bounds: &MediumBounds, pf: &PhaseFunction) -> StabilityReport3D {
    stability_report(grid, bounds, pf)
}

/// `dtheta dphi sum_mu sum_nu p(xi_mn, xi_{mu nu}) sin theta_mu`.
pub fn spherical_row_sum(pf: &PhaseFunction, grid: &Grid3D, m: usize, n: usize) -> f64 {
    scattering_row_sum(pf, grid, grid.direction_index(m, n))
}

pub fn step_3d(problem: &Problem<3>, field: &Field) -> Result<Field, SolverError> {
    crate::transient::step(problem, field)
}

pub fn run_transient_3d(problem: &Problem<3>, options: &TransientOptions) -> Result<TransientResult, SolverError> {
    run_transient(problem, options)
}

pub fn solve_stationary_3d(problem: &Problem<3>, options: &SteadyOptions) -> Result<SteadyResult, SolverError> {
    solve_stationary(problem, options)
}
