//! Steady state of the discrete problem, reached by iterating the explicit
//! step with time-independent data until successive iterates agree.

use std::time::Instant;

use crate::error::{ConfigError, SolverError};
use crate::operators::{apply_a, apply_k, apply_sigma, OperatorWorkspace};
use crate::phase_space::Field;
use crate::sources::Problem;
use crate::transient::{stability_report, StabilityReport, Stepper, Timing};

/// Default stopping tolerance on `||I^k - I^{k-1}||_inf`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Geometric contraction rate
/// `rho = (1 + a dt (1/mu* + lambda)) / (1 + a dt (1/mu* + 1))` with `a = inf c mu_a`.
pub fn rho_bound(c_mua_minus: f64, mu_star: f64, dt: f64, lambda: f64) -> Result<f64, SolverError> {
    if !(c_mua_minus.is_finite() && c_mua_minus > 0.0) {
        return Err(ConfigError::NonPositive {
            field: "inf c mu_a".into(),
            value: c_mua_minus,
        }
        .into());
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ConfigError::NonPositive {
            field: "dt".into(),
            value: dt,
        }
        .into());
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(SolverError::Contraction(lambda));
    }
    let inv = 1.0 / mu_star;
    let a = c_mua_minus * dt;
    Ok((1.0 + a * (inv + lambda)) / (1.0 + a * (inv + 1.0)))
}

#[derive(Debug, Clone)]
pub struct SteadyOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Warm start; defaults to zero in the interior.
    pub initial: Option<Field>,
    pub enforce_stability: bool,
    /// Re-run the iteration to record `||I^k - J||_inf` against the final iterate.
    pub record_error: bool,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            tol: DEFAULT_TOL,
            max_iters: 200_000,
            initial: None,
            enforce_stability: true,
            record_error: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyResult {
    pub field: Field,
    pub iterations: usize,
    /// `||I^k - I^{k-1}||_inf` for `k = 1..=iterations`.
    pub residual_history: Vec<f64>,
    /// `||I^k - J||_inf` for `k = 0..=iterations`, when requested.
    pub error_history: Option<Vec<f64>>,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub converged: bool,
    pub tol: f64,
    /// `||I^k - I^{k-1}|| rho / (1 - rho)`, a bound on the distance to the steady state.
    pub error_proxy: Option<f64>,
    /// `||(A - Sigma + K) J + q||_inf` over interior points.
    pub steady_residual: f64,
    pub report: StabilityReport,
    pub timing: Timing,
}

impl SteadyResult {
    /// Successive ratios `r_{k+1} / r_k` of the residual history.
    pub fn residual_ratios(&self) -> Vec<f64> {
        self.residual_history
            .windows(2)
            .map(|w| w[1] / w[0])
            .collect()
    }

    /// Geometric mean of the ratios over the second half of the history.
    pub fn empirical_rate(&self) -> Option<f64> {
        let h = &self.residual_history;
        let tail: Vec<f64> = h[h.len() / 2..].iter().copied().filter(|v| *v > 0.0).collect();
        if tail.len() < 2 {
            return None;
        }
        let n = (tail.len() - 1) as f64;
        Some((tail[tail.len() - 1] / tail[0]).powf(1.0 / n))
    }
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Iterates the explicit step until `||I^k - I^{k-1}||_inf <= tol`.
pub fn solve_stationary<const D: usize>(
    problem: &Problem<D>,
    options: &SteadyOptions,
) -> Result<SteadyResult, SolverError> {
    let src = &problem.sources;
    if !src.q.is_time_independent() {
        return Err(SolverError::TimeDependent("q"));
    }
    if !src.inflow.is_time_independent() {
        return Err(SolverError::TimeDependent("inflow data"));
    }
    let grid = &problem.grid;
    if grid.interior().is_empty() || grid.direction_count() == 0 {
        return Err(SolverError::Degenerate);
    }
    let medium = problem.sample_medium()?;
    let bounds = medium.bounds;
    let report = stability_report(grid, &bounds, &problem.phase);
    let lambda = report.lambda();
    let rho = match lambda {
        Some(l) if bounds.c_mua_minus > 0.0 => Some(rho_bound(bounds.c_mua_minus, bounds.mu_star, grid.dt(), l)?),
        _ => None,
    };
    if options.enforce_stability {
        if bounds.c_mua_minus <= 0.0 {
            return Err(ConfigError::NonPositive {
                field: "inf c mu_a".into(),
                value: bounds.c_mua_minus,
            }
            .into());
        }
        let sup_ok = report.kernel_sup.as_ref().is_none_or(|c| c.pass);
        let reason = if !report.overall_pass {
            report.failure_reason()
        } else if lambda.is_none() {
            Some("no angular condition holds strictly".to_string())
        } else if !sup_ok {
            Some("sup p~ dtheta exceeds 1".to_string())
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(SolverError::StabilityRefused {
                reason,
                report: Box::new(report),
            });
        }
    }

    let stepper = Stepper::new(problem, medium);
    let start_field = match &options.initial {
        Some(f) => {
            problem.check_compatible(f)?;
            f.clone()
        }
        None => {
            let mut f = Field::zeros(grid);
            problem.write_inflow(&mut f, 0.0);
            f
        }
    };
    let mut cur = start_field.clone();
    let mut next = Field::zeros(grid);
    let mut history = Vec::new();
    let mut converged = false;
    let start = Instant::now();
    let mut max_step: f64 = 0.0;
    for k in 0..options.max_iters {
        let t0 = Instant::now();
        stepper.step(&cur, &mut next, k)?;
        max_step = max_step.max(t0.elapsed().as_secs_f64());
        let d = max_diff(&cur, &next);
        history.push(d);
        std::mem::swap(&mut cur, &mut next);
        if d <= options.tol {
            converged = true;
            break;
        }
    }
    let iterations = history.len();
    let total = start.elapsed().as_secs_f64();

    let error_history = if options.record_error {
        let mut e = Vec::with_capacity(iterations + 1);
        let mut a = start_field;
        let mut b = Field::zeros(grid);
        e.push(max_diff(&a, &cur));
        for k in 0..iterations {
            stepper.step(&a, &mut b, k)?;
            std::mem::swap(&mut a, &mut b);
            e.push(max_diff(&a, &cur));
        }
        Some(e)
    } else {
        None
    };

    let steady_residual = residual_with(&cur, problem, stepper.workspace());
    let last = history.last().copied().unwrap_or(0.0);
    Ok(SteadyResult {
        field: cur,
        iterations,
        residual_history: history,
        error_history,
        rho,
        lambda,
        converged,
        tol: options.tol,
        error_proxy: rho.map(|r| last * r / (1.0 - r)),
        steady_residual,
        report,
        timing: Timing {
            total_seconds: total,
            mean_step_seconds: if iterations > 0 { total / iterations as f64 } else { 0.0 },
            max_step_seconds: max_step,
        },
    })
}

fn residual_with<const D: usize>(field: &Field, problem: &Problem<D>, ws: &OperatorWorkspace) -> f64 {
    let a = apply_a(field, ws);
    let s = apply_sigma(field, ws);
    let k = apply_k(field, ws);
    let q = problem.sample_q(0.0);
    let ndir = problem.grid.direction_count();
    let mut sup: f64 = 0.0;
    for &node in problem.grid.interior() {
        for n in 0..ndir {
            let i = node * ndir + n;
            sup = sup.max((a[i] - s[i] + k[i] + q[i]).abs());
        }
    }
    sup
}

/// `||(A - Sigma + K) J + q||_inf` over interior points.
pub fn steady_residual<const D: usize>(field: &Field, problem: &Problem<D>) -> Result<f64, SolverError> {
    let ws = OperatorWorkspace::new(&problem.grid, problem.sample_medium()?, &problem.phase);
    Ok(residual_with(field, problem, &ws))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phantom_rate() {
        let rho = rho_bound(0.196 * 0.08, 0.08 / 1.09, 0.1, 0.003604 / (0.08 / 1.09)).unwrap();
        assert!((rho - 0.99854).abs() < 5e-6, "{rho}");
        assert!(rho >= 0.99807);
    }

    #[test]
    fn zero_lambda_limit() {
        let (a, m, dt) = (0.3, 0.5, 0.2);
        let rho = rho_bound(a, m, dt, 0.0).unwrap();
        assert!((rho - (1.0 + a * dt / m) / (1.0 + a * dt * (1.0 / m + 1.0))).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(rho_bound(1.0, 1.0, 1.0, 1.0), Err(SolverError::Contraction(_))));
        assert!(rho_bound(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(rho_bound(1.0, 1.0, 0.0, 0.5).is_err());
    }
}
