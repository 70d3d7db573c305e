//! Explicit time marching with stability gating, positivity tracking and
//! the a-priori sup-norm bound.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::SolverError;
use crate::operators::OperatorWorkspace;
use crate::phase::{check_theta_condition_analytic, check_theta_condition_c2, ConditionResult, PhaseFunction};
use crate::phase_space::{sup_norm, AngularLayout, Field, Grid, Grid2D, MediumBounds, SampledMedium};
use crate::scheme3d::theta_phi_condition;
use crate::sources::Problem;

pub use crate::operators::integrated_intensity;

/// Relative slack allowed when checking the a-priori bound.
pub const BOUND_RTOL: f64 = 1e-12;

/// Sufficient stability conditions evaluated on the actual grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub dimension: usize,
    pub bounds: MediumBounds,
    /// `c+ dt sum_a 1/dx_a`.
    pub cfl_lhs: f64,
    pub cfl_pass: bool,
    pub cfl_margin: f64,
    /// Angular-resolution conditions; either one passing suffices.
    pub theta_conditions: Vec<ConditionResult>,
    pub theta_pass: bool,
    pub overall_pass: bool,
    /// `sup p~ dtheta <= 1`, a hypothesis of the stationary iteration (2D only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_sup: Option<ConditionResult>,
}

impl StabilityReport {
    /// Smallest `lhs/bound` over the angular conditions that hold strictly.
    pub fn lambda(&self) -> Option<f64> {
        self.theta_conditions
            .iter()
            .filter(|c| c.applicable && c.strict_pass)
            .map(ConditionResult::fraction)
            .reduce(f64::min)
    }

    pub fn failure_reason(&self) -> Option<String> {
        let mut parts = Vec::new();
        if !self.cfl_pass {
            parts.push(format!("CFL sum {:.6} exceeds 1", self.cfl_lhs));
        }
        if !self.theta_pass {
            let detail: Vec<String> = self
                .theta_conditions
                .iter()
                .map(|c| {
                    if c.applicable {
                        format!("{}: {:.6e} > {:.6e}", c.name, c.lhs, c.bound)
                    } else {
                        format!("{}: inapplicable", c.name)
                    }
                })
                .collect();
            parts.push(format!("angular resolution too coarse ({})", detail.join(", ")));
        }
        (!parts.is_empty()).then(|| parts.join("; "))
    }
}

/// CFL and angular conditions for a grid of either dimension.
pub fn stability_report<const D: usize>(
    grid: &Grid<D>,
    bounds: &MediumBounds,
    pf: &PhaseFunction,
) -> StabilityReport {
    let cfl_lhs: f64 = grid
        .spacing()
        .iter()
        .map(|dx| bounds.c_plus * grid.dt() / dx)
        .sum();
    let mu_star = bounds.mu_star;
    let (theta_conditions, kernel_sup) = match grid.layout() {
        AngularLayout::Circle { m, dtheta } => {
            let mut conds = vec![check_theta_condition_c2(pf, dtheta, mu_star)];
            // the analytic check only errors for r >= 1, which construction forbids
            if let Ok(c) = check_theta_condition_analytic(pf, m, mu_star) {
                conds.push(c);
            }
            let sup = pf.sup_value();
            let ks = ConditionResult {
                name: "kernel_sup",
                applicable: true,
                lhs: sup * dtheta,
                bound: 1.0,
                pass: sup * dtheta <= 1.0,
                strict_pass: sup * dtheta < 1.0,
                margin: 1.0 - sup * dtheta,
                threshold: None,
                min_directions: Some(((sup * 2.0 * PI).ceil() as usize).max(1)),
                note: None,
            };
            (conds, Some(ks))
        }
        AngularLayout::Sphere { dtheta, dphi, .. } => {
            (vec![theta_phi_condition(pf, dtheta, dphi, mu_star)], None)
        }
    };
    let theta_pass = theta_conditions.iter().any(|c| c.applicable && c.pass);
    let cfl_pass = cfl_lhs <= 1.0;
    StabilityReport {
        dimension: D,
        bounds: *bounds,
        cfl_lhs,
        cfl_pass,
        cfl_margin: 1.0 - cfl_lhs,
        theta_conditions,
        theta_pass,
        overall_pass: cfl_pass && theta_pass,
        kernel_sup,
    }
}

/// Stability report for a 2D problem.
pub fn check_stability(grid: &Grid2D, bounds: &MediumBounds, pf: &PhaseFunction) -> StabilityReport {
    stability_report(grid, bounds, pf)
}

/// Precomputed explicit update
/// `(1 + c dt (mu_s + mu_a)) I^{k+1} = (1 - c dt sum|xi_a|/dx_a) I^k + c dt (B I^k + K I^k + q^k)`.
pub struct Stepper<'a, const D: usize> {
    problem: &'a Problem<D>,
    ws: OperatorWorkspace,
    cdt: Vec<f64>,
    inv_denom: Vec<f64>,
    q_cache: Option<Vec<f64>>,
    inflow_cache: Option<Vec<f64>>,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Max `|q^k|` over interior samples.
    pub q_sup: f64,
}

impl<'a, const D: usize> Stepper<'a, D> {
    pub fn new(problem: &'a Problem<D>, medium: SampledMedium) -> Self {
        let grid = &problem.grid;
        let dt = grid.dt();
        let cdt: Vec<f64> = medium.c.iter().map(|c| c * dt).collect();
        let inv_denom = (0..grid.node_count())
            .map(|s| 1.0 / (1.0 + cdt[s] * (medium.mu_s[s] + medium.mu_a[s])))
            .collect();
        let ws = OperatorWorkspace::new(grid, medium, &problem.phase);
        let q = &problem.sources.q;
        let q_cache = (q.is_time_independent() && !q.is_zero()).then(|| problem.sample_q(0.0));
        let inflow_cache = problem
            .sources
            .inflow
            .is_time_independent()
            .then(|| problem.inflow_values(0.0));
        Stepper {
            problem,
            ws,
            cdt,
            inv_denom,
            q_cache,
            inflow_cache,
        }
    }

    pub fn workspace(&self) -> &OperatorWorkspace {
        &self.ws
    }

    /// Advances level `k` in `cur` to level `k+1` in `next`.
    pub fn step(&self, cur: &Field, next: &mut Field, k: usize) -> Result<StepInfo, SolverError> {
        let grid = &self.problem.grid;
        let ndir = grid.direction_count();
        let t = grid.time(k);
        let v = cur.values();
        let ws = &self.ws;
        let q_fn = &self.problem.sources.q;
        let q_zero = q_fn.is_zero();
        let dirs = grid.directions();

        let q_sup = next
            .values_mut()
            .par_chunks_mut(ndir)
            .enumerate()
            .map_init(
                || vec![0.0; ndir],
                |scatter, (s, out)| {
                    if !ws.is_interior(s) {
                        out.fill(0.0);
                        return 0.0;
                    }
                    ws.scatter_node(s, cur.at_node(s), scatter);
                    let cdt = self.cdt[s];
                    let inv = self.inv_denom[s];
                    let x = ws.position(s);
                    let mut q_sup: f64 = 0.0;
                    for n in 0..ndir {
                        let q = if q_zero {
                            0.0
                        } else if let Some(c) = &self.q_cache {
                            c[s * ndir + n]
                        } else {
                            q_fn.eval(t, x, &dirs[n])
                        };
                        q_sup = q_sup.max(q.abs());
                        let own = (1.0 - cdt * ws.removal(n)) * v[s * ndir + n];
                        let b = ws.upwind_sum(v, s, n);
                        out[n] = (own + cdt * (b + scatter[n] + q)) * inv;
                    }
                    q_sup
                },
            )
            .reduce(|| 0.0, f64::max);

        match &self.inflow_cache {
            Some(vals) => {
                for (p, &val) in grid.inflow().points().iter().zip(vals) {
                    next.set(p.node, p.direction, val);
                }
            }
            None => self.problem.write_inflow(next, grid.time(k + 1)),
        }
        next.set_level(k + 1);

        if let Some(i) = next.values().iter().position(|x| !x.is_finite()) {
            return Err(SolverError::NonFinite {
                step: k + 1,
                node: grid.node_coords(i / ndir).to_vec(),
                direction: i % ndir,
            });
        }
        Ok(StepInfo { q_sup })
    }
}

/// One explicit step from `field` (at level `field.level()`).
pub fn step<const D: usize>(problem: &Problem<D>, field: &Field) -> Result<Field, SolverError> {
    let stepper = Stepper::new(problem, problem.sample_medium()?);
    let mut next = Field::zeros(&problem.grid);
    stepper.step(field, &mut next, field.level())?;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct TransientOptions {
    /// Step indices `k` at which to keep a copy of `I^k`.
    pub snapshot_steps: Vec<usize>,
    /// Refuse to run when the stability report fails.
    pub enforce_stability: bool,
    /// Starting field; defaults to `I0` with `I1(0)` on the inflow boundary.
    pub initial: Option<Field>,
}

impl Default for TransientOptions {
    fn default() -> Self {
        TransientOptions {
            snapshot_steps: Vec::new(),
            enforce_stability: true,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub mean_step_seconds: f64,
    pub max_step_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TransientResult {
    pub final_field: Field,
    pub snapshots: Vec<Field>,
    /// `||I^k||_inf` for `k = 0..=steps`.
    pub sup_history: Vec<f64>,
    /// `||I0|| + max_j<=k ||I1^j|| + c+ max_j<k ||q^j|| t_k`.
    pub bound_history: Vec<f64>,
    pub bound_holds: bool,
    pub first_bound_violation: Option<usize>,
    /// Every interior and inflow value stayed non-negative.
    pub positive: bool,
    pub min_value: f64,
    pub report: StabilityReport,
    pub steps: usize,
    pub timing: Timing,
}

/// Marches from `t = 0` to `T`.
pub fn run_transient<const D: usize>(
    problem: &Problem<D>,
    options: &TransientOptions,
) -> Result<TransientResult, SolverError> {
    let grid = &problem.grid;
    let medium = problem.sample_medium()?;
    let report = stability_report(grid, &medium.bounds, &problem.phase);
    if options.enforce_stability && !report.overall_pass {
        return Err(SolverError::StabilityRefused {
            reason: report.failure_reason().unwrap_or_default(),
            report: Box::new(report),
        });
    }
    let steps = grid.step_count()?;
    if grid.interior().is_empty() || grid.direction_count() == 0 {
        return Err(SolverError::Degenerate);
    }
    let c_plus = medium.bounds.c_plus;
    let stepper = Stepper::new(problem, medium);

    let mut cur = match &options.initial {
        Some(f) => {
            problem.check_compatible(f)?;
            let mut f = f.clone();
            f.set_level(0);
            f
        }
        None => problem.initial_field(),
    };
    let mut next = Field::zeros(grid);

    let i0_norm = cur.interior_sup(grid);
    let mut i1_norm = cur.inflow_sup(grid);
    let mut q_norm: f64 = 0.0;
    let mut sup_history = Vec::with_capacity(steps + 1);
    let mut bound_history = Vec::with_capacity(steps + 1);
    let mut first_bound_violation = None;
    let mut min_value = cur.min_value(grid);
    let mut snapshots = Vec::new();

    let mut record = |k: usize, f: &Field, i1: f64, q: f64, violation: &mut Option<usize>| {
        let norm = sup_norm(f, grid);
        let bound = i0_norm + i1 + c_plus * q * grid.time(k);
        if norm > bound * (1.0 + BOUND_RTOL) + f64::MIN_POSITIVE && violation.is_none() {
            *violation = Some(k);
        }
        sup_history.push(norm);
        bound_history.push(bound);
    };
    record(0, &cur, i1_norm, q_norm, &mut first_bound_violation);
    if options.snapshot_steps.contains(&0) {
        snapshots.push(cur.clone());
    }

    let start = Instant::now();
    let mut max_step: f64 = 0.0;
    for k in 0..steps {
        let t0 = Instant::now();
        let info = stepper.step(&cur, &mut next, k)?;
        max_step = max_step.max(t0.elapsed().as_secs_f64());
        std::mem::swap(&mut cur, &mut next);
        q_norm = q_norm.max(info.q_sup);
        i1_norm = i1_norm.max(cur.inflow_sup(grid));
        min_value = min_value.min(cur.min_value(grid));
        record(k + 1, &cur, i1_norm, q_norm, &mut first_bound_violation);
        if options.snapshot_steps.contains(&(k + 1)) {
            snapshots.push(cur.clone());
        }
    }
    let total = start.elapsed().as_secs_f64();

    Ok(TransientResult {
        final_field: cur,
        snapshots,
        sup_history,
        bound_history,
        bound_holds: first_bound_violation.is_none(),
        first_bound_violation,
        positive: min_value >= 0.0,
        min_value,
        report,
        steps,
        timing: Timing {
            total_seconds: total,
            mean_step_seconds: if steps > 0 { total / steps as f64 } else { 0.0 },
            max_step_seconds: max_step,
        },
    })
}
