use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use super::manufactured::{manufactured_problem, ManufacturedSolution};
use crate::error::{ConfigError, SolverError};
use crate::phase::PhaseFunction;
use crate::phase_space::{AngularLayout, Grid, Grid2D, Grid3D, GridConfig2D, GridConfig3D, Medium};
use crate::transient::{run_transient, TransientOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// `dt` and `dx` halved together at fixed ratio.
    SpaceTime,
    /// Angular resolution refined on a fixed space-time grid.
    Angular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyLevel {
    pub level: usize,
    pub dt: f64,
    pub dx: Vec<f64>,
    pub dtheta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dphi: Option<f64>,
    pub directions: usize,
    /// `max |I(T) - I^K|` over interior and inflow points.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub kind: StudyKind,
    pub levels: Vec<StudyLevel>,
    /// Least-squares slope of `log error` against `log h` on the last three levels.
    pub order: Option<f64>,
    pub monotone: bool,
    /// Every error is exactly zero, so no order can be fitted.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ConvergenceStudy {
    /// `h` used for the fit: `dx_1` or `dtheta`.
    pub fn step_sizes(&self) -> Vec<f64> {
        self.levels
            .iter()
            .map(|l| match self.kind {
                StudyKind::SpaceTime => l.dx[0],
                StudyKind::Angular => l.dtheta,
            })
            .collect()
    }

    /// `level,dt,dx1,..,dtheta[,dphi],error` with one row per level.
    pub fn to_csv(&self) -> String {
        let dims = self.levels.first().map_or(0, |l| l.dx.len());
        let has_phi = self.levels.iter().any(|l| l.dphi.is_some());
        let mut s = String::from("level,dt");
        for a in 0..dims {
            let _ = write!(s, ",dx{}", a + 1);
        }
        s.push_str(",dtheta");
        if has_phi {
            s.push_str(",dphi");
        }
        s.push_str(",error\n");
        for l in &self.levels {
            let _ = write!(s, "{},{:.16e}", l.level, l.dt);
            for dx in &l.dx {
                let _ = write!(s, ",{dx:.16e}");
            }
            let _ = write!(s, ",{:.16e}", l.dtheta);
            if let Some(p) = l.dphi {
                let _ = write!(s, ",{p:.16e}");
            }
            let _ = writeln!(s, ",{:.16e}", l.error);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study serializes")
    }
}

/// Slope of the least-squares line through `(ln h, ln e)`.
pub fn fit_order(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|(_, e)| **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn level_info<const D: usize>(grid: &Grid<D>, level: usize, error: f64) -> StudyLevel {
    let (dtheta, dphi) = match grid.layout() {
        AngularLayout::Circle { dtheta, .. } => (dtheta, None),
        AngularLayout::Sphere { dtheta, dphi, .. } => (dtheta, Some(dphi)),
    };
    StudyLevel {
        level,
        dt: grid.dt(),
        dx: grid.spacing().to_vec(),
        dtheta,
        dphi,
        directions: grid.direction_count(),
        error,
    }
}

/// Runs each grid to `T` against the manufactured solution and fits the order.
pub fn run_convergence_study<const D: usize>(
    sol: Arc<dyn ManufacturedSolution<D>>,
    grids: Vec<Grid<D>>,
    medium: &Medium,
    pf: &PhaseFunction,
    kind: StudyKind,
) -> Result<ConvergenceStudy, SolverError> {
    if kind == StudyKind::SpaceTime {
        let ratio = |g: &Grid<D>| g.spacing().map(|dx| g.dt() / dx);
        if let Some(first) = grids.first().map(ratio) {
            for g in &grids {
                let r = ratio(g);
                if (0..D).any(|a| (r[a] - first[a]).abs() > 1e-12 * first[a]) {
                    return Err(ConfigError::invalid(
                        "levels",
                        "dt/dx ratios must be identical across levels",
                    )
                    .into());
                }
            }
        }
    }
    let mut levels = Vec::with_capacity(grids.len());
    for (i, grid) in grids.into_iter().enumerate() {
        let t_final = grid.t_final();
        let problem = manufactured_problem(sol.clone(), grid, medium.clone(), pf.clone());
        let result = run_transient(&problem, &TransientOptions::default())?;
        let g = &problem.grid;
        let f = &result.final_field;
        let mut err: f64 = 0.0;
        let mut check = |node: usize, n: usize| {
            let exact = sol.value(t_final, &g.node_position(node), &g.directions()[n]);
            err = err.max((f.get(node, n) - exact).abs());
        };
        for &s in g.interior() {
            for n in 0..g.direction_count() {
                check(s, n);
            }
        }
        for p in g.inflow().points() {
            check(p.node, p.direction);
        }
        levels.push(level_info(g, i, err));
    }

    let degenerate = levels.iter().all(|l| l.error == 0.0);
    let monotone = levels.windows(2).all(|w| w[1].error <= w[0].error);
    let mut study = ConvergenceStudy {
        kind,
        levels,
        order: None,
        monotone,
        degenerate,
        warning: None,
    };
    if degenerate {
        study.warning = Some("all errors are zero; order undefined".into());
        return Ok(study);
    }
    let h = study.step_sizes();
    let e: Vec<f64> = study.levels.iter().map(|l| l.error).collect();
    let from = h.len().saturating_sub(3);
    study.order = fit_order(&h[from..], &e[from..]);
    if !monotone {
        study.warning = Some("errors are not monotone under refinement".into());
    }
    Ok(study)
}

/// `levels` grids halving `dx` and `dt` together from `base`.
pub fn space_time_grids_2d(base: &GridConfig2D, levels: usize) -> Result<Vec<Grid2D>, ConfigError> {
    (0..levels)
        .map(|l| {
            let f = 1usize << l;
            Grid2D::new(&GridConfig2D {
                cells: base.cells.map(|c| c * f),
                dt: base.dt / f as f64,
                ..base.clone()
            })
        })
        .collect()
}

/// Grids refining only the direction count.
pub fn angular_grids_2d(base: &GridConfig2D, directions: &[usize]) -> Result<Vec<Grid2D>, ConfigError> {
    directions
        .iter()
        .map(|&m| {
            Grid2D::new(&GridConfig2D {
                directions: m,
                ..base.clone()
            })
        })
        .collect()
}

pub fn space_time_grids_3d(base: &GridConfig3D, levels: usize) -> Result<Vec<Grid3D>, ConfigError> {
    (0..levels)
        .map(|l| {
            let f = 1usize << l;
            Grid3D::new(&GridConfig3D {
                cells: base.cells.map(|c| c * f),
                dt: base.dt / f as f64,
                ..base.clone()
            })
        })
        .collect()
}

/// Grids refining `(polar, azimuthal)` counts.
pub fn angular_grids_3d(base: &GridConfig3D, counts: &[(usize, usize)]) -> Result<Vec<Grid3D>, ConfigError> {
    counts
        .iter()
        .map(|&(polar, azimuthal)| {
            Grid3D::new(&GridConfig3D {
                polar,
                azimuthal,
                ..base.clone()
            })
        })
        .collect()
}
