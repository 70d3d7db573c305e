//! Interior source `q`, initial data `I0` and inflow data `I1`, and the
//! [`Problem`] bundle consumed by the solvers.

use std::fmt;
use std::sync::Arc;

use crate::error::SolverError;
use crate::phase::PhaseFunction;
use crate::phase_space::{Direction, Field, Grid, Medium, SampledMedium};

pub type PhaseSpaceClosure = Arc<dyn Fn(f64, &[f64], &Direction) -> f64 + Send + Sync>;

/// A scalar function of `(t, x, xi)`.
#[derive(Clone, Default)]
pub enum PhaseSpaceFn {
    #[default]
    Zero,
    Constant(f64),
    Function {
        f: PhaseSpaceClosure,
        time_independent: bool,
    },
}

impl fmt::Debug for PhaseSpaceFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseSpaceFn::Zero => write!(f, "Zero"),
            PhaseSpaceFn::Constant(v) => write!(f, "Constant({v})"),
            PhaseSpaceFn::Function {
                time_independent, ..
            } => write!(f, "Function {{ time_independent: {time_independent} }}"),
        }
    }
}

impl PhaseSpaceFn {
    pub fn function(f: impl Fn(f64, &[f64], &Direction) -> f64 + Send + Sync + 'static) -> Self {
        PhaseSpaceFn::Function {
            f: Arc::new(f),
            time_independent: false,
        }
    }

    pub fn steady(f: impl Fn(&[f64], &Direction) -> f64 + Send + Sync + 'static) -> Self {
        PhaseSpaceFn::Function {
            f: Arc::new(move |_t, x, d| f(x, d)),
            time_independent: true,
        }
    }

    pub fn eval(&self, t: f64, x: &[f64], d: &Direction) -> f64 {
        match self {
            PhaseSpaceFn::Zero => 0.0,
            PhaseSpaceFn::Constant(v) => *v,
            PhaseSpaceFn::Function { f, .. } => f(t, x, d),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PhaseSpaceFn::Zero) || matches!(self, PhaseSpaceFn::Constant(v) if *v == 0.0)
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            PhaseSpaceFn::Function {
                time_independent, ..
            } => *time_independent,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Sources {
    /// Interior source `q(t, x, xi)`.
    pub q: PhaseSpaceFn,
    /// Initial data `I0(x, xi)`; the time argument is always 0.
    pub initial: PhaseSpaceFn,
    /// Inflow data `I1(t, x, xi)` on `Gamma_-`.
    pub inflow: PhaseSpaceFn,
}

/// A complete discrete problem.
#[derive(Debug, Clone)]
pub struct Problem<const D: usize> {
    pub grid: Grid<D>,
    pub medium: Medium,
    pub phase: PhaseFunction,
    pub sources: Sources,
}

impl<const D: usize> Problem<D> {
    pub fn new(grid: Grid<D>, medium: Medium, phase: PhaseFunction, sources: Sources) -> Self {
        assert_eq!(phase.dimension(), D, "phase function dimension mismatch");
        Problem {
            grid,
            medium,
            phase,
            sources,
        }
    }

    pub fn sample_medium(&self) -> Result<SampledMedium, SolverError> {
        Ok(self.medium.sample(&self.grid)?)
    }

    /// `I^0`: `I0` at interior nodes and `I1(0)` on the inflow boundary.
    pub fn initial_field(&self) -> Field {
        let g = &self.grid;
        let mut f = Field::zeros(g);
        if !self.sources.initial.is_zero() {
            for &s in g.interior() {
                let x = g.node_position(s);
                for (n, d) in g.directions().iter().enumerate() {
                    f.set(s, n, self.sources.initial.eval(0.0, &x, d));
                }
            }
        }
        self.write_inflow(&mut f, 0.0);
        f
    }

    /// Samples `I1(t)` at every inflow point, in inflow-set order.
    pub fn inflow_values(&self, t: f64) -> Vec<f64> {
        let g = &self.grid;
        g.inflow()
            .points()
            .iter()
            .map(|p| {
                let x = g.node_position(p.node);
                self.sources.inflow.eval(t, &x, &g.directions()[p.direction])
            })
            .collect()
    }

    pub fn write_inflow(&self, field: &mut Field, t: f64) {
        if self.sources.inflow.is_zero() {
            for p in self.grid.inflow().points() {
                field.set(p.node, p.direction, 0.0);
            }
            return;
        }
        let values = self.inflow_values(t);
        for (p, v) in self.grid.inflow().points().iter().zip(values) {
            field.set(p.node, p.direction, v);
        }
    }

    /// `q(t)` at interior entries of a storage-shaped vector.
    pub fn sample_q(&self, t: f64) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; g.storage_len()];
        if self.sources.q.is_zero() {
            return out;
        }
        let ndir = g.direction_count();
        for &s in g.interior() {
            let x = g.node_position(s);
            for (n, d) in g.directions().iter().enumerate() {
                out[s * ndir + n] = self.sources.q.eval(t, &x, d);
            }
        }
        out
    }

    /// Rejects a starting field whose inflow entries disagree with `I1(0)`.
    pub fn check_compatible(&self, field: &Field) -> Result<(), SolverError> {
        let g = &self.grid;
        let expected = self.inflow_values(0.0);
        for (p, want) in g.inflow().points().iter().zip(expected) {
            let got = field.get(p.node, p.direction);
            let scale = want.abs().max(got.abs()).max(1.0);
            if (got - want).abs() > 1e-12 * scale {
                return Err(SolverError::Incompatible {
                    node: g.node_coords(p.node).to_vec(),
                    direction: p.direction,
                    initial: got,
                    inflow: want,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{Grid2D, GridConfig2D};

    fn problem(sources: Sources) -> Problem<2> {
        let grid = Grid2D::new(&GridConfig2D {
            lengths: [1.0, 1.0],
            cells: [4, 4],
            directions: 8,
            dt: 0.1,
            t_final: 1.0,
        })
        .unwrap();
        Problem::new(
            grid,
            Medium::uniform(1.0, 0.1, 1.0),
            PhaseFunction::isotropic(2),
            sources,
        )
    }

    #[test]
    fn initial_field_combines_interior_and_inflow() {
        let p = problem(Sources {
            initial: PhaseSpaceFn::Constant(2.0),
            inflow: PhaseSpaceFn::Constant(3.0),
            ..Default::default()
        });
        let f = p.initial_field();
        let g = &p.grid;
        assert_eq!(f.get(g.interior()[0], 4), 2.0);
        let pt = g.inflow().points()[0];
        assert_eq!(f.get(pt.node, pt.direction), 3.0);
        assert_eq!(f.get(g.node_index(&[4, 2]), 0), 0.0);
        assert!(p.check_compatible(&f).is_ok());
        let mut bad = f.clone();
        bad.set(pt.node, pt.direction, 1.0);
        assert!(matches!(
            p.check_compatible(&bad),
            Err(SolverError::Incompatible { .. })
        ));
    }

    #[test]
    fn time_independence_flags() {
        assert!(PhaseSpaceFn::Zero.is_time_independent());
        assert!(PhaseSpaceFn::steady(|x, _| x[0]).is_time_independent());
        assert!(!PhaseSpaceFn::function(|t, _, _| t).is_time_independent());
        assert!(PhaseSpaceFn::Constant(0.0).is_zero());
    }

    #[test]
    fn q_is_sampled_on_interior_only() {
        let p = problem(Sources {
            q: PhaseSpaceFn::function(|t, x, d| t + x[0] + d.xi[0]),
            ..Default::default()
        });
        let q = p.sample_q(0.5);
        let g = &p.grid;
        let s = g.node_index(&[1, 2]);
        assert!((q[s * 8] - (0.5 + 0.25 + 1.0)).abs() < 1e-15);
        assert_eq!(q[g.node_index(&[0, 2]) * 8 + 1], 0.0);
    }
}
