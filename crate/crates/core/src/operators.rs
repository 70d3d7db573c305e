//! The discrete transport `A`, its off-diagonal part `B`, removal `Sigma`
//! and scattering `K` on grid functions of any dimension.

use rayon::prelude::*;

use crate::phase::PhaseFunction;
use crate::phase_space::{Direction, Field, Grid, SampledMedium};

/// One upwind neighbour read by `B` for a fixed direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpwindTerm {
    pub axis: usize,
    /// Node-index offset of the upwind neighbour (`-stride` or `+stride`).
    pub offset: isize,
    /// `|xi_a| / dx_a`.
    pub weight: f64,
}

/// Precomputed stencil and scattering data shared by all operator applications.
#[derive(Debug, Clone)]
pub struct OperatorWorkspace {
    ndir: usize,
    removal: Vec<f64>,
    upwind: Vec<Vec<UpwindTerm>>,
    quad_dirs: Vec<usize>,
    quad_weights: Vec<f64>,
    /// Row-major `ndir x nquad` matrix `w_q p(xi_n, xi_q)` for kernels that
    /// do not depend on position.
    shared: Option<Vec<f64>>,
    phase: PhaseFunction,
    directions: Vec<Direction>,
    interior_mask: Vec<bool>,
    positions: Vec<f64>,
    dim: usize,
    medium: SampledMedium,
}

impl OperatorWorkspace {
    pub fn new<const D: usize>(grid: &Grid<D>, medium: SampledMedium, phase: &PhaseFunction) -> Self {
        let ndir = grid.direction_count();
        let spacing = grid.spacing();
        let strides = grid.strides();
        let mut removal = Vec::with_capacity(ndir);
        let mut upwind = Vec::with_capacity(ndir);
        for d in grid.directions() {
            let mut terms = Vec::new();
            let mut r = 0.0;
            for a in 0..D {
                let xi = d.xi[a];
                if xi == 0.0 {
                    continue;
                }
                let weight = xi.abs() / spacing[a];
                r += weight;
                let offset = if xi > 0.0 {
                    -(strides[a] as isize)
                } else {
                    strides[a] as isize
                };
                terms.push(UpwindTerm {
                    axis: a,
                    offset,
                    weight,
                });
            }
            removal.push(r);
            upwind.push(terms);
        }

        let quad_dirs: Vec<usize> = grid.quadrature().iter().map(|q| q.direction).collect();
        let quad_weights: Vec<f64> = grid.quadrature().iter().map(|q| q.weight).collect();
        let directions = grid.directions().to_vec();
        let shared = phase.is_position_independent().then(|| {
            let x = [0.0; 3];
            let mut s = Vec::with_capacity(ndir * quad_dirs.len());
            for dn in &directions {
                for (&q, &w) in quad_dirs.iter().zip(&quad_weights) {
                    s.push(w * phase.eval_between(&x, dn, &directions[q]));
                }
            }
            s
        });

        let mut interior_mask = vec![false; grid.node_count()];
        for &s in grid.interior() {
            interior_mask[s] = true;
        }
        let positions = (0..grid.node_count())
            .flat_map(|s| grid.node_position(s))
            .collect();
        OperatorWorkspace {
            ndir,
            removal,
            upwind,
            quad_dirs,
            quad_weights,
            shared,
            phase: phase.clone(),
            directions,
            interior_mask,
            positions,
            dim: D,
            medium,
        }
    }

    pub fn direction_count(&self) -> usize {
        self.ndir
    }

    /// `sum_a |xi_{n,a}| / dx_a`.
    pub fn removal(&self, n: usize) -> f64 {
        self.removal[n]
    }

    pub fn upwind(&self, n: usize) -> &[UpwindTerm] {
        &self.upwind[n]
    }

    pub fn medium(&self) -> &SampledMedium {
        &self.medium
    }

    pub fn phase(&self) -> &PhaseFunction {
        &self.phase
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.interior_mask[node]
    }

    pub fn position(&self, node: usize) -> &[f64] {
        &self.positions[node * self.dim..(node + 1) * self.dim]
    }

    /// Quadrature weight times kernel value, `w_q p(x; xi_n, xi_q)`.
    pub fn scattering_entry(&self, node: usize, n: usize, q: usize) -> f64 {
        match &self.shared {
            Some(s) => s[n * self.quad_dirs.len() + q],
            None => {
                let d = &self.directions;
                self.quad_weights[q]
                    * self
                        .phase
                        .eval_between(self.position(node), &d[n], &d[self.quad_dirs[q]])
            }
        }
    }

    pub fn quadrature_directions(&self) -> &[usize] {
        &self.quad_dirs
    }

    /// `B` at one interior entry.
    #[inline]
    pub fn upwind_sum(&self, values: &[f64], node: usize, n: usize) -> f64 {
        let mut acc = 0.0;
        for t in &self.upwind[n] {
            let nb = (node as isize + t.offset) as usize;
            acc += t.weight * values[nb * self.ndir + n];
        }
        acc
    }

    /// `K` at one interior node: writes `mu_s sum_q w_q p(xi_n, xi_q) I_q`
    /// for every `n`, summing `q` in ascending order.
    pub fn scatter_node(&self, node: usize, local: &[f64], out: &mut [f64]) {
        let mu_s = self.medium.mu_s[node];
        if mu_s == 0.0 {
            out.fill(0.0);
            return;
        }
        let nq = self.quad_dirs.len();
        match &self.shared {
            Some(s) => {
                for (n, o) in out.iter_mut().enumerate() {
                    let row = &s[n * nq..(n + 1) * nq];
                    let mut acc = 0.0;
                    for (w, &q) in row.iter().zip(&self.quad_dirs) {
                        acc += w * local[q];
                    }
                    *o = mu_s * acc;
                }
            }
            None => {
                for (n, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for q in 0..nq {
                        acc += self.scattering_entry(node, n, q) * local[self.quad_dirs[q]];
                    }
                    *o = mu_s * acc;
                }
            }
        }
    }

    /// Runs `f(node, local_in, local_out)` over interior nodes in parallel;
    /// non-interior output entries are zero.
    fn map_interior(&self, field: &Field, f: impl Fn(usize, &mut [f64]) + Sync + Send) -> Vec<f64> {
        assert_eq!(field.direction_count(), self.ndir);
        let mut out = vec![0.0; field.values().len()];
        out.par_chunks_mut(self.ndir)
            .enumerate()
            .filter(|(s, _)| self.interior_mask[*s])
            .for_each(|(s, chunk)| f(s, chunk));
        out
    }
}

/// `A I = B I - (sum_a |xi_a|/dx_a) I`, the first-order upwind
/// approximation of `-xi . grad I`.
pub fn apply_a(field: &Field, ws: &OperatorWorkspace) -> Vec<f64> {
    let v = field.values();
    ws.map_interior(field, |s, out| {
        for (n, o) in out.iter_mut().enumerate() {
            *o = ws.upwind_sum(v, s, n) - ws.removal(n) * v[s * ws.ndir + n];
        }
    })
}

/// Upwind neighbour sum with non-negative weights.
pub fn apply_b(field: &Field, ws: &OperatorWorkspace) -> Vec<f64> {
    let v = field.values();
    ws.map_interior(field, |s, out| {
        for (n, o) in out.iter_mut().enumerate() {
            *o = ws.upwind_sum(v, s, n);
        }
    })
}

/// Trapezoidal scattering sum scaled by `mu_s`.
pub fn apply_k(field: &Field, ws: &OperatorWorkspace) -> Vec<f64> {
    ws.map_interior(field, |s, out| ws.scatter_node(s, field.at_node(s), out))
}

/// Pointwise `(mu_s + mu_a) I`.
pub fn apply_sigma(field: &Field, ws: &OperatorWorkspace) -> Vec<f64> {
    let m = ws.medium();
    ws.map_interior(field, |s, out| {
        let sigma = m.mu_s[s] + m.mu_a[s];
        for (o, v) in out.iter_mut().zip(field.at_node(s)) {
            *o = sigma * v;
        }
    })
}

/// Direction-integrated intensity `sum_q w_q I(x, xi_q)` at every node.
pub fn integrated_intensity<const D: usize>(field: &Field, grid: &Grid<D>) -> Vec<f64> {
    (0..grid.node_count())
        .map(|s| {
            let local = field.at_node(s);
            grid.quadrature()
                .iter()
                .map(|q| q.weight * local[q.direction])
                .sum()
        })
        .collect()
}
