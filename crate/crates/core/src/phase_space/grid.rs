use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::inflow::{classify_inflow, InflowSet};
use crate::error::ConfigError;

/// Direction components below this magnitude are snapped to zero, so that
/// `cos(pi/2)` and friends are exactly tangential.
const SNAP: f64 = 1e-14;

fn snap(v: f64) -> f64 {
    if v.abs() < SNAP {
        0.0
    } else {
        v
    }
}

/// A discrete propagation direction.
///
/// In 2D `theta` is the polar angle in the plane and `phi` is zero; in 3D
/// `theta` is the polar angle from `+x3` and `phi` the azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction {
    pub xi: [f64; 3],
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub fn planar(theta: f64) -> Self {
        Direction {
            xi: [snap(theta.cos()), snap(theta.sin()), 0.0],
            theta,
            phi: 0.0,
        }
    }

    pub fn spherical(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        Direction {
            xi: [snap(s * phi.cos()), snap(s * phi.sin()), snap(theta.cos())],
            theta,
            phi,
        }
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.xi[0] * other.xi[0] + self.xi[1] * other.xi[1] + self.xi[2] * other.xi[2]
    }
}

/// One node of the angular quadrature: a direction index and its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNode {
    pub direction: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AngularLayout {
    /// `m` equispaced directions on the unit circle.
    Circle { m: usize, dtheta: f64 },
    /// Polar/azimuthal product grid on the unit sphere with the two poles
    /// stored once each.
    Sphere {
        polar: usize,
        azimuthal: usize,
        dtheta: f64,
        dphi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig2D {
    pub lengths: [f64; 2],
    pub cells: [usize; 2],
    pub directions: usize,
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig3D {
    pub lengths: [f64; 3],
    pub cells: [usize; 3],
    pub polar: usize,
    pub azimuthal: usize,
    pub dt: f64,
    pub t_final: f64,
}

/// Discretization of `[0, T] x Omega x S^{D-1}` on a rectangular box.
///
/// Spatial nodes are `x = (i_1 dx_1, ..., i_D dx_D)` with `0 <= i_a <= cells_a`,
/// stored row-major (last axis fastest). Grid functions store all nodes times
/// all directions with the direction index fastest.
#[derive(Debug, Clone)]
pub struct Grid<const D: usize> {
    lengths: [f64; D],
    cells: [usize; D],
    spacing: [f64; D],
    nodes: [usize; D],
    strides: [usize; D],
    dt: f64,
    t_final: f64,
    layout: AngularLayout,
    directions: Vec<Direction>,
    quadrature: Vec<QuadratureNode>,
    interior: Vec<usize>,
    inflow: InflowSet,
}

pub type Grid2D = Grid<2>;
pub type Grid3D = Grid<3>;

fn positive(field: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::NonPositive {
            field: field.to_string(),
            value,
        })
    }
}

fn positive_count(field: &str, value: usize) -> Result<(), ConfigError> {
    if value >= 1 {
        Ok(())
    } else {
        Err(ConfigError::NonPositive {
            field: field.to_string(),
            value: value as f64,
        })
    }
}

fn check_box<const D: usize>(
    lengths: &[f64; D],
    cells: &[usize; D],
    dt: f64,
    t_final: f64,
) -> Result<(), ConfigError> {
    for a in 0..D {
        positive(&format!("lengths[{a}]"), lengths[a])?;
        positive_count(&format!("cells[{a}]"), cells[a])?;
    }
    positive("dt", dt)?;
    positive("t_final", t_final)?;
    if t_final < dt {
        return Err(ConfigError::invalid(
            "t_final",
            format!("T = {t_final} is smaller than dt = {dt}"),
        ));
    }
    Ok(())
}

impl Grid<2> {
    pub fn new(config: &GridConfig2D) -> Result<Self, ConfigError> {
        check_box(&config.lengths, &config.cells, config.dt, config.t_final)?;
        positive_count("directions", config.directions)?;
        let m = config.directions;
        let dtheta = 2.0 * PI / m as f64;
        let directions: Vec<_> = (0..m)
            .map(|n| Direction::planar(n as f64 * dtheta))
            .collect();
        let quadrature = (0..m)
            .map(|n| QuadratureNode {
                direction: n,
                weight: dtheta,
            })
            .collect();
        Ok(Self::assemble(
            config.lengths,
            config.cells,
            config.dt,
            config.t_final,
            AngularLayout::Circle { m, dtheta },
            directions,
            quadrature,
        ))
    }

    pub fn dtheta(&self) -> f64 {
        match self.layout {
            AngularLayout::Circle { dtheta, .. } => dtheta,
            AngularLayout::Sphere { .. } => unreachable!("2D grids use a circle layout"),
        }
    }
}

impl Grid<3> {
    pub fn new(config: &GridConfig3D) -> Result<Self, ConfigError> {
        check_box(&config.lengths, &config.cells, config.dt, config.t_final)?;
        positive_count("polar", config.polar)?;
        positive_count("azimuthal", config.azimuthal)?;
        let (mt, mp) = (config.polar, config.azimuthal);
        let dtheta = PI / mt as f64;
        let dphi = 2.0 * PI / mp as f64;

        let mut directions = Vec::with_capacity((mt - 1) * mp + 2);
        let mut quadrature = Vec::with_capacity((mt - 1) * mp);
        directions.push(Direction::spherical(0.0, 0.0));
        for m in 1..mt {
            let theta = m as f64 * dtheta;
            for n in 0..mp {
                let phi = n as f64 * dphi;
                quadrature.push(QuadratureNode {
                    direction: directions.len(),
                    weight: dtheta * dphi * theta.sin(),
                });
                directions.push(Direction::spherical(theta, phi));
            }
        }
        directions.push(Direction::spherical(PI, 0.0));

        Ok(Self::assemble(
            config.lengths,
            config.cells,
            config.dt,
            config.t_final,
            AngularLayout::Sphere {
                polar: mt,
                azimuthal: mp,
                dtheta,
                dphi,
            },
            directions,
            quadrature,
        ))
    }

    /// Direction index of `xi_{mn}`; all `n` collapse onto one index at the poles.
    pub fn direction_index(&self, m: usize, n: usize) -> usize {
        let (mt, mp) = self.sphere_counts();
        assert!(m <= mt && n < mp, "direction ({m}, {n}) out of range");
        if m == 0 {
            0
        } else if m == mt {
            self.directions.len() - 1
        } else {
            1 + (m - 1) * mp + n
        }
    }

    pub fn sphere_counts(&self) -> (usize, usize) {
        match self.layout {
            AngularLayout::Sphere {
                polar, azimuthal, ..
            } => (polar, azimuthal),
            AngularLayout::Circle { .. } => unreachable!("3D grids use a sphere layout"),
        }
    }

    pub fn angular_steps(&self) -> (f64, f64) {
        match self.layout {
            AngularLayout::Sphere { dtheta, dphi, .. } => (dtheta, dphi),
            AngularLayout::Circle { .. } => unreachable!("3D grids use a sphere layout"),
        }
    }
}

impl<const D: usize> Grid<D> {
    fn assemble(
        lengths: [f64; D],
        cells: [usize; D],
        dt: f64,
        t_final: f64,
        layout: AngularLayout,
        directions: Vec<Direction>,
        quadrature: Vec<QuadratureNode>,
    ) -> Self {
        let spacing = std::array::from_fn(|a| lengths[a] / cells[a] as f64);
        let nodes: [usize; D] = std::array::from_fn(|a| cells[a] + 1);
        let mut strides = [1usize; D];
        for a in (0..D.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * nodes[a + 1];
        }
        let mut grid = Grid {
            lengths,
            cells,
            spacing,
            nodes,
            strides,
            dt,
            t_final,
            layout,
            directions,
            quadrature,
            interior: Vec::new(),
            inflow: InflowSet::default(),
        };
        grid.interior = (0..grid.node_count())
            .filter(|&s| grid.is_interior(&grid.node_coords(s)))
            .collect();
        grid.inflow = classify_inflow(&grid);
        grid
    }

    pub fn lengths(&self) -> [f64; D] {
        self.lengths
    }

    pub fn cells(&self) -> [usize; D] {
        self.cells
    }

    pub fn spacing(&self) -> [f64; D] {
        self.spacing
    }

    pub fn nodes(&self) -> [usize; D] {
        self.nodes
    }

    pub fn strides(&self) -> [usize; D] {
        self.strides
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn layout(&self) -> AngularLayout {
        self.layout
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn direction_count(&self) -> usize {
        self.directions.len()
    }

    /// Angular quadrature nodes used by the scattering sum.
    pub fn quadrature(&self) -> &[QuadratureNode] {
        &self.quadrature
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().product()
    }

    /// Length of a grid-function storage vector.
    pub fn storage_len(&self) -> usize {
        self.node_count() * self.directions.len()
    }

    pub fn node_index(&self, coords: &[usize; D]) -> usize {
        coords
            .iter()
            .zip(self.strides.iter())
            .map(|(c, s)| c * s)
            .sum()
    }

    pub fn node_coords(&self, mut node: usize) -> [usize; D] {
        let mut out = [0; D];
        for a in 0..D {
            out[a] = node / self.strides[a];
            node %= self.strides[a];
        }
        out
    }

    pub fn position(&self, coords: &[usize; D]) -> [f64; D] {
        std::array::from_fn(|a| coords[a] as f64 * self.spacing[a])
    }

    pub fn node_position(&self, node: usize) -> [f64; D] {
        self.position(&self.node_coords(node))
    }

    pub fn is_interior(&self, coords: &[usize; D]) -> bool {
        coords
            .iter()
            .zip(self.cells.iter())
            .all(|(&c, &m)| c >= 1 && c < m)
    }

    pub fn storage_index(&self, node: usize, direction: usize) -> usize {
        node * self.directions.len() + direction
    }

    /// Interior nodes in increasing index order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// The discrete inflow boundary, computed once at construction.
    pub fn inflow(&self) -> &InflowSet {
        &self.inflow
    }

    /// Number of time steps `T/dt`, rejecting non-integral ratios.
    pub fn step_count(&self) -> Result<usize, crate::error::SolverError> {
        let ratio = self.t_final / self.dt;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
            return Err(crate::error::SolverError::NonIntegralSteps { ratio });
        }
        Ok(k as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(l: f64, m: usize, dirs: usize) -> GridConfig2D {
        GridConfig2D {
            lengths: [l, l],
            cells: [m, m],
            directions: dirs,
            dt: 0.1,
            t_final: 1.0,
        }
    }

    #[test]
    fn phantom_configuration_spacings() {
        let g = Grid2D::new(&cfg(50.0, 500, 60)).unwrap();
        assert_relative_eq!(g.spacing()[0], 0.1);
        assert_relative_eq!(g.spacing()[1], 0.1);
        assert_relative_eq!(g.dtheta(), 2.0 * PI / 60.0);
        assert_eq!(g.directions()[15].xi, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn single_cell() {
        let g = Grid2D::new(&cfg(1.0, 1, 4)).unwrap();
        assert_eq!(g.spacing()[0], 1.0);
        assert!(g.interior().is_empty());
    }

    #[test]
    fn rejects_non_positive_fields() {
        let mut c = cfg(1.0, 4, 8);
        c.cells[1] = 0;
        match Grid2D::new(&c) {
            Err(ConfigError::NonPositive { field, .. }) => assert_eq!(field, "cells[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let mut c = cfg(1.0, 4, 8);
        c.dt = -1.0;
        match Grid2D::new(&c) {
            Err(ConfigError::NonPositive { field, .. }) => assert_eq!(field, "dt"),
            other => panic!("unexpected {other:?}"),
        }
        let mut c = cfg(1.0, 4, 8);
        c.lengths[0] = 0.0;
        assert!(Grid2D::new(&c).is_err());
        let mut c = cfg(1.0, 4, 8);
        c.directions = 0;
        assert!(Grid2D::new(&c).is_err());
    }

    #[test]
    fn node_indexing_round_trips() {
        let g = Grid2D::new(&GridConfig2D {
            lengths: [1.0, 2.0],
            cells: [3, 5],
            directions: 4,
            dt: 0.1,
            t_final: 0.1,
        })
        .unwrap();
        for s in 0..g.node_count() {
            assert_eq!(g.node_index(&g.node_coords(s)), s);
        }
        assert_eq!(g.node_coords(7), [1, 1]);
        assert_eq!(g.interior().len(), 2 * 4);
    }

    #[test]
    fn sphere_layout_deduplicates_poles() {
        let g = Grid3D::new(&GridConfig3D {
            lengths: [1.0; 3],
            cells: [2; 3],
            polar: 6,
            azimuthal: 12,
            dt: 0.1,
            t_final: 0.1,
        })
        .unwrap();
        assert_eq!(g.direction_count(), 5 * 12 + 2);
        assert_eq!(g.quadrature().len(), 5 * 12);
        assert_eq!(g.directions()[0].xi, [0.0, 0.0, 1.0]);
        assert_eq!(g.directions()[g.direction_count() - 1].xi, [0.0, 0.0, -1.0]);
        assert_eq!(g.direction_index(0, 7), 0);
        assert_eq!(g.direction_index(1, 0), 1);
        assert_eq!(g.direction_index(6, 3), 61);
        assert!(g.quadrature().iter().all(|q| q.weight > 0.0));
    }

    #[test]
    fn step_count_requires_divisibility() {
        let mut c = cfg(1.0, 4, 4);
        c.dt = 0.3;
        let g = Grid2D::new(&c).unwrap();
        assert!(g.step_count().is_err());
        let g = Grid2D::new(&cfg(1.0, 4, 4)).unwrap();
        assert_eq!(g.step_count().unwrap(), 10);
    }
}
