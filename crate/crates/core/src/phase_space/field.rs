use super::grid::Grid;

/// One time level of a grid function over nodes x directions.
///
/// Interior entries hold the solution, inflow-boundary entries hold the
/// prescribed boundary data, and the remaining boundary entries (outflow and
/// tangential directions) are never read by the scheme and stay at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    ndir: usize,
    level: usize,
}

impl Field {
    pub fn zeros<const D: usize>(grid: &Grid<D>) -> Self {
        Field {
            values: vec![0.0; grid.storage_len()],
            ndir: grid.direction_count(),
            level: 0,
        }
    }

    /// Wraps a storage vector laid out as `node * ndir + direction`.
    pub fn from_values<const D: usize>(grid: &Grid<D>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.storage_len(), "storage length mismatch");
        Field {
            values,
            ndir: grid.direction_count(),
            level: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn direction_count(&self) -> usize {
        self.ndir
    }

    pub fn get(&self, node: usize, direction: usize) -> f64 {
        self.values[node * self.ndir + direction]
    }

    pub fn set(&mut self, node: usize, direction: usize, value: f64) {
        self.values[node * self.ndir + direction] = value;
    }

    /// Direction vector at one node.
    pub fn at_node(&self, node: usize) -> &[f64] {
        &self.values[node * self.ndir..(node + 1) * self.ndir]
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn set_level(&mut self, level: usize) {
        self.level = level;
    }

    /// Max-abs over interior entries only.
    pub fn interior_sup<const D: usize>(&self, grid: &Grid<D>) -> f64 {
        grid.interior()
            .iter()
            .flat_map(|&s| self.at_node(s).iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-abs over inflow entries only.
    pub fn inflow_sup<const D: usize>(&self, grid: &Grid<D>) -> f64 {
        grid.inflow()
            .points()
            .iter()
            .fold(0.0, |m, p| m.max(self.get(p.node, p.direction).abs()))
    }

    /// Smallest entry over interior and inflow storage.
    pub fn min_value<const D: usize>(&self, grid: &Grid<D>) -> f64 {
        let interior = grid
            .interior()
            .iter()
            .flat_map(|&s| self.at_node(s).iter().copied());
        let inflow = grid
            .inflow()
            .points()
            .iter()
            .map(|p| self.get(p.node, p.direction));
        interior.chain(inflow).fold(f64::INFINITY, f64::min)
    }

    /// Copy with every non-state boundary entry filled from the nearest
    /// interior node along the inward normal. For output only.
    pub fn with_display_boundary<const D: usize>(&self, grid: &Grid<D>) -> Field {
        let mut out = self.clone();
        let cells = grid.cells();
        let has_interior = cells.iter().all(|&m| m >= 2);
        for node in 0..grid.node_count() {
            let coords = grid.node_coords(node);
            if grid.is_interior(&coords) {
                continue;
            }
            let source = has_interior.then(|| {
                let inner: [usize; D] = std::array::from_fn(|a| coords[a].clamp(1, cells[a] - 1));
                grid.node_index(&inner)
            });
            for n in 0..self.ndir {
                if grid.inflow().contains(node, n) {
                    continue;
                }
                let v = source.map_or(0.0, |s| self.get(s, n));
                out.set(node, n, v);
            }
        }
        out
    }
}

/// `||I^k||_inf` over interior points and the inflow boundary.
pub fn sup_norm<const D: usize>(field: &Field, grid: &Grid<D>) -> f64 {
    field.interior_sup(grid).max(field.inflow_sup(grid))
}
