use super::grid::Grid;

/// A member of the discrete inflow boundary: a boundary node paired with a
/// direction pointing into the domain through at least one incident face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InflowPoint {
    pub node: usize,
    pub direction: usize,
}

/// Discrete `Gamma_-`.
///
/// Points are ordered face-major (axis 0 low, axis 0 high, axis 1 low, ...),
/// then by node index, then by direction index. A corner or edge node shared
/// by several faces appears once, at the first face that admits it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InflowSet {
    points: Vec<InflowPoint>,
    mask: Vec<bool>,
    ndir: usize,
}

impl InflowSet {
    pub fn points(&self) -> &[InflowPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, node: usize, direction: usize) -> bool {
        self.mask
            .get(node * self.ndir + direction)
            .copied()
            .unwrap_or(false)
    }
}

/// Is `(coords, xi)` inflow through any face containing `coords`?
fn enters<const D: usize>(grid: &Grid<D>, coords: &[usize; D], xi: &[f64; 3]) -> bool {
    let cells = grid.cells();
    (0..D).any(|a| (coords[a] == 0 && xi[a] > 0.0) || (coords[a] == cells[a] && xi[a] < 0.0))
}

/// Enumerates the discrete inflow boundary of `grid`.
pub fn classify_inflow<const D: usize>(grid: &Grid<D>) -> InflowSet {
    let ndir = grid.direction_count();
    let cells = grid.cells();
    let mut mask = vec![false; grid.storage_len()];
    let mut points = Vec::new();
    for axis in 0..D {
        for side in [0, cells[axis]] {
            for node in 0..grid.node_count() {
                let coords = grid.node_coords(node);
                if coords[axis] != side {
                    continue;
                }
                for (n, dir) in grid.directions().iter().enumerate() {
                    let idx = node * ndir + n;
                    if !mask[idx] && enters(grid, &coords, &dir.xi) {
                        mask[idx] = true;
                        points.push(InflowPoint { node, direction: n });
                    }
                }
            }
        }
    }
    InflowSet { points, mask, ndir }
}
