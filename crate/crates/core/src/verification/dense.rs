use crate::error::SolverError;
use crate::operators::OperatorWorkspace;
use crate::phase_space::Field;
use crate::sources::Problem;

/// Largest system the dense oracle will assemble.
pub const DENSE_CAP: usize = 400;

/// `M J = rhs` for the steady discrete problem, one unknown per interior
/// node and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    pub size: usize,
    /// Row-major `size x size`.
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `(node, direction)` of each unknown.
    pub unknowns: Vec<(usize, usize)>,
}

/// Assembles `(Sigma + diag - B - K) J = q + B_inflow I1`.
pub fn assemble_dense_system<const D: usize>(problem: &Problem<D>) -> Result<DenseSystem, SolverError> {
    if !problem.sources.q.is_time_independent() {
        return Err(SolverError::TimeDependent("q"));
    }
    if !problem.sources.inflow.is_time_independent() {
        return Err(SolverError::TimeDependent("inflow data"));
    }
    let grid = &problem.grid;
    let ndir = grid.direction_count();
    let size = grid.interior().len() * ndir;
    if size > DENSE_CAP {
        return Err(SolverError::TooLarge {
            unknowns: size,
            cap: DENSE_CAP,
        });
    }
    if size == 0 {
        return Err(SolverError::Degenerate);
    }
    let medium = problem.sample_medium()?;
    let ws = OperatorWorkspace::new(grid, medium, &problem.phase);
    let mut inflow = Field::zeros(grid);
    problem.write_inflow(&mut inflow, 0.0);
    let q = problem.sample_q(0.0);

    let mut index = vec![usize::MAX; grid.node_count()];
    let mut unknowns = Vec::with_capacity(size);
    for (k, &s) in grid.interior().iter().enumerate() {
        index[s] = k;
        for n in 0..ndir {
            unknowns.push((s, n));
        }
    }
    let col = |node: usize, n: usize| index[node] * ndir + n;

    let mut matrix = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    let m = ws.medium();
    for (row, &(s, n)) in unknowns.iter().enumerate() {
        let r = &mut matrix[row * size..(row + 1) * size];
        r[col(s, n)] += m.mu_a[s] + m.mu_s[s] + ws.removal(n);
        for t in ws.upwind(n) {
            let nb = (s as isize + t.offset) as usize;
            if ws.is_interior(nb) {
                r[col(nb, n)] -= t.weight;
            } else {
                assert!(
                    grid.inflow().contains(nb, n),
                    "upwind neighbour {:?} of {:?} in direction {n} is not inflow",
                    grid.node_coords(nb),
                    grid.node_coords(s)
                );
                rhs[row] += t.weight * inflow.get(nb, n);
            }
        }
        for (qi, &dq) in ws.quadrature_directions().iter().enumerate() {
            r[col(s, dq)] -= m.mu_s[s] * ws.scattering_entry(s, n, qi);
        }
        rhs[row] += q[s * ndir + n];
    }
    Ok(DenseSystem {
        size,
        matrix,
        rhs,
        unknowns,
    })
}

impl DenseSystem {
    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self) -> Result<Vec<f64>, SolverError> {
        let n = self.size;
        let mut a = self.matrix.clone();
        let mut b = self.rhs.clone();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap();
            if a[p * n + k].abs() <= 1e-14 * scale {
                return Err(SolverError::Singular);
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                b.swap(k, p);
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                if f == 0.0 {
                    continue;
                }
                for c in k..n {
                    a[i * n + c] -= f * a[k * n + c];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|c| a[k * n + c] * x[c]).sum();
            x[k] = (b[k] - s) / a[k * n + k];
        }
        Ok(x)
    }

    /// `max |M x - rhs|`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        (0..self.size)
            .map(|i| {
                let row = &self.matrix[i * self.size..(i + 1) * self.size];
                (row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Unknown vector read off a field.
    pub fn gather(&self, field: &Field) -> Vec<f64> {
        self.unknowns.iter().map(|&(s, n)| field.get(s, n)).collect()
    }

    /// Field with the solution in the interior and `I1` on the inflow boundary.
    pub fn scatter<const D: usize>(&self, problem: &Problem<D>, x: &[f64]) -> Field {
        let mut f = Field::zeros(&problem.grid);
        problem.write_inflow(&mut f, 0.0);
        for (&(s, n), v) in self.unknowns.iter().zip(x) {
            f.set(s, n, *v);
        }
        f
    }
}
