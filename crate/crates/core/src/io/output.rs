//! CSV writers for intensity snapshots and integrated intensity.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::operators::integrated_intensity;
use crate::phase_space::{AngularLayout, Field, Grid};

/// `snapshot_k{k}.csv`.
pub fn snapshot_name(k: usize) -> String {
    format!("snapshot_k{k}.csv")
}

/// `intensity_k{k}.csv`.
pub fn intensity_name(k: usize) -> String {
    format!("intensity_k{k}.csv")
}

fn direction_labels<const D: usize>(grid: &Grid<D>) -> Vec<(usize, usize)> {
    match grid.layout() {
        AngularLayout::Circle { m, .. } => (0..m).map(|n| (0, n)).collect(),
        AngularLayout::Sphere { polar, azimuthal, .. } => {
            let mut out = vec![(0, 0)];
            for m in 1..polar {
                for n in 0..azimuthal {
                    out.push((m, n));
                }
            }
            out.push((polar, 0));
            out
        }
    }
}

/// One row per node and direction. Boundary entries outside the inflow set
/// are filled from the adjacent interior node.
///
/// 2D columns: `i,j,n,x1,x2,theta,I`.
/// 3D columns: `i,j,l,m,n,x1,x2,x3,theta,phi,I`.
pub fn write_snapshot<const D: usize>(path: &Path, field: &Field, grid: &Grid<D>) -> std::io::Result<()> {
    let display = field.with_display_boundary(grid);
    let labels = direction_labels(grid);
    let mut w = BufWriter::new(File::create(path)?);
    if D == 2 {
        writeln!(w, "i,j,n,x1,x2,theta,I")?;
    } else {
        writeln!(w, "i,j,l,m,n,x1,x2,x3,theta,phi,I")?;
    }
    for node in 0..grid.node_count() {
        let c = grid.node_coords(node);
        let x = grid.node_position(node);
        for (d, dir) in grid.directions().iter().enumerate() {
            let v = display.get(node, d);
            if D == 2 {
                writeln!(
                    w,
                    "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                    c[0], c[1], labels[d].1, x[0], x[1], dir.theta, v
                )?;
            } else {
                let (m, n) = labels[d];
                writeln!(
                    w,
                    "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    c[0], c[1], c[2], m, n, x[0], x[1], x[2], dir.theta, dir.phi, v
                )?;
            }
        }
    }
    w.flush()
}

/// Integrated intensity `sum_n w_n I(x, xi_n)` per node.
///
/// 2D columns: `i,j,x1,x2,phi_total`; 3D adds `l` and `x3`.
pub fn write_intensity<const D: usize>(path: &Path, field: &Field, grid: &Grid<D>) -> std::io::Result<()> {
    let display = field.with_display_boundary(grid);
    let phi = integrated_intensity(&display, grid);
    let mut w = BufWriter::new(File::create(path)?);
    if D == 2 {
        writeln!(w, "i,j,x1,x2,phi_total")?;
    } else {
        writeln!(w, "i,j,l,x1,x2,x3,phi_total")?;
    }
    for (node, p) in phi.iter().enumerate() {
        let c = grid.node_coords(node);
        let x = grid.node_position(node);
        if D == 2 {
            writeln!(w, "{},{},{:.16e},{:.16e},{:.16e}", c[0], c[1], x[0], x[1], p)?;
        } else {
            writeln!(
                w,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                c[0], c[1], c[2], x[0], x[1], x[2], p
            )?;
        }
    }
    w.flush()
}
