use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rte_core::phase_space::{Direction, Grid2D, GridConfig2D, Medium};
use rte_core::verification::convergence::space_time_grids_2d;
use rte_core::verification::manufactured::{Separable2D, Spatial};
use rte_core::verification::{
    analytic_kernel_bound, assemble_dense_system, manufactured_source, run_convergence_study, trapezoid_error,
    StudyKind,
};
use rte_core::{PhaseFunction, PhaseSpaceFn, Problem, Sources};

#[test]
fn trapezoid_examples() {
    let e = trapezoid_error(&|t: f64| t.cos(), 1.0, 8);
    assert!(e.error.abs() <= 1e-13);

    let e = trapezoid_error(&|t: f64| (8.0 * t).cos(), 64.0, 8);
    assert!((e.error + 2.0 * PI).abs() <= 1e-12);
    assert_relative_eq!(e.bound, PI.powi(3) / 3.0, max_relative = 1e-14);
    assert!(e.error.abs() <= e.bound);

    let hg = PhaseFunction::hg2d(0.9).unwrap();
    let e = trapezoid_error(&|a: f64| hg.eval(&[0.0, 0.0], a), 0.0, 64);
    assert_relative_eq!(e.integral, 1.0, max_relative = 1e-12);
    assert!(e.error.abs() <= analytic_kernel_bound(1.0 / (2.0 * PI), 0.9, 64) + 1e-12);
}

fn sample_points(n: usize) -> Vec<(f64, [f64; 2], Direction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(0.0..3.0),
                [rng.gen_range(0.0..2.0), rng.gen_range(0.0..1.0)],
                Direction::planar(rng.gen_range(0.0..2.0 * PI)),
            )
        })
        .collect()
}

#[test]
fn constant_solution_needs_only_absorption() {
    let medium = Medium::uniform(0.7, 0.3, 1.4);
    let q = manufactured_source(Arc::new(Separable2D::constant(2.5)), &medium, &PhaseFunction::hg2d(0.8).unwrap());
    for (t, x, d) in sample_points(100) {
        assert_relative_eq!(q.eval(t, &x, &d), 0.3 * 2.5, max_relative = 1e-13);
    }
}

#[test]
fn source_matches_direct_substitution() {
    let (c, mu_a, mu_s, len) = (0.8, 0.25, 1.3, 2.0);
    let medium = Medium::uniform(c, mu_a, mu_s);
    let sol = Separable2D {
        decay: 1.0,
        spatial: Spatial::SineProduct {
            amp: 1.0,
            wavenumbers: [PI / len, 0.0, 0.0],
        },
        a0: 1.0,
        modes: vec![],
    };
    let q = manufactured_source(Arc::new(sol), &medium, &PhaseFunction::isotropic(2));
    for (t, x, d) in sample_points(1000) {
        let i = (-t).exp() * (1.0 + (PI * x[0] / len).sin());
        let di_dx = (-t).exp() * PI / len * (PI * x[0] / len).cos();
        let expect = -i / c + d.xi[0] * di_dx + mu_a * i;
        assert!((q.eval(t, &x, &d) - expect).abs() <= 1e-12);
    }

    let g = 0.6;
    let first_mode = Separable2D {
        decay: 0.0,
        spatial: Spatial::Affine {
            c0: 1.0,
            slope: [0.0; 3],
        },
        a0: 0.0,
        modes: vec![(1, 1.0, 0.0)],
    };
    let q = manufactured_source(Arc::new(first_mode), &medium, &PhaseFunction::hg2d(g).unwrap());
    for (t, x, d) in sample_points(200) {
        let expect = (mu_a + mu_s - mu_s * g) * d.theta.cos();
        assert!((q.eval(t, &x, &d) - expect).abs() <= 1e-12);
    }
}

fn single_point(q: f64, inflow: f64) -> Problem<2> {
    let g = Grid2D::new(&GridConfig2D {
        lengths: [1.0, 2.0],
        cells: [2, 2],
        directions: 4,
        dt: 0.1,
        t_final: 0.1,
    })
    .unwrap();
    let sources = Sources {
        q: PhaseSpaceFn::Constant(q),
        inflow: PhaseSpaceFn::Constant(inflow),
        ..Sources::default()
    };
    Problem::new(g, Medium::uniform(1.0, 0.3, 0.9), PhaseFunction::isotropic(2), sources)
}

#[test]
fn dense_system_by_hand() {
    let p = single_point(0.5, 0.0);
    let sys = assemble_dense_system(&p).unwrap();
    assert_eq!(sys.size, 4);
    let dtheta = PI / 2.0;
    let streaming = [2.0, 1.0, 2.0, 1.0];
    for (r, &stream) in streaming.iter().enumerate() {
        for col in 0..4 {
            let mut expect = -0.9 * dtheta / (2.0 * PI);
            if r == col {
                expect += stream + 0.9 + 0.3;
            }
            assert!((sys.matrix[r * 4 + col] - expect).abs() <= 1e-15, "({r},{col})");
        }
        assert_eq!(sys.rhs[r], 0.5);
    }
    let x = sys.solve().unwrap();
    assert!(sys.residual(&x) <= 1e-14);

    let zero = assemble_dense_system(&single_point(0.0, 0.0)).unwrap();
    assert!(zero.solve().unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn zero_solution_study_is_degenerate() {
    let base = GridConfig2D {
        lengths: [1.0, 1.0],
        cells: [4, 4],
        directions: 8,
        dt: 0.05,
        t_final: 0.2,
    };
    let study = run_convergence_study(
        Arc::new(Separable2D::constant(0.0)),
        space_time_grids_2d(&base, 3).unwrap(),
        &Medium::uniform(1.0, 0.5, 1.0),
        &PhaseFunction::isotropic(2),
        StudyKind::SpaceTime,
    )
    .unwrap();
    assert!(study.degenerate);
    assert!(study.order.is_none());
    assert!(study.levels.iter().all(|l| l.error == 0.0));
    assert!(study.warning.is_some());
}

#[test]
fn space_time_error_shrinks_at_first_order() {
    let base = GridConfig2D {
        lengths: [1.0, 1.0],
        cells: [8, 8],
        directions: 16,
        dt: 0.025,
        t_final: 0.5,
    };
    let sol = Separable2D {
        decay: 0.5,
        spatial: Spatial::SineProduct {
            amp: 0.5,
            wavenumbers: [PI, PI, 0.0],
        },
        a0: 1.0,
        modes: vec![(1, 0.3, 0.2)],
    };
    let study = run_convergence_study(
        Arc::new(sol),
        space_time_grids_2d(&base, 4).unwrap(),
        &Medium::uniform(1.0, 0.5, 1.0),
        &PhaseFunction::hg2d(0.5).unwrap(),
        StudyKind::SpaceTime,
    )
    .unwrap();
    let order = study.order.unwrap();
    assert!((0.8..=1.2).contains(&order), "order {order}, levels {:?}", study.levels);
    assert!(study.monotone);
}
