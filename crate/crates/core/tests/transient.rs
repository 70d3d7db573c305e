use std::f64::consts::PI;

use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rte_core::phase::check_theta_condition_analytic;
use rte_core::phase_space::{Direction, Field, Grid2D, GridConfig2D, Medium};
use rte_core::transient::{stability_report, step};
use rte_core::{run_transient, PhaseFunction, PhaseSpaceFn, Problem, SolverError, Sources, TransientOptions};

fn grid(lengths: [f64; 2], cells: [usize; 2], m: usize, dt: f64, t_final: f64) -> Grid2D {
    Grid2D::new(&GridConfig2D {
        lengths,
        cells,
        directions: m,
        dt,
        t_final,
    })
    .unwrap()
}

fn phantom_medium() -> Medium {
    Medium::uniform(0.196, 0.08, 1.09)
}

fn options() -> TransientOptions {
    TransientOptions {
        snapshot_steps: vec![],
        enforce_stability: true,
        initial: None,
    }
}

#[test]
fn cfl_examples() {
    let g = grid([50.0, 50.0], [500, 500], 60, 0.1, 400.0);
    let bounds = phantom_medium().sample(&grid([1.0, 1.0], [2, 2], 4, 0.1, 0.1)).unwrap().bounds;
    let pf = PhaseFunction::hg2d(0.9).unwrap();
    let r = stability_report(&g, &bounds, &pf);
    assert_relative_eq!(r.cfl_lhs, 0.392, max_relative = 1e-12);
    assert!(r.cfl_pass && r.theta_pass && r.overall_pass);

    let g = grid([2.0, 2.0], [2, 2], 60, 1.0, 1.0);
    let unit = Medium::uniform(1.0, 0.08, 1.09).sample(&g).unwrap().bounds;
    let r = stability_report(&g, &unit, &pf);
    assert_relative_eq!(r.cfl_lhs, 2.0, max_relative = 1e-15);
    assert!(!r.cfl_pass && !r.overall_pass);
    assert!(r.failure_reason().unwrap().contains("CFL"));

    let c = check_theta_condition_analytic(&pf, 31, bounds.mu_star).unwrap();
    assert!(c.applicable && !c.pass);
    assert_eq!(c.min_directions, Some(32));
}

#[test]
fn zero_data_stays_zero() {
    let g = grid([1.0, 1.0], [6, 6], 12, 0.05, 1.0);
    let p = Problem::new(g, Medium::uniform(1.0, 0.5, 1.0), PhaseFunction::hg2d(0.5).unwrap(), Sources::default());
    let r = run_transient(&p, &options()).unwrap();
    assert_eq!(r.steps, 20);
    assert!(r.final_field.values().iter().all(|&v| v == 0.0));
    assert!(r.sup_history.iter().all(|&v| v == 0.0));
}

#[test]
fn constant_field_follows_scalar_recurrence() {
    let (c, mu_a, mu_s, dt) = (1.0, 0.4, 1.5, 0.05);
    let ratio = (1.0 + c * dt * mu_s) / (1.0 + c * dt * (mu_s + mu_a));
    let g = grid([1.0, 1.0], [5, 5], 16, dt, 1.0);
    let sources = Sources {
        initial: PhaseSpaceFn::Constant(1.0),
        inflow: PhaseSpaceFn::function(move |t, _x, _d| ratio.powf((t / dt).round())),
        ..Sources::default()
    };
    let p = Problem::new(g, Medium::uniform(c, mu_a, mu_s), PhaseFunction::isotropic(2), sources);
    let r = run_transient(&p, &options()).unwrap();
    for (k, &s) in r.sup_history.iter().enumerate() {
        assert!((s - ratio.powi(k as i32)).abs() <= 1e-14, "k={k}: {s}");
    }
    let expect = ratio.powi(20);
    for &node in p.grid.interior() {
        for &v in r.final_field.at_node(node) {
            assert!((v - expect).abs() <= 1e-14);
        }
    }
}

#[test]
fn step_is_linear_without_sources() {
    let g = grid([1.0, 1.0], [5, 4], 12, 0.05, 1.0);
    let p = Problem::new(g, Medium::uniform(1.0, 0.3, 1.2), PhaseFunction::hg2d(0.7).unwrap(), Sources::default());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut random = || {
        let mut f = Field::from_values(&p.grid, (0..p.grid.storage_len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        for pt in p.grid.inflow().points() {
            f.set(pt.node, pt.direction, 0.0);
        }
        f
    };
    let (u, v) = (random(), random());
    let (a, b) = (0.6, -2.1);
    let w = Field::from_values(
        &p.grid,
        u.values().iter().zip(v.values()).map(|(x, y)| a * x + b * y).collect(),
    );
    let (su, sv, sw) = (step(&p, &u).unwrap(), step(&p, &v).unwrap(), step(&p, &w).unwrap());
    for i in 0..sw.values().len() {
        let expect = a * su.values()[i] + b * sv.values()[i];
        assert!((sw.values()[i] - expect).abs() <= 1e-13);
    }
}

#[test]
fn non_integral_step_count_is_rejected() {
    let g = grid([1.0, 1.0], [4, 4], 8, 0.03, 1.0);
    let p = Problem::new(g, Medium::uniform(1.0, 0.5, 1.0), PhaseFunction::isotropic(2), Sources::default());
    assert!(matches!(run_transient(&p, &options()), Err(SolverError::NonIntegralSteps { .. })));
}

#[test]
fn unstable_runs_are_refused_unless_forced() {
    let g = grid([2.0, 2.0], [2, 2], 16, 1.0, 2.0);
    let p = Problem::new(g, Medium::uniform(1.0, 0.5, 1.0), PhaseFunction::isotropic(2), Sources::default());
    assert!(matches!(run_transient(&p, &options()), Err(SolverError::StabilityRefused { .. })));
    let forced = TransientOptions {
        enforce_stability: false,
        ..options()
    };
    assert_eq!(run_transient(&p, &forced).unwrap().steps, 2);
}

#[test]
fn desk_preset_respects_inflow_bound() {
    let sigma: f64 = 0.2;
    let peak = 1.0 / ((2.0 * PI).sqrt() * sigma);
    let g = grid([50.0, 50.0], [50, 50], 60, 0.5, 100.0);
    let inflow = PhaseSpaceFn::steady(move |x: &[f64], d: &Direction| {
        if x[1] == 0.0 && (24.9..=25.1).contains(&x[0]) {
            let z = d.theta - PI / 2.0;
            (-z * z / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
        } else {
            0.0
        }
    });
    let p = Problem::new(
        g,
        phantom_medium(),
        PhaseFunction::hg2d(0.9).unwrap(),
        Sources {
            inflow,
            ..Sources::default()
        },
    );
    let r = run_transient(&p, &options()).unwrap();
    assert_eq!(r.steps, 200);
    assert!(r.bound_holds && r.positive);
    assert!(r.min_value >= 0.0);
    let top = r.sup_history.iter().cloned().fold(0.0, f64::max);
    assert!(top <= peak + 1e-12, "{top} > {peak}");
    assert_relative_eq!(top, peak, max_relative = 1e-12);
}
