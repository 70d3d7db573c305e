use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use rte_core::io::config::{parse_config, BuiltProblem, ConfigFileError, RunConfig};
use rte_core::io::output::{intensity_name, snapshot_name, write_intensity, write_snapshot};
use rte_core::phase::ConditionResult;
use rte_core::phase_space::{Field, Grid, GridConfig2D, GridConfig3D};
use rte_core::stationary::rho_bound;
use rte_core::transient::stability_report;
use rte_core::verification::convergence::{
    angular_grids_2d, angular_grids_3d, space_time_grids_2d, space_time_grids_3d,
};
use rte_core::verification::manufactured::{Separable2D, Separable3D, Spatial};
use rte_core::verification::{run_convergence_study, ConvergenceStudy, StudyKind};
use rte_core::{
    solve_stationary, run_transient, Problem, SolverError, StabilityReport, SteadyOptions,
    TransientOptions,
};

use crate::manifest::{Manifest, Status};
use crate::RunArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Check,
    Run,
    Steady,
    Convergence,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Check => "check",
            Mode::Run => "run",
            Mode::Steady => "steady",
            Mode::Convergence => "convergence",
        }
    }
}

/// Runs one subcommand and returns the process exit code.
pub fn execute(mode: Mode, args: &RunArgs) -> i32 {
    let threads = rayon::current_num_threads();
    let mut manifest = Manifest::new(mode.name(), &args.config, threads, args.force);

    let cfg = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            manifest.fail(Status::Failed, format!("invalid configuration: {e}"));
            if let ConfigFileError::Field { .. } = e {
                manifest.config = std::fs::read_to_string(&args.config)
                    .ok()
                    .and_then(|t| serde_json::from_str(&t).ok());
            }
            if let Some(out) = &args.out {
                if let Err(e) = std::fs::create_dir_all(out).map_err(anyhow::Error::from).and_then(|_| manifest.write(out)) {
                    eprintln!("error: {e:#}");
                }
            }
            return Status::Failed.exit_code();
        }
    };
    manifest.config = serde_json::to_value(&cfg).ok();

    let out = output_dir(mode, args, &cfg);
    if let Some(dir) = &out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return Status::Failed.exit_code();
        }
    }

    let mut files = Vec::new();
    let result = match cfg.build() {
        Ok(BuiltProblem::Two(p)) => dispatch(mode, args, &cfg, &p, out.as_deref(), &mut manifest, &mut files),
        Ok(BuiltProblem::Three(p)) => dispatch(mode, args, &cfg, &p, out.as_deref(), &mut manifest, &mut files),
        Err(e) => Err(anyhow::Error::from(e)),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        manifest.fail(Status::Failed, format!("{e:#}"));
    }
    if let Some(dir) = &out {
        if let Err(e) = manifest.record_files(dir, &files).and_then(|_| manifest.write(dir)) {
            eprintln!("error: {e:#}");
            return Status::Failed.exit_code();
        }
    }
    if let Some(reason) = &manifest.failure_reason {
        if manifest.status != Status::Failed {
            eprintln!("{}: {reason}", status_word(manifest.status));
        }
    }
    manifest.status.exit_code()
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::Refused => "refused",
        Status::NotConverged => "not converged",
        Status::Failed => "failed",
    }
}

fn output_dir(mode: Mode, args: &RunArgs, cfg: &RunConfig) -> Option<PathBuf> {
    if let Some(o) = &args.out {
        return Some(o.clone());
    }
    if mode == Mode::Check {
        return None;
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    Some(match &cfg.output.directory {
        Some(d) if d.is_relative() => base.join(d),
        Some(d) => d.clone(),
        None => PathBuf::from("out"),
    })
}

fn dispatch<const D: usize>(
    mode: Mode,
    args: &RunArgs,
    cfg: &RunConfig,
    problem: &Problem<D>,
    out: Option<&Path>,
    manifest: &mut Manifest,
    files: &mut Vec<String>,
) -> anyhow::Result<()> {
    let bounds = problem.sample_medium()?.bounds;
    let report = stability_report(&problem.grid, &bounds, &problem.phase);
    manifest.lambda = report.lambda();
    manifest.rho = report
        .lambda()
        .and_then(|l| rho_bound(bounds.c_mua_minus, bounds.mu_star, problem.grid.dt(), l).ok());
    manifest.stability_report = Some(report.clone());
    let enforce = cfg.enforce_stability && !args.force;
    if !report.overall_pass && mode != Mode::Check && !enforce {
        eprintln!(
            "warning: running outside the stability conditions: {}",
            report.failure_reason().unwrap_or_default()
        );
    }

    match mode {
        Mode::Check => {
            print!("{}", describe(&report, manifest.rho));
            if !report.overall_pass {
                manifest.fail(Status::Refused, report.failure_reason().unwrap_or_default());
            }
            Ok(())
        }
        Mode::Run => run(cfg, problem, enforce, out.expect("run has an output directory"), manifest, files),
        Mode::Steady => steady(cfg, problem, enforce, out.expect("steady has an output directory"), manifest, files),
        Mode::Convergence => {
            let dir = out.expect("convergence has an output directory");
            let studies = if D == 2 { convergence_2d(cfg) } else { convergence_3d(cfg) };
            match studies {
                Ok(studies) => {
                    for s in &studies {
                        let name = match s.kind {
                            StudyKind::SpaceTime => "convergence_space_time.csv",
                            StudyKind::Angular => "convergence_angular.csv",
                        };
                        write_file(dir, name, &s.to_csv(), files)?;
                        println!(
                            "{name}: order {}{}",
                            s.order.map_or("undefined".into(), |o| format!("{o:.4}")),
                            s.warning.as_deref().map_or(String::new(), |w| format!(" ({w})"))
                        );
                    }
                    manifest.convergence = studies;
                    Ok(())
                }
                Err(e) => solver_failure(e, manifest),
            }
        }
    }
}

fn solver_failure(e: SolverError, manifest: &mut Manifest) -> anyhow::Result<()> {
    match e {
        SolverError::StabilityRefused { reason, report } => {
            manifest.stability_report = Some(*report);
            manifest.fail(Status::Refused, format!("stability conditions not satisfied: {reason}"));
            Ok(())
        }
        other => Err(other.into()),
    }
}

fn write_file(dir: &Path, name: &str, text: &str, files: &mut Vec<String>) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    files.push(name.to_string());
    Ok(())
}

fn write_fields<const D: usize>(
    dir: &Path,
    field: &Field,
    grid: &Grid<D>,
    snapshots: bool,
    files: &mut Vec<String>,
) -> anyhow::Result<()> {
    let k = field.level();
    if snapshots {
        let name = snapshot_name(k);
        write_snapshot(&dir.join(&name), field, grid).with_context(|| format!("writing {name}"))?;
        files.push(name);
    }
    let name = intensity_name(k);
    write_intensity(&dir.join(&name), field, grid).with_context(|| format!("writing {name}"))?;
    files.push(name);
    Ok(())
}

fn run<const D: usize>(
    cfg: &RunConfig,
    problem: &Problem<D>,
    enforce: bool,
    dir: &Path,
    manifest: &mut Manifest,
    files: &mut Vec<String>,
) -> anyhow::Result<()> {
    let options = TransientOptions {
        snapshot_steps: cfg.snapshot_steps()?,
        enforce_stability: enforce,
        initial: None,
    };
    let result = match run_transient(problem, &options) {
        Ok(r) => r,
        Err(e) => return solver_failure(e, manifest),
    };
    for f in &result.snapshots {
        write_fields(dir, f, &problem.grid, cfg.output.snapshots, files)?;
    }
    let mut hist = String::from("k,t,sup_norm,bound\n");
    for (k, (s, b)) in result.sup_history.iter().zip(&result.bound_history).enumerate() {
        let _ = writeln!(hist, "{k},{:.16e},{s:.16e},{b:.16e}", problem.grid.time(k));
    }
    write_file(dir, "history.csv", &hist, files)?;

    manifest.steps = Some(result.steps);
    manifest.timing = Some(result.timing);
    manifest.bound_holds = Some(result.bound_holds);
    manifest.positive = Some(result.positive);
    manifest.min_value = Some(result.min_value);
    manifest.histories.sup_norm = Some(result.sup_history.clone());
    manifest.histories.bound = Some(result.bound_history.clone());
    println!(
        "{} steps in {:.3} s; sup norm {:.6e}; bound {}; positive {}",
        result.steps,
        result.timing.total_seconds,
        result.sup_history.last().copied().unwrap_or(0.0),
        if result.bound_holds { "holds" } else { "violated" },
        result.positive
    );
    if let Some(k) = result.first_bound_violation {
        manifest.fail(Status::Failed, format!("a-priori bound violated at step {k}"));
    }
    Ok(())
}

fn steady<const D: usize>(
    cfg: &RunConfig,
    problem: &Problem<D>,
    enforce: bool,
    dir: &Path,
    manifest: &mut Manifest,
    files: &mut Vec<String>,
) -> anyhow::Result<()> {
    let options = SteadyOptions {
        tol: cfg.steady.tol,
        max_iters: cfg.steady.max_iters,
        initial: None,
        enforce_stability: enforce,
        record_error: cfg.steady.record_error,
    };
    let result = match solve_stationary(problem, &options) {
        Ok(r) => r,
        Err(e) => return solver_failure(e, manifest),
    };
    let mut field = result.field.clone();
    field.set_level(result.iterations);
    write_fields(dir, &field, &problem.grid, cfg.output.snapshots, files)?;
    let mut hist = String::from("k,residual");
    if result.error_history.is_some() {
        hist.push_str(",error");
    }
    hist.push('\n');
    for (i, r) in result.residual_history.iter().enumerate() {
        let k = i + 1;
        let _ = write!(hist, "{k},{r:.16e}");
        if let Some(e) = &result.error_history {
            let _ = write!(hist, ",{:.16e}", e[k]);
        }
        hist.push('\n');
    }
    write_file(dir, "residuals.csv", &hist, files)?;

    manifest.rho = result.rho.or(manifest.rho);
    manifest.lambda = result.lambda.or(manifest.lambda);
    manifest.stability_report = Some(result.report.clone());
    manifest.steps = Some(result.iterations);
    manifest.timing = Some(result.timing);
    manifest.converged = Some(result.converged);
    manifest.tol = Some(result.tol);
    manifest.error_proxy = result.error_proxy;
    manifest.steady_residual = Some(result.steady_residual);
    manifest.empirical_rate = result.empirical_rate();
    manifest.histories.residual = Some(result.residual_history.clone());
    manifest.histories.error = result.error_history.clone();
    println!(
        "{} iterations in {:.3} s; last residual {:.3e}; rho {}; empirical rate {}",
        result.iterations,
        result.timing.total_seconds,
        result.residual_history.last().copied().unwrap_or(0.0),
        result.rho.map_or("n/a".into(), |r| format!("{r:.6}")),
        result.empirical_rate().map_or("n/a".into(), |r| format!("{r:.6}")),
    );
    if !result.converged {
        manifest.fail(
            Status::NotConverged,
            format!("residual above {:e} after {} iterations", result.tol, result.iterations),
        );
    }
    Ok(())
}

fn base_2d(cfg: &RunConfig) -> GridConfig2D {
    let g = &cfg.grid;
    GridConfig2D {
        lengths: [g.lengths[0], g.lengths[1]],
        cells: [g.cells[0], g.cells[1]],
        directions: g.directions.unwrap_or(0),
        dt: g.dt,
        t_final: g.t_final,
    }
}

fn base_3d(cfg: &RunConfig) -> GridConfig3D {
    let g = &cfg.grid;
    GridConfig3D {
        lengths: [g.lengths[0], g.lengths[1], g.lengths[2]],
        cells: [g.cells[0], g.cells[1], g.cells[2]],
        polar: g.polar.unwrap_or(0),
        azimuthal: g.azimuthal.unwrap_or(0),
        dt: g.dt,
        t_final: g.t_final,
    }
}

fn sine(lengths: &[f64]) -> Spatial {
    let mut k = [0.0; 3];
    for (a, l) in lengths.iter().enumerate() {
        k[a] = PI / l;
    }
    Spatial::SineProduct { amp: 0.5, wavenumbers: k }
}

fn affine(lengths: &[f64]) -> Spatial {
    let mut slope = [0.0; 3];
    for (a, l) in lengths.iter().enumerate() {
        slope[a] = 0.2 / (a as f64 + 1.0) / l;
    }
    Spatial::Affine { c0: 1.0, slope }
}

fn convergence_2d(cfg: &RunConfig) -> Result<Vec<ConvergenceStudy>, SolverError> {
    let medium = cfg.medium().map_err(config_to_solver)?;
    let pf = cfg.phase_function().map_err(config_to_solver)?;
    let base = base_2d(cfg);
    let space_time = Separable2D {
        decay: 1.0,
        spatial: sine(&base.lengths),
        a0: 1.0,
        modes: vec![(1, 0.3, 0.0)],
    };
    let angular = Separable2D {
        decay: 0.0,
        spatial: affine(&base.lengths),
        a0: 1.0,
        modes: vec![(1, 0.3, 0.0), (2, 0.1, 0.2)],
    };
    Ok(vec![
        run_convergence_study::<2>(
            Arc::new(space_time),
            space_time_grids_2d(&base, cfg.convergence.levels)?,
            &medium,
            &pf,
            StudyKind::SpaceTime,
        )?,
        run_convergence_study::<2>(
            Arc::new(angular),
            angular_grids_2d(&base, &cfg.convergence.angular)?,
            &medium,
            &pf,
            StudyKind::Angular,
        )?,
    ])
}

fn convergence_3d(cfg: &RunConfig) -> Result<Vec<ConvergenceStudy>, SolverError> {
    let medium = cfg.medium().map_err(config_to_solver)?;
    let pf = cfg.phase_function().map_err(config_to_solver)?;
    let base = base_3d(cfg);
    let space_time = Separable3D {
        decay: 1.0,
        spatial: sine(&base.lengths),
        a0: 1.0,
        b: [0.1, 0.2, 0.3],
    };
    let angular = Separable3D {
        decay: 0.0,
        spatial: affine(&base.lengths),
        a0: 1.0,
        b: [0.1, 0.2, 0.3],
    };
    let counts: Vec<(usize, usize)> = cfg.convergence.angular.iter().map(|&p| (p, 2 * p)).collect();
    Ok(vec![
        run_convergence_study::<3>(
            Arc::new(space_time),
            space_time_grids_3d(&base, cfg.convergence.levels)?,
            &medium,
            &pf,
            StudyKind::SpaceTime,
        )?,
        run_convergence_study::<3>(
            Arc::new(angular),
            angular_grids_3d(&base, &counts)?,
            &medium,
            &pf,
            StudyKind::Angular,
        )?,
    ])
}

fn config_to_solver(e: ConfigFileError) -> SolverError {
    rte_core::ConfigError::invalid("config", e.to_string()).into()
}

fn describe_condition(c: &ConditionResult) -> String {
    if !c.applicable {
        return format!("  {:<16} not applicable{}\n", c.name, c.note.as_deref().map_or(String::new(), |n| format!(" ({n})")));
    }
    let mut s = format!(
        "  {:<16} lhs {:.6e}  bound {:.6e}  {}",
        c.name,
        c.lhs,
        c.bound,
        if c.pass { "pass" } else { "FAIL" }
    );
    if let Some(t) = c.threshold {
        let _ = write!(s, "  threshold {t:.4}");
    }
    if let Some(m) = c.min_directions {
        let _ = write!(s, "  min directions {m}");
    }
    s.push('\n');
    s
}

fn describe(report: &StabilityReport, rho: Option<f64>) -> String {
    let b = &report.bounds;
    let mut s = format!(
        "dimension {}\nmedium: c+ {:.6}  mu* {:.6}  (c mu_a)- {:.6}\n",
        report.dimension, b.c_plus, b.mu_star, b.c_mua_minus
    );
    let _ = writeln!(
        s,
        "CFL lhs {:.6}  {}",
        report.cfl_lhs,
        if report.cfl_pass { "pass" } else { "FAIL" }
    );
    s.push_str("angular conditions:\n");
    for c in &report.theta_conditions {
        s.push_str(&describe_condition(c));
    }
    if let Some(k) = &report.kernel_sup {
        s.push_str(&describe_condition(k));
    }
    let _ = writeln!(s, "theta condition {}", if report.theta_pass { "pass" } else { "FAIL" });
    if let Some(l) = report.lambda() {
        let _ = writeln!(s, "lambda {l:.6}");
    }
    if let Some(r) = rho {
        let _ = writeln!(s, "rho {r:.7}");
    }
    let _ = writeln!(s, "overall {}", if report.overall_pass { "pass" } else { "FAIL" });
    s
}
