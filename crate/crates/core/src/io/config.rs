//! JSON run configuration: parsing, validation and problem construction.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::Expr;
use crate::error::ConfigError;
use crate::phase::PhaseFunction;
use crate::phase_space::{
    Coefficient, DeclaredBounds, Direction, Grid2D, Grid3D, GridConfig2D, GridConfig3D, Medium,
};
use crate::sources::{PhaseSpaceFn, Problem, Sources};
use crate::stationary::DEFAULT_TOL;

/// Relative tolerance (times the domain size) for boundary-window membership.
pub const RANGE_RTOL: f64 = 1e-9;

const SOURCE_VARS: [&str; 9] = ["t", "x1", "x2", "x3", "theta", "phi", "xi1", "xi2", "xi3"];
const SPACE_VARS: [&str; 3] = ["x1", "x2", "x3"];

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field_err(path: impl Into<String>, message: impl std::fmt::Display) -> ConfigFileError {
    ConfigFileError::Field {
        path: path.into(),
        message: message.to_string(),
    }
}

fn from_config_error(prefix: &str, e: ConfigError) -> ConfigFileError {
    match e {
        ConfigError::NonPositive { field, value } => {
            field_err(format!("{prefix}.{field}"), format!("must be positive, got {value}"))
        }
        ConfigError::Invalid { field, reason } => field_err(format!("{prefix}.{field}"), reason),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Check,
    Run,
    Steady,
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polar: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuthal: Option<usize>,
    pub dt: f64,
    pub t_final: f64,
}

/// A number or an expression in `x1, x2, x3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Expression(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumBlock {
    pub c: Scalar,
    pub mu_a: Scalar,
    pub mu_s: Scalar,
    #[serde(default, skip_serializing_if = "is_default_bounds")]
    pub declared: DeclaredBounds,
}

fn is_default_bounds(b: &DeclaredBounds) -> bool {
    *b == DeclaredBounds::default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayBlock {
    pub c: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelBlock {
    Isotropic,
    HenyeyGreenstein {
        g: f64,
    },
    Table {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<DecayBlock>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    X1Low,
    X1High,
    X2Low,
    X2High,
}

impl Face {
    fn axis_side(self) -> (usize, bool) {
        match self {
            Face::X1Low => (0, false),
            Face::X1High => (0, true),
            Face::X2Low => (1, false),
            Face::X2High => (1, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceBlock {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    /// `exp(-(theta - theta0)^2 / (2 sigma^2)) / (sqrt(2 pi) sigma)` on a
    /// window of one face of a 2D domain, zero elsewhere.
    BoundaryGaussian {
        face: Face,
        window: [f64; 2],
        #[serde(default = "half_pi")]
        theta0: f64,
        sigma: f64,
    },
    /// Expression in `t, x1, x2, x3, theta, phi, xi1, xi2, xi3`.
    Expression {
        expr: String,
    },
}

fn half_pi() -> f64 {
    PI / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SourcesBlock {
    #[serde(default)]
    pub q: SourceBlock,
    #[serde(default)]
    pub initial: SourceBlock,
    #[serde(default)]
    pub inflow: SourceBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    /// Snapshot times; default `{50, 100, 200, 400}` when `T = 400`, else multiples of `T/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            directory: None,
            snapshot_times: None,
            snapshots: true,
        }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyBlock {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "yes")]
    pub record_error: bool,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    200_000
}

impl Default for SteadyBlock {
    fn default() -> Self {
        SteadyBlock {
            tol: DEFAULT_TOL,
            max_iters: default_max_iters(),
            record_error: true,
        }
    }
}

/// Manufactured-solution refinement study run by the `convergence` mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceBlock {
    /// Number of space-time levels, halving `dx` and `dt` from the grid block.
    #[serde(default = "four")]
    pub levels: usize,
    /// Direction counts for the angular study (2D) or polar counts (3D, with
    /// twice as many azimuthal nodes).
    #[serde(default = "angular_default")]
    pub angular: Vec<usize>,
}

fn four() -> usize {
    4
}

fn angular_default() -> Vec<usize> {
    vec![8, 16, 32, 64]
}

impl Default for ConvergenceBlock {
    fn default() -> Self {
        ConvergenceBlock {
            levels: 4,
            angular: angular_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default = "two")]
    pub dimension: usize,
    pub grid: GridBlock,
    pub medium: MediumBlock,
    pub kernel: KernelBlock,
    #[serde(default)]
    pub sources: SourcesBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub steady: SteadyBlock,
    #[serde(default)]
    pub convergence: ConvergenceBlock,
    #[serde(default = "yes")]
    pub enforce_stability: bool,
}

fn two() -> usize {
    2
}

/// A validated problem of either dimension.
#[derive(Debug, Clone)]
pub enum BuiltProblem {
    Two(Problem<2>),
    Three(Problem<3>),
}

/// Reads and validates a configuration file. Relative paths inside it are
/// resolved against the file's directory.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig, ConfigFileError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        field_err(if path == "." { "<root>".into() } else { path }, e.into_inner())
    })?;
    if let KernelBlock::Table { path, .. } = &mut cfg.kernel {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigFileError> {
        let d = self.dimension;
        if d != 2 && d != 3 {
            return Err(field_err("dimension", format!("must be 2 or 3, got {d}")));
        }
        let g = &self.grid;
        if g.lengths.len() != d {
            return Err(field_err("grid.lengths", format!("expected {d} entries")));
        }
        if g.cells.len() != d {
            return Err(field_err("grid.cells", format!("expected {d} entries")));
        }
        if d == 2 {
            if g.directions.is_none() {
                return Err(field_err("grid.directions", "required for dimension 2"));
            }
            if g.polar.is_some() || g.azimuthal.is_some() {
                return Err(field_err("grid", "polar/azimuthal apply to dimension 3 only"));
            }
        } else {
            if g.directions.is_some() {
                return Err(field_err("grid.directions", "use polar and azimuthal in dimension 3"));
            }
            if g.polar.is_none() || g.azimuthal.is_none() {
                return Err(field_err("grid", "polar and azimuthal are required for dimension 3"));
            }
        }
        if let KernelBlock::Table { path, .. } = &self.kernel {
            if !path.is_file() {
                return Err(field_err("kernel.path", format!("{} does not exist", path.display())));
            }
        }
        if !(self.steady.tol.is_finite() && self.steady.tol > 0.0) {
            return Err(field_err("steady.tol", "must be positive"));
        }
        if self.steady.max_iters == 0 {
            return Err(field_err("steady.max_iters", "must be positive"));
        }
        if self.convergence.levels < 2 {
            return Err(field_err("convergence.levels", "need at least two levels"));
        }
        if self.convergence.angular.len() < 2 || self.convergence.angular.contains(&0) {
            return Err(field_err("convergence.angular", "need at least two positive counts"));
        }
        for (name, s) in [
            ("q", &self.sources.q),
            ("initial", &self.sources.initial),
            ("inflow", &self.sources.inflow),
        ] {
            if let SourceBlock::BoundaryGaussian { sigma, window, .. } = s {
                if d != 2 {
                    return Err(field_err(format!("sources.{name}"), "boundary_gaussian is 2D only"));
                }
                if name != "inflow" {
                    return Err(field_err(format!("sources.{name}"), "boundary_gaussian is inflow data"));
                }
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(field_err(format!("sources.{name}.sigma"), "must be positive"));
                }
                if !(window[0] <= window[1]) {
                    return Err(field_err(format!("sources.{name}.window"), "must be increasing"));
                }
            }
        }
        self.build()?;
        self.snapshot_steps()?;
        Ok(())
    }

    pub fn grid_2d(&self) -> Result<Grid2D, ConfigFileError> {
        let g = &self.grid;
        Grid2D::new(&GridConfig2D {
            lengths: [g.lengths[0], g.lengths[1]],
            cells: [g.cells[0], g.cells[1]],
            directions: g.directions.unwrap_or(0),
            dt: g.dt,
            t_final: g.t_final,
        })
        .map_err(|e| from_config_error("grid", e))
    }

    pub fn grid_3d(&self) -> Result<Grid3D, ConfigFileError> {
        let g = &self.grid;
        Grid3D::new(&GridConfig3D {
            lengths: [g.lengths[0], g.lengths[1], g.lengths[2]],
            cells: [g.cells[0], g.cells[1], g.cells[2]],
            polar: g.polar.unwrap_or(0),
            azimuthal: g.azimuthal.unwrap_or(0),
            dt: g.dt,
            t_final: g.t_final,
        })
        .map_err(|e| from_config_error("grid", e))
    }

    pub fn medium(&self) -> Result<Medium, ConfigFileError> {
        let coeff = |name: &str, s: &Scalar| -> Result<Coefficient, ConfigFileError> {
            match s {
                Scalar::Number(v) => Ok(Coefficient::Constant(*v)),
                Scalar::Expression(src) => {
                    let e = Expr::parse(src, &SPACE_VARS)
                        .map_err(|e| field_err(format!("medium.{name}"), e))?;
                    Ok(Coefficient::function(move |x: &[f64]| {
                        let mut v = [0.0; 3];
                        v[..x.len()].copy_from_slice(x);
                        e.eval(&v)
                    }))
                }
            }
        };
        let m = &self.medium;
        Ok(Medium {
            c: coeff("c", &m.c)?,
            mu_a: coeff("mu_a", &m.mu_a)?,
            mu_s: coeff("mu_s", &m.mu_s)?,
            declared: m.declared.clone(),
        })
    }

    pub fn phase_function(&self) -> Result<PhaseFunction, ConfigFileError> {
        let d = self.dimension;
        match &self.kernel {
            KernelBlock::Isotropic => Ok(PhaseFunction::isotropic(d)),
            KernelBlock::HenyeyGreenstein { g } => {
                let pf = if d == 2 {
                    PhaseFunction::hg2d(*g)
                } else {
                    PhaseFunction::hg3d(*g)
                };
                pf.map_err(|e| field_err("kernel.g", e))
            }
            KernelBlock::Table { path, decay } => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
                    path: path.clone(),
                    source,
                })?;
                let pf = PhaseFunction::parse_table(d, &text).map_err(|e| field_err("kernel.path", e))?;
                match decay {
                    Some(DecayBlock { c, r }) => pf
                        .with_analytic_decay(*c, *r)
                        .map_err(|e| field_err("kernel.decay", e)),
                    None => Ok(pf),
                }
            }
        }
    }

    fn source(&self, name: &str, block: &SourceBlock) -> Result<PhaseSpaceFn, ConfigFileError> {
        Ok(match block {
            SourceBlock::Zero => PhaseSpaceFn::Zero,
            SourceBlock::Constant { value } => PhaseSpaceFn::Constant(*value),
            SourceBlock::BoundaryGaussian {
                face,
                window,
                theta0,
                sigma,
            } => {
                let (axis, high) = face.axis_side();
                let lengths = self.grid.lengths.clone();
                let tol = RANGE_RTOL * lengths.iter().fold(0.0f64, |m, l| m.max(*l));
                let plane = if high { lengths[axis] } else { 0.0 };
                let along = 1 - axis;
                let (w, th0, sg) = (*window, *theta0, *sigma);
                let norm = 1.0 / ((2.0 * PI).sqrt() * sg);
                PhaseSpaceFn::Function {
                    f: Arc::new(move |_t, x: &[f64], d: &Direction| {
                        let on_face = (x[axis] - plane).abs() <= tol;
                        let inside = x[along] >= w[0] - tol && x[along] <= w[1] + tol;
                        if on_face && inside {
                            let z = d.theta - th0;
                            norm * (-z * z / (2.0 * sg * sg)).exp()
                        } else {
                            0.0
                        }
                    }),
                    time_independent: true,
                }
            }
            SourceBlock::Expression { expr } => {
                let e = Expr::parse(expr, &SOURCE_VARS)
                    .map_err(|e| field_err(format!("sources.{name}.expr"), e))?;
                let time_independent = !e.uses(0);
                PhaseSpaceFn::Function {
                    f: Arc::new(move |t, x: &[f64], d: &Direction| {
                        let mut v = [0.0; 9];
                        v[0] = t;
                        v[1..1 + x.len()].copy_from_slice(x);
                        v[4] = d.theta;
                        v[5] = d.phi;
                        v[6..9].copy_from_slice(&d.xi);
                        e.eval(&v)
                    }),
                    time_independent,
                }
            }
        })
    }

    pub fn sources(&self) -> Result<Sources, ConfigFileError> {
        let s = &self.sources;
        Ok(Sources {
            q: self.source("q", &s.q)?,
            initial: self.source("initial", &s.initial)?,
            inflow: self.source("inflow", &s.inflow)?,
        })
    }

    pub fn build(&self) -> Result<BuiltProblem, ConfigFileError> {
        let medium = self.medium()?;
        let pf = self.phase_function()?;
        let sources = self.sources()?;
        Ok(if self.dimension == 2 {
            BuiltProblem::Two(Problem::new(self.grid_2d()?, medium, pf, sources))
        } else {
            BuiltProblem::Three(Problem::new(self.grid_3d()?, medium, pf, sources))
        })
    }

    /// Step indices at which snapshots are written.
    pub fn snapshot_steps(&self) -> Result<Vec<usize>, ConfigFileError> {
        let (dt, t_final) = (self.grid.dt, self.grid.t_final);
        let times: Vec<f64> = match &self.output.snapshot_times {
            Some(t) => t.clone(),
            None if (t_final - 400.0).abs() <= 1e-9 * 400.0 => vec![50.0, 100.0, 200.0, 400.0],
            None => (1..=4).map(|j| j as f64 * t_final / 4.0).collect(),
        };
        let explicit = self.output.snapshot_times.is_some();
        let mut steps = Vec::with_capacity(times.len());
        for (i, t) in times.iter().enumerate() {
            if !(0.0..=t_final * (1.0 + 1e-12)).contains(t) {
                return Err(field_err(
                    format!("output.snapshot_times[{i}]"),
                    format!("{t} is outside [0, {t_final}]"),
                ));
            }
            let ratio = t / dt;
            let k = ratio.round();
            if explicit && (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
                return Err(field_err(
                    format!("output.snapshot_times[{i}]"),
                    format!("{t} is not a multiple of dt = {dt}"),
                ));
            }
            steps.push(k as usize);
        }
        steps.sort_unstable();
        steps.dedup();
        Ok(steps)
    }
}
