//! Scattering phase functions `p(x; xi, xi') = p~(x; alpha)`, angular
//! quadrature sums and the angular-resolution stability conditions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::PhaseError;
use crate::phase_space::{Direction, Grid};
use crate::quadrature::adaptive_simpson;

/// Samples per period used for dense sup estimates of built-in kernels.
pub const SUP_SAMPLES: usize = 4096;
/// Inflation applied to sampled sups so they never under-estimate.
pub const SUP_SAFETY: f64 = 1.01;

const REFERENCE_TOL: f64 = 1e-13;
const NORMALIZATION_TOL: f64 = 1e-6;

pub type AngularFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// `|c_n| <= C r^|n|` for the Fourier coefficients of an analytic kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticDecay {
    pub c: f64,
    pub r: f64,
}

#[derive(Clone)]
pub enum KernelShape {
    Isotropic,
    HenyeyGreenstein { g: f64 },
    Tabulated(PeriodicCubic),
    Custom {
        eval: AngularFn,
        position_dependent: bool,
    },
}

impl fmt::Debug for KernelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelShape::Isotropic => write!(f, "Isotropic"),
            KernelShape::HenyeyGreenstein { g } => write!(f, "HenyeyGreenstein {{ g: {g} }}"),
            KernelShape::Tabulated(t) => write!(f, "Tabulated({} knots)", t.knots.len()),
            KernelShape::Custom {
                position_dependent, ..
            } => write!(f, "Custom {{ position_dependent: {position_dependent} }}"),
        }
    }
}

/// A phase function in 2D (normalized over the circle) or 3D (over the sphere).
#[derive(Debug, Clone)]
pub struct PhaseFunction {
    dimension: usize,
    shape: KernelShape,
    d2_bound: Option<f64>,
    analytic_decay: Option<AnalyticDecay>,
}

fn check_g(g: f64) -> Result<(), PhaseError> {
    if (0.0..1.0).contains(&g) {
        Ok(())
    } else {
        Err(PhaseError::Anisotropy(g))
    }
}

/// Max of `|f|` over `SUP_SAMPLES` uniform nodes on `[0, 2pi)`.
fn sampled_sup(f: impl Fn(f64) -> f64) -> f64 {
    (0..SUP_SAMPLES)
        .map(|k| f(2.0 * PI * k as f64 / SUP_SAMPLES as f64).abs())
        .fold(0.0, f64::max)
}

impl PhaseFunction {
    /// Uniform scattering: `1/(2pi)` in 2D, `1/(4pi)` in 3D.
    pub fn isotropic(dimension: usize) -> Self {
        assert!(dimension == 2 || dimension == 3);
        PhaseFunction {
            dimension,
            shape: KernelShape::Isotropic,
            d2_bound: Some(0.0),
            analytic_decay: None,
        }
    }

    /// 2D Poisson kernel `(1/2pi)(1-g^2)/(1-2g cos a+g^2)`, with Fourier
    /// coefficients `g^|n|/(2pi)`.
    pub fn hg2d(g: f64) -> Result<Self, PhaseError> {
        check_g(g)?;
        let mut pf = PhaseFunction {
            dimension: 2,
            shape: KernelShape::HenyeyGreenstein { g },
            d2_bound: None,
            analytic_decay: Some(AnalyticDecay {
                c: 1.0 / (2.0 * PI),
                r: g,
            }),
        };
        pf.d2_bound = Some(SUP_SAFETY * sampled_sup(|a| pf.hg_d2(a).unwrap()));
        Ok(pf)
    }

    /// 3D Henyey-Greenstein kernel `(1/4pi)(1-g^2)/(1-2g cos a+g^2)^{3/2}`.
    pub fn hg3d(g: f64) -> Result<Self, PhaseError> {
        check_g(g)?;
        let mut pf = PhaseFunction {
            dimension: 3,
            shape: KernelShape::HenyeyGreenstein { g },
            d2_bound: None,
            analytic_decay: None,
        };
        pf.d2_bound = Some(SUP_SAFETY * sampled_sup(|a| pf.hg_d2(a).unwrap()));
        Ok(pf)
    }

    /// Kernel interpolated from `(alpha, p~)` samples on `[0, pi]` by an
    /// even periodic cubic spline, rescaled to unit mass.
    pub fn tabulated(dimension: usize, table: &[(f64, f64)]) -> Result<Self, PhaseError> {
        assert!(dimension == 2 || dimension == 3);
        let mut spline = PeriodicCubic::even_from_table(table)?;
        let mass = spline.mass(dimension);
        if !(mass.is_finite() && mass > 0.0) || (mass - 1.0).abs() > 1e-3 {
            return Err(PhaseError::Normalization(mass));
        }
        spline.scale(1.0 / mass);
        let min = (0..SUP_SAMPLES)
            .map(|k| spline.eval(PI * k as f64 / SUP_SAMPLES as f64))
            .fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            return Err(PhaseError::Table(format!(
                "interpolant becomes negative (min {min:.3e}); refine the table"
            )));
        }
        let d2 = spline.second_derivative_sup();
        Ok(PhaseFunction {
            dimension,
            shape: KernelShape::Tabulated(spline),
            d2_bound: Some(d2),
            analytic_decay: None,
        })
    }

    /// Parses the two-column text format: one header line, then `alpha p~`
    /// rows (whitespace or comma separated), `#` comments allowed.
    pub fn parse_table(dimension: usize, text: &str) -> Result<Self, PhaseError> {
        let mut rows = Vec::new();
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next().is_none() {
            return Err(PhaseError::Table("empty table".into()));
        }
        for (k, line) in lines.enumerate() {
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(PhaseError::Table(format!(
                    "row {}: expected two columns, got {}",
                    k + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| PhaseError::Table(format!("row {}: {s:?}: {e}", k + 1)))
            };
            rows.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::tabulated(dimension, &rows)
    }

    /// Angle-only kernel from closures. `d2` is the closed-form second
    /// derivative used for the sup bound.
    pub fn custom_angular(
        dimension: usize,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<Self, PhaseError> {
        assert!(dimension == 2 || dimension == 3);
        let d2_bound = d2.map(|d| SUP_SAFETY * sampled_sup(d));
        let pf = PhaseFunction {
            dimension,
            shape: KernelShape::Custom {
                eval: Arc::new(move |_x: &[f64], a| eval(a)),
                position_dependent: false,
            },
            d2_bound,
            analytic_decay: None,
        };
        pf.check_normalized()?;
        Ok(pf)
    }

    /// Position-dependent kernel; the caller supplies the uniform bound on
    /// the second angular derivative, if known.
    pub fn custom(
        dimension: usize,
        eval: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        d2_bound: Option<f64>,
    ) -> Self {
        assert!(dimension == 2 || dimension == 3);
        PhaseFunction {
            dimension,
            shape: KernelShape::Custom {
                eval: Arc::new(eval),
                position_dependent: true,
            },
            d2_bound,
            analytic_decay: None,
        }
    }

    /// Attaches a user-chosen Fourier decay pair `(C, r)`.
    pub fn with_analytic_decay(mut self, c: f64, r: f64) -> Result<Self, PhaseError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(PhaseError::DecayConstant(c));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(PhaseError::DecayRatio(r));
        }
        self.analytic_decay = Some(AnalyticDecay { c, r });
        Ok(self)
    }

    fn check_normalized(&self) -> Result<(), PhaseError> {
        let x = [0.0; 3];
        let mass = match self.dimension {
            2 => 2.0 * adaptive_simpson(&|a| self.eval(&x, a), 0.0, PI, REFERENCE_TOL),
            _ => {
                2.0 * PI
                    * adaptive_simpson(&|a| self.eval(&x, a) * a.sin(), 0.0, PI, REFERENCE_TOL)
            }
        };
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(PhaseError::Normalization(mass));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// `sup |d^2 p~ / d alpha^2|`, when known.
    pub fn d2_bound(&self) -> Option<f64> {
        self.d2_bound
    }

    pub fn analytic_decay(&self) -> Option<AnalyticDecay> {
        self.analytic_decay
    }

    pub fn anisotropy(&self) -> Option<f64> {
        match self.shape {
            KernelShape::HenyeyGreenstein { g } => Some(g),
            KernelShape::Isotropic => Some(0.0),
            _ => None,
        }
    }

    pub fn is_position_independent(&self) -> bool {
        !matches!(
            self.shape,
            KernelShape::Custom {
                position_dependent: true,
                ..
            }
        )
    }

    fn norm_const(&self) -> f64 {
        if self.dimension == 2 {
            1.0 / (2.0 * PI)
        } else {
            1.0 / (4.0 * PI)
        }
    }

    /// `p~(x; alpha)`.
    pub fn eval(&self, x: &[f64], alpha: f64) -> f64 {
        match &self.shape {
            KernelShape::Isotropic => self.norm_const(),
            KernelShape::HenyeyGreenstein { g } => {
                let d = 1.0 + g * g - 2.0 * g * alpha.cos();
                let base = self.norm_const() * (1.0 - g * g);
                if self.dimension == 2 {
                    base / d
                } else {
                    base / (d * d.sqrt())
                }
            }
            KernelShape::Tabulated(s) => s.eval(alpha),
            KernelShape::Custom { eval, .. } => eval(x, alpha),
        }
    }

    /// Closed-form `d^2 p~ / d alpha^2` where available.
    pub fn d2_alpha(&self, alpha: f64) -> Option<f64> {
        match &self.shape {
            KernelShape::Isotropic => Some(0.0),
            KernelShape::HenyeyGreenstein { .. } => self.hg_d2(alpha),
            KernelShape::Tabulated(s) => Some(s.eval_d2(alpha)),
            KernelShape::Custom { .. } => None,
        }
    }

    fn hg_d2(&self, alpha: f64) -> Option<f64> {
        let KernelShape::HenyeyGreenstein { g } = self.shape else {
            return None;
        };
        let k = self.norm_const() * (1.0 - g * g);
        let d = 1.0 + g * g - 2.0 * g * alpha.cos();
        let d1 = 2.0 * g * alpha.sin();
        let d2 = 2.0 * g * alpha.cos();
        Some(if self.dimension == 2 {
            k * (2.0 * d1 * d1 / (d * d * d) - d2 / (d * d))
        } else {
            k * (3.75 * d1 * d1 * d.powf(-3.5) - 1.5 * d2 * d.powf(-2.5))
        })
    }

    /// `P(u)` with `u = cos alpha`, and its first two derivatives in `u`, for
    /// kernels with a closed form in `u`.
    pub fn cos_derivatives(&self, u: f64) -> Option<[f64; 3]> {
        match self.shape {
            KernelShape::Isotropic => Some([self.norm_const(), 0.0, 0.0]),
            KernelShape::HenyeyGreenstein { g } if self.dimension == 3 => {
                let k = self.norm_const() * (1.0 - g * g);
                let d = 1.0 + g * g - 2.0 * g * u;
                let p = k * d.powf(-1.5);
                let p1 = 3.0 * g * k * d.powf(-2.5);
                let p2 = 15.0 * g * g * k * d.powf(-3.5);
                Some([p, p1, p2])
            }
            _ => None,
        }
    }

    /// `p(x; a, b)` for two grid directions.
    pub fn eval_between(&self, x: &[f64], a: &Direction, b: &Direction) -> f64 {
        if self.dimension == 2 {
            return self.eval(x, b.theta - a.theta);
        }
        let u = a.dot(b).clamp(-1.0, 1.0);
        match self.cos_derivatives(u) {
            Some([p, _, _]) => p,
            None => self.eval(x, u.acos()),
        }
    }

    /// `sup_alpha p~`, used by the stationary solvability hypothesis.
    pub fn sup_value(&self) -> f64 {
        let x = [0.0; 3];
        match self.shape {
            KernelShape::Isotropic => self.norm_const(),
            KernelShape::HenyeyGreenstein { .. } => self.eval(&x, 0.0),
            _ => SUP_SAFETY * sampled_sup(|a| self.eval(&x, a)),
        }
    }

    /// Fourier coefficient `c_n = (1/2pi) int p~(a) e^{-ina} da` of a
    /// position-independent 2D kernel.
    pub fn fourier_coefficient(&self, n: i64) -> f64 {
        let n_abs = n.unsigned_abs() as i32;
        match self.shape {
            KernelShape::Isotropic => {
                if n == 0 {
                    1.0 / (2.0 * PI)
                } else {
                    0.0
                }
            }
            KernelShape::HenyeyGreenstein { g } if self.dimension == 2 => {
                g.powi(n_abs) / (2.0 * PI)
            }
            _ => {
                let x = [0.0; 3];
                let f = |a: f64| self.eval(&x, a) * (n_abs as f64 * a).cos();
                adaptive_simpson(&f, 0.0, PI, REFERENCE_TOL) / PI
            }
        }
    }

    /// Mean scattering cosine `2pi int p~(a) cos a sin a da` of a 3D kernel.
    pub fn mean_cosine(&self) -> f64 {
        match self.shape {
            KernelShape::Isotropic => 0.0,
            KernelShape::HenyeyGreenstein { g } => g,
            _ => {
                let x = [0.0; 3];
                let f = |a: f64| self.eval(&x, a) * a.cos() * a.sin();
                2.0 * PI * adaptive_simpson(&f, 0.0, PI, REFERENCE_TOL)
            }
        }
    }
}

/// Outcome of one sufficient stability condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: &'static str,
    pub applicable: bool,
    pub lhs: f64,
    pub bound: f64,
    /// `lhs <= bound`.
    pub pass: bool,
    /// `lhs < bound`, the form required by the stationary iteration.
    pub strict_pass: bool,
    pub margin: f64,
    /// Real-valued resolution threshold, for the analytic condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Smallest admissible direction count, for the analytic condition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_directions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionResult {
    fn evaluated(name: &'static str, lhs: f64, bound: f64) -> Self {
        ConditionResult {
            name,
            applicable: true,
            lhs,
            bound,
            pass: lhs <= bound,
            strict_pass: lhs < bound,
            margin: bound - lhs,
            threshold: None,
            min_directions: None,
            note: None,
        }
    }

    fn inapplicable(name: &'static str, note: &str) -> Self {
        ConditionResult {
            name,
            applicable: false,
            lhs: f64::NAN,
            bound: f64::NAN,
            pass: false,
            strict_pass: false,
            margin: f64::NAN,
            threshold: None,
            min_directions: None,
            note: Some(note.to_string()),
        }
    }

    /// `lhs / bound`, the contraction fraction used by the stationary rate.
    pub fn fraction(&self) -> f64 {
        if self.bound.is_infinite() {
            0.0
        } else {
            self.lhs / self.bound
        }
    }
}

/// `||d^2 p~/d alpha^2||_inf dtheta^2 <= (12/pi) mu*`.
pub fn check_theta_condition_c2(pf: &PhaseFunction, dtheta: f64, mu_star: f64) -> ConditionResult {
    match pf.d2_bound() {
        Some(d2) => ConditionResult::evaluated("theta_c2", d2 * dtheta * dtheta, 12.0 / PI * mu_star),
        None => ConditionResult::inapplicable(
            "theta_c2",
            "no second-derivative bound; use the analytic condition",
        ),
    }
}

/// `4 pi C r^M / (1 - r^M) <= mu*` (for the 2D Poisson kernel,
/// `2 g^M / (1 - g^M) <= mu*`), with the smallest admissible `M`.
pub fn check_theta_condition_analytic(
    pf: &PhaseFunction,
    m: usize,
    mu_star: f64,
) -> Result<ConditionResult, PhaseError> {
    let Some(AnalyticDecay { c, r }) = pf.analytic_decay() else {
        return Ok(ConditionResult::inapplicable(
            "theta_analytic",
            "kernel has no analytic Fourier decay data",
        ));
    };
    if !(0.0..1.0).contains(&r) {
        return Err(PhaseError::DecayRatio(r));
    }
    let rm = r.powi(m as i32);
    let lhs = 4.0 * PI * c * rm / (1.0 - rm);
    let mut out = ConditionResult::evaluated("theta_analytic", lhs, mu_star);
    // r^M <= mu*/(4 pi C + mu*)  <=>  M >= log(mu*/(4 pi C + mu*)) / log r
    let threshold = if r == 0.0 || mu_star.is_infinite() {
        0.0
    } else {
        (mu_star / (4.0 * PI * c + mu_star)).ln() / r.ln()
    };
    let mut min_m = (threshold.ceil() as usize).max(1);
    // guard the ceiling against rounding right at an integer threshold
    let holds = |k: usize| {
        let rk = r.powi(k as i32);
        4.0 * PI * c * rk / (1.0 - rk) <= mu_star
    };
    while min_m > 1 && holds(min_m - 1) {
        min_m -= 1;
    }
    while !holds(min_m) {
        min_m += 1;
    }
    out.threshold = Some(threshold);
    out.min_directions = Some(min_m);
    Ok(out)
}

/// Quadrature row sum `sum_nu w_nu p(x; xi_n, xi_nu)` at the domain centre.
pub fn scattering_row_sum<const D: usize>(pf: &PhaseFunction, grid: &Grid<D>, n: usize) -> f64 {
    let l = grid.lengths();
    let centre: [f64; D] = std::array::from_fn(|a| 0.5 * l[a]);
    scattering_row_sum_at(pf, grid, &centre, n)
}

pub fn scattering_row_sum_at<const D: usize>(
    pf: &PhaseFunction,
    grid: &Grid<D>,
    x: &[f64],
    n: usize,
) -> f64 {
    let dirs = grid.directions();
    grid.quadrature()
        .iter()
        .map(|q| q.weight * pf.eval_between(x, &dirs[n], &dirs[q.direction]))
        .sum()
}

/// Even, `2pi`-periodic cubic spline built from samples on `[0, pi]`.
///
/// The even periodic extension of a spline clamped with zero slope at both
/// ends is the periodic spline through the mirrored data, so only the half
/// period is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicCubic {
    pub fn even_from_table(table: &[(f64, f64)]) -> Result<Self, PhaseError> {
        if table.len() < 2 {
            return Err(PhaseError::Table("need at least two rows".into()));
        }
        if table.iter().any(|(a, p)| !a.is_finite() || !p.is_finite()) {
            return Err(PhaseError::Table("non-finite entry".into()));
        }
        if table.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(PhaseError::Table("angles must be strictly increasing".into()));
        }
        let (first, last) = (table[0].0, table[table.len() - 1].0);
        if first.abs() > 1e-9 || (last - PI).abs() > 1e-9 {
            return Err(PhaseError::Table(format!(
                "angles must span [0, pi], got [{first}, {last}]"
            )));
        }
        if table.iter().any(|&(_, p)| p < 0.0) {
            return Err(PhaseError::Table("negative phase-function value".into()));
        }
        let mut knots: Vec<f64> = table.iter().map(|r| r.0).collect();
        knots[0] = 0.0;
        *knots.last_mut().unwrap() = PI;
        let values: Vec<f64> = table.iter().map(|r| r.1).collect();
        let second = clamped_second_derivatives(&knots, &values);
        Ok(PeriodicCubic {
            knots,
            values,
            second,
        })
    }

    fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
        self.second.iter_mut().for_each(|v| *v *= s);
    }

    fn reduce(alpha: f64) -> f64 {
        let a = alpha.rem_euclid(2.0 * PI);
        if a > PI {
            2.0 * PI - a
        } else {
            a
        }
    }

    fn interval(&self, a: f64) -> usize {
        match self.knots.partition_point(|&k| k <= a) {
            0 => 0,
            i => (i - 1).min(self.knots.len() - 2),
        }
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let a = Self::reduce(alpha);
        let i = self.interval(a);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let h = x1 - x0;
        let (l, r) = (x1 - a, a - x0);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        m0 * l * l * l / (6.0 * h)
            + m1 * r * r * r / (6.0 * h)
            + (self.values[i] - m0 * h * h / 6.0) * l / h
            + (self.values[i + 1] - m1 * h * h / 6.0) * r / h
    }

    pub fn eval_d2(&self, alpha: f64) -> f64 {
        let a = Self::reduce(alpha);
        let i = self.interval(a);
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let t = (a - x0) / (x1 - x0);
        self.second[i] * (1.0 - t) + self.second[i + 1] * t
    }

    /// Exact sup of the piecewise-linear second derivative.
    pub fn second_derivative_sup(&self) -> f64 {
        self.second.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Exact integral of the interpolant in the given dimension's measure
    /// (3D uses adaptive quadrature against `sin alpha`).
    fn mass(&self, dimension: usize) -> f64 {
        if dimension == 2 {
            let half: f64 = (0..self.knots.len() - 1)
                .map(|i| {
                    let h = self.knots[i + 1] - self.knots[i];
                    0.5 * h * (self.values[i] + self.values[i + 1])
                        - h * h * h * (self.second[i] + self.second[i + 1]) / 24.0
                })
                .sum();
            2.0 * half
        } else {
            2.0 * PI * adaptive_simpson(&|a| self.eval(a) * a.sin(), 0.0, PI, REFERENCE_TOL)
        }
    }
}

/// Second derivatives of the cubic spline with zero end slopes.
fn clamped_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0 * h[0];
    sup[0] = h[0];
    rhs[0] = 6.0 * (y[1] - y[0]) / h[0];
    for i in 1..n - 1 {
        sub[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    sub[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = -6.0 * (y[n - 1] - y[n - 2]) / h[n - 2];

    // Thomas algorithm
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}
