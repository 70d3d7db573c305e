use std::sync::Arc;

use crate::phase::PhaseFunction;
use crate::phase_space::{Direction, Grid, Medium};
use crate::sources::{PhaseSpaceFn, Problem, Sources};

/// Angular moments of a position-independent kernel, computed once so that
/// scattering integrals of band-limited solutions are exact and cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMoments {
    /// 2D: `c_n` for `n = 0..=max_mode`.
    pub fourier: Vec<f64>,
    /// 3D: mean scattering cosine.
    pub mean_cosine: f64,
}

impl KernelMoments {
    pub fn new(pf: &PhaseFunction, max_mode: usize) -> Self {
        if pf.dimension() == 2 {
            KernelMoments {
                fourier: (0..=max_mode as i64).map(|n| pf.fourier_coefficient(n)).collect(),
                mean_cosine: 0.0,
            }
        } else {
            KernelMoments {
                fourier: Vec::new(),
                mean_cosine: pf.mean_cosine(),
            }
        }
    }
}

/// A closed-form solution with exact derivatives and scattering integral.
pub trait ManufacturedSolution<const D: usize>: Send + Sync {
    fn value(&self, t: f64, x: &[f64], d: &Direction) -> f64;
    fn time_derivative(&self, t: f64, x: &[f64], d: &Direction) -> f64;
    fn gradient(&self, t: f64, x: &[f64], d: &Direction) -> [f64; D];
    /// `int p(xi, xi') I(t, x, xi') d omega'`.
    fn scattering_integral(&self, t: f64, x: &[f64], d: &Direction, k: &KernelMoments) -> f64;
    /// Highest angular Fourier mode present (2D).
    fn max_mode(&self) -> usize {
        1
    }
    fn is_time_independent(&self) -> bool {
        false
    }
}

/// Spatial factor of a separable solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Spatial {
    /// `c0 + slope . x`, reproduced exactly by upwind differences.
    Affine { c0: f64, slope: [f64; 3] },
    /// `1 + amp prod_a sin(k_a x_a)` over the axes with `k_a != 0`.
    SineProduct { amp: f64, wavenumbers: [f64; 3] },
}

impl Spatial {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Spatial::Affine { c0, slope } => c0 + x.iter().zip(slope).map(|(a, b)| a * b).sum::<f64>(),
            Spatial::SineProduct { amp, wavenumbers } => {
                1.0 + amp
                    * x.iter()
                        .zip(wavenumbers)
                        .filter(|(_, k)| **k != 0.0)
                        .map(|(xa, k)| (k * xa).sin())
                        .product::<f64>()
            }
        }
    }

    pub fn gradient<const D: usize>(&self, x: &[f64]) -> [f64; D] {
        match self {
            Spatial::Affine { slope, .. } => std::array::from_fn(|a| slope[a]),
            Spatial::SineProduct { amp, wavenumbers } => std::array::from_fn(|a| {
                let k = wavenumbers[a];
                if k == 0.0 {
                    return 0.0;
                }
                let rest: f64 = (0..D)
                    .filter(|&b| b != a && wavenumbers[b] != 0.0)
                    .map(|b| (wavenumbers[b] * x[b]).sin())
                    .product();
                amp * k * (k * x[a]).cos() * rest
            }),
        }
    }
}

/// `I = e^{-decay t} X(x) (a0 + sum_n a_n cos(n theta) + b_n sin(n theta))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separable2D {
    pub decay: f64,
    pub spatial: Spatial,
    pub a0: f64,
    /// `(n, a_n, b_n)` with `n >= 1`.
    pub modes: Vec<(usize, f64, f64)>,
}

impl Separable2D {
    pub fn constant(kappa: f64) -> Self {
        Separable2D {
            decay: 0.0,
            spatial: Spatial::Affine {
                c0: kappa,
                slope: [0.0; 3],
            },
            a0: 1.0,
            modes: Vec::new(),
        }
    }

    fn angular(&self, theta: f64) -> f64 {
        self.a0
            + self
                .modes
                .iter()
                .map(|&(n, a, b)| a * (n as f64 * theta).cos() + b * (n as f64 * theta).sin())
                .sum::<f64>()
    }

    fn time(&self, t: f64) -> f64 {
        (-self.decay * t).exp()
    }
}

impl ManufacturedSolution<2> for Separable2D {
    fn value(&self, t: f64, x: &[f64], d: &Direction) -> f64 {
        self.time(t) * self.spatial.value(x) * self.angular(d.theta)
    }

    fn time_derivative(&self, t: f64, x: &[f64], d: &Direction) -> f64 {
        -self.decay * self.value(t, x, d)
    }

    fn gradient(&self, t: f64, x: &[f64], d: &Direction) -> [f64; 2] {
        let s = self.time(t) * self.angular(d.theta);
        self.spatial.gradient::<2>(x).map(|g| g * s)
    }

    fn scattering_integral(&self, t: f64, x: &[f64], d: &Direction, k: &KernelMoments) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let th = d.theta;
        let ang = two_pi * k.fourier[0] * self.a0
            + self
                .modes
                .iter()
                .map(|&(n, a, b)| {
                    two_pi
                        * k.fourier[n]
                        * (a * (n as f64 * th).cos() + b * (n as f64 * th).sin())
                })
                .sum::<f64>();
        self.time(t) * self.spatial.value(x) * ang
    }

    fn max_mode(&self) -> usize {
        self.modes.iter().map(|m| m.0).max().unwrap_or(0)
    }

    fn is_time_independent(&self) -> bool {
        self.decay == 0.0
    }
}

/// `I = e^{-decay t} X(x) (a0 + b . xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separable3D {
    pub decay: f64,
    pub spatial: Spatial,
    pub a0: f64,
    pub b: [f64; 3],
}

impl Separable3D {
    fn angular(&self, d: &Direction) -> f64 {
        self.a0 + self.b.iter().zip(&d.xi).map(|(b, x)| b * x).sum::<f64>()
    }

    fn time(&self, t: f64) -> f64 {
        (-self.decay * t).exp()
    }
}

impl ManufacturedSolution<3> for Separable3D {
    fn value(&self, t: f64, x: &[f64], d: &Direction) -> f64 {
        self.time(t) * self.spatial.value(x) * self.angular(d)
    }

    fn time_derivative(&self, t: f64, x: &[f64], d: &Direction) -> f64 {
        -self.decay * self.value(t, x, d)
    }

    fn gradient(&self, t: f64, x: &[f64], d: &Direction) -> [f64; 3] {
        let s = self.time(t) * self.angular(d);
        self.spatial.gradient::<3>(x).map(|g| g * s)
    }

    fn scattering_integral(&self, t: f64, x: &[f64], d: &Direction, k: &KernelMoments) -> f64 {
        let lin: f64 = self.b.iter().zip(&d.xi).map(|(b, x)| b * x).sum();
        self.time(t) * self.spatial.value(x) * (self.a0 + k.mean_cosine * lin)
    }

    fn is_time_independent(&self) -> bool {
        self.decay == 0.0
    }
}

/// `q = c^-1 dI/dt + xi . grad I + (mu_a + mu_s) I - mu_s int p I'`.
pub fn manufactured_source<const D: usize>(
    sol: Arc<dyn ManufacturedSolution<D>>,
    medium: &Medium,
    pf: &PhaseFunction,
) -> PhaseSpaceFn {
    let moments = KernelMoments::new(pf, sol.max_mode());
    let (c, mu_a, mu_s) = (medium.c.clone(), medium.mu_a.clone(), medium.mu_s.clone());
    let time_independent = sol.is_time_independent();
    let f = move |t: f64, x: &[f64], d: &Direction| {
        let grad = sol.gradient(t, x, d);
        let transport: f64 = (0..D).map(|a| d.xi[a] * grad[a]).sum();
        let ms = mu_s.eval(x);
        sol.time_derivative(t, x, d) / c.eval(x)
            + transport
            + (mu_a.eval(x) + ms) * sol.value(t, x, d)
            - ms * sol.scattering_integral(t, x, d, &moments)
    };
    PhaseSpaceFn::Function {
        f: Arc::new(f),
        time_independent,
    }
}

/// Problem whose exact solution is `sol`, with initial and inflow data read off it.
pub fn manufactured_problem<const D: usize>(
    sol: Arc<dyn ManufacturedSolution<D>>,
    grid: Grid<D>,
    medium: Medium,
    pf: PhaseFunction,
) -> Problem<D> {
    let q = manufactured_source(sol.clone(), &medium, &pf);
    let time_independent = sol.is_time_independent();
    let s0 = sol.clone();
    let initial = PhaseSpaceFn::Function {
        f: Arc::new(move |_t, x: &[f64], d: &Direction| s0.value(0.0, x, d)),
        time_independent: true,
    };
    let inflow = PhaseSpaceFn::Function {
        f: Arc::new(move |t, x: &[f64], d: &Direction| sol.value(t, x, d)),
        time_independent,
    };
    Problem::new(grid, medium, pf, Sources { q, initial, inflow })
}
