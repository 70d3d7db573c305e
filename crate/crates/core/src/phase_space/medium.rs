use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::grid::Grid;
use crate::error::MediumError;

/// Relative tolerance for cross-checking declared bounds against samples.
pub const DECLARED_BOUND_RTOL: f64 = 1e-12;

pub type SpatialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A spatially varying coefficient.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(SpatialFn),
}

impl Coefficient {
    pub fn function(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Function(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::Function(f) => f(x),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(v) => write!(f, "Constant({v})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

/// Optional user-declared bounds; when present they must agree with the
/// grid samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredBounds {
    pub c_plus: Option<f64>,
    pub mu_star: Option<f64>,
    pub c_mua_minus: Option<f64>,
    pub mu_a_plus: Option<f64>,
    pub mu_s_plus: Option<f64>,
}

/// Speed `c`, absorption `mu_a` and scattering `mu_s`.
#[derive(Debug, Clone)]
pub struct Medium {
    pub c: Coefficient,
    pub mu_a: Coefficient,
    pub mu_s: Coefficient,
    pub declared: DeclaredBounds,
}

/// Bounds of the coefficients over the interior grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumBounds {
    /// `sup c`.
    pub c_plus: f64,
    /// `inf mu_a / mu_s` over points with `mu_s != 0`; infinite without scattering.
    pub mu_star: f64,
    /// `inf c mu_a`.
    pub c_mua_minus: f64,
    pub mu_a_plus: f64,
    pub mu_s_plus: f64,
}

/// Coefficients sampled at every spatial node.
#[derive(Debug, Clone)]
pub struct SampledMedium {
    pub c: Vec<f64>,
    pub mu_a: Vec<f64>,
    pub mu_s: Vec<f64>,
    pub bounds: MediumBounds,
}

impl Medium {
    pub fn uniform(c: f64, mu_a: f64, mu_s: f64) -> Self {
        Medium {
            c: c.into(),
            mu_a: mu_a.into(),
            mu_s: mu_s.into(),
            declared: DeclaredBounds::default(),
        }
    }

    /// Samples the coefficients at all nodes and derives the bounds from
    /// the interior nodes, which are the only ones the scheme reads.
    pub fn sample<const D: usize>(&self, grid: &Grid<D>) -> Result<SampledMedium, MediumError> {
        let n = grid.node_count();
        let mut c = Vec::with_capacity(n);
        let mut mu_a = Vec::with_capacity(n);
        let mut mu_s = Vec::with_capacity(n);
        for node in 0..n {
            let x = grid.node_position(node);
            c.push(self.c.eval(&x));
            mu_a.push(self.mu_a.eval(&x));
            mu_s.push(self.mu_s.eval(&x));
        }
        if grid.interior().is_empty() {
            return Err(MediumError::Empty);
        }

        let mut b = MediumBounds {
            c_plus: 0.0,
            mu_star: f64::INFINITY,
            c_mua_minus: f64::INFINITY,
            mu_a_plus: 0.0,
            mu_s_plus: 0.0,
        };
        for &s in grid.interior() {
            let x = grid.node_position(s).to_vec();
            let bad = |name, value, reason| MediumError::BadSample {
                name,
                position: x.clone(),
                value,
                reason,
            };
            if !(c[s].is_finite() && c[s] > 0.0) {
                return Err(bad("c", c[s], "speed must be positive and finite"));
            }
            if !(mu_a[s].is_finite() && mu_a[s] >= 0.0) {
                return Err(bad("mu_a", mu_a[s], "must be non-negative and finite"));
            }
            if !(mu_s[s].is_finite() && mu_s[s] >= 0.0) {
                return Err(bad("mu_s", mu_s[s], "must be non-negative and finite"));
            }
            b.c_plus = b.c_plus.max(c[s]);
            b.mu_a_plus = b.mu_a_plus.max(mu_a[s]);
            b.mu_s_plus = b.mu_s_plus.max(mu_s[s]);
            b.c_mua_minus = b.c_mua_minus.min(c[s] * mu_a[s]);
            if mu_s[s] != 0.0 {
                b.mu_star = b.mu_star.min(mu_a[s] / mu_s[s]);
            }
        }
        if b.mu_star <= 0.0 {
            return Err(MediumError::NoAbsorptionMargin(b.mu_star));
        }
        self.cross_check(&b)?;
        Ok(SampledMedium {
            c,
            mu_a,
            mu_s,
            bounds: b,
        })
    }

    fn cross_check(&self, b: &MediumBounds) -> Result<(), MediumError> {
        let d = &self.declared;
        let pairs = [
            ("c_plus", d.c_plus, b.c_plus),
            ("mu_star", d.mu_star, b.mu_star),
            ("c_mua_minus", d.c_mua_minus, b.c_mua_minus),
            ("mu_a_plus", d.mu_a_plus, b.mu_a_plus),
            ("mu_s_plus", d.mu_s_plus, b.mu_s_plus),
        ];
        for (name, declared, sampled) in pairs {
            let Some(declared) = declared else { continue };
            let scale = declared.abs().max(sampled.abs());
            let agree = declared == sampled
                || (declared - sampled).abs() <= DECLARED_BOUND_RTOL * scale;
            if !agree {
                return Err(MediumError::DeclaredMismatch {
                    name,
                    declared,
                    sampled,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::grid::{Grid2D, GridConfig2D};

    fn grid() -> Grid2D {
        Grid2D::new(&GridConfig2D {
            lengths: [2.0, 2.0],
            cells: [4, 4],
            directions: 8,
            dt: 0.1,
            t_final: 0.1,
        })
        .unwrap()
    }

    #[test]
    fn phantom_medium_bounds() {
        let m = Medium::uniform(0.196, 0.08, 1.09).sample(&grid()).unwrap();
        assert_eq!(m.bounds.c_plus, 0.196);
        assert!((m.bounds.mu_star - 0.08 / 1.09).abs() < 1e-15);
        assert!((m.bounds.c_mua_minus - 0.01568).abs() < 1e-15);
    }

    #[test]
    fn layered_medium_scans_interior() {
        let medium = Medium {
            c: Coefficient::function(|x| 1.0 + x[0]),
            mu_a: Coefficient::function(|x| if x[1] < 1.0 { 0.1 } else { 0.4 }),
            mu_s: 1.0.into(),
            declared: DeclaredBounds::default(),
        };
        let m = medium.sample(&grid()).unwrap();
        // interior x1 ranges over 0.5..=1.5
        assert_eq!(m.bounds.c_plus, 2.5);
        assert_eq!(m.bounds.mu_star, 0.1);
        assert_eq!(m.bounds.c_mua_minus, 1.5 * 0.1);
    }

    #[test]
    fn no_scattering_gives_infinite_margin() {
        let m = Medium::uniform(1.0, 0.0, 0.0).sample(&grid()).unwrap();
        assert!(m.bounds.mu_star.is_infinite());
    }

    #[test]
    fn rejects_inadmissible_samples() {
        assert!(matches!(
            Medium::uniform(0.0, 0.1, 1.0).sample(&grid()),
            Err(MediumError::BadSample { name: "c", .. })
        ));
        assert!(matches!(
            Medium::uniform(1.0, -0.1, 1.0).sample(&grid()),
            Err(MediumError::BadSample { name: "mu_a", .. })
        ));
        assert!(matches!(
            Medium::uniform(1.0, 0.0, 1.0).sample(&grid()),
            Err(MediumError::NoAbsorptionMargin(_))
        ));
    }

    #[test]
    fn declared_bounds_are_cross_checked() {
        let mut medium = Medium::uniform(0.196, 0.08, 1.09);
        medium.declared.c_plus = Some(0.196);
        medium.declared.mu_star = Some(0.08 / 1.09);
        assert!(medium.sample(&grid()).is_ok());
        medium.declared.c_plus = Some(0.2);
        assert!(matches!(
            medium.sample(&grid()),
            Err(MediumError::DeclaredMismatch { name: "c_plus", .. })
        ));
    }
}
