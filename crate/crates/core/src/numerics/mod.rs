//! Shared numerical primitives.

mod curve;
mod fit;
mod ode;
mod quad;
pub mod series;

pub use curve::SampledCurve;
pub use fit::{fit_power_tail, TailFit};
pub use ode::{integrate, integrate_linear_system, Direction, OdeSolution};
pub use quad::{adaptive_quad, quad_tail, TailSpec};

use serde::{Deserialize, Serialize};

/// Shortest decimal that parses back to `x`, in exponent form outside
/// `[1e-4, 1e15)`.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 {
        "0".into()
    } else if !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// One CSV line of reals.
pub fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_real(v))
        .collect::<Vec<_>>()
        .join(",")
}

use crate::{Error, Result};

/// Tolerance bundle threaded through every solver and check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative local error per Runge–Kutta step.
    pub ode_rel: f64,
    /// Relative error for quadrature.
    pub quad_rel: f64,
    /// Relative tolerance for acceptance checks.
    pub accept_rel: f64,
    /// Absolute slack for monotonicity and sign checks.
    pub slope_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rel: 1e-10,
            quad_rel: 1e-10,
            accept_rel: 1e-6,
            slope_slack: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.ode_rel,
            self.quad_rel,
            self.accept_rel,
            self.slope_slack,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.accept_rel < self.ode_rel {
            return Err(Error::InvalidParameter(
                "accept_rel must be at least ode_rel".into(),
            ));
        }
        Ok(())
    }
}

/// `n` points logarithmically spaced on `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// `n` points uniformly spaced on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(hi > lo && n >= 2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerances_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn accept_below_ode_is_rejected() {
        let t = Tolerances {
            accept_rel: 1e-12,
            ..Default::default()
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1e6, 7);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[6], 1e6);
        assert!((g[3] - 1e3).abs() < 1e-9);
    }
}
