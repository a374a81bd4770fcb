//! Coefficient functions `(f, g, h)` of the monotone quantities, obtained by
//! solving the linear system
//!
//! ```text
//! dg/dr = a(r) h,   dh/dr = b(r) g + c(r) h,   df/dr = (dt/dr) h
//! ```
//!
//! on the reference geometry. The decaying triple is integrated inward from
//! a Frobenius seed at `R_max`; the growing triple outward from `r = 1`.
//! Both are integrated in `ln r`.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::frobenius::{series_coefficients, FrobeniusSolution};
use crate::numerics::{
    csv_row, fit_power_tail, integrate_linear_system, quad_tail, Direction, OdeSolution,
    SampledCurve, TailSpec, Tolerances,
};
use crate::schwarzschild::{ModelFunctions, ModelGeometry, ModelSeries};
use crate::{Error, Result};

/// Relative step tolerance for the coefficient ODEs. The growing triple
/// enters the monotone quantity through cancellations of `O(r)` terms, so it
/// is integrated well below the default ODE tolerance.
const COEFF_RTOL: f64 = 1e-13;
/// Series terms used for seeds and for continuation past `R_max`.
const SERIES_ORDER: usize = 16;

#[derive(Debug, Clone)]
pub struct AbcCoefficients {
    pub a_curve: SampledCurve,
    pub b_curve: SampledCurve,
    pub c_curve: SampledCurve,
}

pub fn abc_curves(model: &ModelGeometry) -> Result<AbcCoefficients> {
    let rs = model.u_curve.abscissae().to_vec();
    let pts: Vec<_> = rs.iter().map(|&r| model.point(r)).collect();
    if let Some(q) = pts.iter().find(|q| !(q.dtdr > 0.0)) {
        return Err(Error::CheckFailed(format!(
            "dt/dr = {} at r = {}",
            q.dtdr, q.r
        )));
    }
    Ok(AbcCoefficients {
        a_curve: SampledCurve::new(rs.clone(), pts.iter().map(|q| q.a).collect(), 3)?,
        b_curve: SampledCurve::new(rs.clone(), pts.iter().map(|q| q.b).collect(), 3)?,
        c_curve: SampledCurve::new(rs, pts.iter().map(|q| q.c).collect(), 3)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Decaying,
    Growing,
}

/// Values of the coefficient triple at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

/// The model matrix in `ℓ = ln r`, acting on `(g, h, F)`.
fn system_matrix(functions: &ModelFunctions, l: f64, m: &mut [f64]) {
    let r = l.exp();
    let q = functions.point(r);
    m.copy_from_slice(&[
        0.0,
        r * q.a,
        0.0,
        r * q.b,
        r * q.c,
        0.0,
        0.0,
        r * q.dtdr,
        0.0,
    ]);
}

#[derive(Debug, Clone)]
pub struct CoefficientSolution {
    pub flavor: Flavor,
    pub p: f64,
    pub r_max: f64,
    /// sampled over `r` at the model grid
    pub g_curve: SampledCurve,
    pub h_curve: SampledCurve,
    pub f_curve: SampledCurve,
    /// `t(r)` at the same grid
    pub t_grid: SampledCurve,
    /// normalization of the raw growing solution; `None` for the decaying one
    pub c1: Option<f64>,
    /// additive constant of `f`; `None` for the decaying one
    pub q: Option<f64>,
    pub epsilon: Option<f64>,
    functions: ModelFunctions,
    ode: OdeSolution,
    scale: f64,
    offset: f64,
    /// series for `g` past `R_max`, with its multiplier
    tail_series: FrobeniusSolution,
    tail_mult: f64,
    /// `Q_s`, used to continue `f` past `R_max`
    q_model: f64,
}

impl CoefficientSolution {
    /// Triple at radius `r ≥ 1`. Beyond `R_max` the asymptotic series of the
    /// matching Frobenius solution is used, with `f` continued through the
    /// constancy of `Q_s`.
    pub fn at_r(&self, r: f64) -> Result<Triple> {
        if !(r >= 1.0) {
            return Err(Error::OutOfRange {
                x: r,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        if r <= self.r_max {
            let y = self
                .ode
                .eval(r.ln().min(self.ode.start().max(self.ode.end())))?;
            return Ok(Triple {
                f: y[2] * self.scale + self.offset,
                g: y[0] * self.scale,
                h: y[1] * self.scale,
            });
        }
        let pt = self.functions.point(r);
        let (g, dg) = self.tail_series.eval(r);
        let (g, h) = (self.tail_mult * g, self.tail_mult * dg / pt.a);
        let k = (self.p - 1.0) * (3.0 - self.p);
        let f = (self.q_model - g * pt.w - k * h * pt.dwdt) / (4.0 * PI * (3.0 - self.p).powi(2));
        Ok(Triple { f, g, h })
    }

    /// The constant value of `Q_s` on the model.
    pub fn model_q(&self) -> f64 {
        self.q_model
    }

    /// Triple at flow time `t ≥ 0` through the model's `r(t)`.
    pub fn at_t(&self, t: f64) -> Result<Triple> {
        self.at_r(self.functions.r_of_t(t)?)
    }

    /// `dg/dt` and `dh/dt` at radius `r` from the system.
    pub fn t_derivatives(&self, r: f64) -> Result<(f64, f64)> {
        let tr = self.at_r(r)?;
        let q = self.functions.point(r);
        Ok((q.a * tr.h / q.dtdr, (q.b * tr.g + q.c * tr.h) / q.dtdr))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,t,f,g,h")?;
        for (i, &r) in self.g_curve.abscissae().iter().enumerate() {
            let row = [
                r,
                self.t_grid.values()[i],
                self.f_curve.values()[i],
                self.g_curve.values()[i],
                self.h_curve.values()[i],
            ];
            writeln!(out, "{}", csv_row(&row))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn sample(
    model: &ModelGeometry,
    ode: &OdeSolution,
    scale: f64,
    offset: f64,
) -> Result<(SampledCurve, SampledCurve, SampledCurve)> {
    let rs = model.u_curve.abscissae().to_vec();
    let (mut g, mut h, mut f) = (Vec::new(), Vec::new(), Vec::new());
    let lmax = ode.start().max(ode.end());
    for &r in &rs {
        let y = ode.eval(r.ln().min(lmax))?;
        g.push(y[0] * scale);
        h.push(y[1] * scale);
        f.push(y[2] * scale + offset);
    }
    Ok((
        SampledCurve::new(rs.clone(), g, 3)?,
        SampledCurve::new(rs.clone(), h, 3)?,
        SampledCurve::new(rs, f, 3)?,
    ))
}

fn g_series(p: f64, root: f64, n: usize) -> Result<FrobeniusSolution> {
    let ode = ModelSeries::new(p, SERIES_ORDER + 6)?.g_equation()?;
    series_coefficients(&ode, root, n)
}

/// Number of growing-series terms that stay below the resonance at index
/// `2/(p-1)`.
fn growing_terms(p: f64) -> usize {
    let res = 2.0 / (p - 1.0);
    let below = (res - 1e-6).floor() as usize;
    below.clamp(1, SERIES_ORDER)
}

fn finish(
    model: &ModelGeometry,
    flavor: Flavor,
    ode: OdeSolution,
    scale: f64,
    offset: f64,
    tail_series: FrobeniusSolution,
    extra: (Option<f64>, Option<f64>, Option<f64>),
) -> Result<CoefficientSolution> {
    let functions = model.functions;
    let (g_curve, h_curve, f_curve) = sample(model, &ode, scale, offset)?;
    let (c1, q, epsilon) = extra;
    let mut sol = CoefficientSolution {
        flavor,
        p: model.p,
        r_max: model.r_max,
        g_curve,
        h_curve,
        f_curve,
        t_grid: model.t_of_r.clone(),
        c1,
        q,
        epsilon,
        functions,
        ode,
        scale,
        offset,
        tail_series,
        tail_mult: 1.0,
        q_model: 0.0,
    };
    let end = sol.at_r(model.r_max)?;
    sol.tail_mult = end.g / sol.tail_series.eval(model.r_max).0;
    let pt = functions.point(model.r_max);
    let p = model.p;
    sol.q_model = 4.0 * PI * (3.0 - p).powi(2) * end.f
        + end.g * pt.w
        + (p - 1.0) * (3.0 - p) * end.h * pt.dwdt;
    Ok(sol)
}

/// The decaying triple `(f_*, g_*, h_*)`, normalized by
/// `h_* ~ r^{-(3-p)/(p-1)}/(p-1)`, so that `g_* ~ r^{-(3-p)/(p-1)}`.
pub fn solve_decaying(model: &ModelGeometry, tol: &Tolerances) -> Result<CoefficientSolution> {
    let p = model.p;
    let a = model.functions.decay;
    let series = g_series(p, -a, SERIES_ORDER)?;
    let fns = model.functions;
    let h_of = |r: f64| series.eval(r).1 / fns.point(r).a;
    let big = model.r_max;
    let tail = TailSpec {
        exponent: a + 1.0,
        cutoff: 10.0 * big,
    };
    let f0 = -quad_tail(|r| h_of(r) * fns.point(r).dtdr, big, tail, tol)?;
    let ode = integrate_linear_system(
        |l, m| system_matrix(&fns, l, m),
        &[series.eval(big).0, h_of(big), f0],
        (0.0, big.ln()),
        Direction::Backward,
        COEFF_RTOL,
    )?;
    let sol = finish(
        model,
        Flavor::Decaying,
        ode,
        1.0,
        0.0,
        series,
        (None, None, None),
    )?;
    if let Some((r, h)) = sol.h_curve.points().find(|(_, h)| !(*h > 0.0)) {
        return Err(Error::CheckFailed(format!("h_* = {h} <= 0 at r = {r}")));
    }
    if let Some((r, f)) = sol.f_curve.points().find(|(_, f)| !(*f < 0.0)) {
        return Err(Error::CheckFailed(format!("f_* = {f} >= 0 at r = {r}")));
    }
    Ok(sol)
}

pub const DEFAULT_EPSILON: f64 = 0.01;

/// The growing triple `(f^*, g^*, h^*)` from `(g, h)(1) = (-1, ε)`,
/// normalized by `h^* = r/(3-p) + 1 + O(1/r)` and
/// `f^* = c̃ e^{t/(3-p)} + (3-p) + o(1)`.
pub fn solve_growing(model: &ModelGeometry, epsilon: f64) -> Result<CoefficientSolution> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    match growing_once(model, epsilon) {
        Ok(s) => Ok(s),
        Err(Error::FitResidual { .. }) | Err(Error::CheckFailed(_)) => {
            growing_once(model, 1.1 * epsilon)
        }
        Err(e) => Err(e),
    }
}

fn growing_once(model: &ModelGeometry, epsilon: f64) -> Result<CoefficientSolution> {
    let p = model.p;
    let fns = model.functions;
    let big = model.r_max;
    let ode = integrate_linear_system(
        |l, m| system_matrix(&fns, l, m),
        &[-1.0, epsilon, 0.0],
        (0.0, big.ln()),
        Direction::Forward,
        COEFF_RTOL,
    )?;
    let (_, h_raw, _) = sample(model, &ode, 1.0, 0.0)?;
    let fit = fit_power_tail(&h_raw, 1.0, 1e-6)?;
    let c1 = (3.0 - p) * fit.c0;
    if !(c1 > 0.0) {
        return Err(Error::CheckFailed(format!(
            "growing normalization c1 = {c1} <= 0"
        )));
    }
    // q from lim (F/c1 - c̃ e^{t/(3-p)}) over a window where both terms are
    // still far from the rounding floor
    let (_, _, f_raw) = sample(model, &ode, 1.0 / c1, 0.0)?;
    let window = f_raw.window(1.0, big.min(1e4))?;
    let diff = window.map(|r, f| f - fns.exp_t_scaled(r));
    let lim = fit_power_tail(&diff, 0.0, 1e-6)?.c0;
    let q = (3.0 - p) - lim;
    let tail_series = g_series(p, 1.0, growing_terms(p))?;
    let sol = finish(
        model,
        Flavor::Growing,
        ode,
        1.0 / c1,
        q,
        tail_series,
        (Some(c1), Some(q), Some(epsilon)),
    )?;
    if let Some((r, h)) = sol.h_curve.points().find(|(_, h)| !(*h > 0.0)) {
        return Err(Error::CheckFailed(format!("h^* = {h} <= 0 at r = {r}")));
    }
    if let Some((r, g)) = sol.g_curve.points().find(|(_, g)| !(*g < 0.0)) {
        return Err(Error::CheckFailed(format!("g^* = {g} >= 0 at r = {r}")));
    }
    Ok(sol)
}

/// Largest normalized residual of the two `(g, h)` equations in `t` form and
/// of the perfect-square relation, over the model grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemResidual {
    pub first: f64,
    pub second: f64,
    /// `|g - 2(p-2)h + (p-1)(3-p)h_t + 2√(g_t + h)√(k h)| / |g|`
    pub perfect_square: f64,
}

impl SystemResidual {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.perfect_square)
    }
}

pub fn system_residual(sol: &CoefficientSolution, model: &ModelGeometry) -> Result<SystemResidual> {
    let p = model.p;
    let k = (p - 1.0) * (5.0 - p) / 4.0;
    let mut out = SystemResidual {
        first: 0.0,
        second: 0.0,
        perfect_square: 0.0,
    };
    for (i, &r) in sol.g_curve.abscissae().iter().enumerate() {
        let q = model.point(r);
        let g = sol.g_curve.values()[i];
        let h = sol.h_curve.values()[i];
        let dy = sol.ode.eval_derivative(r.ln())?;
        let dg_dt = dy[0] * sol.scale / (r * q.dtdr);
        let dh_dt = dy[1] * sol.scale / (r * q.dtdr);
        let (w, wt) = (q.w, q.dwdt);
        let e2 = (dg_dt + h) * w * w - k * h * wt * wt;
        let e1 = e2
            + (g - 2.0 * (p - 2.0) * h + (p - 1.0) * (3.0 - p) * dh_dt) * w * wt
            + 2.0 * k * h * wt * wt;
        let scale = g.abs() * w * w + h.abs() * w * wt.abs();
        out.first = out.first.max(e1.abs() / scale);
        out.second = out.second.max(e2.abs() / scale);
        // g_t + h from the second equation in solved form; the direct sum
        // cancels two O(r) terms down to O(1/r)
        let gt_h = k * h * (wt / w).powi(2);
        let sq = g - 2.0 * (p - 2.0) * h
            + (p - 1.0) * (3.0 - p) * dh_dt
            + 2.0 * gt_h.sqrt() * (k * h).sqrt();
        out.perfect_square = out.perfect_square.max(sq.abs() / g.abs());
    }
    Ok(out)
}

/// `Q_s(t) = 4π(3-p)² f + g W_s + (p-1)(3-p) h dW_s/dt` on the model grid.
pub fn model_q_curve(sol: &CoefficientSolution, model: &ModelGeometry) -> Result<SampledCurve> {
    let p = model.p;
    let rs = sol.g_curve.abscissae();
    let vals = rs
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let q = model.point(r);
            4.0 * PI * (3.0 - p).powi(2) * sol.f_curve.values()[i]
                + sol.g_curve.values()[i] * q.w
                + (p - 1.0) * (3.0 - p) * sol.h_curve.values()[i] * q.dwdt
        })
        .collect();
    SampledCurve::new(sol.t_grid.values().to_vec(), vals, 3)
}

/// `(Q_s(0), max_t |Q_s(t) - Q_s(0)|)`.
pub fn model_constancy(sol: &CoefficientSolution, model: &ModelGeometry) -> Result<(f64, f64)> {
    let curve = model_q_curve(sol, model)?;
    let q0 = curve.first().1;
    let dev = curve
        .values()
        .iter()
        .map(|q| (q - q0).abs())
        .fold(0.0, f64::max);
    Ok((q0, dev))
}
