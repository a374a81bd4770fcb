//! Mass-2 spatial Schwarzschild `((1 + 1/r)^4 δ, r ≥ 1)` as the reference
//! geometry for the coefficient ODEs.
//!
//! The radial p-harmonic potential satisfies the first-order reduction
//! `u'(r) = -C r^{-2/(p-1)} (1 + 1/r)^{-2(3-p)/(p-1)}`. With `z = 1/(σ + 1)`
//! the normalizing integral becomes an incomplete Beta function,
//!
//! ```text
//! u(r) = C · B(1/(r+1); a, a),   a = (3-p)/(p-1),   C = 1 / B(1/2; a, a),
//! ```
//!
//! which is evaluated by continued fraction to full double precision.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::frobenius::InfinitySingularOde;
use crate::numerics::series::Series;
use crate::numerics::{csv_row, fit_power_tail, log_grid, SampledCurve, Tolerances};
use crate::{check_p, Error, Result};

/// Continued-fraction factor `h` of `B(x; a, b) = x^a (1-x)^b h / a`,
/// valid for `x ≤ (a+1)/(a+b+2)`.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let tiny = 1e-300;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `B(x; a, b) = ∫_0^x z^{a-1}(1-z)^{b-1} dz` for `x ≤ (a+1)/(a+b+2)`.
fn incomplete_beta_lower(x: f64, a: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (a * x.ln() + b * (-x).ln_1p()).exp() * beta_cf(x, a, b) / a
}

const HYPERGEOMETRIC_SWITCH: f64 = 0.05;

/// `h = a B(x; a, a) / (x(1-x))^a` together with `h - 1`.
///
/// Below the switch `h = (1-x)^{-a} ₂F₁(a, 1-a; a+1; x)`, summed so that
/// `h - 1 = O(x)` keeps full relative accuracy.
fn beta_ratio(x: f64, a: f64) -> (f64, f64) {
    if x > HYPERGEOMETRIC_SWITCH {
        let h = beta_cf(x, a, a);
        return (h, h - 1.0);
    }
    let mut term = 1.0;
    let mut tail = 0.0;
    for n in 0..400 {
        let n = n as f64;
        term *= (a + n) * (1.0 - a + n) / ((a + 1.0 + n) * (n + 1.0)) * x;
        tail += term;
        if term.abs() <= 1e-17 * tail.abs() {
            break;
        }
    }
    let pre = (-a * (-x).ln_1p()).exp_m1();
    ((1.0 + pre) * (1.0 + tail), pre + tail + pre * tail)
}

/// Every model quantity at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    pub t: f64,
    /// dt/dr
    pub dtdr: f64,
    pub w: f64,
    pub dwdr: f64,
    pub dwdt: f64,
    /// `W - 4π(3-p)²`, accurate where both terms are large
    pub w_excess: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Exact pointwise evaluation of the model at any `r ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFunctions {
    pub p: f64,
    /// `a = (3-p)/(p-1)`, the decay exponent of `u`
    pub decay: f64,
    /// `C_s`
    pub flux_constant: f64,
}

impl ModelFunctions {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        let a = (3.0 - p) / (p - 1.0);
        let half = incomplete_beta_lower(0.5, a, a);
        Ok(Self {
            p,
            decay: a,
            flux_constant: 1.0 / half,
        })
    }

    /// `ln u(r)`, assembled from logarithms so that `t` carries no
    /// exponential round-off.
    pub fn ln_u(&self, r: f64) -> f64 {
        if r == 1.0 {
            return 0.0;
        }
        let a = self.decay;
        let (h, _) = beta_ratio(1.0 / (r + 1.0), a);
        // x(1-x) = r/(r+1)²
        self.flux_constant.ln() - a * (r.ln() + 2.0 * r.recip().ln_1p()) + h.ln() - a.ln()
    }

    pub fn u(&self, r: f64) -> f64 {
        self.ln_u(r).exp()
    }

    /// `u'(r)` from the first-order reduction.
    pub fn du(&self, r: f64) -> f64 {
        let p = self.p;
        let e1 = 2.0 / (p - 1.0);
        let e2 = 2.0 * (3.0 - p) / (p - 1.0);
        -self.flux_constant * (-e1 * r.ln() - e2 * (1.0 / r).ln_1p()).exp()
    }

    pub fn t(&self, r: f64) -> f64 {
        (1.0 - self.p) * self.ln_u(r)
    }

    pub fn dtdr(&self, r: f64) -> f64 {
        (3.0 - self.p) / (r * beta_ratio(1.0 / (r + 1.0), self.decay).0)
    }

    /// With `x = 1/(r+1)` and the Beta ratio `h(x)`: `u'/u = -a/(r h)`,
    /// `W = 4π(3-p)²/h²` and `dW/dr = 8π(3-p)² h_x x²/h³`.
    pub fn point(&self, r: f64) -> ModelPoint {
        let p = self.p;
        let a = self.decay;
        let x = 1.0 / (r + 1.0);
        let (h, dh) = beta_ratio(x, a);
        let u = self.u(r);
        let v = -a / (r * h);
        let dtdr = (3.0 - p) / (r * h);
        let w_inf = 4.0 * PI * (3.0 - p).powi(2);
        let w = w_inf / (h * h);
        let w_excess = -w_inf * dh * (2.0 + dh) / (h * h);
        let hx = a * (2.0 * x * h - dh) / (x * (1.0 - x));
        let dwdr = 2.0 * w_inf * hx * x * x / (h * h * h);
        let dwdt = dwdr / dtdr;
        let k = (p - 1.0) * (5.0 - p) / 4.0;
        let ca = dtdr * (k * (dwdt / w).powi(2) - 1.0);
        let cb = -dtdr / ((p - 1.0) * (3.0 - p));
        let cc = 2.0 * (p - 2.0) * dtdr / ((p - 1.0) * (3.0 - p))
            - (5.0 - p) / (2.0 * (3.0 - p) * w) * dwdr;
        ModelPoint {
            r,
            u,
            du: u * v,
            t: self.t(r),
            dtdr,
            w,
            dwdr,
            dwdt,
            w_excess,
            a: ca,
            b: cb,
            c: cc,
        }
    }

    /// Inverse of `t(r)` by safeguarded Newton iteration in `ln r`.
    pub fn r_of_t(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t = {t} must be finite and >= 0"
            )));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let p = self.p;
        let ct = self.c_tilde_exact();
        let guess = (ct * (t / (3.0 - p)).exp() - (3.0 - p)).max(1.0 + 1e-3);
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut l = guess.ln();
        for _ in 0..200 {
            let r = l.exp();
            let (h, _) = beta_ratio(1.0 / (r + 1.0), self.decay);
            let f = self.t(r) - t;
            if f < 0.0 {
                lo = lo.max(l);
            } else {
                hi = hi.min(l);
            }
            let dfdl = (3.0 - p) / h;
            let mut next = l - f / dfdl;
            if !(next > lo && next < hi) {
                next = if hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    lo + 1.0
                };
            }
            if (next - l).abs() <= 4.0 * f64::EPSILON * l.abs().max(1.0) {
                return Ok(next.exp());
            }
            l = next;
        }
        Err(Error::Integration(format!(
            "r(t) inversion did not converge at t = {t}"
        )))
    }

    /// Leading coefficient of `u ~ c r^{-a}`: `C_s / a`.
    pub fn c_fit_exact(&self) -> f64 {
        self.flux_constant / self.decay
    }

    /// `c_fit^{(p-1)/(3-p)}`.
    pub fn c_tilde_exact(&self) -> f64 {
        self.c_fit_exact().powf(1.0 / self.decay)
    }

    /// `e^{t/(3-p)} = u^{-1/a}`, evaluated as `c_tilde⁻¹ ... ` free of overflow.
    pub fn exp_t_scaled(&self, r: f64) -> f64 {
        (self.u(r) / self.c_fit_exact()).powf(-1.0 / self.decay)
    }

    pub fn capacity(&self) -> f64 {
        4.0 * PI * self.flux_constant.powf(self.p - 1.0)
    }
}

/// Power series in `x = 1/r` of the model quantities, used for Frobenius data.
#[derive(Debug, Clone)]
pub struct ModelSeries {
    pub p: f64,
    /// `V(x) = -r u'/u = (1 + x)^{-γ} / S(x)`
    pub v: Series,
}

impl ModelSeries {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        check_p(p)?;
        let beta = 2.0 * (2.0 - p) / (p - 1.0);
        let gamma = 2.0 * (3.0 - p) / (p - 1.0);
        let binom = Series::binomial(-gamma, n);
        let s = Series(
            (0..n)
                .map(|k| binom.coeff(k) / (beta + k as f64 + 1.0))
                .collect(),
        );
        Ok(Self {
            p,
            v: binom.div(&s),
        })
    }

    fn n(&self) -> usize {
        self.v.len()
    }

    /// `A(x) = a(r)/x`.
    pub fn a_reduced(&self) -> Series {
        let p = self.p;
        let v = &self.v;
        let vx = v.deriv();
        let x2vx2 = (&vx * &vx).shift(2);
        let v3 = &(v * v) * v;
        &x2vx2.div(&v3).scale(5.0 - p) - &v.scale(p - 1.0)
    }

    /// `b(r)` as a series starting at `x¹`.
    pub fn b(&self) -> Series {
        self.v.shift(1).scale(-1.0 / (3.0 - self.p))
    }

    /// `c(r)` as a series starting at `x¹`.
    pub fn c(&self) -> Series {
        let p = self.p;
        let vx = self.v.deriv();
        let t1 = self.v.shift(1).scale(2.0 * (p - 2.0) / (3.0 - p));
        let t2 = vx.div(&self.v).shift(2).scale((5.0 - p) / (3.0 - p));
        &t1 + &t2
    }

    /// `g'' + P g' + Q g = 0`, the second-order form of the coefficient system:
    /// `P = -(a_r/a + c)`, `Q = -a b`.
    pub fn g_equation(&self) -> Result<InfinitySingularOde> {
        let n = self.n();
        let a = self.a_reduced();
        let ax = a.deriv();
        let x = Series::x(n);
        let pser = &(&x + &ax.div(&a).shift(2)) - &self.c();
        let qser = (&a.shift(1) * &self.b()).scale(-1.0);
        // drop the top coefficients that lose accuracy through deriv/shift
        let keep = n - 3;
        InfinitySingularOde::new(
            (1..keep).map(|k| pser.coeff(k)).collect(),
            (2..keep).map(|k| qser.coeff(k)).collect(),
        )
    }
}

/// The radial p-Laplace equation on the model, normalized:
/// `u'' + (2/r - 2(3-p)/(r + r²))/(p-1) u' = 0`.
pub fn radial_equation(p: f64, order: usize) -> Result<InfinitySingularOde> {
    check_p(p)?;
    let mut pc = vec![2.0 / (p - 1.0)];
    for j in 0..order {
        pc.push(-2.0 * (3.0 - p) / (p - 1.0) * if j % 2 == 0 { 1.0 } else { -1.0 });
    }
    InfinitySingularOde::new(pc, vec![0.0; order + 1])
}

/// Sampled reference geometry.
#[derive(Debug, Clone)]
pub struct ModelGeometry {
    pub p: f64,
    pub r_max: f64,
    pub functions: ModelFunctions,
    pub u_curve: SampledCurve,
    pub du_curve: SampledCurve,
    pub t_of_r: SampledCurve,
    pub r_of_t: SampledCurve,
    /// `W_s` over `t`
    pub ws_curve: SampledCurve,
    /// `dW_s/dt` over `t`
    pub dws_curve: SampledCurve,
    pub kp: f64,
    pub c_fit: f64,
    pub c_tilde: f64,
}

/// `C_s`, normalized so that `u_s(1) = 1`.
pub fn flux_constant(p: f64) -> Result<f64> {
    Ok(ModelFunctions::new(p)?.flux_constant)
}

pub const DEFAULT_R_MAX: f64 = 1e6;
pub const DEFAULT_POINTS: usize = 4096;

/// Builds the sampled model on a logarithmic grid over `[1, r_max]`.
pub fn model_profile(p: f64, r_max: f64, n: usize) -> Result<ModelGeometry> {
    let f = ModelFunctions::new(p)?;
    if !(r_max >= 1e4) {
        return Err(Error::InvalidParameter(format!(
            "R_max = {r_max} must be >= 1e4"
        )));
    }
    if n < 64 {
        return Err(Error::InvalidParameter(format!("n = {n} is too small")));
    }
    let rs = log_grid(1.0, r_max, n);
    let pts: Vec<ModelPoint> = rs.iter().map(|&r| f.point(r)).collect();
    let col = |g: fn(&ModelPoint) -> f64| pts.iter().map(g).collect::<Vec<_>>();
    let ts = col(|q| q.t);
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::CheckFailed("t(r) is not strictly increasing".into()));
    }
    let u_curve = SampledCurve::with_slopes(rs.clone(), col(|q| q.u), col(|q| q.du))?;
    let du_curve = SampledCurve::new(rs.clone(), col(|q| q.du), 3)?;
    let t_of_r = SampledCurve::with_slopes(rs.clone(), ts.clone(), col(|q| q.dtdr))?;
    let r_of_t = SampledCurve::with_slopes(ts.clone(), rs.clone(), col(|q| 1.0 / q.dtdr))?;
    let ws_curve = SampledCurve::with_slopes(ts.clone(), col(|q| q.w), col(|q| q.dwdt))?;
    let dws_curve = SampledCurve::new(ts, col(|q| q.dwdt), 3)?;
    let mut model = ModelGeometry {
        p,
        r_max,
        functions: f,
        u_curve,
        du_curve,
        t_of_r,
        r_of_t,
        ws_curve,
        dws_curve,
        kp: f.capacity(),
        c_fit: 0.0,
        c_tilde: 0.0,
    };
    let consts = c_constants(&model)?;
    model.c_fit = consts.c_fit;
    model.c_tilde = consts.c_tilde;
    Ok(model)
}

/// `K_p = 4π C_s^{p-1}` with its direct flux-integral cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacity {
    pub kp: f64,
    /// `∫_Σ |∇u|^{p-1} da` in the metric `(1 + 1/r)^4 δ`, using a finite
    /// difference derivative of `u` at `r = 2`
    pub direct: f64,
}

pub fn capacity_kp(model: &ModelGeometry, tol: &Tolerances) -> Result<Capacity> {
    let f = &model.functions;
    let p = model.p;
    let r = 2.0;
    let h = 1e-3;
    let du =
        (-f.u(r + 2.0 * h) + 8.0 * f.u(r + h) - 8.0 * f.u(r - h) + f.u(r - 2.0 * h)) / (12.0 * h);
    let rho: f64 = 1.0 + 1.0 / r;
    // |∇u|_g = ρ^{-2}|u'|, da_g = ρ^4 r² dΩ; the flux through every sphere is equal
    let direct = 4.0 * PI * rho.powi(4) * r * r * (du.abs() / (rho * rho)).powf(p - 1.0);
    let kp = f.capacity();
    if ((direct - kp) / kp).abs() > tol.accept_rel {
        return Err(Error::CheckFailed(format!(
            "K_p = {kp} disagrees with the direct flux integral {direct}"
        )));
    }
    Ok(Capacity { kp, direct })
}

/// `(W_s(0), dW_s/dt(0))` with the minimal-boundary relation
/// `dW_s/dt(0) = 2 W_s(0)/(p-1)` checked.
pub fn ws_boundary_data(model: &ModelGeometry, tol: &Tolerances) -> Result<(f64, f64)> {
    let q = model.functions.point(1.0);
    let expected = 2.0 / (model.p - 1.0) * q.w;
    if ((q.dwdt - expected) / expected).abs() > tol.accept_rel {
        return Err(Error::CheckFailed(format!(
            "dW_s/dt(0) = {} but 2 W_s(0)/(p-1) = {expected}",
            q.dwdt
        )));
    }
    Ok((q.w, q.dwdt))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// tail-fitted coefficient of `r^{-(3-p)/(p-1)}` in `u_s`
    pub c_fit: f64,
    /// tail-fitted `lim (r + 3 - p) e^{-t/(3-p)}`
    pub c_tilde: f64,
    /// fitted next-order coefficient of `u_s` (`b_1`)
    pub b1: f64,
    /// `c_tilde / c_fit^{(p-1)/(3-p)}`
    pub tilde_ratio: f64,
    /// `(K_p / 4π)^{1/(p-1)}`, the normalization quoted alongside the expansion of `u_s`
    pub c_quoted: f64,
    /// `((p-1)/(3-p)) (K_p / 4π)^{1/(p-1)}`, the leading coefficient implied by the reduction
    pub c_derived: f64,
}

pub fn c_constants(model: &ModelGeometry) -> Result<ModelConstants> {
    if model.r_max < 1e4 {
        return Err(Error::InvalidParameter(
            "tail fits need R_max >= 1e4".into(),
        ));
    }
    let p = model.p;
    let a = model.functions.decay;
    let fit_u = fit_power_tail(&model.u_curve, -a, 1e-6)?;
    let tilde_curve = model
        .t_of_r
        .map(|r, t| (r + 3.0 - p) * (-t / (3.0 - p)).exp());
    let fit_t = fit_power_tail(&tilde_curve, 0.0, 1e-6)?;
    let c_quoted = (model.kp / (4.0 * PI)).powf(1.0 / (p - 1.0));
    Ok(ModelConstants {
        c_fit: fit_u.c0,
        c_tilde: fit_t.c0,
        b1: fit_u.c1,
        tilde_ratio: fit_t.c0 / fit_u.c0.powf(1.0 / a),
        c_quoted,
        c_derived: c_quoted / a,
    })
}

impl ModelGeometry {
    pub fn point(&self, r: f64) -> ModelPoint {
        self.functions.point(r)
    }

    pub fn point_at_t(&self, t: f64) -> Result<ModelPoint> {
        Ok(self.functions.point(self.functions.r_of_t(t)?))
    }

    pub fn t_max(&self) -> f64 {
        self.t_of_r.last().1
    }

    /// Max relative deviation of `|u'|^{p-1}(1 + 1/r)^{6-2p} r²` from its value at `r = 1`.
    pub fn flux_deviation(&self) -> f64 {
        let p = self.p;
        let flux =
            |r: f64, du: f64| du.abs().powf(p - 1.0) * (1.0 + 1.0 / r).powf(6.0 - 2.0 * p) * r * r;
        let (r0, d0) = self.du_curve.first();
        let f0 = flux(r0, d0);
        self.du_curve
            .points()
            .map(|(r, d)| ((flux(r, d) - f0) / f0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `r,u,du,t,W,dWdt` for every grid radius.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,u,du,t,W,dWdt")?;
        for &r in self.u_curve.abscissae() {
            let q = self.functions.point(r);
            writeln!(out, "{}", csv_row(&[q.r, q.u, q.du, q.t, q.w, q.dwdt]))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{indicial_roots, series_coefficients};
    use crate::numerics::{adaptive_quad, quad_tail, TailSpec};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// `∫_r^∞ σ^{-2/(p-1)}(1+1/σ)^{-2(3-p)/(p-1)} dσ` by quadrature.
    fn quad_integral(p: f64, r: f64) -> f64 {
        let e1 = 2.0 / (p - 1.0);
        let e2 = 2.0 * (3.0 - p) / (p - 1.0);
        let f = |s: f64| s.powf(-e1) * (1.0 + 1.0 / s).powf(-e2);
        let tail = TailSpec {
            exponent: e1,
            cutoff: 1e5,
        };
        quad_tail(f, r, tail, &tol()).unwrap()
    }

    #[test]
    fn flux_constant_three_halves_is_sixty() {
        let c = flux_constant(1.5).unwrap();
        assert!((c - 60.0).abs() < 1e-12 * 60.0, "{c}");
    }

    #[test]
    fn flux_constant_matches_quadrature() {
        for p in [1.1, 1.25, 1.5, 1.7, 1.95] {
            let c = flux_constant(p).unwrap();
            let q = 1.0 / quad_integral(p, 1.0);
            assert!(((c - q) / q).abs() < 1e-9, "p = {p}: {c} vs {q}");
        }
    }

    #[test]
    fn euclidean_weight_gives_power_law_constant() {
        // weight (1 + 1/σ) replaced by 1
        for p in [1.2, 1.5, 1.8] {
            let e1 = 2.0 / (p - 1.0);
            let tail = TailSpec {
                exponent: e1,
                cutoff: 1e3,
            };
            let i = quad_tail(|s: f64| s.powf(-e1), 1.0, tail, &tol()).unwrap();
            assert!((1.0 / i - (3.0 - p) / (p - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn p_outside_range_rejected() {
        assert!(flux_constant(2.0).is_err());
        assert!(flux_constant(1.0).is_err());
        assert!(model_profile(2.5, 1e6, 4096).is_err());
    }

    #[test]
    fn model_normalization_and_boundary_derivative() {
        let f = ModelFunctions::new(1.5).unwrap();
        assert_eq!(f.u(1.0), 1.0);
        assert!((f.u(1.0 + 1e-12) - 1.0).abs() < 1e-10);
        assert!((f.du(1.0) + 15.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn potential_matches_quadrature_on_a_range() {
        for p in [1.2, 1.5, 1.8] {
            let f = ModelFunctions::new(p).unwrap();
            for r in [1.3, 2.0, 10.0, 1e3] {
                let q = f.flux_constant * quad_integral(p, r);
                let u = f.u(r);
                assert!(((u - q) / q).abs() < 1e-9, "p={p} r={r}: {u} vs {q}");
            }
        }
    }

    #[test]
    fn radial_equation_residual_is_small() {
        for p in [1.2, 1.5, 1.8] {
            let f = ModelFunctions::new(p).unwrap();
            for r in [1.5, 3.0, 40.0] {
                let h = 1e-3 * r;
                let d2 = (-f.u(r + 2.0 * h) + 16.0 * f.u(r + h) - 30.0 * f.u(r)
                    + 16.0 * f.u(r - h)
                    - f.u(r - 2.0 * h))
                    / (12.0 * h * h);
                let d1 = f.du(r);
                let res = (p - 1.0) * d2 + (2.0 / r + 2.0 * (p - 3.0) / (r + r * r)) * d1;
                assert!(res.abs() <= 1e-6 * d1.abs() / r, "p={p} r={r} res={res}");
            }
        }
    }

    #[test]
    fn r_of_t_inverts_t() {
        let f = ModelFunctions::new(1.3).unwrap();
        for r in [1.0001, 1.7, 55.0, 3e4, 2e7] {
            let back = f.r_of_t(f.t(r)).unwrap();
            assert!(((back - r) / r).abs() < 1e-12, "{r} -> {back}");
        }
    }

    #[test]
    fn sampled_curves_interpolate_to_exact_values() {
        let m = model_profile(1.5, 1e6, 4096).unwrap();
        // u_s at t(r) = 1 against direct quadrature
        let r1 = m.functions.r_of_t(1.0).unwrap();
        let from_curve = m.u_curve.interpolate(r1).unwrap();
        let q = m.functions.flux_constant * quad_integral(1.5, r1);
        assert!(((from_curve - q) / q).abs() < 1e-6);
        for r in [1.0, 3.3, 1e5] {
            let t = m.t_of_r.interpolate(r).unwrap();
            let back = m.r_of_t.interpolate(t).unwrap();
            assert!(((back - r) / r).abs() < 1e-6);
        }
    }

    #[test]
    fn model_invariants() {
        for p in [1.2, 1.5, 1.8] {
            let m = model_profile(p, 1e6, 4096).unwrap();
            assert!(m.flux_deviation() < 1e-10, "p={p}: {}", m.flux_deviation());
            assert!(m.ws_curve.values().iter().all(|w| *w > 0.0));
            assert!(m.u_curve.values().windows(2).all(|w| w[1] < w[0]));
            assert_eq!(m.t_of_r.first(), (1.0, 0.0));
            // W_s from its definition: ∫|∇w|²_g da_g with |∇w|_g = (p-1)ρ^{-2}|u'|/u
            for r in [1.0, 7.0, 500.0] {
                let q = m.point(r);
                let rho: f64 = 1.0 + 1.0 / r;
                let grad = (p - 1.0) * q.du.abs() / q.u / (rho * rho);
                let def = grad * grad * 4.0 * PI * rho.powi(4) * r * r;
                assert!(((def - q.w) / q.w).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn two_term_expansion_remainder_is_bounded() {
        let p = 1.5;
        let m = model_profile(p, 1e6, 4096).unwrap();
        let a = m.functions.decay;
        let c = m.functions.c_fit_exact();
        let b1 = -(3.0 - p) * (3.0 - p) / (p - 1.0);
        let rem = |r: f64| ((m.functions.u(r) / (c * r.powf(-a)) - 1.0 - b1 / r) * r * r).abs();
        let (r1, r2) = (1e3, 1e5);
        assert!(rem(r2) < 2.0 * rem(r1) + 1.0, "{} {}", rem(r1), rem(r2));
    }

    #[test]
    fn capacity_three_halves() {
        let m = model_profile(1.5, 1e6, 1024).unwrap();
        let k = capacity_kp(&m, &tol()).unwrap();
        let expected = 4.0 * PI * 60f64.sqrt();
        assert!(((k.kp - expected) / expected).abs() < 1e-12);
        assert!((k.kp - 97.338_688).abs() < 1e-5);
        for i in 0..19 {
            let p = 1.05 + 0.05 * i as f64;
            assert!(ModelFunctions::new(p).unwrap().capacity() > 0.0);
        }
    }

    #[test]
    fn boundary_data_three_halves() {
        let m = model_profile(1.5, 1e6, 1024).unwrap();
        let (w0, dw0) = ws_boundary_data(&m, &tol()).unwrap();
        assert!((w0 - PI * (15.0f64 / 16.0).powi(2)).abs() < 1e-12);
        assert!((dw0 - 4.0 * w0).abs() < 1e-10);
        let (_, w_inf) = m.ws_curve.last();
        assert!((w_inf - 9.0 * PI).abs() < 1e-3 * 9.0 * PI);
    }

    #[test]
    fn c_constants_consistent() {
        for p in [1.2, 1.5, 1.8] {
            let m = model_profile(p, 1e6, 4096).unwrap();
            let c = c_constants(&m).unwrap();
            assert!(((c.c_fit - m.functions.c_fit_exact()) / c.c_fit).abs() < 1e-9);
            assert!((c.tilde_ratio - 1.0).abs() < 1e-6, "{}", c.tilde_ratio);
            assert!(((c.c_fit - c.c_derived) / c.c_derived).abs() < 1e-6);
            assert!(c.c_fit > 0.0);
        }
    }

    #[test]
    fn quadrature_route_matches_integral_form() {
        // C_s = 1/∫_1^∞ directly, with the exact value 1/60 at p = 3/2
        let v = adaptive_quad(|s| s * s / (s + 1.0).powi(6), 1.0, 1e4, 1e-12).unwrap();
        assert!((v - 1.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn g_equation_leading_data() {
        for p in [1.2, 1.5, 1.8] {
            let ode = ModelSeries::new(p, 12).unwrap().g_equation().unwrap();
            assert!((ode.p(1) - (3.0 - p) / (p - 1.0)).abs() < 1e-12);
            assert!((ode.q(2) + (3.0 - p) / (p - 1.0)).abs() < 1e-12);
            let roots = indicial_roots(&ode).unwrap();
            assert!((roots.alpha1 - 1.0).abs() < 1e-12);
            assert!((roots.alpha2 + (3.0 - p) / (p - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn growing_solution_constant_term() {
        // g_1 = -(r + 4/(3-p)) + O(1/r)
        for p in [1.2, 1.5, 1.8] {
            let ode = ModelSeries::new(p, 14).unwrap().g_equation().unwrap();
            let s = series_coefficients(&ode, 1.0, 1).unwrap();
            assert!((s.coefficients[0] - 4.0 / (3.0 - p)).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn abc_series_match_pointwise_values() {
        let p = 1.4;
        let s = ModelSeries::new(p, 40).unwrap();
        let f = ModelFunctions::new(p).unwrap();
        let r = 20.0;
        let x = 1.0 / r;
        let q = f.point(r);
        assert!((x * s.a_reduced().eval(x) - q.a).abs() < 1e-12 * q.a.abs());
        assert!((s.b().eval(x) - q.b).abs() < 1e-12 * q.b.abs());
        assert!((s.c().eval(x) - q.c).abs() < 1e-11 * q.c.abs());
    }

    #[test]
    fn radial_equation_data() {
        let ode = radial_equation(1.5, 4).unwrap();
        let s = series_coefficients(&ode, -3.0, 3).unwrap();
        assert!((s.coefficients[0] + 4.5).abs() < 1e-13);
    }

    #[test]
    fn beta_ratio_branches_agree_at_switch() {
        for p in [1.2, 1.5, 1.8] {
            let a = (3.0 - p) / (p - 1.0);
            let x = HYPERGEOMETRIC_SWITCH;
            let (series, series_excess) = beta_ratio(x, a);
            let cf = beta_cf(x, a, a);
            assert!((series / cf - 1.0).abs() < 1e-14, "p={p}");
            assert!((series_excess / (cf - 1.0) - 1.0).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn w_excess_is_accurate() {
        for p in [1.2, 1.5, 1.8] {
            let f = ModelFunctions::new(p).unwrap();
            let w_inf = 4.0 * std::f64::consts::PI * (3.0 - p).powi(2);
            for r in [1.0, 3.0, 30.0] {
                let q = f.point(r);
                assert!((q.w_excess - (q.w - w_inf)).abs() < 1e-13 * w_inf);
            }
            // O(1/r) decay survives where w - w_inf has cancelled
            let (a, b) = (f.point(1e7).w_excess, f.point(2e7).w_excess);
            assert!(a != 0.0 && (a / b - 2.0).abs() < 1e-6, "p={p} {a:e} {b:e}");
        }
    }
}
