//! Rotationally symmetric metrics `ds² + φ(s)² g₀` on `[0, ∞) × S²`.
//!
//! A profile is integrated numerically on `[0, s_match]`, past any bump and
//! until `φ ≥ 8m`, and continued by the exact Schwarzschild exterior of its
//! Hawking mass `m` (flat when `m = 0`).

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::numerics::{
    csv_row, fit_power_tail, integrate, log_grid, uniform_grid, OdeSolution, SampledCurve,
};
use crate::schwarzschild::ModelFunctions;
use crate::{check_p, Error, Result};

const WARP_RTOL: f64 = 1e-12;

/// C² compactly supported hump on `[start, end]` with peak value 1: a
/// uniform cubic B-spline rescaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub start: f64,
    pub end: f64,
}

impl Bump {
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.start || s >= self.end {
            return 0.0;
        }
        let x = 4.0 * (s - self.start) / (self.end - self.start);
        let b = if x < 1.0 {
            x * x * x
        } else if x < 2.0 {
            -3.0 * x * x * x + 12.0 * x * x - 12.0 * x + 4.0
        } else if x < 3.0 {
            3.0 * x * x * x - 24.0 * x * x + 60.0 * x - 44.0
        } else {
            (4.0 - x).powi(3)
        };
        b / 4.0
    }

    fn knots(&self) -> [f64; 5] {
        let d = (self.end - self.start) / 4.0;
        [0.0, 1.0, 2.0, 3.0, 4.0].map(|k| self.start + k * d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    /// horizon at `φ = 2m`
    Schwarzschild { mass: f64 },
    /// Schwarzschild start with a nonnegative scalar-curvature hump
    Bumped { mass: f64, eps: f64, bump: Bump },
    /// exterior of a round ball, `φ = radius + s`
    Euclidean { radius: f64 },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Schwarzschild { .. } => "schwarzschild",
            Family::Bumped { .. } => "bumped",
            Family::Euclidean { .. } => "euclidean",
        }
    }

    /// Default bump of the bumped family: supported on `[m, 4m]`.
    pub fn bumped(mass: f64, eps: f64) -> Self {
        Family::Bumped {
            mass,
            eps,
            bump: Bump {
                start: mass,
                end: 4.0 * mass,
            },
        }
    }

    fn forcing(&self, s: f64) -> f64 {
        match self {
            Family::Bumped { eps, bump, .. } => eps * bump.eval(s),
            _ => 0.0,
        }
    }

    /// The same family under `(φ, s) → (λφ, λs)`.
    pub fn scaled(&self, lambda: f64) -> Self {
        match *self {
            Family::Schwarzschild { mass } => Family::Schwarzschild {
                mass: lambda * mass,
            },
            Family::Bumped { mass, eps, bump } => Family::Bumped {
                mass: lambda * mass,
                eps,
                bump: Bump {
                    start: lambda * bump.start,
                    end: lambda * bump.end,
                },
            },
            Family::Euclidean { radius } => Family::Euclidean {
                radius: lambda * radius,
            },
        }
    }
}

/// `φ, φ', φ''` at one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpPoint {
    pub s: f64,
    pub phi: f64,
    pub dphi: f64,
    pub ddphi: f64,
}

/// Exact Schwarzschild continuation beyond `s0`, parametrized by the
/// isotropic radius `ρ`: `φ = ρ(1 + m/2ρ)²`, `ds = (1 + m/2ρ)² dρ`.
/// With `m = 0` it is the flat cone `φ = φ0 + s - s0`.
#[derive(Debug, Clone, Copy)]
struct Exterior {
    mass: f64,
    s0: f64,
    phi0: f64,
    rho0: f64,
}

impl Exterior {
    fn new(mass: f64, s0: f64, phi0: f64, dphi0: f64) -> Self {
        // ρ² + (m - φ)ρ + m²/4 = 0 with √(φ(φ - 2m)) = φ φ'
        let rho0 = 0.5 * (phi0 - mass + phi0 * dphi0);
        Self {
            mass,
            s0,
            phi0,
            rho0,
        }
    }

    fn primitive(&self, rho: f64) -> f64 {
        let m = self.mass;
        rho + m * rho.ln() - m * m / (4.0 * rho)
    }

    /// `ρ(s)` by Newton iteration on the concave primitive.
    fn rho_at(&self, s: f64) -> f64 {
        let target = s - self.s0;
        let base = self.primitive(self.rho0);
        let mut rho = self.rho0 + target;
        for _ in 0..200 {
            let f = self.primitive(rho) - base - target;
            let g = (1.0 + self.mass / (2.0 * rho)).powi(2);
            let next = (rho - f / g).max(self.rho0);
            if (next - rho).abs() <= 2.0 * f64::EPSILON * rho {
                return next;
            }
            rho = next;
        }
        rho
    }

    /// Radius in the mass-2 model, `2ρ/m`.
    fn model_radius(&self, s: f64) -> f64 {
        2.0 * self.rho_at(s) / self.mass
    }

    fn point(&self, s: f64) -> WarpPoint {
        if self.mass == 0.0 {
            return WarpPoint {
                s,
                phi: self.phi0 + (s - self.s0),
                dphi: 1.0,
                ddphi: 0.0,
            };
        }
        let rho = self.rho_at(s);
        let q = self.mass / (2.0 * rho);
        let phi = rho * (1.0 + q).powi(2);
        WarpPoint {
            s,
            phi,
            dphi: (1.0 - q) / (1.0 + q),
            ddphi: self.mass / (phi * phi),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WarpProfile {
    pub family: Family,
    pub s_max: f64,
    /// decay rate of `|φ' - 1|`
    pub af_exponent: f64,
    /// `φ'(0) = 0`
    pub minimal: bool,
    pub phi: SampledCurve,
    pub dphi: SampledCurve,
    pub ddphi: SampledCurve,
    interior: Vec<OdeSolution>,
    exterior: Exterior,
}

fn rhs(family: &Family, s: f64, y: &[f64], dy: &mut [f64]) {
    dy[0] = y[1];
    dy[1] = (1.0 - y[1] * y[1] - family.forcing(s)) / (2.0 * y[0]);
}

/// Integrates the interior from `φ(0) = 2m, φ'(0) = 0` through the knots of
/// the forcing. Past the last knot the profile is vacuum.
fn integrate_interior(family: &Family) -> Result<(Vec<OdeSolution>, Exterior)> {
    let (mass, breaks): (f64, Vec<f64>) = match family {
        Family::Schwarzschild { mass } => (*mass, vec![]),
        Family::Bumped { mass, bump, .. } => {
            if !(bump.start >= 0.0 && bump.end > bump.start) {
                return Err(Error::InvalidParameter(format!(
                    "bump support [{}, {}]",
                    bump.start, bump.end
                )));
            }
            (*mass, bump.knots().to_vec())
        }
        Family::Euclidean { radius } => {
            if !(*radius > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "radius = {radius} must be positive"
                )));
            }
            return Ok((vec![], Exterior::new(0.0, 0.0, *radius, 1.0)));
        }
    };
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mass = {mass} must be positive"
        )));
    }
    let mut segments: Vec<OdeSolution> = Vec::new();
    let mut y = vec![2.0 * mass, 0.0];
    let mut s = 0.0;
    for &b in breaks.iter().filter(|&&b| b > 0.0) {
        let seg = integrate(|x, y, dy| rhs(family, x, y, dy), (s, b), &y, WARP_RTOL)?;
        y = seg.final_state().to_vec();
        s = b;
        segments.push(seg);
        if !(y[1] < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "φ' reaches {} >= 1 at s = {s}",
                y[1]
            )));
        }
        if !(y[1] > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "φ' = {} <= 0 at s = {s}: not asymptotically flat",
                y[1]
            )));
        }
    }
    let hawking = 0.5 * y[0] * (1.0 - y[1] * y[1]);
    Ok((segments, Exterior::new(hawking, s, y[0], y[1])))
}

impl WarpProfile {
    pub fn new(family: Family, s_max: f64, n: usize) -> Result<Self> {
        let (interior, exterior) = integrate_interior(&family)?;
        if !(s_max > exterior.s0 + 1.0) {
            return Err(Error::InvalidParameter(format!(
                "s_max = {s_max} must exceed the matching point {} by at least 1",
                exterior.s0
            )));
        }
        if n < 16 {
            return Err(Error::InvalidParameter(format!("n = {n} is too small")));
        }
        let minimal = !matches!(family, Family::Euclidean { .. });
        let mut profile = WarpProfile {
            family,
            s_max,
            af_exponent: 1.0,
            minimal,
            phi: SampledCurve::new(vec![0.0, 1.0], vec![0.0, 0.0], 1)?,
            dphi: SampledCurve::new(vec![0.0, 1.0], vec![0.0, 0.0], 1)?,
            ddphi: SampledCurve::new(vec![0.0, 1.0], vec![0.0, 0.0], 1)?,
            interior,
            exterior,
        };
        let grid = profile.s_grid(n);
        let pts: Vec<WarpPoint> = grid.iter().map(|&s| profile.at(s)).collect::<Result<_>>()?;
        profile.phi = SampledCurve::with_slopes(
            grid.clone(),
            pts.iter().map(|q| q.phi).collect(),
            pts.iter().map(|q| q.dphi).collect(),
        )?;
        profile.dphi = SampledCurve::with_slopes(
            grid.clone(),
            pts.iter().map(|q| q.dphi).collect(),
            pts.iter().map(|q| q.ddphi).collect(),
        )?;
        profile.ddphi = SampledCurve::new(grid, pts.iter().map(|q| q.ddphi).collect(), 3)?;
        Ok(profile)
    }

    /// Uniform on the interior, logarithmic beyond.
    fn s_grid(&self, n: usize) -> Vec<f64> {
        let s0 = self.exterior.s0;
        if s0 == 0.0 {
            let mut g = vec![0.0];
            g.extend(log_grid(1e-3 * self.s_max.min(1.0), self.s_max, n - 1));
            return g;
        }
        let mut g = uniform_grid(0.0, s0, n / 4);
        g.extend(log_grid(s0, self.s_max, n - n / 4).into_iter().skip(1));
        g
    }

    /// End of the numerically integrated part.
    pub fn s_match(&self) -> f64 {
        self.exterior.s0
    }

    /// Mass of the exact exterior.
    pub fn exterior_mass(&self) -> f64 {
        self.exterior.mass
    }

    pub fn at(&self, s: f64) -> Result<WarpPoint> {
        if !(s >= 0.0) {
            return Err(Error::OutOfRange {
                x: s,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if s >= self.exterior.s0 {
            return Ok(self.exterior.point(s));
        }
        let seg = self
            .interior
            .iter()
            .find(|seg| s <= seg.end())
            .ok_or(Error::OutOfRange {
                x: s,
                lo: 0.0,
                hi: self.exterior.s0,
            })?;
        let y = seg.eval(s)?;
        let mut dy = [0.0; 2];
        rhs(&self.family, s, &y, &mut dy);
        Ok(WarpPoint {
            s,
            phi: y[0],
            dphi: y[1],
            ddphi: dy[1],
        })
    }

    pub fn hawking_mass(&self, s: f64) -> Result<f64> {
        let q = self.at(s)?;
        Ok(0.5 * q.phi * (1.0 - q.dphi * q.dphi))
    }

    /// `R = 2(1 - φ'²)/φ² - 4φ''/φ`.
    pub fn curvature(&self, s: f64) -> Result<f64> {
        let q = self.at(s)?;
        Ok(scalar_curvature_of(q))
    }

    /// Step nodes of the integrated interior, increasing.
    fn interior_nodes(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.interior.iter().flat_map(|seg| seg.nodes().0).collect();
        v.dedup();
        v
    }
}

pub fn scalar_curvature_of(q: WarpPoint) -> f64 {
    2.0 * (1.0 - q.dphi * q.dphi) / (q.phi * q.phi) - 4.0 * q.ddphi / q.phi
}

pub const DEFAULT_S_MAX_FACTOR: f64 = 1e4;
pub const DEFAULT_WARP_POINTS: usize = 2048;

/// Mass-`m` Schwarzschild in warped form with horizon boundary.
pub fn family_schwarzschild(m: f64, s_max: f64) -> Result<WarpProfile> {
    WarpProfile::new(
        Family::Schwarzschild { mass: m },
        s_max,
        DEFAULT_WARP_POINTS,
    )
}

/// Schwarzschild start of mass `m0` with scalar curvature `2 eps bump/φ²`.
pub fn family_bumped(m0: f64, eps: f64, bump: Bump, s_max: f64) -> Result<WarpProfile> {
    WarpProfile::new(
        Family::Bumped {
            mass: m0,
            eps,
            bump,
        },
        s_max,
        DEFAULT_WARP_POINTS,
    )
}

/// Flat exterior of a ball.
pub fn family_euclidean(radius: f64, s_max: f64) -> Result<WarpProfile> {
    WarpProfile::new(Family::Euclidean { radius }, s_max, DEFAULT_WARP_POINTS)
}

/// `R(s)` on the profile's grid.
pub fn scalar_curvature(warp: &WarpProfile) -> Result<SampledCurve> {
    let s = warp.phi.abscissae().to_vec();
    let r = s
        .iter()
        .map(|&x| warp.curvature(x))
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(s, r, 3)
}

#[derive(Debug, Clone)]
pub struct Masses {
    pub hawking: SampledCurve,
    pub adm: f64,
    /// smallest `m(s_{i+1}) - m(s_i)` over the grid and the interior steps
    pub min_increment: f64,
}

pub fn masses(warp: &WarpProfile) -> Result<Masses> {
    let s = warp.phi.abscissae().to_vec();
    let m = s
        .iter()
        .map(|&x| warp.hawking_mass(x))
        .collect::<Result<Vec<_>>>()?;
    let hawking = SampledCurve::new(s, m, 3)?;
    let adm = if hawking.values().iter().all(|v| *v == 0.0) {
        0.0
    } else {
        fit_power_tail(&hawking, 0.0, 1e-6)?.c0
    };
    let mut nodes = warp.interior_nodes();
    nodes.extend(hawking.abscissae().iter().copied());
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let vals = nodes
        .iter()
        .map(|&x| warp.hawking_mass(x))
        .collect::<Result<Vec<_>>>()?;
    let min_increment = vals
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    Ok(Masses {
        hawking,
        adm,
        min_increment,
    })
}

/// Radial p-harmonic potential `u' = -C φ^{-2/(p-1)}`, `u(0) = 1`, `u → 0`.
///
/// On the vacuum exterior `u` is a multiple of the model potential at the
/// mass-scaled isotropic radius, so `W` and `dW/dt` there are the model's.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    pub p: f64,
    /// flux constant `C`
    pub flux: f64,
    kappa: f64,
    /// `∫_s^{s_match} φ^{-κ}` over the interior, integrated inward so that
    /// small values of `u` keep their relative accuracy
    inward: Option<OdeSolution>,
    /// `∫_{s_match}^∞ φ^{-κ}`
    outer: f64,
    /// `∫_s^∞ φ^{-κ} = tail_scale · U(r)` on the exterior
    tail_scale: f64,
    model: ModelFunctions,
    warp: WarpProfile,
}

impl RadialPotential {
    fn exterior_radius(&self, s: f64) -> Option<f64> {
        let ext = &self.warp.exterior;
        (s >= ext.s0 && ext.mass > 0.0).then(|| ext.model_radius(s))
    }

    pub fn ln_u(&self, s: f64) -> Result<f64> {
        let ext = &self.warp.exterior;
        if s >= ext.s0 {
            if let Some(r) = self.exterior_radius(s) {
                return Ok((self.flux * self.tail_scale).ln() + self.model.ln_u(r));
            }
            let phi = ext.point(s).phi;
            return Ok(self.flux.ln() + (1.0 - self.kappa) * phi.ln() - (self.kappa - 1.0).ln());
        }
        let c = self.inward.as_ref().expect("interior exists when s0 > 0");
        Ok((self.flux * (c.eval(s)?[0] + self.outer)).ln())
    }

    pub fn u(&self, s: f64) -> Result<f64> {
        Ok(self.ln_u(s)?.exp())
    }

    pub fn du(&self, s: f64) -> Result<f64> {
        Ok(-self.flux * self.warp.at(s)?.phi.powf(-self.kappa))
    }

    /// `t = (1-p) ln u`.
    pub fn t(&self, s: f64) -> Result<f64> {
        Ok((1.0 - self.p) * self.ln_u(s)?)
    }

    /// `|∇w| = (p-1)|u'|/u = dt/ds`.
    pub fn grad_w(&self, s: f64) -> Result<f64> {
        if let Some(r) = self.exterior_radius(s) {
            let dsdr = 0.5 * self.warp.exterior.mass * (1.0 + 1.0 / r).powi(2);
            return Ok(self.model.dtdr(r) / dsdr);
        }
        Ok((self.p - 1.0) * self.flux * self.warp.at(s)?.phi.powf(-self.kappa) / self.u(s)?)
    }

    /// `W - 4π(3-p)²`.
    pub fn w_excess(&self, s: f64) -> Result<f64> {
        if let Some(r) = self.exterior_radius(s) {
            return Ok(self.model.point(r).w_excess);
        }
        Ok(self.w_derivatives(s)?.0 - 4.0 * PI * (3.0 - self.p).powi(2))
    }

    /// Inverse of `t(s)` by safeguarded Newton iteration.
    pub fn s_of_t(&self, t: f64, guess: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::OutOfRange {
                x: t,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut s = guess.max(0.0);
        for _ in 0..200 {
            let f = self.t(s)? - t;
            if f.abs() <= 2.0 * f64::EPSILON * t {
                return Ok(s);
            }
            if f < 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
            let mut next = s - f / self.grad_w(s)?;
            if !(next > lo && next < hi) {
                next = if hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    2.0 * lo.max(1.0)
                };
            }
            if (next - s).abs() <= 1e-15 * s.max(1.0) {
                return Ok(next);
            }
            s = next;
        }
        Err(Error::Integration(format!(
            "s(t) inversion did not converge at t = {t}"
        )))
    }

    pub fn warp(&self) -> &WarpProfile {
        &self.warp
    }

    /// `(W, dW/dt, d²W/dt²)` at radius `s`.
    ///
    /// With `G = |∇w| = dt/ds` and `A = (1-κ)φ'/φ + G/(p-1)`,
    /// `dW/ds = 2WA`, `G'/G = -κφ'/φ + G/(p-1)`, so
    /// `dW/dt = 2WA/G` and `d²W/dt² = 2W(2A² + A' - A G'/G)/G²`.
    pub fn w_derivatives(&self, s: f64) -> Result<(f64, f64, f64)> {
        let q = self.warp.at(s)?;
        let (p, k) = (self.p, self.kappa);
        let g = self.grad_w(s)?;
        let lphi = q.dphi / q.phi;
        let lg = -k * lphi + g / (p - 1.0);
        let (w, a) = match self.exterior_radius(s) {
            Some(r) => {
                let m = self.model.point(r);
                (m.w, 0.5 * m.dwdt * g / m.w)
            }
            None => (
                4.0 * PI * q.phi * q.phi * g * g,
                (1.0 - k) * lphi + g / (p - 1.0),
            ),
        };
        let da = (1.0 - k) * (q.ddphi / q.phi - lphi * lphi) + g * lg / (p - 1.0);
        let dwdt = 2.0 * w * a / g;
        let ddwdt = 2.0 * w * (2.0 * a * a + da - a * lg) / (g * g);
        Ok((w, dwdt, ddwdt))
    }

    /// `d²W/dt²` by fourth-order differences of `dW/dt` at spacing `step`,
    /// one-sided near `t = 0`. Independent of the closed form in
    /// [`Self::w_derivatives`].
    pub fn w_second_derivative_fd(&self, t: f64, s: f64, step: f64) -> Result<f64> {
        let y =
            |k: f64| -> Result<f64> { Ok(self.w_derivatives(self.s_of_t(t + k * step, s)?)?.1) };
        let d = if t >= 2.0 * step {
            y(-2.0)? - 8.0 * y(-1.0)? + 8.0 * y(1.0)? - y(2.0)?
        } else {
            -25.0 * y(0.0)? + 48.0 * y(1.0)? - 36.0 * y(2.0)? + 16.0 * y(3.0)? - 3.0 * y(4.0)?
        };
        Ok(d / (12.0 * step))
    }
}

pub fn radial_p_harmonic(warp: &WarpProfile, p: f64) -> Result<RadialPotential> {
    check_p(p)?;
    let kappa = 2.0 / (p - 1.0);
    let s0 = warp.exterior.s0;
    let (inward, inner) = if s0 > 0.0 {
        let mut err = None;
        let sol = integrate(
            |s, _, dy| match warp.at(s) {
                Ok(q) => dy[0] = -q.phi.powf(-kappa),
                Err(e) => {
                    err.get_or_insert(e);
                    dy[0] = 0.0;
                }
            },
            (s0, 0.0),
            &[0.0],
            WARP_RTOL,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        let v = sol.final_state()[0];
        (Some(sol), v)
    } else {
        (None, 0.0)
    };
    let model = ModelFunctions::new(p)?;
    let ext = &warp.exterior;
    let (tail_scale, outer) = if ext.mass > 0.0 {
        let scale = (0.5 * ext.mass).powf(1.0 - kappa) / model.flux_constant;
        (scale, scale * model.u(ext.model_radius(ext.s0)))
    } else {
        (0.0, ext.phi0.powf(1.0 - kappa) / (kappa - 1.0))
    };
    let total = inner + outer;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Divergent(format!(
            "normalization integral = {total}"
        )));
    }
    Ok(RadialPotential {
        p,
        flux: 1.0 / total,
        kappa,
        inward,
        outer,
        tail_scale,
        model,
        warp: warp.clone(),
    })
}

/// `C_p = 4π C^{p-1}`.
pub fn capacity_cp(potential: &RadialPotential) -> f64 {
    4.0 * PI * potential.flux.powf(potential.p - 1.0)
}

/// Level-set data sampled on a uniform grid in `t`.
#[derive(Debug, Clone)]
pub struct FlowProfile {
    pub p: f64,
    pub family: Family,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub w: Vec<f64>,
    /// `W - 4π(3-p)²`
    pub w_excess: Vec<f64>,
    pub dwdt: Vec<f64>,
    pub ddwdt: Vec<f64>,
    /// mean curvature `2φ'/φ` of the level sphere
    pub h: Vec<f64>,
    /// `∫ H |∇w| da = 4πφ² H |∇w|`
    pub h_grad: Vec<f64>,
    pub r: Vec<f64>,
    pub hawking: Vec<f64>,
    pub cp: f64,
    pub adm: f64,
}

pub const DEFAULT_FLOW_POINTS: usize = 3001;

pub fn level_flow(warp: &WarpProfile, p: f64, n: usize) -> Result<FlowProfile> {
    if !warp.minimal {
        return Err(Error::Hypothesis(format!(
            "{} boundary is not minimal; level-set monotonicity does not apply",
            warp.family.tag()
        )));
    }
    if n < 64 {
        return Err(Error::InvalidParameter(format!("n = {n} is too small")));
    }
    let pot = radial_p_harmonic(warp, p)?;
    let t_max = pot.t(warp.s_max)?;
    let ts = uniform_grid(0.0, t_max, n);
    let mut f = FlowProfile {
        p,
        family: warp.family,
        t: ts.clone(),
        s: Vec::with_capacity(n),
        phi: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        du: Vec::with_capacity(n),
        w: Vec::with_capacity(n),
        w_excess: Vec::with_capacity(n),
        dwdt: Vec::with_capacity(n),
        ddwdt: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        h_grad: Vec::with_capacity(n),
        r: Vec::with_capacity(n),
        hawking: Vec::with_capacity(n),
        cp: capacity_cp(&pot),
        adm: masses(warp)?.adm,
    };
    let mut s = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        s = if i + 1 == n {
            warp.s_max
        } else {
            pot.s_of_t(t, s)?
        };
        let q = warp.at(s)?;
        let u = pot.u(s)?;
        let du = pot.du(s)?;
        let grad = (p - 1.0) * du.abs() / u;
        let (w, dwdt, ddwdt) = pot.w_derivatives(s)?;
        let h = 2.0 * q.dphi / q.phi;
        f.s.push(s);
        f.phi.push(q.phi);
        f.u.push(u);
        f.du.push(du);
        f.w.push(w);
        f.w_excess.push(pot.w_excess(s)?);
        f.dwdt.push(dwdt);
        f.ddwdt.push(ddwdt);
        f.h.push(h);
        f.h_grad.push(4.0 * PI * q.phi * q.phi * h * grad);
        f.r.push(scalar_curvature_of(q));
        f.hawking.push(0.5 * q.phi * (1.0 - q.dphi * q.dphi));
    }
    Ok(f)
}

impl FlowProfile {
    pub fn t_step(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    pub fn curve(&self, values: &[f64]) -> Result<SampledCurve> {
        SampledCurve::new(self.t.clone(), values.to_vec(), 3)
    }

    /// Largest `|dW/dt - (2/(p-1))W + ((3-p)/(p-1)) ∫H|∇w||` relative to `W`.
    pub fn first_variation_gap(&self) -> f64 {
        let p = self.p;
        (0..self.t.len())
            .map(|i| {
                let rhs = 2.0 / (p - 1.0) * self.w[i] - (3.0 - p) / (p - 1.0) * self.h_grad[i];
                (self.dwdt[i] - rhs).abs() / self.w[i]
            })
            .fold(0.0, f64::max)
    }

    /// Writes `s,t,phi,u,W,dWdt,H,R,hawking`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "s,t,phi,u,W,dWdt,H,R,hawking")?;
        for i in 0..self.t.len() {
            let row = [
                self.s[i],
                self.t[i],
                self.phi[i],
                self.u[i],
                self.w[i],
                self.dwdt[i],
                self.h[i],
                self.r[i],
                self.hawking[i],
            ];
            writeln!(out, "{}", csv_row(&row))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct WResidual {
    pub residual: SampledCurve,
    /// `max_t |residual - 2π(3-p)² R φ²|`
    pub identity_gap: f64,
    pub min_residual: f64,
}

/// `(p-1)(3-p)W'' - W + 4π(3-p)² - 2(2-p)W' - ((p-1)(5-p)/4) W'²/W`.
pub fn w_inequality_residual(flow: &FlowProfile) -> Result<WResidual> {
    let p = flow.p;
    let ddw = &flow.ddwdt;
    let mut res = Vec::with_capacity(flow.t.len());
    let mut gap = 0.0f64;
    for i in 0..flow.t.len() {
        let (w, dw) = (flow.w[i], flow.dwdt[i]);
        let v = (p - 1.0) * (3.0 - p) * ddw[i] - w + 4.0 * PI * (3.0 - p).powi(2)
            - 2.0 * (2.0 - p) * dw
            - (p - 1.0) * (5.0 - p) / 4.0 * dw * dw / w;
        let expected = 2.0 * PI * (3.0 - p).powi(2) * flow.r[i] * flow.phi[i] * flow.phi[i];
        gap = gap.max((v - expected).abs());
        res.push(v);
    }
    let min_residual = res.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WResidual {
        residual: flow.curve(&res)?,
        identity_gap: gap,
        min_residual,
    })
}
