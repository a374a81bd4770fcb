//! Adaptive Gauss–Kronrod quadrature and semi-infinite integrals with
//! algebraic tails.

#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::numerics::Tolerances;
use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077582209397150,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

const MAX_INTERVALS: usize = 4000;

/// Algebraic decay `f(r) ~ c r^(-exponent)` beyond `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub exponent: f64,
    pub cutoff: f64,
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[10];
    let mut rg = 0.0;
    for j in 0..10 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * hl, ((rk - rg) * hl).abs())
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive 21-point Gauss–Kronrod quadrature of `f` on `[a, b]`.
pub fn adaptive_quad<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return adaptive_quad(f, b, a, rel).map(|v| -v);
    }
    let (val, err) = gk21(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, val, err });
    let (mut total, mut total_err) = (val, err);
    loop {
        if !total.is_finite() {
            return Err(Error::Integration(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if total_err <= rel * total.abs() || total_err <= 1e-300 {
            return Ok(total);
        }
        if heap.len() >= MAX_INTERVALS {
            // accept a result dominated by rounding
            if total_err <= 1e3 * f64::EPSILON * total.abs() {
                return Ok(total);
            }
            return Err(Error::Integration(format!(
                "quadrature on [{a}, {b}] did not converge (error estimate {total_err:e})"
            )));
        }
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // interval cannot be split further
            return Ok(total);
        }
        let (v1, e1) = gk21(&mut f, p.a, m);
        let (v2, e2) = gk21(&mut f, m, p.b);
        total += v1 + v2 - p.val;
        total_err += e1 + e2 - p.err;
        heap.push(Panel {
            a: p.a,
            b: m,
            val: v1,
            err: e1,
        });
        heap.push(Panel {
            a: m,
            b: p.b,
            val: v2,
            err: e2,
        });
        if heap.len() % 64 == 0 {
            // refresh sums to limit drift
            total = heap.iter().map(|p| p.val).sum();
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }
}

/// `∫_a^∞ f`: adaptive quadrature up to `tail.cutoff` and an analytic
/// two-term algebraic tail beyond it.
///
/// The tail model `A r^(-κ) (1 + c1/r)` is fitted from `f` at the cutoff and
/// twice the cutoff and validated against `f` at four times the cutoff.
pub fn quad_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    tail: TailSpec,
    tol: &Tolerances,
) -> Result<f64> {
    let k = tail.exponent;
    if !(k > 1.0) {
        return Err(Error::Divergent(format!("tail exponent {k} <= 1")));
    }
    if !(tail.cutoff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff {} <= 0",
            tail.cutoff
        )));
    }
    let c = tail.cutoff.max(a);
    let body = adaptive_quad(&mut f, a, c, tol.quad_rel)?;
    let y1 = f(c) * c.powf(k);
    let y2 = f(2.0 * c) * (2.0 * c).powf(k);
    let y4 = f(4.0 * c) * (4.0 * c).powf(k);
    let amp = 2.0 * y2 - y1;
    let amp_c1 = 2.0 * c * (y1 - y2);
    let predicted = amp + amp_c1 / (4.0 * c);
    let scale = y1.abs().max(y2.abs()).max(y4.abs());
    if scale > 0.0 && (predicted - y4).abs() > 1e-3 * scale {
        return Err(Error::TailMismatch {
            exponent: k,
            detail: format!(
                "r^κ f(r) at ({c}, {}, {}) = ({y1:e}, {y2:e}, {y4:e})",
                2.0 * c,
                4.0 * c
            ),
        });
    }
    let tail_val = amp * c.powf(1.0 - k) / (k - 1.0) + amp_c1 * c.powf(-k) / k;
    Ok(body + tail_val)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn gk_polynomial_exact() {
        let v = adaptive_quad(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn inverse_square_tail() {
        let t = TailSpec {
            exponent: 2.0,
            cutoff: 50.0,
        };
        let v = quad_tail(|s| s.powi(-2), 1.0, t, &tol()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_fourth_power_from_two() {
        let t = TailSpec {
            exponent: 4.0,
            cutoff: 100.0,
        };
        let v = quad_tail(|x| x.powi(-4), 2.0, t, &tol()).unwrap();
        assert!((v - 1.0 / 24.0).abs() < 1e-10 / 24.0);
    }

    #[test]
    fn shifted_power_integral() {
        // 1/24 - 1/32 + 1/160 = 1/60 from the exact antiderivative in x = σ + 1
        let exact = 1.0 / 24.0 - 1.0 / 32.0 + 1.0 / 160.0;
        assert!((exact - 1.0 / 60.0f64).abs() < 1e-17);
        let t = TailSpec {
            exponent: 4.0,
            cutoff: 1e4,
        };
        let v = quad_tail(|s| s * s / (s + 1.0).powi(6), 1.0, t, &tol()).unwrap();
        assert!((v - exact).abs() < 1e-10 * exact, "{v}");
    }

    #[test]
    fn divergent_exponent_rejected() {
        let t = TailSpec {
            exponent: 1.0,
            cutoff: 10.0,
        };
        assert!(matches!(
            quad_tail(|s| 1.0 / s, 1.0, t, &tol()),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn wrong_exponent_detected() {
        let t = TailSpec {
            exponent: 3.0,
            cutoff: 100.0,
        };
        let r = quad_tail(|s| s.powi(-2), 1.0, t, &tol());
        assert!(matches!(r, Err(Error::TailMismatch { .. })), "{r:?}");
    }

    #[test]
    fn splitting_is_consistent() {
        let f = |s: f64| (1.0 + 1.0 / s).powf(-3.0) * s.powf(-2.5);
        let t = TailSpec {
            exponent: 2.5,
            cutoff: 1e5,
        };
        let whole = quad_tail(f, 1.0, t, &tol()).unwrap();
        let part =
            quad_tail(f, 7.0, t, &tol()).unwrap() + adaptive_quad(f, 1.0, 7.0, 1e-10).unwrap();
        assert!((whole - part).abs() <= 2e-10 * whole.abs());
    }
}
