//! Dormand–Prince 5(4) with Hairer's fourth-order continuous extension.

use crate::numerics::SampledCurve;
use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Dense solution of an initial value problem.
///
/// Steps are stored in integration order; `eval` works for either direction.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    dim: usize,
    /// step endpoints in integration order
    xs: Vec<f64>,
    /// five continuous-extension coefficient vectors per step
    cont: Vec<[Vec<f64>; 5]>,
    y_end: Vec<f64>,
    y_start: Vec<f64>,
}

impl OdeSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> f64 {
        self.xs[0]
    }

    pub fn end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.cont.len()
    }

    pub fn final_state(&self) -> &[f64] {
        &self.y_end
    }

    fn contains(&self, x: f64) -> bool {
        let (a, b) = (self.start(), self.end());
        x >= a.min(b) && x <= a.max(b)
    }

    /// Dense output at `x` inside the integrated span.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        if !self.contains(x) {
            let (a, b) = (self.start(), self.end());
            return Err(Error::OutOfRange {
                x,
                lo: a.min(b),
                hi: a.max(b),
            });
        }
        if x == self.start() {
            return Ok(self.y_start.clone());
        }
        if x == self.end() {
            return Ok(self.y_end.clone());
        }
        let forward = self.end() > self.start();
        // first step whose end passes x
        let idx = self.xs[1..].partition_point(|&e| if forward { e < x } else { e > x });
        let idx = idx.min(self.cont.len() - 1);
        let (x0, x1) = (self.xs[idx], self.xs[idx + 1]);
        let theta = (x - x0) / (x1 - x0);
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.cont[idx];
        Ok((0..self.dim)
            .map(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
            .collect())
    }

    /// Derivative of the dense output at `x`.
    pub fn eval_derivative(&self, x: f64) -> Result<Vec<f64>> {
        if !self.contains(x) {
            let (a, b) = (self.start(), self.end());
            return Err(Error::OutOfRange {
                x,
                lo: a.min(b),
                hi: a.max(b),
            });
        }
        let forward = self.end() > self.start();
        let idx = self.xs[1..].partition_point(|&e| if forward { e < x } else { e > x });
        let idx = idx.min(self.cont.len() - 1);
        let (x0, x1) = (self.xs[idx], self.xs[idx + 1]);
        let th = (x - x0) / (x1 - x0);
        let th1 = 1.0 - th;
        let [_, r2, r3, r4, r5] = &self.cont[idx];
        Ok((0..self.dim)
            .map(|i| {
                let c = r4[i] + th1 * r5[i];
                let b = r3[i] + th * c;
                let a = r2[i] + th1 * b;
                let db = c - th * r5[i];
                let da = -b + th1 * db;
                (a + th * da) / (x1 - x0)
            })
            .collect())
    }

    /// Step nodes in increasing abscissa order with the solution values there.
    pub fn nodes(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut xs = self.xs.clone();
        let mut ys: Vec<Vec<f64>> = self.cont.iter().map(|c| c[0].clone()).collect();
        ys.push(self.y_end.clone());
        if xs[0] > xs[xs.len() - 1] {
            xs.reverse();
            ys.reverse();
        }
        (xs, ys)
    }

    /// Samples component `i` at the step nodes.
    pub fn component_curve(&self, i: usize) -> Result<SampledCurve> {
        let (xs, ys) = self.nodes();
        SampledCurve::new(xs, ys.into_iter().map(|y| y[i]).collect(), 3)
    }
}

/// Integrates `y' = rhs(x, y)` from `span.0` to `span.1` with relative local
/// error `rtol`.
pub fn integrate<F>(mut rhs: F, span: (f64, f64), y0: &[f64], rtol: f64) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let (x0, xend) = span;
    if !(x0.is_finite() && xend.is_finite()) || x0 == xend {
        return Err(Error::InvalidParameter(format!(
            "degenerate span [{x0}, {xend}]"
        )));
    }
    if !(rtol > 0.0) {
        return Err(Error::InvalidParameter("rtol must be positive".into()));
    }
    let n = y0.len();
    let dir = (xend - x0).signum();
    let span_len = (xend - x0).abs();

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut y = y0.to_vec();
    let mut x = x0;

    rhs(x, &y, &mut k[0]);
    let mut h = initial_step(&mut rhs, x, &y, &k[0], dir, rtol, span_len);

    let mut xs = vec![x0];
    let mut cont = Vec::new();
    let mut last_reject = false;

    for _ in 0..MAX_STEPS {
        if (x + h - xend) * dir > 0.0 {
            h = xend - x;
        }
        if h.abs() <= 10.0 * f64::EPSILON * x.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { x });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k[0][i];
        }
        rhs(x + C2 * h, &ytmp, &mut k[1]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(x + C3 * h, &ytmp, &mut k[2]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(x + C4 * h, &ytmp, &mut k[3]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(x + C5 * h, &ytmp, &mut k[4]);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k[0][i]
                    + A62 * k[1][i]
                    + A63 * k[2][i]
                    + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        rhs(x + h, &ytmp, &mut k[5]);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k[0][i]
                    + A73 * k[2][i]
                    + A74 * k[3][i]
                    + A75 * k[4][i]
                    + A76 * k[5][i]);
        }
        rhs(x + h, &ynew, &mut k[6]);

        let ynorm = y
            .iter()
            .chain(ynew.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = rtol * (y[i].abs().max(ynew[i].abs()) + 1e-6 * ynorm) + f64::MIN_POSITIVE;
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            last_reject = true;
            continue;
        }

        if err <= 1.0 {
            let mut r = [
                y.clone(),
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
            ];
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k[6][i] - bspl;
                r[4][i] = h
                    * (D1 * k[0][i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            cont.push(r);
            x += h;
            if (x - xend) * dir >= 0.0 || (xend - x).abs() <= 4.0 * f64::EPSILON * xend.abs() {
                x = xend;
            }
            xs.push(x);
            y.copy_from_slice(&ynew);
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
            if x == xend {
                return Ok(OdeSolution {
                    dim: n,
                    xs,
                    cont,
                    y_end: y,
                    y_start: y0.to_vec(),
                });
            }
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_reject {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_reject = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            last_reject = true;
        }
    }
    Err(Error::Integration(format!(
        "step budget exhausted at x = {x}"
    )))
}

fn initial_step<F>(
    rhs: &mut F,
    x: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    rtol: f64,
    span: f64,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sc: Vec<f64> = y
        .iter()
        .map(|v| rtol * (v.abs() + 1e-6 * ynorm) + f64::MIN_POSITIVE)
        .collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d1 = (f0
        .iter()
        .zip(&sc)
        .map(|(v, s)| (v / s).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    rhs(x + dir * h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    // a zero initial state leaves no scale to estimate from
    let h1 = if h1.is_finite() && h1 > 0.0 { h1 } else { h0 };
    dir * (100.0 * h0).min(h1).min(span)
}

/// Integrates the linear system `y' = A(x) y`.
///
/// `matrix(x, a)` fills `a` with `A(x)` in row-major order. The span is given
/// as an unordered interval; `direction` picks the starting end.
pub fn integrate_linear_system<M>(
    mut matrix: M,
    y0: &[f64],
    span: (f64, f64),
    direction: Direction,
    rtol: f64,
) -> Result<OdeSolution>
where
    M: FnMut(f64, &mut [f64]),
{
    let n = y0.len();
    let (lo, hi) = (span.0.min(span.1), span.0.max(span.1));
    let ordered = match direction {
        Direction::Forward => (lo, hi),
        Direction::Backward => (hi, lo),
    };
    let mut a = vec![0.0; n * n];
    integrate(
        |x, y, dy| {
            matrix(x, &mut a);
            for i in 0..n {
                dy[i] = (0..n).map(|j| a[i * n + j] * y[j]).sum();
            }
        },
        ordered,
        y0,
        rtol,
    )
}
