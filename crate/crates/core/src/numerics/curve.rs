use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Samples of a real function on a strictly increasing set of abscissae.
///
/// Order 1 interpolates linearly; order 3 uses monotone piecewise cubic
/// Hermite interpolation (Fritsch–Carlson slopes), which never overshoots
/// the data between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    abscissae: Vec<f64>,
    values: Vec<f64>,
    order: usize,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl SampledCurve {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>, order: usize) -> Result<Self> {
        if abscissae.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "abscissae ({}) and values ({}) differ in length",
                abscissae.len(),
                values.len()
            )));
        }
        if abscissae.len() < 2 {
            return Err(Error::InvalidParameter("need at least two samples".into()));
        }
        if abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "abscissae must be strictly increasing".into(),
            ));
        }
        if order != 1 && order != 3 {
            return Err(Error::InvalidParameter(format!(
                "unsupported interpolation order {order}"
            )));
        }
        let slopes = if order == 3 {
            pchip_slopes(&abscissae, &values)
        } else {
            Vec::new()
        };
        Ok(Self {
            abscissae,
            values,
            order,
            slopes,
        })
    }

    /// Cubic curve with the supplied derivatives at the nodes (Hermite data).
    pub fn with_slopes(abscissae: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let mut c = Self::new(abscissae, values, 1)?;
        if slopes.len() != c.values.len() {
            return Err(Error::InvalidParameter("slope count mismatch".into()));
        }
        c.order = 3;
        c.slopes = slopes;
        Ok(c)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> (f64, f64) {
        (self.abscissae[0], self.values[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.len() - 1;
        (self.abscissae[n], self.values[n])
    }

    pub fn range(&self) -> (f64, f64) {
        (self.abscissae[0], self.abscissae[self.len() - 1])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.abscissae
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Applies `f` to every value, keeping abscissae and order.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.points().map(|(x, y)| f(x, y)).collect();
        Self::new(self.abscissae.clone(), values, self.order).expect("same abscissae")
    }

    /// Restriction to samples with abscissa in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Result<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            self.points().filter(|(x, _)| *x >= lo && *x <= hi).unzip();
        Self::new(xs, ys, self.order)
    }

    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let xs = &self.abscissae;
        let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i - 1,
        };
        let (x0, x1) = (xs[i], xs[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        if self.order == 1 {
            return Ok(y0 + s * (y1 - y0));
        }
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Ok(h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
