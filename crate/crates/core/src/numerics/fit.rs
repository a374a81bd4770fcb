use serde::{Deserialize, Serialize};

use crate::numerics::SampledCurve;
use crate::{Error, Result};

/// Coefficients of `v(r) ≈ c0 r^α (1 + c1/r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c0: f64,
    pub c1: f64,
    /// max relative deviation of the fitted model over the fitted samples
    pub residual: f64,
}

/// Fits `v(r) ≈ c0 r^α (1 + c1/r + c2/r²)` by least squares over the largest
/// decade of samples and returns `(c0, c1)`; `c2` absorbs the next-order
/// remainder so that `c1` is not biased by it.
pub fn fit_power_tail(curve: &SampledCurve, alpha: f64, max_residual: f64) -> Result<TailFit> {
    let (_, xmax) = curve.range();
    let xmin = xmax / 10.0;
    let mut pts: Vec<(f64, f64)> = curve.points().filter(|(x, _)| *x >= xmin).collect();
    if pts.len() < 4 {
        let n = curve.len();
        pts = curve.points().skip(n.saturating_sub(8)).collect();
    }
    if pts.len() < 3 || pts[0].0 <= 0.0 {
        return Err(Error::InvalidParameter(
            "need at least three positive abscissae for a tail fit".into(),
        ));
    }
    // y = A + B z + C z² with z = x_lo / x in (0, 1]
    let x_lo = pts[0].0;
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    let rows: Vec<([f64; 3], f64)> = pts
        .iter()
        .map(|&(x, v)| {
            let z = x_lo / x;
            ([1.0, z, z * z], v * x.powf(-alpha))
        })
        .collect();
    let yscale = rows.iter().fold(0.0f64, |m, r| m.max(r.1.abs()));
    if yscale == 0.0 {
        return Err(Error::InvalidParameter(
            "tail samples are identically zero".into(),
        ));
    }
    for (row, y) in &rows {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y / yscale;
        }
    }
    let sol =
        solve3(ata, atb).ok_or_else(|| Error::InvalidParameter("singular tail fit".into()))?;
    let (a, b, c) = (sol[0] * yscale, sol[1] * yscale, sol[2] * yscale);
    let residual = rows
        .iter()
        .map(|(row, y)| ((a * row[0] + b * row[1] + c * row[2]) - y).abs() / yscale)
        .fold(0.0, f64::max);
    if residual > max_residual {
        return Err(Error::FitResidual {
            residual,
            limit: max_residual,
        });
    }
    Ok(TailFit {
        c0: a,
        c1: b * x_lo / a,
        residual,
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for k in col..3 {
                m[r][k] -= f * m[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    Some(x)
}
