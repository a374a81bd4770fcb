//! Truncated power series `Σ_{k<n} c_k x^k` with exact coefficient arithmetic
//! in `f64`.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn zero(n: usize) -> Self {
        Series(vec![0.0; n])
    }

    pub fn constant(c: f64, n: usize) -> Self {
        let mut v = vec![0.0; n];
        v[0] = c;
        Series(v)
    }

    /// The monomial `x`.
    pub fn x(n: usize) -> Self {
        let mut v = vec![0.0; n];
        if n > 1 {
            v[1] = 1.0;
        }
        Series(v)
    }

    /// `(1 + x)^a`.
    pub fn binomial(a: f64, n: usize) -> Self {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        for k in 1..n {
            v[k] = v[k - 1] * (a - (k - 1) as f64) / k as f64;
        }
        Series(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Series(self.0.iter().map(|c| c * s).collect())
    }

    /// Multiplication by `x^k` (truncating).
    pub fn shift(&self, k: usize) -> Self {
        let n = self.len();
        let mut v = vec![0.0; n];
        if k < n {
            v[k..].copy_from_slice(&self.0[..n - k]);
        }
        Series(v)
    }

    /// Division by `x^k`; the first `k` coefficients must vanish.
    pub fn unshift(&self, k: usize) -> Self {
        debug_assert!(self.0.iter().take(k).all(|c| *c == 0.0));
        let n = self.len();
        let mut v = vec![0.0; n];
        if k < n {
            v[..n - k].copy_from_slice(&self.0[k..]);
        }
        Series(v)
    }

    /// `d/dx`; the top coefficient is lost.
    pub fn deriv(&self) -> Self {
        let n = self.len();
        let mut v = vec![0.0; n];
        for k in 1..n {
            v[k - 1] = k as f64 * self.0[k];
        }
        Series(v)
    }

    pub fn recip(&self) -> Self {
        let n = self.len();
        let a0 = self.0[0];
        assert!(a0 != 0.0, "reciprocal of a series with zero constant term");
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.0[j] * b[k - j]).sum();
            b[k] = -s / a0;
        }
        Series(b)
    }

    pub fn div(&self, other: &Series) -> Self {
        self * &other.recip()
    }

    /// `self^a` for a series with positive constant term.
    pub fn powf(&self, a: f64) -> Self {
        let n = self.len();
        let a0 = self.0[0];
        assert!(a0 > 0.0, "powf of a series with non-positive constant term");
        let mut b = vec![0.0; n];
        b[0] = a0.powf(a);
        for k in 1..n {
            let s: f64 = (1..=k)
                .map(|j| (a * j as f64 - (k - j) as f64) * self.0[j] * b[k - j])
                .sum();
            b[k] = s / (k as f64 * a0);
        }
        Series(b)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series((0..n).map(|k| self.0[k] + o.0[k]).collect())
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series((0..n).map(|k| self.0[k] - o.0[k]).collect())
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        let n = self.len().min(o.len());
        Series(
            (0..n)
                .map(|k| (0..=k).map(|j| self.0[j] * o.0[k - j]).sum())
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_matches_direct() {
        let s = Series::binomial(-2.5, 30);
        let x = 0.2;
        assert!((s.eval(x) - (1.0 + x).powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn recip_and_pow() {
        let s = Series(vec![
            2.0, 1.0, -0.5, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ]);
        let one = &s * &s.recip();
        assert!((one.0[0] - 1.0).abs() < 1e-15);
        assert!(one.0[1..].iter().all(|c| c.abs() < 1e-14));
        let sq = s.powf(0.5);
        let back = &sq * &sq;
        for k in 0..s.len() {
            assert!((back.0[k] - s.0[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_binomial() {
        // d/dx (1+x)^3 = 3 (1+x)^2
        let d = Series::binomial(3.0, 6).deriv();
        assert_eq!(&d.0[..3], &[3.0, 6.0, 3.0]);
    }
}
