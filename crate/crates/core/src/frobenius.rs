//! Series solutions at the regular singular point `r = ∞` of
//! `u'' + P(r) u' + Q(r) u = 0` with `P = Σ_{k≥1} p_k r^{-k}` and
//! `Q = Σ_{k≥2} q_k r^{-k}`.
//!
//! The ansatz `u = r^α Σ_{n≥0} a_n r^{-n}`, `a_0 = 1`, gives at order
//! `r^{α-m-2}` the recurrence
//!
//! ```text
//! a_m I(α - m) = -Σ_{k≥2} p_k (α - m + k - 1) a_{m-k+1} - Σ_{k≥3} q_k a_{m-k+2}
//! ```
//!
//! with indicial polynomial `I(β) = β(β - 1) + p_1 β + q_2`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Truncated coefficient data of an ODE with a regular singular point at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinitySingularOde {
    /// `p_1, p_2, …`
    pub p_coeffs: Vec<f64>,
    /// `q_2, q_3, …`
    pub q_coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicialRoots {
    /// larger root
    pub alpha1: f64,
    pub alpha2: f64,
    /// the roots differ by a positive integer (up to `1e-9`)
    pub integer_gap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusSolution {
    pub root: f64,
    /// `a_1 … a_N`
    pub coefficients: Vec<f64>,
    /// a recurrence denominator vanishes at some index beyond the computed ones
    pub resonance_flag: bool,
}

impl InfinitySingularOde {
    pub fn new(p_coeffs: Vec<f64>, q_coeffs: Vec<f64>) -> Result<Self> {
        if p_coeffs.is_empty() || q_coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least p_1 and q_2 for the indicial equation".into(),
            ));
        }
        if p_coeffs.iter().chain(&q_coeffs).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite ODE coefficient".into()));
        }
        Ok(Self { p_coeffs, q_coeffs })
    }

    /// `p_k`, zero beyond the stored truncation.
    pub fn p(&self, k: usize) -> f64 {
        self.p_coeffs.get(k - 1).copied().unwrap_or(0.0)
    }

    /// `q_k` for `k ≥ 2`.
    pub fn q(&self, k: usize) -> f64 {
        self.q_coeffs.get(k - 2).copied().unwrap_or(0.0)
    }

    /// Highest `N` for which `a_1 … a_N` use only stored coefficients.
    pub fn truncation_order(&self) -> usize {
        (self.p_coeffs.len() - 1).min(self.q_coeffs.len() - 1)
    }

    pub fn indicial(&self, beta: f64) -> f64 {
        beta * (beta - 1.0) + self.p(1) * beta + self.q(2)
    }

    /// Data of `lead u'' + P u' + Q u = 0` with a constant leading coefficient.
    pub fn from_unnormalized(lead: f64, p_coeffs: &[f64], q_coeffs: &[f64]) -> Result<Self> {
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::InvalidParameter(
                "leading coefficient must be nonzero".into(),
            ));
        }
        Self::new(
            p_coeffs.iter().map(|c| c / lead).collect(),
            q_coeffs.iter().map(|c| c / lead).collect(),
        )
    }
}

/// Roots of `α(α - 1) + p_1 α + q_2 = 0`, larger first.
pub fn indicial_roots(ode: &InfinitySingularOde) -> Result<IndicialRoots> {
    let b = ode.p(1) - 1.0;
    let c = ode.q(2);
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        return Err(Error::ComplexRoots { discriminant: disc });
    }
    let sq = disc.sqrt();
    // numerically stable quadratic
    let qq = -0.5 * (b + b.signum() * sq + if b == 0.0 { sq } else { 0.0 });
    let (r1, r2) = if qq == 0.0 { (0.0, 0.0) } else { (qq, c / qq) };
    let (alpha1, alpha2) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    let gap = alpha1 - alpha2;
    let integer_gap = gap > 0.5 && (gap - gap.round()).abs() < 1e-9;
    Ok(IndicialRoots {
        alpha1,
        alpha2,
        integer_gap,
    })
}

/// Coefficients `a_1 … a_n` of the series at `root`.
///
/// Fails with [`Error::Resonance`] if a recurrence denominator vanishes at an
/// index `≤ n`; log-term solutions are not constructed.
pub fn series_coefficients(
    ode: &InfinitySingularOde,
    root: f64,
    n: usize,
) -> Result<FrobeniusSolution> {
    if n > ode.truncation_order() {
        return Err(Error::InvalidParameter(format!(
            "requested {n} coefficients but the ODE is truncated at order {}",
            ode.truncation_order()
        )));
    }
    let scale = 1.0 + root.abs().powi(2) + ode.p(1).abs() + ode.q(2).abs();
    if ode.indicial(root).abs() > 1e-8 * scale {
        return Err(Error::InvalidParameter(format!(
            "{root} is not an indicial root"
        )));
    }
    let roots = indicial_roots(ode)?;
    let other = if (roots.alpha1 - root).abs() <= (roots.alpha2 - root).abs() {
        roots.alpha2
    } else {
        roots.alpha1
    };
    let gap = root - other;
    let resonance_flag = gap > 0.5 && (gap - gap.round()).abs() < 1e-9;

    let mut a = vec![1.0];
    for m in 1..=n {
        let den = ode.indicial(root - m as f64);
        if den.abs() < 1e-12 * scale * (m * m) as f64 {
            return Err(Error::Resonance { index: m });
        }
        let mut rhs = 0.0;
        for k in 2..=m + 1 {
            rhs -= ode.p(k) * (root - m as f64 + k as f64 - 1.0) * a[m + 1 - k];
        }
        for k in 3..=m + 2 {
            rhs -= ode.q(k) * a[m + 2 - k];
        }
        a.push(rhs / den);
    }
    Ok(FrobeniusSolution {
        root,
        coefficients: a[1..].to_vec(),
        resonance_flag,
    })
}

impl FrobeniusSolution {
    /// `(u, u')` of the truncated series at `r`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let x = 1.0 / r;
        let mut s = 1.0;
        let mut ds = 0.0;
        let mut xk = 1.0;
        for (k, c) in self.coefficients.iter().enumerate() {
            let k = (k + 1) as f64;
            xk *= x;
            s += c * xk;
            ds += -k * c * xk / r;
        }
        let pw = r.powf(self.root);
        (pw * s, pw * (self.root / r * s + ds))
    }

    /// `(u, u', u'')` of the truncated series at `r`.
    pub fn eval2(&self, r: f64) -> (f64, f64, f64) {
        let mut v = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        let terms = std::iter::once(1.0).chain(self.coefficients.iter().copied());
        for (k, c) in terms.enumerate() {
            let e = self.root - k as f64;
            let pw = r.powf(e);
            v += c * pw;
            d1 += c * e * pw / r;
            d2 += c * e * (e - 1.0) * pw / (r * r);
        }
        (v, d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coefficients of the radial p-Laplace equation on mass-2 Schwarzschild,
    /// `u'' + (2/r - 2(3-p)/(r²(1+1/r)))/(p-1) u' = 0`.
    fn radial_equation(p: f64, order: usize) -> InfinitySingularOde {
        let mut pc = vec![2.0 / (p - 1.0)];
        // -2(3-p)/(p-1) · x² Σ (-x)^j
        for j in 0..=order {
            pc.push(-2.0 * (3.0 - p) / (p - 1.0) * (-1.0f64).powi(j as i32));
        }
        InfinitySingularOde::new(pc, vec![0.0; order + 2]).unwrap()
    }

    #[test]
    fn radial_roots_at_three_halves() {
        let r = indicial_roots(&radial_equation(1.5, 4)).unwrap();
        assert!((r.alpha1 - 0.0).abs() < 1e-14);
        assert!((r.alpha2 + 3.0).abs() < 1e-14);
        assert!(r.integer_gap);
    }

    #[test]
    fn trivial_equation_roots() {
        let ode = InfinitySingularOde::new(vec![0.0], vec![0.0]).unwrap();
        let r = indicial_roots(&ode).unwrap();
        assert_eq!((r.alpha1, r.alpha2), (1.0, 0.0));
    }

    #[test]
    fn decaying_radial_coefficient() {
        let p = 1.5;
        let s = series_coefficients(&radial_equation(p, 4), -3.0, 3).unwrap();
        assert!((s.coefficients[0] + 4.5).abs() < 1e-13);
        let b1 = -(3.0 - p) * (3.0 - p) / (p - 1.0);
        for p in [1.2, 1.37, 1.8] {
            let ode = radial_equation(p, 4);
            let alpha = -(3.0 - p) / (p - 1.0);
            let s = series_coefficients(&ode, alpha, 2).unwrap();
            let b1p = -(3.0 - p) * (3.0 - p) / (p - 1.0);
            assert!((s.coefficients[0] - b1p).abs() < 1e-12 * b1p.abs());
        }
        assert!(b1 < 0.0);
    }

    #[test]
    fn constant_root_has_zero_coefficients() {
        let s = series_coefficients(&radial_equation(1.3, 4), 0.0, 4).unwrap();
        assert!(s.coefficients.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn resonance_is_reported() {
        // x² u'' ... with roots 0 and 2 at infinity: u'' - (1/r) u' ... choose p1 = -1, q2 = 0
        // I(β) = β(β-2): roots 2, 0; smaller root resonates at index -2 never, larger at 2? No:
        // for root 0, I(0 - m) = m(m+2) ≠ 0; for root 2, I(2 - 2) = 0.
        let ode = InfinitySingularOde::new(vec![-1.0, 1.0, 0.5], vec![0.0, 1.0, 0.0]).unwrap();
        let roots = indicial_roots(&ode).unwrap();
        assert_eq!(roots.alpha1, 2.0);
        assert!(roots.integer_gap);
        let err = series_coefficients(&ode, 2.0, 2).unwrap_err();
        assert_eq!(err, Error::Resonance { index: 2 });
        let ok = series_coefficients(&ode, 0.0, 1).unwrap();
        assert!(!ok.resonance_flag);
    }

    #[test]
    fn residual_decays_at_predicted_order() {
        // u'' + (2/r - 2(3-p)/(r+r²))/(p-1) u' evaluated exactly
        let p = 1.37;
        let n = 3;
        let ode = radial_equation(p, 6);
        let alpha = indicial_roots(&ode).unwrap().alpha2;
        let s = series_coefficients(&ode, alpha, n).unwrap();
        let residual = |r: f64| {
            let (_, d1, d2) = s.eval2(r);
            let pp = (2.0 / r - 2.0 * (3.0 - p) / (r + r * r)) / (p - 1.0);
            (d2 + pp * d1).abs()
        };
        let order = alpha - n as f64 - 2.0;
        for (r1, r2) in [(1e2, 1e3), (1e3, 1e4)] {
            let ratio = residual(r2) / residual(r1);
            let predicted = (r2 / r1).powf(order - 1.0);
            assert!(
                ratio / predicted < 2.0 && ratio / predicted > 0.5,
                "ratio {ratio}, predicted {predicted}"
            );
        }
    }

    #[test]
    fn roots_invariant_under_rescaling() {
        let ode = radial_equation(1.6, 3);
        let a = indicial_roots(&ode).unwrap();
        for s in [-3.7, 0.25, 1e3] {
            let p: Vec<f64> = ode.p_coeffs.iter().map(|c| c * s).collect();
            let q: Vec<f64> = ode.q_coeffs.iter().map(|c| c * s).collect();
            let b = indicial_roots(&InfinitySingularOde::from_unnormalized(s, &p, &q).unwrap())
                .unwrap();
            assert!((a.alpha1 - b.alpha1).abs() < 1e-14 && (a.alpha2 - b.alpha2).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_roots_rejected() {
        let ode = InfinitySingularOde::new(vec![1.0], vec![1.0]).unwrap();
        assert!(matches!(
            indicial_roots(&ode),
            Err(Error::ComplexRoots { .. })
        ));
    }
}
