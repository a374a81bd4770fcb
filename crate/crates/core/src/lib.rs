//! Numerical realization of the monotone quantities `Q_*` and `Q^*` along the
//! level sets of p-harmonic potentials, and certification of the sharp
//! p-Penrose inequality `m_ADM >= 2 (C_p / K_p)^(1/(3-p))` on rotationally
//! symmetric asymptotically flat 3-manifolds.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: dense-output Runge–Kutta, semi-infinite quadrature,
//!   power-law tail fits, truncated power series.
//! * [`frobenius`]: series solutions at the regular singular point `r = ∞`.
//! * [`schwarzschild`]: the mass-2 reference model in isotropic coordinates.
//! * [`coefficients`]: the decaying and growing coefficient triples `(f, g, h)`.
//! * [`warped`]: metrics `ds² + φ(s)² g₀`, their potentials and level-set data.
//! * [`verify`]: evaluation of `Q`, monotonicity certificates, limits and the
//!   Penrose margin.
//! * [`cli`]: configuration, reports and the subcommands behind the `plevel` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod frobenius;
pub mod numerics;
pub mod schwarzschild;
pub mod verify;
pub mod warped;

pub use error::{Error, Result};
pub use numerics::Tolerances;

/// Version string embedded in every report the CLI writes.
pub const VERSION: &str = concat!("plevel ", env!("CARGO_PKG_VERSION"));

/// Checks `1 < p < 2`.
pub fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 && p < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "p = {p} is outside (1, 2)"
        )))
    }
}
