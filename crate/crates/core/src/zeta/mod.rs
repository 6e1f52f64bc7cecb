//! Riemann zeta evaluation off the critical line, Hardy's `Z(t)` on it,
//! and the normalized square `Z̃²(t) = Z(t)² / ln t`.
//!
//! Two evaluation schemes back the public operations: an Euler–Maclaurin
//! series for arbitrary points in the strip (exact but `O(t)` per call)
//! and a Riemann–Siegel main sum with four correction terms for bulk
//! critical-line work (`O(sqrt t)` per call). They cross-check each other
//! in the test suite.

mod euler_maclaurin;
mod riemann_siegel;

pub use euler_maclaurin::zeta_euler_maclaurin;
pub use riemann_siegel::{hardy_z_riemann_siegel, theta};

use crate::num::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Height above which `hardy_z` switches from the rotated Euler–Maclaurin
/// evaluation to the Riemann–Siegel formula. At this height the four-term
/// Riemann–Siegel remainder is already below 3e-11.
pub const RS_CROSSOVER_T: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum ZetaError {
    #[error("zeta has a pole at s = 1")]
    PoleAtOne,
    #[error("Re(s) = {sigma} is outside the supported half-plane Re(s) > 0")]
    UnsupportedRegion { sigma: f64 },
    #[error("t = {t} is below the configured cutoff t_min = {t_min}")]
    BelowCutoff { t: f64, t_min: f64 },
    #[error("t = {t} does not satisfy t > e, ln t <= 1 undermines the normalization")]
    LogTooSmall { t: f64 },
    #[error(
        "requested precision 1e-{digits} unattainable: estimated relative error {estimate:e} at this height with the active scalar type"
    )]
    PrecisionUnattainable { digits: u32, estimate: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Evaluation configuration shared across the pipeline.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EvalConfig<T: Real> {
    /// Requested working precision in decimal digits (>= 15).
    pub working_precision: u32,
    /// Lower cutoff for critical-line work, in units of t. Must exceed e.
    pub t_min: T,
    /// Relative tolerance for adaptive quadrature.
    pub quadrature_rel_tol: T,
    /// Absolute tolerance, in units of t, for bracketed root finding.
    pub rootfind_abs_tol: T,
}

impl<T: Real> EvalConfig<T> {
    pub fn new(
        working_precision: u32,
        t_min: T,
        quadrature_rel_tol: T,
        rootfind_abs_tol: T,
    ) -> Result<Self, ZetaError> {
        if working_precision < 15 {
            return Err(ZetaError::InvalidConfig(format!(
                "working_precision {working_precision} < 15"
            )));
        }
        if !(t_min > T::E()) {
            return Err(ZetaError::InvalidConfig(format!(
                "t_min {t_min} must exceed e"
            )));
        }
        if !(quadrature_rel_tol > T::zero()) || !(rootfind_abs_tol > T::zero()) {
            return Err(ZetaError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        Ok(Self {
            working_precision,
            t_min,
            quadrature_rel_tol,
            rootfind_abs_tol,
        })
    }

    /// Target relative error 10^(2 - working_precision) of the zeta
    /// evaluation contract.
    pub fn zeta_rel_error(&self) -> T {
        T::of(10.0).powi(2 - self.working_precision as i32)
    }
}

impl Default for EvalConfig<f64> {
    fn default() -> Self {
        Self {
            working_precision: 15,
            t_min: 100.0,
            quadrature_rel_tol: 1e-9,
            rootfind_abs_tol: 1e-12,
        }
    }
}

/// One critical-line sample: Hardy `Z(t)` and its normalized square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CriticalSample<T: Real> {
    pub t: T,
    pub z: T,
    pub z_tilde_sq: T,
}

/// Riemann zeta at `s` for Re(s) > 0, `s != 1`.
pub fn zeta<T: Real>(s: Complex<T>, cfg: &EvalConfig<T>) -> Result<Complex<T>, ZetaError> {
    if s.im == T::zero() && s.re == T::one() {
        return Err(ZetaError::PoleAtOne);
    }
    if !(s.re > T::zero()) {
        return Err(ZetaError::UnsupportedRegion {
            sigma: s.re.to_f64().unwrap_or(f64::NAN),
        });
    }
    let (value, rel_err_estimate) = zeta_euler_maclaurin(s);
    if rel_err_estimate > cfg.zeta_rel_error() {
        return Err(ZetaError::PrecisionUnattainable {
            digits: cfg.working_precision,
            estimate: rel_err_estimate.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(value)
}

/// Hardy's `Z(t)`: real, with `|Z(t)| = |zeta(1/2 + it)|` and sign given by
/// the Riemann–Siegel theta rotation.
pub fn hardy_z<T: Real>(t: T, cfg: &EvalConfig<T>) -> Result<T, ZetaError> {
    if !(t >= cfg.t_min) {
        return Err(ZetaError::BelowCutoff {
            t: t.to_f64().unwrap_or(f64::NAN),
            t_min: cfg.t_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(hardy_z_unchecked(t, cfg))
}

/// `Z(t)` without the `t_min` gate; used internally where the caller has
/// already validated the range.
pub(crate) fn hardy_z_unchecked<T: Real>(t: T, _cfg: &EvalConfig<T>) -> T {
    if t.to_f64().unwrap_or(f64::INFINITY) >= RS_CROSSOVER_T {
        hardy_z_riemann_siegel(t)
    } else {
        // Rotate the Euler-Maclaurin value onto the real axis.
        let half = T::of(0.5);
        let (z, _) = zeta_euler_maclaurin(Complex::new(half, t));
        let th = theta(t);
        let rot = Complex::new(th.cos(), th.sin());
        (rot * z).re
    }
}

/// `Z̃²(t) = Z(t)² / ln t`, the ladder weight.
pub fn z_tilde_sq<T: Real>(t: T, cfg: &EvalConfig<T>) -> Result<T, ZetaError> {
    if !(t > T::E()) {
        return Err(ZetaError::LogTooSmall {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    let z = hardy_z(t, cfg)?;
    Ok(z * z / t.ln())
}

pub(crate) fn z_tilde_sq_unchecked<T: Real>(t: T, cfg: &EvalConfig<T>) -> T {
    let z = hardy_z_unchecked(t, cfg);
    z * z / t.ln()
}

/// Evaluate `t`, `Z(t)` and `Z̃²(t)` together.
pub fn critical_sample<T: Real>(
    t: T,
    cfg: &EvalConfig<T>,
) -> Result<CriticalSample<T>, ZetaError> {
    let z = hardy_z(t, cfg)?;
    if !(t > T::E()) {
        return Err(ZetaError::LogTooSmall {
            t: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(CriticalSample {
        t,
        z,
        z_tilde_sq: z * z / t.ln(),
    })
}
