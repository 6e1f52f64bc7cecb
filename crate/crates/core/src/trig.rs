//! The twelve elementary functions, their interval means in closed form,
//! and the exact sinc-atom decomposition of each mean.
//!
//! Functions 1..=9 are integrands on `[pi L, pi L + U]`:
//! `sin^2, cos^2, sin^4, cos^4, sin^6, cos^6, cos 2t, cos 4t, cos 6t`.
//! Functions 10..=12 are the sinc atoms `sin(2U)/2U, sin(4U)/4U,
//! sin(6U)/6U` on widths `U in (0, pi/12)`.

use crate::num::Real;
use crate::Rat;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrigError {
    #[error("function index {0} outside 1..=12")]
    IndexOutOfRange(u32),
    #[error("integrand index {0} outside 1..=9")]
    IntegrandOutOfRange(u32),
    #[error("width U = {0} outside (0, pi/12)")]
    WidthOutOfRange(f64),
}

/// Which of the two families of (2.1)/(2.2) a function index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionKind {
    /// `f_1..f_9`: integrands evaluated at points `t`.
    Integrand,
    /// `f_10..f_12`: sinc atoms evaluated at widths `U`.
    SincAtom,
}

/// One of the twelve elementary functions, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryFunction {
    pub index: u32,
    pub kind: FunctionKind,
}

impl ElementaryFunction {
    pub fn new(index: u32) -> Result<Self, TrigError> {
        match index {
            1..=9 => Ok(Self {
                index,
                kind: FunctionKind::Integrand,
            }),
            10..=12 => Ok(Self {
                index,
                kind: FunctionKind::SincAtom,
            }),
            other => Err(TrigError::IndexOutOfRange(other)),
        }
    }
}

/// `sin(x)/x`, extended by continuity at the removable singularity.
pub fn sinc<T: Real>(x: T) -> T {
    if x == T::zero() {
        T::one()
    } else {
        x.sin() / x
    }
}

/// Upper limit of admissible widths: pi/12.
pub fn max_width<T: Real>() -> T {
    T::PI() / T::of(12.0)
}

fn check_width<T: Real>(u: T) -> Result<(), TrigError> {
    if u > T::zero() && u < max_width() {
        Ok(())
    } else {
        Err(TrigError::WidthOutOfRange(u.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Evaluate `f_l`. For `l <= 9` the argument is a point `t`; for
/// `l >= 10` it is a width `U` and must lie in `(0, pi/12)`.
pub fn eval_f<T: Real>(l: u32, x: T) -> Result<T, TrigError> {
    let two = T::of(2.0);
    let value = match l {
        1 => x.sin().powi(2),
        2 => x.cos().powi(2),
        3 => x.sin().powi(4),
        4 => x.cos().powi(4),
        5 => x.sin().powi(6),
        6 => x.cos().powi(6),
        7 => (two * x).cos(),
        8 => (T::of(4.0) * x).cos(),
        9 => (T::of(6.0) * x).cos(),
        10 => {
            check_width(x)?;
            sinc(two * x)
        }
        11 => {
            check_width(x)?;
            sinc(T::of(4.0) * x)
        }
        12 => {
            check_width(x)?;
            sinc(T::of(6.0) * x)
        }
        other => return Err(TrigError::IndexOutOfRange(other)),
    };
    Ok(value)
}

/// Exact rational coefficients of one interval mean in the sinc basis:
/// `mean(l, U) = c0 + c2 sinc(2U) + c4 sinc(4U) + c6 sinc(6U)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SincDecomposition {
    pub l: u32,
    pub c0: Rat,
    pub c2: Rat,
    pub c4: Rat,
    pub c6: Rat,
}

impl SincDecomposition {
    /// Coefficients as a fixed array `[c0, c2, c4, c6]`.
    pub fn coefficients(&self) -> [Rat; 4] {
        [
            self.c0.clone(),
            self.c2.clone(),
            self.c4.clone(),
            self.c6.clone(),
        ]
    }

    /// Sum of the absolute coefficient values, the graft-error
    /// amplification factor of the corresponding equation.
    pub fn abs_coefficient_sum(&self) -> Rat {
        self.c2.abs() + self.c4.abs() + self.c6.abs()
    }
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// The exact sinc decomposition of `mean(l, U)` for `l in 1..=9`.
///
/// These are frozen rationals; substituting the sinc atoms reproduces
/// the closed-form means identically.
pub fn sinc_decomposition(l: u32) -> Result<SincDecomposition, TrigError> {
    let (c0, c2, c4, c6) = match l {
        1 => (rat(1, 2), rat(-1, 2), Rat::zero(), Rat::zero()),
        2 => (rat(1, 2), rat(1, 2), Rat::zero(), Rat::zero()),
        3 => (rat(3, 8), rat(-1, 2), rat(1, 8), Rat::zero()),
        4 => (rat(3, 8), rat(1, 2), rat(1, 8), Rat::zero()),
        5 => (rat(5, 16), rat(-15, 32), rat(3, 16), rat(-1, 32)),
        6 => (rat(5, 16), rat(15, 32), rat(3, 16), rat(1, 32)),
        7 => (Rat::zero(), Rat::one(), Rat::zero(), Rat::zero()),
        8 => (Rat::zero(), Rat::zero(), Rat::one(), Rat::zero()),
        9 => (Rat::zero(), Rat::zero(), Rat::zero(), Rat::one()),
        other => return Err(TrigError::IntegrandOutOfRange(other)),
    };
    Ok(SincDecomposition { l, c0, c2, c4, c6 })
}

pub(crate) fn rat_to_real<T: Real>(r: &Rat) -> T {
    let n = T::of(
        r.numer()
            .to_string()
            .parse::<f64>()
            .expect("small rational numerator"),
    );
    let d = T::of(
        r.denom()
            .to_string()
            .parse::<f64>()
            .expect("small rational denominator"),
    );
    n / d
}

/// Closed-form interval mean `(1/U) \int_{pi L}^{pi L + U} f_l(t) dt`.
///
/// Independent of `L`: every integrand has period dividing `pi`, and
/// `pi L` is a whole number of periods.
///
/// Evaluated through the exact power series of the sinc combination
/// rather than the combination itself: for the odd-power sines the sinc
/// atoms cancel to `O(U^4)` or `O(U^6)`, and summing them in floating
/// point would lose up to seven digits near the left edge of the width
/// domain. The series coefficients are exact rationals, so the leading
/// cancellations happen symbolically and every term adds information.
pub fn mean_value_closed_form<T: Real>(l: u32, u: T) -> Result<T, TrigError> {
    if !(1..=9).contains(&l) {
        return Err(TrigError::IntegrandOutOfRange(l));
    }
    check_width(u)?;
    let d = sinc_decomposition(l)?;
    let coeffs = mean_series_coefficients(&d);
    let u_sq = u * u;
    let mut u_pow = T::one();
    let mut acc = T::zero();
    for q in &coeffs {
        acc += rat_to_real::<T>(q) * u_pow;
        u_pow *= u_sq;
    }
    Ok(acc)
}

/// Terms of `mean(l, U) = Σ_m q_m U^{2m}`: with atoms `sinc(2aU)` and
/// coefficients `A_a`, `q_m = (-4)^m / (2m+1)! · Σ_a A_a a^{2m}`.
///
/// Sixteen terms leave the truncation error below 1e-18 over the whole
/// admissible width range `(0, pi/12)`.
fn mean_series_coefficients(d: &SincDecomposition) -> Vec<Rat> {
    use num_bigint::BigInt;
    let atoms: [(&Rat, u32); 3] = [(&d.c2, 1), (&d.c4, 2), (&d.c6, 3)];
    let mut out = Vec::with_capacity(16);
    let mut factorial = BigInt::from(1); // (2m+1)!
    let mut four_pow = BigInt::from(1); // 4^m
    for m in 0u32..16 {
        if m > 0 {
            factorial *= BigInt::from(2 * m) * BigInt::from(2 * m + 1);
            four_pow *= BigInt::from(4);
        }
        let mut s = if m == 0 { d.c0.clone() } else { Rat::zero() };
        for (a_coeff, a) in &atoms {
            s += (*a_coeff).clone() * Rat::from_integer(BigInt::from(*a).pow(2 * m));
        }
        let sign = BigInt::from(if m % 2 == 0 { 1 } else { -1 });
        out.push(s * Rat::new(sign * four_pow.clone(), factorial.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::quad;

    #[test]
    fn function_kinds_partition_by_index() {
        for l in 1..=9 {
            assert_eq!(
                ElementaryFunction::new(l).unwrap().kind,
                FunctionKind::Integrand
            );
        }
        for l in 10..=12 {
            assert_eq!(
                ElementaryFunction::new(l).unwrap().kind,
                FunctionKind::SincAtom
            );
        }
        assert!(ElementaryFunction::new(0).is_err());
        assert!(ElementaryFunction::new(13).is_err());
    }

    #[test]
    fn eval_f_spot_values() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert!((eval_f(1, half_pi).unwrap() - 1.0).abs() < 1e-15);
        assert!(eval_f(7, std::f64::consts::FRAC_PI_4).unwrap().abs() < 1e-15);
        // sinc limit as U -> 0+.
        assert!((eval_f(10, 1e-9).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sinc_atoms_live_in_unit_interval() {
        for l in 10..=12 {
            for u in [1e-6, 0.05, 0.15, 0.26] {
                let v = eval_f(l, u).unwrap();
                assert!(v > 0.0 && v < 1.0, "f_{l}({u}) = {v}");
            }
        }
    }

    #[test]
    fn sinc_atom_width_domain_enforced() {
        assert!(matches!(
            eval_f(10, 0.3),
            Err(TrigError::WidthOutOfRange(_))
        ));
        assert!(matches!(
            eval_f(11, 0.0),
            Err(TrigError::WidthOutOfRange(_))
        ));
        assert!(eval_f(9, 0.3).is_ok(), "integrands take any t");
    }

    #[test]
    fn decomposition_rationals_are_exact() {
        let d6 = sinc_decomposition(6).unwrap();
        assert_eq!(
            d6.coefficients(),
            [rat(5, 16), rat(15, 32), rat(3, 16), rat(1, 32)]
        );
        let d3 = sinc_decomposition(3).unwrap();
        assert_eq!(
            d3.coefficients(),
            [rat(3, 8), rat(-1, 2), rat(1, 8), Rat::zero()]
        );
        let d9 = sinc_decomposition(9).unwrap();
        assert_eq!(
            d9.coefficients(),
            [Rat::zero(), Rat::zero(), Rat::zero(), Rat::one()]
        );
    }

    #[test]
    fn decomposition_coefficients_sum_to_function_at_zero() {
        // As U -> 0 every sinc atom tends to 1, so the coefficient sum
        // must equal f_l(0).
        for l in 1..=9 {
            let d = sinc_decomposition(l).unwrap();
            let sum = d.c0 + d.c2 + d.c4 + d.c6;
            let f0 = eval_f(l, 0.0f64).unwrap();
            assert_eq!(rat_to_real::<f64>(&sum), f0, "l = {l}");
        }
    }

    #[test]
    fn closed_form_mean_for_cos_2t_is_the_sinc() {
        for u in [0.01f64, 0.1, 0.2, 0.25] {
            let m = mean_value_closed_form(7, u).unwrap();
            assert!((m - (2.0 * u).sin() / (2.0 * u)).abs() < 1e-16);
        }
    }

    #[test]
    fn closed_form_mean_vanishes_with_width_for_sin_squared() {
        let m = mean_value_closed_form(1, 1e-7).unwrap();
        assert!(m.abs() < 1e-13);
    }

    #[test]
    fn closed_forms_match_quadrature_independent_of_l() {
        // Oracle: adaptive quadrature of the integrand over
        // [pi L, pi L + U], for two different L.
        for l in 1..=9u32 {
            for big_l in [7i64, 1592] {
                let u = if l == 5 { max_width::<f64>() * 0.999 } else { 0.17 };
                let a = std::f64::consts::PI * big_l as f64;
                let q =
                    quad::integrate(|t: f64| eval_f(l, t).unwrap(), a, a + u, 1e-13).unwrap() / u;
                let m = mean_value_closed_form(l, u).unwrap();
                assert!(
                    (q - m).abs() <= 1e-12 * m.abs().max(1.0),
                    "l={l}, L={big_l}: quadrature {q} vs closed form {m}"
                );
            }
        }
    }

    #[test]
    fn pythagorean_mean_identity_exact() {
        for u in [0.001, 0.07, 0.19, 0.26] {
            let m1 = mean_value_closed_form(1, u).unwrap();
            let m2 = mean_value_closed_form(2, u).unwrap();
            assert!((m1 + m2 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn fourth_power_sum_identity() {
        for u in [0.02, 0.11, 0.23] {
            let lhs = mean_value_closed_form(3, u).unwrap() + mean_value_closed_form(4, u).unwrap();
            let rhs = 0.75 + 0.25 * sinc(4.0 * u);
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn sixth_power_sum_identity() {
        for u in [0.02, 0.11, 0.23] {
            let lhs = mean_value_closed_form(5, u).unwrap() + mean_value_closed_form(6, u).unwrap();
            let rhs = 0.625 + 0.375 * sinc(4.0 * u);
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_power_linear_identity() {
        // 2 (mean5 + mean6) + 1 = 3 (mean3 + mean4) for every U.
        for i in 1..=50 {
            let u = max_width::<f64>() * i as f64 / 51.0;
            let lhs = 2.0
                * (mean_value_closed_form(5, u).unwrap() + mean_value_closed_form(6, u).unwrap())
                + 1.0;
            let rhs = 3.0
                * (mean_value_closed_form(3, u).unwrap() + mean_value_closed_form(4, u).unwrap());
            assert!((lhs - rhs).abs() < 1e-14, "U = {u}");
        }
    }
}
