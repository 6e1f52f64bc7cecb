//! Bracketed root finding on monotone or merely continuous functions.

use super::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("no sign change on bracket [{a}, {b}] (f(a)={fa:e}, f(b)={fb:e})")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root finding did not converge to {tol:e} within {iters} iterations")]
    NoConvergence { tol: f64, iters: usize },
}

/// Bisection on a bracketing interval `[a, b]` with `f(a)·f(b) <= 0`,
/// refined until the bracket is narrower than `abs_tol`.
///
/// Returns the bracket midpoint. Exact zeros at an endpoint are returned
/// immediately.
pub fn bisect<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    abs_tol: T,
) -> Result<T, RootError> {
    let mut lo = a;
    let mut hi = b;
    let mut flo = f(lo);
    if flo == T::zero() {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(RootError::NoSignChange {
            a: lo.to_f64().unwrap_or(f64::NAN),
            b: hi.to_f64().unwrap_or(f64::NAN),
            fa: flo.to_f64().unwrap_or(f64::NAN),
            fb: fhi.to_f64().unwrap_or(f64::NAN),
        });
    }

    let max_iters = 200usize;
    for _ in 0..max_iters {
        let mid = lo + (hi - lo) * T::of(0.5);
        if mid <= lo || mid >= hi {
            // Bracket at floating-point resolution.
            return Ok(mid.max(lo).min(hi));
        }
        let fmid = f(mid);
        if fmid == T::zero() {
            return Ok(mid);
        }
        if (fmid > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if hi - lo < abs_tol {
            return Ok(lo + (hi - lo) * T::of(0.5));
        }
    }
    Err(RootError::NoConvergence {
        tol: abs_tol.to_f64().unwrap_or(f64::NAN),
        iters: max_iters,
    })
}

/// Scan `[a, b]` left to right in `step`-sized cells and return the first
/// bracketing cell of `f`, i.e. the leftmost cell with a sign change or an
/// exact zero at its left node.
pub fn first_bracket<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    step: T,
) -> Option<(T, T)> {
    let mut x0 = a;
    let mut f0 = f(x0);
    if f0 == T::zero() {
        return Some((x0, x0));
    }
    while x0 < b {
        let x1 = (x0 + step).min(b);
        let f1 = f(x1);
        if f1 == T::zero() || (f0 > T::zero()) != (f1 > T::zero()) {
            return Some((x0, x1));
        }
        if x1 >= b {
            break;
        }
        x0 = x1;
        f0 = f1;
    }
    None
}
