//! Disjoint strips in the critical strip, admissible width sets, and graft
//! points: points `w` with `|zeta(w)|` equal to a prescribed target.
//!
//! Graft existence for any nonzero target is classical but comes with no
//! effective height bound, so the searches here scan modulus level sets
//! over explicit windows and report not-found with guidance instead of
//! looping forever.

use crate::num::roots::bisect;
use crate::num::Real;
use crate::trig::eval_f;
use crate::zeta::zeta_euler_maclaurin;
use crate::{factorization::FactorizationCertificate, Rat};
use num_complex::Complex;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of strips.
pub const STRIP_COUNT: u32 = 12;

/// Default modulus tolerance for an accepted graft.
pub const DEFAULT_GRAFT_TOL: f64 = 1e-9;

/// Scan step, in t, for bracketing level crossings.
const SCAN_STEP: f64 = 0.25;

#[derive(Debug, Error)]
pub enum GraftError {
    #[error("strip configuration infeasible: need (sigma2 - sigma1)/13 > 2 delta; maximal feasible delta = {max_feasible_delta}")]
    StripConfig { max_feasible_delta: f64 },
    #[error("sigma bounds ({sigma1}, {sigma2}) must satisfy 1/2 < sigma1 < sigma2 < 1")]
    SigmaBounds { sigma1: f64, sigma2: f64 },
    #[error("graft target must be nonzero")]
    ZeroTarget,
    #[error("graft target {0} outside (0, 1)")]
    TargetOutOfRange(f64),
    #[error("degenerate target: value {0} coincides with 0 or 1")]
    DegenerateTarget(f64),
    #[error("no |zeta| = {target} crossing found in strip {strip} for t in ({t_lo}, {t_hi}); enlarge the window and retry")]
    NotFound {
        strip: u32,
        target: f64,
        t_lo: f64,
        t_hi: f64,
    },
    #[error("no certificate for (l = {l}, n = {n}) available to derive the target")]
    MissingCertificate { l: u32, n: usize },
    #[error("width index n = {n} outside 1..={len}")]
    BadWidthIndex { n: usize, len: usize },
    #[error("invalid window ({t_lo}, {t_hi})")]
    BadWindow { t_lo: f64, t_hi: f64 },
}

/// One vertical strip `(sigma0 - delta, sigma0 + delta) x (0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Strip<T: Real> {
    pub l: u32,
    pub sigma0: T,
    pub delta: T,
}

impl<T: Real> Strip<T> {
    pub fn sigma_lo(&self) -> T {
        self.sigma0 - self.delta
    }

    pub fn sigma_hi(&self) -> T {
        self.sigma0 + self.delta
    }

    pub fn contains(&self, w: Complex<T>) -> bool {
        w.re > self.sigma_lo() && w.re < self.sigma_hi() && w.im > T::zero()
    }

    pub fn disjoint_from(&self, other: &Strip<T>) -> bool {
        self.sigma_hi() <= other.sigma_lo() || other.sigma_hi() <= self.sigma_lo()
    }
}

/// Twelve equally spaced disjoint strips between `sigma1` and `sigma2`.
///
/// Centers at `sigma1 + l (sigma2 - sigma1)/13`; all separation
/// inequalities are strict by the feasibility check.
pub fn build_strips<T: Real>(
    sigma1: T,
    sigma2: T,
    delta: T,
) -> Result<Vec<Strip<T>>, GraftError> {
    let half = T::of(0.5);
    if !(sigma1 > half && sigma2 > sigma1 && sigma2 < T::one()) {
        return Err(GraftError::SigmaBounds {
            sigma1: sigma1.to_f64().unwrap_or(f64::NAN),
            sigma2: sigma2.to_f64().unwrap_or(f64::NAN),
        });
    }
    let step = (sigma2 - sigma1) / T::of(13.0);
    if !(delta > T::zero() && step > delta + delta) {
        return Err(GraftError::StripConfig {
            max_feasible_delta: (step / T::of(2.0)).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((1..=STRIP_COUNT)
        .map(|l| Strip {
            l,
            sigma0: sigma1 + step * T::of(l as f64),
            delta,
        })
        .collect())
}

/// A validated finite increasing width set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleUSet {
    values: Vec<Rat>,
}

/// One named constraint violation from U-set validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum USetViolation {
    Empty,
    NotIncreasing { index: usize },
    OutOfRange { index: usize },
    GapBelowFloor { index: usize },
    LeftMarginBelowFloor,
    RightMarginBelowFloor,
    TooMany { count: usize },
}

impl std::fmt::Display for USetViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Empty => write!(f, "width set is empty"),
            Self::NotIncreasing { index } => {
                write!(f, "not strictly increasing at index {index}")
            }
            Self::OutOfRange { index } => {
                write!(f, "value at index {index} outside (0, pi/12)")
            }
            Self::GapBelowFloor { index } => {
                write!(f, "gap below 1e-34 between indices {index} and {}", index + 1)
            }
            Self::LeftMarginBelowFloor => write!(f, "U_1 not above the 1e-43 left margin"),
            Self::RightMarginBelowFloor => {
                write!(f, "pi/12 - U_n0 not above the 1e-43 right margin")
            }
            Self::TooMany { count } => write!(f, "set size {count} exceeds 1e43"),
        }
    }
}

/// Parse a decimal literal (optionally with exponent, e.g. `1e-43`) into
/// an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0i64),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let combined = format!("{int_part}{frac_part}");
    let numer: num_bigint::BigInt = combined.parse().ok()?;
    let scale = frac_part.len() as i64 - exp;
    let ten = num_bigint::BigInt::from(10);
    let rat = if scale >= 0 {
        Rat::new(numer, ten.pow(scale as u32))
    } else {
        Rat::new(numer * ten.pow((-scale) as u32), 1.into())
    };
    Some(rat * Rat::from_integer(sign.into()))
}

/// Lower bound of pi/12 as an exact rational, 60 correct decimals.
///
/// Any comparison against pi/12 decided through this bound can only err
/// inside a band of width < 1e-60 around the true value, far below the
/// 1e-43 margins being checked.
pub fn pi_over_12_lower() -> Rat {
    let pi_lower = parse_decimal(
        "3.141592653589793238462643383279502884197169399375105820974944",
    )
    .expect("static literal parses");
    pi_lower / Rat::from_integer(12.into())
}

fn pow10(exp: u32) -> Rat {
    Rat::new(1.into(), num_bigint::BigInt::from(10).pow(exp))
}

/// Validate a candidate width set against the admissibility constraints:
/// strictly increasing inside `(0, pi/12)`, gaps above 1e-34, margins
/// above 1e-43, and at most 1e43 members.
///
/// All checks run in exact rational arithmetic; binary floating point
/// cannot resolve the 1e-34 gap floor near pi/12.
pub fn validate_u_set(candidate: &[Rat]) -> Result<AdmissibleUSet, Vec<USetViolation>> {
    let mut violations = Vec::new();
    if candidate.is_empty() {
        return Err(vec![USetViolation::Empty]);
    }
    let p12 = pi_over_12_lower();
    let gap_floor = pow10(34);
    let margin_floor = pow10(43);

    for (i, u) in candidate.iter().enumerate() {
        if !(u.is_positive() && *u < p12) {
            violations.push(USetViolation::OutOfRange { index: i });
        }
    }
    for i in 0..candidate.len() - 1 {
        if candidate[i + 1] <= candidate[i] {
            violations.push(USetViolation::NotIncreasing { index: i });
        } else if &candidate[i + 1] - &candidate[i] <= gap_floor {
            violations.push(USetViolation::GapBelowFloor { index: i });
        }
    }
    if candidate[0] <= margin_floor {
        violations.push(USetViolation::LeftMarginBelowFloor);
    }
    let last = candidate.last().expect("nonempty");
    if &p12 - last <= margin_floor {
        violations.push(USetViolation::RightMarginBelowFloor);
    }
    // Practically unreachable from memory-backed slices, kept for the
    // stated bound n0 <= 1e43.
    if candidate.len() as u128 > 10u128.pow(38) {
        violations.push(USetViolation::TooMany {
            count: candidate.len(),
        });
    }

    if violations.is_empty() {
        Ok(AdmissibleUSet {
            values: candidate.to_vec(),
        })
    } else {
        Err(violations)
    }
}

impl AdmissibleUSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// The n-th width (1-based, matching the subscript convention).
    pub fn width<T: Real>(&self, n: usize) -> Result<T, GraftError> {
        let r = self
            .values
            .get(n.wrapping_sub(1))
            .ok_or(GraftError::BadWidthIndex {
                n,
                len: self.values.len(),
            })?;
        let numer = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
        let denom = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
        Ok(T::of(numer / denom))
    }
}

/// A located graft point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Graft<T: Real> {
    pub l: u32,
    pub n: usize,
    pub w_re: T,
    pub w_im: T,
    pub target: T,
    pub achieved: T,
    pub strip_id: u32,
}

impl<T: Real> Graft<T> {
    pub fn w(&self) -> Complex<T> {
        Complex::new(self.w_re, self.w_im)
    }

    pub fn modulus_error(&self) -> T {
        (self.achieved - self.target).abs()
    }
}

fn abs_zeta<T: Real>(sigma: T, t: T) -> T {
    zeta_euler_maclaurin(Complex::new(sigma, t)).0.norm()
}

/// Derive the modulus target for strip `l` and width index `n`: the
/// certificate value `f_l(alpha_0)` for integrand strips, the sinc atom
/// `f_l(U_n)` for the last three.
pub fn build_graft_target<T: Real>(
    certs: &[FactorizationCertificate<T>],
    u_set: &AdmissibleUSet,
    l: u32,
    n: usize,
) -> Result<T, GraftError> {
    let target = if (1..=9).contains(&l) {
        let u_n: T = u_set.width(n)?;
        let cert = certs
            .iter()
            .find(|c| c.l == l && c.u == u_n)
            .ok_or(GraftError::MissingCertificate { l, n })?;
        eval_f(l, cert.alpha[0]).map_err(|_| GraftError::MissingCertificate { l, n })?
    } else {
        let u_n: T = u_set.width(n)?;
        eval_f(l, u_n).map_err(|_| GraftError::BadWidthIndex {
            n,
            len: u_set.len(),
        })?
    };
    if target <= T::zero() || target >= T::one() {
        return Err(GraftError::DegenerateTarget(
            target.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(target)
}

/// Find the first (smallest t) point on the strip with `|zeta(w)|` equal
/// to `target` within [`DEFAULT_GRAFT_TOL`].
///
/// Scans the strip center line in fixed steps, bracketing level crossings
/// and refining by bisection; widens to off-center lines inside the strip
/// only if the center line has no crossing.
pub fn find_graft<T: Real>(
    strip: &Strip<T>,
    target: T,
    t_window: (T, T),
    graft_tol: T,
) -> Result<Graft<T>, GraftError> {
    let mut found = find_grafts_multi(strip, target, t_window, 1, graft_tol)?;
    Ok(found.remove(0))
}

/// Collect up to `count` distinct graft points on the strip, smallest t
/// first.
pub fn find_grafts_multi<T: Real>(
    strip: &Strip<T>,
    target: T,
    t_window: (T, T),
    count: usize,
    graft_tol: T,
) -> Result<Vec<Graft<T>>, GraftError> {
    if target == T::zero() {
        return Err(GraftError::ZeroTarget);
    }
    if !(target > T::zero() && target < T::one()) {
        return Err(GraftError::TargetOutOfRange(
            target.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let (t_lo, t_hi) = t_window;
    if !(t_lo > T::zero() && t_hi > t_lo) {
        return Err(GraftError::BadWindow {
            t_lo: t_lo.to_f64().unwrap_or(f64::NAN),
            t_hi: t_hi.to_f64().unwrap_or(f64::NAN),
        });
    }

    // Center line first; off-center fallbacks stay strictly inside.
    let offsets: [f64; 5] = [0.0, -0.5, 0.5, -0.9, 0.9];
    for offset in offsets {
        let sigma = strip.sigma0 + strip.delta * T::of(offset);
        let grafts = scan_line(strip, sigma, target, t_lo, t_hi, count, graft_tol);
        if !grafts.is_empty() {
            return Ok(grafts);
        }
    }
    Err(GraftError::NotFound {
        strip: strip.l,
        target: target.to_f64().unwrap_or(f64::NAN),
        t_lo: t_lo.to_f64().unwrap_or(f64::NAN),
        t_hi: t_hi.to_f64().unwrap_or(f64::NAN),
    })
}

fn scan_line<T: Real>(
    strip: &Strip<T>,
    sigma: T,
    target: T,
    t_lo: T,
    t_hi: T,
    count: usize,
    graft_tol: T,
) -> Vec<Graft<T>> {
    let g = |t: T| abs_zeta(sigma, t) - target;
    let step = T::of(SCAN_STEP);
    // Low targets only cross inside narrow dips of |zeta| that a coarse
    // cell can straddle without a sign change; such cells get a refined
    // pass whenever either endpoint comes within 2x target of the level.
    let refine_when_below = if target < T::of(0.2) {
        target + target
    } else {
        T::neg_infinity()
    };
    let mut out = Vec::new();
    let handle_cell = |x0: T, g0: T, x1: T, g1: T, out: &mut Vec<Graft<T>>| {
        if g1 == T::zero() || (g0 > T::zero()) != (g1 > T::zero()) {
            if let Ok(root) = bisect(&g, x0, x1, T::of(1e-13)) {
                let graft = make_graft(strip, sigma, root, target);
                if graft.modulus_error() <= graft_tol {
                    out.push(graft);
                }
            }
        } else if g1.abs() <= graft_tol {
            out.push(make_graft(strip, sigma, x1, target));
        }
    };

    let mut x0 = t_lo;
    let mut g0 = g(x0);
    if g0.abs() <= graft_tol {
        out.push(make_graft(strip, sigma, x0, target));
    }
    while x0 < t_hi && out.len() < count {
        let x1 = (x0 + step).min(t_hi);
        let g1 = g(x1);
        let no_crossing = g1 != T::zero() && (g0 > T::zero()) == (g1 > T::zero());
        if no_crossing && g0.min(g1) < refine_when_below {
            // Fine pass through a suspected dip, left to right.
            let sub = step / T::of(16.0);
            let mut y0 = x0;
            let mut h0 = g0;
            while y0 < x1 && out.len() < count {
                let y1 = (y0 + sub).min(x1);
                let h1 = g(y1);
                handle_cell(y0, h0, y1, h1, &mut out);
                y0 = y1;
                h0 = h1;
            }
        } else {
            handle_cell(x0, g0, x1, g1, &mut out);
        }
        if x1 >= t_hi {
            break;
        }
        x0 = x1;
        g0 = g1;
    }
    out
}

fn make_graft<T: Real>(strip: &Strip<T>, sigma: T, t: T, target: T) -> Graft<T> {
    Graft {
        l: strip.l,
        n: 0,
        w_re: sigma,
        w_im: t,
        target,
        achieved: abs_zeta(sigma, t),
        strip_id: strip.l,
    }
}

/// Escalating search: scan the initial window, then extend the upper end
/// by doubling until `t_cap`. Each extension only scans new ground.
pub fn find_graft_escalating<T: Real>(
    strip: &Strip<T>,
    target: T,
    initial_window: (T, T),
    t_cap: T,
    graft_tol: T,
) -> Result<Graft<T>, GraftError> {
    let (t_lo, mut hi) = initial_window;
    let mut lo = t_lo;
    loop {
        match find_graft(strip, target, (lo, hi), graft_tol) {
            Ok(g) => return Ok(g),
            Err(GraftError::NotFound { .. }) => {
                if hi >= t_cap {
                    return Err(GraftError::NotFound {
                        strip: strip.l,
                        target: target.to_f64().unwrap_or(f64::NAN),
                        t_lo: t_lo.to_f64().unwrap_or(f64::NAN),
                        t_hi: hi.to_f64().unwrap_or(f64::NAN),
                    });
                }
                lo = hi;
                hi = (hi + hi).min(t_cap);
            }
            Err(other) => return Err(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strips() -> Vec<Strip<f64>> {
        build_strips(0.6, 0.9, 0.005).unwrap()
    }

    #[test]
    fn strips_are_ordered_and_disjoint() {
        let s = strips();
        assert_eq!(s.len(), 12);
        assert!(0.6 < s[0].sigma_lo());
        assert!(s[11].sigma_hi() < 0.9);
        for i in 0..12 {
            for j in 0..12 {
                if i != j {
                    assert!(s[i].disjoint_from(&s[j]), "strips {i} and {j} overlap");
                }
            }
        }
        for w in s.windows(2) {
            assert!(w[0].sigma_hi() < w[1].sigma_lo());
        }
    }

    #[test]
    fn oversized_delta_reports_maximum() {
        let err = build_strips(0.6, 0.9, 0.02).unwrap_err();
        match err {
            GraftError::StripConfig { max_feasible_delta } => {
                assert!((max_feasible_delta - 0.3 / 26.0).abs() < 1e-15);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn degenerate_sigma_bounds_rejected() {
        assert!(matches!(
            build_strips(0.4, 0.9, 0.001),
            Err(GraftError::SigmaBounds { .. })
        ));
        assert!(matches!(
            build_strips(0.8, 0.7, 0.001),
            Err(GraftError::SigmaBounds { .. })
        ));
    }

    fn rats(xs: &[&str]) -> Vec<Rat> {
        xs.iter().map(|s| parse_decimal(s).unwrap()).collect()
    }

    #[test]
    fn example_u_set_is_admissible() {
        let set = validate_u_set(&rats(&["0.10", "0.20", "0.25"])).unwrap();
        assert_eq!(set.len(), 3);
        let w: f64 = set.width(2).unwrap();
        assert_eq!(w, 0.2);
    }

    #[test]
    fn decreasing_u_set_is_rejected() {
        let err = validate_u_set(&rats(&["0.26", "0.10"])).unwrap_err();
        assert!(
            err.iter()
                .any(|v| matches!(v, USetViolation::NotIncreasing { index: 0 })),
            "expected a not-increasing violation, got {err:?}"
        );
    }

    #[test]
    fn right_margin_violation_detected_in_exact_arithmetic() {
        // pi/12 - 1e-50: inside (0, pi/12) but the margin is far below
        // 1e-43. Doubles cannot even represent the difference.
        let u = pi_over_12_lower() - pow10(50);
        let err = validate_u_set(&[u]).unwrap_err();
        assert!(
            err.contains(&USetViolation::RightMarginBelowFloor),
            "expected right-margin violation, got {err:?}"
        );
    }

    #[test]
    fn gap_floor_checked_exactly() {
        let base = parse_decimal("0.1").unwrap();
        let close = &base + pow10(35); // gap 1e-35 < 1e-34
        let err = validate_u_set(&[base, close]).unwrap_err();
        assert!(err.contains(&USetViolation::GapBelowFloor { index: 0 }));
    }

    #[test]
    fn empty_set_rejected() {
        assert_eq!(validate_u_set(&[]).unwrap_err(), vec![USetViolation::Empty]);
    }

    #[test]
    fn graft_found_for_moderate_target() {
        let s = Strip {
            l: 6,
            sigma0: 0.75,
            delta: 0.005,
        };
        let g = find_graft(&s, 0.5, (10.0, 500.0), DEFAULT_GRAFT_TOL).unwrap();
        assert!(g.modulus_error() <= DEFAULT_GRAFT_TOL);
        assert!(s.contains(g.w()));
    }

    #[test]
    fn graft_search_is_deterministic() {
        let s = Strip {
            l: 3,
            sigma0: 0.67,
            delta: 0.005,
        };
        let a = find_graft(&s, 0.8, (10.0, 300.0), DEFAULT_GRAFT_TOL).unwrap();
        let b = find_graft(&s, 0.8, (10.0, 300.0), DEFAULT_GRAFT_TOL).unwrap();
        assert_eq!(a.w_im.to_bits(), b.w_im.to_bits());
        assert_eq!(a.achieved.to_bits(), b.achieved.to_bits());
    }

    #[test]
    fn probed_value_is_reachable_as_target() {
        // Read a target off the curve; the scanner must achieve it.
        let s = Strip {
            l: 1,
            sigma0: 0.7,
            delta: 0.005,
        };
        let t_probe = 42.37;
        let target = abs_zeta(0.7, t_probe);
        assert!(target > 0.0 && target < 1.0, "probe target {target}");
        let g = find_graft(&s, target, (10.0, 100.0), DEFAULT_GRAFT_TOL).unwrap();
        assert!(g.modulus_error() <= DEFAULT_GRAFT_TOL);
    }

    #[test]
    fn zero_target_is_a_domain_error() {
        let s = Strip {
            l: 1,
            sigma0: 0.7,
            delta: 0.005,
        };
        assert!(matches!(
            find_graft(&s, 0.0, (10.0, 100.0), DEFAULT_GRAFT_TOL),
            Err(GraftError::ZeroTarget)
        ));
    }

    #[test]
    fn impossible_target_reports_not_found_with_window() {
        let s = Strip {
            l: 5,
            sigma0: 0.715,
            delta: 0.005,
        };
        let err = find_graft(&s, 1e-6, (10.0, 40.0), DEFAULT_GRAFT_TOL).unwrap_err();
        assert!(matches!(err, GraftError::NotFound { .. }));
        assert!(err.to_string().contains("enlarge the window"));
    }

    #[test]
    fn multiplicity_probe_returns_distinct_solutions() {
        let s = Strip {
            l: 6,
            sigma0: 0.75,
            delta: 0.005,
        };
        let gs = find_grafts_multi(&s, 0.5, (10.0, 500.0), 3, DEFAULT_GRAFT_TOL).unwrap();
        assert!(gs.len() >= 3, "only {} solutions", gs.len());
        assert!(gs[0].w_im < gs[1].w_im && gs[1].w_im < gs[2].w_im);
        for g in &gs {
            assert!(g.modulus_error() <= DEFAULT_GRAFT_TOL);
        }
    }

    #[test]
    fn graft_targets_from_certificates_and_widths() {
        use crate::factorization::RootSelection;
        let u_set = validate_u_set(&rats(&["0.1", "0.2"])).unwrap();
        // A synthetic certificate: only (l, U, alpha_0) feed the target.
        let pi_l = std::f64::consts::PI * 1592.0;
        let cert = FactorizationCertificate {
            l: 2,
            k: 1,
            u: 0.2,
            big_l: 1592,
            alpha: vec![pi_l + 0.01, 7160.0],
            beta: vec![7160.5],
            lhs: 0.0,
            rhs: 0.0,
            residual: 0.0,
            root_selection: RootSelection::Smallest,
        };
        // cos^2 near the left endpoint: close to 1 but strictly below.
        let certs = std::slice::from_ref(&cert);
        let t2 = build_graft_target(certs, &u_set, 2, 2).unwrap();
        assert!(t2 > 0.99 && t2 < 1.0, "t2 = {t2}");
        // Sinc atoms need no certificate.
        let t10: f64 = build_graft_target(&[], &u_set, 10, 2).unwrap();
        assert!((t10 - (0.4f64).sin() / 0.4).abs() < 1e-15);
        // Missing certificate is reported by index pair.
        assert!(matches!(
            build_graft_target(certs, &u_set, 5, 2),
            Err(GraftError::MissingCertificate { l: 5, n: 2 })
        ));
    }

    #[test]
    fn escalating_search_extends_the_window() {
        let s = Strip {
            l: 2,
            sigma0: 0.65,
            delta: 0.005,
        };
        // A window too small to contain a crossing of 0.35 forces at
        // least one doubling.
        let g = find_graft_escalating(&s, 0.35, (10.0, 12.0), 2000.0, DEFAULT_GRAFT_TOL).unwrap();
        assert!(g.modulus_error() <= DEFAULT_GRAFT_TOL);
    }
}
