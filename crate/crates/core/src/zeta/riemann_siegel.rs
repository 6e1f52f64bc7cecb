//! Riemann–Siegel formula for Hardy's `Z(t)`: main sum plus four
//! correction terms, with the correction coefficient functions tabulated
//! once as Chebyshev series.

use crate::num::{KahanSum, Real};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Coefficients of the theta asymptotic series,
/// c_n = (1 - 2^(1-2n)) |B_2n| / (4n(2n-1)).
const THETA_COEFFS: [f64; 5] = [
    0.020833333333333332,
    0.0012152777777777778,
    0.00038442460317460316,
    0.0002952938988095238,
    0.0004200533985690236,
];

/// Riemann–Siegel theta: the phase with `Z(t) = e^{i theta(t)} zeta(1/2+it)`.
///
/// Asymptotic series, accurate to machine precision for t >= 10.
pub fn theta<T: Real>(t: T) -> T {
    let half = T::of(0.5);
    let two_pi = T::TAU();
    let mut acc = half * t * (t / two_pi).ln() - half * t - T::PI() * T::of(0.125);
    let t_sq = t * t;
    let mut t_pow = t;
    for c in THETA_COEFFS {
        let term = T::of(c) / t_pow;
        acc += term;
        if term.abs() < acc.abs() * T::epsilon() {
            break;
        }
        t_pow *= t_sq;
    }
    acc
}

/// The entire function behind the correction terms:
/// `Psi(z) = cos(2 pi (z^2 - z - 1/16)) / cos(2 pi z)`.
fn psi_complex(z: Complex64) -> Complex64 {
    let two_pi = std::f64::consts::TAU;
    let num = ((z * z - z - Complex64::new(0.0625, 0.0)) * two_pi).cos();
    let den = (z * two_pi).cos();
    num / den
}

/// Derivatives `Psi^(0..=12)(p)` by the Cauchy integral over a circle.
///
/// Psi is entire (its apparent poles at odd multiples of 1/4 are removable),
/// so any radius works; 0.4375 keeps the circle away from the cancellation
/// zones of the raw quotient for the abscissae used below.
fn psi_derivatives(p: f64) -> [f64; 13] {
    const M: usize = 256;
    const RADIUS: f64 = 0.4375;
    let mut samples = [Complex64::new(0.0, 0.0); M];
    for (m, slot) in samples.iter_mut().enumerate() {
        let phi = std::f64::consts::TAU * m as f64 / M as f64;
        *slot = psi_complex(Complex64::new(p + RADIUS * phi.cos(), RADIUS * phi.sin()));
    }
    let mut out = [0.0f64; 13];
    let mut k_factorial = 1.0f64;
    let mut r_pow = 1.0f64;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            k_factorial *= k as f64;
            r_pow *= RADIUS;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, s) in samples.iter().enumerate() {
            let phi = std::f64::consts::TAU * (k * m % M) as f64 / M as f64;
            acc += s * Complex64::new(phi.cos(), -phi.sin());
        }
        *slot = (k_factorial / (M as f64 * r_pow)) * acc.re;
    }
    out
}

/// C_k(p) for k = 0..=4 in terms of Psi derivatives.
fn correction_values(p: f64) -> [f64; 5] {
    let d = psi_derivatives(p);
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let pi4 = pi2 * pi2;
    let pi6 = pi4 * pi2;
    let pi8 = pi4 * pi4;
    [
        d[0],
        -d[3] / (96.0 * pi2),
        d[2] / (64.0 * pi2) + d[6] / (18432.0 * pi4),
        -d[1] / (64.0 * pi2) - d[5] / (3840.0 * pi4) - d[9] / (5_308_416.0 * pi6),
        d[0] / (128.0 * pi2)
            + 19.0 * d[4] / (24_576.0 * pi4)
            + 11.0 * d[8] / (5_898_240.0 * pi6)
            + d[12] / (2_038_431_744.0 * pi8),
    ]
}

const CHEB_ORDER: usize = 64;

/// Chebyshev coefficients of C_0..C_4 over p in [0, 1].
fn correction_tables() -> &'static [[f64; CHEB_ORDER]; 5] {
    static TABLES: OnceLock<[[f64; CHEB_ORDER]; 5]> = OnceLock::new();
    TABLES.get_or_init(|| {
        let n = CHEB_ORDER;
        let mut samples = [[0.0f64; CHEB_ORDER]; 5];
        for j in 0..n {
            let x = (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos();
            let p = 0.5 * (x + 1.0);
            let c = correction_values(p);
            for (k, row) in samples.iter_mut().enumerate() {
                row[j] = c[k];
            }
        }
        let mut tables = [[0.0f64; CHEB_ORDER]; 5];
        for k in 0..5 {
            for (i, slot) in tables[k].iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, s) in samples[k].iter().enumerate() {
                    acc += s * (std::f64::consts::PI * i as f64 * (j as f64 + 0.5) / n as f64).cos();
                }
                *slot = 2.0 * acc / n as f64;
            }
        }
        tables
    })
}

/// Clenshaw evaluation of one tabulated C_k at p in [0, 1].
pub(crate) fn correction_coefficient(k: usize, p: f64) -> f64 {
    let coeffs = &correction_tables()[k];
    let x = 2.0 * p - 1.0;
    let two_x = 2.0 * x;
    let mut b1 = 0.0f64;
    let mut b2 = 0.0f64;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + two_x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    0.5 * coeffs[0] + x * b1 - b2
}

/// `Z(t)` by the Riemann–Siegel formula with corrections C_0..C_4.
///
/// Remainder is below 5e-10 for t >= 500 and shrinks as t^(-11/4).
pub fn hardy_z_riemann_siegel<T: Real>(t: T) -> T {
    let tau = (t / T::TAU()).sqrt();
    let nu_t = tau.floor();
    let nu = nu_t.to_f64().unwrap_or(0.0) as u64;
    let p = (tau - nu_t).to_f64().unwrap_or(0.0);

    let th = theta(t);
    let mut main = KahanSum::new();
    for n in 1..=nu {
        let nf = T::of(n as f64);
        let phase = th - t * nf.ln();
        main.add(phase.cos() / nf.sqrt());
    }

    let tau_f = tau.to_f64().unwrap_or(f64::INFINITY);
    let mut corr = 0.0f64;
    let mut tau_pow = 1.0f64;
    for k in 0..5 {
        corr += correction_coefficient(k, p) / tau_pow;
        tau_pow *= tau_f;
    }
    let sign = if nu % 2 == 1 { 1.0 } else { -1.0 };
    let correction = T::of(sign * corr / tau_f.sqrt());

    T::of(2.0) * main.value() + correction
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_matches_references() {
        // Independent arbitrary-precision values.
        let cases: [(f64, f64); 4] = [
            (50.0, 26.46136607016140964745),
            (100.0, 87.97216523178721962548),
            (1000.0, 2034.546428038031608703),
            (12000.0, 39328.31647681916366),
        ];
        for (t, expect) in cases {
            let th = theta(t);
            assert!(
                (th - expect).abs() < 1e-9 * expect.abs().max(1.0),
                "theta({t}) = {th}, expected {expect}"
            );
        }
    }

    #[test]
    fn correction_tables_match_contour_references() {
        // C_k(p) samples from an independent arbitrary-precision contour
        // integration.
        let cases: [(f64, [f64; 5]); 6] = [
            (0.05, [0.81016556805407132018, -0.01162387121156190923, 0.0013597437673552625812, -0.0001738974886964115765, 0.000021662450397834108839]),
            (0.15, [0.62629089663090883548, 0.0069296440048953233106, 0.003181633910122384655, 0.000014579461553308845135, 0.0001042159090379584443]),
            (0.35, [0.42309650709152265167, 0.0075797171268777008103, 0.005126544187096576065, 0.00030452930660176651804, 0.00037697037672336265331]),
            (0.5, [0.38268343236508977173, 0.0, 0.0051885428302931684938, 0.0, 0.00046483389361763381854]),
            (0.65, [0.42309650709152265167, -0.0075797171268777008103, 0.005126544187096576065, -0.00030452930660176651804, 0.00037697037672336265331]),
            (0.9, [0.71074557894489215376, -0.00028806199604200423518, 0.0021931407765795033256, 0.00010610662502925851594, 0.000055525532833410369814]),
        ];
        for (p, expected) in cases {
            for (k, e) in expected.iter().enumerate() {
                let got = correction_coefficient(k, p);
                assert!(
                    (got - e).abs() < 1e-12,
                    "C_{k}({p}) = {got:e}, expected {e:e}"
                );
            }
        }
    }

    #[test]
    fn correction_tables_smooth_through_removable_points() {
        // The raw quotient for Psi is 0/0 at p = 1/4 and 3/4; the tables
        // must interpolate smoothly there. Psi(1/4) = Psi(3/4) = 1/2 by
        // l'Hopital.
        for p in [0.25, 0.75] {
            let c0 = correction_coefficient(0, p);
            assert!((c0 - 0.5).abs() < 1e-12, "C_0({p}) = {c0}");
        }
    }

    #[test]
    fn riemann_siegel_matches_reference_values() {
        let cases = [
            (1000.0, 0.997794637521586613986),
            (2500.5, 0.3290996217390290138516),
            (5000.25, 0.05210054391435926773517),
            (12000.75, 4.406286564794119058786),
            (100000.5, 4.634042594998132402059),
        ];
        for (t, expect) in cases {
            let z: f64 = hardy_z_riemann_siegel(t);
            assert!(
                (z - expect).abs() < 1e-9,
                "Z({t}) = {z}, expected {expect}"
            );
        }
    }
}
