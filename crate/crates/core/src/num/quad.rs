//! Gauss–Kronrod quadrature: a fixed 15-point rule for narrow panels and
//! an adaptive bisection driver for whole-interval integrals.

use super::{KahanSum, Real};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("adaptive quadrature failed to reach tolerance {tol:e} on [{a}, {b}]: estimated error {err:e} after {intervals} intervals")]
    ToleranceNotReached {
        a: f64,
        b: f64,
        tol: f64,
        err: f64,
        intervals: usize,
    },
    #[error("degenerate integration interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },
}

/// Kronrod abscissae for the 7-15 pair (positive half, ascending towards 1).
const XGK15: [f64; 8] = [
    0.000_000_000_000_000_000_000_000_000_000_000,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];

/// Kronrod weights matching `XGK15`.
const WGK15: [f64; 8] = [
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];

/// Embedded 7-point Gauss weights (index into the even `XGK15` entries).
const WG7: [f64; 4] = [
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.129_484_966_168_869_693_270_611_432_679_082,
];

/// One application of the 7-15 Gauss–Kronrod pair on `[a, b]`.
///
/// Returns the Kronrod estimate and the |K15 − G7| error surrogate.
pub fn gk15_once<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T) -> (T, T) {
    let half = T::of(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);

    let fc = f(center);
    let mut kronrod = fc * T::of(WGK15[0]);
    let mut gauss = fc * T::of(WG7[0]);

    for j in 1..8 {
        let abscissa = half_len * T::of(XGK15[j]);
        let f1 = f(center - abscissa);
        let f2 = f(center + abscissa);
        let fsum = f1 + f2;
        kronrod += T::of(WGK15[j]) * fsum;
        if j % 2 == 0 {
            gauss += T::of(WG7[j / 2]) * fsum;
        }
    }

    let result = kronrod * half_len;
    let err = ((kronrod - gauss) * half_len).abs();
    (result, err)
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the worst interval until the summed error estimate satisfies
/// `rel_tol` against the accumulated value (with an absolute floor of
/// `rel_tol` itself for integrals near zero).
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    rel_tol: T,
) -> Result<T, QuadError> {
    if !(b > a) {
        return Err(QuadError::DegenerateInterval {
            a: a.to_f64().unwrap_or(f64::NAN),
            b: b.to_f64().unwrap_or(f64::NAN),
        });
    }

    struct Seg<T> {
        a: T,
        b: T,
        value: T,
        err: T,
    }

    impl<T: Real> PartialEq for Seg<T> {
        fn eq(&self, other: &Self) -> bool {
            self.err == other.err
        }
    }
    impl<T: Real> Eq for Seg<T> {}
    impl<T: Real> PartialOrd for Seg<T> {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl<T: Real> Ord for Seg<T> {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.err
                .partial_cmp(&other.err)
                .unwrap_or(std::cmp::Ordering::Equal)
        }
    }

    const MAX_INTERVALS: usize = 1 << 17;
    let (value, err) = gk15_once(&mut f, a, b);
    let mut heap = std::collections::BinaryHeap::new();
    let mut value_total = value;
    let mut abs_total = value.abs();
    let mut err_total = err;
    heap.push(Seg { a, b, value, err });

    loop {
        // Relative to the accumulated value, floored at the rounding
        // noise of the |f| mass so cancelling integrals still terminate.
        let scale = value_total
            .abs()
            .max(abs_total * T::epsilon() * T::of(64.0))
            .max(T::min_positive_value());
        if err_total <= rel_tol * scale {
            break;
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(QuadError::ToleranceNotReached {
                a: a.to_f64().unwrap_or(f64::NAN),
                b: b.to_f64().unwrap_or(f64::NAN),
                tol: rel_tol.to_f64().unwrap_or(f64::NAN),
                err: err_total.to_f64().unwrap_or(f64::NAN),
                intervals: heap.len(),
            });
        }
        let seg = heap.pop().expect("nonempty heap");
        let mid = T::of(0.5) * (seg.a + seg.b);
        if !(seg.a < mid && mid < seg.b) {
            // Interval at floating-point resolution: keep its estimate.
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15_once(&mut f, seg.a, mid);
        let (v2, e2) = gk15_once(&mut f, mid, seg.b);
        value_total = value_total - seg.value + v1 + v2;
        abs_total = abs_total - seg.value.abs() + v1.abs() + v2.abs();
        err_total = err_total - seg.err + e1 + e2;
        heap.push(Seg {
            a: seg.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Seg {
            a: mid,
            b: seg.b,
            value: v2,
            err: e2,
        });
    }

    // Recompute the total compensated, in deterministic interval order.
    let mut segs: Vec<Seg<T>> = heap.into_vec();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(std::cmp::Ordering::Equal));
    let mut total = KahanSum::new();
    for s in &segs {
        total.add(s.value);
    }
    Ok(total.value())
}
