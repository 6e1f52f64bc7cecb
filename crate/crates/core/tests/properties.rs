//! Property tests for the scalar-level invariants.

use metazeta::crossbreed::{combine, eliminate, relation_of, Atom};
use metazeta::num::quad;
use metazeta::trig::{eval_f, max_width, mean_value_closed_form};
use metazeta::zeta::{zeta, EvalConfig};
use metazeta::Rat;
use num_complex::Complex64;
use proptest::prelude::*;

fn width() -> impl Strategy<Value = f64> {
    (1e-4..0.999f64).prop_map(|x| x * max_width::<f64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_means_partition_unity(u in width()) {
        let m1 = mean_value_closed_form(1, u).unwrap();
        let m2 = mean_value_closed_form(2, u).unwrap();
        prop_assert!((m1 + m2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cross_power_identity_holds_everywhere(u in width()) {
        let m = |l: u32| mean_value_closed_form(l, u).unwrap();
        let lhs = 2.0 * (m(5) + m(6)) + 1.0;
        let rhs = 3.0 * (m(3) + m(4));
        prop_assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn closed_form_tracks_quadrature(l in 1u32..=9, u in width()) {
        let closed = mean_value_closed_form(l, u).unwrap();
        let q = quad::integrate(|t: f64| eval_f(l, t).unwrap(), 0.0, u, 1e-13).unwrap() / u;
        let scale = closed.abs().max(1e-300);
        prop_assert!(
            (closed - q).abs() / scale <= 1e-10,
            "l={}, U={}: {} vs {}",
            l,
            u,
            closed,
            q
        );
    }

    #[test]
    fn zeta_conjugate_symmetry(sigma in 0.55f64..2.0, t in 0.5f64..200.0) {
        let cfg = EvalConfig::<f64>::default();
        let a = zeta(Complex64::new(sigma, t), &cfg).unwrap();
        let b = zeta(Complex64::new(sigma, -t), &cfg).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn elimination_removes_the_atom_and_only_combines(
        i in prop::sample::select(vec![1u32, 2, 3, 4, 5, 6, 7]),
        j in prop::sample::select(vec![1u32, 2, 3, 4, 5, 6, 7]),
        k in 1u32..=3,
    ) {
        prop_assume!(i != j);
        let a = relation_of(i, k).unwrap();
        let b = relation_of(j, k).unwrap();
        // All chosen equations carry the first sinc atom.
        let atom = Atom::GraftModulus { l: 10 };
        let out = eliminate(atom, &a, &b).unwrap();
        let zero = Rat::from_integer(0.into());
        let coeff_atom = out.coefficient(&atom);
        prop_assert!(coeff_atom.eq(&zero));
        // The product terms of both inputs survive.
        let pi_term = Atom::ProductTerm { l: i, k };
        let pj_term = Atom::ProductTerm { l: j, k };
        let coeff_i = out.coefficient(&pi_term);
        let coeff_j = out.coefficient(&pj_term);
        prop_assert!(!coeff_i.eq(&zero));
        prop_assert!(!coeff_j.eq(&zero));
    }

    #[test]
    fn combine_is_bilinear_on_constants(
        ca in -6i64..=6, cb in -6i64..=6,
    ) {
        let a = relation_of(3, 2).unwrap();
        let b = relation_of(4, 2).unwrap();
        let ra = Rat::from_integer(ca.into());
        let rb = Rat::from_integer(cb.into());
        let out = combine(&a, &b, &ra, &rb);
        let expect = a.constant.clone() * ra + b.constant.clone() * rb;
        prop_assert_eq!(out.constant, expect);
    }
}
