//! Meta-equation residual budgets across a 3x3 grid of (width, left
//! endpoint), all nine equations at each grid point.

use metazeta::factorization::factorize;
use metazeta::ladder::build_ladder;
use metazeta::meta::{assemble_meta, placeholder_graft, verify_meta, MetaForm};
use metazeta::trig::eval_f;
use metazeta::zeta::EvalConfig;

#[test]
fn exact_form_budget_holds_on_a_parameter_grid() {
    let cfg = EvalConfig::<f64>::default();
    // One table covering the base intervals and first iterates for every
    // grid L.
    let table = build_ladder(4950.0, 11150.0, 0.05, &cfg).unwrap();
    let mut checked = 0;
    for &u in &[0.1f64, 0.2, 0.25] {
        for &big_l in &[1592i64, 1900, 2500] {
            for eq in 1..=9u32 {
                let cert = factorize(eq, 1, u, big_l, &table, &cfg).unwrap();
                let mut grafts =
                    vec![placeholder_graft(eq, eval_f(eq, cert.alpha[0]).unwrap())];
                for l in 10..=12 {
                    grafts.push(placeholder_graft(l, eval_f(l, u).unwrap()));
                }
                let inst = assemble_meta(eq, &cert, &grafts, u).unwrap();
                let report =
                    verify_meta(&inst, MetaForm::Exact, &table, &cfg, 1e-6, 1e-9).unwrap();
                assert!(
                    report.passes,
                    "eq {eq} at (U = {u}, L = {big_l}): residual {:e} budget {:e}",
                    report.residual, report.budget
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 81);
}
