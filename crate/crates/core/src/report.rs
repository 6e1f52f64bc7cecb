//! Headline report: the two showcase identities rendered numerically from
//! pipeline artifacts, in markdown and JSON.
//!
//! The first is the sixth meta-functional equation in asymptotic form; the
//! second is the elimination combination `2(P5 + P6) + 1 = 3(P3 + P4)` of
//! the middle four equations.

use crate::crossbreed::{eval_linear, relation_of, Atom, Binding};
use crate::pipeline::{pipeline_binding, GraftStatus, PipelineOutcome, RunManifest};
use crate::Rat;
use serde_json::json;
use std::fmt::Write as _;

/// Assemble the headline numbers from a pipeline outcome.
pub fn headline_json(outcome: &PipelineOutcome) -> serde_json::Value {
    let manifest = &outcome.manifest;
    let eq6_exact = &outcome.exact_reports[5];
    let eq6_asym = &outcome.asymptotic_reports[5];

    let binding = pipeline_binding(
        &outcome.meta_certificates,
        &outcome.grafts,
        &outcome.table,
    );
    let combo = combination_values(outcome, &binding);

    json!({
        "showcase_equation": {
            "eq_id": 6,
            "coefficients": ["5/16", "15/32", "3/16", "1/32"],
            "exact": { "lhs": eq6_exact.lhs, "rhs": eq6_exact.rhs,
                        "residual": eq6_exact.residual, "budget": eq6_exact.budget,
                        "pass": eq6_exact.passes },
            "asymptotic": { "lhs": eq6_asym.lhs, "rhs": eq6_asym.rhs,
                             "residual": eq6_asym.residual, "budget": eq6_asym.budget,
                             "omega_ratio_gap": eq6_asym.omega_ratio_gap,
                             "omega_bound": eq6_asym.omega_bound,
                             "pass": eq6_asym.passes },
            "placeholder_grafts": eq6_exact.placeholder_grafts,
        },
        "showcase_combination": combo,
        "meta_big_l": manifest.meta_big_l,
        "checks": manifest.checks,
        "overall_pass": manifest.overall_pass,
        "caveats": manifest.caveats,
    })
}

fn combination_values(outcome: &PipelineOutcome, binding: &Binding<f64>) -> serde_json::Value {
    let k = outcome.manifest.config.meta_k;
    // 2 (P5 + P6) + 1 and 3 (P3 + P4), exact and asymptotic columns.
    let p = |l: u32| binding[&Atom::ProductTerm { l, k }];
    let exact_lhs = 2.0 * (p(5) + p(6)) + 1.0;
    let exact_rhs = 3.0 * (p(3) + p(4));

    let asym_p = |idx: usize| outcome.asymptotic_reports[idx].lhs;
    let asym_lhs = 2.0 * (asym_p(4) + asym_p(5)) + 1.0;
    let asym_rhs = 3.0 * (asym_p(2) + asym_p(3));

    let placeholders: Vec<u32> = [3u32, 4, 5, 6]
        .into_iter()
        .filter(|l| {
            matches!(
                outcome.manifest.grafts.get(l),
                Some(GraftStatus::Placeholder { .. }) | Some(GraftStatus::NotFound { .. })
            )
        })
        .collect();

    // The derived relation evaluates directly under the binding.
    let one = Rat::from_integer(1.into());
    let s1 = crate::crossbreed::combine(
        &relation_of(3, k).expect("valid eq"),
        &relation_of(4, k).expect("valid eq"),
        &one,
        &one,
    );
    let s2 = crate::crossbreed::combine(
        &relation_of(5, k).expect("valid eq"),
        &relation_of(6, k).expect("valid eq"),
        &one,
        &one,
    );
    let derived = crate::crossbreed::eliminate(Atom::GraftModulus { l: 11 }, &s1, &s2)
        .expect("headline elimination");
    let derived_value = eval_linear(&derived, binding).unwrap_or(f64::NAN);

    json!({
        "statement": "2 (P5 + P6) + 1 = 3 (P3 + P4)",
        "coefficients": [2, 1, 3],
        "exact": { "lhs": exact_lhs, "rhs": exact_rhs, "residual": (exact_lhs - exact_rhs).abs() },
        "asymptotic": { "lhs": asym_lhs, "rhs": asym_rhs, "residual": (asym_lhs - asym_rhs).abs() },
        "derived_relation": derived.to_string(),
        "derived_relation_value": derived_value,
        "placeholder_moduli": placeholders,
    })
}

/// Render the markdown headline report.
pub fn headline_markdown(outcome: &PipelineOutcome) -> String {
    let manifest = &outcome.manifest;
    let mut md = String::new();
    let _ = writeln!(md, "# Verification report");
    let _ = writeln!(md);
    let _ = writeln!(
        md,
        "Parameters: L = {} (meta stage L = {}), U = {}, k = {}, strips ({}, {}, delta = {}).",
        manifest.config.big_l,
        manifest.meta_big_l,
        manifest.config.u_set[manifest.config.meta_u_index - 1],
        manifest.config.meta_k,
        manifest.config.sigma1,
        manifest.config.sigma2,
        manifest.config.delta,
    );
    let _ = writeln!(md);

    let _ = writeln!(md, "## Showcase: sixth equation (asymptotic form)");
    let _ = writeln!(md);
    let _ = writeln!(
        md,
        "`|zeta(w6)| * prod |zeta(1/2 + i a_r)|^2 / |zeta(1/2 + i b_r)|^2  ~  5/16 + 15/32 |zeta(w10)| + 3/16 |zeta(w11)| + 1/32 |zeta(w12)|`"
    );
    let _ = writeln!(md);
    let eq6x = &outcome.exact_reports[5];
    let eq6a = &outcome.asymptotic_reports[5];
    let _ = writeln!(md, "| form | lhs | rhs | residual | budget | pass |");
    let _ = writeln!(md, "|------|-----|-----|----------|--------|------|");
    let _ = writeln!(
        md,
        "| exact | {:.12} | {:.12} | {:.3e} | {:.3e} | {} |",
        eq6x.lhs, eq6x.rhs, eq6x.residual, eq6x.budget, eq6x.passes
    );
    let _ = writeln!(
        md,
        "| asymptotic | {:.12} | {:.12} | {:.3e} | {:.3e} | {} |",
        eq6a.lhs, eq6a.rhs, eq6a.residual, eq6a.budget, eq6a.passes
    );
    let _ = writeln!(md);

    let _ = writeln!(md, "## Showcase: elimination combination");
    let _ = writeln!(md);
    let _ = writeln!(md, "`2 (P5 + P6) + 1 = 3 (P3 + P4)` with coefficients {{2, 1, 3}}.");
    let _ = writeln!(md);
    let binding = pipeline_binding(
        &outcome.meta_certificates,
        &outcome.grafts,
        &outcome.table,
    );
    let combo = combination_values(outcome, &binding);
    let _ = writeln!(md, "| form | lhs | rhs | residual |");
    let _ = writeln!(md, "|------|-----|-----|----------|");
    for form in ["exact", "asymptotic"] {
        let v = &combo[form];
        let _ = writeln!(
            md,
            "| {form} | {:.12} | {:.12} | {:.3e} |",
            v["lhs"].as_f64().unwrap_or(f64::NAN),
            v["rhs"].as_f64().unwrap_or(f64::NAN),
            v["residual"].as_f64().unwrap_or(f64::NAN),
        );
    }
    let _ = writeln!(md);

    let _ = writeln!(md, "## All nine equations (exact | asymptotic residuals)");
    let _ = writeln!(md);
    let _ = writeln!(
        md,
        "| eq | exact residual | budget | pass | asym residual | budget | pass | placeholder moduli |"
    );
    let _ = writeln!(md, "|----|----------------|--------|------|---------------|--------|------|--------------------|");
    for m in &manifest.meta {
        let ph = if m.placeholder_grafts.is_empty() {
            "-".to_string()
        } else {
            format!("{:?}", m.placeholder_grafts)
        };
        let _ = writeln!(
            md,
            "| {} | {:.3e} | {:.3e} | {} | {:.3e} | {:.3e} | {} | {} |",
            m.eq_id,
            m.exact_residual,
            m.exact_budget,
            m.exact_pass,
            m.asymptotic_residual,
            m.asymptotic_budget,
            m.asymptotic_pass,
            ph
        );
    }
    let _ = writeln!(md);

    if let Some(t) = &manifest.trend {
        let _ = writeln!(md, "## Scale trend of the omega correction");
        let _ = writeln!(md);
        let _ = writeln!(
            md,
            "L = {} -> {}: bound {:.3e} -> {:.3e} (shrinks: {}), measured gap {:.3e} -> {:.3e} (shrinks: {}).",
            t.l_low, t.l_high, t.omega_bound_low, t.omega_bound_high, t.bound_shrinks,
            t.omega_gap_low, t.omega_gap_high, t.gap_shrinks
        );
        let _ = writeln!(md);
    }

    let _ = writeln!(md, "## Caveats");
    let _ = writeln!(md);
    for c in &manifest.caveats {
        let _ = writeln!(md, "- {c}");
    }
    md
}

/// Short textual status per check, one line each, for CLI output.
pub fn check_lines(manifest: &RunManifest) -> Vec<String> {
    manifest
        .checks
        .iter()
        .map(|(name, pass)| format!("{}: {name}", if *pass { "PASS" } else { "FAIL" }))
        .collect()
}
