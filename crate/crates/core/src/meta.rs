//! Assembly and verification of the nine meta-functional equations: the
//! factorization identities with elementary-function values replaced by
//! graft moduli.
//!
//! Exact form: `|zeta(w_l)| Π Z̃²(α_r)/Z̃²(β_r) = c0 + Σ c_j |zeta(w_{9+j})|`.
//! Asymptotic form: the same with each `Z̃²` ratio replaced by the ratio of
//! critical-line `|zeta|²` values, which differs by the log-weight ratio
//! `Π ln α_r / ln β_r`.

use crate::factorization::FactorizationCertificate;
use crate::grafting::Graft;
use crate::ladder::LadderTable;
use crate::num::Real;
use crate::trig::{eval_f, rat_to_real, sinc_decomposition, TrigError};
use crate::zeta::{zeta_euler_maclaurin, EvalConfig};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Consistency tolerance between a graft's stored target and the value the
/// certificate induces; stale bindings differ by far more.
const BINDING_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("equation id {0} outside 1..=9")]
    BadEquation(u32),
    #[error("certificate is for integrand {cert_l}, not equation {eq_id}")]
    CertificateMismatch { cert_l: u32, eq_id: u32 },
    #[error("missing graft for function index {0}")]
    MissingGraft(u32),
    #[error("stale binding: graft {l} target {target} does not match the value {expected} induced by the bindings")]
    StaleBinding { l: u32, target: f64, expected: f64 },
    #[error(transparent)]
    Trig(#[from] TrigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaForm {
    Exact,
    Asymptotic,
}

/// One assembled meta-functional equation with all numeric bindings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MetaEquationInstance<T: Real> {
    pub eq_id: u32,
    pub form: MetaForm,
    pub certificate: FactorizationCertificate<T>,
    /// Grafts keyed by function index: `eq_id` itself plus the sinc atoms
    /// with nonzero coefficients.
    pub grafts: BTreeMap<u32, Graft<T>>,
    pub u_n: T,
    pub lhs_value: T,
    pub rhs_value: T,
    pub residual: T,
}

/// Function indices an equation references: the integrand strip plus every
/// sinc atom with a nonzero decomposition coefficient.
pub fn support(eq_id: u32) -> Result<Vec<u32>, MetaError> {
    if !(1..=9).contains(&eq_id) {
        return Err(MetaError::BadEquation(eq_id));
    }
    let d = sinc_decomposition(eq_id)?;
    let mut s = vec![eq_id];
    for (atom, coeff) in [(10, &d.c2), (11, &d.c4), (12, &d.c6)] {
        if !num_traits::Zero::is_zero(coeff) {
            s.push(atom);
        }
    }
    Ok(s)
}

/// A graft placeholder carrying the target value itself, for verifying the
/// algebraic form where no searchable graft exists. Recognizable by its
/// zero imaginary part, which no real graft has.
pub fn placeholder_graft<T: Real>(l: u32, value: T) -> Graft<T> {
    Graft {
        l,
        n: 0,
        w_re: T::zero(),
        w_im: T::zero(),
        target: value,
        achieved: value,
        strip_id: l,
    }
}

fn is_placeholder<T: Real>(g: &Graft<T>) -> bool {
    g.w_im == T::zero()
}

/// Assemble an exact-form instance from a certificate and grafts.
///
/// The grafts must include the integrand graft `w_{eq_id}` and every sinc
/// graft in the equation's support; each graft target is cross-checked
/// against the value the certificate and width induce, so a stale `α₀`
/// cannot slip through.
pub fn assemble_meta<T: Real>(
    eq_id: u32,
    cert: &FactorizationCertificate<T>,
    grafts: &[Graft<T>],
    u_n: T,
) -> Result<MetaEquationInstance<T>, MetaError> {
    if !(1..=9).contains(&eq_id) {
        return Err(MetaError::BadEquation(eq_id));
    }
    if cert.l != eq_id {
        return Err(MetaError::CertificateMismatch {
            cert_l: cert.l,
            eq_id,
        });
    }
    let needed = support(eq_id)?;
    let mut bound: BTreeMap<u32, Graft<T>> = BTreeMap::new();
    for l in &needed {
        let g = grafts
            .iter()
            .find(|g| g.l == *l)
            .ok_or(MetaError::MissingGraft(*l))?;
        let expected = if *l == eq_id {
            eval_f(eq_id, cert.alpha[0])?
        } else {
            eval_f(*l, u_n)?
        };
        if (g.target - expected).abs() > T::of(BINDING_TOL) {
            return Err(MetaError::StaleBinding {
                l: *l,
                target: g.target.to_f64().unwrap_or(f64::NAN),
                expected: expected.to_f64().unwrap_or(f64::NAN),
            });
        }
        bound.insert(*l, *g);
    }

    // The weight-ratio product, recovered from the certificate identity
    // lhs = f(alpha_0) * ratio.
    let f_alpha0 = eval_f(eq_id, cert.alpha[0])?;
    let ratio = cert.lhs / f_alpha0;
    let lhs_value = bound[&eq_id].achieved * ratio;
    let rhs_value = rhs_from_grafts(eq_id, &bound)?;
    let residual = (lhs_value - rhs_value).abs();
    Ok(MetaEquationInstance {
        eq_id,
        form: MetaForm::Exact,
        certificate: cert.clone(),
        grafts: bound,
        u_n,
        lhs_value,
        rhs_value,
        residual,
    })
}

fn rhs_from_grafts<T: Real>(
    eq_id: u32,
    grafts: &BTreeMap<u32, Graft<T>>,
) -> Result<T, MetaError> {
    let d = sinc_decomposition(eq_id)?;
    let mut rhs = rat_to_real::<T>(&d.c0);
    for (atom, coeff) in [(10u32, &d.c2), (11, &d.c4), (12, &d.c6)] {
        if num_traits::Zero::is_zero(coeff) {
            continue;
        }
        let g = grafts.get(&atom).ok_or(MetaError::MissingGraft(atom))?;
        rhs += rat_to_real::<T>(coeff) * g.achieved;
    }
    Ok(rhs)
}

/// Verification outcome for one meta-equation instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MetaReport<T: Real> {
    pub eq_id: u32,
    pub form: MetaForm,
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
    /// Residual budget: cert_tol·|rhs| + (Σ|c|)·graft_tol.
    pub budget: T,
    pub passes: bool,
    /// `|Π ln α_r/ln β_r − 1|`, the measured log-weight correction
    /// (asymptotic form only).
    pub omega_ratio_gap: Option<T>,
    /// Crude a-priori bound `2k / ln(pi L)` on the correction.
    pub omega_bound: Option<T>,
    /// Function indices whose modulus came from a placeholder, not a
    /// located point.
    pub placeholder_grafts: Vec<u32>,
}

/// Re-verify an instance from its bindings: weights from the table, graft
/// moduli re-evaluated at the stored points.
pub fn verify_meta<T: Real>(
    instance: &MetaEquationInstance<T>,
    form: MetaForm,
    table: &LadderTable<T>,
    _cfg: &EvalConfig<T>,
    cert_tol: T,
    graft_tol: T,
) -> Result<MetaReport<T>, MetaError> {
    let eq_id = instance.eq_id;
    let cert = &instance.certificate;
    let k = cert.k as usize;

    let mut placeholders = Vec::new();
    let modulus = |g: &Graft<T>, placeholders: &mut Vec<u32>| -> T {
        if is_placeholder(g) {
            placeholders.push(g.l);
            g.achieved
        } else {
            zeta_euler_maclaurin(Complex::new(g.w_re, g.w_im)).0.norm()
        }
    };

    let integrand_graft = instance
        .grafts
        .get(&eq_id)
        .ok_or(MetaError::MissingGraft(eq_id))?;
    let m_eq = modulus(integrand_graft, &mut placeholders);

    // Weight ratio, exact or asymptotic.
    let mut ratio = T::one();
    let mut log_ratio = T::one();
    for r in 1..=k {
        let a = cert.alpha[r];
        let b = cert.beta[r - 1];
        match form {
            MetaForm::Exact => {
                ratio = ratio * table.weight_at(a) / table.weight_at(b);
            }
            MetaForm::Asymptotic => {
                let za = zeta_euler_maclaurin(Complex::new(T::of(0.5), a)).0.norm_sqr();
                let zb = zeta_euler_maclaurin(Complex::new(T::of(0.5), b)).0.norm_sqr();
                ratio = ratio * za / zb;
                log_ratio = log_ratio * a.ln() / b.ln();
            }
        }
    }
    let lhs = m_eq * ratio;

    let d = sinc_decomposition(eq_id)?;
    let mut rhs = rat_to_real::<T>(&d.c0);
    let mut abs_coeff_sum = T::zero();
    for (atom, coeff) in [(10u32, &d.c2), (11, &d.c4), (12, &d.c6)] {
        if num_traits::Zero::is_zero(coeff) {
            continue;
        }
        let g = instance.grafts.get(&atom).ok_or(MetaError::MissingGraft(atom))?;
        let c: T = rat_to_real(coeff);
        rhs += c * modulus(g, &mut placeholders);
        abs_coeff_sum += c.abs();
    }

    let residual = (lhs - rhs).abs();
    let mut budget = cert_tol * rhs.abs().max(T::one()) + abs_coeff_sum * graft_tol + graft_tol;
    let (omega_ratio_gap, omega_bound) = match form {
        MetaForm::Exact => (None, None),
        MetaForm::Asymptotic => {
            let gap = (log_ratio - T::one()).abs();
            let bound = T::of(2.0) * T::of(cert.k as f64) / cert.pi_l().ln();
            // The asymptotic form carries the extra omega correction.
            budget += bound * lhs.abs();
            (Some(gap), Some(bound))
        }
    };
    let passes = residual <= budget;
    Ok(MetaReport {
        eq_id,
        form,
        lhs,
        rhs,
        residual,
        budget,
        passes,
        omega_ratio_gap,
        omega_bound,
        placeholder_grafts: placeholders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::factorize;
    use crate::ladder::build_ladder;
    use crate::trig::max_width;
    use std::sync::OnceLock;

    fn table() -> &'static LadderTable<f64> {
        static TABLE: OnceLock<LadderTable<f64>> = OnceLock::new();
        TABLE.get_or_init(|| build_ladder(4950.0, 10450.0, 0.05, &EvalConfig::default()).unwrap())
    }

    fn cfg() -> EvalConfig<f64> {
        EvalConfig::default()
    }

    const BIG_L: i64 = 1592;

    fn perfect_grafts(eq_id: u32, cert: &FactorizationCertificate<f64>, u: f64) -> Vec<Graft<f64>> {
        let mut gs = vec![placeholder_graft(
            eq_id,
            eval_f(eq_id, cert.alpha[0]).unwrap(),
        )];
        for l in 10..=12 {
            gs.push(placeholder_graft(l, eval_f(l, u).unwrap()));
        }
        gs
    }

    #[test]
    fn support_sets_match_nonzero_coefficients() {
        assert_eq!(support(1).unwrap(), vec![1, 10]);
        assert_eq!(support(6).unwrap(), vec![6, 10, 11, 12]);
        assert_eq!(support(7).unwrap(), vec![7, 10]);
        assert_eq!(support(8).unwrap(), vec![8, 11]);
        assert_eq!(support(9).unwrap(), vec![9, 12]);
    }

    #[test]
    fn equation_six_has_the_headline_coefficients() {
        let d = sinc_decomposition(6).unwrap();
        let coeffs: Vec<f64> = d.coefficients().iter().map(rat_to_real).collect();
        assert_eq!(coeffs, vec![5.0 / 16.0, 15.0 / 32.0, 3.0 / 16.0, 1.0 / 32.0]);
    }

    #[test]
    fn perfect_grafts_reduce_to_certificate_residual() {
        let u = 0.2;
        let cert = factorize(1, 2, u, BIG_L, table(), &cfg()).unwrap();
        let grafts = perfect_grafts(1, &cert, u);
        let inst = assemble_meta(1, &cert, &grafts, u).unwrap();
        assert!(
            (inst.residual - cert.residual).abs() <= 1e-15,
            "meta residual {:e} vs certificate residual {:e}",
            inst.residual,
            cert.residual
        );
    }

    #[test]
    fn missing_graft_is_an_assembly_error() {
        let u = 0.2;
        let cert = factorize(6, 1, u, BIG_L, table(), &cfg()).unwrap();
        let partial = vec![placeholder_graft(6, eval_f(6, cert.alpha[0]).unwrap())];
        assert!(matches!(
            assemble_meta(6, &cert, &partial, u),
            Err(MetaError::MissingGraft(10))
        ));
    }

    #[test]
    fn stale_alpha_binding_is_rejected() {
        let u = 0.2;
        let cert = factorize(2, 1, u, BIG_L, table(), &cfg()).unwrap();
        let mut grafts = perfect_grafts(2, &cert, u);
        grafts[0].target += 1e-3;
        grafts[0].achieved += 1e-3;
        assert!(matches!(
            assemble_meta(2, &cert, &grafts, u),
            Err(MetaError::StaleBinding { .. })
        ));
    }

    #[test]
    fn certificate_equation_mismatch_rejected() {
        let u = 0.2;
        let cert = factorize(2, 1, u, BIG_L, table(), &cfg()).unwrap();
        let grafts = perfect_grafts(1, &cert, u);
        assert!(matches!(
            assemble_meta(1, &cert, &grafts, u),
            Err(MetaError::CertificateMismatch { .. })
        ));
    }

    #[test]
    fn exact_form_verifies_within_budget_for_all_nine() {
        let u = 0.2;
        for eq in 1..=9 {
            let cert = factorize(eq, 2, u, BIG_L, table(), &cfg()).unwrap();
            let grafts = perfect_grafts(eq, &cert, u);
            let inst = assemble_meta(eq, &cert, &grafts, u).unwrap();
            let report =
                verify_meta(&inst, MetaForm::Exact, table(), &cfg(), 1e-6, 1e-9).unwrap();
            assert!(
                report.passes,
                "eq {eq}: residual {:e} budget {:e}",
                report.residual, report.budget
            );
            assert_eq!(report.placeholder_grafts[0], eq);
        }
    }

    #[test]
    fn asymptotic_form_reports_omega_gap_within_bound() {
        let u = 0.2;
        let cert = factorize(7, 2, u, BIG_L, table(), &cfg()).unwrap();
        let grafts = perfect_grafts(7, &cert, u);
        let inst = assemble_meta(7, &cert, &grafts, u).unwrap();
        let report =
            verify_meta(&inst, MetaForm::Asymptotic, table(), &cfg(), 1e-6, 1e-9).unwrap();
        let gap = report.omega_ratio_gap.unwrap();
        let bound = report.omega_bound.unwrap();
        assert!(gap < bound, "gap {gap:e} must sit below the bound {bound:e}");
        assert!(report.passes);
    }

    #[test]
    fn asymptotic_residual_shrinks_with_scale() {
        // Quadrupling L shrinks both the a-priori bound and the measured
        // log-ratio gap: chain points sit 4x higher where ln t is larger
        // and the intervals are relatively narrower.
        let u = 0.2;
        let cert_lo = factorize(7, 1, u, BIG_L, table(), &cfg()).unwrap();
        let table_hi = build_ladder(19900.0, 27450.0, 0.05, &cfg()).unwrap();
        let cert_hi = factorize(7, 1, u, 4 * BIG_L, &table_hi, &cfg()).unwrap();

        let report_lo = verify_meta(
            &assemble_meta(7, &cert_lo, &perfect_grafts(7, &cert_lo, u), u).unwrap(),
            MetaForm::Asymptotic,
            table(),
            &cfg(),
            1e-6,
            1e-9,
        )
        .unwrap();
        let report_hi = verify_meta(
            &assemble_meta(7, &cert_hi, &perfect_grafts(7, &cert_hi, u), u).unwrap(),
            MetaForm::Asymptotic,
            &table_hi,
            &cfg(),
            1e-6,
            1e-9,
        )
        .unwrap();
        assert!(report_hi.omega_bound.unwrap() < report_lo.omega_bound.unwrap());
        assert!(report_hi.omega_ratio_gap.unwrap() < report_lo.omega_ratio_gap.unwrap());
    }

    #[test]
    fn widths_at_domain_edge_still_assemble() {
        let u = max_width::<f64>() * 0.95;
        let cert = factorize(9, 1, u, BIG_L, table(), &cfg()).unwrap();
        let inst = assemble_meta(9, &cert, &perfect_grafts(9, &cert, u), u).unwrap();
        assert!(inst.residual < 1e-6);
    }
}
