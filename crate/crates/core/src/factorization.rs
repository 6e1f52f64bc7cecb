//! Mean-value point chains witnessing the nine interval-mean identities
//! over the surrogate ladder.
//!
//! For an integrand `f_l`, depth `k`, width `U` and left endpoint `pi L`,
//! the identity states
//!
//! `f_l(α₀) · Π_{r=1..k} Z̃²(α_r) / Z̃²(β_r)  =  (1/U) ∫ f_l`
//!
//! where the chains `α` and `β` arise from mean-value points of the
//! substituted integrals over the k-th reverse-iterated interval. The
//! construction transports a single deep mean-value point through the
//! ladder, which reproduces the stated memberships and the chain law
//! exactly.

use crate::ladder::{IteratedInterval, LadderError, LadderTable};
use crate::num::quad::{self, QuadError};
use crate::num::roots::{bisect, RootError};
use crate::num::Real;
use crate::trig::{eval_f, max_width, mean_value_closed_form, TrigError};
use crate::zeta::EvalConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum reverse-iteration depth; deeper chains push intervals beyond
/// desk-scale tables.
pub const K_MAX: u32 = 3;

/// Denominator weights smaller than this mark a degenerate mean point.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FactorizationError {
    #[error("integrand index {0} outside 1..=9")]
    BadIndex(u32),
    #[error("depth k = {0} outside 1..={K_MAX}")]
    BadDepth(u32),
    #[error("no bracketed mean-value root found in [{lo}, {hi}] after grid refinement; quadrature and grid are inconsistent")]
    CertificateFailure { lo: f64, hi: f64 },
    #[error("all candidate mean-value points have a denominator weight below {DEGENERATE_WEIGHT:e}")]
    DegeneratePoint,
    #[error("no mean-value root with induced target inside the selection band [{lo}, {hi}]")]
    NoRootInBand { lo: f64, hi: f64 },
    #[error("invariant violation in certificate: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Trig(#[from] TrigError),
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Tie-break convention for the mean-value point of the numerator chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum RootSelection<T: Real> {
    /// Leftmost bracketed root (default convention).
    Smallest,
    /// Leftmost bracketed root whose induced target `f_l(α₀)` falls inside
    /// `[lo, hi]`; used when the target feeds a graft search.
    SmallestInBand { lo: T, hi: T },
}

/// A stored witness for one factorization identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct FactorizationCertificate<T: Real> {
    pub l: u32,
    pub k: u32,
    #[serde(rename = "U")]
    pub u: T,
    #[serde(rename = "L")]
    pub big_l: i64,
    /// `α₀..α_k`; `alpha[r]` is the r-th chain point.
    pub alpha: Vec<T>,
    /// `β₁..β_k`; `beta[r-1]` is the r-th denominator point.
    pub beta: Vec<T>,
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
    /// The tie-break convention that produced the α chain.
    pub root_selection: RootSelection<T>,
}

impl<T: Real> FactorizationCertificate<T> {
    pub fn pi_l(&self) -> T {
        T::PI() * T::of(self.big_l as f64)
    }

    pub fn relative_residual(&self) -> T {
        self.residual / self.rhs.abs().max(T::min_positive_value())
    }

    /// `f_l(α₀)`, the modulus target this certificate induces for a graft.
    pub fn graft_target(&self) -> Result<T, TrigError> {
        eval_f(self.l, self.alpha[0])
    }

    /// Product `Π_{r=1..k} Z̃²(α_r)`, the numerator of the weight ratio.
    pub fn numerator_product(&self, table: &LadderTable<T>) -> T {
        self.alpha[1..]
            .iter()
            .fold(T::one(), |acc, a| acc * table.weight_at(*a))
    }

    /// Product `Π_{r=1..k} Z̃²(β_r)`.
    pub fn denominator_product(&self, table: &LadderTable<T>) -> T {
        self.beta
            .iter()
            .fold(T::one(), |acc, b| acc * table.weight_at(*b))
    }
}

/// The k-fold substitution weight `w_k(t) = Π_{j=0..k-1} Z̃²(φ̂₁^j(t))`.
pub fn weight_wk<T: Real>(table: &LadderTable<T>, t: T, k: u32) -> Result<T, FactorizationError> {
    Ok(descend_with_weight(table, t, k)?.1)
}

/// Apply `φ̂₁` `k` times to `t`, returning the final image and the product
/// of weights collected along the way (the substitution Jacobian).
fn descend_with_weight<T: Real>(
    table: &LadderTable<T>,
    t: T,
    k: u32,
) -> Result<(T, T), FactorizationError> {
    let mut x = t;
    let mut prod = T::one();
    for _ in 0..k {
        prod *= table.weight_at(x);
        x = table.phi1(x)?;
    }
    Ok((x, prod))
}

/// All reverse iterates `I_0..I_k` of the base interval.
pub fn interval_chain<T: Real>(
    table: &LadderTable<T>,
    base: IteratedInterval<T>,
    k: u32,
) -> Result<Vec<IteratedInterval<T>>, FactorizationError> {
    let mut chain = Vec::with_capacity(k as usize + 1);
    chain.push(base);
    for _ in 0..k {
        let prev = *chain.last().expect("nonempty chain");
        chain.push(table.reverse_interval(prev, 1)?);
    }
    Ok(chain)
}

/// Scan `[lo, hi]` left to right for roots of `g`, refining the grid on
/// failure, and return the first root accepted by `select`.
fn first_accepted_root<T: Real>(
    g: &impl Fn(T) -> T,
    lo: T,
    hi: T,
    initial_step: T,
    abs_tol: T,
    mut select: impl FnMut(T) -> Result<bool, FactorizationError>,
) -> Result<Option<T>, FactorizationError> {
    let mut step = initial_step;
    for _refinement in 0..4 {
        let mut x0 = lo;
        let mut g0 = g(x0);
        while x0 < hi {
            let x1 = (x0 + step).min(hi);
            let g1 = g(x1);
            if g1 == T::zero() || (g0 > T::zero()) != (g1 > T::zero()) {
                let root = bisect(g, x0, x1, abs_tol)?;
                if select(root)? {
                    return Ok(Some(root));
                }
            }
            if x1 >= hi {
                break;
            }
            x0 = x1;
            g0 = g1;
        }
        step /= T::of(4.0);
    }
    Ok(None)
}

/// A mean-value point expressed as its full descent chain, plus the
/// integral it witnesses.
pub struct MeanChain<T: Real> {
    pub j: T,
    /// `x_0..x_k`, with `x_{r-1} = φ̂₁(x_r)`.
    pub chain: Vec<T>,
}

/// Descend `c` through the ladder, recording `x_k = c` down to `x_0`.
fn descend_chain<T: Real>(
    table: &LadderTable<T>,
    c: T,
    k: u32,
) -> Result<Vec<T>, FactorizationError> {
    let mut chain = vec![T::zero(); k as usize + 1];
    chain[k as usize] = c;
    let mut x = c;
    for r in (0..k as usize).rev() {
        x = table.phi1(x)?;
        chain[r] = x;
    }
    Ok(chain)
}

/// The denominator chain `β₁..β_k` for `(k, U, L)`.
///
/// Independent of the integrand, so certificates for different `l` at the
/// same `(k, U, L)` share it bit for bit.
pub fn beta_chain<T: Real>(
    table: &LadderTable<T>,
    k: u32,
    intervals: &[IteratedInterval<T>],
    cfg: &EvalConfig<T>,
) -> Result<MeanChain<T>, FactorizationError> {
    let deep = intervals[k as usize];
    let j1 = quad::integrate(
        |t| {
            descend_with_weight(table, t, k)
                .map(|p| p.1)
                .unwrap_or_else(|_| T::nan())
        },
        deep.lo,
        deep.hi,
        cfg.quadrature_rel_tol,
    )?;
    let level = j1 / deep.length();
    let g = |t: T| {
        descend_with_weight(table, t, k)
            .map(|p| p.1)
            .unwrap_or_else(|_| T::nan())
            - level
    };
    let step = table.resolution().min(deep.length() / T::of(64.0));
    let mut rejected_degenerate = false;
    let point = first_accepted_root(&g, deep.lo, deep.hi, step, cfg.rootfind_abs_tol, |c| {
        // Reject roots whose weight factors vanish: the ratio downstream
        // would divide by ~0.
        let chain = descend_chain(table, c, k)?;
        let degenerate = chain[1..]
            .iter()
            .any(|x| table.weight_at(*x) < T::of(DEGENERATE_WEIGHT));
        if degenerate {
            rejected_degenerate = true;
        }
        Ok(!degenerate)
    })?;
    match point {
        Some(c) => {
            let chain = descend_chain(table, c, k)?;
            Ok(MeanChain { j: j1, chain })
        }
        None if rejected_degenerate => Err(FactorizationError::DegeneratePoint),
        None => Err(FactorizationError::CertificateFailure {
            lo: deep.lo.to_f64().unwrap_or(f64::NAN),
            hi: deep.hi.to_f64().unwrap_or(f64::NAN),
        }),
    }
}

/// Construct a certificate for integrand `l` at `(k, U, L)` with the
/// default smallest-root convention.
pub fn factorize<T: Real>(
    l: u32,
    k: u32,
    u: T,
    big_l: i64,
    table: &LadderTable<T>,
    cfg: &EvalConfig<T>,
) -> Result<FactorizationCertificate<T>, FactorizationError> {
    factorize_with_selection(l, k, u, big_l, table, cfg, RootSelection::Smallest)
}

/// Construct a certificate with an explicit root-selection convention.
pub fn factorize_with_selection<T: Real>(
    l: u32,
    k: u32,
    u: T,
    big_l: i64,
    table: &LadderTable<T>,
    cfg: &EvalConfig<T>,
    selection: RootSelection<T>,
) -> Result<FactorizationCertificate<T>, FactorizationError> {
    if !(1..=9).contains(&l) {
        return Err(FactorizationError::BadIndex(l));
    }
    let rhs = mean_value_closed_form(l, u)?;
    let integrand = move |x: T| eval_f(l, x).expect("integrand index validated");
    let (alpha_chain, beta, lhs) = factorize_chains(&integrand, k, u, big_l, table, cfg, selection)?;
    let residual = (lhs - rhs).abs();
    Ok(FactorizationCertificate {
        l,
        k,
        u,
        big_l,
        alpha: alpha_chain,
        beta,
        lhs,
        rhs,
        residual,
        root_selection: selection,
    })
}

/// Shared construction; also the internal sanity hook for a constant
/// integrand, where `lhs` collapses to exactly one.
#[allow(clippy::needless_range_loop)]
pub(crate) fn factorize_chains<T: Real>(
    integrand: &impl Fn(T) -> T,
    k: u32,
    u: T,
    big_l: i64,
    table: &LadderTable<T>,
    cfg: &EvalConfig<T>,
    selection: RootSelection<T>,
) -> Result<(Vec<T>, Vec<T>, T), FactorizationError> {
    if k == 0 || k > K_MAX {
        return Err(FactorizationError::BadDepth(k));
    }
    if !(u > T::zero() && u < max_width()) {
        return Err(FactorizationError::Trig(TrigError::WidthOutOfRange(
            u.to_f64().unwrap_or(f64::NAN),
        )));
    }
    let pi_l = T::PI() * T::of(big_l as f64);
    let base = IteratedInterval::base(pi_l, pi_l + u);
    let intervals = interval_chain(table, base, k)?;
    let deep = intervals[k as usize];

    // Numerator integral J_f over the deep interval.
    let jf = quad::integrate(
        |t| {
            descend_with_weight(table, t, k)
                .map(|(x0, w)| integrand(x0) * w)
                .unwrap_or_else(|_| T::nan())
        },
        deep.lo,
        deep.hi,
        cfg.quadrature_rel_tol,
    )?;
    let level = jf / deep.length();
    let g = |t: T| {
        descend_with_weight(table, t, k)
            .map(|(x0, w)| integrand(x0) * w)
            .unwrap_or_else(|_| T::nan())
            - level
    };
    let step = table.resolution().min(deep.length() / T::of(64.0));
    let point = first_accepted_root(
        &g,
        deep.lo,
        deep.hi,
        step,
        cfg.rootfind_abs_tol,
        |c| match selection {
            RootSelection::Smallest => Ok(true),
            RootSelection::SmallestInBand { lo, hi } => {
                let (x0, _) = descend_with_weight(table, c, k)?;
                let target = integrand(x0);
                Ok(target >= lo && target <= hi)
            }
        },
    )?;
    let c = match (point, selection) {
        (Some(c), _) => c,
        (None, RootSelection::SmallestInBand { lo, hi }) => {
            return Err(FactorizationError::NoRootInBand {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            })
        }
        (None, _) => {
            return Err(FactorizationError::CertificateFailure {
                lo: deep.lo.to_f64().unwrap_or(f64::NAN),
                hi: deep.hi.to_f64().unwrap_or(f64::NAN),
            })
        }
    };
    let alpha_chain = descend_chain(table, c, k)?;

    // Denominator chain from the weight-only integral; shared across l.
    let beta = beta_chain(table, k, &intervals, cfg)?;

    let alpha0 = alpha_chain[0];
    let mut lhs = integrand(alpha0);
    for r in 1..=k as usize {
        lhs = lhs * table.weight_at(alpha_chain[r]) / table.weight_at(beta.chain[r]);
    }
    Ok((alpha_chain, beta.chain[1..].to_vec(), lhs))
}

/// Per-check outcome of re-verifying a stored certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CertificateReport<T: Real> {
    pub residual: T,
    pub relative_residual: T,
    pub recomputed_lhs: T,
    pub recomputed_rhs: T,
    /// Names of violated invariants; empty means the certificate verifies.
    pub violations: Vec<String>,
}

impl<T: Real> CertificateReport<T> {
    pub fn passes(&self, rel_tol: T) -> bool {
        self.violations.is_empty() && self.relative_residual <= rel_tol
    }
}

/// Recompute both sides from the stored points and re-check every
/// membership and chain invariant.
#[allow(clippy::needless_range_loop)]
pub fn verify_certificate<T: Real>(
    cert: &FactorizationCertificate<T>,
    table: &LadderTable<T>,
    cfg: &EvalConfig<T>,
) -> Result<CertificateReport<T>, FactorizationError> {
    if !(1..=9).contains(&cert.l) {
        return Err(FactorizationError::BadIndex(cert.l));
    }
    if cert.k == 0 || cert.k > K_MAX {
        return Err(FactorizationError::BadDepth(cert.k));
    }
    if cert.alpha.len() != cert.k as usize + 1 || cert.beta.len() != cert.k as usize {
        return Err(FactorizationError::InvariantViolation(format!(
            "chain lengths (alpha {}, beta {}) inconsistent with k = {}",
            cert.alpha.len(),
            cert.beta.len(),
            cert.k
        )));
    }

    let mut violations = Vec::new();
    let pi_l = cert.pi_l();
    let base = IteratedInterval::base(pi_l, pi_l + cert.u);
    let intervals = interval_chain(table, base, cert.k)?;

    // Membership: alpha_0 in the open base interval, alpha_r and beta_r in
    // the r-th reverse iterate.
    if !base.contains(cert.alpha[0]) {
        violations.push("membership: alpha_0 outside (pi L, pi L + U)".into());
    }
    for r in 1..=cert.k as usize {
        if !intervals[r].contains(cert.alpha[r]) {
            violations.push(format!("membership: alpha_{r} outside iterate {r}"));
        }
        if !intervals[r].contains(cert.beta[r - 1]) {
            violations.push(format!("membership: beta_{r} outside iterate {r}"));
        }
    }

    // Chain law: phi(alpha_r) = alpha_{r-1}; the construction computes the
    // parent exactly, so the tolerance is a couple of root-finder widths.
    let chain_tol = cfg.rootfind_abs_tol * T::of(2.0);
    for r in 1..=cert.k as usize {
        let parent = table.phi1(cert.alpha[r])?;
        if (parent - cert.alpha[r - 1]).abs() > chain_tol {
            violations.push(format!("chain: phi(alpha_{r}) != alpha_{}", r - 1));
        }
    }
    for r in 2..=cert.k as usize {
        let parent = table.phi1(cert.beta[r - 1])?;
        if (parent - cert.beta[r - 2]).abs() > chain_tol {
            violations.push(format!("chain: phi(beta_{r}) != beta_{}", r - 1));
        }
    }

    for (r, b) in cert.beta.iter().enumerate() {
        if table.weight_at(*b) < T::of(DEGENERATE_WEIGHT) {
            violations.push(format!("degenerate denominator weight at beta_{}", r + 1));
        }
    }

    let rhs = mean_value_closed_form(cert.l, cert.u)?;
    let mut lhs = eval_f(cert.l, cert.alpha[0])?;
    for r in 1..=cert.k as usize {
        lhs = lhs * table.weight_at(cert.alpha[r]) / table.weight_at(cert.beta[r - 1]);
    }
    let residual = (lhs - rhs).abs();
    let relative = residual / rhs.abs().max(T::min_positive_value());
    if (lhs - cert.lhs).abs() > T::of(1e-9) * cert.lhs.abs().max(T::one()) {
        violations.push("stored lhs does not match recomputation".into());
    }

    Ok(CertificateReport {
        residual,
        relative_residual: relative,
        recomputed_lhs: lhs,
        recomputed_rhs: rhs,
        violations,
    })
}
