//! Desk-scale construction and verification of zeta factorization
//! certificates, graft points and meta-functional equations.
//!
//! The library is organized around a pipeline:
//!
//! 1. [`zeta`] evaluates the Riemann zeta function off the critical line,
//!    Hardy's `Z(t)` on it, and the normalized square `Z̃²(t) = Z(t)²/ln t`.
//! 2. [`ladder`] builds a monotone surrogate ladder `φ̂₁` as the
//!    antiderivative of `Z̃²`, with reverse iteration of intervals.
//! 3. [`factorization`] produces mean-value point chains witnessing the
//!    nine interval-mean identities for the elementary functions of
//!    [`trig`].
//! 4. [`grafting`] locates points `w` in prescribed strips with `|ζ(w)|`
//!    equal to prescribed targets.
//! 5. [`meta`] substitutes graft moduli into certificates and verifies the
//!    resulting equations in exact and asymptotic form.
//! 6. [`crossbreed`] performs exact-rational elimination and substitution
//!    on the symbolic form of those equations.
//!
//! All floating-point numerics are generic over the scalar type via
//! [`num::Real`]; `f64` aliases for the main types live at the crate root.

// Frozen quadrature nodes and reference values keep their full printed
// precision; range guards use negated comparisons to reject NaN inputs.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crossbreed;
pub mod factorization;
pub mod grafting;
pub mod ladder;
pub mod meta;
pub mod num;
pub mod pipeline;
pub mod report;
pub mod trig;
pub mod zeta;

/// Exact rational scalar used wherever an operation demands exact
/// arithmetic (sinc decompositions, crossbreeding, width-set checks).
pub type Rat = num_rational::BigRational;

pub type Config = zeta::EvalConfig<f64>;
pub type Ladder = ladder::LadderTable<f64>;
pub type Interval = ladder::IteratedInterval<f64>;
pub type Certificate = factorization::FactorizationCertificate<f64>;
pub type StripF64 = grafting::Strip<f64>;
pub type GraftF64 = grafting::Graft<f64>;
pub type MetaInstance = meta::MetaEquationInstance<f64>;
