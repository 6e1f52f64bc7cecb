//! Exact-rational symbolic engine for elementary operations on the
//! meta-functional equations: linear combination, elimination of a graft
//! modulus, and substitution of the shared-denominator identity.
//!
//! Atoms are opaque symbols; the engine never inspects analytic structure.
//! All coefficient arithmetic is exact, so derived relations compare
//! bit-for-bit against golden text.

use crate::num::Real;
use crate::trig::sinc_decomposition;
use crate::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrossbreedError {
    #[error("equation id {0} outside 1..=9")]
    BadEquation(u32),
    #[error("atom {0} absent from {1}; elimination needs it in both relations")]
    EliminationAtomAbsent(Atom, &'static str),
    #[error("no denominator identity supplied for depth k = {0}")]
    MissingIdentity(u32),
    #[error("unbound atom {0} in numeric evaluation")]
    UnboundAtom(Atom),
    #[error("denominator magnitude below 1e-12 in numeric evaluation")]
    NearZeroDenominator,
    #[error("script error at line {line}: {message}")]
    Script { line: usize, message: String },
}

/// Symbolic atoms of the relation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    /// `P_{l,k}`: the full left side of one equation,
    /// `|zeta(w_l)| Π Z̃²(α_r^{l,k}) / Z̃²(β_r^k)`.
    ProductTerm { l: u32, k: u32 },
    /// `G_l = |zeta(w_l)|`.
    GraftModulus { l: u32 },
    /// `N_{l,k} = Π_{r=1..k} Z̃²(α_r^{l,k})`.
    NumeratorProduct { l: u32, k: u32 },
    /// `D_k = Π_{r=1..k} Z̃²(β_r^k)`.
    DenominatorProduct { k: u32 },
    /// The unit constant as an atom; always binds to one.
    One,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::ProductTerm { l, k } => write!(f, "P{l}k{k}"),
            Atom::GraftModulus { l } => write!(f, "G{l}"),
            Atom::NumeratorProduct { l, k } => write!(f, "N{l}k{k}"),
            Atom::DenominatorProduct { k } => write!(f, "D{k}"),
            Atom::One => write!(f, "one"),
        }
    }
}

impl Atom {
    /// Parse the display syntax: `P3k2`, `G11`, `N1k2`, `D2`, `one`.
    pub fn parse(s: &str) -> Option<Atom> {
        if s == "one" {
            return Some(Atom::One);
        }
        let (head, rest) = s.split_at(1);
        match head {
            "P" | "N" => {
                let (l, k) = rest.split_once('k')?;
                let l = l.parse().ok()?;
                let k = k.parse().ok()?;
                Some(if head == "P" {
                    Atom::ProductTerm { l, k }
                } else {
                    Atom::NumeratorProduct { l, k }
                })
            }
            "G" => Some(Atom::GraftModulus {
                l: rest.parse().ok()?,
            }),
            "D" => Some(Atom::DenominatorProduct {
                k: rest.parse().ok()?,
            }),
            _ => None,
        }
    }
}

/// `Σ coeff·atom + constant = 0` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct LinearRelation {
    pub terms: BTreeMap<Atom, Rat>,
    pub constant: Rat,
}

impl LinearRelation {
    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn coefficient(&self, atom: &Atom) -> Rat {
        self.terms.get(atom).cloned().unwrap_or_else(Rat::zero)
    }

    fn insert(&mut self, atom: Atom, coeff: Rat) {
        if !coeff.is_zero() {
            self.terms.insert(atom, coeff);
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    /// Scale so all coefficients are integers with gcd 1 and the
    /// smallest-index product term (or failing that, the smallest atom,
    /// or the constant) is positive.
    pub fn normalize(&mut self) {
        self.prune();
        if self.is_trivial() {
            self.constant = Rat::zero();
            return;
        }
        let mut denom_lcm = BigInt::one();
        for c in self.terms.values().chain([&self.constant]) {
            if !c.is_zero() {
                denom_lcm = denom_lcm.lcm(c.denom());
            }
        }
        let scale = Rat::from_integer(denom_lcm);
        let mut numer_gcd = BigInt::zero();
        for c in self.terms.values().chain([&self.constant]) {
            if !c.is_zero() {
                numer_gcd = numer_gcd.gcd((c.clone() * scale.clone()).numer());
            }
        }
        let factor = scale / Rat::from_integer(numer_gcd);
        for c in self.terms.values_mut() {
            *c = c.clone() * factor.clone();
        }
        self.constant = self.constant.clone() * factor;

        let lead_positive = self
            .terms
            .iter()
            .find(|(a, _)| matches!(a, Atom::ProductTerm { .. }))
            .or_else(|| self.terms.iter().next())
            .map(|(_, c)| c.is_positive())
            .unwrap_or_else(|| self.constant.is_positive());
        if !lead_positive {
            for c in self.terms.values_mut() {
                *c = -c.clone();
            }
            self.constant = -self.constant.clone();
        }
    }
}

impl fmt::Display for LinearRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0 = 0");
        }
        let mut first = true;
        let mut write_term = |f: &mut fmt::Formatter<'_>,
                              coeff: &Rat,
                              atom: Option<&Atom>|
         -> fmt::Result {
            let negative = coeff.is_negative();
            let mag = coeff.abs();
            if first {
                first = false;
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match atom {
                Some(a) => {
                    if mag.is_one() {
                        write!(f, "{a}")
                    } else {
                        write!(f, "{mag}*{a}")
                    }
                }
                None => write!(f, "{mag}"),
            }
        };
        for (atom, coeff) in &self.terms {
            write_term(f, coeff, Some(atom))?;
        }
        if !self.constant.is_zero() {
            let c = self.constant.clone();
            write_term(f, &c, None)?;
        }
        write!(f, " = 0")
    }
}

/// The symbolic form of equation `eq_id` at depth `k`:
/// `P_{eq,k} − c0 − c2 G10 − c4 G11 − c6 G12 = 0`.
pub fn relation_of(eq_id: u32, k: u32) -> Result<LinearRelation, CrossbreedError> {
    if !(1..=9).contains(&eq_id) {
        return Err(CrossbreedError::BadEquation(eq_id));
    }
    let d = sinc_decomposition(eq_id).map_err(|_| CrossbreedError::BadEquation(eq_id))?;
    let mut rel = LinearRelation {
        terms: BTreeMap::new(),
        constant: -d.c0.clone(),
    };
    rel.insert(Atom::ProductTerm { l: eq_id, k }, Rat::one());
    rel.insert(Atom::GraftModulus { l: 10 }, -d.c2.clone());
    rel.insert(Atom::GraftModulus { l: 11 }, -d.c4.clone());
    rel.insert(Atom::GraftModulus { l: 12 }, -d.c6.clone());
    Ok(rel)
}

/// `ca·a + cb·b` with exact arithmetic; zero coefficients pruned.
pub fn combine(a: &LinearRelation, b: &LinearRelation, ca: &Rat, cb: &Rat) -> LinearRelation {
    let mut out = LinearRelation::default();
    for (atom, coeff) in &a.terms {
        out.insert(*atom, coeff.clone() * ca.clone());
    }
    for (atom, coeff) in &b.terms {
        let cur = out.coefficient(atom) + coeff.clone() * cb.clone();
        if cur.is_zero() {
            out.terms.remove(atom);
        } else {
            out.terms.insert(*atom, cur);
        }
    }
    out.constant = a.constant.clone() * ca.clone() + b.constant.clone() * cb.clone();
    out.prune();
    out
}

/// Eliminate `atom` between two relations; the result is normalized to
/// integer coefficients with gcd 1 and canonical sign.
pub fn eliminate(
    atom: Atom,
    a: &LinearRelation,
    b: &LinearRelation,
) -> Result<LinearRelation, CrossbreedError> {
    let ca = a.coefficient(&atom);
    if ca.is_zero() {
        return Err(CrossbreedError::EliminationAtomAbsent(atom, "first relation"));
    }
    let cb = b.coefficient(&atom);
    if cb.is_zero() {
        return Err(CrossbreedError::EliminationAtomAbsent(atom, "second relation"));
    }
    let mut out = combine(a, b, &cb, &(-ca));
    out.normalize();
    Ok(out)
}

/// Expression trees over atoms with `+`, `×`, `÷` and rational constants.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Const(Rat),
    Atom(Atom),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn atom(a: Atom) -> Self {
        Expr::Atom(a)
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Expr::Const(Rat::new(n.into(), d.into()))
    }

    pub fn integer(n: i64) -> Self {
        Expr::Const(Rat::from_integer(n.into()))
    }

    /// Canonical form: children canonicalized, nested sums and products
    /// flattened, constants folded, equal addends merged, stable order.
    pub fn canonical(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Atom(a) => Expr::Atom(*a),
            Expr::Div(num, den) => {
                let n = num.canonical();
                let d = den.canonical();
                if let Expr::Const(c) = &d {
                    // Division by a constant is a scalar multiple.
                    if !c.is_zero() {
                        return Expr::Mul(vec![
                            Expr::Const(Rat::one() / c.clone()),
                            n,
                        ])
                        .canonical();
                    }
                }
                Expr::Div(Box::new(n), Box::new(d))
            }
            Expr::Mul(factors) => {
                let mut scalar = Rat::one();
                let mut rest: Vec<Expr> = Vec::new();
                for f in factors {
                    match f.canonical() {
                        Expr::Const(c) => scalar *= c,
                        Expr::Mul(inner) => {
                            for g in inner {
                                match g {
                                    Expr::Const(c) => scalar *= c,
                                    other => rest.push(other),
                                }
                            }
                        }
                        other => rest.push(other),
                    }
                }
                if scalar.is_zero() {
                    return Expr::Const(Rat::zero());
                }
                rest.sort();
                if rest.is_empty() {
                    return Expr::Const(scalar);
                }
                if !scalar.is_one() {
                    rest.insert(0, Expr::Const(scalar));
                }
                if rest.len() == 1 {
                    rest.pop().expect("one element")
                } else {
                    Expr::Mul(rest)
                }
            }
            Expr::Add(addends) => {
                let mut constant = Rat::zero();
                // Group addends by their non-scalar core, summing scalars.
                let mut groups: Vec<(Expr, Rat)> = Vec::new();
                let push = |core: Expr, coeff: Rat, groups: &mut Vec<(Expr, Rat)>| {
                    for (c, acc) in groups.iter_mut() {
                        if *c == core {
                            *acc += coeff;
                            return;
                        }
                    }
                    groups.push((core, coeff));
                };
                let mut stack: Vec<Expr> = addends.iter().map(|a| a.canonical()).collect();
                while let Some(term) = stack.pop() {
                    match term {
                        Expr::Const(c) => constant += c,
                        Expr::Add(inner) => stack.extend(inner),
                        Expr::Mul(factors) => {
                            let (scalar, core) = split_scalar(factors);
                            push(core, scalar, &mut groups);
                        }
                        other => push(other, Rat::one(), &mut groups),
                    }
                }
                let mut out: Vec<Expr> = groups
                    .into_iter()
                    .filter(|(_, coeff)| !coeff.is_zero())
                    .map(|(core, coeff)| {
                        if coeff.is_one() {
                            core
                        } else {
                            Expr::Mul(vec![Expr::Const(coeff), core]).canonical()
                        }
                    })
                    .collect();
                out.sort();
                if !constant.is_zero() {
                    out.push(Expr::Const(constant));
                }
                match out.len() {
                    0 => Expr::Const(Rat::zero()),
                    1 => out.pop().expect("one element"),
                    _ => Expr::Add(out),
                }
            }
        }
    }

    /// Multiply by `factor`, cancelling `Div` nodes whose denominator is
    /// syntactically equal to it.
    pub fn multiply_cancelling(&self, factor: &Expr) -> Expr {
        match self {
            Expr::Add(addends) => Expr::Add(
                addends
                    .iter()
                    .map(|a| a.multiply_cancelling(factor))
                    .collect(),
            ),
            Expr::Mul(factors) => {
                // Multiply exactly one factor through.
                if let Some((i, _)) = factors
                    .iter()
                    .enumerate()
                    .find(|(_, f)| matches!(f, Expr::Div(_, den) if den.as_ref() == factor))
                {
                    let mut out = factors.clone();
                    out[i] = out[i].multiply_cancelling(factor);
                    Expr::Mul(out)
                } else {
                    let mut out = factors.clone();
                    out.push(factor.clone());
                    Expr::Mul(out)
                }
            }
            Expr::Div(num, den) if den.as_ref() == factor => (**num).clone(),
            other => Expr::Mul(vec![other.clone(), factor.clone()]),
        }
    }
}

fn split_scalar(factors: Vec<Expr>) -> (Rat, Expr) {
    let mut scalar = Rat::one();
    let mut rest = Vec::new();
    for f in factors {
        match f {
            Expr::Const(c) => scalar *= c,
            other => rest.push(other),
        }
    }
    let core = match rest.len() {
        0 => Expr::Const(Rat::one()),
        1 => rest.pop().expect("one element"),
        _ => Expr::Mul(rest),
    };
    (scalar, core)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Atom(a) => write!(f, "{a}"),
            Expr::Add(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Expr::Mul(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    match x {
                        Expr::Add(_) => write!(f, "{x}")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            Expr::Div(n, d) => write!(f, "[{n}] / [{d}]"),
        }
    }
}

/// Equality of two expression trees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRelation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl RationalRelation {
    pub fn canonical(&self) -> RationalRelation {
        RationalRelation {
            lhs: self.lhs.canonical(),
            rhs: self.rhs.canonical(),
        }
    }
}

impl fmt::Display for RationalRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// The shared-denominator identity at depth `k`:
/// `G1·N_{1,k} + G2·N_{2,k} = D_k`.
///
/// Not expressible as a rational-coefficient linear relation over the
/// atom vocabulary (the coefficients are themselves atoms), so it is
/// carried as an expression-tree equality.
pub fn denominator_identity(k: u32) -> RationalRelation {
    RationalRelation {
        lhs: numerator_sum(k),
        rhs: Expr::Atom(Atom::DenominatorProduct { k }),
    }
}

fn numerator_sum(k: u32) -> Expr {
    Expr::Add(vec![
        Expr::Mul(vec![
            Expr::Atom(Atom::GraftModulus { l: 1 }),
            Expr::Atom(Atom::NumeratorProduct { l: 1, k }),
        ]),
        Expr::Mul(vec![
            Expr::Atom(Atom::GraftModulus { l: 2 }),
            Expr::Atom(Atom::NumeratorProduct { l: 2, k }),
        ]),
    ])
}

/// Rewrite every product term `P_{l,k}` of `target` as
/// `G_l·N_{l,k} / (G1·N_{1,k} + G2·N_{2,k})` using the supplied
/// denominator identities, and split the relation into the display form
/// with positive terms on each side.
pub fn substitute_denominator(
    target: &LinearRelation,
    identities: &BTreeMap<u32, RationalRelation>,
) -> Result<RationalRelation, CrossbreedError> {
    let depths: BTreeSet<u32> = target
        .terms
        .keys()
        .filter_map(|a| match a {
            Atom::ProductTerm { k, .. } => Some(*k),
            _ => None,
        })
        .collect();
    for k in &depths {
        let id = identities
            .get(k)
            .ok_or(CrossbreedError::MissingIdentity(*k))?;
        // The identity must be the expected shape for this k.
        if id.canonical() != denominator_identity(*k).canonical() {
            return Err(CrossbreedError::MissingIdentity(*k));
        }
    }

    let mut lhs_terms = Vec::new();
    let mut rhs_terms = Vec::new();
    for (atom, coeff) in &target.terms {
        let expr = match atom {
            Atom::ProductTerm { l, k } => Expr::Div(
                Box::new(Expr::Mul(vec![
                    Expr::Atom(Atom::GraftModulus { l: *l }),
                    Expr::Atom(Atom::NumeratorProduct { l: *l, k: *k }),
                ])),
                Box::new(numerator_sum(*k)),
            ),
            other => Expr::Atom(*other),
        };
        let mag = coeff.abs();
        let scaled = if mag.is_one() {
            expr
        } else {
            Expr::Mul(vec![Expr::Const(mag.clone()), expr])
        };
        if coeff.is_negative() {
            lhs_terms.push(scaled);
        } else {
            rhs_terms.push(scaled);
        }
    }
    if !target.constant.is_zero() {
        let c = &target.constant;
        if c.is_negative() {
            lhs_terms.push(Expr::Const(c.abs()));
        } else {
            rhs_terms.push(Expr::Const(c.clone()));
        }
    }
    let side = |mut terms: Vec<Expr>| match terms.len() {
        0 => Expr::Const(Rat::zero()),
        1 => terms.pop().expect("one element"),
        _ => Expr::Add(terms),
    };
    Ok(RationalRelation {
        lhs: side(lhs_terms),
        rhs: side(rhs_terms),
    })
}

/// Atom bindings for numeric evaluation.
pub type Binding<T> = BTreeMap<Atom, T>;

fn lookup<T: Real>(binding: &Binding<T>, atom: &Atom) -> Result<T, CrossbreedError> {
    if *atom == Atom::One {
        return Ok(T::one());
    }
    binding
        .get(atom)
        .copied()
        .ok_or(CrossbreedError::UnboundAtom(*atom))
}

fn rat_to<T: Real>(r: &Rat) -> T {
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    T::of(n / d)
}

/// Evaluate `Σ coeff·atom + constant` under a binding.
pub fn eval_linear<T: Real>(
    rel: &LinearRelation,
    binding: &Binding<T>,
) -> Result<T, CrossbreedError> {
    let mut acc = rat_to::<T>(&rel.constant);
    for (atom, coeff) in &rel.terms {
        acc += rat_to::<T>(coeff) * lookup(binding, atom)?;
    }
    Ok(acc)
}

fn eval_expr<T: Real>(expr: &Expr, binding: &Binding<T>) -> Result<T, CrossbreedError> {
    match expr {
        Expr::Const(c) => Ok(rat_to::<T>(c)),
        Expr::Atom(a) => lookup(binding, a),
        Expr::Add(xs) => {
            let mut acc = T::zero();
            for x in xs {
                acc += eval_expr(x, binding)?;
            }
            Ok(acc)
        }
        Expr::Mul(xs) => {
            let mut acc = T::one();
            for x in xs {
                acc *= eval_expr(x, binding)?;
            }
            Ok(acc)
        }
        Expr::Div(n, d) => {
            let den = eval_expr(d, binding)?;
            if den.abs() < T::of(1e-12) {
                return Err(CrossbreedError::NearZeroDenominator);
            }
            Ok(eval_expr(n, binding)? / den)
        }
    }
}

/// Evaluate `lhs − rhs` of a rational relation under a binding.
pub fn eval_rational<T: Real>(
    rel: &RationalRelation,
    binding: &Binding<T>,
) -> Result<T, CrossbreedError> {
    Ok(eval_expr(&rel.lhs, binding)? - eval_expr(&rel.rhs, binding)?)
}

/// A named value in a derivation script.
#[derive(Debug, Clone)]
pub enum ScriptValue {
    Linear(LinearRelation),
    Rational(RationalRelation),
}

impl fmt::Display for ScriptValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptValue::Linear(r) => write!(f, "{r}"),
            ScriptValue::Rational(r) => write!(f, "{r}"),
        }
    }
}

/// Run a line-oriented derivation script and return the printed output.
///
/// Statements:
///   `NAME = eq <l> k <k>`
///   `NAME = combine <rat> <NAME> <rat> <NAME>`
///   `NAME = eliminate <ATOM> <NAME> <NAME>`
///   `NAME = substitute <NAME>`
///   `print <NAME>`
///
/// Lines starting with `#` and blank lines are skipped.
pub fn run_script(script: &str) -> Result<String, CrossbreedError> {
    let mut env: BTreeMap<String, ScriptValue> = BTreeMap::new();
    let mut out = String::new();
    let err = |line: usize, message: String| CrossbreedError::Script { line, message };

    for (idx, raw) in script.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "print" {
            let name = tokens
                .get(1)
                .ok_or_else(|| err(lineno, "print needs a name".into()))?;
            let value = env
                .get(*name)
                .ok_or_else(|| err(lineno, format!("unknown name {name}")))?;
            out.push_str(&format!("{name}: {value}\n"));
            continue;
        }
        if tokens.len() < 3 || tokens[1] != "=" {
            return Err(err(lineno, format!("cannot parse statement: {line}")));
        }
        let name = tokens[0].to_string();
        let get_linear = |env: &BTreeMap<String, ScriptValue>, n: &str| match env.get(n) {
            Some(ScriptValue::Linear(r)) => Ok(r.clone()),
            Some(ScriptValue::Rational(_)) => {
                Err(err(lineno, format!("{n} is a rational relation, need linear")))
            }
            None => Err(err(lineno, format!("unknown name {n}"))),
        };
        let parse_rat = |s: &str| -> Result<Rat, CrossbreedError> {
            let parsed = match s.split_once('/') {
                Some((n, d)) => {
                    let n: BigInt = n
                        .parse()
                        .map_err(|_| err(lineno, format!("bad rational {s}")))?;
                    let d: BigInt = d
                        .parse()
                        .map_err(|_| err(lineno, format!("bad rational {s}")))?;
                    Rat::new(n, d)
                }
                None => Rat::from_integer(
                    s.parse::<i64>()
                        .map_err(|_| err(lineno, format!("bad rational {s}")))?
                        .into(),
                ),
            };
            Ok(parsed)
        };
        let value = match tokens[2] {
            "eq" => {
                if tokens.len() != 6 || tokens[4] != "k" {
                    return Err(err(lineno, "usage: NAME = eq <l> k <k>".into()));
                }
                let l: u32 = tokens[3]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad equation id {}", tokens[3])))?;
                let k: u32 = tokens[5]
                    .parse()
                    .map_err(|_| err(lineno, format!("bad depth {}", tokens[5])))?;
                ScriptValue::Linear(relation_of(l, k)?)
            }
            "combine" => {
                if tokens.len() != 7 {
                    return Err(err(
                        lineno,
                        "usage: NAME = combine <rat> <A> <rat> <B>".into(),
                    ));
                }
                let ca = parse_rat(tokens[3])?;
                let a = get_linear(&env, tokens[4])?;
                let cb = parse_rat(tokens[5])?;
                let b = get_linear(&env, tokens[6])?;
                ScriptValue::Linear(combine(&a, &b, &ca, &cb))
            }
            "eliminate" => {
                if tokens.len() != 6 {
                    return Err(err(lineno, "usage: NAME = eliminate <ATOM> <A> <B>".into()));
                }
                let atom = Atom::parse(tokens[3])
                    .ok_or_else(|| err(lineno, format!("bad atom {}", tokens[3])))?;
                let a = get_linear(&env, tokens[4])?;
                let b = get_linear(&env, tokens[5])?;
                ScriptValue::Linear(eliminate(atom, &a, &b)?)
            }
            "substitute" => {
                if tokens.len() != 4 {
                    return Err(err(lineno, "usage: NAME = substitute <A>".into()));
                }
                let a = get_linear(&env, tokens[3])?;
                let depths: BTreeSet<u32> = a
                    .terms
                    .keys()
                    .filter_map(|atom| match atom {
                        Atom::ProductTerm { k, .. } => Some(*k),
                        _ => None,
                    })
                    .collect();
                let identities: BTreeMap<u32, RationalRelation> = depths
                    .into_iter()
                    .map(|k| (k, denominator_identity(k)))
                    .collect();
                ScriptValue::Rational(substitute_denominator(&a, &identities)?.canonical())
            }
            other => return Err(err(lineno, format!("unknown operation {other}"))),
        };
        env.insert(name, value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn p(l: u32, k: u32) -> Atom {
        Atom::ProductTerm { l, k }
    }

    fn g(l: u32) -> Atom {
        Atom::GraftModulus { l }
    }

    #[test]
    fn relation_of_equation_three() {
        let r = relation_of(3, 2).unwrap();
        assert_eq!(r.coefficient(&p(3, 2)), rat(1, 1));
        assert_eq!(r.coefficient(&g(10)), rat(1, 2));
        assert_eq!(r.coefficient(&g(11)), rat(-1, 8));
        assert_eq!(r.constant, rat(-3, 8));
        assert_eq!(r.coefficient(&g(12)), Rat::zero());
    }

    #[test]
    fn relation_of_equation_nine_is_bare() {
        let r = relation_of(9, 1).unwrap();
        assert_eq!(r.terms.len(), 2);
        assert_eq!(r.coefficient(&p(9, 1)), rat(1, 1));
        assert_eq!(r.coefficient(&g(12)), rat(-1, 1));
        assert!(r.constant.is_zero());
    }

    #[test]
    fn first_stage_sum_cancels_g10() {
        // (eq 3) + (eq 4): the odd sinc atom cancels, constant 3/4,
        // coefficient 1/4 on G11.
        let s = combine(
            &relation_of(3, 2).unwrap(),
            &relation_of(4, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        assert_eq!(s.coefficient(&g(10)), Rat::zero());
        assert_eq!(s.coefficient(&g(11)), rat(-1, 4));
        assert_eq!(s.constant, rat(-3, 4));
        assert_eq!(s.coefficient(&p(3, 2)), rat(1, 1));
        assert_eq!(s.coefficient(&p(4, 2)), rat(1, 1));
    }

    #[test]
    fn second_stage_sum_has_three_eighths() {
        let s = combine(
            &relation_of(5, 2).unwrap(),
            &relation_of(6, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        assert_eq!(s.coefficient(&g(11)), rat(-3, 8));
        assert_eq!(s.constant, rat(-5, 8));
    }

    #[test]
    fn self_cancellation_is_trivial() {
        let e = relation_of(1, 1).unwrap();
        let z = combine(&e, &e, &Rat::one(), &(-Rat::one()));
        assert!(z.is_trivial());
        assert_eq!(z.to_string(), "0 = 0");
    }

    #[test]
    fn elimination_produces_integer_coefficients_two_one_three() {
        let s1 = combine(
            &relation_of(3, 2).unwrap(),
            &relation_of(4, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let s2 = combine(
            &relation_of(5, 2).unwrap(),
            &relation_of(6, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let c = eliminate(g(11), &s1, &s2).unwrap();
        // 3 P3 + 3 P4 - 2 P5 - 2 P6 - 1 = 0, exactly.
        assert_eq!(c.coefficient(&p(3, 2)), rat(3, 1));
        assert_eq!(c.coefficient(&p(4, 2)), rat(3, 1));
        assert_eq!(c.coefficient(&p(5, 2)), rat(-2, 1));
        assert_eq!(c.coefficient(&p(6, 2)), rat(-2, 1));
        assert_eq!(c.constant, rat(-1, 1));
        assert_eq!(
            c.to_string(),
            "3*P3k2 + 3*P4k2 - 2*P5k2 - 2*P6k2 - 1 = 0"
        );
    }

    #[test]
    fn elimination_is_order_invariant() {
        let s1a = combine(
            &relation_of(3, 2).unwrap(),
            &relation_of(4, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let s1b = combine(
            &relation_of(4, 2).unwrap(),
            &relation_of(3, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let s2 = combine(
            &relation_of(5, 2).unwrap(),
            &relation_of(6, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        assert_eq!(
            eliminate(g(11), &s1a, &s2).unwrap(),
            eliminate(g(11), &s1b, &s2).unwrap()
        );
        // Swapping the relation arguments flips the raw sign; the
        // normalization restores the canonical form.
        assert_eq!(
            eliminate(g(11), &s2, &s1a).unwrap(),
            eliminate(g(11), &s1a, &s2).unwrap()
        );
    }

    #[test]
    fn eliminating_g10_between_first_two_gives_partition_of_unity() {
        let c = eliminate(
            g(10),
            &relation_of(1, 1).unwrap(),
            &relation_of(2, 1).unwrap(),
        )
        .unwrap();
        // P1 + P2 - 1 = 0.
        assert_eq!(c.coefficient(&p(1, 1)), rat(1, 1));
        assert_eq!(c.coefficient(&p(2, 1)), rat(1, 1));
        assert_eq!(c.constant, rat(-1, 1));
    }

    #[test]
    fn elimination_requires_the_atom_on_both_sides() {
        let r8 = relation_of(8, 1).unwrap(); // uses G11 only
        let r9 = relation_of(9, 1).unwrap(); // uses G12 only
        assert!(matches!(
            eliminate(g(11), &r8, &r9),
            Err(CrossbreedError::EliminationAtomAbsent(_, _))
        ));
    }

    #[test]
    fn substitution_shapes_the_ratio_relation() {
        let s1 = combine(
            &relation_of(3, 2).unwrap(),
            &relation_of(4, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let s2 = combine(
            &relation_of(5, 2).unwrap(),
            &relation_of(6, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let c = eliminate(g(11), &s1, &s2).unwrap();
        let identities: BTreeMap<u32, RationalRelation> =
            [(2, denominator_identity(2))].into_iter().collect();
        let sub = substitute_denominator(&c, &identities).unwrap().canonical();

        // Expected tree: 2 X5 + 2 X6 + 1 = 3 X3 + 3 X4 with
        // X_l = G_l N_{l,2} / (G1 N_{1,2} + G2 N_{2,2}).
        let x = |l: u32| {
            Expr::Div(
                Box::new(Expr::Mul(vec![
                    Expr::Atom(g(l)),
                    Expr::Atom(Atom::NumeratorProduct { l, k: 2 }),
                ])),
                Box::new(Expr::Add(vec![
                    Expr::Mul(vec![
                        Expr::Atom(g(1)),
                        Expr::Atom(Atom::NumeratorProduct { l: 1, k: 2 }),
                    ]),
                    Expr::Mul(vec![
                        Expr::Atom(g(2)),
                        Expr::Atom(Atom::NumeratorProduct { l: 2, k: 2 }),
                    ]),
                ])),
            )
        };
        let expected = RationalRelation {
            lhs: Expr::Add(vec![
                Expr::Mul(vec![Expr::integer(2), x(5)]),
                Expr::Mul(vec![Expr::integer(2), x(6)]),
                Expr::integer(1),
            ]),
            rhs: Expr::Add(vec![
                Expr::Mul(vec![Expr::integer(3), x(3)]),
                Expr::Mul(vec![Expr::integer(3), x(4)]),
            ]),
        }
        .canonical();
        assert_eq!(sub, expected);
    }

    #[test]
    fn substitution_requires_identity_per_depth() {
        let c = eliminate(
            g(11),
            &combine(
                &relation_of(3, 1).unwrap(),
                &relation_of(4, 1).unwrap(),
                &Rat::one(),
                &Rat::one(),
            ),
            &combine(
                &relation_of(5, 2).unwrap(),
                &relation_of(6, 2).unwrap(),
                &Rat::one(),
                &Rat::one(),
            ),
        )
        .unwrap();
        let only_k2: BTreeMap<u32, RationalRelation> =
            [(2, denominator_identity(2))].into_iter().collect();
        assert!(matches!(
            substitute_denominator(&c, &only_k2),
            Err(CrossbreedError::MissingIdentity(1))
        ));
    }

    #[test]
    fn clearing_the_common_denominator_recovers_the_linear_relation() {
        // With every depth equal, multiplying the substituted relation by
        // the common denominator must recover the relation obtained from
        // the linear form by P -> G N and 1 -> D (with D replaced by the
        // identity's numerator sum).
        let s1 = combine(
            &relation_of(3, 2).unwrap(),
            &relation_of(4, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let s2 = combine(
            &relation_of(5, 2).unwrap(),
            &relation_of(6, 2).unwrap(),
            &Rat::one(),
            &Rat::one(),
        );
        let linear = eliminate(g(11), &s1, &s2).unwrap();
        let identities: BTreeMap<u32, RationalRelation> =
            [(2, denominator_identity(2))].into_iter().collect();
        let sub = substitute_denominator(&linear, &identities).unwrap();

        let den = numerator_sum(2);
        let cleared = RationalRelation {
            lhs: sub.lhs.multiply_cancelling(&den),
            rhs: sub.rhs.multiply_cancelling(&den),
        }
        .canonical();

        let gn = |l: u32| {
            Expr::Mul(vec![
                Expr::Atom(g(l)),
                Expr::Atom(Atom::NumeratorProduct { l, k: 2 }),
            ])
        };
        let expected = RationalRelation {
            lhs: Expr::Add(vec![
                Expr::Mul(vec![Expr::integer(2), gn(5)]),
                Expr::Mul(vec![Expr::integer(2), gn(6)]),
                den.clone(),
            ]),
            rhs: Expr::Add(vec![
                Expr::Mul(vec![Expr::integer(3), gn(3)]),
                Expr::Mul(vec![Expr::integer(3), gn(4)]),
            ]),
        }
        .canonical();
        assert_eq!(cleared, expected);
    }

    #[test]
    fn numeric_eval_of_linear_relations() {
        let r = relation_of(7, 1).unwrap(); // P7 - G10 = 0
        let mut binding: Binding<f64> = BTreeMap::new();
        binding.insert(p(7, 1), 0.95);
        binding.insert(g(10), 0.95);
        assert_eq!(eval_linear(&r, &binding).unwrap(), 0.0);
        binding.insert(g(10), 0.94);
        assert!((eval_linear(&r, &binding).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn numeric_eval_flags_unbound_atoms() {
        let r = relation_of(7, 1).unwrap();
        let binding: Binding<f64> = BTreeMap::new();
        assert!(matches!(
            eval_linear(&r, &binding),
            Err(CrossbreedError::UnboundAtom(_))
        ));
    }

    #[test]
    fn numeric_eval_flags_near_zero_denominator() {
        let rel = denominator_identity(1);
        // lhs/rhs structure has no Div; build one explicitly.
        let div = RationalRelation {
            lhs: Expr::Div(
                Box::new(Expr::integer(1)),
                Box::new(Expr::Atom(Atom::DenominatorProduct { k: 1 })),
            ),
            rhs: Expr::integer(1),
        };
        let mut binding: Binding<f64> = BTreeMap::new();
        binding.insert(Atom::DenominatorProduct { k: 1 }, 1e-14);
        assert!(matches!(
            eval_rational(&div, &binding),
            Err(CrossbreedError::NearZeroDenominator)
        ));
        // Sanity: the identity itself evaluates once all atoms are bound.
        binding.insert(g(1), 0.3);
        binding.insert(g(2), 0.7);
        binding.insert(Atom::NumeratorProduct { l: 1, k: 1 }, 1.0);
        binding.insert(Atom::NumeratorProduct { l: 2, k: 1 }, 1.0);
        binding.insert(Atom::DenominatorProduct { k: 1 }, 1.0);
        assert!((eval_rational(&rel, &binding).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn linearity_detects_perturbed_bindings() {
        let r = relation_of(8, 1).unwrap(); // P8 - G11 = 0
        let mut binding: Binding<f64> = BTreeMap::new();
        binding.insert(p(8, 1), 0.5);
        binding.insert(g(11), 0.5 + 1e-3);
        let v = eval_linear(&r, &binding).unwrap().abs();
        assert!(v >= 1e-3 - 1e-12, "perturbation must surface: {v}");
    }

    #[test]
    fn script_reproduces_the_staged_derivation() {
        let script = "\
# staged derivation
E3 = eq 3 k 2
E4 = eq 4 k 2
E5 = eq 5 k 2
E6 = eq 6 k 2
S1 = combine 1 E3 1 E4
S2 = combine 1 E5 1 E6
C = eliminate G11 S1 S2
F = substitute C
print S1
print S2
print C
";
        let out = run_script(script).unwrap();
        assert!(out.contains("S1: P3k2 + P4k2 - 1/4*G11 - 3/4 = 0"));
        assert!(out.contains("S2: P5k2 + P6k2 - 3/8*G11 - 5/8 = 0"));
        assert!(out.contains("C: 3*P3k2 + 3*P4k2 - 2*P5k2 - 2*P6k2 - 1 = 0"));
    }

    #[test]
    fn script_errors_carry_line_numbers() {
        let err = run_script("X = eq 3 k 2\nY = frobnicate X\n").unwrap_err();
        match err {
            CrossbreedError::Script { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
