//! Canonical expressions: Q(√2)-linear combinations of power products of
//! atoms, each term carrying at most one exponential factor `exp(Σ qᵢ·aᵢ)`
//! with rational qᵢ.
//!
//! Two terms merge exactly when they share the same (power product, exponent)
//! key, so equality and the zero test are syntactic on the canonical form.

use super::chart::{AtomId, Chart};
use super::coeff::{rational_to_f64, Coeff, Rational};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Linear form Σ qᵢ·aᵢ with nonzero rational coefficients, sorted by atom.
pub type LinForm = Vec<(AtomId, Rational)>;

/// Power product with nonzero integer exponents, sorted by atom.
pub type Monomial = Vec<(AtomId, i32)>;

/// Canonical term key. The derived lexicographic `Ord` is the fixed term
/// order: the maximal key under it is the leading term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TermKey {
    pub mono: Monomial,
    pub exparg: LinForm,
}

impl TermKey {
    pub fn unit() -> Self {
        TermKey { mono: Vec::new(), exparg: Vec::new() }
    }

    pub fn atom(a: AtomId) -> Self {
        TermKey { mono: vec![(a, 1)], exparg: Vec::new() }
    }

    fn mul(&self, rhs: &TermKey) -> TermKey {
        TermKey {
            mono: merge_sorted(&self.mono, &rhs.mono, |x: &i32, y: &i32| x + y, |e| *e == 0),
            exparg: merge_sorted(&self.exparg, &rhs.exparg, |x: &Rational, y: &Rational| x + y, |q| q.is_zero()),
        }
    }

    fn pow(&self, n: i32) -> TermKey {
        TermKey {
            mono: self
                .mono
                .iter()
                .filter_map(|(a, e)| {
                    let p = e * n;
                    (p != 0).then_some((*a, p))
                })
                .collect(),
            exparg: self
                .exparg
                .iter()
                .filter_map(|(a, q)| {
                    let p = q * Rational::from_integer(n.into());
                    (!p.is_zero()).then_some((*a, p))
                })
                .collect(),
        }
    }
}

fn merge_sorted<V: Clone>(
    lhs: &[(AtomId, V)],
    rhs: &[(AtomId, V)],
    add: impl Fn(&V, &V) -> V,
    is_zero: impl Fn(&V) -> bool,
) -> Vec<(AtomId, V)> {
    let mut out = Vec::with_capacity(lhs.len() + rhs.len());
    let (mut i, mut j) = (0, 0);
    while i < lhs.len() && j < rhs.len() {
        match lhs[i].0.cmp(&rhs[j].0) {
            std::cmp::Ordering::Less => {
                out.push(lhs[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(rhs[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let v = add(&lhs[i].1, &rhs[j].1);
                if !is_zero(&v) {
                    out.push((lhs[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&lhs[i..]);
    out.extend_from_slice(&rhs[j..]);
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("inexact division: remainder {remainder}")]
    InexactDivision { remainder: String },
    #[error("divisor does not normalize to a single term")]
    NonMonomialDivisor,
    #[error("negative power of a sum requires a single-term base")]
    NegativePowerOfSum,
    #[error("exponent of exp must be a linear combination of atoms")]
    NonLinearExponent,
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("atom `{0}` is not bound to a value")]
    UnboundAtom(String),
    #[error("derivative promotion of `{atom}` along axis {axis} exceeds the declared jet order")]
    JetOrderExceeded { atom: String, axis: usize },
    #[error("substitution target for `{0}` must be a linear form (it occurs in an exponent)")]
    NonLinearSubstitution(String),
}

/// Canonical expression. Empty map ⇔ zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expr {
    terms: BTreeMap<TermKey, Coeff>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::coeff(Coeff::one())
    }

    pub fn coeff(c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(TermKey::unit(), c);
        }
        Expr { terms }
    }

    pub fn int(n: i64) -> Self {
        Expr::coeff(Coeff::from_int(n))
    }

    pub fn rational(r: Rational) -> Self {
        Expr::coeff(Coeff::from_rational(r))
    }

    pub fn atom(a: AtomId) -> Self {
        Expr::term(TermKey::atom(a), Coeff::one())
    }

    pub fn term(key: TermKey, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(key, c);
        }
        Expr { terms }
    }

    /// `exp(L)` for a linear form; `exp(0)` collapses to 1.
    pub fn exp_linear(arg: LinForm) -> Self {
        Expr::term(TermKey { mono: Vec::new(), exparg: arg }, Coeff::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Coeff)> {
        self.terms.iter()
    }

    /// Leading (maximal) term under the fixed term order.
    pub fn leading(&self) -> Option<(&TermKey, &Coeff)> {
        self.terms.iter().next_back()
    }

    /// The single term of a one-term expression.
    pub fn as_single_term(&self) -> Option<(&TermKey, &Coeff)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Interprets the expression as Σ qᵢ·aᵢ (no constant, no products,
    /// no exponentials).
    pub fn as_linear_form(&self) -> Option<LinForm> {
        let mut lin = Vec::with_capacity(self.terms.len());
        for (key, c) in &self.terms {
            if !key.exparg.is_empty() || key.mono.len() != 1 || key.mono[0].1 != 1 || !c.is_rational() {
                return None;
            }
            lin.push((key.mono[0].0, c.a.clone()));
        }
        lin.sort_by_key(|(a, _)| *a);
        Some(lin)
    }

    fn insert(&mut self, key: TermKey, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Expr {
        Expr { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.insert(ka.mul(kb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn pow_int(&self, n: i32) -> Result<Expr, ExprError> {
        if n < 0 {
            let (key, c) = self.as_single_term().ok_or(ExprError::NegativePowerOfSum)?;
            return Ok(Expr::term(key.pow(n), c.pow(n)));
        }
        let mut acc = Expr::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Single-term quotient `q` with `self = q * rhs`, found by dividing the
    /// leading terms and then verified by exact multiplication.
    pub fn single_term_ratio(&self, rhs: &Expr) -> Option<(TermKey, Coeff)> {
        if self.is_zero() {
            return Some((TermKey::unit(), Coeff::zero()));
        }
        let (lk, lc) = self.leading()?;
        let (rk, rc) = rhs.leading()?;
        let q_key = lk.mul(&rk.pow(-1));
        let q_coeff = lc.div(rc);
        let candidate = rhs.mul(&Expr::term(q_key.clone(), q_coeff.clone()));
        (candidate == *self).then_some((q_key, q_coeff))
    }

    /// Exact division. A single-term divisor divides every term (the term
    /// lattice is closed under negative exponents); a multi-term divisor goes
    /// through the verified-quotient path and reports the remainder when the
    /// match fails.
    pub fn div_exact(&self, rhs: &Expr, chart: &Chart) -> Result<Expr, ExprError> {
        if rhs.is_zero() {
            return Err(ExprError::NonMonomialDivisor);
        }
        if let Some((dk, dc)) = rhs.as_single_term() {
            let inv_key = dk.pow(-1);
            let inv_coeff = dc.inv();
            return Ok(self.mul(&Expr::term(inv_key, inv_coeff)));
        }
        match self.single_term_ratio(rhs) {
            Some((k, c)) => Ok(Expr::term(k, c)),
            None => {
                let (lk, lc) = self.leading().ok_or(ExprError::NonMonomialDivisor)?;
                let (rk, rc) = rhs.leading().expect("nonzero");
                let q = Expr::term(lk.mul(&rk.pow(-1)), lc.div(rc));
                let remainder = self.sub(&q.mul(rhs));
                Err(ExprError::InexactDivision { remainder: remainder.display(chart).to_string() })
            }
        }
    }

    /// Divides by the leading coefficient so the leading term has
    /// coefficient exactly 1; returns the factored-out coefficient.
    pub fn normalize_leading(&self) -> (Expr, Coeff) {
        match self.leading() {
            None => (Expr::zero(), Coeff::one()),
            Some((_, c)) => {
                let c = c.clone();
                (self.scale(&c.inv()), c)
            }
        }
    }

    /// Every atom occurring in monomials or exponents.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        let mut set = BTreeSet::new();
        for key in self.terms.keys() {
            set.extend(key.mono.iter().map(|(a, _)| *a));
            set.extend(key.exparg.iter().map(|(a, _)| *a));
        }
        set
    }

    pub fn contains_atom(&self, atom: AtomId) -> bool {
        self.terms.keys().any(|k| {
            k.mono.iter().any(|(a, _)| *a == atom) || k.exparg.iter().any(|(a, _)| *a == atom)
        })
    }

    /// Partial derivative treating all atoms as independent.
    pub fn diff(&self, atom: AtomId) -> Expr {
        let mut out = Expr::zero();
        for (key, c) in &self.terms {
            // power-rule part
            for (pos, (a, e)) in key.mono.iter().enumerate() {
                if *a != atom {
                    continue;
                }
                let mut mono = Vec::with_capacity(key.mono.len());
                mono.extend_from_slice(&key.mono[..pos]);
                if *e != 1 {
                    mono.push((*a, e - 1));
                }
                mono.extend_from_slice(&key.mono[pos + 1..]);
                let factor = Coeff::from_rational(Rational::from_integer((*e).into()));
                out.insert(TermKey { mono, exparg: key.exparg.clone() }, c * &factor);
            }
            // chain-rule part from the exponential factor
            for (a, q) in &key.exparg {
                if *a == atom {
                    out.insert(key.clone(), c * &Coeff::from_rational(q.clone()));
                }
            }
        }
        out
    }

    /// Simultaneous substitution of atoms by expressions. An atom occurring
    /// in an exponent can only be replaced by a linear form.
    pub fn substitute_atoms(&self, rules: &BTreeMap<AtomId, Expr>, chart: &Chart) -> Result<Expr, ExprError> {
        let mut out = Expr::zero();
        for (key, c) in &self.terms {
            let mut factor = Expr::coeff(c.clone());
            for (a, e) in &key.mono {
                let image = match rules.get(a) {
                    Some(r) => r.pow_int(*e)?,
                    None => Expr::term(TermKey { mono: vec![(*a, *e)], exparg: Vec::new() }, Coeff::one()),
                };
                factor = factor.mul(&image);
            }
            let mut exparg: LinForm = Vec::new();
            for (a, q) in &key.exparg {
                match rules.get(a) {
                    None => {
                        exparg = merge_sorted(&exparg, &[(*a, q.clone())], |x, y| x + y, |v: &Rational| v.is_zero());
                    }
                    Some(r) => {
                        let lin = r
                            .as_linear_form()
                            .ok_or_else(|| ExprError::NonLinearSubstitution(chart.name(*a).to_string()))?;
                        let scaled: LinForm = lin.into_iter().map(|(b, p)| (b, p * q)).collect();
                        exparg = merge_sorted(&exparg, &scaled, |x, y| x + y, |v: &Rational| v.is_zero());
                    }
                }
            }
            factor = factor.mul(&Expr::exp_linear(exparg));
            out = out.add(&factor);
        }
        Ok(out)
    }

    /// IEEE double evaluation; every atom must be bound.
    pub fn eval(&self, bindings: &BTreeMap<AtomId, f64>, chart: &Chart) -> Result<f64, ExprError> {
        let lookup = |a: AtomId| -> Result<f64, ExprError> {
            bindings
                .get(&a)
                .copied()
                .ok_or_else(|| ExprError::UnboundAtom(chart.name(a).to_string()))
        };
        let mut total = 0.0;
        for (key, c) in &self.terms {
            let mut v = c.to_f64();
            for (a, e) in &key.mono {
                v *= lookup(*a)?.powi(*e);
            }
            let mut arg = 0.0;
            for (a, q) in &key.exparg {
                arg += rational_to_f64(q) * lookup(*a)?;
            }
            if arg != 0.0 {
                v *= arg.exp();
            }
            total += v;
        }
        Ok(total)
    }

    pub fn display<'a>(&'a self, chart: &'a Chart) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, chart }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    chart: &'a Chart,
}

fn linform_string(lin: &LinForm, chart: &Chart) -> String {
    let mut s = String::new();
    for (i, (a, q)) in lin.iter().enumerate() {
        let qa = q.abs();
        if i == 0 {
            if q.is_negative() {
                s.push('-');
            }
        } else {
            s.push_str(if q.is_negative() { " - " } else { " + " });
        }
        if !qa.is_integer() || !qa.numer().eq(&1.into()) {
            s.push_str(&Coeff::from_rational(qa).to_string());
            s.push('*');
        }
        s.push_str(chart.name(*a));
    }
    s
}

/// Deterministic grammar-compatible printing: terms in descending term
/// order, atoms within a monomial in ascending rank, the exponential factor
/// last. Printing a canonical form and reparsing it is the identity.
impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.is_zero() {
            return write!(f, "0");
        }
        for (i, (key, c)) in self.expr.terms.iter().rev().enumerate() {
            let neg = c.a.is_negative() || (c.a.is_zero() && c.b.is_negative());
            let mag = if neg { -c } else { c.clone() };
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut pieces: Vec<String> = Vec::new();
            if !mag.is_one() || (key.mono.is_empty() && key.exparg.is_empty()) {
                pieces.push(mag.to_string());
            }
            for (a, e) in &key.mono {
                if *e == 1 {
                    pieces.push(self.chart.name(*a).to_string());
                } else {
                    pieces.push(format!("{}^{}", self.chart.name(*a), e));
                }
            }
            if !key.exparg.is_empty() {
                pieces.push(format!("exp({})", linform_string(&key.exparg, self.chart)));
            }
            write!(f, "{}", pieces.join("*"))?;
        }
        Ok(())
    }
}
