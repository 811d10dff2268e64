//! First-order formulas over linear atoms with time-indexed variables.
//!
//! A [`TimedVar`] is a named signal either at a relative offset from the
//! symbolic "current" step `k` (… `x(k-1)`, `x(k)`, `x(k+1)` …) or at an
//! absolute initial step (`x(0)`, `x(1)`, …). Atoms compare a [`LinearTerm`]
//! against zero or assert a divisibility constraint; formulas add the usual
//! boolean connectives and quantifiers. Everything is immutable and pure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Sort {
    #[default]
    Real,
    Int,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Real => write!(f, "real"),
            Sort::Int => write!(f, "int"),
            Sort::Bool => write!(f, "bool"),
        }
    }
}

/// Time index of a variable occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeIndex {
    /// Offset from the symbolic current step `k`.
    Relative(i64),
    /// Concrete initial step `0, 1, …`.
    Absolute(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedVar {
    pub name: String,
    pub index: TimeIndex,
    pub sort: Sort,
}

impl TimedVar {
    pub fn new(name: impl Into<String>, index: TimeIndex, sort: Sort) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "empty variable name");
        TimedVar { name, index, sort }
    }

    /// Variable at relative offset 0, i.e. `name(k)`.
    pub fn at_k(name: impl Into<String>, sort: Sort) -> Self {
        Self::new(name, TimeIndex::Relative(0), sort)
    }

    pub fn rel(name: impl Into<String>, offset: i64, sort: Sort) -> Self {
        Self::new(name, TimeIndex::Relative(offset), sort)
    }

    pub fn abs(name: impl Into<String>, step: u64, sort: Sort) -> Self {
        Self::new(name, TimeIndex::Absolute(step), sort)
    }
}

impl fmt::Display for TimedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            TimeIndex::Relative(0) => write!(f, "{}(k)", self.name),
            TimeIndex::Relative(d) if d > 0 => write!(f, "{}(k+{})", self.name, d),
            TimeIndex::Relative(d) => write!(f, "{}(k{})", self.name, d),
            TimeIndex::Absolute(s) => write!(f, "{}({})", self.name, s),
        }
    }
}

/// Linear combination of numeric variables plus a constant, kept at
/// `coefficients · vars + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<TimedVar, Rational>,
    constant: Rational,
}

impl LinearTerm {
    pub fn zero() -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: Rational::zero(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: TimedVar) -> Self {
        Self::monomial(Rational::one(), v)
    }

    pub fn monomial(c: Rational, v: TimedVar) -> Self {
        debug_assert!(v.sort != Sort::Bool, "boolean variable in linear term");
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(v, c);
        }
        LinearTerm {
            coeffs,
            constant: Rational::zero(),
        }
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&TimedVar, &Rational)> {
        self.coeffs.iter()
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn coeff_of(&self, v: &TimedVar) -> Rational {
        self.coeffs.get(v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mentions(&self, v: &TimedVar) -> bool {
        self.coeffs.contains_key(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &TimedVar> {
        self.coeffs.keys()
    }

    pub fn add_term(&mut self, c: Rational, v: TimedVar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(v) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_constant(&mut self, c: Rational) {
        self.constant = &self.constant + &c;
    }

    pub fn add(&self, other: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(c.clone(), v.clone());
        }
        out.add_constant(other.constant.clone());
        out
    }

    pub fn sub(&self, other: &LinearTerm) -> LinearTerm {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> LinearTerm {
        if c.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, a)| (v.clone(), a * c))
                .collect(),
            constant: &self.constant * c,
        }
    }

    /// Replaces `v` by `t` throughout.
    pub fn substitute(&self, v: &TimedVar, t: &LinearTerm) -> LinearTerm {
        match self.coeffs.get(v) {
            None => self.clone(),
            Some(a) => {
                let mut rest = self.clone();
                rest.coeffs.remove(v);
                rest.add(&t.scale(a))
            }
        }
    }

    /// Solves `self = 0` for `v`: returns the term `t` with `v = t`.
    pub fn solve_for(&self, v: &TimedVar) -> Option<LinearTerm> {
        let a = self.coeffs.get(v)?;
        let mut rest = self.clone();
        rest.coeffs.remove(v);
        Some(rest.scale(&(&Rational::from_int(-1) / a)))
    }

    pub fn evaluate(&self, asg: &Assignment) -> Result<Rational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            match asg.get(v) {
                Some(Value::Num(x)) => acc += c * x,
                Some(Value::Bool(_)) => {
                    return Err(Error::Sort {
                        var: v.to_string(),
                        detail: "boolean value in numeric term".into(),
                    })
                }
                None => return Err(Error::Unbound { var: v.to_string() }),
            }
        }
        Ok(acc)
    }

    pub fn shift(&self, delta: i64) -> Result<LinearTerm> {
        let mut coeffs = BTreeMap::new();
        for (v, c) in &self.coeffs {
            coeffs.insert(shift_var(v, delta)?, c.clone());
        }
        Ok(LinearTerm {
            coeffs,
            constant: self.constant.clone(),
        })
    }

    /// Multiplies by the lcm of denominators and divides by the gcd of the
    /// resulting integers (constant included, so integer atoms stay
    /// integer-cleared): unique positive-scaled integer form.
    fn integer_normalized(&self) -> (LinearTerm, bool) {
        let mut lcm = BigInt::one();
        for c in self.coeffs.values().chain(std::iter::once(&self.constant)) {
            lcm = lcm.lcm(c.denom());
        }
        let scaled = self.scale(&Rational::from_bigint(lcm));
        let mut gcd = BigInt::zero();
        for c in scaled.coeffs.values() {
            gcd = gcd.gcd(c.numer());
        }
        if gcd.is_zero() {
            // constant-only term
            return (scaled, false);
        }
        if !scaled.constant.is_zero() {
            gcd = gcd.gcd(scaled.constant.numer());
        }
        let mut out = scaled.scale(&Rational::from_bigint(gcd).recip());
        // positive leading coefficient; report whether we flipped
        let flipped = match out.coeffs.values().next() {
            Some(c) if c.is_negative() => {
                out = out.scale(&Rational::from_int(-1));
                true
            }
            _ => false,
        };
        (out, flipped)
    }

    /// True when all coefficients and the constant are whole numbers.
    pub fn is_integer_cleared(&self) -> bool {
        self.constant.is_integer() && self.coeffs.values().all(|c| c.is_integer())
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "{}", self.constant);
        }
        let mut first = true;
        for (v, c) in &self.coeffs {
            if first {
                if c.is_one() {
                    write!(f, "{v}")?;
                } else if *c == Rational::from_int(-1) {
                    write!(f, "-{v}")?;
                } else {
                    write!(f, "{c}*{v}")?;
                }
                first = false;
            } else if c.is_negative() {
                let a = -c;
                if a.is_one() {
                    write!(f, " - {v}")?;
                } else {
                    write!(f, " - {a}*{v}")?;
                }
            } else if c.is_one() {
                write!(f, " + {v}")?;
            } else {
                write!(f, " + {c}*{v}")?;
            }
        }
        if self.constant.is_negative() {
            write!(f, " - {}", -&self.constant)?;
        } else if !self.constant.is_zero() {
            write!(f, " + {}", self.constant)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn negate(self) -> CompareOp {
        match self {
            CompareOp::Eq => CompareOp::Ne,
            CompareOp::Ne => CompareOp::Eq,
            CompareOp::Lt => CompareOp::Ge,
            CompareOp::Le => CompareOp::Gt,
            CompareOp::Gt => CompareOp::Le,
            CompareOp::Ge => CompareOp::Lt,
        }
    }

    /// Mirror of the relation when both sides are negated: `t op 0` iff
    /// `-t flip(op) 0`.
    pub fn flip(self) -> CompareOp {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            op => op,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ord == Equal,
            CompareOp::Ne => ord != Equal,
            CompareOp::Lt => ord == Less,
            CompareOp::Le => ord != Greater,
            CompareOp::Gt => ord == Greater,
            CompareOp::Ge => ord != Less,
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        };
        write!(f, "{s}")
    }
}

/// Atomic formula. `Compare(t, op)` means `t op 0`; `Divides(m, t)` means
/// `m | t` over integer-sorted terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Compare(LinearTerm, CompareOp),
    Divides(BigInt, LinearTerm),
    BoolVar(TimedVar),
    True,
    False,
}

impl Atom {
    /// Canonical comparison atom: integer-cleared coefficients, gcd 1,
    /// positive leading coefficient (flipping the relation as needed), and
    /// ground atoms folded to `True`/`False`.
    pub fn compare(term: LinearTerm, op: CompareOp) -> Atom {
        if term.is_constant() {
            let ord = term
                .constant_part()
                .partial_cmp(&Rational::zero())
                .expect("total order on rationals");
            return if op.holds(ord) {
                Atom::True
            } else {
                Atom::False
            };
        }
        let (norm, flipped) = term.integer_normalized();
        let op = if flipped { op.flip() } else { op };
        Atom::Compare(norm, op)
    }

    pub fn divides(modulus: BigInt, term: LinearTerm) -> Atom {
        assert!(modulus.is_positive(), "non-positive modulus");
        if modulus.is_one() {
            return Atom::True;
        }
        if term.is_constant() {
            let c = term.constant_part();
            return if c.is_integer() && (c.numer() % &modulus).is_zero() {
                Atom::True
            } else {
                Atom::False
            };
        }
        if !term.is_integer_cleared() {
            // m | t  ==  m*d | d*t for d the lcm of denominators
            let mut d = BigInt::one();
            for c in term.coeffs.values().chain(std::iter::once(&term.constant)) {
                d = d.lcm(c.denom());
            }
            return Atom::divides(&modulus * &d, term.scale(&Rational::from_bigint(d)));
        }
        // reduce coefficients modulo m, then cancel the common factor
        let modr = |n: &BigInt| -> BigInt { n.mod_floor(&modulus) };
        let mut reduced = LinearTerm::constant(Rational::from_bigint(modr(term.constant.numer())));
        for (v, c) in &term.coeffs {
            reduced.add_term(Rational::from_bigint(modr(c.numer())), v.clone());
        }
        if reduced.is_constant() {
            return Atom::divides(modulus, reduced);
        }
        let mut gcd = modulus.clone();
        for c in reduced.coeffs.values() {
            gcd = gcd.gcd(c.numer());
        }
        if !reduced.constant.is_zero() {
            gcd = gcd.gcd(reduced.constant.numer());
        }
        if gcd > BigInt::one() {
            let m = &modulus / &gcd;
            if m.is_one() {
                return Atom::True;
            }
            return Atom::Divides(m, reduced.scale(&Rational::from_bigint(gcd).recip()));
        }
        Atom::Divides(modulus, reduced)
    }

    pub fn evaluate(&self, asg: &Assignment) -> Result<bool> {
        match self {
            Atom::True => Ok(true),
            Atom::False => Ok(false),
            Atom::BoolVar(v) => match asg.get(v) {
                Some(Value::Bool(b)) => Ok(*b),
                Some(Value::Num(_)) => Err(Error::Sort {
                    var: v.to_string(),
                    detail: "numeric value for boolean variable".into(),
                }),
                None => Err(Error::Unbound { var: v.to_string() }),
            },
            Atom::Compare(t, op) => {
                let val = t.evaluate(asg)?;
                let ord = val.partial_cmp(&Rational::zero()).expect("total order");
                Ok(op.holds(ord))
            }
            Atom::Divides(m, t) => {
                let val = t.evaluate(asg)?;
                Ok(val.is_integer() && (val.numer() % m).is_zero())
            }
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<TimedVar>) {
        match self {
            Atom::Compare(t, _) | Atom::Divides(_, t) => {
                out.extend(t.vars().cloned());
            }
            Atom::BoolVar(v) => {
                out.insert(v.clone());
            }
            Atom::True | Atom::False => {}
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::True => write!(f, "true"),
            Atom::False => write!(f, "false"),
            Atom::BoolVar(v) => write!(f, "{v}"),
            Atom::Compare(t, op) => write!(f, "{t} {op} 0"),
            Atom::Divides(m, t) => write!(f, "{m} | {t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(TimedVar, Box<Formula>),
    Forall(TimedVar, Box<Formula>),
}

impl Formula {
    pub fn truth(b: bool) -> Formula {
        Formula::Atom(if b { Atom::True } else { Atom::False })
    }

    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn compare(term: LinearTerm, op: CompareOp) -> Formula {
        Formula::Atom(Atom::compare(term, op))
    }

    /// `lhs op rhs`, moved to the canonical `lhs - rhs op 0` form.
    pub fn cmp(lhs: LinearTerm, op: CompareOp, rhs: LinearTerm) -> Formula {
        Formula::compare(lhs.sub(&rhs), op)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Atom(Atom::True) => Formula::truth(false),
            Formula::Atom(Atom::False) => Formula::truth(true),
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction; flattens nested `And`s, drops `true`, collapses `false`.
    pub fn and(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for item in items {
            match item {
                Formula::Atom(Atom::True) => {}
                Formula::Atom(Atom::False) => return Formula::truth(false),
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::truth(true),
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction; flattens nested `Or`s, drops `false`, collapses `true`.
    pub fn or(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for item in items {
            match item {
                Formula::Atom(Atom::False) => {}
                Formula::Atom(Atom::True) => return Formula::truth(true),
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Formula::truth(false),
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: TimedVar, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: TimedVar, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Atom(Atom::True))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::Atom(Atom::False))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_quantifier_free()),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Free variables of the formula.
    pub fn free_vars(&self) -> BTreeSet<TimedVar> {
        fn walk(f: &Formula, bound: &mut Vec<TimedVar>, out: &mut BTreeSet<TimedVar>) {
            match f {
                Formula::Atom(a) => {
                    let mut vars = BTreeSet::new();
                    a.vars(&mut vars);
                    out.extend(vars.into_iter().filter(|v| !bound.contains(v)));
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(fs) | Formula::Or(fs) => {
                    for g in fs {
                        walk(g, bound, out);
                    }
                }
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Exists(v, body) | Formula::Forall(v, body) => {
                    bound.push(v.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// All variables, free and bound.
    pub fn all_vars(&self) -> BTreeSet<TimedVar> {
        fn walk(f: &Formula, out: &mut BTreeSet<TimedVar>) {
            match f {
                Formula::Atom(a) => a.vars(out),
                Formula::Not(g) => walk(g, out),
                Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| walk(g, out)),
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Exists(v, body) | Formula::Forall(v, body) => {
                    out.insert(v.clone());
                    walk(body, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(fs) | Formula::Or(fs) => {
                for g in fs {
                    g.visit_atoms(f);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => body.visit_atoms(f),
        }
    }

    /// Rebuilds the formula with every atom mapped through `map`.
    pub fn map_atoms(&self, map: &impl Fn(&Atom) -> Formula) -> Formula {
        match self {
            Formula::Atom(a) => map(a),
            Formula::Not(g) => Formula::not(g.map_atoms(map)),
            Formula::And(fs) => Formula::and(fs.iter().map(|g| g.map_atoms(map))),
            Formula::Or(fs) => Formula::or(fs.iter().map(|g| g.map_atoms(map))),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(map), b.map_atoms(map)),
            Formula::Iff(a, b) => Formula::iff(a.map_atoms(map), b.map_atoms(map)),
            Formula::Exists(v, body) => Formula::exists(v.clone(), body.map_atoms(map)),
            Formula::Forall(v, body) => Formula::forall(v.clone(), body.map_atoms(map)),
        }
    }

    /// Replaces every occurrence of numeric variable `v` by the term `t`.
    ///
    /// `v` must not be bound in the formula, and `t` must not mention any
    /// variable that is bound where `v` occurs.
    pub fn substitute(&self, v: &TimedVar, t: &LinearTerm) -> Result<Formula> {
        fn walk(f: &Formula, v: &TimedVar, t: &LinearTerm) -> Result<Formula> {
            match f {
                Formula::Atom(a) => Ok(Formula::Atom(match a {
                    Atom::Compare(term, op) => Atom::compare(term.substitute(v, t), *op),
                    Atom::Divides(m, term) => Atom::divides(m.clone(), term.substitute(v, t)),
                    other => other.clone(),
                })),
                Formula::Not(g) => Ok(Formula::not(walk(g, v, t)?)),
                Formula::And(fs) => Ok(Formula::and(
                    fs.iter()
                        .map(|g| walk(g, v, t))
                        .collect::<Result<Vec<_>>>()?,
                )),
                Formula::Or(fs) => Ok(Formula::or(
                    fs.iter()
                        .map(|g| walk(g, v, t))
                        .collect::<Result<Vec<_>>>()?,
                )),
                Formula::Implies(a, b) => Ok(Formula::implies(walk(a, v, t)?, walk(b, v, t)?)),
                Formula::Iff(a, b) => Ok(Formula::iff(walk(a, v, t)?, walk(b, v, t)?)),
                Formula::Exists(w, body) | Formula::Forall(w, body) => {
                    if w == v {
                        return Err(Error::Capture { var: v.to_string() });
                    }
                    if t.mentions(w) {
                        return Err(Error::Capture { var: w.to_string() });
                    }
                    let inner = walk(body, v, t)?;
                    Ok(match f {
                        Formula::Exists(..) => Formula::exists(w.clone(), inner),
                        _ => Formula::forall(w.clone(), inner),
                    })
                }
            }
        }
        walk(self, v, t)
    }

    /// Replaces a boolean variable by a truth constant.
    pub fn substitute_bool(&self, v: &TimedVar, value: bool) -> Formula {
        self.map_atoms(&|a| match a {
            Atom::BoolVar(w) if w == v => Formula::truth(value),
            other => Formula::Atom(other.clone()),
        })
    }

    /// Shifts every relative index by `delta`. Absolute indices are rejected.
    pub fn shift(&self, delta: i64) -> Result<Formula> {
        if delta == 0 {
            return Ok(self.clone());
        }
        self.try_map_vars(&|v| shift_var(v, delta))
    }

    /// Re-indexes a relative formula at a concrete step: `Relative(j)` becomes
    /// `Absolute(anchor + j)`. Fails if any offset falls below step 0.
    pub fn instantiate_at(&self, anchor: i64) -> Result<Formula> {
        self.try_map_vars(&|v| match v.index {
            TimeIndex::Relative(j) => {
                let step = anchor + j;
                if step < 0 {
                    Err(Error::ShiftDomain { var: v.to_string() })
                } else {
                    Ok(TimedVar::abs(v.name.clone(), step as u64, v.sort))
                }
            }
            TimeIndex::Absolute(_) => Err(Error::ShiftDomain { var: v.to_string() }),
        })
    }

    /// Re-indexes an absolute formula relatively: `Absolute(s)` becomes
    /// `Relative(s - anchor)`.
    pub fn relativize(&self, anchor: i64) -> Result<Formula> {
        self.try_map_vars(&|v| match v.index {
            TimeIndex::Absolute(s) => Ok(TimedVar::rel(v.name.clone(), s as i64 - anchor, v.sort)),
            TimeIndex::Relative(_) => Err(Error::ShiftDomain { var: v.to_string() }),
        })
    }

    pub fn try_map_vars(&self, map: &impl Fn(&TimedVar) -> Result<TimedVar>) -> Result<Formula> {
        let remap_term = |t: &LinearTerm| -> Result<LinearTerm> {
            let mut out = LinearTerm::constant(t.constant_part().clone());
            for (v, c) in t.coeffs() {
                out.add_term(c.clone(), map(v)?);
            }
            Ok(out)
        };
        match self {
            Formula::Atom(a) => Ok(Formula::Atom(match a {
                Atom::Compare(t, op) => Atom::Compare(remap_term(t)?, *op),
                Atom::Divides(m, t) => Atom::Divides(m.clone(), remap_term(t)?),
                Atom::BoolVar(v) => Atom::BoolVar(map(v)?),
                Atom::True => Atom::True,
                Atom::False => Atom::False,
            })),
            Formula::Not(g) => Ok(Formula::not(g.try_map_vars(map)?)),
            Formula::And(fs) => Ok(Formula::and(
                fs.iter()
                    .map(|g| g.try_map_vars(map))
                    .collect::<Result<Vec<_>>>()?,
            )),
            Formula::Or(fs) => Ok(Formula::or(
                fs.iter()
                    .map(|g| g.try_map_vars(map))
                    .collect::<Result<Vec<_>>>()?,
            )),
            Formula::Implies(a, b) => {
                Ok(Formula::implies(a.try_map_vars(map)?, b.try_map_vars(map)?))
            }
            Formula::Iff(a, b) => Ok(Formula::iff(a.try_map_vars(map)?, b.try_map_vars(map)?)),
            Formula::Exists(v, body) => Ok(Formula::exists(map(v)?, body.try_map_vars(map)?)),
            Formula::Forall(v, body) => Ok(Formula::forall(map(v)?, body.try_map_vars(map)?)),
        }
    }

    /// Renames signals throughout, keeping indices and sorts.
    pub fn rename(&self, map: &impl Fn(&str) -> String) -> Formula {
        self.try_map_vars(&|v| Ok(TimedVar::new(map(&v.name), v.index, v.sort)))
            .expect("rename cannot fail")
    }

    /// Property order: max minus min relative offset over all variables,
    /// 0 when no variables occur.
    pub fn order(&self) -> Result<u64> {
        let vars = self.all_vars();
        let mut min = i64::MAX;
        let mut max = i64::MIN;
        for v in &vars {
            match v.index {
                TimeIndex::Relative(j) => {
                    min = min.min(j);
                    max = max.max(j);
                }
                TimeIndex::Absolute(_) => return Err(Error::ShiftDomain { var: v.to_string() }),
            }
        }
        if min == i64::MAX {
            Ok(0)
        } else {
            Ok((max - min) as u64)
        }
    }

    /// Largest relative offset present, if any.
    pub fn max_offset(&self) -> Option<i64> {
        self.all_vars()
            .iter()
            .filter_map(|v| match v.index {
                TimeIndex::Relative(j) => Some(j),
                TimeIndex::Absolute(_) => None,
            })
            .max()
    }

    pub fn min_offset(&self) -> Option<i64> {
        self.all_vars()
            .iter()
            .filter_map(|v| match v.index {
                TimeIndex::Relative(j) => Some(j),
                TimeIndex::Absolute(_) => None,
            })
            .min()
    }

    /// Standard semantics on quantifier-free formulas.
    pub fn evaluate(&self, asg: &Assignment) -> Result<bool> {
        match self {
            Formula::Atom(a) => a.evaluate(asg),
            Formula::Not(f) => Ok(!f.evaluate(asg)?),
            Formula::And(fs) => {
                for f in fs {
                    if !f.evaluate(asg)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if f.evaluate(asg)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Implies(a, b) => Ok(!a.evaluate(asg)? || b.evaluate(asg)?),
            Formula::Iff(a, b) => Ok(a.evaluate(asg)? == b.evaluate(asg)?),
            Formula::Exists(..) | Formula::Forall(..) => {
                Err(Error::Contract("evaluate on quantified formula".into()))
            }
        }
    }

    /// Checks sort discipline: no signal used under two sorts, no boolean in
    /// linear terms, divisibility atoms over integer variables only.
    pub fn well_sorted(&self) -> Result<()> {
        let mut sorts: BTreeMap<(String, TimeIndex), Sort> = BTreeMap::new();
        let mut check = |v: &TimedVar| -> Result<()> {
            let key = (v.name.clone(), v.index);
            match sorts.get(&key) {
                Some(s) if *s != v.sort => Err(Error::Sort {
                    var: v.to_string(),
                    detail: format!("used as both {s} and {}", v.sort),
                }),
                _ => {
                    sorts.insert(key, v.sort);
                    Ok(())
                }
            }
        };
        let mut result = Ok(());
        self.visit_atoms(&mut |a| {
            if result.is_err() {
                return;
            }
            result = (|| {
                match a {
                    Atom::Compare(t, _) => {
                        let mut mix = BTreeSet::new();
                        for v in t.vars() {
                            check(v)?;
                            if v.sort == Sort::Bool {
                                return Err(Error::Sort {
                                    var: v.to_string(),
                                    detail: "boolean variable in linear term".into(),
                                });
                            }
                            mix.insert(v.sort);
                        }
                        if mix.len() > 1 {
                            return Err(Error::Sort {
                                var: t.vars().next().unwrap().to_string(),
                                detail: "mixed real/integer term".into(),
                            });
                        }
                    }
                    Atom::Divides(_, t) => {
                        for v in t.vars() {
                            check(v)?;
                            if v.sort != Sort::Int {
                                return Err(Error::Sort {
                                    var: v.to_string(),
                                    detail: "divisibility over non-integer variable".into(),
                                });
                            }
                        }
                    }
                    Atom::BoolVar(v) => {
                        check(v)?;
                        if v.sort != Sort::Bool {
                            return Err(Error::Sort {
                                var: v.to_string(),
                                detail: "non-boolean variable used as atom".into(),
                            });
                        }
                    }
                    Atom::True | Atom::False => {}
                }
                Ok(())
            })();
        });
        result
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "not ({g})"),
            Formula::And(fs) => {
                let parts: Vec<String> = fs.iter().map(|g| format!("({g})")).collect();
                write!(f, "{}", parts.join(" and "))
            }
            Formula::Or(fs) => {
                let parts: Vec<String> = fs.iter().map(|g| format!("({g})")).collect();
                write!(f, "{}", parts.join(" or "))
            }
            Formula::Implies(a, b) => write!(f, "({a}) => ({b})"),
            Formula::Iff(a, b) => write!(f, "({a}) <=> ({b})"),
            Formula::Exists(v, body) => write!(f, "exists {v}. ({body})"),
            Formula::Forall(v, body) => write!(f, "forall {v}. ({body})"),
        }
    }
}

fn shift_var(v: &TimedVar, delta: i64) -> Result<TimedVar> {
    match v.index {
        TimeIndex::Relative(j) => Ok(TimedVar::rel(v.name.clone(), j + delta, v.sort)),
        TimeIndex::Absolute(_) => Err(Error::ShiftDomain { var: v.to_string() }),
    }
}

/// Concrete value carried by an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Num(Rational),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(r) => write!(f, "{r}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Map from variables to values; integer-sorted variables always map to
/// whole numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<TimedVar, Value>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn set(&mut self, v: TimedVar, value: Value) {
        if let Value::Num(r) = &value {
            debug_assert!(
                v.sort != Sort::Int || r.is_integer(),
                "non-integer value for integer variable {v}"
            );
        }
        self.0.insert(v, value);
    }

    pub fn set_num(&mut self, v: TimedVar, value: Rational) {
        self.set(v, Value::Num(value));
    }

    pub fn set_bool(&mut self, v: TimedVar, value: bool) {
        self.set(v, Value::Bool(value));
    }

    pub fn get(&self, v: &TimedVar) -> Option<&Value> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TimedVar, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn merged(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        for (v, val) in other.iter() {
            out.0.insert(v.clone(), val.clone());
        }
        out
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, x)| format!("{v} = {x}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
