//! Quantifier elimination for linear integer arithmetic (Presburger) via
//! Cooper's algorithm.
//!
//! Eliminating `exists x. F` proceeds by normalizing every occurrence of `x`
//! to a common coefficient lambda, switching to the unit-coefficient variable
//! `x' = lambda*x` guarded by `lambda | x'`, and replacing the formula with
//! the minus-infinity disjunct plus one disjunct per lower-boundary term `b`
//! and residue `j in [1, delta]`, `delta` the lcm of all divisibility moduli.
//! Divisibility atoms are where the `cong`-style side conditions come from.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::formula::{Assignment, Atom, CompareOp, Formula, LinearTerm, Sort, TimedVar, Value};
use crate::qe_real;
use crate::rational::Rational;
use crate::simplify::simplify;

/// Guard against the worst-case disjunct explosion of Cooper's method.
#[derive(Debug, Clone, Copy)]
pub struct CooperConfig {
    pub disjunct_cap: usize,
}

impl Default for CooperConfig {
    fn default() -> Self {
        CooperConfig {
            disjunct_cap: 100_000,
        }
    }
}

/// Eliminates one existentially quantified integer variable. Real- or
/// bool-sorted variables are routed to the real engine.
pub fn eliminate_exists_int(v: &TimedVar, f: &Formula) -> Result<Formula> {
    eliminate_exists_int_with(v, f, &CooperConfig::default())
}

pub fn eliminate_exists_int_with(v: &TimedVar, f: &Formula, cfg: &CooperConfig) -> Result<Formula> {
    if v.sort != Sort::Int {
        return qe_real::eliminate_exists(v, f);
    }
    let f = f.normalize_nnf()?;
    if !f.free_vars().contains(v) {
        return Ok(simplify(&f));
    }
    if let Some(result) = gauss_unit_equality(v, &f)? {
        return Ok(simplify(&result));
    }
    let result = cooper(v, &f, cfg)?;
    Ok(simplify(&result))
}

/// Decides a closed, integer-sorted sentence by full elimination.
pub fn decide_sentence_int(f: &Formula) -> Result<bool> {
    if !f.free_vars().is_empty() {
        return Err(Error::Contract(
            "decide_sentence_int on open formula".into(),
        ));
    }
    let result = qe_real::eliminate_all(f)?;
    if result.is_true() {
        Ok(true)
    } else if result.is_false() {
        Ok(false)
    } else {
        Err(Error::Contract(format!("sentence did not fold: {result}")))
    }
}

/// A conjunct equality with a unit coefficient substitutes the variable away
/// exactly; connection equalities always take this path.
fn gauss_unit_equality(v: &TimedVar, f: &Formula) -> Result<Option<Formula>> {
    let conjuncts: Vec<&Formula> = match f {
        Formula::And(fs) => fs.iter().collect(),
        other => vec![other],
    };
    for (i, lit) in conjuncts.iter().enumerate() {
        let Formula::Atom(Atom::Compare(t, CompareOp::Eq)) = lit else {
            continue;
        };
        if !t.mentions(v) {
            continue;
        }
        let a = t.coeff_of(v);
        if !(a.is_one() || a == Rational::from_int(-1)) {
            continue;
        }
        let solution = t.solve_for(v).expect("mentions v");
        let mut rest = Vec::with_capacity(conjuncts.len() - 1);
        for (j, other) in conjuncts.iter().enumerate() {
            if i != j {
                rest.push((*other).substitute(v, &solution)?);
            }
        }
        return Ok(Some(Formula::and(rest)));
    }
    Ok(None)
}

struct CooperAtoms {
    /// formula over the unit-coefficient stand-in
    unit: Formula,
    stand_in: TimedVar,
}

fn cooper(v: &TimedVar, f: &Formula, cfg: &CooperConfig) -> Result<Formula> {
    let CooperAtoms { unit, stand_in } = unit_coefficient_form(v, f)?;

    // delta: lcm of the moduli of divisibility atoms over the stand-in
    let mut delta = BigInt::one();
    let mut lower_boundaries: Vec<LinearTerm> = Vec::new();
    collect(&unit, &stand_in, &mut delta, &mut lower_boundaries)?;
    lower_boundaries.sort();
    lower_boundaries.dedup();

    let branch_count = (BigInt::from(lower_boundaries.len() + 1)) * &delta;
    if branch_count > BigInt::from(cfg.disjunct_cap) {
        return Err(Error::Resource(format!(
            "Cooper expansion needs {branch_count} branches (cap {})",
            cfg.disjunct_cap
        )));
    }
    let delta_u = delta.to_u64().expect("checked against cap");

    let mut disjuncts = Vec::new();
    for j in 1..=delta_u {
        disjuncts.push(minus_infinity(&unit, &stand_in, j)?);
    }
    for b in &lower_boundaries {
        for j in 1..=delta_u {
            let mut target = b.clone();
            target.add_constant(Rational::from_int(j as i64));
            disjuncts.push(substitute_unit(&unit, &stand_in, &target)?);
        }
    }
    Ok(Formula::or(disjuncts))
}

/// Rewrites every atom containing `v` so the variable appears with
/// coefficient exactly +1 or -1 (as `stand_in`), adding the
/// `lambda | stand_in` constraint. Comparison atoms are normalized to
/// `t < 0`, `t = 0`, or `t != 0`.
fn unit_coefficient_form(v: &TimedVar, f: &Formula) -> Result<CooperAtoms> {
    let mut lambda = BigInt::one();
    let mut seen = false;
    let mut bad: Option<Error> = None;
    let mut scan = |t: &LinearTerm| {
        if !t.mentions(v) {
            return;
        }
        if !t.is_integer_cleared() {
            bad = Some(Error::Contract(format!(
                "non-integer coefficients in integer atom over {v}"
            )));
            return;
        }
        seen = true;
        lambda = lambda.lcm(t.coeff_of(v).numer());
    };
    walk_atoms(f, &mut |a| match a {
        Atom::Compare(t, _) | Atom::Divides(_, t) => scan(t),
        _ => {}
    });
    if let Some(e) = bad {
        return Err(e);
    }
    lambda = lambda.abs();
    debug_assert!(seen, "cooper called on a formula without the variable");

    let names: std::collections::BTreeSet<String> =
        f.all_vars().into_iter().map(|w| w.name).collect();
    let mut stand_in_name = format!("{}'", v.name);
    while names.contains(&stand_in_name) {
        stand_in_name.push('\'');
    }
    let stand_in = TimedVar::new(stand_in_name, v.index, Sort::Int);

    let lam = Rational::from_bigint(lambda.clone());
    let mapped = f.map_atoms(&|a| match a {
        Atom::Compare(t, op) if t.mentions(v) => {
            let a_coeff = t.coeff_of(v);
            let scale = &lam / &a_coeff.abs();
            let scaled = t.scale(&scale);
            let rest = scaled.substitute(v, &LinearTerm::zero());
            let sign = if a_coeff.is_negative() { -1 } else { 1 };
            let mut term = rest;
            term.add_term(Rational::from_int(sign), stand_in.clone());
            // raw atoms: gcd-normalization must not touch the unit coefficient
            match op {
                CompareOp::Lt => Formula::Atom(Atom::Compare(term, CompareOp::Lt)),
                CompareOp::Le => {
                    term.add_constant(Rational::from_int(-1));
                    Formula::Atom(Atom::Compare(term, CompareOp::Lt))
                }
                CompareOp::Gt => Formula::Atom(Atom::Compare(
                    term.scale(&Rational::from_int(-1)),
                    CompareOp::Lt,
                )),
                CompareOp::Ge => {
                    let mut neg = term.scale(&Rational::from_int(-1));
                    neg.add_constant(Rational::from_int(-1));
                    Formula::Atom(Atom::Compare(neg, CompareOp::Lt))
                }
                CompareOp::Eq => Formula::Atom(Atom::Compare(term, CompareOp::Eq)),
                CompareOp::Ne => Formula::Atom(Atom::Compare(term, CompareOp::Ne)),
            }
        }
        Atom::Divides(m, t) if t.mentions(v) => {
            let a_coeff = t.coeff_of(v);
            let scale = &lam / &a_coeff.abs();
            let scaled = t.scale(&scale);
            let rest = scaled.substitute(v, &LinearTerm::zero());
            let sign = if a_coeff.is_negative() { -1 } else { 1 };
            let mut term = rest;
            term.add_term(Rational::from_int(sign), stand_in.clone());
            let m_scaled = m * scale.numer();
            Formula::Atom(Atom::Divides(m_scaled, term))
        }
        other => Formula::Atom(other.clone()),
    });

    let with_guard = if lambda.is_one() {
        mapped
    } else {
        Formula::and([
            mapped,
            Formula::Atom(Atom::Divides(lambda, LinearTerm::var(stand_in.clone()))),
        ])
    };
    Ok(CooperAtoms {
        unit: with_guard,
        stand_in,
    })
}

fn walk_atoms(f: &Formula, visit: &mut impl FnMut(&Atom)) {
    match f {
        Formula::Atom(a) => visit(a),
        Formula::Not(g) => walk_atoms(g, visit),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| walk_atoms(g, visit)),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            walk_atoms(a, visit);
            walk_atoms(b, visit);
        }
        Formula::Exists(_, g) | Formula::Forall(_, g) => walk_atoms(g, visit),
    }
}

/// Collects delta and the lower-boundary substitution terms of the
/// unit-coefficient formula.
fn collect(
    f: &Formula,
    u: &TimedVar,
    delta: &mut BigInt,
    lower: &mut Vec<LinearTerm>,
) -> Result<()> {
    let mut res = Ok(());
    walk_atoms(f, &mut |a| {
        if res.is_err() {
            return;
        }
        match a {
            Atom::Compare(t, op) if t.mentions(u) => {
                let rest = t.substitute(u, &LinearTerm::zero());
                let c = t.coeff_of(u);
                debug_assert!(c.abs().is_one());
                match (op, c.is_negative()) {
                    // -u + r < 0: u > r, boundary r
                    (CompareOp::Lt, true) => lower.push(rest),
                    // u + r < 0: upper bound, no boundary
                    (CompareOp::Lt, false) => {}
                    // u + r = 0: u = -r, boundary -r - 1
                    (CompareOp::Eq, neg) => {
                        let mut b = rest.scale(&Rational::from_int(if neg { 1 } else { -1 }));
                        b.add_constant(Rational::from_int(-1));
                        lower.push(b);
                    }
                    // u + r != 0: boundary -r
                    (CompareOp::Ne, neg) => {
                        lower.push(rest.scale(&Rational::from_int(if neg { 1 } else { -1 })));
                    }
                    _ => {
                        res = Err(Error::Contract(format!(
                            "unexpected operator {op} in Cooper normal form"
                        )));
                    }
                }
            }
            Atom::Divides(m, t) if t.mentions(u) => {
                *delta = delta.lcm(m);
            }
            _ => {}
        }
    });
    res
}

/// The minus-infinity disjunct: comparisons over `u` fix their truth value,
/// divisibility atoms keep only the residue `j`.
fn minus_infinity(f: &Formula, u: &TimedVar, j: u64) -> Result<Formula> {
    let jr = Rational::from_int(j as i64);
    Ok(f.map_atoms(&|a| match a {
        Atom::Compare(t, op) if t.mentions(u) => {
            let negative = t.coeff_of(u).is_negative();
            match (op, negative) {
                (CompareOp::Lt, false) => Formula::truth(true),
                (CompareOp::Lt, true) => Formula::truth(false),
                (CompareOp::Eq, _) => Formula::truth(false),
                (CompareOp::Ne, _) => Formula::truth(true),
                _ => Formula::truth(false),
            }
        }
        Atom::Divides(m, t) if t.mentions(u) => {
            let replaced = t.substitute(u, &LinearTerm::constant(jr.clone()));
            Formula::Atom(Atom::divides(m.clone(), replaced))
        }
        other => Formula::Atom(other.clone()),
    }))
}

/// Substitutes `u := target` and re-canonicalizes every touched atom.
fn substitute_unit(f: &Formula, u: &TimedVar, target: &LinearTerm) -> Result<Formula> {
    Ok(f.map_atoms(&|a| match a {
        Atom::Compare(t, op) if t.mentions(u) => {
            Formula::Atom(Atom::compare(t.substitute(u, target), *op))
        }
        Atom::Divides(m, t) if t.mentions(u) => {
            Formula::Atom(Atom::divides(m.clone(), t.substitute(u, target)))
        }
        other => Formula::Atom(other.clone()),
    }))
}

/// Concrete integer witness for `exists vars. f`, by elimination plus
/// bounded enumeration over the boundary candidates.
pub fn int_witness(f: &Formula, vars: &[TimedVar]) -> Result<Option<Assignment>> {
    int_witness_with(f, vars, &CooperConfig::default())
}

pub fn int_witness_with(
    f: &Formula,
    vars: &[TimedVar],
    cfg: &CooperConfig,
) -> Result<Option<Assignment>> {
    let Some(v) = vars.first() else {
        if !f.free_vars().is_empty() {
            return Err(Error::Contract("int_witness leaves free variables".into()));
        }
        return Ok(if f.evaluate(&Assignment::new())? {
            Some(Assignment::new())
        } else {
            None
        });
    };
    if v.sort == Sort::Bool {
        for value in [true, false] {
            let g = simplify(&f.substitute_bool(v, value));
            if let Some(mut asg) = int_witness_with(&g, &vars[1..], cfg)? {
                asg.set_bool(v.clone(), value);
                return Ok(Some(asg));
            }
        }
        return Ok(None);
    }
    let g = eliminate_exists_int_with(v, f, cfg)?;
    let Some(rest) = int_witness_with(&g, &vars[1..], cfg)? else {
        return Ok(None);
    };
    // ground out the already-chosen variables, then try boundary candidates
    let mut grounded = f.clone();
    for (w, value) in rest.iter() {
        grounded = match value {
            Value::Num(r) => grounded.substitute(w, &LinearTerm::constant(r.clone()))?,
            Value::Bool(b) => grounded.substitute_bool(w, *b),
        };
    }
    for candidate in candidate_values(&grounded, v, cfg)? {
        let mut asg = rest.clone();
        asg.set_num(v.clone(), Rational::from_bigint(candidate));
        if f.evaluate(&asg)? {
            return Ok(Some(asg));
        }
    }
    Ok(None)
}

/// Candidate integers for `v` in a formula ground except for `v`: every atom
/// boundary point shifted by up to the period, plus low points covering the
/// minus-infinity residues.
fn candidate_values(f: &Formula, v: &TimedVar, cfg: &CooperConfig) -> Result<Vec<BigInt>> {
    let mut period = BigInt::one();
    let mut boundaries: Vec<BigInt> = Vec::new();
    let mut res = Ok(());
    walk_atoms(f, &mut |a| {
        if res.is_err() {
            return;
        }
        match a {
            Atom::Compare(t, _) if t.mentions(v) => {
                let a_coeff = t.coeff_of(v);
                period = period.lcm(a_coeff.numer());
                let rest = t.substitute(v, &LinearTerm::zero());
                if !rest.is_constant() {
                    res = Err(Error::Contract(
                        "candidate scan on non-ground formula".into(),
                    ));
                    return;
                }
                let point = -(rest.constant_part() / &a_coeff);
                boundaries.push(point.floor());
                boundaries.push(point.ceil());
            }
            Atom::Divides(m, t) if t.mentions(v) => {
                period = period.lcm(m);
                let a_coeff = t.coeff_of(v);
                period = period.lcm(a_coeff.numer());
            }
            _ => {}
        }
    });
    res?;
    period = period.abs();
    let period_u = period
        .to_u64()
        .ok_or_else(|| Error::Resource("candidate period exceeds enumeration budget".into()))?;
    if period_u.saturating_mul(boundaries.len() as u64 + 2) > cfg.disjunct_cap as u64 {
        return Err(Error::Resource("candidate enumeration exceeds cap".into()));
    }

    let low_anchor = boundaries
        .iter()
        .min()
        .cloned()
        .unwrap_or_else(BigInt::zero);
    let mut candidates = Vec::new();
    for b in &boundaries {
        for off in 0..=period_u {
            candidates.push(b + BigInt::from(off));
            candidates.push(b - BigInt::from(off));
        }
    }
    // cover the minus-infinity residue classes below every boundary
    for off in 0..=period_u {
        candidates.push(&low_anchor - &period - BigInt::from(off));
        candidates.push(BigInt::from(off));
        candidates.push(-BigInt::from(off));
    }
    candidates.sort();
    candidates.dedup();
    Ok(candidates)
}
