//! Quantifier elimination for linear real arithmetic with booleans.
//!
//! Strategy per eliminated variable: normalize to DNF; within each disjunct,
//! substitute out the variable if an equality pins it (Gauss step), otherwise
//! pair every lower bound with every upper bound (Fourier–Motzkin; the result
//! is strict iff either side is strict). Boolean variables disappear by
//! Shannon expansion, which on DNF disjuncts is literal dropping. Universal
//! quantifiers go through the `forall v. f == not exists v. not f` dual, and
//! integer-sorted quantifiers are routed to [`crate::qe_int`].
//!
//! The witness half reconstructs satisfying values for eliminated variables,
//! using nonstandard constants (indexed infinities and an infinitesimal
//! epsilon) where the satisfying set has no interior rational description,
//! plus a refinement loop that turns those into concrete rationals.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Atom, CompareOp, Formula, LinearTerm, Sort, TimedVar, Value};
use crate::qe_int;
use crate::rational::Rational;
use crate::simplify::simplify;

/// Eliminates one existentially quantified real- or bool-sorted variable
/// from a quantifier-free formula.
pub fn eliminate_exists(v: &TimedVar, f: &Formula) -> Result<Formula> {
    eliminate_block(std::slice::from_ref(v), f)
}

/// Eliminates a block of existential variables (reals and booleans) in one
/// DNF pass. Within each disjunct, variables go fewest-occurrences-first.
pub fn eliminate_block(vars: &[TimedVar], f: &Formula) -> Result<Formula> {
    for v in vars {
        if v.sort == Sort::Int {
            return Err(Error::Contract(format!(
                "integer variable {v} in real elimination block"
            )));
        }
    }
    let mut out = Vec::new();
    for disjunct in f.dnf_disjuncts()? {
        if let Some(residue) = eliminate_from_conjunct(vars, disjunct)? {
            out.push(Formula::and(residue));
        }
    }
    Ok(simplify(&Formula::or(out)))
}

/// Eliminates every quantifier in `f`, innermost first, dispatching on the
/// sort of each bound variable. On a closed formula the result folds to a
/// truth constant.
pub fn eliminate_all(f: &Formula) -> Result<Formula> {
    let g = eliminate_inner(f)?;
    Ok(simplify(&g))
}

fn eliminate_inner(f: &Formula) -> Result<Formula> {
    match f {
        Formula::Atom(_) => Ok(f.clone()),
        Formula::Not(g) => Ok(Formula::not(eliminate_inner(g)?)),
        Formula::And(fs) => Ok(Formula::and(
            fs.iter().map(eliminate_inner).collect::<Result<Vec<_>>>()?,
        )),
        Formula::Or(fs) => Ok(Formula::or(
            fs.iter().map(eliminate_inner).collect::<Result<Vec<_>>>()?,
        )),
        Formula::Implies(a, b) => Ok(Formula::implies(eliminate_inner(a)?, eliminate_inner(b)?)),
        Formula::Iff(a, b) => Ok(Formula::iff(eliminate_inner(a)?, eliminate_inner(b)?)),
        Formula::Exists(..) => {
            // collect a maximal exists-chain and eliminate it as a block
            let mut vars = Vec::new();
            let mut body = f;
            while let Formula::Exists(v, inner) = body {
                vars.push(v.clone());
                body = inner;
            }
            let inner = eliminate_inner(body)?;
            eliminate_exists_block_mixed(&vars, &inner)
        }
        Formula::Forall(v, body) => {
            let inner = eliminate_inner(body)?;
            let negated = eliminate_one(v, &simplify(&Formula::not(inner)))?;
            Ok(Formula::not(negated))
        }
    }
}

/// Existential elimination of one variable, dispatched on sort.
pub fn eliminate_one(v: &TimedVar, f: &Formula) -> Result<Formula> {
    match v.sort {
        Sort::Real | Sort::Bool => eliminate_exists(v, f),
        Sort::Int => qe_int::eliminate_exists_int(v, f),
    }
}

fn eliminate_exists_block_mixed(vars: &[TimedVar], body: &Formula) -> Result<Formula> {
    let (ints, rest): (Vec<_>, Vec<_>) = vars.iter().cloned().partition(|v| v.sort == Sort::Int);
    let mut g = body.clone();
    for v in ints.iter().rev() {
        g = qe_int::eliminate_exists_int(v, &g)?;
    }
    if rest.is_empty() {
        Ok(g)
    } else {
        eliminate_block(&rest, &g)
    }
}

/// Validity of an arbitrary formula: the universal closure over its free
/// variables must eliminate to `true`.
pub fn is_valid(f: &Formula) -> Result<bool> {
    let mut closed = f.clone();
    for v in f.free_vars() {
        closed = Formula::forall(v, closed);
    }
    let result = eliminate_all(&closed)?;
    if result.is_true() {
        Ok(true)
    } else if result.is_false() {
        Ok(false)
    } else {
        Err(Error::Contract(format!(
            "closed formula did not fold to a constant: {result}"
        )))
    }
}

/// Logical equivalence, decided by QE on the universally closed biconditional.
pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool> {
    is_valid(&Formula::iff(a.clone(), b.clone()))
}

/// `exists vars. f` decided to a truth value (formula must be closed after
/// eliminating `vars`).
pub fn satisfiable(vars: &[TimedVar], f: &Formula) -> Result<bool> {
    let mut closed = f.clone();
    for v in vars.iter().rev() {
        closed = Formula::exists(v.clone(), closed);
    }
    let result = eliminate_all(&closed)?;
    if result.is_true() {
        Ok(true)
    } else if result.is_false() {
        Ok(false)
    } else {
        Err(Error::Contract(format!(
            "satisfiability query left free variables: {result}"
        )))
    }
}

// ---------------------------------------------------------------------------
// conjunct-level elimination
// ---------------------------------------------------------------------------

/// Eliminates `vars` from a conjunction of literals. `None` means the
/// conjunct collapsed to `false`; the returned literal list never mentions
/// any of the variables.
fn eliminate_from_conjunct(
    vars: &[TimedVar],
    mut literals: Vec<Formula>,
) -> Result<Option<Vec<Formula>>> {
    let mut remaining: Vec<TimedVar> = vars.to_vec();
    while !remaining.is_empty() {
        // fewest occurrences first; recomputed after each elimination
        let counts: Vec<usize> = remaining
            .iter()
            .map(|v| literals.iter().filter(|l| mentions(l, v)).count())
            .collect();
        let pick = (0..remaining.len())
            .min_by_key(|&i| (counts[i], remaining[i].clone()))
            .expect("nonempty");
        let v = remaining.remove(pick);
        match eliminate_single(&v, literals)? {
            None => return Ok(None),
            Some(next) => literals = next,
        }
    }
    Ok(Some(literals))
}

fn mentions(lit: &Formula, v: &TimedVar) -> bool {
    lit.free_vars().contains(v)
}

fn eliminate_single(v: &TimedVar, literals: Vec<Formula>) -> Result<Option<Vec<Formula>>> {
    if v.sort == Sort::Bool {
        return Ok(eliminate_bool(v, literals));
    }

    // Gauss step: an equality pinning v substitutes it away
    let eq_idx = literals.iter().position(|l| match l {
        Formula::Atom(Atom::Compare(t, CompareOp::Eq)) => t.mentions(v),
        _ => false,
    });
    if let Some(i) = eq_idx {
        let Formula::Atom(Atom::Compare(t, _)) = &literals[i] else {
            unreachable!()
        };
        let solution = t.solve_for(v).expect("mentions v");
        let mut out = Vec::with_capacity(literals.len() - 1);
        for (j, lit) in literals.iter().enumerate() {
            if j == i {
                continue;
            }
            let replaced = lit.substitute(v, &solution)?;
            if replaced.is_false() {
                return Ok(None);
            }
            if !replaced.is_true() {
                out.push(replaced);
            }
        }
        return Ok(Some(out));
    }

    // Fourier–Motzkin on the inequalities
    let mut residue = Vec::new();
    let mut lowers: Vec<(LinearTerm, bool)> = Vec::new();
    let mut uppers: Vec<(LinearTerm, bool)> = Vec::new();
    for lit in literals {
        let Formula::Atom(Atom::Compare(t, op)) = &lit else {
            if mentions(&lit, v) {
                return Err(Error::Sort {
                    var: v.to_string(),
                    detail: "real variable in non-arithmetic literal".into(),
                });
            }
            residue.push(lit);
            continue;
        };
        if !t.mentions(v) {
            residue.push(lit);
            continue;
        }
        let a = t.coeff_of(v);
        // a*v + r op 0  <=>  v op' -r/a, with op' flipped when a < 0
        let bound = t
            .substitute(v, &LinearTerm::zero())
            .scale(&(&Rational::from_int(-1) / &a));
        let op = if a.is_negative() { op.flip() } else { *op };
        match op {
            CompareOp::Lt => uppers.push((bound, true)),
            CompareOp::Le => uppers.push((bound, false)),
            CompareOp::Gt => lowers.push((bound, true)),
            CompareOp::Ge => lowers.push((bound, false)),
            CompareOp::Eq | CompareOp::Ne => {
                return Err(Error::Contract(
                    "equality/disequality literal survived DNF normalization".into(),
                ))
            }
        }
    }
    for (l, sl) in &lowers {
        for (u, su) in &uppers {
            // l (<|<=) u
            let atom = Atom::compare(
                l.sub(u),
                if *sl || *su {
                    CompareOp::Lt
                } else {
                    CompareOp::Le
                },
            );
            match atom {
                Atom::True => {}
                Atom::False => return Ok(None),
                other => residue.push(Formula::Atom(other)),
            }
        }
    }
    Ok(Some(residue))
}

fn eliminate_bool(v: &TimedVar, literals: Vec<Formula>) -> Option<Vec<Formula>> {
    let pos = literals
        .iter()
        .any(|l| matches!(l, Formula::Atom(Atom::BoolVar(w)) if w == v));
    let neg = literals.iter().any(|l| match l {
        Formula::Not(inner) => matches!(&**inner, Formula::Atom(Atom::BoolVar(w)) if w == v),
        _ => false,
    });
    if pos && neg {
        return None;
    }
    Some(literals.into_iter().filter(|l| !mentions(l, v)).collect())
}

// ---------------------------------------------------------------------------
// witnesses
// ---------------------------------------------------------------------------

/// Value assigned to an eliminated variable, possibly nonstandard: an
/// infinitesimal offset from a rational base, or an indexed infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessValue {
    Finite(Rational),
    /// base plus a nonzero rational multiple of the shared infinitesimal
    FinitePlusEps {
        base: Rational,
        eps: Rational,
    },
    PosInfinity(u32),
    NegInfinity(u32),
    Truth(bool),
}

impl std::fmt::Display for WitnessValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WitnessValue::Finite(r) => write!(f, "{r}"),
            WitnessValue::FinitePlusEps { base, eps } => {
                if eps.is_negative() {
                    write!(f, "{base} - {}*eps", -eps)
                } else {
                    write!(f, "{base} + {eps}*eps")
                }
            }
            WitnessValue::PosInfinity(i) => write!(f, "+infinity{i}"),
            WitnessValue::NegInfinity(i) => write!(f, "-infinity{i}"),
            WitnessValue::Truth(b) => write!(f, "{b}"),
        }
    }
}

/// Witness map over the requested variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness(pub BTreeMap<TimedVar, WitnessValue>);

impl Witness {
    pub fn get(&self, v: &TimedVar) -> Option<&WitnessValue> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TimedVar, &WitnessValue)> {
        self.0.iter()
    }
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, x)| format!("{v} = {x}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Linear value over the nonstandard extension: a rational base plus a
/// rational multiple of eps plus rational multiples of indexed infinities.
/// Ordering: higher-indexed infinities dominate, then the base, then eps.
#[derive(Debug, Clone, PartialEq, Eq)]
struct NsValue {
    inf: BTreeMap<u32, Rational>,
    base: Rational,
    eps: Rational,
}

impl NsValue {
    fn from_rational(r: Rational) -> Self {
        NsValue {
            inf: BTreeMap::new(),
            base: r,
            eps: Rational::zero(),
        }
    }

    fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    fn eps(count: Rational) -> Self {
        NsValue {
            inf: BTreeMap::new(),
            base: Rational::zero(),
            eps: count,
        }
    }

    fn infinity(index: u32, sign: i64) -> Self {
        let mut inf = BTreeMap::new();
        inf.insert(index, Rational::from_int(sign));
        NsValue {
            inf,
            base: Rational::zero(),
            eps: Rational::zero(),
        }
    }

    fn add(&self, other: &NsValue) -> NsValue {
        let mut inf = self.inf.clone();
        for (i, c) in &other.inf {
            let e = inf.entry(*i).or_insert_with(Rational::zero);
            *e = &*e + c;
        }
        inf.retain(|_, c| !c.is_zero());
        NsValue {
            inf,
            base: &self.base + &other.base,
            eps: &self.eps + &other.eps,
        }
    }

    fn scale(&self, c: &Rational) -> NsValue {
        if c.is_zero() {
            return NsValue::zero();
        }
        NsValue {
            inf: self.inf.iter().map(|(i, a)| (*i, a * c)).collect(),
            base: &self.base * c,
            eps: &self.eps * c,
        }
    }

    fn cmp_zero(&self) -> std::cmp::Ordering {
        // highest-indexed infinity coefficient decides first
        for (_, c) in self.inf.iter().rev() {
            if !c.is_zero() {
                return c.partial_cmp(&Rational::zero()).unwrap();
            }
        }
        match self.base.partial_cmp(&Rational::zero()).unwrap() {
            std::cmp::Ordering::Equal => self.eps.partial_cmp(&Rational::zero()).unwrap(),
            ord => ord,
        }
    }

    fn le(&self, other: &NsValue) -> bool {
        !matches!(
            self.clone().sub(other).cmp_zero(),
            std::cmp::Ordering::Greater
        )
    }

    fn sub(self, other: &NsValue) -> NsValue {
        self.add(&other.scale(&Rational::from_int(-1)))
    }

    fn to_witness_value(&self) -> Option<WitnessValue> {
        if self.inf.is_empty() {
            if self.eps.is_zero() {
                return Some(WitnessValue::Finite(self.base.clone()));
            }
            return Some(WitnessValue::FinitePlusEps {
                base: self.base.clone(),
                eps: self.eps.clone(),
            });
        }
        if self.inf.len() == 1 && self.base.is_zero() && self.eps.is_zero() {
            let (i, c) = self.inf.iter().next().unwrap();
            if c.is_one() {
                return Some(WitnessValue::PosInfinity(*i));
            }
            if *c == Rational::from_int(-1) {
                return Some(WitnessValue::NegInfinity(*i));
            }
        }
        None
    }

    fn of_witness_value(w: &WitnessValue) -> Option<NsValue> {
        Some(match w {
            WitnessValue::Finite(r) => NsValue::from_rational(r.clone()),
            WitnessValue::FinitePlusEps { base, eps } => NsValue {
                inf: BTreeMap::new(),
                base: base.clone(),
                eps: eps.clone(),
            },
            WitnessValue::PosInfinity(i) => NsValue::infinity(*i, 1),
            WitnessValue::NegInfinity(i) => NsValue::infinity(*i, -1),
            WitnessValue::Truth(_) => return None,
        })
    }
}

/// Evaluates a quantifier-free formula under nonstandard witness semantics:
/// eps is positive and below every positive rational in scope, and each
/// indexed infinity dominates everything of lower index.
pub fn evaluate_nonstandard(f: &Formula, w: &Witness) -> Result<bool> {
    let mut num = BTreeMap::new();
    let mut bools = BTreeMap::new();
    for (v, val) in w.iter() {
        match val {
            WitnessValue::Truth(b) => {
                bools.insert(v.clone(), *b);
            }
            other => {
                num.insert(v.clone(), NsValue::of_witness_value(other).unwrap());
            }
        }
    }
    ns_eval(f, &num, &bools)
}

fn ns_eval_term(t: &LinearTerm, num: &BTreeMap<TimedVar, NsValue>) -> Result<NsValue> {
    let mut acc = NsValue::from_rational(t.constant_part().clone());
    for (v, c) in t.coeffs() {
        let val = num
            .get(v)
            .ok_or_else(|| Error::Unbound { var: v.to_string() })?;
        acc = acc.add(&val.scale(c));
    }
    Ok(acc)
}

fn ns_eval(
    f: &Formula,
    num: &BTreeMap<TimedVar, NsValue>,
    bools: &BTreeMap<TimedVar, bool>,
) -> Result<bool> {
    match f {
        Formula::Atom(Atom::True) => Ok(true),
        Formula::Atom(Atom::False) => Ok(false),
        Formula::Atom(Atom::BoolVar(v)) => bools
            .get(v)
            .copied()
            .ok_or_else(|| Error::Unbound { var: v.to_string() }),
        Formula::Atom(Atom::Compare(t, op)) => Ok(op.holds(ns_eval_term(t, num)?.cmp_zero())),
        Formula::Atom(Atom::Divides(m, t)) => {
            let val = ns_eval_term(t, num)?;
            if !val.inf.is_empty() || !val.eps.is_zero() {
                return Ok(false);
            }
            Ok(val.base.is_integer() && (val.base.numer() % m).is_zero())
        }
        Formula::Not(g) => Ok(!ns_eval(g, num, bools)?),
        Formula::And(fs) => {
            for g in fs {
                if !ns_eval(g, num, bools)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for g in fs {
                if ns_eval(g, num, bools)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Implies(a, b) => Ok(!ns_eval(a, num, bools)? || ns_eval(b, num, bools)?),
        Formula::Iff(a, b) => Ok(ns_eval(a, num, bools)? == ns_eval(b, num, bools)?),
        Formula::Exists(..) | Formula::Forall(..) => Err(Error::Contract(
            "nonstandard evaluation on quantified formula".into(),
        )),
    }
}

/// Extracts a witness for `exists vars. f`, or `None` when unsatisfiable.
///
/// Values are picked per DNF disjunct in reverse elimination order: the
/// pinned equality value when one exists, a strict lower bound plus eps,
/// an upper bound minus eps, zero when unbounded both ways, and an indexed
/// infinity when only a weak one-sided bound remains. Every pick is checked
/// against the disjunct under nonstandard evaluation before being kept.
pub fn extract_witness(f: &Formula, vars: &[TimedVar]) -> Result<Option<Witness>> {
    for disjunct in f.dnf_disjuncts()? {
        // eliminate left to right, recording the conjunct each variable saw
        let mut stages: Vec<Vec<Formula>> = Vec::with_capacity(vars.len());
        let mut cur = Some(disjunct);
        for v in vars {
            let here = cur.take().expect("set each round");
            stages.push(here.clone());
            cur = eliminate_single(v, here)?;
            if cur.is_none() {
                break;
            }
        }
        if !matches!(&cur, Some(rest) if rest.is_empty()) {
            continue;
        }
        if let Some(w) = assign_from_stages(vars, &stages)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn assign_from_stages(vars: &[TimedVar], stages: &[Vec<Formula>]) -> Result<Option<Witness>> {
    let mut num: BTreeMap<TimedVar, NsValue> = BTreeMap::new();
    let mut bools: BTreeMap<TimedVar, bool> = BTreeMap::new();
    let mut witness = Witness::default();
    let mut next_inf: u32 = 1;

    for i in (0..vars.len()).rev() {
        let v = &vars[i];
        let conjunct = &stages[i];
        if v.sort == Sort::Bool {
            let pos = conjunct
                .iter()
                .any(|l| matches!(l, Formula::Atom(Atom::BoolVar(w)) if w == v));
            bools.insert(v.clone(), pos);
            witness.0.insert(v.clone(), WitnessValue::Truth(pos));
            continue;
        }

        let mut pinned: Vec<NsValue> = Vec::new();
        let mut max_lower: Option<(NsValue, bool)> = None;
        let mut min_upper: Option<(NsValue, bool)> = None;
        for lit in conjunct {
            let Formula::Atom(Atom::Compare(t, op)) = lit else {
                continue;
            };
            if !t.mentions(v) {
                continue;
            }
            let a = t.coeff_of(v);
            let rest = t.substitute(v, &LinearTerm::zero());
            let bound = ns_eval_term(&rest, &num)?.scale(&(&Rational::from_int(-1) / &a));
            let op = if a.is_negative() { op.flip() } else { *op };
            match op {
                CompareOp::Eq => pinned.push(bound),
                CompareOp::Lt | CompareOp::Le => {
                    let strict = op == CompareOp::Lt;
                    min_upper = Some(match min_upper.take() {
                        None => (bound, strict),
                        Some((b0, s0)) => {
                            if bound.le(&b0) && bound != b0 {
                                (bound, strict)
                            } else if bound == b0 {
                                (b0, s0 || strict)
                            } else {
                                (b0, s0)
                            }
                        }
                    });
                }
                CompareOp::Gt | CompareOp::Ge => {
                    let strict = op == CompareOp::Gt;
                    max_lower = Some(match max_lower.take() {
                        None => (bound, strict),
                        Some((b0, s0)) => {
                            if b0.le(&bound) && bound != b0 {
                                (bound, strict)
                            } else if bound == b0 {
                                (b0, s0 || strict)
                            } else {
                                (b0, s0)
                            }
                        }
                    });
                }
                CompareOp::Ne => {}
            }
        }

        let one_eps = NsValue::eps(Rational::one());
        let mut candidates: Vec<NsValue> = Vec::new();
        candidates.extend(pinned);
        match (&max_lower, &min_upper) {
            (Some((l, strict)), None) => {
                if *strict {
                    candidates.push(l.add(&one_eps));
                } else {
                    candidates.push(l.clone());
                }
                candidates.push(NsValue::from_rational(&l.base + &Rational::one()));
            }
            (None, Some((u, strict))) => {
                candidates.push(u.clone().sub(&one_eps));
                if !*strict {
                    candidates.push(u.clone());
                }
                candidates.push(NsValue::from_rational(&u.base - &Rational::one()));
            }
            (Some((l, sl)), Some((u, su))) => {
                if *sl {
                    candidates.push(l.add(&one_eps));
                } else {
                    candidates.push(l.clone());
                }
                if *su {
                    candidates.push(u.clone().sub(&one_eps));
                } else {
                    candidates.push(u.clone());
                }
                candidates.push(l.add(u).scale(&Rational::ratio(1, 2)));
                candidates.push(NsValue::from_rational(
                    (&l.base + &u.base) * Rational::ratio(1, 2),
                ));
            }
            (None, None) => {}
        }
        candidates.push(NsValue::zero());
        // indexed infinities last: they cannot feed later pinned equalities
        match (&max_lower, &min_upper) {
            (Some(_), None) => candidates.push(NsValue::infinity(next_inf, 1)),
            (None, Some(_)) => candidates.push(NsValue::infinity(next_inf, -1)),
            _ => {}
        }

        let mut chosen = None;
        for cand in candidates {
            let Some(wv) = cand.to_witness_value() else {
                continue;
            };
            num.insert(v.clone(), cand.clone());
            let ok = conjunct
                .iter()
                .map(|l| ns_eval(l, &num, &bools))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            if ok {
                if matches!(
                    wv,
                    WitnessValue::PosInfinity(_) | WitnessValue::NegInfinity(_)
                ) {
                    next_inf += 1;
                }
                chosen = Some(wv);
                break;
            }
            num.remove(v);
        }
        match chosen {
            Some(wv) => {
                witness.0.insert(v.clone(), wv);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(witness))
}

/// Turns a nonstandard witness into a concrete satisfying assignment by
/// shrinking eps and growing the infinity stand-ins until `f` evaluates
/// true, up to 64 refinement rounds.
pub fn concretize_witness(w: &Witness, f: &Formula) -> Option<Assignment> {
    let mut scale = Rational::one();
    let mut big = largest_magnitude(f, w) + Rational::one();
    for _ in 0..64 {
        let mut asg = Assignment::new();
        let mut ok = true;
        for (v, val) in w.iter() {
            let value = match val {
                WitnessValue::Truth(b) => Value::Bool(*b),
                WitnessValue::Finite(r) => Value::Num(r.clone()),
                WitnessValue::FinitePlusEps { base, eps } => Value::Num(base + &(eps * &scale)),
                WitnessValue::PosInfinity(i) => Value::Num(inf_stand_in(&big, *i)),
                WitnessValue::NegInfinity(i) => Value::Num(-inf_stand_in(&big, *i)),
            };
            if v.sort == Sort::Int {
                match &value {
                    Value::Num(r) if r.is_integer() => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            asg.set(v.clone(), value);
        }
        if ok {
            if let Ok(true) = f.evaluate(&asg) {
                return Some(asg);
            }
        }
        scale = scale * Rational::ratio(1, 2);
        big = big * Rational::from_int(2);
    }
    None
}

fn inf_stand_in(big: &Rational, index: u32) -> Rational {
    let mut out = big.clone();
    for _ in 0..index {
        out = out * Rational::from_int(2);
    }
    out
}

fn largest_magnitude(f: &Formula, w: &Witness) -> Rational {
    let mut best = Rational::zero();
    let mut consider = |r: &Rational| {
        let a = r.abs();
        if best < a {
            best = a;
        }
    };
    fn walk(f: &Formula, consider: &mut impl FnMut(&Rational)) {
        match f {
            Formula::Atom(Atom::Compare(t, _)) | Formula::Atom(Atom::Divides(_, t)) => {
                consider(t.constant_part());
                for (_, c) in t.coeffs() {
                    consider(c);
                }
            }
            Formula::Atom(_) => {}
            Formula::Not(g) => walk(g, consider),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| walk(g, consider)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                walk(a, consider);
                walk(b, consider);
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => walk(g, consider),
        }
    }
    walk(f, &mut consider);
    for (_, val) in w.iter() {
        match val {
            WitnessValue::Finite(r) | WitnessValue::FinitePlusEps { base: r, .. } => consider(r),
            _ => {}
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(name: &str) -> TimedVar {
        TimedVar::at_k(name, Sort::Real)
    }

    fn var(name: &str) -> LinearTerm {
        LinearTerm::var(real(name))
    }

    #[test]
    fn buffer_cascade_example() {
        // exists o, i: (in1 - o < B) and (i - out2 < B) and (o = i)
        //   ==  in1 - out2 < 2B
        let (in1, out2, b) = (var("in1"), var("out2"), var("B"));
        let o = real("o");
        let i = real("i");
        let f = Formula::and([
            Formula::cmp(
                in1.clone().sub(&LinearTerm::var(o.clone())),
                CompareOp::Lt,
                b.clone(),
            ),
            Formula::cmp(
                LinearTerm::var(i.clone()).sub(&out2),
                CompareOp::Lt,
                b.clone(),
            ),
            Formula::cmp(
                LinearTerm::var(o.clone()),
                CompareOp::Eq,
                LinearTerm::var(i.clone()),
            ),
        ]);
        let g = eliminate_block(&[o, i], &f).unwrap();
        let expect = Formula::cmp(
            in1.sub(&out2),
            CompareOp::Lt,
            LinearTerm::monomial(Rational::from_int(2), real("B")),
        );
        assert!(equivalent(&g, &expect).unwrap());
    }

    #[test]
    fn equality_always_witnessable() {
        // exists x: (x = y)  ==  true
        let x = real("x");
        let f = Formula::cmp(LinearTerm::var(x.clone()), CompareOp::Eq, var("y"));
        assert!(eliminate_exists(&x, &f).unwrap().is_true());
    }

    #[test]
    fn density_of_reals() {
        // exists x: (x > b and x < a)  ==  b < a
        let x = real("x");
        let f = Formula::and([
            Formula::cmp(LinearTerm::var(x.clone()), CompareOp::Gt, var("b")),
            Formula::cmp(LinearTerm::var(x.clone()), CompareOp::Lt, var("a")),
        ]);
        let g = eliminate_exists(&x, &f).unwrap();
        let expect = Formula::cmp(var("b"), CompareOp::Lt, var("a"));
        assert!(equivalent(&g, &expect).unwrap());
    }

    #[test]
    fn forall_tautology() {
        // forall x (x >= 0 or x < 0) == true
        let x = real("x");
        let f = Formula::forall(
            x.clone(),
            Formula::or([
                Formula::compare(LinearTerm::var(x.clone()), CompareOp::Ge),
                Formula::compare(LinearTerm::var(x.clone()), CompareOp::Lt),
            ]),
        );
        assert!(eliminate_all(&f).unwrap().is_true());
    }

    #[test]
    fn forall_sum_of_negatives() {
        // forall a, b: (a<0 and b<0) => a+b<0
        let (a, b) = (real("a"), real("b"));
        let f = Formula::forall(
            a.clone(),
            Formula::forall(
                b.clone(),
                Formula::implies(
                    Formula::and([
                        Formula::compare(LinearTerm::var(a.clone()), CompareOp::Lt),
                        Formula::compare(LinearTerm::var(b.clone()), CompareOp::Lt),
                    ]),
                    Formula::compare(
                        LinearTerm::var(a.clone()).add(&LinearTerm::var(b.clone())),
                        CompareOp::Lt,
                    ),
                ),
            ),
        );
        assert!(eliminate_all(&f).unwrap().is_true());
    }

    #[test]
    fn closed_formulas_fold_to_constants() {
        let x = real("x");
        // exists x: x > 0 and x < 0
        let unsat = Formula::exists(
            x.clone(),
            Formula::and([
                Formula::compare(LinearTerm::var(x.clone()), CompareOp::Gt),
                Formula::compare(LinearTerm::var(x.clone()), CompareOp::Lt),
            ]),
        );
        assert!(eliminate_all(&unsat).unwrap().is_false());
    }

    #[test]
    fn bool_shannon() {
        // exists p: (p => x > 0) and (not p => x < 0) == x != 0-ish (x>0 or x<0)
        let p = TimedVar::at_k("p", Sort::Bool);
        let x = real("x");
        let f = Formula::and([
            Formula::implies(
                Formula::Atom(Atom::BoolVar(p.clone())),
                Formula::compare(LinearTerm::var(x.clone()), CompareOp::Gt),
            ),
            Formula::implies(
                Formula::not(Formula::Atom(Atom::BoolVar(p.clone()))),
                Formula::compare(LinearTerm::var(x.clone()), CompareOp::Lt),
            ),
        ]);
        let g = eliminate_exists(&p, &f).unwrap();
        let expect = Formula::or([
            Formula::compare(LinearTerm::var(x.clone()), CompareOp::Gt),
            Formula::compare(LinearTerm::var(x.clone()), CompareOp::Lt),
        ]);
        assert!(equivalent(&g, &expect).unwrap());
    }

    #[test]
    fn witness_strict_lower_bound() {
        // (x > 0) over {x} -> x = 0 + eps
        let x = real("x");
        let f = Formula::compare(LinearTerm::var(x.clone()), CompareOp::Gt);
        let w = extract_witness(&f, std::slice::from_ref(&x))
            .unwrap()
            .unwrap();
        assert_eq!(
            w.get(&x).unwrap(),
            &WitnessValue::FinitePlusEps {
                base: Rational::zero(),
                eps: Rational::one()
            }
        );
        assert!(evaluate_nonstandard(&f, &w).unwrap());
        // concretizes to any positive rational
        let asg = concretize_witness(&w, &f).unwrap();
        assert!(f.evaluate(&asg).unwrap());
    }

    #[test]
    fn witness_pinned_chain() {
        // (x = 7 and y <= x) over {x, y}
        let (x, y) = (real("x"), real("y"));
        let mut t = LinearTerm::var(x.clone());
        t.add_constant(Rational::from_int(-7));
        let f = Formula::and([
            Formula::compare(t, CompareOp::Eq),
            Formula::cmp(
                LinearTerm::var(y.clone()),
                CompareOp::Le,
                LinearTerm::var(x.clone()),
            ),
        ]);
        let w = extract_witness(&f, &[x.clone(), y.clone()])
            .unwrap()
            .unwrap();
        assert!(evaluate_nonstandard(&f, &w).unwrap());
        assert_eq!(
            w.get(&x).unwrap(),
            &WitnessValue::Finite(Rational::from_int(7))
        );
        let asg = concretize_witness(&w, &f).unwrap();
        assert!(f.evaluate(&asg).unwrap());
    }

    #[test]
    fn witness_unsat_is_none() {
        let x = real("x");
        let f = Formula::and([
            Formula::compare(LinearTerm::var(x.clone()), CompareOp::Gt),
            Formula::compare(LinearTerm::var(x.clone()), CompareOp::Lt),
        ]);
        assert!(extract_witness(&f, &[x]).unwrap().is_none());
    }

    #[test]
    fn concretize_one_sided_infinity() {
        // x = +inf on (x > 10) -> some rational > 10
        let x = real("x");
        let mut t = LinearTerm::var(x.clone());
        t.add_constant(Rational::from_int(-10));
        let f = Formula::compare(t, CompareOp::Ge);
        let w = extract_witness(&f, std::slice::from_ref(&x))
            .unwrap()
            .unwrap();
        let asg = concretize_witness(&w, &f).unwrap();
        assert!(f.evaluate(&asg).unwrap());
    }

    #[test]
    fn simplify_preserves_under_random_assignments() {
        // light spot check; the thorough version lives in the property suite
        let (x, y) = (real("x"), real("y"));
        let f = Formula::and([
            Formula::compare(LinearTerm::var(x.clone()), CompareOp::Lt),
            Formula::or([
                Formula::compare(LinearTerm::var(y.clone()), CompareOp::Ge),
                Formula::compare(LinearTerm::var(y.clone()), CompareOp::Ge),
            ]),
        ]);
        let s = simplify(&f);
        for xv in -2..=2 {
            for yv in -2..=2 {
                let mut asg = Assignment::new();
                asg.set_num(x.clone(), Rational::from_int(xv));
                asg.set_num(y.clone(), Rational::from_int(yv));
                assert_eq!(f.evaluate(&asg).unwrap(), s.evaluate(&asg).unwrap());
            }
        }
    }
}
