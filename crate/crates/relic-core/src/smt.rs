//! SMT-LIB 2 front end for the linear fragment: satisfiability is decided by
//! existentially closing the asserted conjunction and eliminating.
//!
//! Supported commands: `set-logic`, `set-info`, `declare-fun` (0-ary),
//! `declare-const`, `assert`, `check-sat`, `get-model`, `exit`. Terms:
//! numerals and decimals, `+ - *` (products need a constant side), `/` on
//! constants, comparisons, `and or not => ite` with boolean branches, `=` on
//! numbers or booleans. Mixed real/integer problems go through the
//! integer-relaxation loop: bounded integers become finite disjunctions,
//! unbounded ones relax to reals, and spurious non-integer models are cut
//! off and re-solved.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Atom, CompareOp, Formula, LinearTerm, Sort, TimedVar, Value};
use crate::qe_int;
use crate::qe_real;
use crate::rational::Rational;
use crate::simplify::simplify;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtError {
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// input is understood but outside the supported theory
    pub unsupported: bool,
}

impl fmt::Display for SmtError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.unsupported {
            "unsupported"
        } else {
            "parse error"
        };
        write!(f, "{}:{}: {kind}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for SmtError {}

#[derive(Debug, Clone, Default)]
pub struct SmtProblem {
    pub declarations: Vec<(String, Sort)>,
    pub assertions: Vec<Formula>,
    pub logic: Option<String>,
    pub wants_check_sat: bool,
    pub wants_model: bool,
}

impl SmtProblem {
    pub fn sorts_present(&self) -> (bool, bool) {
        let real = self.declarations.iter().any(|(_, s)| *s == Sort::Real);
        let int = self.declarations.iter().any(|(_, s)| *s == Sort::Int);
        (real, int)
    }

    pub fn var(&self, name: &str) -> Option<TimedVar> {
        self.declarations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(n, s)| TimedVar::at_k(n.clone(), *s))
    }

    fn conjunction(&self) -> Formula {
        Formula::and(self.assertions.iter().cloned())
    }
}

// ---------------------------------------------------------------------------
// s-expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum SExpr {
    Sym(String, u32, u32),
    Num(Rational, u32, u32),
    Str(u32, u32),
    List(Vec<SExpr>, u32, u32),
}

impl SExpr {
    fn pos(&self) -> (u32, u32) {
        match self {
            SExpr::Sym(_, l, c) | SExpr::Num(_, l, c) | SExpr::Str(l, c) => (*l, *c),
            SExpr::List(_, l, c) => (*l, *c),
        }
    }
}

fn err(pos: (u32, u32), message: impl Into<String>) -> SmtError {
    SmtError {
        line: pos.0,
        col: pos.1,
        message: message.into(),
        unsupported: false,
    }
}

fn unsupported(pos: (u32, u32), message: impl Into<String>) -> SmtError {
    SmtError {
        line: pos.0,
        col: pos.1,
        message: message.into(),
        unsupported: true,
    }
}

fn lex_sexprs(text: &str) -> std::result::Result<Vec<SExpr>, SmtError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);
    let mut stack: Vec<(Vec<SExpr>, u32, u32)> = Vec::new();
    let mut top: Vec<SExpr> = Vec::new();

    let push = |stack: &mut Vec<(Vec<SExpr>, u32, u32)>, top: &mut Vec<SExpr>, e: SExpr| match stack
        .last_mut()
    {
        Some((items, _, _)) => items.push(e),
        None => top.push(e),
    };

    while i < chars.len() {
        let c = chars[i];
        let here = (line, col);
        let advance = |n: usize, line: &mut u32, col: &mut u32, chars: &[char], i: usize| {
            for k in 0..n {
                if chars[i + k] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
        };
        if c.is_whitespace() {
            advance(1, &mut line, &mut col, &chars, i);
            i += 1;
        } else if c == ';' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
        } else if c == '(' {
            stack.push((Vec::new(), line, col));
            advance(1, &mut line, &mut col, &chars, i);
            i += 1;
        } else if c == ')' {
            let Some((items, l, cpos)) = stack.pop() else {
                return Err(err(here, "unbalanced `)`"));
            };
            push(&mut stack, &mut top, SExpr::List(items, l, cpos));
            advance(1, &mut line, &mut col, &chars, i);
            i += 1;
        } else if c == '"' {
            let start = here;
            i += 1;
            col += 1;
            while i < chars.len() && chars[i] != '"' {
                advance(1, &mut line, &mut col, &chars, i);
                i += 1;
            }
            if i >= chars.len() {
                return Err(err(start, "unterminated string"));
            }
            i += 1;
            col += 1;
            push(&mut stack, &mut top, SExpr::Str(start.0, start.1));
        } else {
            let start = i;
            while i < chars.len()
                && !chars[i].is_whitespace()
                && !matches!(chars[i], '(' | ')' | ';' | '"')
            {
                i += 1;
                col += 1;
            }
            let atom: String = chars[start..i].iter().collect();
            let e = match Rational::parse_decimal(&atom) {
                Some(r)
                    if atom
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_digit() || c == '.') =>
                {
                    SExpr::Num(r, here.0, here.1)
                }
                _ => SExpr::Sym(atom, here.0, here.1),
            };
            push(&mut stack, &mut top, e);
        }
    }
    if let Some((_, l, c)) = stack.last() {
        return Err(err((*l, *c), "unbalanced `(`"));
    }
    Ok(top)
}

// ---------------------------------------------------------------------------
// command interpretation
// ---------------------------------------------------------------------------

pub fn parse_smtlib(text: &str) -> std::result::Result<SmtProblem, SmtError> {
    let exprs = lex_sexprs(text)?;
    let mut problem = SmtProblem::default();
    let mut env: BTreeMap<String, Sort> = BTreeMap::new();
    for e in exprs {
        let SExpr::List(items, l, c) = &e else {
            return Err(err(e.pos(), "expected a command list"));
        };
        let Some(SExpr::Sym(head, ..)) = items.first() else {
            return Err(err((*l, *c), "empty command"));
        };
        match head.as_str() {
            "set-logic" => {
                if let Some(SExpr::Sym(tag, ..)) = items.get(1) {
                    problem.logic = Some(tag.clone());
                }
            }
            "set-info" | "exit" => {}
            "declare-fun" | "declare-const" => {
                let (name, sort_expr) = match (head.as_str(), &items[1..]) {
                    ("declare-fun", [SExpr::Sym(n, ..), SExpr::List(args, al, ac), s]) => {
                        if !args.is_empty() {
                            return Err(unsupported(
                                (*al, *ac),
                                "only 0-ary declare-fun is supported",
                            ));
                        }
                        (n.clone(), s)
                    }
                    ("declare-const", [SExpr::Sym(n, ..), s]) => (n.clone(), s),
                    _ => return Err(err((*l, *c), format!("malformed {head}"))),
                };
                let sort = match sort_expr {
                    SExpr::Sym(s, ..) if s == "Real" => Sort::Real,
                    SExpr::Sym(s, ..) if s == "Int" => Sort::Int,
                    SExpr::Sym(s, ..) if s == "Bool" => Sort::Bool,
                    other => {
                        return Err(unsupported(
                            other.pos(),
                            "sorts are limited to Real, Int, Bool",
                        ))
                    }
                };
                if env.insert(name.clone(), sort).is_some() {
                    return Err(err((*l, *c), format!("`{name}` declared twice")));
                }
                problem.declarations.push((name, sort));
            }
            "assert" => {
                let [_, term] = &items[..] else {
                    return Err(err((*l, *c), "assert takes one term"));
                };
                problem.assertions.push(lower_bool(term, &env)?);
            }
            "check-sat" => problem.wants_check_sat = true,
            "get-model" => problem.wants_model = true,
            other => return Err(err((*l, *c), format!("unknown command `{other}`"))),
        }
    }
    Ok(problem)
}

enum Term {
    Num(LinearTerm),
    Bool(Formula),
}

fn lower_term(e: &SExpr, env: &BTreeMap<String, Sort>) -> std::result::Result<Term, SmtError> {
    match e {
        SExpr::Num(r, ..) => Ok(Term::Num(LinearTerm::constant(r.clone()))),
        SExpr::Str(l, c) => Err(err((*l, *c), "string literal in a term")),
        SExpr::Sym(name, l, c) => match name.as_str() {
            "true" => Ok(Term::Bool(Formula::truth(true))),
            "false" => Ok(Term::Bool(Formula::truth(false))),
            _ => match env.get(name) {
                Some(Sort::Bool) => Ok(Term::Bool(Formula::Atom(Atom::BoolVar(TimedVar::at_k(
                    name.clone(),
                    Sort::Bool,
                ))))),
                Some(sort) => Ok(Term::Num(LinearTerm::var(TimedVar::at_k(
                    name.clone(),
                    *sort,
                )))),
                None => Err(err((*l, *c), format!("undeclared symbol `{name}`"))),
            },
        },
        SExpr::List(items, l, c) => {
            let Some(SExpr::Sym(head, ..)) = items.first() else {
                return Err(err((*l, *c), "expected an operator"));
            };
            let args = &items[1..];
            let nums = |args: &[SExpr]| -> std::result::Result<Vec<LinearTerm>, SmtError> {
                args.iter()
                    .map(|a| match lower_term(a, env)? {
                        Term::Num(t) => Ok(t),
                        Term::Bool(_) => Err(err(a.pos(), "boolean term where a number is needed")),
                    })
                    .collect()
            };
            let bools = |args: &[SExpr]| -> std::result::Result<Vec<Formula>, SmtError> {
                args.iter().map(|a| lower_bool(a, env)).collect()
            };
            match head.as_str() {
                "+" => {
                    let ts = nums(args)?;
                    Ok(Term::Num(
                        ts.into_iter().fold(LinearTerm::zero(), |a, b| a.add(&b)),
                    ))
                }
                "-" => {
                    let ts = nums(args)?;
                    match ts.len() {
                        0 => Err(err((*l, *c), "`-` needs arguments")),
                        1 => Ok(Term::Num(ts[0].scale(&Rational::from_int(-1)))),
                        _ => {
                            let mut acc = ts[0].clone();
                            for t in &ts[1..] {
                                acc = acc.sub(t);
                            }
                            Ok(Term::Num(acc))
                        }
                    }
                }
                "*" => {
                    let ts = nums(args)?;
                    let mut acc = LinearTerm::constant(Rational::one());
                    for t in ts {
                        acc = if acc.is_constant() {
                            t.scale(acc.constant_part())
                        } else if t.is_constant() {
                            acc.scale(t.constant_part())
                        } else {
                            return Err(unsupported(
                                (*l, *c),
                                "nonlinear product of two variables",
                            ));
                        };
                    }
                    Ok(Term::Num(acc))
                }
                "/" => {
                    let ts = nums(args)?;
                    let [num, den] = &ts[..] else {
                        return Err(err((*l, *c), "`/` takes two arguments"));
                    };
                    if !den.is_constant() || den.constant_part().is_zero() {
                        return Err(unsupported((*l, *c), "division only by a nonzero constant"));
                    }
                    Ok(Term::Num(num.scale(&den.constant_part().recip())))
                }
                "<" | "<=" | ">" | ">=" => {
                    let ts = nums(args)?;
                    if ts.len() < 2 {
                        return Err(err((*l, *c), "comparison needs two arguments"));
                    }
                    let op = match head.as_str() {
                        "<" => CompareOp::Lt,
                        "<=" => CompareOp::Le,
                        ">" => CompareOp::Gt,
                        _ => CompareOp::Ge,
                    };
                    let mut parts = Vec::new();
                    for w in ts.windows(2) {
                        parts.push(Formula::cmp(w[0].clone(), op, w[1].clone()));
                    }
                    Ok(Term::Bool(Formula::and(parts)))
                }
                "=" => {
                    if args.len() < 2 {
                        return Err(err((*l, *c), "`=` needs two arguments"));
                    }
                    let lowered: Vec<Term> = args
                        .iter()
                        .map(|a| lower_term(a, env))
                        .collect::<std::result::Result<_, _>>()?;
                    let mut parts = Vec::new();
                    for w in lowered.windows(2) {
                        parts.push(match (&w[0], &w[1]) {
                            (Term::Num(a), Term::Num(b)) => {
                                Formula::cmp(a.clone(), CompareOp::Eq, b.clone())
                            }
                            (Term::Bool(a), Term::Bool(b)) => Formula::iff(a.clone(), b.clone()),
                            _ => return Err(err((*l, *c), "`=` mixes number and boolean")),
                        });
                    }
                    Ok(Term::Bool(Formula::and(parts)))
                }
                "and" => Ok(Term::Bool(Formula::and(bools(args)?))),
                "or" => Ok(Term::Bool(Formula::or(bools(args)?))),
                "not" => {
                    let bs = bools(args)?;
                    let [b] = &bs[..] else {
                        return Err(err((*l, *c), "`not` takes one argument"));
                    };
                    Ok(Term::Bool(Formula::not(b.clone())))
                }
                "=>" => {
                    let bs = bools(args)?;
                    if bs.len() < 2 {
                        return Err(err((*l, *c), "`=>` needs two arguments"));
                    }
                    let mut acc = bs.last().unwrap().clone();
                    for b in bs[..bs.len() - 1].iter().rev() {
                        acc = Formula::implies(b.clone(), acc);
                    }
                    Ok(Term::Bool(acc))
                }
                "ite" => {
                    let [cond, then, els] = args else {
                        return Err(err((*l, *c), "`ite` takes three arguments"));
                    };
                    let cond = lower_bool(cond, env)?;
                    match (lower_term(then, env)?, lower_term(els, env)?) {
                        (Term::Bool(t), Term::Bool(e)) => Ok(Term::Bool(Formula::or([
                            Formula::and([cond.clone(), t]),
                            Formula::and([Formula::not(cond), e]),
                        ]))),
                        _ => Err(unsupported(
                            (*l, *c),
                            "ite is supported on boolean branches only",
                        )),
                    }
                }
                other => Err(err((*l, *c), format!("unknown operator `{other}`"))),
            }
        }
    }
}

fn lower_bool(e: &SExpr, env: &BTreeMap<String, Sort>) -> std::result::Result<Formula, SmtError> {
    match lower_term(e, env)? {
        Term::Bool(f) => Ok(f),
        Term::Num(_) => Err(err(e.pos(), "numeric term where a formula is needed")),
    }
}

// ---------------------------------------------------------------------------
// satisfiability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum SatOutcome {
    Sat(Assignment),
    Unsat,
    Unknown(String),
}

#[derive(Debug, Clone, Copy)]
pub struct MixedConfig {
    pub max_refinements: u32,
    /// a bounded integer is Remark-1-encoded only up to this many values
    pub bounded_values_cap: u64,
}

impl Default for MixedConfig {
    fn default() -> Self {
        MixedConfig {
            max_refinements: 32,
            bounded_values_cap: 256,
        }
    }
}

/// Decides satisfiability of the asserted conjunction by existential QE,
/// routing pure-real and pure-integer problems to their engines and mixed
/// ones through the relaxation loop.
pub fn check_sat(p: &SmtProblem) -> Result<SatOutcome> {
    let (has_real, has_int) = p.sorts_present();
    if has_real && has_int {
        return check_sat_mixed(p, &MixedConfig::default());
    }
    let f = simplify(&p.conjunction());
    let vars: Vec<TimedVar> = p
        .declarations
        .iter()
        .map(|(n, s)| TimedVar::at_k(n.clone(), *s))
        .collect();
    if has_int {
        return match qe_int::int_witness(&f, &vars) {
            Ok(Some(asg)) => Ok(SatOutcome::Sat(asg)),
            Ok(None) => Ok(SatOutcome::Unsat),
            Err(Error::Resource(what)) => Ok(SatOutcome::Unknown(what)),
            Err(e) => Err(e),
        };
    }
    match qe_real::satisfiable(&vars, &f) {
        Ok(false) => Ok(SatOutcome::Unsat),
        Ok(true) => {
            let Some(witness) = qe_real::extract_witness(&f, &vars)? else {
                return Ok(SatOutcome::Unknown("witness extraction failed".into()));
            };
            match qe_real::concretize_witness(&witness, &f) {
                Some(asg) => Ok(SatOutcome::Sat(asg)),
                None => Ok(SatOutcome::Unknown(format!(
                    "model stays nonstandard: {witness}"
                ))),
            }
        }
        Err(Error::Resource(what)) => Ok(SatOutcome::Unknown(what)),
        Err(e) => Err(e),
    }
}

/// Remark-1 treatment of mixed real/integer problems: bounded integers turn
/// into value disjunctions, unbounded ones relax to reals, and non-integer
/// models are excluded (below the floor or above the ceiling, which is sound
/// for an integer) before re-solving.
pub fn check_sat_mixed(p: &SmtProblem, cfg: &MixedConfig) -> Result<SatOutcome> {
    Ok(check_sat_mixed_traced(p, cfg)?.0)
}

/// Mixed solving that also reports the spurious relaxation models it
/// excluded along the way, in order.
pub fn check_sat_mixed_traced(
    p: &SmtProblem,
    cfg: &MixedConfig,
) -> Result<(SatOutcome, Vec<Assignment>)> {
    let (has_real, _) = p.sorts_present();
    if !has_real {
        return Ok((check_sat(p)?, Vec::new()));
    }
    let int_vars: Vec<TimedVar> = p
        .declarations
        .iter()
        .filter(|(_, s)| *s == Sort::Int)
        .map(|(n, _)| TimedVar::at_k(n.clone(), Sort::Int))
        .collect();

    // relax: every integer variable becomes real
    let relax_var = |v: &TimedVar| -> TimedVar {
        if v.sort == Sort::Int {
            TimedVar::new(v.name.clone(), v.index, Sort::Real)
        } else {
            v.clone()
        }
    };
    let original = simplify(&p.conjunction());
    let mut relaxed = original
        .try_map_vars(&|v| Ok(relax_var(v)))
        .expect("relaxation is total");

    // Remark-1 encoding for integers with known finite range
    for v in &int_vars {
        let rv = relax_var(v);
        if let Some((lo, hi)) = constant_range(&original, v, cfg.bounded_values_cap) {
            let mut cases = Vec::new();
            let mut n = lo;
            while n <= hi {
                let mut t = LinearTerm::var(rv.clone());
                t.add_constant(Rational::from_int(-n));
                cases.push(Formula::compare(t, CompareOp::Eq));
                n += 1;
            }
            relaxed = Formula::and([relaxed, Formula::or(cases)]);
        }
    }

    let all_vars: Vec<TimedVar> = p
        .declarations
        .iter()
        .map(|(n, s)| relax_var(&TimedVar::at_k(n.clone(), *s)))
        .collect();

    let mut excluded: Vec<Assignment> = Vec::new();
    // open unit gaps (n, n+1) known to contain no solution, per variable
    let mut gaps: BTreeMap<TimedVar, std::collections::BTreeSet<BigInt>> = BTreeMap::new();
    let base = relaxed;
    for _ in 0..cfg.max_refinements {
        let relaxed = constrain_gaps(&base, &gaps);
        if !qe_real::satisfiable(&all_vars, &relaxed)? {
            return Ok((SatOutcome::Unsat, excluded));
        }
        let Some(witness) = qe_real::extract_witness(&relaxed, &all_vars)? else {
            return Ok((
                SatOutcome::Unknown("witness extraction failed".into()),
                excluded,
            ));
        };
        let Some(model) = qe_real::concretize_witness(&witness, &relaxed) else {
            return Ok((
                SatOutcome::Unknown("model stays nonstandard".into()),
                excluded,
            ));
        };
        // accept only integer values for the original integer variables
        let mut spurious = Vec::new();
        for v in &int_vars {
            let rv = relax_var(v);
            if let Some(Value::Num(x)) = model.get(&rv) {
                if !x.is_integer() {
                    spurious.push((rv.clone(), x.clone()));
                }
            }
        }
        if spurious.is_empty() {
            let mut out = Assignment::new();
            for (v, value) in model.iter() {
                let declared = p.var(&v.name).unwrap_or_else(|| v.clone());
                out.set(declared, value.clone());
            }
            return Ok((SatOutcome::Sat(out), excluded));
        }
        excluded.push(model);

        // fast path: re-solve with the fractional coordinates snapped to the
        // nearest integer before widening the exclusion set
        let mut snapped = relaxed.clone();
        for (rv, x) in &spurious {
            let nearest = if (x - &Rational::from_bigint(x.floor())) < Rational::ratio(1, 2) {
                x.floor()
            } else {
                x.ceil()
            };
            let mut t = LinearTerm::var(rv.clone());
            t.add_constant(Rational::from_bigint(-nearest));
            snapped = Formula::and([snapped, Formula::compare(t, CompareOp::Eq)]);
        }
        if qe_real::satisfiable(&all_vars, &snapped)? {
            if let Some(w) = qe_real::extract_witness(&snapped, &all_vars)? {
                if let Some(model) = qe_real::concretize_witness(&w, &snapped) {
                    let all_integral = int_vars.iter().all(|v| {
                        matches!(model.get(&relax_var(v)), Some(Value::Num(x)) if x.is_integer())
                    });
                    if all_integral {
                        let mut out = Assignment::new();
                        for (v, value) in model.iter() {
                            let declared = p.var(&v.name).unwrap_or_else(|| v.clone());
                            out.set(declared, value.clone());
                        }
                        return Ok((SatOutcome::Sat(out), excluded));
                    }
                }
            }
        }

        for (rv, x) in spurious {
            gaps.entry(rv).or_default().insert(x.floor());
        }
    }
    Ok((
        SatOutcome::Unknown("refinement budget exhausted".into()),
        excluded,
    ))
}

/// Conjoins per-variable complements of the excluded open unit gaps, kept as
/// one disjunction per variable so the refinement never compounds.
fn constrain_gaps(
    base: &Formula,
    gaps: &BTreeMap<TimedVar, std::collections::BTreeSet<BigInt>>,
) -> Formula {
    let mut out = vec![base.clone()];
    for (v, floors) in gaps {
        let floors: Vec<&BigInt> = floors.iter().collect();
        let mut pieces = Vec::new();
        // below the first gap
        let mut low = LinearTerm::var(v.clone());
        low.add_constant(Rational::from_bigint(-floors[0].clone()));
        pieces.push(Formula::compare(low, CompareOp::Le));
        for w in floors.windows(2) {
            let left_end = w[0] + BigInt::from(1);
            if *w[1] == left_end {
                // adjacent gaps: only the integer point between them remains
                let mut t = LinearTerm::var(v.clone());
                t.add_constant(Rational::from_bigint(-left_end));
                pieces.push(Formula::compare(t, CompareOp::Eq));
            } else {
                let mut lo = LinearTerm::var(v.clone());
                lo.add_constant(Rational::from_bigint(-left_end));
                let mut hi = LinearTerm::var(v.clone());
                hi.add_constant(Rational::from_bigint(-w[1].clone()));
                pieces.push(Formula::and([
                    Formula::compare(lo, CompareOp::Ge),
                    Formula::compare(hi, CompareOp::Le),
                ]));
            }
        }
        // above the last gap
        let mut high = LinearTerm::var(v.clone());
        high.add_constant(Rational::from_bigint(
            -(floors[floors.len() - 1] + BigInt::from(1)),
        ));
        pieces.push(Formula::compare(high, CompareOp::Ge));
        out.push(Formula::or(pieces));
    }
    Formula::and(out)
}

/// Constant bounds on `v` from top-level conjunct atoms, when they pin a
/// finite range of at most `cap` integers.
fn constant_range(f: &Formula, v: &TimedVar, cap: u64) -> Option<(i64, i64)> {
    let conjuncts: Vec<&Formula> = match f {
        Formula::And(fs) => fs.iter().collect(),
        other => vec![other],
    };
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for cj in conjuncts {
        let Formula::Atom(Atom::Compare(t, op)) = cj else {
            continue;
        };
        if !t.mentions(v) || t.vars().count() != 1 {
            continue;
        }
        let a = t.coeff_of(v);
        let bound = -&(t.constant_part() / &a);
        let op = if a.is_negative() { op.flip() } else { *op };
        match op {
            CompareOp::Le => hi = tighten_hi(hi, bound),
            CompareOp::Lt => hi = tighten_hi(hi, bound - Rational::ratio(1, 2)),
            CompareOp::Ge => lo = tighten_lo(lo, bound),
            CompareOp::Gt => lo = tighten_lo(lo, bound + Rational::ratio(1, 2)),
            CompareOp::Eq => {
                lo = tighten_lo(lo, bound.clone());
                hi = tighten_hi(hi, bound);
            }
            CompareOp::Ne => {}
        }
    }
    let (lo, hi) = (lo?, hi?);
    let lo = lo.ceil();
    let hi = hi.floor();
    let lo = lo.to_string().parse::<i64>().ok()?;
    let hi = hi.to_string().parse::<i64>().ok()?;
    if lo > hi || (hi - lo) as u64 + 1 > cap {
        None
    } else {
        Some((lo, hi))
    }
}

fn tighten_lo(cur: Option<Rational>, new: Rational) -> Option<Rational> {
    Some(match cur {
        None => new,
        Some(c) => {
            if new > c {
                new
            } else {
                c
            }
        }
    })
}

fn tighten_hi(cur: Option<Rational>, new: Rational) -> Option<Rational> {
    Some(match cur {
        None => new,
        Some(c) => {
            if new < c {
                new
            } else {
                c
            }
        }
    })
}

/// `get-model` format: one line per declared variable, exact values,
/// rationals as numerator/denominator.
pub fn render_model(p: &SmtProblem, asg: &Assignment) -> String {
    let mut out = String::new();
    for (name, sort) in &p.declarations {
        let v = TimedVar::at_k(name.clone(), *sort);
        let line = match asg.get(&v) {
            Some(Value::Num(r)) => format!("{name} {}/{}", r.numer(), r.denom()),
            Some(Value::Bool(b)) => format!("{name} {b}"),
            None => format!("{name} ?"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sat(text: &str) -> SatOutcome {
        let p = parse_smtlib(text).unwrap();
        check_sat(&p).unwrap()
    }

    fn assert_model_satisfies(text: &str) -> Assignment {
        let p = parse_smtlib(text).unwrap();
        match check_sat(&p).unwrap() {
            SatOutcome::Sat(model) => {
                for a in &p.assertions {
                    let remapped = remap_model(&p, &model);
                    assert!(a.evaluate(&remapped).unwrap(), "model violates {a}");
                }
                model
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    fn remap_model(_p: &SmtProblem, m: &Assignment) -> Assignment {
        m.clone()
    }

    #[test]
    fn parses_simple_script() {
        let p =
            parse_smtlib("(set-logic QF_LRA)(declare-fun x () Real)(assert (> x 0))(check-sat)")
                .unwrap();
        assert_eq!(p.declarations, vec![("x".to_string(), Sort::Real)]);
        assert_eq!(p.assertions.len(), 1);
        assert!(p.wants_check_sat);
        assert_eq!(p.logic.as_deref(), Some("QF_LRA"));
    }

    #[test]
    fn nonlinear_is_unsupported() {
        let e =
            parse_smtlib("(declare-fun x () Real)(declare-fun y () Real)(assert (= (* x y) 1))")
                .unwrap_err();
        assert!(e.unsupported);
    }

    #[test]
    fn unknown_command_is_a_parse_error() {
        let e = parse_smtlib("(frobnicate)").unwrap_err();
        assert!(!e.unsupported);
        assert!(e.message.contains("frobnicate"));
    }

    #[test]
    fn mixed_bool_real_implication() {
        let model = assert_model_satisfies(
            "(declare-fun p () Bool)(declare-fun x () Real)\
             (assert (=> p (< x 3)))(assert p)(check-sat)",
        );
        let x = TimedVar::at_k("x", Sort::Real);
        let Some(Value::Num(r)) = model.get(&x) else {
            panic!()
        };
        assert!(r < &Rational::from_int(3));
    }

    #[test]
    fn contradiction_is_unsat() {
        let out = sat("(declare-fun x () Real)(assert (> x 0))(assert (< x 0))(check-sat)");
        assert!(matches!(out, SatOutcome::Unsat));
    }

    #[test]
    fn open_unit_interval_real_vs_int() {
        let real = sat("(declare-fun x () Real)(assert (> x 0))(assert (< x 1))(check-sat)");
        match real {
            SatOutcome::Sat(m) => {
                let x = TimedVar::at_k("x", Sort::Real);
                let Some(Value::Num(r)) = m.get(&x) else {
                    panic!()
                };
                assert!(r > &Rational::zero() && r < &Rational::one());
            }
            other => panic!("{other:?}"),
        }
        let int = sat("(declare-fun x () Int)(assert (> x 0))(assert (< x 1))(check-sat)");
        assert!(matches!(int, SatOutcome::Unsat));
    }

    #[test]
    fn remark_one_bounded_encoding() {
        // x bounded to {1, 2} and pushed to 2 by the assertion
        let text = "(declare-fun x () Int)(declare-fun y () Real)\
                    (assert (>= x 1))(assert (<= x 2))(assert (>= x 2))\
                    (assert (= y x))(check-sat)";
        let p = parse_smtlib(text).unwrap();
        match check_sat(&p).unwrap() {
            SatOutcome::Sat(m) => {
                let x = TimedVar::at_k("x", Sort::Int);
                assert_eq!(m.get(&x), Some(&Value::Num(Rational::from_int(2))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parity_refinement_concludes_unsat() {
        // relaxation proposes 3/2; the exclusion forces unsat
        let text = "(declare-fun x () Int)(declare-fun y () Real)\
                    (assert (= (* 2 x) 3))(assert (= y 0))(check-sat)";
        let p = parse_smtlib(text).unwrap();
        assert!(matches!(check_sat(&p).unwrap(), SatOutcome::Unsat));
    }

    #[test]
    fn no_integer_strictly_inside_unit_interval_mixed() {
        let text = "(declare-fun x () Int)(declare-fun y () Real)\
                    (assert (= x y))(assert (> y 0))(assert (< y 1))(check-sat)";
        let p = parse_smtlib(text).unwrap();
        assert!(matches!(check_sat(&p).unwrap(), SatOutcome::Unsat));
    }

    #[test]
    fn model_rendering_is_exact() {
        let text = "(declare-fun x () Real)(declare-fun p () Bool)\
                    (assert (= (* 2 x) 3))(assert p)(check-sat)(get-model)";
        let p = parse_smtlib(text).unwrap();
        let SatOutcome::Sat(m) = check_sat(&p).unwrap() else {
            panic!()
        };
        let rendered = render_model(&p, &m);
        assert_eq!(rendered, "x 3/2\np true\n");
    }

    #[test]
    fn pure_int_problem_bypasses_relaxation() {
        let text = "(declare-fun x () Int)(assert (= (* 2 x) 3))(check-sat)";
        let p = parse_smtlib(text).unwrap();
        assert!(matches!(check_sat(&p).unwrap(), SatOutcome::Unsat));
    }
}
