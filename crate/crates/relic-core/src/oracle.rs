//! Independent reference implementations used as test oracles.
//!
//! Nothing here shares code with the elimination engines it checks: the
//! naive all-pairs Fourier–Motzkin keeps every bound pair without the Gauss
//! pre-pass or simplification, the grid helpers decide satisfiability by
//! exhaustive evaluation, and the interval helpers support the range
//! propagation comparisons.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::formula::{Assignment, Atom, CompareOp, Formula, LinearTerm, Sort, TimedVar, Value};
use crate::rational::Rational;

/// Naive Fourier–Motzkin on a conjunction of comparison literals: no Gauss
/// step, no subsumption; equalities are split into a pair of weak bounds.
/// Keeps the full cross product of bound pairs.
pub fn naive_fm_conjunction(v: &TimedVar, literals: &[Formula]) -> Result<Formula> {
    let mut lowers: Vec<(LinearTerm, bool)> = Vec::new();
    let mut uppers: Vec<(LinearTerm, bool)> = Vec::new();
    let mut residue: Vec<Formula> = Vec::new();
    for lit in literals {
        if lit.is_true() {
            continue;
        }
        if lit.is_false() {
            return Ok(Formula::truth(false));
        }
        let Formula::Atom(Atom::Compare(t, op)) = lit else {
            return Err(Error::Contract(
                "naive FM expects comparison literals".into(),
            ));
        };
        if !t.mentions(v) {
            residue.push(lit.clone());
            continue;
        }
        let a = t.coeff_of(v);
        let bound = t
            .substitute(v, &LinearTerm::zero())
            .scale(&(&Rational::from_int(-1) / &a));
        let op = if a.is_negative() { op.flip() } else { *op };
        match op {
            CompareOp::Lt => uppers.push((bound, true)),
            CompareOp::Le => uppers.push((bound, false)),
            CompareOp::Gt => lowers.push((bound, true)),
            CompareOp::Ge => lowers.push((bound, false)),
            CompareOp::Eq => {
                lowers.push((bound.clone(), false));
                uppers.push((bound, false));
            }
            CompareOp::Ne => {
                return Err(Error::Contract("naive FM cannot take disequalities".into()))
            }
        }
    }
    let mut out = residue;
    for (l, sl) in &lowers {
        for (u, su) in &uppers {
            out.push(Formula::Atom(Atom::compare(
                l.sub(u),
                if *sl || *su {
                    CompareOp::Lt
                } else {
                    CompareOp::Le
                },
            )));
        }
    }
    Ok(Formula::and(out))
}

/// All assignments of `vars` over the integer grid `[-radius, radius]`,
/// with halves included when `halves` is set (for real-sorted variables).
pub fn grid_assignments(vars: &[TimedVar], radius: i64, halves: bool) -> Vec<Assignment> {
    let mut points: Vec<Rational> = Vec::new();
    for n in -radius..=radius {
        points.push(Rational::from_int(n));
        if halves && n < radius {
            points.push(Rational::from_int(n) + Rational::ratio(1, 2));
        }
    }
    let mut out = vec![Assignment::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * points.len());
        for asg in &out {
            match v.sort {
                Sort::Bool => {
                    for b in [false, true] {
                        let mut a = asg.clone();
                        a.set_bool(v.clone(), b);
                        next.push(a);
                    }
                }
                Sort::Int => {
                    for p in &points {
                        if !p.is_integer() {
                            continue;
                        }
                        let mut a = asg.clone();
                        a.set_num(v.clone(), p.clone());
                        next.push(a);
                    }
                }
                Sort::Real => {
                    for p in &points {
                        let mut a = asg.clone();
                        a.set_num(v.clone(), p.clone());
                        next.push(a);
                    }
                }
            }
        }
        out = next;
    }
    out
}

/// Does any grid completion of `vars` satisfy `f` on top of `base`?
pub fn grid_satisfiable(
    f: &Formula,
    base: &Assignment,
    vars: &[TimedVar],
    radius: i64,
    halves: bool,
) -> Result<bool> {
    for completion in grid_assignments(vars, radius, halves) {
        if f.evaluate(&base.merged(&completion))? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exhaustive decision of `exists v. f` over the integers in `[-limit, limit]`
/// with the remaining free variables already ground in `base`.
pub fn int_exists_in_window(
    f: &Formula,
    base: &Assignment,
    v: &TimedVar,
    limit: i64,
) -> Result<bool> {
    for n in -limit..=limit {
        let mut asg = base.clone();
        asg.set_num(v.clone(), Rational::from_int(n));
        if f.evaluate(&asg)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A window size that makes integer-grid search exhaustive for `exists v. f`:
/// beyond every atom boundary by the formula's period, the truth value of
/// each atom is stable, so only residues matter and the window covers them.
pub fn cooper_window(f: &Formula, v: &TimedVar, base: &Assignment) -> Result<i64> {
    let mut period = BigInt::from(1);
    let mut extreme = BigInt::from(0);
    let mut res: Result<()> = Ok(());
    fn visit(f: &Formula, go: &mut impl FnMut(&Atom)) {
        match f {
            Formula::Atom(a) => go(a),
            Formula::Not(g) => visit(g, go),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| visit(g, go)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                visit(a, go);
                visit(b, go);
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => visit(g, go),
        }
    }
    visit(f, &mut |a| {
        if res.is_err() {
            return;
        }
        match a {
            Atom::Compare(t, _) if t.mentions(v) => {
                let coeff = t.coeff_of(v);
                period = period.lcm(coeff.numer());
                let rest = t.substitute(v, &LinearTerm::zero());
                match rest.evaluate(base) {
                    Ok(value) => {
                        let bound = (&value / &coeff).abs().ceil();
                        if bound > extreme {
                            extreme = bound;
                        }
                    }
                    Err(e) => res = Err(e),
                }
            }
            Atom::Divides(m, t) if t.mentions(v) => {
                period = period.lcm(m);
                period = period.lcm(t.coeff_of(v).numer());
            }
            _ => {}
        }
    });
    res?;
    let window = extreme + period.abs() + BigInt::from(1);
    window
        .to_i64()
        .ok_or_else(|| Error::Resource("oracle window too large".into()))
}

/// Deterministic splitmix-style generator so the property suites are
/// reproducible without pulling a dependency into the library itself.
#[derive(Debug, Clone)]
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[lo, hi]`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        (self.next_u64() % den as u64) < num as u64
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[(self.next_u64() % items.len() as u64) as usize]
    }
}

/// Grid evaluation of a value expression: all values `target` takes as the
/// listed inputs range over the grid, per the `eval` callback.
pub fn simulate_values(
    inputs: &[TimedVar],
    radius: i64,
    halves: bool,
    eval: impl Fn(&Assignment) -> Option<Rational>,
) -> Vec<(Assignment, Rational)> {
    grid_assignments(inputs, radius, halves)
        .into_iter()
        .filter_map(|asg| {
            let v = eval(&asg)?;
            Some((asg, v))
        })
        .collect()
}

pub fn num_of(asg: &Assignment, v: &TimedVar) -> Rational {
    match asg.get(v) {
        Some(Value::Num(r)) => r.clone(),
        other => panic!("expected numeric value for {v}, got {other:?}"),
    }
}
