//! Equivalence-preserving cleanup of quantifier-free formulas.
//!
//! Folds constant atoms, removes duplicate literals, keeps only the tightest
//! of subsumed bound pairs (`x < 3` beats `x < 5`), merges equal inclusive
//! bounds into equalities, and drops disjuncts that are supersets of other
//! disjuncts.

use std::collections::BTreeMap;

use crate::formula::{Atom, CompareOp, Formula, LinearTerm, TimedVar};
use crate::normal::complement;
use crate::rational::Rational;

/// Simplifies a quantifier-free formula. Output is logically equivalent.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => refold_atom(a),
        Formula::Not(g) => match simplify(g) {
            Formula::Atom(Atom::Compare(t, op)) => Formula::Atom(Atom::compare(t, op.negate())),
            Formula::Atom(Atom::True) => Formula::truth(false),
            Formula::Atom(Atom::False) => Formula::truth(true),
            inner => Formula::not(inner),
        },
        Formula::And(fs) => simplify_and(fs.iter().map(simplify)),
        Formula::Or(fs) => simplify_or(fs.iter().map(simplify)),
        Formula::Implies(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a.is_false() || b.is_true() {
                Formula::truth(true)
            } else if a.is_true() {
                b
            } else if b.is_false() {
                simplify(&Formula::not(a))
            } else {
                Formula::implies(a, b)
            }
        }
        Formula::Iff(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a == b {
                Formula::truth(true)
            } else if a.is_true() {
                b
            } else if b.is_true() {
                a
            } else if a.is_false() {
                simplify(&Formula::not(b))
            } else if b.is_false() {
                simplify(&Formula::not(a))
            } else {
                Formula::iff(a, b)
            }
        }
        Formula::Exists(v, body) => Formula::exists(v.clone(), simplify(body)),
        Formula::Forall(v, body) => Formula::forall(v.clone(), simplify(body)),
    }
}

fn refold_atom(a: &Atom) -> Formula {
    match a {
        Atom::Compare(t, op) => Formula::Atom(Atom::compare(t.clone(), *op)),
        Atom::Divides(m, t) => Formula::Atom(Atom::divides(m.clone(), t.clone())),
        other => Formula::Atom(other.clone()),
    }
}

/// Coefficient vector scaled so the leading coefficient is 1; proportional
/// atoms share a key and differ only in the (scaled) constant, which makes
/// their bounds comparable.
type ShapeKey = Vec<(TimedVar, Rational)>;

fn shape_scale(t: &LinearTerm) -> Rational {
    // canonical atoms have a positive leading coefficient
    t.coeffs()
        .next()
        .map(|(_, c)| c.recip())
        .unwrap_or_else(Rational::one)
}

fn shape_of(t: &LinearTerm, scale: &Rational) -> ShapeKey {
    t.coeffs().map(|(v, c)| (v.clone(), c * scale)).collect()
}

#[derive(Default)]
struct BoundGroup {
    // tightest `shape + c (<|<=) 0`: max constant wins, strict on ties
    upper: Option<(Rational, bool)>,
    // tightest `shape + c (>|>=) 0`: min constant wins, strict on ties
    lower: Option<(Rational, bool)>,
    equals: Vec<Rational>,
}

fn simplify_and(items: impl Iterator<Item = Formula>) -> Formula {
    let flat = match Formula::and(items) {
        Formula::And(fs) => fs,
        other => return other,
    };

    let mut groups: BTreeMap<ShapeKey, BoundGroup> = BTreeMap::new();
    let mut rest: Vec<Formula> = Vec::new();
    for lit in &flat {
        match lit {
            Formula::Atom(Atom::Compare(t, op)) if !t.is_constant() => {
                let scale = shape_scale(t);
                let key = shape_of(t, &scale);
                let c = t.constant_part() * &scale;
                let g = groups.entry(key).or_default();
                match op {
                    CompareOp::Lt | CompareOp::Le => {
                        let strict = *op == CompareOp::Lt;
                        g.upper = Some(match g.upper.take() {
                            None => (c, strict),
                            Some((c0, s0)) => match c.partial_cmp(&c0).unwrap() {
                                std::cmp::Ordering::Greater => (c, strict),
                                std::cmp::Ordering::Equal => (c0, s0 || strict),
                                std::cmp::Ordering::Less => (c0, s0),
                            },
                        });
                    }
                    CompareOp::Gt | CompareOp::Ge => {
                        let strict = *op == CompareOp::Gt;
                        g.lower = Some(match g.lower.take() {
                            None => (c, strict),
                            Some((c0, s0)) => match c.partial_cmp(&c0).unwrap() {
                                std::cmp::Ordering::Less => (c, strict),
                                std::cmp::Ordering::Equal => (c0, s0 || strict),
                                std::cmp::Ordering::Greater => (c0, s0),
                            },
                        });
                    }
                    CompareOp::Eq => g.equals.push(c),
                    CompareOp::Ne => rest.push(lit.clone()),
                }
            }
            other => rest.push(other.clone()),
        }
    }

    let mut out: Vec<Formula> = Vec::new();
    for (key, g) in groups {
        let shape = |c: &Rational| -> LinearTerm {
            let mut t = LinearTerm::constant(c.clone());
            for (v, a) in &key {
                t.add_term(a.clone(), v.clone());
            }
            t
        };
        if let Some(first) = g.equals.first() {
            if g.equals.iter().any(|c| c != first) {
                return Formula::truth(false);
            }
            // bounds against the pinned value
            if let Some((cu, strict)) = &g.upper {
                // shape = -first, need shape + cu (<|<=) 0  <=>  cu - first (<|<=) 0
                let d = cu - first;
                let ok = if *strict {
                    d.is_negative()
                } else {
                    !d.is_positive()
                };
                if !ok {
                    return Formula::truth(false);
                }
            }
            if let Some((cl, strict)) = &g.lower {
                let d = cl - first;
                let ok = if *strict {
                    d.is_positive()
                } else {
                    !d.is_negative()
                };
                if !ok {
                    return Formula::truth(false);
                }
            }
            out.push(Formula::Atom(Atom::compare(shape(first), CompareOp::Eq)));
            continue;
        }
        match (&g.lower, &g.upper) {
            (Some((cl, sl)), Some((cu, su))) => {
                // lower: shape > -cl (or >=); upper: shape < -cu (or <=)
                match cl.partial_cmp(cu).unwrap() {
                    std::cmp::Ordering::Greater => {
                        // -cl < -cu: ordinary window
                        out.push(Formula::Atom(Atom::compare(
                            shape(cl),
                            if *sl { CompareOp::Gt } else { CompareOp::Ge },
                        )));
                        out.push(Formula::Atom(Atom::compare(
                            shape(cu),
                            if *su { CompareOp::Lt } else { CompareOp::Le },
                        )));
                    }
                    std::cmp::Ordering::Equal => {
                        if *sl || *su {
                            return Formula::truth(false);
                        }
                        out.push(Formula::Atom(Atom::compare(shape(cl), CompareOp::Eq)));
                    }
                    std::cmp::Ordering::Less => return Formula::truth(false),
                }
            }
            (Some((cl, sl)), None) => out.push(Formula::Atom(Atom::compare(
                shape(cl),
                if *sl { CompareOp::Gt } else { CompareOp::Ge },
            ))),
            (None, Some((cu, su))) => out.push(Formula::Atom(Atom::compare(
                shape(cu),
                if *su { CompareOp::Lt } else { CompareOp::Le },
            ))),
            (None, None) => {}
        }
    }

    out.extend(rest);
    out.sort();
    out.dedup();
    for lit in &out {
        if out.contains(&complement(lit)) {
            return Formula::truth(false);
        }
    }
    Formula::and(out)
}

fn simplify_or(items: impl Iterator<Item = Formula>) -> Formula {
    let flat = match Formula::or(items) {
        Formula::Or(fs) => fs,
        other => return other,
    };
    let mut sets: Vec<Vec<Formula>> = flat
        .into_iter()
        .map(|d| match d {
            Formula::And(fs) => fs,
            other => vec![other],
        })
        .collect();

    // alternate absorption and consensus merging until stable
    loop {
        for s in &mut sets {
            s.sort();
            s.dedup();
        }
        sets.sort();
        sets.dedup();
        if sets.iter().any(|s| s.is_empty()) {
            return Formula::truth(true); // an empty conjunction is `true`
        }

        // absorption: a disjunct that implies another disjunct is redundant
        // (every literal of the absorber follows from some literal of the
        // absorbed conjunction)
        let implies = |from: &[Formula], to: &[Formula]| {
            to.iter()
                .all(|l1| from.iter().any(|l2| literal_implies(l2, l1)))
        };
        let mut keep = vec![true; sets.len()];
        for i in 0..sets.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..sets.len() {
                if i == j || !keep[j] {
                    continue;
                }
                if implies(&sets[j], &sets[i]) && (!implies(&sets[i], &sets[j]) || i < j) {
                    keep[j] = false;
                }
            }
        }
        let mut next: Vec<Vec<Formula>> = sets
            .iter()
            .zip(&keep)
            .filter(|&(_s, k)| *k)
            .map(|(s, _k)| s.clone())
            .collect();

        // consensus: (S and A) or (S and B) == S and (A or B) whenever A, B
        // compare the same term (or are complementary literals)
        let mut merged = false;
        'outer: for i in 0..next.len() {
            for j in (i + 1)..next.len() {
                if let Some(m) = merge_pair(&next[i], &next[j]) {
                    let (hi, lo) = (j, i);
                    next.remove(hi);
                    next.remove(lo);
                    next.push(m);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged && next == sets {
            sets = next;
            break;
        }
        sets = next;
    }

    Formula::or(sets.into_iter().map(Formula::and))
}

/// Does literal `a` imply literal `b`? Exact on syntactic equality and on
/// proportional comparison atoms; conservative `false` elsewhere.
fn literal_implies(a: &Formula, b: &Formula) -> bool {
    if a == b {
        return true;
    }
    let (Formula::Atom(Atom::Compare(ta, opa)), Formula::Atom(Atom::Compare(tb, opb))) = (a, b)
    else {
        return false;
    };
    let sa = shape_scale(ta);
    let sb = shape_scale(tb);
    if shape_of(ta, &sa) != shape_of(tb, &sb) {
        return false;
    }
    // normalized: shape + c (op) 0, i.e. shape (op) -c
    let ca = ta.constant_part() * &sa;
    let cb = tb.constant_part() * &sb;
    let ba = -&ca; // boundary values
    let bb = -&cb;
    use CompareOp::*;
    match (opa, opb) {
        (Eq, Eq) => ba == bb,
        (Eq, Ne) => ba != bb,
        (Eq, Gt) => ba > bb,
        (Eq, Ge) => ba >= bb,
        (Eq, Lt) => ba < bb,
        (Eq, Le) => ba <= bb,
        (Gt, Gt) => ba >= bb,
        (Gt, Ge) => ba >= bb,
        (Ge, Ge) => ba >= bb,
        (Ge, Gt) => ba > bb,
        (Lt, Lt) => ba <= bb,
        (Lt, Le) => ba <= bb,
        (Le, Le) => ba <= bb,
        (Le, Lt) => ba < bb,
        (Gt, Ne) => bb <= ba,
        (Ge, Ne) => bb < ba,
        (Lt, Ne) => bb >= ba,
        (Le, Ne) => bb > ba,
        _ => false,
    }
}

/// Region mask of a comparison over {negative, zero, positive}.
fn op_mask(op: CompareOp) -> u8 {
    match op {
        CompareOp::Lt => 0b100,
        CompareOp::Le => 0b110,
        CompareOp::Eq => 0b010,
        CompareOp::Ge => 0b011,
        CompareOp::Gt => 0b001,
        CompareOp::Ne => 0b101,
    }
}

fn mask_op(mask: u8) -> Option<CompareOp> {
    Some(match mask {
        0b100 => CompareOp::Lt,
        0b110 => CompareOp::Le,
        0b010 => CompareOp::Eq,
        0b011 => CompareOp::Ge,
        0b001 => CompareOp::Gt,
        0b101 => CompareOp::Ne,
        _ => return None,
    })
}

/// Merges two same-size literal sets that differ in exactly one position,
/// when the differing literals are comparisons of one term or complements.
fn merge_pair(a: &[Formula], b: &[Formula]) -> Option<Vec<Formula>> {
    if a.len() != b.len() {
        return None;
    }
    let only_a: Vec<&Formula> = a.iter().filter(|l| !b.contains(l)).collect();
    let only_b: Vec<&Formula> = b.iter().filter(|l| !a.contains(l)).collect();
    let (la, lb) = match (&only_a[..], &only_b[..]) {
        ([], []) => return Some(a.to_vec()), // identical
        ([x], [y]) => (*x, *y),
        _ => return None,
    };
    let shared = || a.iter().filter(|l| *l != la).cloned().collect::<Vec<_>>();
    if *lb == complement(la) {
        return Some(shared());
    }
    if let (Formula::Atom(Atom::Compare(t1, op1)), Formula::Atom(Atom::Compare(t2, op2))) = (la, lb)
    {
        if t1 == t2 {
            let mask = op_mask(*op1) | op_mask(*op2);
            let mut out = shared();
            if let Some(op) = mask_op(mask) {
                out.push(Formula::Atom(Atom::compare(t1.clone(), op)));
            }
            // a full mask covers everything: the literal drops entirely
            return Some(out);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Sort, TimedVar};

    fn x() -> TimedVar {
        TimedVar::at_k("x", Sort::Real)
    }

    fn upper(c: i64, strict: bool) -> Formula {
        // x - c (<|<=) 0, i.e. x < c or x <= c
        let mut t = LinearTerm::var(x());
        t.add_constant(Rational::from_int(-c));
        Formula::compare(t, if strict { CompareOp::Lt } else { CompareOp::Le })
    }

    fn lower(c: i64, strict: bool) -> Formula {
        let mut t = LinearTerm::var(x());
        t.add_constant(Rational::from_int(-c));
        Formula::compare(t, if strict { CompareOp::Gt } else { CompareOp::Ge })
    }

    #[test]
    fn subsumed_upper_bound_dropped() {
        // (x < 3) and (x < 5) -> x < 3
        let f = Formula::and([upper(3, true), upper(5, true)]);
        assert_eq!(simplify(&f), upper(3, true));
    }

    #[test]
    fn constant_fold_in_conjunction() {
        // (0 < 1) and p -> p
        let p = Formula::Atom(Atom::BoolVar(TimedVar::at_k("p", Sort::Bool)));
        let tautology =
            Formula::compare(LinearTerm::constant(Rational::from_int(-1)), CompareOp::Lt);
        let f = Formula::and([tautology, p.clone()]);
        assert_eq!(simplify(&f), p);
    }

    #[test]
    fn idempotent_disjunction() {
        let p = Formula::Atom(Atom::BoolVar(TimedVar::at_k("p", Sort::Bool)));
        let f = Formula::Or(vec![p.clone(), p.clone()]);
        assert_eq!(simplify(&f), p);
    }

    #[test]
    fn equal_inclusive_bounds_become_equality() {
        // (x >= 2) and (x <= 2) -> x = 2
        let f = Formula::and([lower(2, false), upper(2, false)]);
        let mut t = LinearTerm::var(x());
        t.add_constant(Rational::from_int(-2));
        assert_eq!(simplify(&f), Formula::compare(t, CompareOp::Eq));
    }

    #[test]
    fn crossing_bounds_are_unsat() {
        // (x > 5) and (x < 3) -> false
        let f = Formula::and([lower(5, true), upper(3, true)]);
        assert!(simplify(&f).is_false());
    }

    #[test]
    fn superset_disjunct_absorbed() {
        // (a and b) or a -> a
        let a = lower(0, true);
        let b = upper(10, true);
        let f = Formula::Or(vec![Formula::And(vec![a.clone(), b]), a.clone()]);
        assert_eq!(simplify(&f), a);
    }

    #[test]
    fn complement_pair_in_or_is_true() {
        let f = Formula::Or(vec![upper(3, true), lower(3, false)]);
        assert!(simplify(&f).is_true());
    }
}
