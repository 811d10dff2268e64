//! Shared random generators for the property suites. Everything is seeded;
//! reruns are bit-identical.
#![allow(dead_code)] // each test binary uses its own slice of the helpers

use num_bigint::BigInt;

use relic_core::oracle::TestRng;
use relic_core::{Atom, CompareOp, Formula, LinearTerm, Rational, Sort, TimedVar};

pub const REAL_NAMES: [&str; 4] = ["x", "y", "z", "w"];
pub const INT_NAMES: [&str; 3] = ["a", "b", "c"];

pub fn real_var(name: &str) -> TimedVar {
    TimedVar::at_k(name, Sort::Real)
}

pub fn int_var(name: &str) -> TimedVar {
    TimedVar::at_k(name, Sort::Int)
}

pub fn random_term(rng: &mut TestRng, vars: &[TimedVar], coeff_span: i64) -> LinearTerm {
    let mut t = LinearTerm::constant(Rational::from_int(rng.int(-5, 5)));
    for v in vars {
        if rng.chance(2, 3) {
            t.add_term(
                Rational::from_int(rng.int(-coeff_span, coeff_span)),
                v.clone(),
            );
        }
    }
    t
}

pub fn random_cmp_op(rng: &mut TestRng, with_eq: bool) -> CompareOp {
    let ops: &[CompareOp] = if with_eq {
        &[
            CompareOp::Lt,
            CompareOp::Le,
            CompareOp::Gt,
            CompareOp::Ge,
            CompareOp::Eq,
            CompareOp::Ne,
        ]
    } else {
        &[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge]
    };
    *rng.pick(ops)
}

/// Conjunction of comparison literals (no disequalities), the naive-FM
/// oracle's input shape.
pub fn random_real_conjunction(rng: &mut TestRng, vars: &[TimedVar]) -> Vec<Formula> {
    let n = rng.int(2, 6);
    (0..n)
        .map(|_| {
            let t = random_term(rng, vars, 4);
            let op = if rng.chance(1, 5) {
                CompareOp::Eq
            } else {
                random_cmp_op(rng, false)
            };
            Formula::Atom(Atom::compare(t, op))
        })
        .collect()
}

/// Quantifier-free formula with boolean structure over real variables.
pub fn random_real_formula(rng: &mut TestRng, vars: &[TimedVar], depth: u32) -> Formula {
    if depth == 0 || rng.chance(1, 3) {
        return Formula::Atom(Atom::compare(
            random_term(rng, vars, 4),
            random_cmp_op(rng, true),
        ));
    }
    match rng.int(0, 3) {
        0 => Formula::and([
            random_real_formula(rng, vars, depth - 1),
            random_real_formula(rng, vars, depth - 1),
        ]),
        1 => Formula::or([
            random_real_formula(rng, vars, depth - 1),
            random_real_formula(rng, vars, depth - 1),
        ]),
        2 => Formula::not(random_real_formula(rng, vars, depth - 1)),
        _ => Formula::implies(
            random_real_formula(rng, vars, depth - 1),
            random_real_formula(rng, vars, depth - 1),
        ),
    }
}

/// Quantifier-free Presburger formula: comparisons plus divisibility
/// literals with moduli in {2, 3, 4}.
pub fn random_int_formula(rng: &mut TestRng, vars: &[TimedVar], depth: u32) -> Formula {
    if depth == 0 || rng.chance(1, 2) {
        if rng.chance(1, 4) {
            let m = BigInt::from(rng.int(2, 4));
            let t = random_term(rng, vars, 3);
            let atom = Formula::Atom(Atom::divides(m, t));
            return if rng.chance(1, 3) {
                Formula::not(atom)
            } else {
                atom
            };
        }
        return Formula::Atom(Atom::compare(
            random_term(rng, vars, 4),
            random_cmp_op(rng, true),
        ));
    }
    match rng.int(0, 2) {
        0 => Formula::and([
            random_int_formula(rng, vars, depth - 1),
            random_int_formula(rng, vars, depth - 1),
        ]),
        1 => Formula::or([
            random_int_formula(rng, vars, depth - 1),
            random_int_formula(rng, vars, depth - 1),
        ]),
        _ => Formula::not(random_int_formula(rng, vars, depth - 1)),
    }
}
