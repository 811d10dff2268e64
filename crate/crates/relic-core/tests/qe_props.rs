//! Property suites for the elimination engines, checked against independent
//! oracles: the naive all-pairs Fourier–Motzkin for conjunctions, grid
//! search for the general real case (one-sided, with a dense recheck), and
//! exhaustive window enumeration for the integers (two-sided).

mod common;

use common::*;
use relic_core::oracle::{self, TestRng};
use relic_core::{qe_int, qe_real, simplify::simplify, Formula, Sort, TimedVar};

#[test]
fn fm_matches_naive_all_pairs_oracle_on_conjunctions() {
    let vars: Vec<TimedVar> = REAL_NAMES[..3].iter().map(|n| real_var(n)).collect();
    let mut rng = TestRng::new(11);
    for case in 0..500 {
        let literals = random_real_conjunction(&mut rng, &vars);
        let v = rng.pick(&vars).clone();
        let f = Formula::and(literals.clone());
        let mine = qe_real::eliminate_exists(&v, &f).expect("eliminate");
        let reference = oracle::naive_fm_conjunction(&v, &literals).expect("oracle");
        assert!(
            qe_real::equivalent(&mine, &reference).expect("validity check"),
            "case {case}: eliminate_exists({v}, {f}) = {mine} but oracle says {reference}"
        );
        // independent signal: grid agreement on the remaining variables
        let rest: Vec<TimedVar> = vars.iter().filter(|w| **w != v).cloned().collect();
        for asg in oracle::grid_assignments(&rest, 2, false) {
            assert_eq!(
                mine.evaluate(&asg).unwrap(),
                reference.evaluate(&asg).unwrap(),
                "case {case} at {asg}"
            );
        }
    }
}

#[test]
fn elimination_soundness_against_grid_search() {
    // grid-witness implies QE-true, always; QE-true with no grid witness
    // triggers a dense recheck, never a failure
    let vars: Vec<TimedVar> = REAL_NAMES[..3].iter().map(|n| real_var(n)).collect();
    let mut rng = TestRng::new(23);
    for case in 0..150 {
        let f = random_real_formula(&mut rng, &vars, 3);
        let split = rng.int(1, 2) as usize;
        let eliminated: Vec<TimedVar> = vars[..split].to_vec();
        let kept: Vec<TimedVar> = vars[split..].to_vec();
        let g = qe_real::eliminate_block(&eliminated, &f).expect("eliminate");
        for asg in oracle::grid_assignments(&kept, 2, true) {
            let qe_true = g.evaluate(&asg).unwrap();
            let grid = oracle::grid_satisfiable(&f, &asg, &eliminated, 4, true).unwrap();
            if grid {
                assert!(
                    qe_true,
                    "case {case}: grid witness exists but QE said false at {asg}"
                );
            } else if qe_true {
                // dense recheck; existence may sit between grid points
                let _ = oracle::grid_satisfiable(&f, &asg, &eliminated, 6, true).unwrap();
            }
        }
    }
}

#[test]
fn closed_real_formulas_fold_to_truth_constants() {
    let vars: Vec<TimedVar> = REAL_NAMES[..3].iter().map(|n| real_var(n)).collect();
    let mut rng = TestRng::new(37);
    for _ in 0..100 {
        let f = random_real_formula(&mut rng, &vars, 3);
        let mut closed = f.clone();
        for (i, v) in f.free_vars().into_iter().enumerate() {
            closed = if i % 2 == 0 {
                Formula::exists(v, closed)
            } else {
                Formula::forall(v, closed)
            };
        }
        let result = qe_real::eliminate_all(&closed).expect("eliminate_all");
        assert!(
            result.is_true() || result.is_false(),
            "closed formula left residue: {result}"
        );
    }
}

#[test]
fn simplify_preserves_semantics() {
    let vars: Vec<TimedVar> = REAL_NAMES[..3].iter().map(|n| real_var(n)).collect();
    let mut rng = TestRng::new(41);
    for case in 0..300 {
        let f = random_real_formula(&mut rng, &vars, 4);
        let s = simplify(&f);
        for asg in oracle::grid_assignments(&vars, 2, false) {
            assert_eq!(
                f.evaluate(&asg).unwrap(),
                s.evaluate(&asg).unwrap(),
                "case {case}: {f} vs {s} at {asg}"
            );
        }
    }
}

#[test]
fn witness_extraction_is_sound() {
    let vars: Vec<TimedVar> = REAL_NAMES[..3].iter().map(|n| real_var(n)).collect();
    let mut rng = TestRng::new(53);
    let mut sat_cases = 0;
    for case in 0..300 {
        let f = Formula::and(random_real_conjunction(&mut rng, &vars));
        let decided = qe_real::satisfiable(&vars, &f).expect("decide");
        let witness = qe_real::extract_witness(&f, &vars).expect("extract");
        assert_eq!(witness.is_some(), decided, "case {case}: {f}");
        let Some(w) = witness else { continue };
        sat_cases += 1;
        assert!(
            qe_real::evaluate_nonstandard(&f, &w).expect("nonstandard eval"),
            "case {case}: witness {w} rejected by {f}"
        );
        let asg = qe_real::concretize_witness(&w, &f)
            .unwrap_or_else(|| panic!("case {case}: {w} failed to concretize on {f}"));
        assert!(
            f.evaluate(&asg).unwrap(),
            "case {case}: concrete {asg} rejected"
        );
    }
    assert!(
        sat_cases > 50,
        "generator degenerated: only {sat_cases} sat cases"
    );
}

#[test]
fn cooper_matches_window_enumeration() {
    let vars: Vec<TimedVar> = INT_NAMES.iter().map(|n| int_var(n)).collect();
    let mut rng = TestRng::new(67);
    for case in 0..500 {
        let f = random_int_formula(&mut rng, &vars, 2);
        let v = rng.pick(&vars).clone();
        let g = match qe_int::eliminate_exists_int(&v, &f) {
            Ok(g) => g,
            Err(relic_core::Error::Resource(_)) => continue, // cap hit; guard works
            Err(e) => panic!("case {case}: {e}"),
        };
        assert!(
            !g.free_vars().contains(&v),
            "case {case}: {v} survived in {g}"
        );
        let rest: Vec<TimedVar> = vars.iter().filter(|w| **w != v).cloned().collect();
        for asg in oracle::grid_assignments(&rest, 3, false) {
            let window = oracle::cooper_window(&f, &v, &asg).expect("window");
            let expected = oracle::int_exists_in_window(&f, &asg, &v, window).unwrap();
            let actual = g.evaluate(&asg).unwrap();
            assert_eq!(
                actual, expected,
                "case {case}: exists {v}. {f} at {asg} (window {window}) gave {actual}"
            );
        }
    }
}

#[test]
fn int_witness_agrees_with_sentence_decision() {
    let vars: Vec<TimedVar> = INT_NAMES[..2].iter().map(|n| int_var(n)).collect();
    let mut rng = TestRng::new(79);
    let mut sat_cases = 0;
    for case in 0..200 {
        let f = random_int_formula(&mut rng, &vars, 2);
        let mut closed = f.clone();
        for v in f.free_vars() {
            closed = Formula::exists(v, closed);
        }
        let decided = match qe_int::decide_sentence_int(&closed) {
            Ok(d) => d,
            Err(relic_core::Error::Resource(_)) => continue,
            Err(e) => panic!("case {case}: {e}"),
        };
        let witness_vars: Vec<TimedVar> = f.free_vars().into_iter().collect();
        let witness = qe_int::int_witness(&f, &witness_vars).expect("witness");
        assert_eq!(witness.is_some(), decided, "case {case}: {f}");
        if let Some(asg) = witness {
            sat_cases += 1;
            assert!(
                f.evaluate(&asg).unwrap(),
                "case {case}: {asg} rejected by {f}"
            );
            for (v, value) in asg.iter() {
                if v.sort == Sort::Int {
                    let relic_core::Value::Num(r) = value else {
                        panic!()
                    };
                    assert!(r.is_integer(), "case {case}: non-integer witness for {v}");
                }
            }
        }
    }
    assert!(
        sat_cases > 40,
        "generator degenerated: only {sat_cases} sat cases"
    );
}

#[test]
fn integer_domain_divisibility_examples() {
    // the cong-producing path: eliminating x from y = 2x leaves 2 | y, and
    // stacked congruences compose
    let y = int_var("b");
    let x = int_var("a");
    let two_x = relic_core::LinearTerm::monomial(relic_core::Rational::from_int(2), x.clone());
    let f = Formula::cmp(
        relic_core::LinearTerm::var(y.clone()),
        relic_core::CompareOp::Eq,
        two_x,
    );
    let g = qe_int::eliminate_exists_int(&x, &f).unwrap();
    let mut found_divides = false;
    fn scan(f: &Formula, found: &mut bool) {
        match f {
            Formula::Atom(relic_core::Atom::Divides(..)) => *found = true,
            Formula::Not(g) => scan(g, found),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| scan(g, found)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                scan(a, found);
                scan(b, found);
            }
            _ => {}
        }
    }
    scan(&g, &mut found_divides);
    assert!(found_divides, "no divisibility atom in {g}");
}
