//! Acceptance suite: one test per shipped claim, each printing a PASS line
//! (run with `--nocapture` to see them). Tolerances are exact logical
//! equivalences decided by QE unless stated otherwise; runtime budgets are
//! asserted inside each test.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use relic_core::compose::{self};
use relic_core::induction::{run_pipeline, InductionConfig, Verdict};
use relic_core::model::{Postulate, SystemModel};
use relic_core::oracle::{self, TestRng};
use relic_core::rangeprop::{
    self, naive_interval_range, output_range, parse_graph, parse_net, Block, BlockDecl, BlockGraph,
    InputConstraint, Interval, Wire,
};
use relic_core::smt;
use relic_core::speclang;
use relic_core::{
    qe_int, qe_real, Assignment, Atom, CompareOp, Formula, LinearTerm, Rational, Sort, TimedVar,
    Value,
};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.pop();
    p.pop();
    p.push("fixtures");
    p.push(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn load(name: &str) -> (SystemModel, Vec<Postulate>) {
    speclang::parse(&fixture(name)).unwrap().lower().unwrap()
}

fn rv(name: &str, off: i64) -> TimedVar {
    TimedVar::rel(name, off, Sort::Real)
}

fn iv(name: &str) -> TimedVar {
    TimedVar::at_k(name, Sort::Int)
}

fn rat(n: i64) -> Rational {
    Rational::from_int(n)
}

fn within(budget_s: u64, took: Duration, what: &str) {
    assert!(
        took < Duration::from_secs(budget_s),
        "{what} took {took:?}, budget {budget_s}s"
    );
}

#[test]
fn criterion_1_manufacturing_cascade() {
    let start = Instant::now();
    let (model, _) = load("buffers.rlc");
    let ssp = compose::strongest_property_static(&model.composition_input()).unwrap();

    // in1 - out2 < 2B, proved equivalent by eliminating the universally
    // closed biconditional
    let mut t = LinearTerm::var(rv("in1", 0));
    t.add_term(rat(-1), rv("out2", 0));
    t.add_term(rat(-2), rv("B", 0));
    let expect = Formula::compare(t, CompareOp::Lt);
    let mut closed = Formula::iff(ssp.clone(), expect);
    for v in closed.free_vars() {
        closed = Formula::forall(v, closed);
    }
    assert!(qe_real::eliminate_all(&closed).unwrap().is_true());

    let took = start.elapsed();
    within(1, took, "criterion 1");
    println!("PASS criterion 1: manufacturing cascade composes to in1 - out2 < 2B ({took:?})");
}

#[test]
fn criterion_2_abc_real_domain() {
    let start = Instant::now();
    let (model, postulates) = load("abc_real.rlc");
    let input = model.composition_input();
    let ssp = compose::strongest_property_static(&input).unwrap();

    let mut antecedent = LinearTerm::var(rv("In_S", 0));
    antecedent.add_constant(rat(-10));
    let mut bound = LinearTerm::var(rv("Out_S", 0));
    bound.add_term(rat(-4), rv("In_S", 0));
    bound.add_constant(rat(-15));
    let expect = Formula::implies(
        Formula::compare(antecedent, CompareOp::Le),
        Formula::compare(bound, CompareOp::Lt),
    );
    assert!(qe_real::equivalent(&ssp, &expect).unwrap(), "ssp = {ssp}");

    let postl = &postulates[0].whole.rel;
    let outcome = run_pipeline(&model, &postulates[0], &InductionConfig::default()).unwrap();
    let Verdict::Invalid { trace, .. } = &outcome.verdict else {
        panic!("expected invalid, got {:?}", outcome.verdict);
    };
    let ce = &trace[0];
    let violated = Formula::and([ssp.clone(), Formula::not(postl.clone())]);
    assert!(
        violated.evaluate(ce).unwrap(),
        "counterexample {ce} does not witness"
    );

    let took = start.elapsed();
    within(1, took, "criterion 2");
    println!("PASS criterion 2: ABC real-domain ssp matches, postulate invalid with genuine counterexample ({took:?})");
}

#[test]
fn criterion_3_abc_integer_domain() {
    let start = Instant::now();
    let (model, postulates) = load("abc_int.rlc");
    let input = model.composition_input();
    let ssp = compose::strongest_property_static(&input).unwrap();

    // ssp implies In_S <= 10 => Out_S <= 4*In_S + 12, by integer QE
    let mut antecedent = LinearTerm::var(iv("In_S"));
    antecedent.add_constant(rat(-10));
    let mut bound = LinearTerm::var(iv("Out_S"));
    bound.add_term(rat(-4), iv("In_S"));
    bound.add_constant(rat(-12));
    let tighter = Formula::implies(
        Formula::compare(antecedent, CompareOp::Le),
        Formula::compare(bound, CompareOp::Le),
    );
    let mut closed = Formula::implies(ssp.clone(), tighter);
    for v in closed.free_vars() {
        closed = Formula::forall(v, closed);
    }
    assert!(qe_int::decide_sentence_int(&closed).unwrap());

    let outcome = run_pipeline(&model, &postulates[0], &InductionConfig::default()).unwrap();
    assert!(outcome.verdict.is_valid(), "{:?}", outcome.verdict);

    let took = start.elapsed();
    within(5, took, "criterion 3");
    println!("PASS criterion 3: ABC integer-domain ssp is stricter and the postulate verifies ({took:?})");
}

#[test]
fn criterion_4_delay_cascade() {
    let start = Instant::now();
    let (model, _) = load("delay_cascade.rlc");
    let result = compose::strongest_property_timed(&model.composition_input()).unwrap();

    let mut t = LinearTerm::var(rv("y2", 0));
    t.add_term(rat(-1), rv("u1", -2));
    let expect = Formula::compare(t, CompareOp::Eq);
    assert!(
        qe_real::equivalent(&result.ssp, &expect).unwrap(),
        "ssp = {}",
        result.ssp
    );

    let y2 = |s| TimedVar::abs("y2", s, Sort::Real);
    let mut t0 = LinearTerm::var(y2(0));
    t0.add_constant(rat(0));
    let mut t1 = LinearTerm::var(y2(1));
    t1.add_constant(rat(-1));
    let expect_init = Formula::and([
        Formula::compare(t0, CompareOp::Eq),
        Formula::compare(t1, CompareOp::Eq),
    ]);
    assert!(
        qe_real::equivalent(&result.init, &expect_init).unwrap(),
        "init = {}",
        result.init
    );

    let took = start.elapsed();
    println!("PASS criterion 4: delay cascade gives y2(k) = u1(k-2) with init y2(0)=0, y2(1)=1 ({took:?})");
}

#[test]
fn criterion_5_redundant_replica_pruning() {
    let start = Instant::now();
    let (model, _) = load("example6.rlc");
    assert_eq!(model.order_bound(), 2, "order bound");
    let result = compose::strongest_property_timed(&model.composition_input()).unwrap();

    let mut t = LinearTerm::var(rv("z", 0));
    t.add_term(rat(-1), rv("u", -1));
    t.add_term(rat(-1), rv("w", -1));
    let one = Formula::compare(t, CompareOp::Eq);
    let two = Formula::and([one.clone(), one.shift(-1).unwrap()]);

    assert!(
        qe_real::equivalent(&result.raw_ssp, &two).unwrap(),
        "raw = {}",
        result.raw_ssp
    );
    assert!(
        qe_real::equivalent(&result.ssp, &one).unwrap(),
        "pruned = {}",
        result.ssp
    );

    let took = start.elapsed();
    println!("PASS criterion 5: two-replica form before pruning, single conjunct after, bound 2 ({took:?})");
}

#[test]
fn criterion_6_vehicle_benchmark() {
    let start = Instant::now();
    let (model, postulates) = load("vehicle.rlc");
    assert_eq!(model.order_bound(), 3, "order bound");

    let outcome = run_pipeline(&model, &postulates[0], &InductionConfig::default()).unwrap();
    assert_eq!(outcome.composition.pruned_order, 1);

    let mut t = LinearTerm::monomial(rat(51), rv("ActualSpeed", 0));
    t.add_term(rat(-49), rv("ActualSpeed", -1));
    t.add_term(rat(-1), rv("TargetSpeed", -1));
    t.add_term(rat(-1), rv("TargetSpeed", 0));
    let expect = Formula::compare(t, CompareOp::Eq);
    assert!(
        qe_real::equivalent(&outcome.composition.ssp, &expect).unwrap(),
        "ssp = {}",
        outcome.composition.ssp
    );

    let mut ti = LinearTerm::monomial(rat(51), TimedVar::abs("ActualSpeed", 0, Sort::Real));
    ti.add_term(rat(-1), TimedVar::abs("TargetSpeed", 0, Sort::Real));
    let expect_init = Formula::compare(ti, CompareOp::Eq);
    assert!(
        qe_real::equivalent(&outcome.composition.init, &expect_init).unwrap(),
        "init = {}",
        outcome.composition.init
    );

    match outcome.verdict {
        Verdict::Valid { at_k: 1 } => {}
        other => panic!("expected Valid(1), got {other:?}"),
    }

    let took = start.elapsed();
    within(10, took, "criterion 6");
    println!("PASS criterion 6: vehicle bound 3, pruned order 1, displayed ssp/init, Valid(1) ({took:?})");
}

#[test]
fn criterion_7_range_propagation() {
    let start = Instant::now();
    let abs = parse_graph(&fixture("abs.bg")).unwrap();
    let report = output_range(&abs, "result").unwrap();
    let lo = report.lower.clone().expect("lower bound");
    let hi = report.upper.clone().expect("upper bound");
    assert_eq!((lo.value.clone(), lo.strict), (rat(0), false));
    assert_eq!((hi.value.clone(), hi.strict), (rat(5), false));

    // sound against a 21-point grid simulation of |x| over [-5, 5]
    let x = TimedVar::at_k("out_inport", Sort::Real);
    for asg in oracle::grid_assignments(std::slice::from_ref(&x), 5, true) {
        let xv = oracle::num_of(&asg, &x);
        let y = if xv.is_negative() { -&xv } else { xv.clone() };
        assert!(
            lo.value <= y && y <= hi.value,
            "grid point |{xv}| escapes [0,5]"
        );
    }

    let baseline = naive_interval_range(&abs, "result").unwrap();
    assert_eq!(baseline, Interval::new(rat(-5), rat(5)));

    let net = parse_net(&fixture("relu_pair.net")).unwrap();
    let pair = output_range(&net, "y").unwrap();
    assert_eq!(pair.lower.clone().unwrap().value, rat(0));
    assert_eq!(pair.upper.clone().unwrap().value, rat(1));
    let pair_baseline = naive_interval_range(&net, "y").unwrap();
    assert_eq!(pair_baseline, Interval::new(rat(0), rat(2)));

    let took = start.elapsed();
    println!(
        "PASS criterion 7: abs range [0,5] vs baseline [-5,5]; relu pair [0,1] vs baseline [0,2] ({took:?})"
    );
}

/// Lag-filter graph for a concrete time constant: with sample time 1/20,
/// y = (40-tau)/(40+tau) * y_prev + 1/(40+tau) * (u + u_prev).
fn lag_filter(tau: Rational) -> BlockGraph {
    let forty = rat(40);
    let denom = &forty + &tau;
    let a = &(&forty - &tau) / &denom;
    let b = Rational::one() / denom;
    let block = |name: &str, block: Block| BlockDecl {
        name: name.into(),
        block,
    };
    let wire = |from: &str, to: &str, pin: &str| Wire {
        from_block: from.into(),
        to_block: to.into(),
        to_pin: pin.into(),
    };
    BlockGraph {
        name: "lag".into(),
        blocks: vec![
            block("out_inport", Block::Input(InputConstraint::Free)),
            block("u_prev", Block::UnitDelay(rat(0))),
            block("y_prev", Block::UnitDelay(rat(0))),
            block("g_feedback", Block::Gain(a)),
            block("g_now", Block::Gain(b.clone())),
            block("g_prev", Block::Gain(b)),
            block("out_outport", Block::Sum(vec![1, 1, 1])),
            block("result", Block::Output),
        ],
        wires: vec![
            wire("out_inport", "g_now", "in"),
            wire("out_inport", "u_prev", "in"),
            wire("u_prev", "g_prev", "in"),
            wire("out_outport", "y_prev", "in"),
            wire("y_prev", "g_feedback", "in"),
            wire("g_feedback", "out_outport", "in1"),
            wire("g_now", "out_outport", "in2"),
            wire("g_prev", "out_outport", "in3"),
            wire("out_outport", "result", "in"),
        ],
        algebraic_ok: false,
    }
}

#[test]
fn criterion_8_lag_filter() {
    let start = Instant::now();
    // the displayed difference equation, for several time constants
    for tau in [rat(1), Rational::ratio(1, 2), rat(3)] {
        let g = lag_filter(tau.clone());
        let io = rangeprop::io_relation(&g).unwrap();
        let y = |j| rv("out_outport", j);
        let u = |j| rv("out_inport", j);
        // (40+tau)*y(k) - (40-tau)*y(k-1) - u(k-1) - u(k) = 0
        let mut t = LinearTerm::monomial(&rat(40) + &tau, y(0));
        t.add_term(-&(&rat(40) - &tau), y(-1));
        t.add_term(rat(-1), u(-1));
        t.add_term(rat(-1), u(0));
        let expect = Formula::compare(t, CompareOp::Eq);
        assert!(
            qe_real::equivalent(&io.relation, &expect).unwrap(),
            "tau = {tau}: relation = {}",
            io.relation
        );
        // (40+tau)*y(0) - u(0) = 0
        let mut ti =
            LinearTerm::monomial(&rat(40) + &tau, TimedVar::abs("out_outport", 0, Sort::Real));
        ti.add_term(rat(-1), TimedVar::abs("out_inport", 0, Sort::Real));
        let expect_init = Formula::compare(ti, CompareOp::Eq);
        assert!(
            qe_real::equivalent(&io.init, &expect_init).unwrap(),
            "tau = {tau}: init = {}",
            io.init
        );
    }

    // 10-step simulation with tau = 1 satisfies the recurrence exactly
    let g = lag_filter(rat(1));
    let io = rangeprop::io_relation(&g).unwrap();
    let us: Vec<Rational> = vec![3, -1, 4, 1, -5, 9, 2, -6, 5, 3]
        .into_iter()
        .map(rat)
        .collect();
    let mut inputs = BTreeMap::new();
    inputs.insert("out_inport".to_string(), us.clone());
    let traces = rangeprop::simulate(&g, &inputs, 10).unwrap();
    let ys: Vec<Rational> = traces["out_outport"]
        .iter()
        .map(|v| match v {
            Value::Num(r) => r.clone(),
            Value::Bool(_) => panic!(),
        })
        .collect();
    let mut asg0 = Assignment::new();
    asg0.set_num(TimedVar::abs("out_inport", 0, Sort::Real), us[0].clone());
    asg0.set_num(TimedVar::abs("out_outport", 0, Sort::Real), ys[0].clone());
    assert!(io.init.evaluate(&asg0).unwrap(), "init rejects step 0");
    for t in 1..10 {
        let mut asg = Assignment::new();
        for j in [t - 1, t] {
            let off = j as i64 - t as i64;
            asg.set_num(rv("out_inport", off), us[j].clone());
            asg.set_num(rv("out_outport", off), ys[j].clone());
        }
        assert!(
            io.relation.evaluate(&asg).unwrap(),
            "recurrence fails at step {t}"
        );
    }

    let took = start.elapsed();
    println!("PASS criterion 8: lag-filter difference equation and init match; 10-step simulation exact ({took:?})");
}

// --------------------------------------------------------------------------
// criterion 9: the property suites
// --------------------------------------------------------------------------

#[test]
fn criterion_9a_fm_oracle_agreement() {
    let start = Instant::now();
    let vars: Vec<TimedVar> = ["x", "y", "z"].iter().map(|n| rv(n, 0)).collect();
    let mut rng = TestRng::new(0xacce97a);
    for case in 0..500 {
        let n = rng.int(2, 6);
        let literals: Vec<Formula> = (0..n)
            .map(|_| {
                let mut t = LinearTerm::constant(rat(rng.int(-5, 5)));
                for v in &vars {
                    if rng.chance(2, 3) {
                        t.add_term(rat(rng.int(-4, 4)), v.clone());
                    }
                }
                let ops = [
                    CompareOp::Lt,
                    CompareOp::Le,
                    CompareOp::Gt,
                    CompareOp::Ge,
                    CompareOp::Eq,
                ];
                Formula::Atom(Atom::compare(t, *rng.pick(&ops)))
            })
            .collect();
        let v = rng.pick(&vars).clone();
        let mine = qe_real::eliminate_exists(&v, &Formula::and(literals.clone())).unwrap();
        let reference = oracle::naive_fm_conjunction(&v, &literals).unwrap();
        assert!(
            qe_real::equivalent(&mine, &reference).unwrap(),
            "case {case}: {mine} != {reference}"
        );
    }
    let took = start.elapsed();
    within(60, took, "criterion 9a");
    println!("PASS criterion 9a: qe-real matches the naive all-pairs FM oracle on 500 conjunctions ({took:?})");
}

#[test]
fn criterion_9b_cooper_enumeration_agreement() {
    let start = Instant::now();
    let vars: Vec<TimedVar> = ["a", "b", "c"].iter().map(|n| iv(n)).collect();
    let mut rng = TestRng::new(0xacce97b);
    let mut checked = 0;
    for case in 0..500 {
        let f = random_presburger(&mut rng, &vars);
        let v = rng.pick(&vars).clone();
        let g = match qe_int::eliminate_exists_int(&v, &f) {
            Ok(g) => g,
            Err(relic_core::Error::Resource(_)) => continue,
            Err(e) => panic!("case {case}: {e}"),
        };
        let rest: Vec<TimedVar> = vars.iter().filter(|w| **w != v).cloned().collect();
        for asg in oracle::grid_assignments(&rest, 3, false) {
            let window = oracle::cooper_window(&f, &v, &asg).unwrap();
            let expected = oracle::int_exists_in_window(&f, &asg, &v, window).unwrap();
            assert_eq!(g.evaluate(&asg).unwrap(), expected, "case {case} at {asg}");
            checked += 1;
        }
    }
    assert!(checked > 10_000, "only {checked} points checked");
    let took = start.elapsed();
    within(60, took, "criterion 9b");
    println!(
        "PASS criterion 9b: qe-int matches Cooper-window enumeration on 500 formulas ({took:?})"
    );
}

fn random_presburger(rng: &mut TestRng, vars: &[TimedVar]) -> Formula {
    let n = rng.int(2, 4);
    let atoms: Vec<Formula> = (0..n)
        .map(|_| {
            if rng.chance(1, 4) {
                let m = num_bigint::BigInt::from(rng.int(2, 4));
                let mut t = LinearTerm::constant(rat(rng.int(-3, 3)));
                for v in vars {
                    if rng.chance(1, 2) {
                        t.add_term(rat(rng.int(-3, 3)), v.clone());
                    }
                }
                let d = Formula::Atom(Atom::divides(m, t));
                if rng.chance(1, 3) {
                    Formula::not(d)
                } else {
                    d
                }
            } else {
                let mut t = LinearTerm::constant(rat(rng.int(-5, 5)));
                for v in vars {
                    if rng.chance(2, 3) {
                        t.add_term(rat(rng.int(-4, 4)), v.clone());
                    }
                }
                let ops = [
                    CompareOp::Lt,
                    CompareOp::Le,
                    CompareOp::Gt,
                    CompareOp::Ge,
                    CompareOp::Eq,
                    CompareOp::Ne,
                ];
                Formula::Atom(Atom::compare(t, *rng.pick(&ops)))
            }
        })
        .collect();
    if rng.chance(1, 3) && atoms.len() >= 2 {
        let (head, tail) = atoms.split_at(2);
        Formula::and(std::iter::once(Formula::or(head.to_vec())).chain(tail.iter().cloned()))
    } else {
        Formula::and(atoms)
    }
}

#[test]
fn criterion_9c_smt_model_soundness() {
    let start = Instant::now();
    let mut rng = TestRng::new(0xacce97c);
    let mut sat_count = 0;
    for case in 0..500 {
        let mut decls: Vec<(String, Sort)> = Vec::new();
        let n = rng.int(1, 3);
        for i in 0..n {
            let (name, sort) = match rng.int(0, 2) {
                0 => (format!("x{i}"), Sort::Real),
                1 => (format!("n{i}"), Sort::Int),
                _ => (format!("p{i}"), Sort::Bool),
            };
            decls.push((name, sort));
        }
        let numeric: Vec<TimedVar> = decls
            .iter()
            .filter(|(_, s)| *s != Sort::Bool)
            .map(|(n, s)| TimedVar::at_k(n.clone(), *s))
            .collect();
        let bools: Vec<TimedVar> = decls
            .iter()
            .filter(|(_, s)| *s == Sort::Bool)
            .map(|(n, s)| TimedVar::at_k(n.clone(), *s))
            .collect();
        let m = rng.int(1, 4);
        let assertions: Vec<Formula> = (0..m)
            .map(|_| {
                let atom = if numeric.is_empty() || (!bools.is_empty() && rng.chance(1, 3)) {
                    Formula::Atom(Atom::BoolVar(rng.pick(&bools).clone()))
                } else {
                    let mut t = LinearTerm::constant(rat(rng.int(-5, 5)));
                    for v in &numeric {
                        if rng.chance(2, 3) {
                            t.add_term(rat(rng.int(-3, 3)), v.clone());
                        }
                    }
                    let ops = [
                        CompareOp::Lt,
                        CompareOp::Le,
                        CompareOp::Gt,
                        CompareOp::Ge,
                        CompareOp::Eq,
                        CompareOp::Ne,
                    ];
                    Formula::Atom(Atom::compare(t, *rng.pick(&ops)))
                };
                if rng.chance(1, 4) {
                    Formula::not(atom)
                } else {
                    atom
                }
            })
            .collect();
        let problem = smt::SmtProblem {
            declarations: decls,
            assertions: assertions.clone(),
            logic: None,
            wants_check_sat: true,
            wants_model: true,
        };
        if let smt::SatOutcome::Sat(model) = smt::check_sat(&problem).unwrap() {
            sat_count += 1;
            for a in &assertions {
                assert!(
                    a.evaluate(&model).unwrap(),
                    "case {case}: model violates {a}"
                );
            }
        }
    }
    assert!(sat_count > 200, "generator degenerated: {sat_count} sat");
    let took = start.elapsed();
    within(60, took, "criterion 9c");
    println!(
        "PASS criterion 9c: every sat model satisfies every assertion on 500 problems ({took:?})"
    );
}

#[test]
fn criterion_9d_strongestness_grid_check() {
    let start = Instant::now();
    for name in ["buffers.rlc", "abc_real.rlc", "feedback_algebraic.rlc"] {
        let (model, _) = load(name);
        let input = model.composition_input();
        let ssp = compose::strongest_property_static(&input).unwrap();
        let phi = Formula::and(
            input
                .properties
                .iter()
                .chain(input.connections.iter())
                .cloned(),
        );
        // substitute the connection-pinned internals away so the exhaustive
        // grid runs over at most 3 free internal variables
        let mut reduced = phi.clone();
        for c in &model.connections {
            if input.internals.contains(&c.to.name) && c.to.sort != Sort::Bool {
                let to = TimedVar::at_k(c.to.name.clone(), c.to.sort);
                let from = LinearTerm::var(TimedVar::at_k(c.from.name.clone(), c.from.sort));
                reduced = reduced.substitute(&to, &from).unwrap();
            }
        }
        let internals: Vec<TimedVar> = compose::internal_vars(&reduced, &input.internals);
        assert!(
            internals.len() <= 3,
            "{name}: {} free internals",
            internals.len()
        );
        let externals: Vec<TimedVar> = ssp.free_vars().into_iter().collect();
        for asg in oracle::grid_assignments(&externals, 2, false) {
            let qe_true = ssp.evaluate(&asg).unwrap();
            let grid_true = oracle::grid_satisfiable(&reduced, &asg, &internals, 4, true).unwrap();
            if grid_true {
                assert!(qe_true, "{name}: grid witness rejected at {asg}");
            }
        }
        // and the ssp is a consequence of the full conjunction
        assert!(
            qe_real::is_valid(&Formula::implies(phi, ssp)).unwrap(),
            "{name}"
        );
    }
    let took = start.elapsed();
    within(60, took, "criterion 9d");
    println!("PASS criterion 9d: strongestness grid check on static fixtures ({took:?})");
}

#[test]
fn criterion_9e_valid_verdicts_vs_simulation() {
    let start = Instant::now();

    // vehicle: Valid(1) and 1000 simulated recurrence traces never violate
    let (model, postulates) = load("vehicle.rlc");
    let out = run_pipeline(&model, &postulates[0], &InductionConfig::default()).unwrap();
    assert!(out.verdict.is_valid());
    let mut rng = TestRng::new(0xacce97e);
    for case in 0..1000 {
        let hold = case % 2 == 0;
        let mut target = Vec::new();
        let mut t = Rational::one();
        for _ in 0..20 {
            if !hold && rng.chance(1, 3) {
                t = rat(rng.int(-3, 3));
            }
            target.push(t.clone());
        }
        let fifty = rat(50);
        let ratio = Rational::ratio(51, 50);
        let (mut a_prev, mut e_prev) = (rat(0), rat(0));
        let mut chain = true;
        for (step, tv) in target.iter().enumerate() {
            let a = &(&a_prev + &(&(tv + &e_prev) / &fifty)) / &ratio;
            let guard_now = if step == 0 {
                target[0] == Rational::one()
            } else {
                target[step] == target[step - 1]
            };
            chain = chain && guard_now;
            if chain {
                assert!(a < Rational::one(), "case {case}: violation at step {step}");
            }
            e_prev = tv - &a;
            a_prev = a;
        }
    }

    // delay cascade: Valid and 1000 simulated traces agree with the postulate
    let (model, postulates) = load("delay_cascade.rlc");
    let out = run_pipeline(&model, &postulates[0], &InductionConfig::default()).unwrap();
    assert!(out.verdict.is_valid());
    for case in 0..1000 {
        let us: Vec<Rational> = (0..12).map(|_| rat(rng.int(-9, 9))).collect();
        let mut y1 = vec![Rational::one()];
        let mut y2 = vec![rat(0)];
        for t in 1..us.len() {
            y1.push(us[t - 1].clone());
            y2.push(y1[t - 1].clone());
        }
        // postulate semantics: y2 = prev(prev(u1, 1), 0)
        for t in 0..us.len() {
            let expect = match t {
                0 => rat(0),
                1 => Rational::one(),
                _ => us[t - 2].clone(),
            };
            assert_eq!(y2[t], expect, "case {case} step {t}");
        }
    }

    let took = start.elapsed();
    within(60, took, "criterion 9e");
    println!("PASS criterion 9e: Valid verdicts never contradicted by 1000 simulated traces per fixture ({took:?})");
}
