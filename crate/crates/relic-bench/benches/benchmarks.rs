//! End-to-end and kernel benchmarks over the bundled fixtures.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use relic_bench::fixture;
use relic_core::induction::{run_pipeline, InductionConfig};
use relic_core::oracle::TestRng;
use relic_core::rangeprop::{output_range, parse_graph};
use relic_core::{
    compose, qe_int, qe_real, smt, speclang, Atom, CompareOp, Formula, LinearTerm, Rational, Sort,
    TimedVar,
};

fn load(name: &str) -> relic_core::model::SystemModel {
    speclang::parse(&fixture(name)).unwrap().lower().unwrap().0
}

fn bench_compose(c: &mut Criterion) {
    let abc = load("abc_real.rlc");
    c.bench_function("compose/abc_real", |b| {
        let input = abc.composition_input();
        b.iter(|| compose::strongest_property_static(black_box(&input)).unwrap())
    });

    let vehicle = load("vehicle.rlc");
    c.bench_function("compose/vehicle_timed", |b| {
        let input = vehicle.composition_input();
        b.iter(|| compose::strongest_property_timed(black_box(&input)).unwrap())
    });
}

fn bench_verify(c: &mut Criterion) {
    let text = fixture("vehicle.rlc");
    let (model, postulates) = speclang::parse(&text).unwrap().lower().unwrap();
    c.bench_function("verify/vehicle_pipeline", |b| {
        b.iter(|| {
            run_pipeline(
                black_box(&model),
                black_box(&postulates[0]),
                &InductionConfig::default(),
            )
            .unwrap()
        })
    });
}

fn random_conjunction(rng: &mut TestRng, vars: &[TimedVar]) -> Formula {
    let n = rng.int(3, 6);
    Formula::and((0..n).map(|_| {
        let mut t = LinearTerm::constant(Rational::from_int(rng.int(-5, 5)));
        for v in vars {
            if rng.chance(2, 3) {
                t.add_term(Rational::from_int(rng.int(-4, 4)), v.clone());
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
    }))
}

fn bench_elimination(c: &mut Criterion) {
    let reals: Vec<TimedVar> = ["x", "y", "z"]
        .iter()
        .map(|n| TimedVar::at_k(*n, Sort::Real))
        .collect();
    let mut rng = TestRng::new(7);
    let real_cases: Vec<Formula> = (0..64)
        .map(|_| random_conjunction(&mut rng, &reals))
        .collect();
    c.bench_function("qe_real/fm_block", |b| {
        let mut i = 0;
        b.iter(|| {
            let f = &real_cases[i % real_cases.len()];
            i += 1;
            qe_real::eliminate_block(&reals[..2], black_box(f)).unwrap()
        })
    });

    let ints: Vec<TimedVar> = ["a", "b"]
        .iter()
        .map(|n| TimedVar::at_k(*n, Sort::Int))
        .collect();
    let int_cases: Vec<Formula> = (0..64)
        .map(|_| random_conjunction(&mut rng, &ints))
        .collect();
    c.bench_function("qe_int/cooper", |b| {
        let mut i = 0;
        b.iter(|| {
            let f = &int_cases[i % int_cases.len()];
            i += 1;
            qe_int::eliminate_exists_int(&ints[0], black_box(f)).unwrap()
        })
    });
}

fn bench_sat(c: &mut Criterion) {
    let text = "(declare-fun x () Int)(declare-fun y () Real)\
                (assert (>= x 1))(assert (<= x 9))(assert (= y (* 3 x)))\
                (assert (> y 20))(check-sat)";
    let problem = smt::parse_smtlib(text).unwrap();
    c.bench_function("smt/mixed_refinement", |b| {
        b.iter(|| smt::check_sat(black_box(&problem)).unwrap())
    });
}

fn bench_range(c: &mut Criterion) {
    let graph = parse_graph(&fixture("abs.bg")).unwrap();
    c.bench_function("range/abs_precise", |b| {
        b.iter(|| output_range(black_box(&graph), "result").unwrap())
    });
}

criterion_group!(
    benches,
    bench_compose,
    bench_verify,
    bench_elimination,
    bench_sat,
    bench_range
);
criterion_main!(benches);
