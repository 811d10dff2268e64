//! Compositional verification toolkit built on quantifier elimination over
//! linear arithmetic.
//!
//! The crate is organized around a small formula kernel ([`formula`]) with
//! exact rational coefficients, two elimination engines ([`qe_real`] for
//! linear real arithmetic with booleans, [`qe_int`] for Presburger integer
//! arithmetic), and the layers that use them: contract composition
//! ([`compose`]), k-induction ([`induction`]), an SMT-LIB satisfiability
//! bridge ([`smt`]), and range propagation over dataflow block graphs
//! ([`rangeprop`]). The [`speclang`] module parses the `.rlc` system
//! description language into a [`model::SystemModel`].

pub mod ast;
pub mod compose;
pub mod error;
pub mod formula;
pub mod induction;
pub mod model;
pub mod normal;
pub mod oracle;
pub mod qe_int;
pub mod qe_real;
pub mod rangeprop;
pub mod rational;
pub mod report;
pub mod simplify;
pub mod smt;
pub mod speclang;

pub use error::Error;
pub use formula::{
    Assignment, Atom, CompareOp, Formula, LinearTerm, Sort, TimeIndex, TimedVar, Value,
};
pub use rational::Rational;
