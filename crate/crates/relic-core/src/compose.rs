//! The composition calculus: strongest system-property, system-initial-
//! condition, shift-redundancy pruning, and one-shot verification of
//! postulated time-independent properties.
//!
//! Composition is the same existential projection for every interconnection
//! style: conjoin the atomic-properties with the connection equalities and
//! eliminate the internal signals. For time-dependent systems the conjuncts
//! are first replicated across the window `[k-M, k]`, `M` the sum of the
//! atomic-property orders, with each property shifted only as far as its own
//! order allows.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Atom, CompareOp, Formula, Sort, TimedVar};
use crate::model::SystemModel;
use crate::qe_int;
use crate::qe_real::{self, Witness};
use crate::simplify::simplify;

/// Everything composition needs, independent of where the system came from
/// (contract model or dataflow block graph).
#[derive(Debug, Clone)]
pub struct CompositionInput {
    /// atomic-properties, relative-indexed, newest offset 0
    pub properties: Vec<Formula>,
    /// connection equalities (order 0)
    pub connections: Vec<Formula>,
    /// atomic-initial-conditions, absolute-indexed
    pub initials: Vec<Formula>,
    /// signal names to hide
    pub internals: BTreeSet<String>,
    pub domain: Sort,
}

impl SystemModel {
    pub fn composition_input(&self) -> CompositionInput {
        CompositionInput {
            properties: self.properties.iter().map(|p| p.body.clone()).collect(),
            connections: self.connection_equalities(),
            initials: self.initials.iter().map(|i| i.body.clone()).collect(),
            internals: self.internal_names(),
            domain: self.domain,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompositionResult {
    /// pruned strongest system-property, newest offset 0
    pub ssp: Formula,
    /// the pre-pruning property over the full window
    pub raw_ssp: Formula,
    /// system-initial-condition over steps `[0, pruned_order)`; `true` when
    /// the model has no initial conditions
    pub init: Formula,
    pub used_order_bound: u64,
    pub pruned_order: u64,
}

/// Strongest system-property of a time-independent system: eliminate the
/// internals from the conjunction of properties and connection equalities.
pub fn strongest_property_static(input: &CompositionInput) -> Result<Formula> {
    let phi = Formula::and(
        input
            .properties
            .iter()
            .chain(input.connections.iter())
            .cloned(),
    );
    let vars = internal_vars(&phi, &input.internals);
    eliminate(&phi, vars, input.domain)
}

/// Strongest system-property of a time-dependent system via time-shifted
/// replicas, plus the composed initial condition.
pub fn strongest_property_timed(input: &CompositionInput) -> Result<CompositionResult> {
    let bound: u64 = input
        .properties
        .iter()
        .map(|p| p.order())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let mut replicas = Vec::new();
    for phi in input.properties.iter().chain(input.connections.iter()) {
        let d = phi.order()?;
        for i in 0..=(bound - d) {
            replicas.push(phi.shift(-(i as i64))?);
        }
    }
    let phi_all = Formula::and(replicas);
    let vars = internal_vars(&phi_all, &input.internals);
    let raw_ssp = eliminate(&phi_all, vars, input.domain)?;

    let pruned = prune_redundant_shifts(&raw_ssp, bound, input.domain)?;
    let ssp = match pruned.max_offset() {
        Some(m) if m != 0 => pruned.shift(-m)?,
        _ => pruned,
    };
    let pruned_order = ssp.order()?;

    let init = if input.initials.is_empty() {
        Formula::truth(true)
    } else {
        initial_condition(input, pruned_order.max(1))?
    };

    Ok(CompositionResult {
        ssp,
        raw_ssp,
        init,
        used_order_bound: bound,
        pruned_order,
    })
}

/// System-initial-condition over the window `[0, window_order)`: initial
/// conditions plus every property and connection instance that fits, with
/// the internals at those steps eliminated.
pub fn initial_condition(input: &CompositionInput, window_order: u64) -> Result<Formula> {
    if input.initials.is_empty() {
        return Ok(Formula::truth(true));
    }
    let mut pieces = input.initials.clone();
    for phi in input.properties.iter().chain(input.connections.iter()) {
        let d = phi.order()?;
        for anchor in d..window_order {
            pieces.push(phi.instantiate_at(anchor as i64)?);
        }
    }
    let conj = Formula::and(pieces);
    let vars = internal_vars(&conj, &input.internals);
    eliminate(&conj, vars, input.domain)
}

/// Drops conjuncts whose information is carried by time-shifted replicas of
/// retained conjuncts. Candidate generators are the shift-canonical forms of
/// the conjuncts, lowest order first (elimination may hand back linear
/// combinations of the replicas, so membership is semantic, not syntactic).
/// A pruned form is committed only after a QE check that its shifted closure
/// over the original window is equivalent to the input; if no candidate set
/// passes, the input is returned unchanged.
pub fn prune_redundant_shifts(f: &Formula, window_order: u64, domain: Sort) -> Result<Formula> {
    let conjuncts = match f {
        Formula::And(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    if conjuncts.len() <= 1 && f.order()? == window_order {
        return Ok(f.clone());
    }
    // shift-canonical candidates, deduplicated, lowest order first
    let mut candidates: Vec<(u64, Formula)> = Vec::new();
    for c in &conjuncts {
        let anchor = c.max_offset().unwrap_or(0);
        let canon = c.shift(-anchor)?;
        let d = canon.order()?;
        if !candidates.iter().any(|(_, g)| g == &canon) {
            candidates.push((d, canon));
        }
    }
    candidates.sort();

    for take in 1..=candidates.len() {
        let retained: Vec<Formula> = candidates[..take].iter().map(|(_, g)| g.clone()).collect();
        let mut closure = Vec::new();
        for r in &retained {
            let d = r.order()?;
            for i in 0..=(window_order.saturating_sub(d)) {
                closure.push(r.shift(-(i as i64))?);
            }
        }
        if check_equivalent(&Formula::and(closure), f, domain)? {
            return Ok(simplify(&Formula::and(retained)));
        }
    }
    Ok(f.clone())
}

/// Verdict of a time-independent postulate check.
#[derive(Debug, Clone)]
pub enum StaticVerdict {
    Valid,
    Invalid {
        witness: Option<Witness>,
        concrete: Option<Assignment>,
    },
}

/// Checks `forall externals. ssp => postl`; on failure extracts and
/// concretizes a counterexample of `ssp and not postl`.
pub fn verify_postulated_static(
    ssp: &Formula,
    postl: &Formula,
    domain: Sort,
) -> Result<StaticVerdict> {
    let obligation = Formula::implies(ssp.clone(), postl.clone());
    if qe_real::is_valid(&obligation)? {
        return Ok(StaticVerdict::Valid);
    }
    let ce = Formula::and([ssp.clone(), Formula::not(postl.clone())]);
    let vars: Vec<TimedVar> = ce.free_vars().into_iter().collect();
    if domain == Sort::Int {
        let concrete = qe_int::int_witness(&ce, &vars)?;
        Ok(StaticVerdict::Invalid {
            witness: None,
            concrete,
        })
    } else {
        let witness = qe_real::extract_witness(&ce, &vars)?;
        let concrete = witness
            .as_ref()
            .and_then(|w| qe_real::concretize_witness(w, &ce));
        Ok(StaticVerdict::Invalid { witness, concrete })
    }
}

/// All occurrences (any time index) of the internal signals.
pub fn internal_vars(f: &Formula, internals: &BTreeSet<String>) -> Vec<TimedVar> {
    f.free_vars()
        .into_iter()
        .filter(|v| internals.contains(&v.name))
        .collect()
}

/// Existential elimination dispatched on the system domain: booleans and
/// reals as one block, integers through Cooper's method with unit-equality
/// substitutions first.
pub fn eliminate(f: &Formula, vars: Vec<TimedVar>, domain: Sort) -> Result<Formula> {
    match domain {
        Sort::Real => qe_real::eliminate_block(&vars, f),
        Sort::Int => {
            let (ints, rest): (Vec<_>, Vec<_>) =
                vars.into_iter().partition(|v| v.sort == Sort::Int);
            let mut g = if rest.is_empty() {
                f.clone()
            } else {
                qe_real::eliminate_block(&rest, f)?
            };
            let mut remaining = ints;
            while !remaining.is_empty() {
                // prefer variables a unit equality can substitute away
                let idx = remaining
                    .iter()
                    .position(|v| has_unit_equality(&g, v))
                    .unwrap_or(0);
                let v = remaining.remove(idx);
                g = qe_int::eliminate_exists_int(&v, &g)?;
            }
            Ok(simplify(&g))
        }
        Sort::Bool => Err(Error::Contract("system domain cannot be bool".into())),
    }
}

fn has_unit_equality(f: &Formula, v: &TimedVar) -> bool {
    let conjuncts: Vec<&Formula> = match f {
        Formula::And(fs) => fs.iter().collect(),
        other => vec![other],
    };
    conjuncts.iter().any(|c| match c {
        Formula::Atom(Atom::Compare(t, CompareOp::Eq)) => {
            t.mentions(v) && t.coeff_of(v).abs().is_one()
        }
        _ => false,
    })
}

fn check_equivalent(a: &Formula, b: &Formula, _domain: Sort) -> Result<bool> {
    qe_real::equivalent(a, b)
}
