//! Range propagation and relation extraction over dataflow block graphs.
//!
//! A graph of primitive blocks (gain, sum, compare, switch, unit-delay,
//! ReLU) is just another interconnected system: each block contributes its
//! exact input-output predicate, and projecting out the interior wires gives
//! the end-to-end relation. Conjoining input ranges and projecting out the
//! inputs gives the precise output range — tight where plain interval
//! arithmetic loses correlated inputs. The interval-arithmetic baseline is
//! kept alongside for comparison. Graphs with unit delays go through the
//! time-shifted composition, which is how feedback structures reduce to
//! their difference equation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::compose::{self, CompositionInput};
use crate::error::{Error, Result};
use crate::formula::{Atom, CompareOp, Formula, LinearTerm, Sort, TimedVar, Value};
use crate::model::Diagnostic;
use crate::rational::Rational;
use crate::simplify::simplify;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputConstraint {
    /// closed interval
    Interval(Rational, Rational),
    /// arbitrary predicate over the input's own variable
    Formula(Formula),
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Block {
    Input(InputConstraint),
    Output,
    Gain(Rational),
    /// +1 / -1 per input pin `in1..inN`
    Sum(Vec<i8>),
    /// boolean output: `out <=> (in op rhs)`
    Compare(CompareOp, Rational),
    /// two-input variant: `out <=> (in1 op in2)`
    CompareVar(CompareOp),
    /// inputs `then`, `else`, `cond`
    Switch,
    UnitDelay(Rational),
    Relu,
}

impl Block {
    pub fn input_pins(&self) -> Vec<String> {
        match self {
            Block::Input(_) => vec![],
            Block::Output | Block::Gain(_) | Block::Compare(..) | Block::Relu => {
                vec!["in".into()]
            }
            Block::UnitDelay(_) => vec!["in".into()],
            Block::Sum(signs) => (1..=signs.len()).map(|i| format!("in{i}")).collect(),
            Block::CompareVar(_) => vec!["in1".into(), "in2".into()],
            Block::Switch => vec!["then".into(), "else".into(), "cond".into()],
        }
    }

    pub fn has_output(&self) -> bool {
        !matches!(self, Block::Output)
    }

    pub fn output_sort(&self) -> Sort {
        match self {
            Block::Compare(..) | Block::CompareVar(_) => Sort::Bool,
            _ => Sort::Real,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecl {
    pub name: String,
    pub block: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub from_block: String,
    pub to_block: String,
    pub to_pin: String,
}

#[derive(Debug, Clone, Default)]
pub struct BlockGraph {
    pub name: String,
    pub blocks: Vec<BlockDecl>,
    pub wires: Vec<Wire>,
    /// accept delay-free cycles (they compose fine; simulation refuses them)
    pub algebraic_ok: bool,
}

impl BlockGraph {
    pub fn block(&self, name: &str) -> Option<&BlockDecl> {
        self.blocks.iter().find(|b| b.name == name)
    }

    /// Source block feeding `(block, pin)`.
    pub fn driver(&self, block: &str, pin: &str) -> Option<&str> {
        self.wires
            .iter()
            .find(|w| w.to_block == block && w.to_pin == pin)
            .map(|w| w.from_block.as_str())
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for b in &self.blocks {
            if !seen.insert(&b.name) {
                out.push(Diagnostic {
                    rule: "DUP_NAME",
                    message: format!("block `{}` declared twice", b.name),
                });
            }
            if let Block::Input(InputConstraint::Interval(lo, hi)) = &b.block {
                if lo > hi {
                    out.push(Diagnostic {
                        rule: "EMPTY_RANGE",
                        message: format!("input `{}` has an empty range", b.name),
                    });
                }
            }
        }
        let mut driven: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for w in &self.wires {
            match self.block(&w.from_block) {
                None => out.push(Diagnostic {
                    rule: "UNDECLARED",
                    message: format!("wire from unknown block `{}`", w.from_block),
                }),
                Some(src) if !src.block.has_output() => out.push(Diagnostic {
                    rule: "DIRECTION",
                    message: format!("block `{}` has no output pin", w.from_block),
                }),
                _ => {}
            }
            match self.block(&w.to_block) {
                None => out.push(Diagnostic {
                    rule: "UNDECLARED",
                    message: format!("wire into unknown block `{}`", w.to_block),
                }),
                Some(dst) => {
                    if !dst.block.input_pins().contains(&w.to_pin) {
                        out.push(Diagnostic {
                            rule: "UNDECLARED",
                            message: format!(
                                "block `{}` has no input pin `{}`",
                                w.to_block, w.to_pin
                            ),
                        });
                    }
                }
            }
            *driven
                .entry((w.to_block.as_str(), w.to_pin.as_str()))
                .or_insert(0) += 1;
        }
        for ((b, p), n) in &driven {
            if *n > 1 {
                out.push(Diagnostic {
                    rule: "MULTI_DRIVER",
                    message: format!("input pin {b}.{p} has {n} drivers"),
                });
            }
        }
        for b in &self.blocks {
            for pin in b.block.input_pins() {
                if !driven.contains_key(&(b.name.as_str(), pin.as_str())) {
                    out.push(Diagnostic {
                        rule: "UNDRIVEN",
                        message: format!("input pin {}.{pin} is not driven", b.name),
                    });
                }
                if pin == "cond" {
                    if let Some(src) = self.driver(&b.name, &pin) {
                        if let Some(sb) = self.block(src) {
                            if sb.block.output_sort() != Sort::Bool {
                                out.push(Diagnostic {
                                    rule: "SORT_MISMATCH",
                                    message: format!(
                                        "switch `{}` condition is driven by non-boolean `{src}`",
                                        b.name
                                    ),
                                });
                            }
                        }
                    }
                }
            }
        }
        if !self.algebraic_ok {
            if let Some(cycle) = self.combinational_cycle() {
                out.push(Diagnostic {
                    rule: "ALGEBRAIC_LOOP",
                    message: format!(
                        "delay-free cycle through `{cycle}`; break it with a delay or declare algebraic_ok"
                    ),
                });
            }
        }
        out
    }

    /// A block on a same-step dependency cycle, if any. Unit delays read the
    /// previous step, so they break cycles.
    fn combinational_cycle(&self) -> Option<String> {
        let mut state: BTreeMap<&str, u8> = BTreeMap::new(); // 0 new, 1 open, 2 done
        fn visit<'g>(
            g: &'g BlockGraph,
            name: &'g str,
            state: &mut BTreeMap<&'g str, u8>,
        ) -> Option<String> {
            match state.get(name) {
                Some(1) => return Some(name.to_string()),
                Some(2) => return None,
                _ => {}
            }
            state.insert(name, 1);
            if let Some(decl) = g.block(name) {
                if !matches!(decl.block, Block::UnitDelay(_)) {
                    for pin in decl.block.input_pins() {
                        if let Some(src) = g.driver(name, &pin) {
                            if let Some(hit) = visit(
                                g,
                                g.block(src).map(|b| b.name.as_str()).unwrap_or(src),
                                state,
                            ) {
                                return Some(hit);
                            }
                        }
                    }
                }
            }
            state.insert(name, 2);
            None
        }
        for b in &self.blocks {
            if let Some(hit) = visit(self, &b.name, &mut state) {
                return Some(hit);
            }
        }
        None
    }

    pub fn has_delay(&self) -> bool {
        self.blocks
            .iter()
            .any(|b| matches!(b.block, Block::UnitDelay(_)))
    }

    pub fn input_names(&self) -> Vec<String> {
        self.blocks
            .iter()
            .filter(|b| matches!(b.block, Block::Input(_)))
            .map(|b| b.name.clone())
            .collect()
    }

    /// The signal a named target refers to: an output block's driver, or the
    /// block's own variable.
    pub fn target_signal(&self, target: &str) -> Result<String> {
        let decl = self
            .block(target)
            .ok_or_else(|| Error::Contract(format!("no block named `{target}`")))?;
        match decl.block {
            Block::Output => self
                .driver(target, "in")
                .map(|s| s.to_string())
                .ok_or_else(|| Error::Contract(format!("output `{target}` is undriven"))),
            _ => Ok(target.to_string()),
        }
    }

    fn var_of(&self, name: &str) -> TimedVar {
        let sort = self
            .block(name)
            .map(|b| b.block.output_sort())
            .unwrap_or(Sort::Real);
        TimedVar::at_k(name, sort)
    }

    fn pin_term(&self, block: &str, pin: &str) -> Result<LinearTerm> {
        let src = self
            .driver(block, pin)
            .ok_or_else(|| Error::Contract(format!("pin {block}.{pin} undriven")))?;
        Ok(LinearTerm::var(self.var_of(src)))
    }

    /// The block's exact input-output predicate (and the delay's initial
    /// condition, when there is one).
    pub fn block_relation(&self, decl: &BlockDecl) -> Result<(Option<Formula>, Option<Formula>)> {
        let out = match decl.block.output_sort() {
            Sort::Bool => LinearTerm::zero(),
            _ => LinearTerm::var(self.var_of(&decl.name)),
        };
        let relation = match &decl.block {
            Block::Input(_) | Block::Output => (None, None),
            Block::Gain(c) => {
                let input = self.pin_term(&decl.name, "in")?;
                (Some(Formula::cmp(out, CompareOp::Eq, input.scale(c))), None)
            }
            Block::Sum(signs) => {
                let mut rhs = LinearTerm::zero();
                for (i, sign) in signs.iter().enumerate() {
                    let t = self.pin_term(&decl.name, &format!("in{}", i + 1))?;
                    rhs = rhs.add(&t.scale(&Rational::from_int(*sign as i64)));
                }
                (Some(Formula::cmp(out, CompareOp::Eq, rhs)), None)
            }
            Block::Compare(op, rhs) => {
                let input = self.pin_term(&decl.name, "in")?;
                let test = Formula::cmp(input, *op, LinearTerm::constant(rhs.clone()));
                let me = Formula::Atom(Atom::BoolVar(self.var_of(&decl.name)));
                (Some(Formula::iff(me, test)), None)
            }
            Block::CompareVar(op) => {
                let a = self.pin_term(&decl.name, "in1")?;
                let b = self.pin_term(&decl.name, "in2")?;
                let me = Formula::Atom(Atom::BoolVar(self.var_of(&decl.name)));
                (Some(Formula::iff(me, Formula::cmp(a, *op, b))), None)
            }
            Block::Switch => {
                let cond_src = self
                    .driver(&decl.name, "cond")
                    .ok_or_else(|| Error::Contract("switch condition undriven".into()))?;
                let cond = Formula::Atom(Atom::BoolVar(self.var_of(cond_src)));
                let then_t = self.pin_term(&decl.name, "then")?;
                let else_t = self.pin_term(&decl.name, "else")?;
                (
                    Some(Formula::and([
                        Formula::implies(
                            cond.clone(),
                            Formula::cmp(out.clone(), CompareOp::Eq, then_t),
                        ),
                        Formula::implies(
                            Formula::not(cond),
                            Formula::cmp(out, CompareOp::Eq, else_t),
                        ),
                    ])),
                    None,
                )
            }
            Block::UnitDelay(init) => {
                let input = self.pin_term(&decl.name, "in")?.shift(-1)?;
                let rel = Formula::cmp(out, CompareOp::Eq, input);
                let mut at0 = LinearTerm::var(TimedVar::abs(decl.name.clone(), 0, Sort::Real));
                at0.add_constant(-init.clone());
                let init_f = Formula::compare(at0, CompareOp::Eq);
                (Some(rel), Some(init_f))
            }
            Block::Relu => {
                let input = self.pin_term(&decl.name, "in")?;
                (
                    Some(Formula::and([
                        Formula::implies(
                            Formula::compare(input.clone(), CompareOp::Ge),
                            Formula::cmp(out.clone(), CompareOp::Eq, input.clone()),
                        ),
                        Formula::implies(
                            Formula::compare(input.clone(), CompareOp::Lt),
                            Formula::compare(out, CompareOp::Eq),
                        ),
                    ])),
                    None,
                )
            }
        };
        Ok(relation)
    }

    fn composition_input(&self, keep: &BTreeSet<String>) -> Result<CompositionInput> {
        let mut properties = Vec::new();
        let mut initials = Vec::new();
        for decl in &self.blocks {
            let (rel, init) = self.block_relation(decl)?;
            properties.extend(rel);
            initials.extend(init);
        }
        let internals: BTreeSet<String> = self
            .blocks
            .iter()
            .filter(|b| b.block.has_output() && !keep.contains(&b.name))
            .map(|b| b.name.clone())
            .collect();
        Ok(CompositionInput {
            properties,
            connections: Vec::new(), // wires are inlined into the relations
            initials,
            internals,
            domain: Sort::Real,
        })
    }
}

/// End-to-end relation of a graph: inputs and output-fed signals kept,
/// everything else projected out. Timed graphs also yield the composed
/// initial condition.
#[derive(Debug, Clone)]
pub struct IoRelation {
    pub relation: Formula,
    pub init: Formula,
    pub order_bound: u64,
    pub order: u64,
}

pub fn io_relation(g: &BlockGraph) -> Result<IoRelation> {
    let diags = g.validate();
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(Error::Contract(format!(
            "invalid graph: {}",
            text.join("; ")
        )));
    }
    let mut keep: BTreeSet<String> = g.input_names().into_iter().collect();
    for b in &g.blocks {
        if matches!(b.block, Block::Output) {
            keep.insert(g.target_signal(&b.name)?);
        }
    }
    let input = g.composition_input(&keep)?;
    if g.has_delay() {
        let result = compose::strongest_property_timed(&input)?;
        Ok(IoRelation {
            relation: result.ssp.clone(),
            init: result.init,
            order_bound: result.used_order_bound,
            order: result.pruned_order,
        })
    } else {
        let relation = compose::strongest_property_static(&input)?;
        Ok(IoRelation {
            relation,
            init: Formula::truth(true),
            order_bound: 0,
            order: 0,
        })
    }
}

/// One bound of a derived range, with strictness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeBound {
    pub value: Rational,
    pub strict: bool,
}

/// Precise range of a target signal: the formula is ground truth; the
/// interval view is filled in when the formula is a conjunction of bounds.
#[derive(Debug, Clone)]
pub struct RangeReport {
    pub target: String,
    pub formula: Formula,
    pub lower: Option<RangeBound>,
    pub upper: Option<RangeBound>,
}

impl fmt::Display for RangeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.lower, &self.upper) {
            (Some(lo), Some(hi)) => write!(
                f,
                "{}{}, {}{}",
                if lo.strict { "(" } else { "[" },
                lo.value,
                hi.value,
                if hi.strict { ")" } else { "]" }
            ),
            _ => write!(f, "{}", self.formula),
        }
    }
}

/// Precise range of `target` by projecting the inputs out of the input
/// constraints conjoined with the end-to-end relation.
pub fn output_range(g: &BlockGraph, target: &str) -> Result<RangeReport> {
    let signal = g.target_signal(target)?;
    let mut keep = BTreeSet::new();
    keep.insert(signal.clone());
    for name in g.input_names() {
        keep.insert(name);
    }
    let input = g.composition_input(&keep)?;

    let (relation, window) = if g.has_delay() {
        let r = compose::strongest_property_timed(&input)?;
        let order = r.pruned_order;
        (r.ssp, order)
    } else {
        (compose::strongest_property_static(&input)?, 0)
    };

    // conjoin input constraints at every step of the relation window
    let mut pieces = vec![relation];
    for b in &g.blocks {
        let Block::Input(constraint) = &b.block else {
            continue;
        };
        let v = g.var_of(&b.name);
        let range_formula = match constraint {
            InputConstraint::Free => continue,
            InputConstraint::Interval(lo, hi) => {
                let mut above = LinearTerm::var(v.clone());
                above.add_constant(-lo.clone());
                let mut below = LinearTerm::var(v.clone());
                below.add_constant(-hi.clone());
                Formula::and([
                    Formula::compare(above, CompareOp::Ge),
                    Formula::compare(below, CompareOp::Le),
                ])
            }
            InputConstraint::Formula(f) => f.clone(),
        };
        for off in 0..=window {
            pieces.push(range_formula.shift(-(off as i64))?);
        }
    }
    let conj = Formula::and(pieces);
    let eliminate: Vec<TimedVar> = conj
        .free_vars()
        .into_iter()
        .filter(|v| v.name != signal)
        .collect();
    let formula = compose::eliminate(&conj, eliminate, Sort::Real)?;
    let newest = formula
        .free_vars()
        .into_iter()
        .filter(|v| v.name == signal)
        .map(|v| match v.index {
            crate::formula::TimeIndex::Relative(j) => j,
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    // the range of the newest occurrence
    let at_now: Vec<TimedVar> = formula
        .free_vars()
        .into_iter()
        .filter(|v| v.name == signal && v.index != crate::formula::TimeIndex::Relative(newest))
        .collect();
    let formula = simplify(&compose::eliminate(&formula, at_now, Sort::Real)?);
    let formula = match formula.max_offset() {
        Some(m) if m != 0 => formula.shift(-m)?,
        _ => formula,
    };
    let formula = to_bound_form(&formula, &g.var_of(&signal))?;

    let (lower, upper) = read_bounds(&formula, &g.var_of(&signal));
    Ok(RangeReport {
        target: signal,
        formula,
        lower,
        upper,
    })
}

/// Endpoint of a one-variable interval; `None` is infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
struct End {
    value: Option<Rational>,
    strict: bool,
}

/// Normalizes a formula over a single variable into a disjunction of
/// interval constraints, merging overlapping pieces; `[0,1] or {0}` becomes
/// plain bounds. Anything outside that shape passes through unchanged.
fn to_bound_form(f: &Formula, v: &TimedVar) -> Result<Formula> {
    let vars = f.free_vars();
    if vars.len() > 1 || vars.iter().any(|w| w != v) {
        return Ok(f.clone());
    }
    let mut pieces: Vec<(End, End)> = Vec::new();
    for disjunct in f.dnf_disjuncts()? {
        let mut lo = End {
            value: None,
            strict: false,
        };
        let mut hi = End {
            value: None,
            strict: false,
        };
        for lit in disjunct {
            let Formula::Atom(Atom::Compare(t, op)) = &lit else {
                return Ok(f.clone());
            };
            if !t.mentions(v) {
                return Ok(f.clone());
            }
            let a = t.coeff_of(v);
            let value = -&(t.constant_part() / &a);
            let op = if a.is_negative() { op.flip() } else { *op };
            let tighten_lo = |lo: &mut End, value: Rational, strict: bool| {
                let better = match &lo.value {
                    None => true,
                    Some(cur) => value > *cur || (value == *cur && strict),
                };
                if better {
                    *lo = End {
                        value: Some(value),
                        strict,
                    };
                }
            };
            let tighten_hi = |hi: &mut End, value: Rational, strict: bool| {
                let better = match &hi.value {
                    None => true,
                    Some(cur) => value < *cur || (value == *cur && strict),
                };
                if better {
                    *hi = End {
                        value: Some(value),
                        strict,
                    };
                }
            };
            match op {
                CompareOp::Ge => tighten_lo(&mut lo, value, false),
                CompareOp::Gt => tighten_lo(&mut lo, value, true),
                CompareOp::Le => tighten_hi(&mut hi, value, false),
                CompareOp::Lt => tighten_hi(&mut hi, value, true),
                CompareOp::Eq => {
                    tighten_lo(&mut lo, value.clone(), false);
                    tighten_hi(&mut hi, value, false);
                }
                CompareOp::Ne => return Ok(f.clone()),
            }
        }
        // drop empty pieces
        if let (Some(l), Some(h)) = (&lo.value, &hi.value) {
            if l > h || (l == h && (lo.strict || hi.strict)) {
                continue;
            }
        }
        pieces.push((lo, hi));
    }
    if pieces.is_empty() {
        return Ok(Formula::truth(false));
    }
    // sort by lower end and merge overlapping / touching intervals
    pieces.sort_by(|a, b| match (&a.0.value, &b.0.value) {
        (None, None) => a.0.strict.cmp(&b.0.strict),
        (None, Some(_)) => std::cmp::Ordering::Less,
        (Some(_), None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => x.partial_cmp(y).unwrap().then(a.0.strict.cmp(&b.0.strict)),
    });
    let mut merged: Vec<(End, End)> = Vec::new();
    for (lo, hi) in pieces {
        match merged.last_mut() {
            Some((_, cur_hi)) => {
                let connects = match (&cur_hi.value, &lo.value) {
                    (None, _) => true, // current piece reaches +inf
                    (_, None) => true, // next starts at -inf
                    (Some(h), Some(l)) => l < h || (l == h && !(cur_hi.strict && lo.strict)),
                };
                if connects {
                    let extends = match (&cur_hi.value, &hi.value) {
                        (None, _) => false,
                        (_, None) => true,
                        (Some(ch), Some(nh)) => {
                            nh > ch || (nh == ch && cur_hi.strict && !hi.strict)
                        }
                    };
                    if extends {
                        *cur_hi = hi;
                    }
                } else {
                    merged.push((lo, hi));
                }
            }
            None => merged.push((lo, hi)),
        }
    }
    let piece_formula = |(lo, hi): &(End, End)| -> Formula {
        if let (Some(l), Some(h)) = (&lo.value, &hi.value) {
            if l == h {
                let mut t = LinearTerm::var(v.clone());
                t.add_constant(-l.clone());
                return Formula::compare(t, CompareOp::Eq);
            }
        }
        let mut parts = Vec::new();
        if let Some(l) = &lo.value {
            let mut t = LinearTerm::var(v.clone());
            t.add_constant(-l.clone());
            parts.push(Formula::compare(
                t,
                if lo.strict {
                    CompareOp::Gt
                } else {
                    CompareOp::Ge
                },
            ));
        }
        if let Some(h) = &hi.value {
            let mut t = LinearTerm::var(v.clone());
            t.add_constant(-h.clone());
            parts.push(Formula::compare(
                t,
                if hi.strict {
                    CompareOp::Lt
                } else {
                    CompareOp::Le
                },
            ));
        }
        Formula::and(parts)
    };
    Ok(Formula::or(merged.iter().map(piece_formula)))
}

fn read_bounds(f: &Formula, v: &TimedVar) -> (Option<RangeBound>, Option<RangeBound>) {
    let conjuncts: Vec<&Formula> = match f {
        Formula::And(fs) => fs.iter().collect(),
        other => vec![other],
    };
    let mut lower = None;
    let mut upper = None;
    for c in conjuncts {
        let Formula::Atom(Atom::Compare(t, op)) = c else {
            return (None, None);
        };
        if t.vars().count() != 1 || !t.mentions(v) {
            return (None, None);
        }
        let a = t.coeff_of(v);
        let value = -&(t.constant_part() / &a);
        let op = if a.is_negative() { op.flip() } else { *op };
        match op {
            CompareOp::Ge => {
                lower = Some(RangeBound {
                    value,
                    strict: false,
                })
            }
            CompareOp::Gt => {
                lower = Some(RangeBound {
                    value,
                    strict: true,
                })
            }
            CompareOp::Le => {
                upper = Some(RangeBound {
                    value,
                    strict: false,
                })
            }
            CompareOp::Lt => {
                upper = Some(RangeBound {
                    value,
                    strict: true,
                })
            }
            CompareOp::Eq => {
                lower = Some(RangeBound {
                    value: value.clone(),
                    strict: false,
                });
                upper = Some(RangeBound {
                    value,
                    strict: false,
                });
            }
            CompareOp::Ne => return (None, None),
        }
    }
    (lower, upper)
}

// ---------------------------------------------------------------------------
// interval-arithmetic baseline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extended {
    NegInf,
    Finite(Rational),
    PosInf,
}

/// Closed interval with possibly infinite endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Extended,
    pub hi: Extended,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval {
            lo: Extended::Finite(lo),
            hi: Extended::Finite(hi),
        }
    }

    pub fn singleton(x: Rational) -> Self {
        Interval::new(x.clone(), x)
    }

    pub fn whole() -> Self {
        Interval {
            lo: Extended::NegInf,
            hi: Extended::PosInf,
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let lo = match (&self.lo, &other.lo) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::NegInf,
        };
        let hi = match (&self.hi, &other.hi) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::PosInf,
        };
        Interval { lo, hi }
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        if c.is_zero() {
            return Interval::singleton(Rational::zero());
        }
        let mul = |e: &Extended| match e {
            Extended::NegInf => {
                if c.is_positive() {
                    Extended::NegInf
                } else {
                    Extended::PosInf
                }
            }
            Extended::PosInf => {
                if c.is_positive() {
                    Extended::PosInf
                } else {
                    Extended::NegInf
                }
            }
            Extended::Finite(r) => Extended::Finite(r * c),
        };
        if c.is_positive() {
            Interval {
                lo: mul(&self.lo),
                hi: mul(&self.hi),
            }
        } else {
            Interval {
                lo: mul(&self.hi),
                hi: mul(&self.lo),
            }
        }
    }

    pub fn union(&self, other: &Interval) -> Interval {
        let lo = match (&self.lo, &other.lo) {
            (Extended::NegInf, _) | (_, Extended::NegInf) => Extended::NegInf,
            (Extended::Finite(a), Extended::Finite(b)) => {
                Extended::Finite(if a <= b { a.clone() } else { b.clone() })
            }
            (Extended::PosInf, x) | (x, Extended::PosInf) => x.clone(),
        };
        let hi = match (&self.hi, &other.hi) {
            (Extended::PosInf, _) | (_, Extended::PosInf) => Extended::PosInf,
            (Extended::Finite(a), Extended::Finite(b)) => {
                Extended::Finite(if a >= b { a.clone() } else { b.clone() })
            }
            (Extended::NegInf, x) | (x, Extended::NegInf) => x.clone(),
        };
        Interval { lo, hi }
    }

    pub fn relu(&self) -> Interval {
        let clamp = |e: &Extended| match e {
            Extended::NegInf => Extended::Finite(Rational::zero()),
            Extended::Finite(r) if r.is_negative() => Extended::Finite(Rational::zero()),
            other => other.clone(),
        };
        Interval {
            lo: clamp(&self.lo),
            hi: clamp(&self.hi),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo_ok = match &self.lo {
            Extended::NegInf => true,
            Extended::Finite(l) => l <= x,
            Extended::PosInf => false,
        };
        let hi_ok = match &self.hi {
            Extended::PosInf => true,
            Extended::Finite(h) => x <= h,
            Extended::NegInf => false,
        };
        lo_ok && hi_ok
    }

    pub fn subset_of(&self, other: &Interval) -> bool {
        let lo_ok = match (&other.lo, &self.lo) {
            (Extended::NegInf, _) => true,
            (Extended::Finite(o), Extended::Finite(s)) => o <= s,
            _ => false,
        };
        let hi_ok = match (&other.hi, &self.hi) {
            (Extended::PosInf, _) => true,
            (Extended::Finite(o), Extended::Finite(s)) => s <= o,
            _ => false,
        };
        lo_ok && hi_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lo {
            Extended::NegInf => write!(f, "(-inf, ")?,
            Extended::Finite(r) => write!(f, "[{r}, ")?,
            Extended::PosInf => write!(f, "(inf, ")?,
        }
        match &self.hi {
            Extended::PosInf => write!(f, "inf)"),
            Extended::Finite(r) => write!(f, "{r}]"),
            Extended::NegInf => write!(f, "-inf)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Abstract {
    Num(Interval),
    Bool { can_true: bool, can_false: bool },
}

/// Traditional forward interval propagation: sound but blind to input
/// dependencies; the comparison baseline for the QE-based range.
pub fn naive_interval_range(g: &BlockGraph, target: &str) -> Result<Interval> {
    let signal = g.target_signal(target)?;
    let mut values: BTreeMap<String, Abstract> = BTreeMap::new();
    for b in &g.blocks {
        let init = match &b.block {
            Block::Input(InputConstraint::Interval(lo, hi)) => {
                Abstract::Num(Interval::new(lo.clone(), hi.clone()))
            }
            Block::Input(_) => Abstract::Num(Interval::whole()),
            Block::UnitDelay(init) => Abstract::Num(Interval::singleton(init.clone())),
            Block::Compare(..) | Block::CompareVar(_) => Abstract::Bool {
                can_true: false,
                can_false: false,
            },
            _ => Abstract::Num(Interval::singleton(Rational::zero())),
        };
        if b.block.has_output() {
            values.insert(b.name.clone(), init);
        }
    }

    // iterate to a fixpoint; delays make this a widening loop
    for round in 0..200 {
        let mut changed = false;
        for b in &g.blocks {
            if !b.block.has_output() {
                continue;
            }
            let num_in = |pin: &str| -> Interval {
                g.driver(&b.name, pin)
                    .and_then(|s| values.get(s))
                    .and_then(|a| match a {
                        Abstract::Num(i) => Some(i.clone()),
                        Abstract::Bool { .. } => None,
                    })
                    .unwrap_or_else(Interval::whole)
            };
            let next = match &b.block {
                Block::Input(InputConstraint::Interval(lo, hi)) => {
                    Abstract::Num(Interval::new(lo.clone(), hi.clone()))
                }
                Block::Input(_) => Abstract::Num(Interval::whole()),
                Block::Output => continue,
                Block::Gain(c) => Abstract::Num(num_in("in").scale(c)),
                Block::Sum(signs) => {
                    let mut acc = Interval::singleton(Rational::zero());
                    for (i, sign) in signs.iter().enumerate() {
                        let it = num_in(&format!("in{}", i + 1))
                            .scale(&Rational::from_int(*sign as i64));
                        acc = acc.add(&it);
                    }
                    Abstract::Num(acc)
                }
                Block::Relu => Abstract::Num(num_in("in").relu()),
                Block::UnitDelay(init) => {
                    // union of the initial value and everything seen upstream
                    let seen = num_in("in");
                    let cur = match values.get(&b.name) {
                        Some(Abstract::Num(i)) => i.clone(),
                        _ => Interval::singleton(init.clone()),
                    };
                    let grown = cur.union(&seen).union(&Interval::singleton(init.clone()));
                    if round > 100 {
                        Abstract::Num(cur.union(&Interval::whole()))
                    } else {
                        Abstract::Num(grown)
                    }
                }
                Block::Compare(op, rhs) => {
                    let it = num_in("in");
                    bool_outcomes(&it, *op, &Interval::singleton(rhs.clone()))
                }
                Block::CompareVar(op) => bool_outcomes(&num_in("in1"), *op, &num_in("in2")),
                Block::Switch => {
                    let cond = g
                        .driver(&b.name, "cond")
                        .and_then(|s| values.get(s))
                        .cloned()
                        .unwrap_or(Abstract::Bool {
                            can_true: true,
                            can_false: true,
                        });
                    let (ct, cf) = match cond {
                        Abstract::Bool {
                            can_true,
                            can_false,
                        } => (can_true, can_false),
                        Abstract::Num(_) => (true, true),
                    };
                    let t = num_in("then");
                    let e = num_in("else");
                    Abstract::Num(match (ct, cf) {
                        (true, false) => t,
                        (false, true) => e,
                        _ => t.union(&e),
                    })
                }
            };
            if values.get(&b.name) != Some(&next) {
                values.insert(b.name.clone(), next);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    match values.get(&signal) {
        Some(Abstract::Num(i)) => Ok(i.clone()),
        Some(Abstract::Bool { .. }) => Err(Error::Contract(format!(
            "`{signal}` is boolean; no numeric range"
        ))),
        None => Err(Error::Contract(format!("no value computed for `{signal}`"))),
    }
}

fn bool_outcomes(a: &Interval, op: CompareOp, b: &Interval) -> Abstract {
    // sample the comparison over the corner cases; intervals are closed so
    // the corners decide which outcomes are reachable, plus overlap checks
    let lo = |i: &Interval| match &i.lo {
        Extended::Finite(r) => Some(r.clone()),
        _ => None,
    };
    let hi = |i: &Interval| match &i.hi {
        Extended::Finite(r) => Some(r.clone()),
        _ => None,
    };
    // conservative: could the comparison be true? could it be false?
    let can = |want: bool| -> bool {
        // the comparison a op b over intervals: check extremes
        let pairs = [
            (lo(a), lo(b)),
            (lo(a), hi(b)),
            (hi(a), lo(b)),
            (hi(a), hi(b)),
        ];
        for (x, y) in pairs.iter() {
            if let (Some(x), Some(y)) = (x, y) {
                if op.holds(x.partial_cmp(y).unwrap()) == want {
                    return true;
                }
            }
        }
        // unbounded sides make both outcomes possible for orderings
        if lo(a).is_none() || hi(a).is_none() || lo(b).is_none() || hi(b).is_none() {
            return true;
        }
        // equality inside overlapping ranges
        if matches!(op, CompareOp::Eq | CompareOp::Ne) {
            let overlap = !(hi(a).unwrap() < lo(b).unwrap() || hi(b).unwrap() < lo(a).unwrap());
            let non_degenerate = lo(a) != hi(a) || lo(b) != hi(b);
            match (op, want) {
                (CompareOp::Eq, true) => return overlap,
                (CompareOp::Eq, false) => return non_degenerate || !overlap,
                (CompareOp::Ne, true) => return non_degenerate || !overlap,
                (CompareOp::Ne, false) => return overlap,
                _ => {}
            }
        }
        false
    };
    Abstract::Bool {
        can_true: can(true),
        can_false: can(false),
    }
}

// ---------------------------------------------------------------------------
// simulation
// ---------------------------------------------------------------------------

/// Executes the graph for `steps` steps on concrete input traces. Refuses
/// delay-free cycles. Returns the trace of every block output.
pub fn simulate(
    g: &BlockGraph,
    inputs: &BTreeMap<String, Vec<Rational>>,
    steps: usize,
) -> Result<BTreeMap<String, Vec<Value>>> {
    if g.combinational_cycle().is_some() {
        return Err(Error::Contract("cannot simulate a delay-free cycle".into()));
    }
    let mut traces: BTreeMap<String, Vec<Value>> = BTreeMap::new();
    for step in 0..steps {
        // resolve blocks in dependency order within the step
        let mut pending: Vec<&BlockDecl> =
            g.blocks.iter().filter(|b| b.block.has_output()).collect();
        let mut guard = 0;
        while !pending.is_empty() {
            guard += 1;
            if guard > g.blocks.len() * (g.blocks.len() + 2) {
                return Err(Error::Contract("simulation did not converge".into()));
            }
            pending.retain(|decl| {
                let value = eval_block(g, decl, &traces, inputs, step);
                match value {
                    Some(v) => {
                        traces.entry(decl.name.clone()).or_default().push(v);
                        false
                    }
                    None => true,
                }
            });
        }
    }
    Ok(traces)
}

fn eval_block(
    g: &BlockGraph,
    decl: &BlockDecl,
    traces: &BTreeMap<String, Vec<Value>>,
    inputs: &BTreeMap<String, Vec<Rational>>,
    step: usize,
) -> Option<Value> {
    if traces.get(&decl.name).map(|t| t.len()).unwrap_or(0) > step {
        return None; // already computed this step
    }
    let now = |pin: &str| -> Option<Value> {
        let src = g.driver(&decl.name, pin)?;
        traces.get(src)?.get(step).cloned()
    };
    let num = |pin: &str| -> Option<Rational> {
        match now(pin)? {
            Value::Num(r) => Some(r),
            Value::Bool(_) => None,
        }
    };
    Some(match &decl.block {
        Block::Output => return None,
        Block::Input(_) => Value::Num(inputs.get(&decl.name)?.get(step)?.clone()),
        Block::Gain(c) => Value::Num(num("in")? * c.clone()),
        Block::Sum(signs) => {
            let mut acc = Rational::zero();
            for (i, sign) in signs.iter().enumerate() {
                let x = num(&format!("in{}", i + 1))?;
                acc += x * Rational::from_int(*sign as i64);
            }
            Value::Num(acc)
        }
        Block::Compare(op, rhs) => {
            let x = num("in")?;
            Value::Bool(op.holds(x.partial_cmp(rhs).unwrap()))
        }
        Block::CompareVar(op) => {
            let a = num("in1")?;
            let b = num("in2")?;
            Value::Bool(op.holds(a.partial_cmp(&b).unwrap()))
        }
        Block::Switch => {
            let Value::Bool(c) = now("cond")? else {
                return None;
            };
            if c {
                Value::Num(num("then")?)
            } else {
                Value::Num(num("else")?)
            }
        }
        Block::Relu => {
            let x = num("in")?;
            Value::Num(if x.is_negative() { Rational::zero() } else { x })
        }
        Block::UnitDelay(init) => {
            if step == 0 {
                Value::Num(init.clone())
            } else {
                let src = g.driver(&decl.name, "in")?;
                match traces.get(src)?.get(step - 1)? {
                    Value::Num(r) => Value::Num(r.clone()),
                    Value::Bool(_) => return None,
                }
            }
        }
    })
}

// ---------------------------------------------------------------------------
// the two text formats
// ---------------------------------------------------------------------------

pub use crate::speclang::ParseError;

/// Parses the block-graph document:
///
/// ```text
/// graph abs {
///   block in: input range [-5, 5];
///   block g: gain -1;
///   block cmp: compare >= 0;
///   block sw: switch;
///   block out: output;
///   wire in.out -> g.in;
///   ...
/// }
/// ```
pub fn parse_graph(text: &str) -> std::result::Result<BlockGraph, ParseError> {
    GraphParser::new(text).document()
}

struct GraphParser<'t> {
    lines: Vec<(u32, &'t str)>,
    pos: usize,
}

impl<'t> GraphParser<'t> {
    fn new(text: &'t str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i as u32 + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        GraphParser { lines, pos: 0 }
    }

    fn fail<T>(&self, line: u32, message: impl Into<String>) -> std::result::Result<T, ParseError> {
        Err(ParseError {
            line,
            col: 1,
            message: message.into(),
        })
    }

    fn next_line(&mut self) -> Option<(u32, &'t str)> {
        let item = self.lines.get(self.pos).copied();
        self.pos += 1;
        item
    }

    fn document(&mut self) -> std::result::Result<BlockGraph, ParseError> {
        let Some((l, head)) = self.next_line() else {
            return self.fail(1, "empty graph document");
        };
        let name = head
            .strip_prefix("graph")
            .map(str::trim)
            .and_then(|r| r.strip_suffix('{'))
            .map(str::trim)
            .filter(|n| !n.is_empty());
        let Some(name) = name else {
            return self.fail(l, "expected `graph NAME {`");
        };
        let mut g = BlockGraph {
            name: name.to_string(),
            ..Default::default()
        };
        while let Some((l, line)) = self.next_line() {
            if line == "}" {
                return Ok(g);
            }
            let Some(stmt) = line.strip_suffix(';').map(str::trim) else {
                return self.fail(l, "statement must end with `;`");
            };
            if stmt == "algebraic_ok" {
                g.algebraic_ok = true;
            } else if let Some(rest) = stmt.strip_prefix("block ") {
                let (name, spec) = rest.split_once(':').ok_or(ParseError {
                    line: l,
                    col: 1,
                    message: "expected `block NAME: KIND`".into(),
                })?;
                let block = self.block_spec(l, spec.trim())?;
                g.blocks.push(BlockDecl {
                    name: name.trim().to_string(),
                    block,
                });
            } else if let Some(rest) = stmt.strip_prefix("wire ") {
                let (from, to) = rest.split_once("->").ok_or(ParseError {
                    line: l,
                    col: 1,
                    message: "expected `wire A.out -> B.pin`".into(),
                })?;
                let from_block = match from.trim().split_once('.') {
                    Some((b, "out")) => b.to_string(),
                    Some((b, _)) => b.to_string(),
                    None => from.trim().to_string(),
                };
                let Some((to_block, to_pin)) = to.trim().split_once('.') else {
                    return self.fail(l, "wire target needs `BLOCK.pin`");
                };
                g.wires.push(Wire {
                    from_block,
                    to_block: to_block.to_string(),
                    to_pin: to_pin.to_string(),
                });
            } else {
                return self.fail(l, format!("unknown statement `{stmt}`"));
            }
        }
        self.fail(
            self.lines.last().map(|(l, _)| *l).unwrap_or(1),
            "missing closing `}`",
        )
    }

    fn block_spec(&self, l: u32, spec: &str) -> std::result::Result<Block, ParseError> {
        let mut words = spec.split_whitespace();
        let kind = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        let num = |s: &str| -> std::result::Result<Rational, ParseError> {
            parse_number(s).ok_or(ParseError {
                line: l,
                col: 1,
                message: format!("bad number `{s}`"),
            })
        };
        Ok(match kind {
            "input" => match rest.as_slice() {
                [] => Block::Input(InputConstraint::Free),
                ["range", tail @ ..] => {
                    let joined = tail.join(" ");
                    let inner = joined
                        .trim()
                        .strip_prefix('[')
                        .and_then(|r| r.strip_suffix(']'))
                        .ok_or(ParseError {
                            line: l,
                            col: 1,
                            message: "expected `range [lo, hi]`".into(),
                        })?;
                    let (lo, hi) = inner.split_once(',').ok_or(ParseError {
                        line: l,
                        col: 1,
                        message: "expected `range [lo, hi]`".into(),
                    })?;
                    Block::Input(InputConstraint::Interval(num(lo.trim())?, num(hi.trim())?))
                }
                _ => return self.fail(l, "expected `input` or `input range [lo, hi]`"),
            },
            "output" => Block::Output,
            "gain" => match rest.as_slice() {
                [c] => Block::Gain(num(c)?),
                _ => return self.fail(l, "expected `gain CONSTANT`"),
            },
            "sum" => {
                let mut signs = Vec::new();
                for w in &rest {
                    match *w {
                        "+" => signs.push(1),
                        "-" => signs.push(-1),
                        _ => return self.fail(l, "sum signs must be `+` or `-`"),
                    }
                }
                if signs.is_empty() {
                    return self.fail(l, "sum needs at least one sign");
                }
                Block::Sum(signs)
            }
            "compare" => match rest.as_slice() {
                [op, c] => Block::Compare(
                    parse_op(op).ok_or(ParseError {
                        line: l,
                        col: 1,
                        message: format!("bad comparison `{op}`"),
                    })?,
                    num(c)?,
                ),
                _ => return self.fail(l, "expected `compare OP CONSTANT`"),
            },
            "compare2" => match rest.as_slice() {
                [op] => Block::CompareVar(parse_op(op).ok_or(ParseError {
                    line: l,
                    col: 1,
                    message: format!("bad comparison `{op}`"),
                })?),
                _ => return self.fail(l, "expected `compare2 OP`"),
            },
            "switch" => Block::Switch,
            "delay" => match rest.as_slice() {
                ["init", c] => Block::UnitDelay(num(c)?),
                _ => return self.fail(l, "expected `delay init CONSTANT`"),
            },
            "relu" => Block::Relu,
            other => return self.fail(l, format!("unknown block kind `{other}`")),
        })
    }
}

fn parse_op(s: &str) -> Option<CompareOp> {
    Some(match s {
        "=" => CompareOp::Eq,
        "!=" => CompareOp::Ne,
        "<" => CompareOp::Lt,
        "<=" => CompareOp::Le,
        ">" => CompareOp::Gt,
        ">=" => CompareOp::Ge,
        _ => return None,
    })
}

/// Decimal or fraction literal: `-1`, `0.25`, `39/41`.
fn parse_number(s: &str) -> Option<Rational> {
    if let Some((n, d)) = s.split_once('/') {
        let n = Rational::parse_decimal(n.trim())?;
        let d = Rational::parse_decimal(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    Rational::parse_decimal(s)
}

/// Compact ReLU-net description, desugared to gain/sum/relu blocks:
///
/// ```text
/// net pair {
///   input x range [-1, 1];
///   layer h relu: weights [[1], [-1]] bias [0, 0];
///   output y: weights [[1, 1]] bias [0];
/// }
/// ```
pub fn parse_net(text: &str) -> std::result::Result<BlockGraph, ParseError> {
    let parser = GraphParser::new(text);
    let mut lines = parser.lines.into_iter();
    let Some((l, head)) = lines.next() else {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "empty net document".into(),
        });
    };
    let name = head
        .strip_prefix("net")
        .map(str::trim)
        .and_then(|r| r.strip_suffix('{'))
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .ok_or(ParseError {
            line: l,
            col: 1,
            message: "expected `net NAME {`".into(),
        })?;

    let mut g = BlockGraph {
        name: name.to_string(),
        ..Default::default()
    };
    let mut prev_layer: Vec<String> = Vec::new();
    let mut layer_count = 0usize;

    let fail = |line: u32, message: String| ParseError {
        line,
        col: 1,
        message,
    };
    for (l, line) in lines {
        if line == "}" {
            let diags = g.validate();
            if let Some(d) = diags.first() {
                return Err(fail(l, format!("net desugaring: {d}")));
            }
            return Ok(g);
        }
        let stmt = line
            .strip_suffix(';')
            .map(str::trim)
            .ok_or_else(|| fail(l, "statement must end with `;`".into()))?;
        if let Some(rest) = stmt.strip_prefix("input ") {
            let mut words = rest.split_whitespace();
            let name = words.next().unwrap_or("").to_string();
            let tail: Vec<&str> = words.collect();
            let constraint = match tail.as_slice() {
                [] => InputConstraint::Free,
                ["range", more @ ..] => {
                    let joined = more.join(" ");
                    let inner = joined
                        .trim()
                        .strip_prefix('[')
                        .and_then(|r| r.strip_suffix(']'))
                        .ok_or_else(|| fail(l, "expected `range [lo, hi]`".into()))?;
                    let (lo, hi) = inner
                        .split_once(',')
                        .ok_or_else(|| fail(l, "expected `range [lo, hi]`".into()))?;
                    InputConstraint::Interval(
                        parse_number(lo.trim()).ok_or_else(|| fail(l, "bad number".into()))?,
                        parse_number(hi.trim()).ok_or_else(|| fail(l, "bad number".into()))?,
                    )
                }
                _ => return Err(fail(l, "expected `input NAME [range [lo, hi]]`".into())),
            };
            g.blocks.push(BlockDecl {
                name: name.clone(),
                block: Block::Input(constraint),
            });
            prev_layer.push(name);
        } else if stmt.starts_with("layer ") || stmt.starts_with("output ") {
            let is_output = stmt.starts_with("output ");
            let rest = stmt.split_once(' ').unwrap().1;
            let (head, params) = rest
                .split_once(':')
                .ok_or_else(|| fail(l, "expected `: weights [...] bias [...]`".into()))?;
            let mut head_words = head.split_whitespace();
            let lname = head_words.next().unwrap_or("").to_string();
            let relu = match head_words.next() {
                Some("relu") => true,
                None => is_output && false,
                Some(other) => return Err(fail(l, format!("unknown activation `{other}`"))),
            };
            let (weights, bias) = parse_weights_bias(params, l)?;
            if weights.len() != bias.len() {
                return Err(fail(l, "weights and bias row counts differ".into()));
            }
            layer_count += 1;
            if layer_count > 4 || weights.len() > 8 {
                return Err(fail(
                    l,
                    "desk scale: at most 3 hidden layers of 8 neurons".into(),
                ));
            }
            let mut this_layer = Vec::new();
            for (i, (row, b)) in weights.iter().zip(&bias).enumerate() {
                if row.len() != prev_layer.len() {
                    return Err(fail(
                        l,
                        format!(
                            "row {} has {} weights for {} upstream signals",
                            i + 1,
                            row.len(),
                            prev_layer.len()
                        ),
                    ));
                }
                let neuron = if is_output && weights.len() == 1 {
                    lname.clone()
                } else {
                    format!("{lname}{}", i + 1)
                };
                // gains feed a sum; bias rides along as a pinned input
                let mut signs = Vec::new();
                let mut feeds = Vec::new();
                for (j, w) in row.iter().enumerate() {
                    if w.is_zero() {
                        continue;
                    }
                    let gname = format!("{neuron}_w{}", j + 1);
                    g.blocks.push(BlockDecl {
                        name: gname.clone(),
                        block: Block::Gain(w.clone()),
                    });
                    g.wires.push(Wire {
                        from_block: prev_layer[j].clone(),
                        to_block: gname.clone(),
                        to_pin: "in".into(),
                    });
                    signs.push(1);
                    feeds.push(gname);
                }
                if !b.is_zero() {
                    let bname = format!("{neuron}_b");
                    g.blocks.push(BlockDecl {
                        name: bname.clone(),
                        block: Block::Input(InputConstraint::Interval(b.clone(), b.clone())),
                    });
                    signs.push(1);
                    feeds.push(bname);
                }
                if feeds.is_empty() {
                    let zname = format!("{neuron}_b");
                    g.blocks.push(BlockDecl {
                        name: zname.clone(),
                        block: Block::Input(InputConstraint::Interval(
                            Rational::zero(),
                            Rational::zero(),
                        )),
                    });
                    signs.push(1);
                    feeds.push(zname);
                }
                let sum_name = if relu {
                    format!("{neuron}_pre")
                } else {
                    neuron.clone()
                };
                g.blocks.push(BlockDecl {
                    name: sum_name.clone(),
                    block: Block::Sum(signs),
                });
                for (slot, src) in feeds.iter().enumerate() {
                    g.wires.push(Wire {
                        from_block: src.clone(),
                        to_block: sum_name.clone(),
                        to_pin: format!("in{}", slot + 1),
                    });
                }
                if relu {
                    g.blocks.push(BlockDecl {
                        name: neuron.clone(),
                        block: Block::Relu,
                    });
                    g.wires.push(Wire {
                        from_block: sum_name,
                        to_block: neuron.clone(),
                        to_pin: "in".into(),
                    });
                }
                this_layer.push(neuron);
            }
            prev_layer = this_layer;
        } else {
            return Err(fail(l, format!("unknown statement `{stmt}`")));
        }
    }
    Err(ParseError {
        line: 1,
        col: 1,
        message: "missing closing `}`".into(),
    })
}

type Rows = Vec<Vec<Rational>>;

fn parse_weights_bias(
    text: &str,
    line: u32,
) -> std::result::Result<(Rows, Vec<Rational>), ParseError> {
    let fail = |m: String| ParseError {
        line,
        col: 1,
        message: m,
    };
    let text = text.trim();
    let rest = text
        .strip_prefix("weights")
        .ok_or_else(|| fail("expected `weights [[...], ...]`".into()))?
        .trim();
    let (matrix_text, rest) =
        take_bracketed(rest).ok_or_else(|| fail("bad weights matrix".into()))?;
    let rest = rest
        .trim()
        .strip_prefix("bias")
        .ok_or_else(|| fail("expected `bias [...]`".into()))?
        .trim();
    let (bias_text, tail) = take_bracketed(rest).ok_or_else(|| fail("bad bias vector".into()))?;
    if !tail.trim().is_empty() {
        return Err(fail(format!("trailing input `{}`", tail.trim())));
    }

    let mut rows = Vec::new();
    let mut cursor = matrix_text.trim();
    while !cursor.is_empty() {
        let (row_text, rest) =
            take_bracketed(cursor).ok_or_else(|| fail("bad weight row".into()))?;
        let row: Option<Vec<Rational>> = row_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(parse_number)
            .collect();
        rows.push(row.ok_or_else(|| fail("bad number in weights".into()))?);
        cursor = rest.trim().strip_prefix(',').unwrap_or(rest.trim()).trim();
    }
    let bias: Option<Vec<Rational>> = bias_text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_number)
        .collect();
    Ok((rows, bias.ok_or_else(|| fail("bad number in bias".into()))?))
}

/// Splits `"[inner] rest"` into `("inner", " rest")`.
fn take_bracketed(s: &str) -> Option<(&str, &str)> {
    let s = s.trim_start();
    let mut depth = 0;
    let start = s.find('[')?;
    if s[..start].trim() != "" {
        return None;
    }
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&s[start + 1..i], &s[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}
