//! System description: components, ports, contracts, interconnections.
//!
//! A [`SystemModel`] carries the atomic-properties (relative-indexed, newest
//! offset 0), the atomic-initial-conditions (absolute-indexed), the
//! connection relation, and the split of signals into externals and
//! internals. Everything not declared external — connected ports, local
//! state names, dangling outputs — is internal and gets existentially
//! eliminated during composition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{self, Desugared, Expr};
use crate::error::Result;
use crate::formula::{Atom, Formula, LinearTerm, Sort, TimeIndex, TimedVar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::In => write!(f, "in"),
            Direction::Out => write!(f, "out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub component: String,
    pub name: String,
    pub direction: Direction,
    pub sort: Sort,
}

/// A component contract clause: quantifier-free, relative-indexed, with the
/// newest offset normalized to 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicProperty {
    pub owner: String,
    pub body: Formula,
    pub order: u64,
}

impl AtomicProperty {
    pub fn new(owner: impl Into<String>, body: Formula) -> Result<Self> {
        let body = match body.max_offset() {
            Some(m) if m != 0 => body.shift(-m)?,
            _ => body,
        };
        let order = body.order()?;
        Ok(AtomicProperty {
            owner: owner.into(),
            body,
            order,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicInitialCondition {
    pub owner: String,
    pub body: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: Port,
    pub to: Port,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SystemModel {
    pub name: String,
    pub domain: Sort,
    pub components: Vec<String>,
    pub ports: Vec<Port>,
    /// component-local state names: (owner, name, sort)
    pub locals: Vec<(String, String, Sort)>,
    /// system-wide symbolic constants, always external
    pub params: Vec<(String, Sort)>,
    pub properties: Vec<AtomicProperty>,
    pub initials: Vec<AtomicInitialCondition>,
    pub connections: Vec<Connection>,
    pub externals: BTreeSet<String>,
}

impl SystemModel {
    /// Sort environment over every declared signal name.
    pub fn sort_env(&self) -> BTreeMap<String, Sort> {
        let mut env = BTreeMap::new();
        for p in &self.ports {
            env.insert(p.name.clone(), p.sort);
        }
        for (_, n, s) in &self.locals {
            env.insert(n.clone(), *s);
        }
        for (n, s) in &self.params {
            env.insert(n.clone(), *s);
        }
        env
    }

    /// Signals hidden from the system interface: everything declared that is
    /// not external. Params are never internal.
    pub fn internal_names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.ports.iter().map(|p| p.name.clone()).collect();
        out.extend(self.locals.iter().map(|(_, n, _)| n.clone()));
        for e in &self.externals {
            out.remove(e);
        }
        for (p, _) in &self.params {
            out.remove(p);
        }
        out
    }

    pub fn port(&self, component: &str, name: &str) -> Option<&Port> {
        self.ports
            .iter()
            .find(|p| p.component == component && p.name == name)
    }

    /// Order bound of the composed system: the sum of all atomic-property
    /// orders. The derived property never needs a longer history.
    pub fn order_bound(&self) -> u64 {
        self.properties.iter().map(|p| p.order).sum()
    }

    /// Structural validation. An empty result means the model is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut names: BTreeMap<String, &'static str> = BTreeMap::new(); // name -> kind
        let mut declare = |name: &str, kind: &'static str, out: &mut Vec<Diagnostic>| {
            if let Some(prev) = names.insert(name.to_string(), kind) {
                out.push(Diagnostic {
                    rule: "DUP_NAME",
                    message: format!("`{name}` declared twice ({prev} and {kind})"),
                });
            }
        };
        for p in &self.ports {
            declare(&p.name, "port", &mut out);
        }
        for (_, n, _) in &self.locals {
            declare(n, "local", &mut out);
        }
        for (n, _) in &self.params {
            declare(n, "param", &mut out);
        }

        // connections: out -> in, matching sorts, single driver per input
        let mut driven: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for c in &self.connections {
            if c.from.direction != Direction::Out || c.to.direction != Direction::In {
                out.push(Diagnostic {
                    rule: "DIRECTION",
                    message: format!(
                        "connection {}.{} -> {}.{} must run from an output to an input",
                        c.from.component, c.from.name, c.to.component, c.to.name
                    ),
                });
            }
            if c.from.sort != c.to.sort {
                out.push(Diagnostic {
                    rule: "SORT_MISMATCH",
                    message: format!(
                        "connection {} -> {} mixes {} and {}",
                        c.from.name, c.to.name, c.from.sort, c.to.sort
                    ),
                });
            }
            *driven.entry((&c.to.component, &c.to.name)).or_insert(0) += 1;
        }
        for ((comp, port), count) in driven {
            if count > 1 {
                out.push(Diagnostic {
                    rule: "MULTI_DRIVER",
                    message: format!("input {comp}.{port} has {count} drivers"),
                });
            }
        }

        // every property/initial variable resolves to a declared signal
        let env = self.sort_env();
        let check_vars = |f: &Formula, what: &str, out: &mut Vec<Diagnostic>| {
            for v in f.all_vars() {
                match env.get(&v.name) {
                    None => out.push(Diagnostic {
                        rule: "UNDECLARED",
                        message: format!("{what} mentions undeclared signal `{}`", v.name),
                    }),
                    Some(s) if *s != v.sort => out.push(Diagnostic {
                        rule: "SORT_MISMATCH",
                        message: format!(
                            "{what} uses `{}` as {} but it is declared {s}",
                            v.name, v.sort
                        ),
                    }),
                    _ => {}
                }
            }
        };
        for p in &self.properties {
            check_vars(&p.body, &format!("property of {}", p.owner), &mut out);
            if p.body.order().map(|o| o != p.order).unwrap_or(true) {
                out.push(Diagnostic {
                    rule: "ORDER_CACHE",
                    message: format!("property of {} has a stale order cache", p.owner),
                });
            }
            if !p.body.is_quantifier_free() {
                out.push(Diagnostic {
                    rule: "QUANTIFIER",
                    message: format!("property of {} is not quantifier-free", p.owner),
                });
            }
        }
        let bound = self.order_bound();
        for i in &self.initials {
            check_vars(
                &i.body,
                &format!("initial condition of {}", i.owner),
                &mut out,
            );
            for v in i.body.all_vars() {
                match v.index {
                    TimeIndex::Absolute(s) => {
                        if bound > 0 && s >= bound {
                            out.push(Diagnostic {
                                rule: "INIT_STEP",
                                message: format!(
                                    "initial condition pins step {s} beyond the order bound {bound}"
                                ),
                            });
                        }
                    }
                    TimeIndex::Relative(_) => out.push(Diagnostic {
                        rule: "INIT_STEP",
                        message: format!("initial condition of {} uses a relative index", i.owner),
                    }),
                }
            }
        }

        // externals name declared non-local signals
        for e in &self.externals {
            let is_port = self.ports.iter().any(|p| &p.name == e);
            let is_param = self.params.iter().any(|(n, _)| n == e);
            if !is_port && !is_param {
                out.push(Diagnostic {
                    rule: "EXTERNAL_UNKNOWN",
                    message: format!("external `{e}` is not a declared port"),
                });
            }
        }

        // numeric ports must match the system domain
        for p in &self.ports {
            if p.sort != Sort::Bool && p.sort != self.domain {
                out.push(Diagnostic {
                    rule: "DOMAIN_MISMATCH",
                    message: format!(
                        "port {}.{} is {} in a {} system",
                        p.component, p.name, p.sort, self.domain
                    ),
                });
            }
        }
        out
    }

    /// Connection equalities as order-0 relative formulas.
    pub fn connection_equalities(&self) -> Vec<Formula> {
        self.connections
            .iter()
            .map(|c| {
                let from = TimedVar::at_k(c.from.name.clone(), c.from.sort);
                let to = TimedVar::at_k(c.to.name.clone(), c.to.sort);
                if c.from.sort == Sort::Bool {
                    Formula::iff(
                        Formula::Atom(Atom::BoolVar(from)),
                        Formula::Atom(Atom::BoolVar(to)),
                    )
                } else {
                    Formula::cmp(
                        LinearTerm::var(from),
                        crate::formula::CompareOp::Eq,
                        LinearTerm::var(to),
                    )
                }
            })
            .collect()
    }
}

/// Desugars a contract clause with `prev` operators into an atomic-property
/// plus the atomic-initial-conditions pinning the early steps.
pub fn desugar_prev(
    owner: &str,
    expr: &Expr,
    env: &impl ast::SortEnv,
) -> Result<(AtomicProperty, Vec<AtomicInitialCondition>)> {
    let Desugared { rel, inits, .. } = ast::desugar(expr, env)?;
    let prop = AtomicProperty::new(owner, rel)?;
    let initials = inits
        .into_iter()
        .map(|(_, f)| AtomicInitialCondition {
            owner: owner.to_string(),
            body: f,
        })
        .collect();
    Ok((prop, initials))
}

/// A postulated system property, desugared. `guard`/`body` are populated
/// when the surface form is an implication, so the induction engine can give
/// the antecedent its historical reading.
#[derive(Debug, Clone)]
pub struct Postulate {
    pub whole: Desugared,
    pub split: Option<(Desugared, Desugared)>,
}

impl Postulate {
    pub fn from_expr(expr: &Expr, env: &impl ast::SortEnv) -> Result<Postulate> {
        let whole = ast::desugar(expr, env)?;
        let split = match expr {
            Expr::Implies(g, b) => Some((ast::desugar(g, env)?, ast::desugar(b, env)?)),
            _ => None,
        };
        Ok(Postulate { whole, split })
    }

    /// Order-0 postulates over the current step only.
    pub fn is_static(&self) -> bool {
        self.whole.order == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CompareOp;
    use crate::rational::Rational;

    fn port(comp: &str, name: &str, dir: Direction) -> Port {
        Port {
            component: comp.into(),
            name: name.into(),
            direction: dir,
            sort: Sort::Real,
        }
    }

    fn model_two_ports() -> SystemModel {
        SystemModel {
            name: "m".into(),
            domain: Sort::Real,
            components: vec!["A".into(), "B".into()],
            ports: vec![
                port("A", "a_out", Direction::Out),
                port("B", "b_in", Direction::In),
                port("B", "b_in2", Direction::In),
            ],
            ..Default::default()
        }
    }

    #[test]
    fn multi_driver_detected() {
        let mut m = model_two_ports();
        let c1 = Connection {
            from: m.port("A", "a_out").unwrap().clone(),
            to: m.port("B", "b_in").unwrap().clone(),
        };
        m.connections = vec![c1.clone(), c1];
        assert!(m.validate().iter().any(|d| d.rule == "MULTI_DRIVER"));
    }

    #[test]
    fn sort_mismatch_detected() {
        let mut m = model_two_ports();
        let mut to = m.port("B", "b_in").unwrap().clone();
        to.sort = Sort::Bool;
        m.ports[1].sort = Sort::Bool;
        m.connections = vec![Connection {
            from: m.port("A", "a_out").unwrap().clone(),
            to,
        }];
        assert!(m.validate().iter().any(|d| d.rule == "SORT_MISMATCH"));
    }

    #[test]
    fn fanout_is_fine_and_validate_is_idempotent() {
        let mut m = model_two_ports();
        m.connections = vec![
            Connection {
                from: m.port("A", "a_out").unwrap().clone(),
                to: m.port("B", "b_in").unwrap().clone(),
            },
            Connection {
                from: m.port("A", "a_out").unwrap().clone(),
                to: m.port("B", "b_in2").unwrap().clone(),
            },
        ];
        assert!(m.validate().is_empty());
        assert!(m.validate().is_empty());
    }

    #[test]
    fn order_bound_sums_property_orders() {
        let mut m = model_two_ports();
        let z = TimedVar::at_k("a_out", Sort::Real);
        let z1 = TimedVar::rel("a_out", -1, Sort::Real);
        m.properties = vec![
            AtomicProperty::new(
                "A",
                Formula::cmp(
                    LinearTerm::var(z.clone()),
                    CompareOp::Eq,
                    LinearTerm::var(z1.clone()),
                ),
            )
            .unwrap(),
            AtomicProperty::new(
                "A",
                Formula::compare(LinearTerm::var(z.clone()), CompareOp::Ge),
            )
            .unwrap(),
            AtomicProperty::new(
                "B",
                Formula::cmp(
                    LinearTerm::var(TimedVar::at_k("b_in", Sort::Real)),
                    CompareOp::Eq,
                    LinearTerm::var(TimedVar::rel("b_in", -1, Sort::Real)),
                ),
            )
            .unwrap(),
        ];
        assert_eq!(m.order_bound(), 2);
    }

    #[test]
    fn canonical_window_shifts_newest_to_zero() {
        // property written as y(k+1) = u(k) normalizes to y(k) = u(k-1)
        let y1 = TimedVar::rel("y", 1, Sort::Real);
        let u0 = TimedVar::at_k("u", Sort::Real);
        let p = AtomicProperty::new(
            "C",
            Formula::cmp(LinearTerm::var(y1), CompareOp::Eq, LinearTerm::var(u0)),
        )
        .unwrap();
        assert_eq!(p.order, 1);
        assert_eq!(p.body.max_offset(), Some(0));
        let vars = p.body.free_vars();
        assert!(vars.contains(&TimedVar::at_k("y", Sort::Real)));
        assert!(vars.contains(&TimedVar::rel("u", -1, Sort::Real)));
        let _ = Rational::zero();
    }
}
