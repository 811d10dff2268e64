//! Negation normal form and disjunctive normal form.
//!
//! `to_dnf` is the front half of Fourier–Motzkin elimination: it yields a
//! disjunction of conjunctions of literals, with every `!=` literal split
//! into its `<` / `>` halves on the way.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{Atom, CompareOp, Formula};

/// Cap on the number of conjunctions produced by one DNF pass.
pub const DNF_DISJUNCT_CAP: usize = 200_000;

impl Formula {
    /// Negation normal form: no `Implies`/`Iff`, negations only on atoms.
    /// Comparison negations fold into the opposite relation; negated
    /// divisibility and boolean atoms stay as negated literals.
    pub fn normalize_nnf(&self) -> Result<Formula> {
        self.well_sorted()?;
        Ok(nnf(self, false))
    }

    /// Disjunctive normal form of a quantifier-free formula.
    pub fn to_dnf(&self) -> Result<Formula> {
        let disjuncts = self.dnf_disjuncts()?;
        Ok(Formula::or(disjuncts.into_iter().map(Formula::and)))
    }

    /// DNF as a list of literal conjunctions (the representation the
    /// elimination engines work on).
    pub fn dnf_disjuncts(&self) -> Result<Vec<Vec<Formula>>> {
        if !self.is_quantifier_free() {
            return Err(Error::Contract("to_dnf on quantified formula".into()));
        }
        let nnf = self.normalize_nnf()?;
        let mut budget = DNF_DISJUNCT_CAP;
        let raw = dnf(&nnf, &mut budget)?;
        Ok(raw.into_iter().filter_map(tidy_conjunct).collect())
    }
}

fn nnf(f: &Formula, negate: bool) -> Formula {
    match f {
        Formula::Atom(a) => {
            if negate {
                negate_atom(a)
            } else {
                Formula::Atom(a.clone())
            }
        }
        Formula::Not(g) => nnf(g, !negate),
        Formula::And(fs) => {
            let items = fs.iter().map(|g| nnf(g, negate));
            if negate {
                Formula::or(items)
            } else {
                Formula::and(items)
            }
        }
        Formula::Or(fs) => {
            let items = fs.iter().map(|g| nnf(g, negate));
            if negate {
                Formula::and(items)
            } else {
                Formula::or(items)
            }
        }
        Formula::Implies(a, b) => {
            if negate {
                // not (a => b)  ==  a and not b
                Formula::and([nnf(a, false), nnf(b, true)])
            } else {
                Formula::or([nnf(a, true), nnf(b, false)])
            }
        }
        Formula::Iff(a, b) => {
            if negate {
                Formula::or([
                    Formula::and([nnf(a, false), nnf(b, true)]),
                    Formula::and([nnf(a, true), nnf(b, false)]),
                ])
            } else {
                Formula::or([
                    Formula::and([nnf(a, false), nnf(b, false)]),
                    Formula::and([nnf(a, true), nnf(b, true)]),
                ])
            }
        }
        Formula::Exists(v, body) => {
            if negate {
                Formula::forall(v.clone(), nnf(body, true))
            } else {
                Formula::exists(v.clone(), nnf(body, false))
            }
        }
        Formula::Forall(v, body) => {
            if negate {
                Formula::exists(v.clone(), nnf(body, true))
            } else {
                Formula::forall(v.clone(), nnf(body, false))
            }
        }
    }
}

fn negate_atom(a: &Atom) -> Formula {
    match a {
        Atom::True => Formula::truth(false),
        Atom::False => Formula::truth(true),
        Atom::Compare(t, op) => Formula::Atom(Atom::compare(t.clone(), op.negate())),
        Atom::Divides(..) | Atom::BoolVar(_) => Formula::Not(Box::new(Formula::Atom(a.clone()))),
    }
}

fn dnf(f: &Formula, budget: &mut usize) -> Result<Vec<Vec<Formula>>> {
    let out = match f {
        Formula::Atom(Atom::Compare(t, CompareOp::Ne)) => vec![
            vec![Formula::Atom(Atom::compare(t.clone(), CompareOp::Lt))],
            vec![Formula::Atom(Atom::compare(t.clone(), CompareOp::Gt))],
        ],
        Formula::Atom(Atom::True) => vec![vec![]],
        Formula::Atom(Atom::False) => vec![],
        Formula::Atom(_) | Formula::Not(_) => vec![vec![f.clone()]],
        Formula::Or(fs) => {
            let mut out = Vec::new();
            for g in fs {
                out.extend(dnf(g, budget)?);
            }
            out
        }
        Formula::And(fs) => {
            let mut acc: Vec<Vec<Formula>> = vec![vec![]];
            for g in fs {
                let rhs = dnf(g, budget)?;
                let mut next = Vec::with_capacity(acc.len() * rhs.len().max(1));
                for left in &acc {
                    for right in &rhs {
                        let mut conj = left.clone();
                        conj.extend(right.iter().cloned());
                        next.push(conj);
                    }
                }
                acc = next;
                if acc.len() > *budget {
                    return Err(Error::Resource(format!(
                        "DNF exceeded {DNF_DISJUNCT_CAP} disjuncts"
                    )));
                }
            }
            acc
        }
        Formula::Implies(..) | Formula::Iff(..) => {
            return Err(Error::Contract("to_dnf expects NNF input".into()))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            return Err(Error::Contract("to_dnf on quantified formula".into()))
        }
    };
    if out.len() > *budget {
        return Err(Error::Resource(format!(
            "DNF exceeded {DNF_DISJUNCT_CAP} disjuncts"
        )));
    }
    Ok(out)
}

/// Deduplicates literals and drops conjunctions with an obvious
/// contradiction; `None` means the conjunct is unsatisfiable.
fn tidy_conjunct(literals: Vec<Formula>) -> Option<Vec<Formula>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for lit in literals {
        if lit.is_true() {
            continue;
        }
        if lit.is_false() {
            return None;
        }
        if seen.contains(&complement(&lit)) {
            return None;
        }
        if seen.insert(lit.clone()) {
            out.push(lit);
        }
    }
    Some(out)
}

/// Syntactic complement of a literal, in canonical form.
pub(crate) fn complement(lit: &Formula) -> Formula {
    match lit {
        Formula::Atom(Atom::Compare(t, op)) => Formula::Atom(Atom::compare(t.clone(), op.negate())),
        Formula::Atom(a) => Formula::Not(Box::new(Formula::Atom(a.clone()))),
        Formula::Not(inner) => (**inner).clone(),
        other => Formula::not(other.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{LinearTerm, Sort, TimedVar};

    fn x() -> TimedVar {
        TimedVar::at_k("x", Sort::Real)
    }

    fn atom(name: &str, op: CompareOp) -> Formula {
        Formula::compare(LinearTerm::var(TimedVar::at_k(name, Sort::Real)), op)
    }

    #[test]
    fn nnf_implication() {
        // not (a => b) -> a and not b (on boolean atoms)
        let a = Formula::Atom(Atom::BoolVar(TimedVar::at_k("a", Sort::Bool)));
        let b = Formula::Atom(Atom::BoolVar(TimedVar::at_k("b", Sort::Bool)));
        let f = Formula::not(Formula::implies(a.clone(), b.clone()));
        let g = f.normalize_nnf().unwrap();
        assert_eq!(g, Formula::and([a, Formula::not(b)]));
    }

    #[test]
    fn nnf_order_negation() {
        // not (x < 0) -> x >= 0
        let f = Formula::not(Formula::compare(LinearTerm::var(x()), CompareOp::Lt));
        let g = f.normalize_nnf().unwrap();
        assert_eq!(g, Formula::compare(LinearTerm::var(x()), CompareOp::Ge));
    }

    #[test]
    fn nnf_de_morgan() {
        // not (x = 0 and y > 0) -> x != 0 or y <= 0
        let y = TimedVar::at_k("y", Sort::Real);
        let f = Formula::not(Formula::and([
            Formula::compare(LinearTerm::var(x()), CompareOp::Eq),
            Formula::compare(LinearTerm::var(y.clone()), CompareOp::Gt),
        ]));
        let g = f.normalize_nnf().unwrap();
        assert_eq!(
            g,
            Formula::or([
                Formula::compare(LinearTerm::var(x()), CompareOp::Ne),
                Formula::compare(LinearTerm::var(y), CompareOp::Le),
            ])
        );
    }

    #[test]
    fn dnf_distribution() {
        // (a or b) and c -> (a and c) or (b and c)
        let f = Formula::and([
            Formula::or([atom("a", CompareOp::Gt), atom("b", CompareOp::Gt)]),
            atom("c", CompareOp::Gt),
        ]);
        let d = f.dnf_disjuncts().unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn dnf_splits_disequalities() {
        let f = Formula::compare(LinearTerm::var(x()), CompareOp::Ne);
        let d = f.dnf_disjuncts().unwrap();
        assert_eq!(d.len(), 2);
        let rendered: Vec<String> = d.iter().map(|c| c[0].to_string()).collect();
        assert!(rendered.contains(&"x(k) < 0".to_string()));
        assert!(rendered.contains(&"x(k) > 0".to_string()));
    }

    #[test]
    fn dnf_fixed_point_on_conjunction() {
        let f = Formula::and([atom("a", CompareOp::Gt), atom("b", CompareOp::Le)]);
        let d = f.to_dnf().unwrap();
        assert_eq!(d, f);
    }

    #[test]
    fn dnf_rejects_quantifiers() {
        let f = Formula::exists(x(), Formula::compare(LinearTerm::var(x()), CompareOp::Gt));
        assert!(matches!(f.to_dnf(), Err(Error::Contract(_))));
    }

    #[test]
    fn contradictory_conjunct_drops() {
        let f = Formula::and([
            Formula::compare(LinearTerm::var(x()), CompareOp::Lt),
            Formula::compare(LinearTerm::var(x()), CompareOp::Ge),
        ]);
        assert!(f.dnf_disjuncts().unwrap().is_empty());
    }
}
