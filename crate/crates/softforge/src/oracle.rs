//! Crisp boolean forward chaining, independent of the soft engine.
//!
//! This module re-implements matching naively (scan all facts, backtrack over
//! body atoms) on purpose: it shares no code with the soft chain, so agreement
//! between the two is a meaningful check rather than a tautology.

use crate::logic::{Arg, SlotSpec, Template};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap};

/// A ground fact in natural arity form: (predicate, one or two constants).
pub type CrispFact = (String, Vec<String>);

pub fn fact1(p: &str, a: &str) -> CrispFact {
    (p.to_string(), vec![a.to_string()])
}

pub fn fact2(p: &str, a: &str, b: &str) -> CrispFact {
    (p.to_string(), vec![a.to_string(), b.to_string()])
}

pub fn display_fact(f: &CrispFact) -> String {
    format!("{}({})", f.0, f.1.join(","))
}

fn slot_name(s: &SlotSpec) -> Result<&str> {
    match s {
        SlotSpec::Named(n) => Ok(n),
        other => Err(Error::Argument(format!(
            "crisp rule has an undecided slot {:?}; only concrete predicate names are allowed",
            other
        ))),
    }
}

fn unify(args: &[Arg], fact_args: &[String], binding: &mut [Option<String>; 4]) -> bool {
    if args.len() != fact_args.len() {
        return false;
    }
    for (a, c) in args.iter().zip(fact_args) {
        match a {
            Arg::Const(k) => {
                if k != c {
                    return false;
                }
            }
            Arg::Var(v) => {
                let slot = &mut binding[v.index()];
                match slot {
                    Some(bound) if bound != c => return false,
                    Some(_) => {}
                    None => *slot = Some(c.clone()),
                }
            }
        }
    }
    true
}

fn ground_arg(a: &Arg, binding: &[Option<String>; 4]) -> Result<String> {
    match a {
        Arg::Const(k) => Ok(k.clone()),
        Arg::Var(v) => binding[v.index()]
            .clone()
            .ok_or_else(|| Error::Internal(format!("unbound head variable {}", v))),
    }
}

/// Grounds the head of a matched rule. Unary predicates on a two-argument
/// head atom require both positions to agree (the diagonal); disagreement
/// yields no fact, mirroring the soft engine's candidate rules.
fn ground_head(
    rule: &Template,
    binding: &[Option<String>; 4],
    arities: &HashMap<String, u8>,
) -> Result<Option<CrispFact>> {
    let pred = slot_name(&rule.head.slot)?;
    let arity = *arities
        .get(pred)
        .ok_or_else(|| Error::Argument(format!("predicate '{}' has no declared arity", pred)))?;
    let subj = ground_arg(&rule.head.args[0], binding)?;
    let obj = if rule.head.args.len() == 2 {
        ground_arg(&rule.head.args[1], binding)?
    } else {
        subj.clone()
    };
    Ok(match arity {
        1 if subj == obj => Some((pred.to_string(), vec![subj])),
        1 => None,
        _ => Some((pred.to_string(), vec![subj, obj])),
    })
}

fn apply_rule(
    rule: &Template,
    facts: &[CrispFact],
    arities: &HashMap<String, u8>,
    out: &mut BTreeSet<CrispFact>,
) -> Result<()> {
    fn rec(
        rule: &Template,
        facts: &[CrispFact],
        arities: &HashMap<String, u8>,
        depth: usize,
        binding: &[Option<String>; 4],
        out: &mut BTreeSet<CrispFact>,
    ) -> Result<()> {
        if depth == rule.body.len() {
            if let Some(f) = ground_head(rule, binding, arities)? {
                out.insert(f);
            }
            return Ok(());
        }
        let atom = &rule.body[depth];
        let pred = slot_name(&atom.slot)?;
        for fact in facts {
            if fact.0 != *pred {
                continue;
            }
            let mut b = binding.clone();
            if unify(&atom.args, &fact.1, &mut b) {
                rec(rule, facts, arities, depth + 1, &b, out)?;
            }
        }
        Ok(())
    }
    rec(rule, facts, arities, 0, &[None, None, None, None], out)
}

/// Runs crisp forward chaining. `steps = Some(k)` applies every rule to the
/// current fact set exactly k rounds (new facts become visible the next
/// round); `None` iterates to the least fixpoint.
pub fn forward_chain(
    init: &BTreeSet<CrispFact>,
    rules: &[Template],
    arities: &HashMap<String, u8>,
    steps: Option<usize>,
) -> Result<BTreeSet<CrispFact>> {
    let mut set = init.clone();
    let mut round = 0;
    loop {
        if let Some(k) = steps {
            if round == k {
                return Ok(set);
            }
        }
        let snapshot: Vec<CrispFact> = set.iter().cloned().collect();
        let before = set.len();
        for rule in rules {
            apply_rule(rule, &snapshot, arities, &mut set)?;
        }
        round += 1;
        if steps.is_none() && set.len() == before {
            return Ok(set);
        }
    }
}

pub fn entails(
    init: &BTreeSet<CrispFact>,
    rules: &[Template],
    arities: &HashMap<String, u8>,
    fact: &CrispFact,
) -> Result<bool> {
    Ok(forward_chain(init, rules, arities, None)?.contains(fact))
}

/// Outcome of checking decoded rules against labeled examples.
#[derive(Debug, Clone)]
pub struct Verification {
    pub holds: bool,
    pub missing_positives: Vec<CrispFact>,
    pub derived_negatives: Vec<CrispFact>,
    pub closure_size: usize,
}

/// True iff the closure of the background under the rules covers every
/// positive example and none of the negatives. `k = None` runs to fixpoint.
pub fn verify_solution(
    rules: &[Template],
    background: &[CrispFact],
    positives: &[CrispFact],
    negatives: &[CrispFact],
    arities: &HashMap<String, u8>,
    k: Option<usize>,
) -> Result<Verification> {
    if positives.is_empty() && negatives.is_empty() {
        return Err(Error::Argument(
            "nothing to verify: no positive or negative examples".into(),
        ));
    }
    let init: BTreeSet<CrispFact> = background.iter().cloned().collect();
    let closure = forward_chain(&init, rules, arities, k)?;
    let missing: Vec<CrispFact> = positives
        .iter()
        .filter(|f| !closure.contains(*f))
        .cloned()
        .collect();
    let wrong: Vec<CrispFact> = negatives
        .iter()
        .filter(|f| closure.contains(*f))
        .cloned()
        .collect();
    Ok(Verification {
        holds: missing.is_empty() && wrong.is_empty(),
        missing_positives: missing,
        derived_negatives: wrong,
        closure_size: closure.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_templates;

    fn arities(list: &[(&str, u8)]) -> HashMap<String, u8> {
        list.iter().map(|(n, a)| (n.to_string(), *a)).collect()
    }

    fn set(facts: &[CrispFact]) -> BTreeSet<CrispFact> {
        facts.iter().cloned().collect()
    }

    #[test]
    fn grandfather_is_derived() {
        let rules = parse_templates("grandfather(X,Y) <- father(X,Z), parent(Z,Y)").unwrap();
        let init = set(&[fact2("father", "bill", "mary"), fact2("parent", "mary", "liz")]);
        let ar = arities(&[("grandfather", 2), ("father", 2), ("parent", 2)]);
        let closure = forward_chain(&init, &rules, &ar, None).unwrap();
        assert!(closure.contains(&fact2("grandfather", "bill", "liz")));
        assert_eq!(closure.len(), 3);
    }

    #[test]
    fn even_numbers_close_over_the_chain() {
        let rules = parse_templates("even(Y) <- even(X), succ(X,Z), succ(Z,Y)").unwrap();
        let mut facts = vec![fact1("even", "0")];
        for i in 0..10 {
            facts.push(fact2("succ", &i.to_string(), &(i + 1).to_string()));
        }
        let ar = arities(&[("even", 1), ("succ", 2)]);
        let closure = forward_chain(&set(&facts), &rules, &ar, None).unwrap();
        for i in 0..=10 {
            let f = fact1("even", &i.to_string());
            assert_eq!(closure.contains(&f), i % 2 == 0, "even({})", i);
        }
    }

    #[test]
    fn empty_rules_are_identity() {
        let init = set(&[fact2("edge", "a", "b")]);
        let closure = forward_chain(&init, &[], &HashMap::new(), None).unwrap();
        assert_eq!(closure, init);
    }

    #[test]
    fn step_cap_limits_depth() {
        let rules =
            parse_templates("path(X,Y) <- edge(X,Y)\npath(X,Y) <- edge(X,Z), path(Z,Y)").unwrap();
        let init = set(&[
            fact2("edge", "a", "b"),
            fact2("edge", "b", "c"),
            fact2("edge", "c", "d"),
        ]);
        let ar = arities(&[("path", 2), ("edge", 2)]);
        let one = forward_chain(&init, &rules, &ar, Some(1)).unwrap();
        assert!(one.contains(&fact2("path", "a", "b")));
        assert!(!one.contains(&fact2("path", "a", "c")));
        let full = forward_chain(&init, &rules, &ar, None).unwrap();
        assert!(full.contains(&fact2("path", "a", "d")));
        assert!(one.is_subset(&full));
        // 3 edges + 6 paths
        assert_eq!(full.len(), 9);
    }

    #[test]
    fn diagonal_head_feeds_a_unary_predicate() {
        let rules = parse_templates("mutual(X,X) <- edge(X,Y), edge(Y,X)").unwrap();
        let init = set(&[
            fact2("edge", "a", "b"),
            fact2("edge", "b", "a"),
            fact2("edge", "b", "c"),
        ]);
        let ar = arities(&[("mutual", 1), ("edge", 2)]);
        let closure = forward_chain(&init, &rules, &ar, None).unwrap();
        assert!(closure.contains(&fact1("mutual", "a")));
        assert!(closure.contains(&fact1("mutual", "b")));
        assert!(!closure.contains(&fact1("mutual", "c")));
    }

    #[test]
    fn unary_head_atom_on_binary_predicate_grounds_diagonally() {
        let rules = parse_templates("selfie(X) <- node(X)").unwrap();
        let init = set(&[fact1("node", "a")]);
        let ar = arities(&[("selfie", 2), ("node", 1)]);
        let closure = forward_chain(&init, &rules, &ar, None).unwrap();
        assert!(closure.contains(&fact2("selfie", "a", "a")));
    }

    #[test]
    fn off_diagonal_unary_candidate_yields_nothing() {
        let rules = parse_templates("tag(X,Y) <- edge(X,Y)").unwrap();
        let init = set(&[fact2("edge", "a", "b")]);
        let ar = arities(&[("tag", 1), ("edge", 2)]);
        let closure = forward_chain(&init, &rules, &ar, None).unwrap();
        assert_eq!(closure, init);
    }

    #[test]
    fn repeated_body_atom_can_reuse_one_fact() {
        // The duplicated atom binds the same fact twice: presence of a single
        // child is enough for this (deliberately weak) rule shape.
        let rules = parse_templates("t(X,X) <- edge(X,Z), edge(X,Z)").unwrap();
        let init = set(&[fact2("edge", "a", "b")]);
        let ar = arities(&[("t", 2), ("edge", 2)]);
        let closure = forward_chain(&init, &rules, &ar, None).unwrap();
        assert!(closure.contains(&fact2("t", "a", "a")));
    }

    #[test]
    fn closure_is_monotone_in_facts() {
        let rules = parse_templates("p(X,Y) <- e(X,Z), e(Z,Y)").unwrap();
        let small = set(&[fact2("e", "a", "b"), fact2("e", "b", "c")]);
        let mut big = small.clone();
        big.insert(fact2("e", "c", "d"));
        let ar = arities(&[("p", 2), ("e", 2)]);
        let cs = forward_chain(&small, &rules, &ar, None).unwrap();
        let cb = forward_chain(&big, &rules, &ar, None).unwrap();
        assert!(cs.is_subset(&cb));
    }

    #[test]
    fn entails_core_and_rejects_unknown() {
        let rules = parse_templates("has(X,Y) <- is(X,Z), has(Z,Y)").unwrap();
        let init = set(&[fact2("is", "salmon", "fish"), fact2("has", "fish", "gills")]);
        let ar = arities(&[("has", 2), ("is", 2)]);
        assert!(entails(&init, &rules, &ar, &fact2("has", "salmon", "gills")).unwrap());
        assert!(entails(&init, &rules, &ar, &fact2("is", "salmon", "fish")).unwrap());
        assert!(!entails(&init, &rules, &ar, &fact2("has", "shark", "gills")).unwrap());
    }

    #[test]
    fn verify_reports_missing_and_wrong() {
        let ar = arities(&[("even", 1), ("succ", 2), ("zero", 1)]);
        let mut bg = vec![fact1("zero", "0")];
        for i in 0..4 {
            bg.push(fact2("succ", &i.to_string(), &(i + 1).to_string()));
        }
        let pos = vec![fact1("even", "0"), fact1("even", "2"), fact1("even", "4")];
        let neg = vec![fact1("even", "1"), fact1("even", "3")];

        let good =
            parse_templates("even(X) <- zero(X)\neven(Y) <- even(X), succ(X,Z), succ(Z,Y)")
                .unwrap();
        let v = verify_solution(&good, &bg, &pos, &neg, &ar, None).unwrap();
        assert!(v.holds, "missing {:?} wrong {:?}", v.missing_positives, v.derived_negatives);

        let no_base = parse_templates("even(Y) <- even(X), succ(X,Z), succ(Z,Y)").unwrap();
        let v = verify_solution(&no_base, &bg, &pos, &neg, &ar, None).unwrap();
        assert!(!v.holds);
        assert_eq!(v.missing_positives.len(), 3);

        let over = parse_templates("even(Y) <- even(X), succ(X,Y)\neven(X) <- zero(X)").unwrap();
        let v = verify_solution(&over, &bg, &pos, &neg, &ar, None).unwrap();
        assert!(!v.holds);
        assert_eq!(v.derived_negatives, vec![fact1("even", "1"), fact1("even", "3")]);
    }

    #[test]
    fn verify_rejects_empty_examples() {
        let rules = parse_templates("p(X,Y) <- e(X,Y)").unwrap();
        let err = verify_solution(&rules, &[], &[], &[], &HashMap::new(), None);
        assert!(err.is_err());
    }

    #[test]
    fn undecided_slots_are_rejected() {
        let rules = parse_templates("F(X,Y) <- e(X,Y)").unwrap();
        let init = set(&[fact2("e", "a", "b")]);
        let ar = arities(&[("e", 2)]);
        assert!(forward_chain(&init, &rules, &ar, None).is_err());
    }
}
