//! Reading rules back out of embedding space, plus the evaluation metrics.

use std::collections::{BTreeSet, HashMap};

use crate::chain::{Dictionary, RuleInstance};
use crate::diff::{cosine_value, ParamStore};
use crate::logic::{Atom, FactKey, SlotSpec, SymbolTable, Template};
use crate::oracle::forward_chain;
use crate::tasks::{arity_map, crisp_key, crisp_keys};
use crate::{Error, Result};

/// A rule with concrete predicate names and the similarity evidence backing
/// it. Confidence is the minimum atom similarity, so one drifting slot
/// drags the whole rule down.
#[derive(Debug, Clone)]
pub struct DecodedRule {
    pub rule: Template,
    pub confidence: f64,
}

impl std::fmt::Display for DecodedRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} {}", self.confidence, self.rule)
    }
}

/// Nearest dictionary predicate of the right arity by cosine similarity.
/// Exact ties resolve to the lowest predicate id.
pub fn decode_atom(
    embedding: &[f64],
    dict: &Dictionary,
    params: &ParamStore,
    arity: u8,
) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, entry) in dict.entries().iter().enumerate() {
        if entry.arity != arity {
            continue;
        }
        let sim = cosine_value(embedding, params.values(entry.param));
        if best.map_or(true, |(_, s)| sim > s) {
            best = Some((i, sim));
        }
    }
    best.ok_or_else(|| {
        Error::Argument(format!("dictionary has no predicate of arity {}", arity))
    })
}

fn decode_atom_of(
    atom: &Atom,
    param: crate::diff::ParamId,
    dict: &Dictionary,
    params: &ParamStore,
) -> Result<(Atom, f64)> {
    let (idx, sim) = decode_atom(params.values(param), dict, params, atom.arity())?;
    Ok((
        Atom {
            slot: SlotSpec::Named(dict.get(idx).name.clone()),
            args: atom.args.clone(),
        },
        sim,
    ))
}

/// Decodes every slot of every rule. Tied slots share an embedding, so they
/// decode consistently by construction.
pub fn decode_rules(
    rules: &[RuleInstance],
    dict: &Dictionary,
    params: &ParamStore,
) -> Result<Vec<DecodedRule>> {
    let mut out = Vec::with_capacity(rules.len());
    for rule in rules {
        let (head, head_sim) = decode_atom_of(&rule.template.head, rule.head, dict, params)?;
        let mut confidence = head_sim;
        let mut body = Vec::with_capacity(rule.template.body.len());
        for (atom, &param) in rule.template.body.iter().zip(&rule.body) {
            let (decoded, sim) = decode_atom_of(atom, param, dict, params)?;
            confidence = confidence.min(sim);
            body.push(decoded);
        }
        out.push(DecodedRule {
            rule: Template { head, body },
            confidence,
        });
    }
    Ok(out)
}

/// Mean squared error of predicted values against the labels (positives
/// target 1, negatives target 0); facts with no prediction count as 0.
pub fn mse_and_success(
    values: &HashMap<FactKey, f64>,
    positives: &[FactKey],
    negatives: &[FactKey],
    threshold: f64,
) -> Result<(f64, bool)> {
    let total = positives.len() + negatives.len();
    if total == 0 {
        return Err(Error::Argument("no target facts to score".into()));
    }
    let mut sum = 0.0;
    for key in positives {
        let v = values.get(key).copied().unwrap_or(0.0);
        sum += (v - 1.0) * (v - 1.0);
    }
    for key in negatives {
        let v = values.get(key).copied().unwrap_or(0.0);
        sum += v * v;
    }
    let mse = sum / total as f64;
    Ok((mse, mse < threshold))
}

/// Area under the precision-recall curve, sweeping thresholds downward and
/// grouping equal scores so that tie order cannot change the result.
pub fn auc_pr(scores: &[(f64, bool)]) -> Result<f64> {
    let npos = scores.iter().filter(|(_, label)| *label).count();
    if npos == 0 {
        return Err(Error::Argument(
            "AUC-PR needs at least one positive example".into(),
        ));
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut area = 0.0;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_recall = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / npos as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

/// Fraction of the observed facts entailed by the binarized core under the
/// decoded rules, via the crisp oracle run to fixpoint.
pub fn theory_accuracy(
    symbols: &SymbolTable,
    core: &[FactKey],
    rules: &[Template],
    observed: &[FactKey],
) -> Result<f64> {
    if observed.is_empty() {
        return Err(Error::Argument("no observed facts to score".into()));
    }
    let init: BTreeSet<_> = crisp_keys(symbols, core).into_iter().collect();
    let arities = arity_map(symbols);
    let closure = forward_chain(&init, rules, &arities, None)?;
    let hit = observed
        .iter()
        .filter(|k| closure.contains(&crisp_key(symbols, k)))
        .count();
    Ok(hit as f64 / observed.len() as f64)
}
