//! Differentiable forward chaining.
//!
//! Each step enumerates, for every rule, every ordered tuple of facts from
//! the step-start snapshot whose constants match the rule body, then scores
//! one candidate output fact per dictionary predicate:
//!
//!   score = cos(head slot, candidate) * prod_i cos(body slot i, fact pred i) * prod_i v_i
//!
//! Cosines enter the product raw (they may be negative); the stored valuation
//! is clamped into [0,1] after max-merging. Merging happens after the whole
//! step's enumeration, so results do not depend on fact order.
//!
//! For speed, scoring runs on plain f64 and only the winning derivation of
//! each fact is materialized on the tape. Under max-merge with first-wins
//! ties this yields exactly the gradients of the fully materialized graph,
//! because losing branches of a max receive zero gradient anyway.

use crate::diff::{cosine_value, init_embedding, one_hot, NodeId, ParamId, ParamStore, Tape};
use crate::logic::{Arg, FactKey, GroundFact, SlotSpec, SymbolTable, Template};
use crate::{Error, Result};
use rand::Rng;
use std::collections::HashMap;

/// One predicate available for soft unification.
#[derive(Debug, Clone)]
pub struct DictEntry {
    pub name: String,
    pub arity: u8,
    pub param: ParamId,
}

/// The predicate set P: named predicates plus invented auxiliaries, in
/// symbol-table order so dictionary index equals predicate id.
#[derive(Debug, Clone)]
pub struct Dictionary {
    entries: Vec<DictEntry>,
    by_name: HashMap<String, usize>,
    pub d: usize,
}

impl Dictionary {
    /// Builds embeddings for every predicate in the table. Fixed mode pins
    /// each predicate to a one-hot basis vector; trainable mode samples them
    /// like rule slots.
    pub fn build<R: Rng>(
        symbols: &SymbolTable,
        d: usize,
        trainable: bool,
        init_mean: f64,
        params: &mut ParamStore,
        rng: &mut R,
    ) -> Result<Dictionary> {
        let np = symbols.num_preds();
        if np == 0 {
            return Err(Error::Config("empty predicate dictionary".into()));
        }
        if !trainable && d < np {
            return Err(Error::Config(format!(
                "embedding dimension {} is smaller than the dictionary size {}",
                d, np
            )));
        }
        let mut entries = Vec::with_capacity(np);
        let mut by_name = HashMap::new();
        for (i, p) in symbols.preds().iter().enumerate() {
            let values = if trainable {
                init_embedding(d, init_mean, rng)
            } else {
                one_hot(d, i)
            };
            let param = params.add(&format!("dict.{}", p.name), values, trainable, true);
            by_name.insert(p.name.clone(), i);
            entries.push(DictEntry { name: p.name.clone(), arity: p.arity, param });
        }
        Ok(Dictionary { entries, by_name, d })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[DictEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &DictEntry {
        &self.entries[i]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy)]
enum CArg {
    Var(u8),
    Const(u32),
}

#[derive(Debug, Clone, Copy)]
struct CAtom {
    args: [CArg; 2],
    nargs: u8,
}

const UNBOUND: u32 = u32::MAX;

impl CAtom {
    fn compile(args: &[Arg], symbols: &mut SymbolTable) -> CAtom {
        let mut out = [CArg::Var(0); 2];
        for (i, a) in args.iter().enumerate() {
            out[i] = match a {
                Arg::Var(v) => CArg::Var(v.index() as u8),
                Arg::Const(name) => CArg::Const(symbols.intern_const(name)),
            };
        }
        CAtom { args: out, nargs: args.len() as u8 }
    }

    fn resolved(&self, i: usize, binding: &[u32; 4]) -> u32 {
        match self.args[i] {
            CArg::Const(c) => c,
            CArg::Var(v) => binding[v as usize],
        }
    }

    /// Unifies this atom against a fact's (subj, obj), updating the binding.
    fn unify(&self, subj: u32, obj: u32, binding: &mut [u32; 4]) -> bool {
        let positions = [subj, obj];
        for i in 0..self.nargs as usize {
            match self.args[i] {
                CArg::Const(c) => {
                    if c != positions[i] {
                        return false;
                    }
                }
                CArg::Var(v) => {
                    let slot = &mut binding[v as usize];
                    if *slot == UNBOUND {
                        *slot = positions[i];
                    } else if *slot != positions[i] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A template whose predicate slots are bound to parameter vectors. Tied
/// slots share a ParamId; named slots reuse the dictionary embedding itself.
#[derive(Debug, Clone)]
pub struct RuleInstance {
    pub template: Template,
    pub head: ParamId,
    pub body: Vec<ParamId>,
    chead: CAtom,
    cbody: Vec<CAtom>,
}

/// Instantiates rule slots from templates. Free slots get fresh trainable
/// embeddings, `#k` ties share one embedding across the whole template set,
/// and named slots resolve to the dictionary entry of that predicate.
pub fn instantiate_rules<R: Rng>(
    templates: &[Template],
    dict: &Dictionary,
    symbols: &mut SymbolTable,
    init_mean: f64,
    params: &mut ParamStore,
    rng: &mut R,
) -> Result<Vec<RuleInstance>> {
    let d = dict.d;
    let mut ties: HashMap<u32, ParamId> = HashMap::new();
    let mut rules = Vec::with_capacity(templates.len());
    for (r, template) in templates.iter().enumerate() {
        template.validate()?;
        let mut slot = |spec: &SlotSpec,
                        nargs: usize,
                        name: String,
                        params: &mut ParamStore,
                        rng: &mut R|
         -> Result<ParamId> {
            match spec {
                SlotSpec::Free => Ok(params.add(&name, init_embedding(d, init_mean, rng), true, true)),
                SlotSpec::Tie(k) => Ok(*ties.entry(*k).or_insert_with(|| {
                    params.add(&format!("tie{}", k), init_embedding(d, init_mean, rng), true, true)
                })),
                SlotSpec::Named(n) => {
                    let i = dict
                        .lookup(n)
                        .ok_or_else(|| Error::Template(format!("unknown predicate '{}'", n)))?;
                    let entry = dict.get(i);
                    if entry.arity as usize != nargs {
                        return Err(Error::Template(format!(
                            "predicate '{}' has arity {} but is used with {} arguments",
                            n, entry.arity, nargs
                        )));
                    }
                    Ok(entry.param)
                }
            }
        };
        let head = slot(
            &template.head.slot,
            template.head.args.len(),
            format!("rule{}.head", r),
            params,
            rng,
        )?;
        let mut body = Vec::with_capacity(template.body.len());
        for (j, atom) in template.body.iter().enumerate() {
            body.push(slot(&atom.slot, atom.args.len(), format!("rule{}.body{}", r, j), params, rng)?);
        }
        rules.push(RuleInstance {
            chead: CAtom::compile(&template.head.args, symbols),
            cbody: template.body.iter().map(|a| CAtom::compile(&a.args, symbols)).collect(),
            template: template.clone(),
            head,
            body,
        });
    }
    Ok(rules)
}

/// The growing valuation: insertion-ordered facts plus a dense
/// (pred, subj, obj) -> index map over the candidate-fact universe.
#[derive(Debug)]
pub struct FactStore {
    pub keys: Vec<FactKey>,
    pub vals: Vec<f64>,
    pub arities: Vec<u8>,
    /// Tape node per fact; empty when inference runs without a tape.
    pub nodes: Vec<NodeId>,
    n_consts: usize,
    dense: Vec<u32>,
}

impl FactStore {
    pub fn new(n_preds: usize, n_consts: usize) -> FactStore {
        FactStore {
            keys: Vec::new(),
            vals: Vec::new(),
            arities: Vec::new(),
            nodes: Vec::new(),
            n_consts,
            dense: vec![UNBOUND; n_preds * n_consts * n_consts],
        }
    }

    fn dense_index(&self, key: &FactKey) -> usize {
        (key.pred as usize * self.n_consts + key.subj as usize) * self.n_consts + key.obj as usize
    }

    fn key_of_dense(&self, idx: usize) -> FactKey {
        let o = (idx % self.n_consts) as u32;
        let rest = idx / self.n_consts;
        let s = (rest % self.n_consts) as u32;
        FactKey::new((rest / self.n_consts) as u32, s, o)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, key: &FactKey) -> Option<usize> {
        match self.dense[self.dense_index(key)] {
            UNBOUND => None,
            i => Some(i as usize),
        }
    }

    pub fn value(&self, key: &FactKey) -> Option<f64> {
        self.index_of(key).map(|i| self.vals[i])
    }

    pub fn node(&self, key: &FactKey) -> Option<NodeId> {
        self.index_of(key).map(|i| self.nodes[i])
    }

    fn push(&mut self, key: FactKey, arity: u8, val: f64, node: Option<NodeId>) -> Result<()> {
        let di = self.dense_index(&key);
        if self.dense[di] != UNBOUND {
            return Err(Error::Internal("duplicate fact in store".into()));
        }
        self.dense[di] = self.keys.len() as u32;
        self.keys.push(key);
        self.vals.push(val);
        self.arities.push(arity);
        if let Some(n) = node {
            self.nodes.push(n);
        }
        Ok(())
    }
}

/// Inference hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    pub k: usize,
    /// A new fact is appended only when its clamped value exceeds this.
    pub prune_eps: f64,
    /// Per-rule, per-step cap on appended facts.
    pub max_new_facts: usize,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.prune_eps) {
            return Err(Error::Config("prune_eps must lie in [0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct InferStats {
    /// Candidate scorings, counted per dictionary predicate per grounding.
    pub scorings: u64,
    /// Body groundings that passed constant matching.
    pub groundings: u64,
    pub appended: usize,
    pub improved: usize,
}

/// Best derivation seen for a requested loss key, across all steps.
#[derive(Debug, Clone, Copy, Default)]
pub struct DerivedBest {
    pub found: bool,
    pub val: f64,
    pub node: Option<NodeId>,
}

pub struct TraceSink<'a> {
    pub symbols: &'a SymbolTable,
    pub lines: &'a mut Vec<String>,
}

pub struct InferOutcome {
    pub store: FactStore,
    pub stats: InferStats,
    /// Parallel to the loss_keys passed to infer.
    pub derived: Vec<DerivedBest>,
}

#[derive(Debug, Clone, Copy)]
struct Origin {
    rule: u32,
    cand: u32,
    facts: [u32; 3],
    nb: u8,
}

impl Default for Origin {
    fn default() -> Self {
        Origin { rule: 0, cand: 0, facts: [0; 3], nb: 0 }
    }
}

pub struct Engine<'a> {
    pub cfg: ChainConfig,
    pub dict: &'a Dictionary,
    pub n_consts: usize,
}

struct StepIndex {
    unary_all: Vec<u32>,
    binary_all: Vec<u32>,
    by_subj: Vec<Vec<u32>>,
    by_obj: Vec<Vec<u32>>,
}

impl Engine<'_> {
    /// Runs K steps of soft forward chaining from `init`.
    ///
    /// With a tape, every stored fact carries a differentiable node:
    /// `init_nodes` supplies them for the initial facts (e.g. core-valuation
    /// sigmoids), defaulting to constants. `loss_keys` requests tracking of
    /// the best derivation per key, independent of whether it won the merge;
    /// those are what training losses compare against.
    #[allow(clippy::too_many_arguments)]
    pub fn infer(
        &self,
        rules: &[RuleInstance],
        init: &[GroundFact],
        init_nodes: Option<&[NodeId]>,
        params: &ParamStore,
        mut tape: Option<&mut Tape>,
        loss_keys: &[FactKey],
        mut trace: Option<TraceSink>,
    ) -> Result<InferOutcome> {
        self.cfg.validate()?;
        let np = self.dict.len();
        let n = self.n_consts;
        let e_size = np
            .checked_mul(n * n)
            .filter(|&e| e <= 200_000_000)
            .ok_or_else(|| Error::Config("fact universe too large".into()))?;

        let mut store = FactStore::new(np, n);
        for (i, f) in init.iter().enumerate() {
            if f.key.pred as usize >= np || f.key.subj as usize >= n || f.key.obj as usize >= n {
                return Err(Error::Internal("initial fact outside the universe".into()));
            }
            let arity = self.dict.get(f.key.pred as usize).arity;
            let node = match (&mut tape, init_nodes) {
                (Some(_), Some(ns)) => Some(ns[i]),
                (Some(t), None) => Some(t.constant(f.value)),
                (None, _) => None,
            };
            store.push(f.key, arity, f.value, node)?;
        }

        // Slot-predicate cosines are constant within one forward pass.
        let cos_row = |slot: ParamId| -> Vec<f64> {
            (0..np)
                .map(|p| cosine_value(params.values(slot), params.values(self.dict.get(p).param)))
                .collect()
        };
        let cos_head: Vec<Vec<f64>> = rules.iter().map(|r| cos_row(r.head)).collect();
        let cos_body: Vec<Vec<Vec<f64>>> = rules
            .iter()
            .map(|r| r.body.iter().map(|&b| cos_row(b)).collect())
            .collect();
        let mut cos_nodes: HashMap<(ParamId, u32), NodeId> = HashMap::new();

        let unary_preds: Vec<u32> = (0..np as u32)
            .filter(|&p| self.dict.get(p as usize).arity == 1)
            .collect();
        let binary_preds: Vec<u32> = (0..np as u32)
            .filter(|&p| self.dict.get(p as usize).arity == 2)
            .collect();
        let arity_of: Vec<u8> = (0..np).map(|p| self.dict.get(p).arity).collect();

        let mut loss_slot = vec![UNBOUND; e_size];
        for (i, k) in loss_keys.iter().enumerate() {
            loss_slot[store.dense_index(k)] = i as u32;
        }
        let mut derived = vec![DerivedBest::default(); loss_keys.len()];

        let mut best = vec![f64::NEG_INFINITY; e_size];
        let mut origin = vec![Origin::default(); e_size];
        let mut touched: Vec<u32> = Vec::new();
        let mut stats = InferStats::default();
        let mut index = StepIndex {
            unary_all: Vec::new(),
            binary_all: Vec::new(),
            by_subj: vec![Vec::new(); n],
            by_obj: vec![Vec::new(); n],
        };
        let mut probe_bufs: [Vec<u32>; 3] = [Vec::new(), Vec::new(), Vec::new()];

        for step in 1..=self.cfg.k {
            let snapshot = store.len();
            index.unary_all.clear();
            index.binary_all.clear();
            for v in index.by_subj.iter_mut().chain(index.by_obj.iter_mut()) {
                v.clear();
            }
            for f in 0..snapshot {
                if store.arities[f] == 1 {
                    index.unary_all.push(f as u32);
                } else {
                    index.binary_all.push(f as u32);
                    index.by_subj[store.keys[f].subj as usize].push(f as u32);
                    index.by_obj[store.keys[f].obj as usize].push(f as u32);
                }
            }

            touched.clear();
            for (r, rule) in rules.iter().enumerate() {
                let ctx = EnumCtx {
                    r: r as u32,
                    rule,
                    store: &store,
                    index: &index,
                    unary_preds: &unary_preds,
                    binary_preds: &binary_preds,
                    arity_of: &arity_of,
                    cos_head: &cos_head[r],
                    cos_body: &cos_body[r],
                    np,
                    n,
                };
                let mut props = Proposals {
                    best: &mut best,
                    origin: &mut origin,
                    touched: &mut touched,
                    stats: &mut stats,
                };
                enumerate_rule(&ctx, &mut props, 0, [UNBOUND; 4], 1.0, [0; 3], &mut probe_bufs);
            }

            // Merge phase: decide winners per key, build tape nodes for them
            // against snapshot values, then commit.
            struct Pending {
                idx: usize,
                val: f64,
                node: Option<NodeId>,
                rule: u32,
                existing: Option<usize>,
            }
            let mut pending: Vec<Pending> = Vec::new();
            let mut appends_per_rule = vec![0usize; rules.len().max(1)];
            for &ti in &touched {
                let idx = ti as usize;
                let score = best[idx];
                best[idx] = f64::NEG_INFINITY;
                let og = origin[idx];
                let clamped = score.clamp(0.0, 1.0);
                let existing = match store.dense[idx] {
                    UNBOUND => None,
                    i => Some(i as usize),
                };
                let wins_merge = match existing {
                    Some(i) => score > store.vals[i],
                    None => clamped > self.cfg.prune_eps,
                };
                let track_loss = loss_slot[idx] != UNBOUND && {
                    let d = &derived[loss_slot[idx] as usize];
                    !d.found || score > d.val
                };
                if !wins_merge && !track_loss {
                    continue;
                }
                let node = match &mut tape {
                    Some(t) => Some(build_winner_node(
                        t,
                        params,
                        self.dict,
                        rules,
                        &store,
                        &og,
                        &mut cos_nodes,
                    )),
                    None => None,
                };
                // Keep scalar and tape values bit-identical.
                let val = match (&tape, node) {
                    (Some(t), Some(nd)) => t.value(nd),
                    _ => clamped,
                };
                if track_loss {
                    derived[loss_slot[idx] as usize] = DerivedBest { found: true, val, node };
                }
                if wins_merge {
                    if existing.is_none() {
                        let rl = og.rule as usize;
                        appends_per_rule[rl] += 1;
                        if appends_per_rule[rl] > self.cfg.max_new_facts {
                            return Err(Error::Capacity { rule: rl, cap: self.cfg.max_new_facts });
                        }
                    }
                    pending.push(Pending { idx, val, node, rule: og.rule, existing });
                }
            }
            for p in pending {
                if let Some(i) = p.existing {
                    store.vals[i] = p.val;
                    if let Some(nd) = p.node {
                        store.nodes[i] = nd;
                    }
                    stats.improved += 1;
                } else {
                    let key = store.key_of_dense(p.idx);
                    let arity = self.dict.get(key.pred as usize).arity;
                    store.push(key, arity, p.val, p.node)?;
                    stats.appended += 1;
                }
                if let Some(sink) = &mut trace {
                    let key = store.key_of_dense(p.idx);
                    sink.lines.push(format!(
                        "step {}: {} = {:.6} via rule {}",
                        step,
                        key.display(sink.symbols),
                        p.val,
                        p.rule
                    ));
                }
            }
        }

        Ok(InferOutcome { store, stats, derived })
    }
}

/// Builds the tape node of one winning derivation, reading snapshot nodes.
/// Grouped as mul(head_cos, mul(body factors)) so the eager node value equals
/// the scalar score bit for bit.
fn build_winner_node(
    tape: &mut Tape,
    params: &ParamStore,
    dict: &Dictionary,
    rules: &[RuleInstance],
    store: &FactStore,
    og: &Origin,
    cos_nodes: &mut HashMap<(ParamId, u32), NodeId>,
) -> NodeId {
    let rule = &rules[og.rule as usize];
    let mut cos_node = |slot: ParamId, pred: u32, tape: &mut Tape| -> NodeId {
        *cos_nodes
            .entry((slot, pred))
            .or_insert_with(|| tape.cosine(params, slot, dict.get(pred as usize).param))
    };
    let head = cos_node(rule.head, og.cand, tape);
    let mut body_factors = Vec::with_capacity(2 * og.nb as usize);
    for j in 0..og.nb as usize {
        let f = og.facts[j] as usize;
        body_factors.push(cos_node(rule.body[j], store.keys[f].pred, tape));
        body_factors.push(store.nodes[f]);
    }
    let body = tape.mul(&body_factors);
    let raw = tape.mul(&[head, body]);
    tape.clamp01(raw)
}

/// Read-only inputs to one rule's enumeration.
struct EnumCtx<'a> {
    r: u32,
    rule: &'a RuleInstance,
    store: &'a FactStore,
    index: &'a StepIndex,
    unary_preds: &'a [u32],
    binary_preds: &'a [u32],
    arity_of: &'a [u8],
    cos_head: &'a [f64],
    cos_body: &'a [Vec<f64>],
    np: usize,
    n: usize,
}

/// The per-step proposal state shared by all rules.
struct Proposals<'a> {
    best: &'a mut [f64],
    origin: &'a mut [Origin],
    touched: &'a mut Vec<u32>,
    stats: &'a mut InferStats,
}

/// Depth-first enumeration over body atoms; the binding uses UNBOUND as its
/// sentinel. `probe` holds one reusable scratch buffer per depth for dense
/// probes. The running product folds (cos, value) per atom in exactly the
/// order the winner's tape node multiplies, so scalar and tape values agree
/// bit for bit.
fn enumerate_rule(
    ctx: &EnumCtx,
    props: &mut Proposals,
    depth: usize,
    binding: [u32; 4],
    partial: f64,
    facts: [u32; 3],
    probe: &mut [Vec<u32>],
) {
    let nb = ctx.rule.cbody.len();
    if depth == nb {
        props.stats.groundings += 1;
        props.stats.scorings += ctx.np as u64;
        let hs = ctx.rule.chead.resolved(0, &binding);
        let ho = if ctx.rule.chead.nargs == 2 {
            ctx.rule.chead.resolved(1, &binding)
        } else {
            hs
        };
        for p in 0..ctx.np {
            let score = ctx.cos_head[p] * partial;
            if score <= 0.0 {
                continue;
            }
            // Unary candidates exist only on the diagonal; a mismatched
            // grounding cannot form a well-formed unary fact.
            let (s, o) = if ctx.arity_of[p] == 1 {
                if hs != ho {
                    continue;
                }
                (hs, hs)
            } else {
                (hs, ho)
            };
            let idx = (p * ctx.n + s as usize) * ctx.n + o as usize;
            if props.best[idx] == f64::NEG_INFINITY {
                props.touched.push(idx as u32);
            } else if score <= props.best[idx] {
                continue;
            }
            props.best[idx] = score;
            props.origin[idx] =
                Origin { rule: ctx.r, cand: p as u32, facts, nb: nb as u8 };
        }
        return;
    }

    let atom = &ctx.rule.cbody[depth];
    let (buf, rest) = probe.split_first_mut().unwrap();
    let candidates: &[u32] = if atom.nargs == 1 {
        let c = atom.resolved(0, &binding);
        if c == UNBOUND {
            &ctx.index.unary_all
        } else {
            buf.clear();
            for &p in ctx.unary_preds {
                let di = (p as usize * ctx.n + c as usize) * ctx.n + c as usize;
                if ctx.store.dense[di] != UNBOUND {
                    buf.push(ctx.store.dense[di]);
                }
            }
            buf
        }
    } else {
        let s = atom.resolved(0, &binding);
        let o = atom.resolved(1, &binding);
        match (s == UNBOUND, o == UNBOUND) {
            (false, false) => {
                buf.clear();
                for &p in ctx.binary_preds {
                    let di = (p as usize * ctx.n + s as usize) * ctx.n + o as usize;
                    if ctx.store.dense[di] != UNBOUND {
                        buf.push(ctx.store.dense[di]);
                    }
                }
                buf
            }
            (false, true) => &ctx.index.by_subj[s as usize],
            (true, false) => &ctx.index.by_obj[o as usize],
            (true, true) => &ctx.index.binary_all,
        }
    };

    let cos = &ctx.cos_body[depth];
    for &f in candidates {
        let key = ctx.store.keys[f as usize];
        let mut b = binding;
        if !atom.unify(key.subj, key.obj, &mut b) {
            continue;
        }
        let next = partial * cos[key.pred as usize] * ctx.store.vals[f as usize];
        if next == 0.0 {
            continue;
        }
        let mut fs = facts;
        fs[depth] = f;
        enumerate_rule(ctx, props, depth + 1, b, next, fs, rest);
    }
}
