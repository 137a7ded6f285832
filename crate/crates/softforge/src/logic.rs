//! Ground facts, rule templates, and the text formats they are read from.
//!
//! Constants and predicates are interned to dense u32 ids. Unary facts are
//! stored with the object repeated (`p(c)` becomes `(p, c, c)`), so every
//! fact is a `(pred, subj, obj)` triple and store keys stay uniform.

use crate::{Error, Result};
use std::collections::HashMap;
use std::fmt;

pub type ConstId = u32;
pub type PredId = u32;

/// A predicate in the dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateRef {
    pub name: String,
    pub id: PredId,
    pub arity: u8,
    /// Fixed predicates keep their one-hot embedding; trainable ones move.
    pub fixed: bool,
}

/// Interning table for constants and predicates.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    consts: Vec<String>,
    const_ids: HashMap<String, ConstId>,
    preds: Vec<PredicateRef>,
    pred_ids: HashMap<String, PredId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern_const(&mut self, name: &str) -> ConstId {
        if let Some(&id) = self.const_ids.get(name) {
            return id;
        }
        let id = self.consts.len() as ConstId;
        self.consts.push(name.to_string());
        self.const_ids.insert(name.to_string(), id);
        id
    }

    /// Interns a predicate, erroring if it was seen before with another arity.
    pub fn intern_pred(&mut self, name: &str, arity: u8) -> Result<PredId> {
        debug_assert!(arity == 1 || arity == 2);
        if let Some(&id) = self.pred_ids.get(name) {
            let known = self.preds[id as usize].arity;
            if known != arity {
                return Err(Error::DatasetInvalid(format!(
                    "predicate '{}' used with arity {} after arity {}",
                    name, arity, known
                )));
            }
            return Ok(id);
        }
        let id = self.preds.len() as PredId;
        self.preds.push(PredicateRef {
            name: name.to_string(),
            id,
            arity,
            fixed: true,
        });
        self.pred_ids.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn lookup_pred(&self, name: &str) -> Option<PredId> {
        self.pred_ids.get(name).copied()
    }

    pub fn lookup_const(&self, name: &str) -> Option<ConstId> {
        self.const_ids.get(name).copied()
    }

    pub fn const_name(&self, id: ConstId) -> &str {
        &self.consts[id as usize]
    }

    pub fn pred(&self, id: PredId) -> &PredicateRef {
        &self.preds[id as usize]
    }

    pub fn pred_name(&self, id: PredId) -> &str {
        &self.preds[id as usize].name
    }

    pub fn pred_arity(&self, id: PredId) -> u8 {
        self.preds[id as usize].arity
    }

    pub fn preds(&self) -> &[PredicateRef] {
        &self.preds
    }

    pub fn num_consts(&self) -> usize {
        self.consts.len()
    }

    pub fn num_preds(&self) -> usize {
        self.preds.len()
    }

    pub fn set_fixed(&mut self, id: PredId, fixed: bool) {
        self.preds[id as usize].fixed = fixed;
    }
}

/// Key identifying a ground fact inside a store: unary facts use obj == subj.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactKey {
    pub pred: PredId,
    pub subj: ConstId,
    pub obj: ConstId,
}

impl FactKey {
    pub fn new(pred: PredId, subj: ConstId, obj: ConstId) -> Self {
        FactKey { pred, subj, obj }
    }

    pub fn unary(pred: PredId, subj: ConstId) -> Self {
        FactKey { pred, subj, obj: subj }
    }

    pub fn display<'a>(&self, symbols: &'a SymbolTable) -> String {
        let p = symbols.pred(self.pred);
        if p.arity == 1 {
            format!("{}({})", p.name, symbols.const_name(self.subj))
        } else {
            format!(
                "{}({},{})",
                p.name,
                symbols.const_name(self.subj),
                symbols.const_name(self.obj)
            )
        }
    }
}

/// A ground fact with its soft truth value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundFact {
    pub key: FactKey,
    pub value: f64,
}

impl GroundFact {
    pub fn new(key: FactKey, value: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&value));
        GroundFact { key, value }
    }
}

/// Rule variables. Four symbols cover every template shape in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
    W,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::Z, Var::W];

    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::Z => 2,
            Var::W => 3,
        }
    }

    fn parse(s: &str) -> Option<Var> {
        match s {
            "X" => Some(Var::X),
            "Y" => Some(Var::Y),
            "Z" => Some(Var::Z),
            "W" => Some(Var::W),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Var::X => 'X',
            Var::Y => 'Y',
            Var::Z => 'Z',
            Var::W => 'W',
        };
        write!(f, "{}", c)
    }
}

/// An atom argument: a variable or a constant name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Var(Var),
    Const(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => write!(f, "{}", v),
            Arg::Const(c) => write!(f, "{}", c),
        }
    }
}

/// What occupies an atom's predicate position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotSpec {
    /// `F`: a fresh trainable embedding for this occurrence.
    Free,
    /// `#k`: a trainable embedding shared by every `#k` slot of the task.
    Tie(u32),
    /// A concrete predicate name; unifies as that predicate's own embedding.
    Named(String),
}

/// One atom of a rule template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub slot: SlotSpec,
    pub args: Vec<Arg>,
}

impl Atom {
    pub fn arity(&self) -> u8 {
        self.args.len() as u8
    }

    /// Variables appearing in this atom, in argument order.
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(|a| match a {
            Arg::Var(v) => Some(*v),
            Arg::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.slot {
            SlotSpec::Free => write!(f, "F(")?,
            SlotSpec::Tie(k) => write!(f, "#{}(", k)?,
            SlotSpec::Named(n) => write!(f, "{}(", n)?,
        }
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, ")")
    }
}

/// A rule template: head and one to three body atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Template {
    /// Checks the structural invariants: body length 1..=3, arities in
    /// {1, 2}, and range restriction (head variables appear in the body).
    pub fn validate(&self) -> Result<()> {
        if self.body.is_empty() || self.body.len() > 3 {
            return Err(Error::Template(format!(
                "rule '{}' has {} body atoms; 1 to 3 are supported",
                self, self.body.len()
            )));
        }
        for atom in std::iter::once(&self.head).chain(self.body.iter()) {
            if atom.args.is_empty() || atom.args.len() > 2 {
                return Err(Error::Template(format!(
                    "atom '{}' must have one or two arguments",
                    atom
                )));
            }
        }
        let mut body_vars = Vec::new();
        for atom in &self.body {
            body_vars.extend(atom.vars());
        }
        for v in self.head.vars() {
            if !body_vars.contains(&v) {
                return Err(Error::Template(format!(
                    "head variable {} of '{}' does not occur in the body",
                    v, self
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- ", self.head)?;
        for (i, atom) in self.body.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", atom)?;
        }
        Ok(())
    }
}

/// Variable binding produced by matching a rule body against ground facts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Binding {
    slots: [Option<ConstId>; 4],
}

impl Binding {
    pub fn get(&self, v: Var) -> Option<ConstId> {
        self.slots[v.index()]
    }

    pub fn set(&mut self, v: Var, c: ConstId) -> bool {
        match self.slots[v.index()] {
            None => {
                self.slots[v.index()] = Some(c);
                true
            }
            Some(existing) => existing == c,
        }
    }
}

/// Matches an ordered fact tuple against a template body, unifying constants
/// only (predicate slots are soft and do not constrain the match). Returns
/// the variable binding, or None on any conflict or arity mismatch.
pub fn match_constants(
    template: &Template,
    facts: &[(FactKey, u8)],
    symbols: &SymbolTable,
) -> Option<Binding> {
    if facts.len() != template.body.len() {
        return None;
    }
    let mut binding = Binding::default();
    for (atom, &(key, arity)) in template.body.iter().zip(facts.iter()) {
        if atom.arity() != arity {
            return None;
        }
        let positions: [ConstId; 2] = [key.subj, key.obj];
        for (arg, &c) in atom.args.iter().zip(positions.iter()) {
            match arg {
                Arg::Var(v) => {
                    if !binding.set(*v, c) {
                        return None;
                    }
                }
                Arg::Const(name) => {
                    if symbols.lookup_const(name) != Some(c) {
                        return None;
                    }
                }
            }
        }
        // A one-argument atom only matches facts in unary form (obj == subj).
        if atom.args.len() == 1 && key.subj != key.obj {
            return None;
        }
    }
    Some(binding)
}

/// Grounds a template head under a binding: (subj, obj), with unary heads
/// repeating the subject. Errors if a head variable is unbound, which the
/// range-restriction invariant rules out for validated templates.
pub fn ground_head(
    template: &Template,
    binding: &Binding,
    symbols: &SymbolTable,
) -> Result<(ConstId, ConstId)> {
    let mut out = [0 as ConstId; 2];
    for (i, arg) in template.head.args.iter().enumerate() {
        out[i] = match arg {
            Arg::Var(v) => binding.get(*v).ok_or_else(|| {
                Error::Internal(format!(
                    "head variable {} unbound grounding '{}'",
                    v, template
                ))
            })?,
            Arg::Const(name) => symbols.lookup_const(name).ok_or_else(|| {
                Error::Internal(format!("unknown constant '{}' in head", name))
            })?,
        };
    }
    if template.head.args.len() == 1 {
        out[1] = out[0];
    }
    Ok((out[0], out[1]))
}

// ---------------------------------------------------------------------------
// Parsing. Fact files hold one `pred(c)` or `pred(c1,c2)` per line; template
// files one rule per line. `%` starts a comment, blank lines are skipped.
// ---------------------------------------------------------------------------

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parses `pred(a)` or `pred(a,b)` into a fact with value 1.0.
fn parse_fact(text: &str, line: usize, symbols: &mut SymbolTable) -> Result<GroundFact> {
    let err = |msg: String| Error::Parse { line, msg };
    let open = text.find('(').ok_or_else(|| err(format!("expected '(' in '{}'", text)))?;
    if !text.ends_with(')') {
        return Err(err(format!("expected ')' at end of '{}'", text)));
    }
    let pred = text[..open].trim();
    if !is_ident(pred) {
        return Err(err(format!("bad predicate name '{}'", pred)));
    }
    let inner = &text[open + 1..text.len() - 1];
    let args: Vec<&str> = inner.split(',').map(str::trim).collect();
    if args.is_empty() || args.len() > 2 || args.iter().any(|a| !is_ident(a)) {
        return Err(err(format!("bad argument list '({})'", inner)));
    }
    let pred_id = symbols
        .intern_pred(pred, args.len() as u8)
        .map_err(|e| err(e.to_string()))?;
    let subj = symbols.intern_const(args[0]);
    let obj = if args.len() == 2 {
        symbols.intern_const(args[1])
    } else {
        subj
    };
    Ok(GroundFact::new(FactKey::new(pred_id, subj, obj), 1.0))
}

/// Parses a fact file into facts with value 1.0, interning symbols.
pub fn parse_facts(text: &str, symbols: &mut SymbolTable) -> Result<Vec<GroundFact>> {
    let mut facts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        facts.push(parse_fact(line, i + 1, symbols)?);
    }
    Ok(facts)
}

fn parse_atom(text: &str, line: usize) -> Result<Atom> {
    let err = |msg: String| Error::Parse { line, msg };
    let open = text.find('(').ok_or_else(|| err(format!("expected '(' in atom '{}'", text)))?;
    if !text.ends_with(')') {
        return Err(err(format!("expected ')' at end of atom '{}'", text)));
    }
    let head = text[..open].trim();
    let slot = if head == "F" {
        SlotSpec::Free
    } else if let Some(num) = head.strip_prefix('#') {
        let k: u32 = num
            .parse()
            .map_err(|_| err(format!("bad tie marker '{}'", head)))?;
        SlotSpec::Tie(k)
    } else if is_ident(head) && !head.is_empty() {
        SlotSpec::Named(head.to_string())
    } else {
        return Err(err(format!("bad predicate slot '{}'", head)));
    };
    let inner = &text[open + 1..text.len() - 1];
    let mut args = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if let Some(v) = Var::parse(part) {
            args.push(Arg::Var(v));
        } else if is_ident(part) {
            args.push(Arg::Const(part.to_string()));
        } else {
            return Err(err(format!("bad atom argument '{}'", part)));
        }
    }
    if args.is_empty() || args.len() > 2 {
        return Err(err(format!("atom '{}' must have one or two arguments", text)));
    }
    Ok(Atom { slot, args })
}

/// Splits a rule body on commas that sit outside parentheses.
fn split_atoms(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

/// Parses one rule line, e.g. `F(X,Y) <- F(X,Z), F(Z,Y)`.
pub fn parse_template_line(text: &str, line: usize) -> Result<Template> {
    let err = |msg: String| Error::Parse { line, msg };
    let (head_text, body_text) = text
        .split_once("<-")
        .ok_or_else(|| err("rule must contain '<-'".to_string()))?;
    let head = parse_atom(head_text.trim(), line)?;
    let mut body = Vec::new();
    for part in split_atoms(body_text) {
        let part = part.trim();
        if part.is_empty() {
            return Err(err("empty body atom".to_string()));
        }
        body.push(parse_atom(part, line)?);
    }
    let template = Template { head, body };
    template.validate()?;
    Ok(template)
}

/// Parses a template file, one rule per line.
pub fn parse_templates(text: &str) -> Result<Vec<Template>> {
    let mut templates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        templates.push(parse_template_line(line, i + 1)?);
    }
    if templates.is_empty() {
        return Err(Error::Template("no rules found".to_string()));
    }
    Ok(templates)
}

/// A learning problem: background facts plus labelled targets (rule
/// induction) or observations (theory compression).
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub symbols: SymbolTable,
    pub background: Vec<GroundFact>,
    pub positive: Vec<FactKey>,
    pub negative: Vec<FactKey>,
    pub observed: Vec<FactKey>,
}

impl Dataset {
    /// Positives and negatives must not overlap.
    pub fn validate(&self) -> Result<()> {
        let pos: std::collections::HashSet<_> = self.positive.iter().collect();
        for n in &self.negative {
            if pos.contains(n) {
                return Err(Error::DatasetInvalid(format!(
                    "fact {} is labelled both positive and negative",
                    n.display(&self.symbols)
                )));
            }
        }
        Ok(())
    }

    /// Names of every predicate in first-interned order.
    pub fn pred_names(&self) -> Vec<String> {
        self.symbols.preds().iter().map(|p| p.name.clone()).collect()
    }
}

/// Parses a sectioned dataset file with `[background]`, `[positive]`,
/// `[negative]` and `[observed]` headings.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        Background,
        Positive,
        Negative,
        Observed,
    }
    let mut ds = Dataset::default();
    let mut section = Section::None;
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[background]" => Section::Background,
                "[positive]" => Section::Positive,
                "[negative]" => Section::Negative,
                "[observed]" => Section::Observed,
                other => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("unknown section '{}'", other),
                    })
                }
            };
            continue;
        }
        let fact = parse_fact(line, i + 1, &mut ds.symbols)?;
        match section {
            Section::Background => ds.background.push(fact),
            Section::Positive => ds.positive.push(fact.key),
            Section::Negative => ds.negative.push(fact.key),
            Section::Observed => ds.observed.push(fact.key),
            Section::None => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "fact before any section heading".to_string(),
                })
            }
        }
    }
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_facts_repeat_subject() {
        let mut sym = SymbolTable::new();
        let f = parse_fact("zero(0)", 1, &mut sym).unwrap();
        assert_eq!(f.key.subj, f.key.obj);
        assert_eq!(sym.pred_arity(f.key.pred), 1);
    }

    #[test]
    fn binary_fact_parses() {
        let mut sym = SymbolTable::new();
        let f = parse_fact("succ(0,1)", 1, &mut sym).unwrap();
        assert_eq!(sym.pred_name(f.key.pred), "succ");
        assert_ne!(f.key.subj, f.key.obj);
        assert_eq!(f.value, 1.0);
    }

    #[test]
    fn arity_conflict_is_an_error() {
        let mut sym = SymbolTable::new();
        parse_fact("p(a)", 1, &mut sym).unwrap();
        let err = parse_fact("p(a,b)", 2, &mut sym).unwrap_err();
        assert!(err.to_string().contains("arity"));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let mut sym = SymbolTable::new();
        let facts = parse_facts("% header\n\nsucc(0,1) % trailing\n", &mut sym).unwrap();
        assert_eq!(facts.len(), 1);
    }

    #[test]
    fn malformed_fact_reports_line() {
        let mut sym = SymbolTable::new();
        let err = parse_facts("succ(0,1)\nnonsense here\n", &mut sym).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{}", err);
    }

    #[test]
    fn template_round_trips_through_display() {
        let texts = [
            "F(X,Y) <- F(X,Z), F(Z,Y)",
            "F(X) <- F(Z), F(Z,X)",
            "#1(X,Y) <- #2(X,Z), #2(Z,Y)",
            "F(X,X) <- F(X,Z), F(X,Z)",
            "is(X,Y) <- is(X,Z), is(Z,Y)",
            "F(X,Y) <- F(X,Z), F(Z,W), F(W,Y)",
        ];
        for t in texts {
            let parsed = parse_template_line(t, 1).unwrap();
            let printed = parsed.to_string();
            let reparsed = parse_template_line(&printed, 1).unwrap();
            assert_eq!(parsed, reparsed, "{}", t);
        }
    }

    #[test]
    fn unbound_head_variable_is_rejected() {
        let err = parse_template_line("F(X,Y) <- F(X,Z)", 1).unwrap_err();
        assert!(err.to_string().contains("Y"), "{}", err);
    }

    #[test]
    fn four_body_atoms_are_rejected() {
        let err = parse_template_line("F(X,Y) <- F(X,Z), F(Z,W), F(W,Y), F(X,X)", 1);
        assert!(err.is_err());
    }

    #[test]
    fn match_constants_chain() {
        let mut sym = SymbolTable::new();
        let f1 = parse_fact("succ(0,1)", 1, &mut sym).unwrap();
        let f2 = parse_fact("succ(1,2)", 1, &mut sym).unwrap();
        let t = parse_template_line("F(X,Y) <- F(X,Z), F(Z,Y)", 1).unwrap();
        let b = match_constants(&t, &[(f1.key, 2), (f2.key, 2)], &sym).unwrap();
        assert_eq!(b.get(Var::X), Some(f1.key.subj));
        assert_eq!(b.get(Var::Y), Some(f2.key.obj));
        // Reversed tuple cannot chain.
        assert!(match_constants(&t, &[(f2.key, 2), (f1.key, 2)], &sym).is_none());
        let (s, o) = ground_head(&t, &b, &sym).unwrap();
        assert_eq!((s, o), (f1.key.subj, f2.key.obj));
    }

    #[test]
    fn match_constants_rejects_arity_mismatch() {
        let mut sym = SymbolTable::new();
        let f = parse_fact("succ(0,1)", 1, &mut sym).unwrap();
        let t = parse_template_line("F(X) <- F(X)", 1).unwrap();
        assert!(match_constants(&t, &[(f.key, 2)], &sym).is_none());
    }

    #[test]
    fn repeated_variable_must_agree() {
        let mut sym = SymbolTable::new();
        let loop_fact = parse_fact("edge(a,a)", 1, &mut sym).unwrap();
        let plain = parse_fact("edge(a,b)", 2, &mut sym).unwrap();
        let t = parse_template_line("F(X) <- F(X,X)", 1).unwrap();
        assert!(match_constants(&t, &[(loop_fact.key, 2)], &sym).is_some());
        assert!(match_constants(&t, &[(plain.key, 2)], &sym).is_none());
    }

    #[test]
    fn unary_head_grounds_diagonally() {
        let mut sym = SymbolTable::new();
        let f = parse_fact("edge(a,b)", 1, &mut sym).unwrap();
        let t = parse_template_line("F(X) <- F(X,Y)", 1).unwrap();
        let b = match_constants(&t, &[(f.key, 2)], &sym).unwrap();
        let (s, o) = ground_head(&t, &b, &sym).unwrap();
        assert_eq!(s, o);
        assert_eq!(s, f.key.subj);
    }

    #[test]
    fn dataset_sections_parse() {
        let text = "\
[background]
zero(0)
succ(0,1)
[positive]
target(1,0)
[negative]
target(0,1)
";
        let ds = parse_dataset(text).unwrap();
        assert_eq!(ds.background.len(), 2);
        assert_eq!(ds.positive.len(), 1);
        assert_eq!(ds.negative.len(), 1);
        assert!(ds.observed.is_empty());
    }

    #[test]
    fn overlapping_labels_are_rejected() {
        let text = "[positive]\np(a)\n[negative]\np(a)\n";
        assert!(parse_dataset(text).is_err());
    }
}
