//! Training loops: rule induction over labelled targets, theory compression
//! over observed facts, and link prediction over knowledge graph splits.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{instantiate_rules, ChainConfig, Dictionary, Engine, InferOutcome, RuleInstance};
use crate::decode::{auc_pr, decode_rules, mse_and_success, theory_accuracy, DecodedRule};
use crate::diff::{OptKind, Optimizer, ParamId, ParamStore, Tape};
use crate::logic::{FactKey, GroundFact, SymbolTable};
use crate::tasks::{sample_background, KgSplit, Mode, Regime, TaskSpec};
use crate::{Error, Result};

/// Every knob of a run. The config file and the CLI both address these by
/// field name; zero means "pick a sensible value" for `k`, `d` and
/// `init_mean`.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub optimizer: String,
    /// Core penalty weight for theory compression.
    pub lambda: f64,
    /// Penalize the squared sum of core valuations instead of the sum.
    pub penalty_squared: bool,
    pub noise: bool,
    pub noise_sigma0: f64,
    pub noise_decay: f64,
    pub restarts: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Chaining depth; 0 defers to the task.
    pub k: usize,
    /// Embedding dimension; 0 means the dictionary size.
    pub d: usize,
    /// Invented predicates to add to a custom dataset (all binary).
    pub aux_count: usize,
    pub prune_eps: f64,
    pub max_new_facts: usize,
    pub train_dictionary: bool,
    /// Mean of the embedding initializer.
    pub init_mean: f64,
    /// Fraction of the background kept per epoch in graph training.
    pub sample_fraction: f64,
    /// Fraction of labelled targets entering each epoch's gradient; 1 keeps
    /// the loss full-batch.
    pub batch_fraction: f64,
    pub success_mse: f64,
    pub success_acc: f64,
    pub success_auc: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 400,
            lr: 0.05,
            optimizer: "adam".into(),
            lambda: 0.0,
            penalty_squared: false,
            noise: false,
            noise_sigma0: 0.1,
            noise_decay: 0.98,
            restarts: 10,
            seed: 0,
            jobs: 1,
            k: 0,
            d: 0,
            aux_count: 0,
            prune_eps: 0.0,
            max_new_facts: 1_000_000,
            train_dictionary: false,
            init_mean: 0.0,
            sample_fraction: 1.0,
            batch_fraction: 1.0,
            success_mse: 1e-4,
            success_acc: 0.95,
            success_auc: 0.95,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::Config(msg))
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive and finite, got {}", self.lr));
        }
        self.optimizer.parse::<OptKind>()?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.noise_sigma0 >= 0.0 && self.noise_sigma0.is_finite()) {
            return bad(format!("noise_sigma0 must be nonnegative, got {}", self.noise_sigma0));
        }
        if !(self.noise_decay > 0.0 && self.noise_decay <= 1.0) {
            return bad(format!("noise_decay must lie in (0,1], got {}", self.noise_decay));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.prune_eps) {
            return bad(format!("prune_eps must lie in [0,1), got {}", self.prune_eps));
        }
        if !(self.init_mean >= 0.0 && self.init_mean.is_finite()) {
            return bad(format!("init_mean must be nonnegative, got {}", self.init_mean));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return bad(format!("sample_fraction must lie in (0,1], got {}", self.sample_fraction));
        }
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return bad(format!("batch_fraction must lie in (0,1], got {}", self.batch_fraction));
        }
        if !(self.success_mse > 0.0) {
            return bad(format!("success_mse must be positive, got {}", self.success_mse));
        }
        if !(self.success_acc > 0.0 && self.success_acc <= 1.0) {
            return bad(format!("success_acc must lie in (0,1], got {}", self.success_acc));
        }
        if !(self.success_auc > 0.0 && self.success_auc <= 1.0) {
            return bad(format!("success_auc must lie in (0,1], got {}", self.success_auc));
        }
        Ok(())
    }

    /// Applies a task's recommended settings. File and CLI overrides are
    /// layered on top afterwards, so they win.
    pub fn for_task(mut self, task: &TaskSpec) -> Self {
        self.epochs = task.overrides.epochs;
        self.lr = task.overrides.lr;
        self.lambda = task.overrides.lambda;
        self.noise = task.overrides.noise;
        self.restarts = task.overrides.restarts;
        self.k = task.k;
        self.aux_count = task.aux_count();
        if matches!(task.mode, Mode::Theory) {
            self.prune_eps = 1e-3;
        }
        self
    }

    /// Sets one field from its textual name and value. This is the single
    /// parser behind both the config file and the CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse::<T>().map_err(|_| {
                Error::Config(format!("bad value '{}' for key '{}'", value.trim(), key))
            })
        }
        match key {
            "epochs" => self.epochs = field(key, value)?,
            "lr" => self.lr = field(key, value)?,
            "optimizer" => self.optimizer = value.trim().to_string(),
            "lambda" => self.lambda = field(key, value)?,
            "penalty_squared" => self.penalty_squared = field(key, value)?,
            "noise" => self.noise = field(key, value)?,
            "noise_sigma0" => self.noise_sigma0 = field(key, value)?,
            "noise_decay" => self.noise_decay = field(key, value)?,
            "restarts" => self.restarts = field(key, value)?,
            "seed" => self.seed = field(key, value)?,
            "jobs" => self.jobs = field(key, value)?,
            "k" => self.k = field(key, value)?,
            "d" => self.d = field(key, value)?,
            "aux_count" => self.aux_count = field(key, value)?,
            "prune_eps" => self.prune_eps = field(key, value)?,
            "max_new_facts" => self.max_new_facts = field(key, value)?,
            "train_dictionary" => self.train_dictionary = field(key, value)?,
            "init_mean" => self.init_mean = field(key, value)?,
            "sample_fraction" => self.sample_fraction = field(key, value)?,
            "batch_fraction" => self.batch_fraction = field(key, value)?,
            "success_mse" => self.success_mse = field(key, value)?,
            "success_acc" => self.success_acc = field(key, value)?,
            "success_auc" => self.success_auc = field(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown config key '{}'", other)));
            }
        }
        Ok(())
    }
}

/// Trainable valuations for the full fact universe of a theory task:
/// one logit per candidate core fact, valuation sigmoid(logit).
#[derive(Debug, Clone)]
pub struct CoreStore {
    pub keys: Vec<FactKey>,
    pub param: ParamId,
}

impl CoreStore {
    /// One logit per (pred, subj, obj) triple, unary predicates on the
    /// diagonal only. Logits start at zero, valuation one half.
    pub fn build(symbols: &SymbolTable, params: &mut ParamStore) -> CoreStore {
        let n = symbols.num_consts() as u32;
        let mut keys = Vec::new();
        for (p, pred) in symbols.preds().iter().enumerate() {
            let p = p as u32;
            for s in 0..n {
                if pred.arity == 1 {
                    keys.push(FactKey::new(p, s, s));
                } else {
                    for o in 0..n {
                        keys.push(FactKey::new(p, s, o));
                    }
                }
            }
        }
        let param = params.add("core.logits", vec![0.0; keys.len()], true, false);
        CoreStore { keys, param }
    }

    /// Current valuations as plain facts, for value-mode inference.
    pub fn facts(&self, params: &ParamStore) -> Vec<GroundFact> {
        let logits = params.values(self.param);
        self.keys
            .iter()
            .zip(logits)
            .map(|(&key, &l)| GroundFact::new(key, 1.0 / (1.0 + (-l).exp())))
            .collect()
    }

    /// Facts whose logit is positive, i.e. valuation above one half.
    pub fn induced(&self, params: &ParamStore) -> Vec<FactKey> {
        let logits = params.values(self.param);
        self.keys
            .iter()
            .zip(logits)
            .filter(|(_, &l)| l > 0.0)
            .map(|(&key, _)| key)
            .collect()
    }
}

/// Everything needed to run inference with the learned parameters.
pub struct TrainedModel {
    pub symbols: SymbolTable,
    pub dict: Dictionary,
    pub rules: Vec<RuleInstance>,
    pub params: ParamStore,
    pub core: Option<CoreStore>,
    pub chain: ChainConfig,
}

impl TrainedModel {
    /// Value-mode inference from the given initial facts, tracking the
    /// requested keys.
    pub fn infer_values(&self, init: &[GroundFact], loss_keys: &[FactKey]) -> Result<InferOutcome> {
        let engine = Engine {
            cfg: self.chain,
            dict: &self.dict,
            n_consts: self.symbols.num_consts(),
        };
        engine.infer(&self.rules, init, None, &self.params, None, loss_keys, None)
    }

    pub fn decoded(&self) -> Result<Vec<DecodedRule>> {
        decode_rules(&self.rules, &self.dict, &self.params)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportedRule {
    pub confidence: f64,
    pub rule: String,
}

/// Result of one seed's run, serialized as one report line. Wall time is
/// kept out of the serialized form so reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub task: String,
    pub seed: u64,
    pub mode: String,
    pub epochs_run: usize,
    pub first_loss: f64,
    pub final_loss: f64,
    pub mse: Option<f64>,
    pub auc_pr: Option<f64>,
    pub accuracy: Option<f64>,
    pub induced: Option<usize>,
    pub success: bool,
    pub rules: Vec<ReportedRule>,
    #[serde(skip)]
    pub wall_secs: f64,
}

fn reported(decoded: &[DecodedRule]) -> Vec<ReportedRule> {
    decoded
        .iter()
        .map(|d| ReportedRule { confidence: d.confidence, rule: d.rule.to_string() })
        .collect()
}

/// Shared setup: dictionary over the dataset's predicates plus instantiated
/// rule slots, all seeded from `seed`.
struct Setup {
    symbols: SymbolTable,
    dict: Dictionary,
    rules: Vec<RuleInstance>,
    params: ParamStore,
    chain: ChainConfig,
    rng: ChaCha8Rng,
    opt: Optimizer,
}

fn setup(
    symbols: &SymbolTable,
    templates: &[crate::logic::Template],
    cfg: &TrainConfig,
    default_k: usize,
    seed: u64,
) -> Result<Setup> {
    cfg.validate()?;
    let mut symbols = symbols.clone();
    let np = symbols.num_preds();
    let d = if cfg.d > 0 { cfg.d } else { np };
    let init_mean = cfg.init_mean;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParamStore::new();
    let dict = Dictionary::build(&symbols, d, cfg.train_dictionary, init_mean, &mut params, &mut rng)?;
    let rules = instantiate_rules(templates, &dict, &mut symbols, init_mean, &mut params, &mut rng)?;
    let k = if cfg.k > 0 { cfg.k } else { default_k };
    let chain = ChainConfig { k, prune_eps: cfg.prune_eps, max_new_facts: cfg.max_new_facts };
    chain.validate()?;
    let opt = Optimizer::new(cfg.optimizer.parse()?, cfg.lr);
    Ok(Setup { symbols, dict, rules, params, chain, rng, opt })
}

fn check_targets(keys: &[FactKey], dict: &Dictionary, what: &str) -> Result<()> {
    for key in keys {
        if key.pred as usize >= dict.len() {
            return Err(Error::Config(format!(
                "{} fact uses a predicate outside the dictionary",
                what
            )));
        }
    }
    Ok(())
}

fn values_of(loss_keys: &[FactKey], outcome: &InferOutcome) -> HashMap<FactKey, f64> {
    let mut values = HashMap::new();
    for (key, db) in loss_keys.iter().zip(&outcome.derived) {
        if db.found {
            values.insert(*key, db.val);
        }
    }
    values
}

/// Learns rules for labelled targets. Success means the mean squared error
/// over positives and negatives fell below `success_mse`; training stops
/// early once it does.
pub fn train_ilp(task: &TaskSpec, cfg: &TrainConfig, seed: u64) -> Result<(RunReport, TrainedModel)> {
    let start = Instant::now();
    let data = &task.dataset;
    if data.positive.is_empty() && data.negative.is_empty() {
        return Err(Error::Argument(format!(
            "task '{}' has no labelled facts to fit",
            task.name
        )));
    }
    let mut s = setup(&data.symbols, &task.templates, cfg, task.k, seed)?;
    let mut loss_keys = data.positive.clone();
    loss_keys.extend(data.negative.iter().copied());
    check_targets(&loss_keys, &s.dict, "labelled")?;
    let n_pos = data.positive.len();
    let engine = Engine { cfg: s.chain, dict: &s.dict, n_consts: s.symbols.num_consts() };

    let mut first_loss = f64::NAN;
    let mut final_loss = f64::NAN;
    let mut epochs_run = 0;
    for epoch in 0..cfg.epochs {
        if cfg.noise {
            let sigma = cfg.noise_sigma0 * cfg.noise_decay.powi(epoch as i32);
            s.params.add_noise(sigma, &mut s.rng);
        }
        let mut tape = Tape::new();
        let outcome = engine.infer(
            &s.rules,
            &data.background,
            None,
            &s.params,
            Some(&mut tape),
            &loss_keys,
            None,
        )?;
        let mut terms = Vec::with_capacity(loss_keys.len());
        for (i, db) in outcome.derived.iter().enumerate() {
            let pred = db.node.unwrap_or_else(|| tape.constant(0.0));
            let target = if i < n_pos { 1.0 } else { 0.0 };
            terms.push(tape.bce(pred, target)?);
        }
        let total = tape.sum(&terms);
        let loss = tape.scale(total, 1.0 / terms.len() as f64);
        let lv = tape.value(loss);
        if !lv.is_finite() {
            return Err(Error::Numeric { seed, epoch, msg: format!("loss became {}", lv) });
        }
        if epoch == 0 {
            first_loss = lv;
        }
        final_loss = lv;
        epochs_run = epoch + 1;
        let values = values_of(&loss_keys, &outcome);
        let (_, hit) = mse_and_success(&values, &data.positive, &data.negative, cfg.success_mse)?;
        if hit {
            break;
        }
        // Full-batch loss is what gets reported; the gradient may run on a
        // Bernoulli subsample of the targets to jostle balanced optima.
        let grad_loss = if cfg.batch_fraction < 1.0 {
            let picked: Vec<_> = terms
                .iter()
                .copied()
                .filter(|_| s.rng.gen::<f64>() < cfg.batch_fraction)
                .collect();
            if picked.is_empty() {
                loss
            } else {
                let subtotal = tape.sum(&picked);
                tape.scale(subtotal, 1.0 / picked.len() as f64)
            }
        } else {
            loss
        };
        tape.backward(grad_loss, &mut s.params);
        s.opt.step(&mut s.params).map_err(|msg| Error::Numeric { seed, epoch, msg })?;
    }

    let model = TrainedModel {
        symbols: s.symbols,
        dict: s.dict,
        rules: s.rules,
        params: s.params,
        core: None,
        chain: s.chain,
    };
    let outcome = model.infer_values(&data.background, &loss_keys)?;
    let values = values_of(&loss_keys, &outcome);
    let (mse, success) =
        mse_and_success(&values, &data.positive, &data.negative, cfg.success_mse)?;
    let decoded = model.decoded()?;
    let report = RunReport {
        task: task.name.clone(),
        seed,
        mode: "ilp".into(),
        epochs_run,
        first_loss,
        final_loss,
        mse: Some(mse),
        auc_pr: None,
        accuracy: None,
        induced: None,
        success,
        rules: reported(&decoded),
        wall_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, model))
}

/// Learns a core-plus-rules compression of the observed facts. The loss
/// rewards rederiving every observation from the core and charges lambda
/// for the total core valuation; success means the binarized theory still
/// covers `success_acc` of the observations.
pub fn train_theory(
    task: &TaskSpec,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(RunReport, TrainedModel)> {
    let start = Instant::now();
    let data = &task.dataset;
    if data.observed.is_empty() {
        return Err(Error::Argument(format!(
            "task '{}' has no observed facts to compress",
            task.name
        )));
    }
    let mut s = setup(&data.symbols, &task.templates, cfg, task.k, seed)?;
    check_targets(&data.observed, &s.dict, "observed")?;
    let core = CoreStore::build(&s.symbols, &mut s.params);
    let engine = Engine { cfg: s.chain, dict: &s.dict, n_consts: s.symbols.num_consts() };

    let mut first_loss = f64::NAN;
    let mut final_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        if cfg.noise {
            let sigma = cfg.noise_sigma0 * cfg.noise_decay.powi(epoch as i32);
            s.params.add_noise(sigma, &mut s.rng);
        }
        let mut tape = Tape::new();
        let mut init = Vec::with_capacity(core.keys.len());
        let mut nodes = Vec::with_capacity(core.keys.len());
        for (i, &key) in core.keys.iter().enumerate() {
            let logit = tape.coord(&s.params, core.param, i);
            let v = tape.sigmoid(logit);
            init.push(GroundFact::new(key, tape.value(v)));
            nodes.push(v);
        }
        let outcome = engine.infer(
            &s.rules,
            &init,
            Some(&nodes),
            &s.params,
            Some(&mut tape),
            &data.observed,
            None,
        )?;
        let mut terms = Vec::with_capacity(data.observed.len());
        for db in &outcome.derived {
            let pred = db.node.unwrap_or_else(|| tape.constant(0.0));
            terms.push(tape.bce(pred, 1.0)?);
        }
        let fit = tape.sum(&terms);
        let size = tape.sum(&nodes);
        let size = if cfg.penalty_squared { tape.mul(&[size, size]) } else { size };
        let penalty = tape.scale(size, cfg.lambda);
        let loss = tape.sum(&[fit, penalty]);
        let lv = tape.value(loss);
        if !lv.is_finite() {
            return Err(Error::Numeric { seed, epoch, msg: format!("loss became {}", lv) });
        }
        if epoch == 0 {
            first_loss = lv;
        }
        final_loss = lv;
        tape.backward(loss, &mut s.params);
        s.opt.step(&mut s.params).map_err(|msg| Error::Numeric { seed, epoch, msg })?;
    }

    let induced = core.induced(&s.params);
    let model = TrainedModel {
        symbols: s.symbols,
        dict: s.dict,
        rules: s.rules,
        params: s.params,
        core: Some(core),
        chain: s.chain,
    };
    let decoded = model.decoded()?;
    let rule_templates: Vec<_> = decoded.iter().map(|d| d.rule.clone()).collect();
    let accuracy = theory_accuracy(&model.symbols, &induced, &rule_templates, &data.observed)?;
    let report = RunReport {
        task: task.name.clone(),
        seed,
        mode: "theory".into(),
        epochs_run: cfg.epochs,
        first_loss,
        final_loss,
        mse: None,
        auc_pr: None,
        accuracy: Some(accuracy),
        induced: Some(induced.len()),
        success: accuracy >= cfg.success_acc,
        rules: reported(&decoded),
        wall_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, model))
}

/// Learns link-prediction rules on a knowledge graph split. Each epoch can
/// subsample the background; the final score is the area under the
/// precision-recall curve on the held-out test queries.
pub fn train_kg(split: &KgSplit, cfg: &TrainConfig, seed: u64) -> Result<(RunReport, TrainedModel)> {
    let start = Instant::now();
    let templates = crate::tasks::countries_templates(split.regime)?;
    if split.train_pos.is_empty() && split.train_neg.is_empty() {
        return Err(Error::Argument("the split has no training queries".into()));
    }
    if split.test_pos.is_empty() {
        return Err(Error::Argument("the split has no positive test queries".into()));
    }
    let default_k = match split.regime {
        Regime::S1 => 2,
        Regime::S2 | Regime::S3 => 1,
    };
    let mut s = setup(&split.symbols, &templates, cfg, default_k, seed)?;
    let mut loss_keys = split.train_pos.clone();
    loss_keys.extend(split.train_neg.iter().copied());
    check_targets(&loss_keys, &s.dict, "query")?;
    let n_pos = split.train_pos.len();
    let engine = Engine { cfg: s.chain, dict: &s.dict, n_consts: s.symbols.num_consts() };

    let mut first_loss = f64::NAN;
    let mut final_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        if cfg.noise {
            let sigma = cfg.noise_sigma0 * cfg.noise_decay.powi(epoch as i32);
            s.params.add_noise(sigma, &mut s.rng);
        }
        let background;
        let init = if cfg.sample_fraction < 1.0 {
            background = sample_background(split, cfg.sample_fraction, &mut s.rng)?;
            &background
        } else {
            &split.background
        };
        let mut tape = Tape::new();
        let outcome =
            engine.infer(&s.rules, init, None, &s.params, Some(&mut tape), &loss_keys, None)?;
        let mut terms = Vec::with_capacity(loss_keys.len());
        for (i, db) in outcome.derived.iter().enumerate() {
            let pred = db.node.unwrap_or_else(|| tape.constant(0.0));
            let target = if i < n_pos { 1.0 } else { 0.0 };
            terms.push(tape.bce(pred, target)?);
        }
        let total = tape.sum(&terms);
        let loss = tape.scale(total, 1.0 / terms.len() as f64);
        let lv = tape.value(loss);
        if !lv.is_finite() {
            return Err(Error::Numeric { seed, epoch, msg: format!("loss became {}", lv) });
        }
        if epoch == 0 {
            first_loss = lv;
        }
        final_loss = lv;
        tape.backward(loss, &mut s.params);
        s.opt.step(&mut s.params).map_err(|msg| Error::Numeric { seed, epoch, msg })?;
    }

    let model = TrainedModel {
        symbols: s.symbols,
        dict: s.dict,
        rules: s.rules,
        params: s.params,
        core: None,
        chain: s.chain,
    };
    let mut eval_keys = split.test_pos.clone();
    eval_keys.extend(split.test_neg.iter().copied());
    let outcome = model.infer_values(&split.background, &eval_keys)?;
    let values = values_of(&eval_keys, &outcome);
    let scores: Vec<(f64, bool)> = split
        .test_pos
        .iter()
        .map(|k| (values.get(k).copied().unwrap_or(0.0), true))
        .chain(split.test_neg.iter().map(|k| (values.get(k).copied().unwrap_or(0.0), false)))
        .collect();
    let auc = auc_pr(&scores)?;
    let decoded = model.decoded()?;
    let report = RunReport {
        task: format!("countries-{}", split.regime),
        seed,
        mode: "kg".into(),
        epochs_run: cfg.epochs,
        first_loss,
        final_loss,
        mse: None,
        auc_pr: Some(auc),
        accuracy: None,
        induced: None,
        success: auc >= cfg.success_auc,
        rules: reported(&decoded),
        wall_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, model))
}

/// Dispatches on the task's mode.
pub fn train_task(task: &TaskSpec, cfg: &TrainConfig, seed: u64) -> Result<(RunReport, TrainedModel)> {
    match task.mode {
        Mode::Ilp => train_ilp(task, cfg, seed),
        Mode::Theory => train_theory(task, cfg, seed),
    }
}

/// Runs `restarts` seeds starting at `cfg.seed`. Per-seed failures are
/// recorded in place, not raised. With `jobs > 1` the seeds run on a rayon
/// pool; results keep seed order either way.
pub fn run_restarts<F>(cfg: &TrainConfig, run: F) -> Vec<Result<RunReport>>
where
    F: Fn(u64) -> Result<RunReport> + Sync,
{
    let seeds: Vec<u64> = (0..cfg.restarts as u64).map(|i| cfg.seed + i).collect();
    if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build();
        match pool {
            Ok(pool) => pool.install(|| seeds.par_iter().map(|&s| run(s)).collect()),
            Err(e) => vec![Err(Error::Config(format!("could not build a thread pool: {}", e)))],
        }
    } else {
        seeds.iter().map(|&s| run(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{builtin_task, theory_task};

    fn quick(epochs: usize) -> TrainConfig {
        TrainConfig { epochs, ..TrainConfig::default() }
    }

    #[test]
    fn default_config_validates() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_configs_are_rejected() {
        let cases: Vec<(&str, Box<dyn Fn(&mut TrainConfig)>)> = vec![
            ("epochs", Box::new(|c| c.epochs = 0)),
            ("lr", Box::new(|c| c.lr = 0.0)),
            ("lr", Box::new(|c| c.lr = f64::NAN)),
            ("optimizer", Box::new(|c| c.optimizer = "rmsprop".into())),
            ("lambda", Box::new(|c| c.lambda = -0.1)),
            ("noise_decay", Box::new(|c| c.noise_decay = 0.0)),
            ("noise_decay", Box::new(|c| c.noise_decay = 1.5)),
            ("restarts", Box::new(|c| c.restarts = 0)),
            ("jobs", Box::new(|c| c.jobs = 0)),
            ("prune_eps", Box::new(|c| c.prune_eps = 1.0)),
            ("sample_fraction", Box::new(|c| c.sample_fraction = 0.0)),
            ("success_mse", Box::new(|c| c.success_mse = 0.0)),
            ("success_acc", Box::new(|c| c.success_acc = 1.2)),
        ];
        for (what, poison) in cases {
            let mut cfg = TrainConfig::default();
            poison(&mut cfg);
            assert!(
                matches!(cfg.validate(), Err(Error::Config(_))),
                "expected a config error poisoning {}",
                what
            );
        }
    }

    #[test]
    fn set_covers_every_field() {
        let mut cfg = TrainConfig::default();
        for (key, value) in [
            ("epochs", "7"),
            ("lr", "0.01"),
            ("optimizer", "sgd"),
            ("lambda", "0.5"),
            ("penalty_squared", "true"),
            ("noise", "true"),
            ("noise_sigma0", "0.2"),
            ("noise_decay", "0.9"),
            ("restarts", "3"),
            ("seed", "42"),
            ("jobs", "2"),
            ("k", "4"),
            ("d", "16"),
            ("aux_count", "1"),
            ("prune_eps", "0.001"),
            ("max_new_facts", "500"),
            ("train_dictionary", "true"),
            ("init_mean", "0.7"),
            ("sample_fraction", "0.5"),
            ("success_mse", "0.001"),
            ("success_acc", "0.9"),
            ("success_auc", "0.8"),
        ] {
            cfg.set(key, value).unwrap();
        }
        assert_eq!(cfg.epochs, 7);
        assert_eq!(cfg.optimizer, "sgd");
        assert!(cfg.penalty_squared && cfg.noise && cfg.train_dictionary);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.d, 16);
        assert_eq!(cfg.max_new_facts, 500);
        assert!((cfg.sample_fraction - 0.5).abs() < 1e-12);
        cfg.validate().unwrap();

        assert!(matches!(cfg.set("banana", "1"), Err(Error::Config(_))));
        assert!(matches!(cfg.set("epochs", "many"), Err(Error::Config(_))));
    }

    #[test]
    fn for_task_picks_up_the_recommendations() {
        let fizz = builtin_task("fizz").unwrap();
        let cfg = TrainConfig::default().for_task(&fizz);
        assert_eq!(cfg.epochs, 600);
        assert!(cfg.noise);
        assert_eq!(cfg.restarts, 20);
        assert_eq!(cfg.k, 5);

        let (tax, _) = theory_task("taxonomy").unwrap();
        let cfg = TrainConfig::default().for_task(&tax);
        assert!((cfg.lambda - 0.01).abs() < 1e-12);
        assert!((cfg.prune_eps - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn core_store_covers_the_universe_diagonally() {
        let (task, _) = theory_task("kinship").unwrap();
        let mut params = ParamStore::new();
        let core = CoreStore::build(&task.dataset.symbols, &mut params);
        let n = task.dataset.symbols.num_consts();
        let mut unary = 0;
        let mut binary = 0;
        for p in task.dataset.symbols.preds() {
            if p.arity == 1 {
                unary += 1;
            } else {
                binary += 1;
            }
        }
        assert_eq!(core.keys.len(), unary * n + binary * n * n);
        let facts = core.facts(&params);
        assert!(facts.iter().all(|f| (f.value - 0.5).abs() < 1e-12));
        assert!(core.induced(&params).is_empty());
    }

    #[test]
    fn predecessor_trains_to_success() {
        let task = builtin_task("predecessor").unwrap();
        let cfg = quick(150).for_task(&task);
        let (report, model) = train_ilp(&task, &cfg, 0).unwrap();
        assert!(report.success, "mse stayed at {:?}", report.mse);
        assert!(report.mse.unwrap() < cfg.success_mse);
        assert!(report.final_loss < report.first_loss);
        assert!(report.epochs_run < cfg.epochs, "early stop expected");
        let decoded = model.decoded().unwrap();
        assert_eq!(decoded.len(), task.templates.len());
    }

    #[test]
    fn background_valuations_stay_pinned_at_one() {
        let task = builtin_task("predecessor").unwrap();
        let cfg = quick(5).for_task(&task);
        let (_, model) = train_ilp(&task, &cfg, 1).unwrap();
        let outcome = model.infer_values(&task.dataset.background, &[]).unwrap();
        for fact in &task.dataset.background {
            let got = outcome
                .store
                .keys
                .iter()
                .position(|k| *k == fact.key)
                .map(|i| outcome.store.vals[i])
                .expect("background fact vanished");
            assert_eq!(got, 1.0, "background {:?} drifted", fact.key);
        }
    }

    #[test]
    fn gradients_reach_every_rule_slot() {
        let task = builtin_task("even-succ2").unwrap();
        let cfg = quick(5).for_task(&task);
        let mut s = setup(&task.dataset.symbols, &task.templates, &cfg, task.k, 3).unwrap();
        let mut loss_keys = task.dataset.positive.clone();
        loss_keys.extend(task.dataset.negative.iter().copied());
        let n_pos = task.dataset.positive.len();
        let engine = Engine { cfg: s.chain, dict: &s.dict, n_consts: s.symbols.num_consts() };
        let slots: Vec<ParamId> = s
            .rules
            .iter()
            .flat_map(|r| std::iter::once(r.head).chain(r.body.iter().copied()))
            .collect();
        let mut touched = vec![false; slots.len()];
        for _ in 0..cfg.epochs {
            let mut tape = Tape::new();
            let outcome = engine
                .infer(
                    &s.rules,
                    &task.dataset.background,
                    None,
                    &s.params,
                    Some(&mut tape),
                    &loss_keys,
                    None,
                )
                .unwrap();
            let mut terms = Vec::new();
            for (i, db) in outcome.derived.iter().enumerate() {
                let pred = db.node.unwrap_or_else(|| tape.constant(0.0));
                let target = if i < n_pos { 1.0 } else { 0.0 };
                terms.push(tape.bce(pred, target).unwrap());
            }
            let total = tape.sum(&terms);
            let loss = tape.scale(total, 1.0 / terms.len() as f64);
            tape.backward(loss, &mut s.params);
            for (i, &slot) in slots.iter().enumerate() {
                if s.params.get(slot).adjoints.iter().any(|&a| a != 0.0) {
                    touched[i] = true;
                }
            }
            s.opt.step(&mut s.params).unwrap();
        }
        for (i, hit) in touched.iter().enumerate() {
            assert!(hit, "rule slot {} never received a gradient", i);
        }
    }

    #[test]
    fn non_finite_loss_aborts_with_seed_and_epoch() {
        let (task, _) = theory_task("kinship").unwrap();
        let mut cfg = quick(3).for_task(&task);
        cfg.lambda = 1e308;
        match train_theory(&task, &cfg, 9) {
            Err(Error::Numeric { seed, epoch, .. }) => {
                assert_eq!(seed, 9);
                assert_eq!(epoch, 0);
            }
            other => panic!("expected a numeric abort, got {:?}", other.map(|(r, _)| r)),
        }
    }

    #[test]
    fn runs_are_reproducible_per_seed() {
        let task = builtin_task("father").unwrap();
        let mut cfg = quick(30).for_task(&task);
        cfg.epochs = 30;
        let (a, _) = train_ilp(&task, &cfg, 5).unwrap();
        let (b, _) = train_ilp(&task, &cfg, 5).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn restarts_cover_the_requested_seed_range() {
        let task = builtin_task("father").unwrap();
        let mut cfg = quick(2).for_task(&task);
        cfg.epochs = 2;
        cfg.restarts = 3;
        cfg.seed = 10;
        let results = run_restarts(&cfg, |seed| train_ilp(&task, &cfg, seed).map(|(r, _)| r));
        assert_eq!(results.len(), 3);
        let seeds: Vec<u64> = results.iter().map(|r| r.as_ref().unwrap().seed).collect();
        assert_eq!(seeds, vec![10, 11, 12]);
    }

    #[test]
    fn empty_targets_are_an_argument_error() {
        let mut task = builtin_task("father").unwrap();
        task.dataset.positive.clear();
        task.dataset.negative.clear();
        let cfg = quick(2);
        assert!(matches!(train_ilp(&task, &cfg, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn theory_training_runs_and_reports_a_core() {
        let (task, _) = theory_task("kinship").unwrap();
        let mut cfg = quick(5).for_task(&task);
        cfg.epochs = 5;
        let (report, model) = train_theory(&task, &cfg, 0).unwrap();
        assert_eq!(report.mode, "theory");
        assert!(report.induced.is_some());
        assert!(report.accuracy.is_some());
        assert_eq!(report.rules.len(), task.templates.len());
        assert!(model.core.is_some());
        assert!(report.final_loss.is_finite());
    }
}
