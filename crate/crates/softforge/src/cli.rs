//! Batch front-end. Exit codes are a contract: 0 success, 1 verification
//! or training failure, 2 usage/parse/config errors, 3 numeric abort.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::logic::{parse_dataset, parse_templates, SlotSpec, Template};
use crate::oracle::verify_solution;
use crate::tasks::{
    arity_map, builtin_task, countries_full, crisp_facts, crisp_keys, theory_task, KgSplit, Mode,
    Regime, TaskSpec, TASK_NAMES,
};
use crate::train::{
    run_restarts, train_ilp, train_kg, train_theory, RunReport, TrainConfig, TrainedModel,
};
use crate::{checkpoint, config, report, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "softforge", version, about = "Differentiable forward chaining")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a task across restart seeds and write a JSON-lines report.
    Run(RunArgs),
    /// List the built-in tasks.
    ListTasks,
    /// Print the rules decoded from a checkpoint, best first.
    Decode(DecodeArgs),
    /// Check a crisp rule file against a task with the symbolic oracle.
    Verify(VerifyArgs),
    /// Summarize a JSON-lines report file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in task name (see list-tasks).
    #[arg(long)]
    pub task: Option<String>,
    /// Custom dataset file; requires --templates and --K.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Rule templates for a custom dataset.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Flat key = value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Write a checkpoint of the best seed's model here.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Append the report here instead of printing it to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Exploration noise; plain --noise switches it on.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub noise: Option<bool>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Checkpoint written by run --save.
    pub checkpoint: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Rule file with concrete predicate names.
    #[arg(long)]
    pub templates: PathBuf,
    /// Built-in task whose data the rules must fit.
    #[arg(long)]
    pub task: Option<String>,
    /// Custom dataset file instead of a built-in task.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Chaining depth; defaults to the task's.
    #[arg(long = "K")]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON-lines report file written by run.
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum LogLevel {
    Off,
    Info,
    Trace,
}

fn log_level() -> std::result::Result<LogLevel, String> {
    match std::env::var("SOFTFORGE_LOG") {
        Err(_) => Ok(LogLevel::Off),
        Ok(v) => match v.as_str() {
            "" | "off" => Ok(LogLevel::Off),
            "info" => Ok(LogLevel::Info),
            "trace" => Ok(LogLevel::Trace),
            other => Err(format!("SOFTFORGE_LOG must be off, info or trace, got '{}'", other)),
        },
    }
}

/// Parses and executes; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match log_level() {
        Ok(l) => l,
        Err(msg) => {
            eprintln!("error: {}", msg);
            return 2;
        }
    };
    match execute(cli.command, level) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err);
            match err {
                Error::Numeric { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn execute(command: Command, level: LogLevel) -> Result<i32> {
    match command {
        Command::Run(args) => cmd_run(args, level),
        Command::ListTasks => cmd_list_tasks(),
        Command::Decode(args) => cmd_decode(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// What a run trains on: a catalog or custom task, or a countries split.
enum Target {
    Task(Box<TaskSpec>),
    Kg(Box<KgSplit>),
}

fn full_catalog() -> String {
    let mut names: Vec<&str> = TASK_NAMES.to_vec();
    names.extend(["taxonomy", "kinship", "countries-s1", "countries-s2", "countries-s3"]);
    names.join(", ")
}

fn resolve_task(name: &str) -> Result<(Target, TrainConfig)> {
    if TASK_NAMES.contains(&name) {
        let task = builtin_task(name)?;
        let cfg = TrainConfig::default().for_task(&task);
        return Ok((Target::Task(Box::new(task)), cfg));
    }
    if name == "taxonomy" || name == "kinship" {
        let (task, _) = theory_task(name)?;
        let cfg = TrainConfig::default().for_task(&task);
        return Ok((Target::Task(Box::new(task)), cfg));
    }
    if let Some(regime) = name.strip_prefix("countries-") {
        if let Ok(regime) = Regime::parse(regime) {
            let split = countries_full(regime)?;
            let mut cfg = TrainConfig::default();
            cfg.epochs = 200;
            return Ok((Target::Kg(Box::new(split)), cfg));
        }
    }
    Err(Error::UnknownTask { name: name.to_string(), valid: full_catalog() })
}

fn resolve_custom(args: &RunArgs, cfg: &TrainConfig) -> Result<Target> {
    let dataset_path = args.dataset.as_ref().expect("caller checked");
    let templates_path = args.templates.as_ref().ok_or_else(|| {
        Error::Config("custom datasets need --templates with the rule shapes".into())
    })?;
    let mut dataset = parse_dataset(&std::fs::read_to_string(dataset_path)?)?;
    let templates = parse_templates(&std::fs::read_to_string(templates_path)?)?;
    for i in 0..cfg.aux_count {
        dataset.symbols.intern_pred(&format!("aux{}", i + 1), 2)?;
    }
    let mode = if dataset.observed.is_empty() { Mode::Ilp } else { Mode::Theory };
    let name = dataset_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "custom".into());
    Ok(Target::Task(Box::new(TaskSpec {
        name,
        dataset,
        templates,
        aux: vec![2; cfg.aux_count],
        k: 0,
        mode,
        solution: Vec::new(),
        holdout: None,
        overrides: Default::default(),
    })))
}

fn cmd_run(args: RunArgs, level: LogLevel) -> Result<i32> {
    let (target, mut cfg) = match (&args.task, &args.dataset) {
        (Some(name), None) => resolve_task(name)?,
        (None, Some(_)) => {
            let mut cfg = TrainConfig::default();
            if let Some(path) = &args.config {
                config::apply_file(&mut cfg, path)?;
            }
            let target = resolve_custom(&args, &cfg)?;
            (target, cfg)
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config("--task and --dataset are mutually exclusive".into()));
        }
        (None, None) => {
            return Err(Error::Config("run needs --task or --dataset".into()));
        }
    };
    // Layering: task recommendations, then the config file, then flags.
    if args.task.is_some() {
        if let Some(path) = &args.config {
            config::apply_file(&mut cfg, path)?;
        }
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.restarts {
        cfg.restarts = v;
    }
    if let Some(v) = args.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.k {
        cfg.k = v;
    }
    if let Some(v) = args.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = args.lr {
        cfg.lr = v;
    }
    if let Some(v) = args.noise {
        cfg.noise = v;
    }
    if let Target::Task(task) = &target {
        if cfg.k == 0 && task.k == 0 {
            return Err(Error::Config("custom datasets need an explicit --K depth".into()));
        }
    }
    cfg.validate()?;

    let task_name = match &target {
        Target::Task(task) => task.name.clone(),
        Target::Kg(split) => format!("countries-{}", split.regime),
    };
    if level >= LogLevel::Info {
        eprintln!(
            "{}: {} restarts from seed {}, {} epochs, lr {}",
            task_name, cfg.restarts, cfg.seed, cfg.epochs, cfg.lr
        );
    }
    let started = Instant::now();
    let keep_models = args.save.is_some();
    let models: Mutex<Vec<(u64, TrainedModel)>> = Mutex::new(Vec::new());
    let results = run_restarts(&cfg, |seed| {
        let trained = match &target {
            Target::Task(task) => match task.mode {
                Mode::Ilp => train_ilp(task, &cfg, seed),
                Mode::Theory => train_theory(task, &cfg, seed),
            },
            Target::Kg(split) => train_kg(split, &cfg, seed),
        };
        let (report, model) = trained?;
        if level >= LogLevel::Info {
            eprintln!(
                "seed {}: {} after {} epochs in {:.2}s",
                seed,
                if report.success { "success" } else { "no solution" },
                report.epochs_run,
                report.wall_secs
            );
        }
        if keep_models {
            models.lock().unwrap().push((seed, model));
        }
        Ok(report)
    });

    let (text, aggregate) = report::render(&task_name, cfg.seed, &results)?;
    match &args.out {
        Some(path) => {
            let mut file =
                std::fs::OpenOptions::new().create(true).append(true).open(path)?;
            file.write_all(text.as_bytes())?;
        }
        None => print!("{}", text),
    }
    if level >= LogLevel::Info {
        eprintln!(
            "{}: {}/{} seeds succeeded in {:.2}s",
            task_name,
            aggregate.successes,
            aggregate.restarts,
            started.elapsed().as_secs_f64()
        );
    }

    if let Some(path) = &args.save {
        save_best(path, &task_name, &results, models.into_inner().unwrap(), level)?;
    }

    if aggregate.successes > 0 {
        Ok(0)
    } else if results
        .iter()
        .any(|r| matches!(r, Err(Error::Numeric { .. })))
    {
        Ok(3)
    } else {
        Ok(1)
    }
}

/// Lower is better: failures sort after successes, then the mode's metric
/// decides (mse ascending, auc and accuracy descending).
fn rank_of(report: &RunReport) -> (u8, f64) {
    let fail = u8::from(!report.success);
    if let Some(mse) = report.mse {
        (fail, mse)
    } else if let Some(auc) = report.auc_pr {
        (fail, -auc)
    } else if let Some(acc) = report.accuracy {
        (fail, -acc)
    } else {
        (fail, f64::INFINITY)
    }
}

fn save_best(
    path: &Path,
    task_name: &str,
    results: &[Result<RunReport>],
    models: Vec<(u64, TrainedModel)>,
    level: LogLevel,
) -> Result<()> {
    let best = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .min_by(|a, b| rank_of(a).partial_cmp(&rank_of(b)).unwrap_or(std::cmp::Ordering::Equal));
    let Some(best) = best else {
        eprintln!("no seed finished; nothing to save");
        return Ok(());
    };
    let model = models
        .into_iter()
        .find(|(seed, _)| *seed == best.seed)
        .map(|(_, m)| m)
        .ok_or_else(|| Error::Internal("best seed's model was not kept".into()))?;
    let meta = checkpoint::meta_of(task_name, &best.mode, &model);
    checkpoint::save(path, &meta, &model.params)?;
    if level >= LogLevel::Info {
        eprintln!("saved seed {} to {}", best.seed, path.display());
    }
    if level >= LogLevel::Trace {
        for line in trace_lines(&model, task_name)? {
            eprintln!("trace: {}", line);
        }
    }
    Ok(())
}

/// Value-mode derivation log of the saved model on its own task data.
fn trace_lines(model: &TrainedModel, task_name: &str) -> Result<Vec<String>> {
    use crate::chain::{Engine, TraceSink};
    let init = match &model.core {
        Some(core) => core.facts(&model.params),
        None => match builtin_task(task_name) {
            Ok(task) => task.dataset.background.clone(),
            Err(_) => return Ok(Vec::new()),
        },
    };
    let mut lines = Vec::new();
    let engine =
        Engine { cfg: model.chain, dict: &model.dict, n_consts: model.symbols.num_consts() };
    engine.infer(
        &model.rules,
        &init,
        None,
        &model.params,
        None,
        &[],
        Some(TraceSink { symbols: &model.symbols, lines: &mut lines }),
    )?;
    Ok(lines)
}

fn cmd_list_tasks() -> Result<i32> {
    for name in TASK_NAMES {
        let task = builtin_task(name)?;
        println!(
            "{:<16} ilp     K={:<2} aux={} templates={}",
            name,
            task.k,
            task.aux_count(),
            task.templates.len()
        );
    }
    for name in ["taxonomy", "kinship"] {
        let (task, _) = theory_task(name)?;
        println!(
            "{:<16} theory  K={:<2} aux={} templates={}",
            name,
            task.k,
            task.aux_count(),
            task.templates.len()
        );
    }
    for regime in ["s1", "s2", "s3"] {
        println!("countries-{}     kg      K=-  aux=0 templates=2", regime);
    }
    Ok(0)
}

fn cmd_decode(args: DecodeArgs) -> Result<i32> {
    let (meta, stored) = checkpoint::load(&args.checkpoint)?;
    let model = checkpoint::restore(&meta, stored)?;
    let mut decoded = model.decoded()?;
    decoded.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    let mut text = String::new();
    for rule in &decoded {
        text.push_str(&rule.to_string());
        text.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.templates)?;
    let has_rules = text
        .lines()
        .any(|l| !l.trim().is_empty() && !l.trim().starts_with('%'));
    let rules: Vec<Template> = if has_rules { parse_templates(&text)? } else { Vec::new() };
    for rule in &rules {
        let concrete = std::iter::once(&rule.head)
            .chain(&rule.body)
            .all(|a| matches!(a.slot, SlotSpec::Named(_)));
        if !concrete {
            return Err(Error::Config(format!(
                "verify needs concrete predicate names, got '{}'",
                rule
            )));
        }
    }
    let (dataset, default_k) = match (&args.task, &args.dataset) {
        (Some(name), None) => {
            let task = builtin_task(name)
                .map_err(|_| Error::UnknownTask { name: name.clone(), valid: full_catalog() })?;
            (task.dataset, task.k)
        }
        (None, Some(path)) => (parse_dataset(&std::fs::read_to_string(path)?)?, 0),
        _ => return Err(Error::Config("verify needs exactly one of --task or --dataset".into())),
    };
    let k = args.k.unwrap_or(default_k);
    if k == 0 {
        return Err(Error::Config("custom datasets need an explicit --K depth".into()));
    }
    let verification = verify_solution(
        &rules,
        &crisp_facts(&dataset.symbols, &dataset.background),
        &crisp_keys(&dataset.symbols, &dataset.positive),
        &crisp_keys(&dataset.symbols, &dataset.negative),
        &arity_map(&dataset.symbols),
        Some(k),
    )?;
    if verification.holds {
        println!(
            "ok: {} positives derived, {} negatives excluded, closure size {}",
            dataset.positive.len(),
            dataset.negative.len(),
            verification.closure_size
        );
        Ok(0)
    } else {
        for (name, a) in &verification.missing_positives {
            println!("missing positive: {}({})", name, a.join(","));
        }
        for (name, a) in &verification.derived_negatives {
            println!("derived negative: {}({})", name, a.join(","));
        }
        println!(
            "failed: {} positives missing, {} negatives derived",
            verification.missing_positives.len(),
            verification.derived_negatives.len()
        );
        Ok(1)
    }
}

fn cmd_report(args: ReportArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.path)?;
    print!("{}", report::summarize(&text)?);
    Ok(0)
}
