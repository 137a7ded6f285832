//! JSON-lines run reports: one line per seed, one aggregate line last.
//! Lines carry no timestamps or wall-clock data, so a rerun of the same
//! command produces byte-identical output.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::train::RunReport;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub aggregate: bool,
    pub task: String,
    pub restarts: usize,
    pub successes: usize,
    pub errors: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorLine<'a> {
    task: &'a str,
    seed: u64,
    error: String,
}

/// Renders the full report block: one line per seed in order, then the
/// aggregate. Returns the text and the aggregate for exit-code decisions.
pub fn render(task: &str, base_seed: u64, results: &[Result<RunReport>]) -> Result<(String, Aggregate)> {
    let mut out = String::new();
    let mut successes = 0;
    let mut errors = 0;
    for (i, res) in results.iter().enumerate() {
        let line = match res {
            Ok(report) => {
                if report.success {
                    successes += 1;
                }
                serde_json::to_string(report)
            }
            Err(e) => {
                errors += 1;
                serde_json::to_string(&ErrorLine {
                    task,
                    seed: base_seed + i as u64,
                    error: e.to_string(),
                })
            }
        }
        .map_err(|e| Error::Internal(format!("report serialization failed: {}", e)))?;
        out.push_str(&line);
        out.push('\n');
    }
    let aggregate = Aggregate {
        aggregate: true,
        task: task.to_string(),
        restarts: results.len(),
        successes,
        errors,
        success_rate: if results.is_empty() {
            0.0
        } else {
            successes as f64 / results.len() as f64
        },
    };
    let line = serde_json::to_string(&aggregate)
        .map_err(|e| Error::Internal(format!("report serialization failed: {}", e)))?;
    out.push_str(&line);
    out.push('\n');
    Ok((out, aggregate))
}

#[derive(Debug, Default, Clone)]
struct TaskSummary {
    runs: usize,
    successes: usize,
    errors: usize,
    best_mse: Option<f64>,
    best_auc: Option<f64>,
    best_acc: Option<f64>,
}

/// Summarizes a JSON-lines report file per task, in task name order.
/// Aggregate lines are skipped; they restate what the run lines carry.
pub fn summarize(text: &str) -> Result<String> {
    let mut tasks: BTreeMap<String, TaskSummary> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Parse { line: i + 1, msg: format!("bad report line: {}", e) })?;
        if v.get("aggregate").is_some() {
            continue;
        }
        let task = v
            .get("task")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::Parse { line: i + 1, msg: "report line without a task".into() })?
            .to_string();
        let entry = tasks.entry(task).or_default();
        entry.runs += 1;
        if v.get("error").is_some() {
            entry.errors += 1;
            continue;
        }
        if v.get("success").and_then(|s| s.as_bool()).unwrap_or(false) {
            entry.successes += 1;
        }
        let keep_min = |slot: &mut Option<f64>, val: f64| {
            *slot = Some(slot.map_or(val, |b: f64| b.min(val)));
        };
        let keep_max = |slot: &mut Option<f64>, val: f64| {
            *slot = Some(slot.map_or(val, |b: f64| b.max(val)));
        };
        if let Some(m) = v.get("mse").and_then(|m| m.as_f64()) {
            keep_min(&mut entry.best_mse, m);
        }
        if let Some(a) = v.get("auc_pr").and_then(|a| a.as_f64()) {
            keep_max(&mut entry.best_auc, a);
        }
        if let Some(a) = v.get("accuracy").and_then(|a| a.as_f64()) {
            keep_max(&mut entry.best_acc, a);
        }
    }
    let mut out = String::new();
    for (task, s) in &tasks {
        out.push_str(&format!("{}: {}/{} succeeded", task, s.successes, s.runs));
        if s.errors > 0 {
            out.push_str(&format!(", {} errored", s.errors));
        }
        if let Some(m) = s.best_mse {
            out.push_str(&format!(", best mse {:.2e}", m));
        }
        if let Some(a) = s.best_auc {
            out.push_str(&format!(", best auc-pr {:.4}", a));
        }
        if let Some(a) = s.best_acc {
            out.push_str(&format!(", best accuracy {:.4}", a));
        }
        out.push('\n');
    }
    if tasks.is_empty() {
        out.push_str("no runs\n");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::ReportedRule;

    fn fake(task: &str, seed: u64, success: bool, mse: f64) -> RunReport {
        RunReport {
            task: task.into(),
            seed,
            mode: "ilp".into(),
            epochs_run: 10,
            first_loss: 1.0,
            final_loss: 0.1,
            mse: Some(mse),
            auc_pr: None,
            accuracy: None,
            induced: None,
            success,
            rules: vec![ReportedRule { confidence: 0.9, rule: "p(X,Y) <- q(Y,X)".into() }],
            wall_secs: 1.25,
        }
    }

    #[test]
    fn renders_one_line_per_seed_plus_aggregate() {
        let results = vec![
            Ok(fake("father", 0, true, 1e-6)),
            Err(Error::Numeric { seed: 1, epoch: 3, msg: "loss became inf".into() }),
            Ok(fake("father", 2, false, 0.2)),
        ];
        let (text, agg) = render("father", 0, &results).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].contains("\"seed\":0") && lines[0].contains("\"success\":true"));
        assert!(lines[1].contains("\"seed\":1") && lines[1].contains("error"));
        assert!(lines[2].contains("\"seed\":2"));
        assert!(lines[3].contains("\"aggregate\":true"));
        assert_eq!(agg.successes, 1);
        assert_eq!(agg.errors, 1);
        assert!((agg.success_rate - 1.0 / 3.0).abs() < 1e-12);
        // No timestamps anywhere: rendering twice is byte-identical.
        let (again, _) = render("father", 0, &results).unwrap();
        assert_eq!(text, again);
        assert!(!text.contains("wall"));
    }

    #[test]
    fn summarize_groups_by_task() {
        let results = vec![Ok(fake("father", 0, true, 1e-6)), Ok(fake("father", 1, false, 0.3))];
        let (text, _) = render("father", 0, &results).unwrap();
        let summary = summarize(&text).unwrap();
        assert_eq!(summary, "father: 1/2 succeeded, best mse 1.00e-6\n");
    }

    #[test]
    fn summarize_rejects_garbage() {
        assert!(matches!(summarize("not json\n"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(summarize("").unwrap(), "no runs\n");
    }
}
