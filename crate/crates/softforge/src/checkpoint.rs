//! Model checkpoints: a short text header (task, shapes, dictionary,
//! templates) followed by the raw parameter vectors as little-endian f64.
//! Saving and loading round-trips every bit.

use std::collections::HashMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{instantiate_rules, ChainConfig, Dictionary};
use crate::diff::{ParamId, ParamStore};
use crate::logic::{parse_templates, SymbolTable};
use crate::train::{CoreStore, TrainedModel};
use crate::{Error, Result};

const MAGIC: &str = "SOFTFORGE-CKPT v1";

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMeta {
    pub task: String,
    pub mode: String,
    pub k: usize,
    pub d: usize,
    pub train_dictionary: bool,
    pub prune_eps: f64,
    pub max_new_facts: usize,
    pub preds: Vec<(String, u8)>,
    pub consts: Vec<String>,
    pub templates: Vec<String>,
}

pub fn meta_of(task: &str, mode: &str, model: &TrainedModel) -> CheckpointMeta {
    CheckpointMeta {
        task: task.to_string(),
        mode: mode.to_string(),
        k: model.chain.k,
        d: model.dict.d,
        train_dictionary: model.dict.entries().iter().any(|e| model.params.get(e.param).trainable),
        prune_eps: model.chain.prune_eps,
        max_new_facts: model.chain.max_new_facts,
        preds: model
            .symbols
            .preds()
            .iter()
            .map(|p| (p.name.clone(), p.arity))
            .collect(),
        consts: (0..model.symbols.num_consts())
            .map(|i| model.symbols.const_name(i as u32).to_string())
            .collect(),
        templates: model.rules.iter().map(|r| r.template.to_string()).collect(),
    }
}

pub fn save(path: &Path, meta: &CheckpointMeta, params: &ParamStore) -> Result<()> {
    let mut bytes = Vec::new();
    let mut header = String::new();
    header.push_str(MAGIC);
    header.push('\n');
    header.push_str(&format!("task {}\n", meta.task));
    header.push_str(&format!("mode {}\n", meta.mode));
    header.push_str(&format!("k {}\n", meta.k));
    header.push_str(&format!("d {}\n", meta.d));
    header.push_str(&format!("train_dictionary {}\n", meta.train_dictionary));
    header.push_str(&format!("prune_eps {:?}\n", meta.prune_eps));
    header.push_str(&format!("max_new_facts {}\n", meta.max_new_facts));
    for (name, arity) in &meta.preds {
        header.push_str(&format!("pred {} {}\n", arity, name));
    }
    for name in &meta.consts {
        header.push_str(&format!("const {}\n", name));
    }
    for t in &meta.templates {
        header.push_str(&format!("template {}\n", t));
    }
    header.push_str(&format!("params {}\n", params.len()));
    header.push_str("end\n");
    bytes.extend_from_slice(header.as_bytes());
    for (_, p) in params.iter() {
        bytes.extend_from_slice(&(p.name.len() as u32).to_le_bytes());
        bytes.extend_from_slice(p.name.as_bytes());
        bytes.extend_from_slice(&(p.values.len() as u32).to_le_bytes());
        for v in &p.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn header_err(msg: String) -> Error {
    Error::Checkpoint(msg)
}

pub fn load(path: &Path) -> Result<(CheckpointMeta, Vec<(String, Vec<f64>)>)> {
    let bytes = std::fs::read(path)?;
    let end_marker = b"end\n";
    let end = bytes
        .windows(end_marker.len())
        .position(|w| w == end_marker)
        .ok_or_else(|| header_err("missing header terminator".into()))?;
    let header = std::str::from_utf8(&bytes[..end])
        .map_err(|_| header_err("header is not utf-8".into()))?;
    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(header_err(format!("bad magic, expected '{}'", MAGIC)));
    }
    let mut meta = CheckpointMeta {
        task: String::new(),
        mode: String::new(),
        k: 0,
        d: 0,
        train_dictionary: false,
        prune_eps: 0.0,
        max_new_facts: 0,
        preds: Vec::new(),
        consts: Vec::new(),
        templates: Vec::new(),
    };
    let mut n_params = None;
    for line in lines {
        let (key, rest) = line
            .split_once(' ')
            .ok_or_else(|| header_err(format!("bad header line '{}'", line)))?;
        let field = |what: &str| header_err(format!("bad {} in header line '{}'", what, line));
        match key {
            "task" => meta.task = rest.to_string(),
            "mode" => meta.mode = rest.to_string(),
            "k" => meta.k = rest.parse().map_err(|_| field("k"))?,
            "d" => meta.d = rest.parse().map_err(|_| field("d"))?,
            "train_dictionary" => {
                meta.train_dictionary = rest.parse().map_err(|_| field("flag"))?;
            }
            "prune_eps" => meta.prune_eps = rest.parse().map_err(|_| field("prune_eps"))?,
            "max_new_facts" => {
                meta.max_new_facts = rest.parse().map_err(|_| field("max_new_facts"))?;
            }
            "pred" => {
                let (arity, name) = rest
                    .split_once(' ')
                    .ok_or_else(|| field("predicate"))?;
                meta.preds.push((name.to_string(), arity.parse().map_err(|_| field("arity"))?));
            }
            "const" => meta.consts.push(rest.to_string()),
            "template" => meta.templates.push(rest.to_string()),
            "params" => n_params = Some(rest.parse::<usize>().map_err(|_| field("count"))?),
            other => return Err(header_err(format!("unknown header key '{}'", other))),
        }
    }
    let n_params = n_params.ok_or_else(|| header_err("missing params count".into()))?;

    let mut cursor = end + end_marker.len();
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
        let slice = bytes
            .get(*cursor..*cursor + n)
            .ok_or_else(|| header_err("checkpoint is truncated".into()))?;
        *cursor += n;
        Ok(slice)
    };
    let mut stored = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        let len = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let name = std::str::from_utf8(take(&mut cursor, len)?)
            .map_err(|_| header_err("parameter name is not utf-8".into()))?
            .to_string();
        let dim = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap()) as usize;
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            values.push(f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()));
        }
        stored.push((name, values));
    }
    if cursor != bytes.len() {
        return Err(header_err("trailing bytes after the last parameter".into()));
    }
    Ok((meta, stored))
}

/// Rebuilds a model from a loaded checkpoint. The dictionary, rule slots
/// and core store are re-instantiated in the same order as in training, so
/// parameter names line up; every stored vector then overwrites its
/// parameter exactly.
pub fn restore(meta: &CheckpointMeta, stored: Vec<(String, Vec<f64>)>) -> Result<TrainedModel> {
    let mut symbols = SymbolTable::new();
    for (name, arity) in &meta.preds {
        symbols.intern_pred(name, *arity)?;
    }
    for name in &meta.consts {
        symbols.intern_const(name);
    }
    let templates = parse_templates(&meta.templates.join("\n"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut params = ParamStore::new();
    let dict =
        Dictionary::build(&symbols, meta.d, meta.train_dictionary, 1.0, &mut params, &mut rng)?;
    let rules = instantiate_rules(&templates, &dict, &mut symbols, 1.0, &mut params, &mut rng)?;
    let core = if meta.mode == "theory" {
        Some(CoreStore::build(&symbols, &mut params))
    } else {
        None
    };
    if stored.len() != params.len() {
        return Err(Error::Checkpoint(format!(
            "checkpoint has {} parameters, the rebuilt model has {}",
            stored.len(),
            params.len()
        )));
    }
    let by_name: HashMap<String, ParamId> =
        params.iter().map(|(id, p)| (p.name.clone(), id)).collect();
    for (name, values) in stored {
        let id = *by_name
            .get(&name)
            .ok_or_else(|| Error::Checkpoint(format!("unknown parameter '{}'", name)))?;
        let p = params.get_mut(id);
        if p.values.len() != values.len() {
            return Err(Error::Checkpoint(format!(
                "parameter '{}' has dimension {} in the checkpoint but {} in the model",
                name,
                values.len(),
                p.values.len()
            )));
        }
        p.values = values;
    }
    let chain = ChainConfig {
        k: meta.k,
        prune_eps: meta.prune_eps,
        max_new_facts: meta.max_new_facts,
    };
    Ok(TrainedModel { symbols, dict, rules, params, core, chain })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{builtin_task, theory_task};
    use crate::train::{train_ilp, train_theory, TrainConfig};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("softforge-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn assert_bitwise_equal(a: &ParamStore, b: &ParamStore) {
        assert_eq!(a.len(), b.len());
        for ((_, pa), (_, pb)) in a.iter().zip(b.iter()) {
            assert_eq!(pa.name, pb.name);
            assert_eq!(pa.values.len(), pb.values.len());
            for (va, vb) in pa.values.iter().zip(&pb.values) {
                assert_eq!(va.to_bits(), vb.to_bits(), "parameter {} drifted", pa.name);
            }
        }
    }

    #[test]
    fn ilp_round_trip_is_bit_exact() {
        let task = builtin_task("father").unwrap();
        let mut cfg = TrainConfig::default().for_task(&task);
        cfg.epochs = 3;
        let (_, model) = train_ilp(&task, &cfg, 0).unwrap();
        let path = tmp("father.ckpt");
        let meta = meta_of("father", "ilp", &model);
        save(&path, &meta, &model.params).unwrap();
        let (loaded_meta, stored) = load(&path).unwrap();
        assert_eq!(meta, loaded_meta);
        let restored = restore(&loaded_meta, stored).unwrap();
        assert_bitwise_equal(&model.params, &restored.params);
        let a: Vec<String> = model.decoded().unwrap().iter().map(|d| d.to_string()).collect();
        let b: Vec<String> = restored.decoded().unwrap().iter().map(|d| d.to_string()).collect();
        assert_eq!(a, b);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn theory_round_trip_restores_the_core() {
        let (task, _) = theory_task("kinship").unwrap();
        let mut cfg = TrainConfig::default().for_task(&task);
        cfg.epochs = 3;
        let (_, model) = train_theory(&task, &cfg, 1).unwrap();
        let path = tmp("kinship.ckpt");
        save(&path, &meta_of("kinship", "theory", &model), &model.params).unwrap();
        let (meta, stored) = load(&path).unwrap();
        let restored = restore(&meta, stored).unwrap();
        assert_bitwise_equal(&model.params, &restored.params);
        let a = model.core.as_ref().unwrap().induced(&model.params);
        let b = restored.core.as_ref().unwrap().induced(&restored.params);
        assert_eq!(a, b);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn bad_files_are_checkpoint_errors() {
        let path = tmp("garbage.ckpt");
        std::fs::write(&path, b"not a checkpoint\nend\n").unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));

        let task = builtin_task("father").unwrap();
        let mut cfg = TrainConfig::default().for_task(&task);
        cfg.epochs = 1;
        let (_, model) = train_ilp(&task, &cfg, 0).unwrap();
        save(&path, &meta_of("father", "ilp", &model), &model.params).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn restore_rejects_mismatched_parameters() {
        let task = builtin_task("father").unwrap();
        let mut cfg = TrainConfig::default().for_task(&task);
        cfg.epochs = 1;
        let (_, model) = train_ilp(&task, &cfg, 0).unwrap();
        let meta = meta_of("father", "ilp", &model);
        let good: Vec<(String, Vec<f64>)> = model
            .params
            .iter()
            .map(|(_, p)| (p.name.clone(), p.values.clone()))
            .collect();

        let mut renamed = good.clone();
        renamed[0].0 = "nonsense".into();
        assert!(matches!(restore(&meta, renamed), Err(Error::Checkpoint(_))));

        let mut short = good.clone();
        short.pop();
        assert!(matches!(restore(&meta, short), Err(Error::Checkpoint(_))));

        let mut fat = good;
        fat[0].1.push(0.0);
        assert!(matches!(restore(&meta, fat), Err(Error::Checkpoint(_))));
    }
}
