//! Flat `key = value` run configuration files. Keys are exactly the
//! training config field names; the CLI can override any of them.

use std::path::Path;

use crate::train::TrainConfig;
use crate::{Error, Result};

/// Applies every assignment in the file on top of `cfg`, in order.
/// `#` starts a comment, blank lines are skipped.
pub fn apply_file(cfg: &mut TrainConfig, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    apply_str(cfg, &text)
}

pub fn apply_str(cfg: &mut TrainConfig, text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("config line {}: expected key = value, got '{}'", i + 1, line))
        })?;
        cfg.set(key.trim(), value)
            .map_err(|e| Error::Config(format!("config line {}: {}", i + 1, e)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_assignments_comments_and_blanks() {
        let mut cfg = TrainConfig::default();
        apply_str(
            &mut cfg,
            "# run setup\n\nepochs = 250\nlr=0.01   # smaller steps\nnoise = true\noptimizer = sgd\n",
        )
        .unwrap();
        assert_eq!(cfg.epochs, 250);
        assert!((cfg.lr - 0.01).abs() < 1e-12);
        assert!(cfg.noise);
        assert_eq!(cfg.optimizer, "sgd");
    }

    #[test]
    fn later_assignments_win() {
        let mut cfg = TrainConfig::default();
        apply_str(&mut cfg, "seed = 1\nseed = 2\n").unwrap();
        assert_eq!(cfg.seed, 2);
    }

    #[test]
    fn unknown_keys_and_bad_lines_are_config_errors() {
        let mut cfg = TrainConfig::default();
        let err = apply_str(&mut cfg, "epochs = 10\nwidgets = 3\n").unwrap_err();
        match err {
            Error::Config(msg) => {
                assert!(msg.contains("line 2"), "{}", msg);
                assert!(msg.contains("widgets"), "{}", msg);
            }
            other => panic!("expected a config error, got {:?}", other),
        }
        assert!(matches!(
            apply_str(&mut cfg, "epochs 10\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            apply_str(&mut cfg, "lr = fast\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join("softforge-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "k = 3\nlambda = 0.02\n").unwrap();
        let mut cfg = TrainConfig::default();
        apply_file(&mut cfg, &path).unwrap();
        assert_eq!(cfg.k, 3);
        assert!((cfg.lambda - 0.02).abs() < 1e-12);
        std::fs::remove_file(&path).unwrap();
    }
}
