//! Run configuration, read from TOML.
//!
//! ```toml
//! name = "forest"
//! model = "rf"                 # passive | lstm | gbt | rf | model_a
//! train_window = 250
//! test_window = 50             # forced to 1 for model_a
//! master_seed = 42
//! cost_per_side = 0.0
//! benchmark = "passive"
//! out_dir = "runs/forest"
//!
//! [paths]
//! es_csv = "data/es.csv"
//! vix_csv = "data/vix.csv"
//! rates_csv = "data/rates.csv"
//!
//! [range]                      # optional, inclusive
//! start = "2018-01-01"
//! end = "2023-12-31"
//!
//! [rf]                         # optional; dotted keys also work: rf.n_trees = 200
//! n_trees = 200
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::signals::{GbtSpec, LstmSpec, ModelASpec, ModelKind, ModelParams, RfSpec};

pub const CONFIG_FORMAT: &str = "toml/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub es_csv: PathBuf,
    pub vix_csv: PathBuf,
    pub rates_csv: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateRange {
    pub start: Option<String>,
    pub end: Option<String>,
}

impl DateRange {
    pub fn bounds(&self) -> Result<(Option<NaiveDate>, Option<NaiveDate>), String> {
        let parse = |s: &Option<String>, what: &str| {
            s.as_deref()
                .map(|v| {
                    NaiveDate::parse_from_str(v, "%Y-%m-%d")
                        .map_err(|e| format!("range.{what} `{v}`: {e}"))
                })
                .transpose()
        };
        Ok((parse(&self.start, "start")?, parse(&self.end, "end")?))
    }
}

fn default_train_window() -> usize {
    250
}

fn default_test_window() -> usize {
    50
}

fn default_benchmark() -> ModelKind {
    ModelKind::Passive
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelKind,
    #[serde(default = "default_train_window")]
    pub train_window: usize,
    #[serde(default = "default_test_window")]
    pub test_window: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub cost_per_side: f64,
    #[serde(default = "default_benchmark")]
    pub benchmark: ModelKind,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub paths: Paths,
    #[serde(default)]
    pub range: DateRange,
    #[serde(default)]
    pub lstm: LstmSpec,
    #[serde(default)]
    pub gbt: GbtSpec,
    #[serde(default)]
    pub rf: RfSpec,
    #[serde(default)]
    pub model_a: ModelASpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [
            &mut cfg.paths.es_csv,
            &mut cfg.paths.vix_csv,
            &mut cfg.paths.rates_csv,
            &mut cfg.out_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("name must not be empty".into());
        }
        if self.train_window == 0 || self.test_window == 0 {
            return Err("train_window and test_window must be positive".into());
        }
        if !(self.cost_per_side >= 0.0 && self.cost_per_side.is_finite()) {
            return Err(format!("cost_per_side {} must be non-negative", self.cost_per_side));
        }
        self.range.bounds()?;
        Ok(())
    }

    /// Test window after the daily-refit rule for stateful models.
    pub fn effective_test_window(&self, kind: ModelKind) -> usize {
        if kind.carries_state() {
            1
        } else {
            self.test_window
        }
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            lstm: self.lstm.clone(),
            gbt: self.gbt.clone(),
            rf: self.rf.clone(),
            model_a: self.model_a.clone(),
        }
    }

    /// The config with the daily-refit rule applied.
    pub fn resolved(&self) -> Self {
        Self {
            test_window: self.effective_test_window(self.model),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
model = "model_a"
[paths]
es_csv = "es.csv"
vix_csv = "vix.csv"
rates_csv = "rates.csv"
"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.train_window, 250);
        assert_eq!(cfg.benchmark, ModelKind::Passive);
        assert_eq!(cfg.resolved().test_window, 1);
        assert_eq!(cfg.lstm, LstmSpec::default());
    }

    #[test]
    fn dotted_keys_set_hyperparameters() {
        let text = format!("{MINIMAL}\n[rf]\nn_trees = 7\nfeatures_per_split = \"all\"\n");
        let text = text.replacen("model = \"model_a\"", "model = \"rf\"\nlstm.hidden_dim = 4", 1);
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.rf.n_trees, 7);
        assert_eq!(cfg.lstm.hidden_dim, 4);
        assert_eq!(cfg.resolved().test_window, 50);
    }

    #[test]
    fn unknown_keys_and_models_are_rejected() {
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("model_a", "svm")).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{MINIMAL}\n[lstm]\nwidth = 3\n")).is_err());
        let bad_range = format!("{MINIMAL}\n[range]\nstart = \"2020-13-01\"\n");
        assert!(ExperimentConfig::from_toml(&bad_range).is_err());
    }
}
