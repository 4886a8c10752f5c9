//! Run configuration: a TOML file with one table per stage, plus
//! `section.key=value` overrides from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use agefair_core::detector::HyperParams;
use agefair_core::evaluation::EvalConfig;
use agefair_core::matching::MatchConfig;
use agefair_core::quality::QualityConfig;
use agefair_core::CurationConfig;
use anyhow::{anyhow, bail, Context as _, Result};
use serde::{Deserialize, Serialize};

use crate::exit::{missing_input, usage};

/// Input and output locations. Relative entries resolve against the
/// directory of the config file that names them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: Option<PathBuf>,
    /// Face descriptors of real source images.
    pub sources: Option<PathBuf>,
    /// Face descriptors of target video frames.
    pub targets: Option<PathBuf>,
    /// Reference/generated image pair list.
    pub pairs: Option<PathBuf>,
    /// Rows produced by the generator for accepted swaps.
    pub synthetic_manifest: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

/// Names written into score and metric files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Labels {
    pub model_id: String,
    pub train_set: String,
    pub test_set: String,
}

impl Default for Labels {
    fn default() -> Self {
        Self {
            model_id: "reference".into(),
            train_set: "Age-Diverse".into(),
            test_set: "Age-Diverse".into(),
        }
    }
}

/// Settings for the reference detector beyond the optimiser itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Training {
    /// Share of the training split kept for fitting; the rest is the
    /// early-stopping validation set.
    pub fit_ratio: f64,
}

impl Default for Training {
    fn default() -> Self {
        Self { fit_ratio: 0.8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub curation: CurationConfig,
    pub matching: MatchConfig,
    pub quality: QualityConfig,
    pub detector: HyperParams,
    pub training: Training,
    pub evaluation: EvalConfig,
    pub labels: Labels,
}

/// Sections whose keys come from library structs without
/// `deny_unknown_fields`; checked against their defaults instead.
const OPEN_SECTIONS: [&str; 5] = ["curation", "matching", "quality", "detector", "evaluation"];

impl RunConfig {
    /// Loads `path` (if any), applies overrides, resolves relative paths
    /// and validates every section.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                if !p.exists() {
                    return Err(missing_input(p));
                }
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                text.parse::<toml::Table>()
                    .map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        check_keys(&table)?;
        let mut cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| usage(format!("invalid configuration: {e}")))?;
        if let Some(dir) = path.and_then(Path::parent) {
            cfg.paths.resolve(dir);
        }
        cfg.set_seed(cfg.seed);
        cfg.validate()?;
        Ok(cfg)
    }

    /// The run seed feeds every stochastic stage.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.curation.seed = seed;
        self.detector.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let r = self
            .curation
            .validate()
            .and_then(|_| self.matching.validate())
            .and_then(|_| self.quality.validate())
            .and_then(|_| self.detector.validate())
            .and_then(|_| self.evaluation.validate());
        r.map_err(|e| usage(e.to_string()))?;
        if !(self.training.fit_ratio > 0.0 && self.training.fit_ratio < 1.0) {
            return Err(usage(format!(
                "training.fit_ratio must lie in (0, 1), got {}",
                self.training.fit_ratio
            )));
        }
        Ok(())
    }

    /// Effective configuration, for provenance in output trees.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.manifest,
            &mut self.sources,
            &mut self.targets,
            &mut self.pairs,
            &mut self.synthetic_manifest,
            &mut self.features,
            &mut self.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies one `key=value` or `section.key=value` override.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| usage(format!("override {spec:?} is not of the form section.key=value")))?;
    let value = parse_value(raw.trim());
    match key.trim().split_once('.') {
        None => {
            table.insert(key.trim().to_string(), value);
        }
        Some((section, field)) => {
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let sub = entry
                .as_table_mut()
                .ok_or_else(|| usage(format!("{section} is not a section")))?;
            sub.insert(field.to_string(), value);
        }
    }
    Ok(())
}

fn check_keys(table: &toml::Table) -> Result<()> {
    let defaults = toml::Table::try_from(RunConfig::default()).map_err(|e| anyhow!(e))?;
    for section in OPEN_SECTIONS {
        let Some(given) = table.get(section) else { continue };
        let given = given
            .as_table()
            .ok_or_else(|| usage(format!("{section} must be a section")))?;
        let known = defaults[section].as_table().expect("section");
        for key in given.keys() {
            if !known.contains_key(key) {
                bail!(usage(format!("unknown key {section}.{key}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_typed_values() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "seed=7").unwrap();
        apply_override(&mut t, "detector.hidden_layers=[4, 2]").unwrap();
        apply_override(&mut t, "evaluation.pauc_normalization=mcclish").unwrap();
        apply_override(&mut t, "labels.model_id=mlp").unwrap();
        let cfg: RunConfig = t.try_into().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.detector.hidden_layers, vec![4, 2]);
        assert_eq!(cfg.labels.model_id, "mlp");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::load(None, &["quality.min_ssm=0.3".into()]).is_err());
        assert!(RunConfig::load(None, &["paths.nope=x".into()]).is_err());
        assert!(RunConfig::load(None, &["curation.split_ratio=1.5".into()]).is_err());
        assert!(RunConfig::load(None, &["novalue".into()]).is_err());
    }

    #[test]
    fn seed_reaches_every_stage() {
        let cfg = RunConfig::load(None, &["seed=42".into()]).unwrap();
        assert_eq!((cfg.curation.seed, cfg.detector.seed), (42, 42));
    }

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }
}
