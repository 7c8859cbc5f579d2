//! Run configuration: defaults, overridden by a flat `key = value`
//! file, then by `--set key=value` flags. `VULNRANK_SEED` supplies the seed
//! only when neither the file nor a flag does.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vulnrank_core::textpipe::PipelineConfig;
use vulnrank_eval::{sub_seed, ExperimentConfig};
use vulnrank_neural::{AdamaxConfig, Mode, ModelConfig, TrainConfig};

use crate::CliError;

pub const SEED_ENV: &str = "VULNRANK_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub slice_len: usize,
    pub gadget_len: usize,
    pub embed_dim: usize,
    pub w2v_window: usize,
    pub w2v_epochs: usize,
    pub w2v_negatives: usize,
    pub w2v_min_count: usize,
    pub w2v_lr: f32,
    pub keep: Vec<String>,
    pub filters: usize,
    pub kernel_width: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dense: usize,
    pub dropout: f64,
    pub mode: Mode,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub folds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        let m = ModelConfig::default();
        let t = TrainConfig::default();
        RunConfig {
            seed: 0,
            slice_len: p.slice_len,
            gadget_len: p.gadget_len,
            embed_dim: p.embed_dim,
            w2v_window: p.w2v_window,
            w2v_epochs: p.w2v_epochs,
            w2v_negatives: p.w2v_negatives,
            w2v_min_count: p.w2v_min_count,
            w2v_lr: p.w2v_lr,
            keep: p.keep,
            filters: m.filters,
            kernel_width: m.kernel_width,
            hidden: m.hidden,
            layers: m.layers,
            dense: m.dense,
            dropout: m.dropout,
            mode: m.mode,
            lr: t.adamax.lr,
            beta1: t.adamax.beta1,
            beta2: t.adamax.beta2,
            eps: t.adamax.eps,
            batch_size: t.batch_size,
            epochs: t.epochs,
            folds: 5,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| CliError::Usage(format!("bad value {value:?} for {key}: {e}")))
}

impl RunConfig {
    /// Sets one field by name. Returns `true` for `seed`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool, CliError> {
        let v = value.trim();
        match key.trim() {
            "seed" => {
                self.seed = parse(key, v)?;
                return Ok(true);
            }
            "slice_len" => self.slice_len = parse(key, v)?,
            "gadget_len" => self.gadget_len = parse(key, v)?,
            "embed_dim" => self.embed_dim = parse(key, v)?,
            "w2v_window" => self.w2v_window = parse(key, v)?,
            "w2v_epochs" => self.w2v_epochs = parse(key, v)?,
            "w2v_negatives" => self.w2v_negatives = parse(key, v)?,
            "w2v_min_count" => self.w2v_min_count = parse(key, v)?,
            "w2v_lr" => self.w2v_lr = parse(key, v)?,
            "keep" => self.keep = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
            "filters" => self.filters = parse(key, v)?,
            "kernel_width" => self.kernel_width = parse(key, v)?,
            "hidden" => self.hidden = parse(key, v)?,
            "layers" => self.layers = parse(key, v)?,
            "dense" => self.dense = parse(key, v)?,
            "dropout" => self.dropout = parse(key, v)?,
            "mode" => self.mode = v.parse().map_err(CliError::Usage)?,
            "lr" => self.lr = parse(key, v)?,
            "beta1" => self.beta1 = parse(key, v)?,
            "beta2" => self.beta2 = parse(key, v)?,
            "eps" => self.eps = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "epochs" => self.epochs = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(false)
    }

    /// Applies `key = value` lines; `#` starts a comment. Returns whether the
    /// text set the seed.
    pub fn apply_text(&mut self, text: &str) -> Result<bool, CliError> {
        let mut seeded = false;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", no + 1)))?;
            seeded |= self.set(k, v)?;
        }
        Ok(seeded)
    }

    /// Defaults, then the file, then `overrides` (`key=value`), then the
    /// environment seed if nothing else set one.
    pub fn resolve(file: Option<&Path>, overrides: &[String], env_seed: Option<&str>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seeded = false;
        if let Some(path) = file {
            let text = crate::io::read_to_string(path)?;
            seeded |= cfg.apply_text(&text)?;
        }
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {o:?}")))?;
            seeded |= cfg.set(k, v)?;
        }
        if !seeded {
            if let Some(s) = env_seed {
                cfg.seed = parse(SEED_ENV, s.trim())?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.pipeline().validate().map_err(CliError::Usage)?;
        self.model().validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if self.batch_size == 0 || self.folds < 2 {
            return Err(CliError::Usage("batch_size must be ≥ 1 and folds ≥ 2".into()));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            slice_len: self.slice_len,
            gadget_len: self.gadget_len,
            embed_dim: self.embed_dim,
            w2v_window: self.w2v_window,
            w2v_epochs: self.w2v_epochs,
            w2v_negatives: self.w2v_negatives,
            w2v_min_count: self.w2v_min_count,
            w2v_lr: self.w2v_lr,
            seed: sub_seed(self.seed, "w2v"),
            keep: self.keep.clone(),
        }
    }

    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            embed_dim: self.embed_dim,
            filters: self.filters,
            kernel_width: self.kernel_width,
            hidden: self.hidden,
            layers: self.layers,
            dense: self.dense,
            dropout: self.dropout,
            mode: self.mode,
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: sub_seed(self.seed, "shuffle"),
            adamax: AdamaxConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.eps },
        }
    }

    pub fn init_seed(&self) -> u64 {
        sub_seed(self.seed, "init")
    }

    pub fn corpus_seed(&self) -> u64 {
        sub_seed(self.seed, "corpus")
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig { pipeline: self.pipeline(), model: self.model(), train: self.train() }
    }

    /// Flat text form accepted by [`apply_text`](Self::apply_text).
    pub fn to_text(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        let mut out = String::new();
        for (k, val) in v.as_object().expect("struct") {
            let s = match val {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Array(a) => a.iter().filter_map(|x| x.as_str()).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            out.push_str(&format!("{k} = {s}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_defaults() {
        let c = RunConfig::default();
        assert_eq!((c.lr, c.batch_size, c.epochs, c.dropout, c.embed_dim), (0.002, 64, 60, 0.1, 64));
        assert_eq!((c.slice_len, c.gadget_len, c.folds, c.mode), (700, 900, 5, Mode::Combined));
    }

    #[test]
    fn precedence_flag_over_file_over_env() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# desk\nepochs = 7\nmode = cnn_only\nkeep = memcpy, strcpy\n").unwrap();
        let c = RunConfig::resolve(Some(&path), &["epochs=9".into()], Some("42")).unwrap();
        assert_eq!((c.epochs, c.mode, c.seed), (9, Mode::CnnOnly, 42));
        assert_eq!(c.keep, ["memcpy", "strcpy"]);
        let c = RunConfig::resolve(Some(&path), &["seed=3".into()], Some("42")).unwrap();
        assert_eq!(c.seed, 3);
        std::fs::write(&path, "seed = 5\n").unwrap();
        assert_eq!(RunConfig::resolve(Some(&path), &[], Some("42")).unwrap().seed, 5);
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig { keep: vec!["memcpy".into()], mode: Mode::BigruOnly, w2v_lr: 0.03, ..RunConfig::default() };
        c.eps = 1e-7;
        let mut back = RunConfig::default();
        back.apply_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_are_usage() {
        let mut c = RunConfig::default();
        assert!(matches!(c.set("nope", "1"), Err(CliError::Usage(_))));
        assert!(matches!(c.set("epochs", "x"), Err(CliError::Usage(_))));
        assert!(c.apply_text("epochs 3").is_err());
        assert!(RunConfig::resolve(None, &["kernel_width=4".into()], None).is_err());
    }
}
