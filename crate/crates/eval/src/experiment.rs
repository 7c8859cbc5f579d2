//! Cross-validated experiment runs: within- or combined-project, optional
//! length sweep, optional mode ablation over several seeds.

use serde::{Deserialize, Serialize};
use vulnrank_core::context::VulnKind;
use vulnrank_core::textpipe::PipelineConfig;
use vulnrank_neural::{mix_seed, predict, train, EpochStats, Mode, ModelConfig, RankModel, TrainConfig};

use crate::kfold::{fold_indices, kfold_split};
use crate::metrics::{rank, MetricReport};
use crate::pipeline::Dataset;
use crate::synth::Corpus;
use crate::{sub_seed, EvalError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    WithinProject(String),
    CombinedProject,
}

/// Minimum warning count for a within-project run.
pub const WITHIN_PROJECT_FLOOR: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub setting: Setting,
    pub folds: usize,
    /// `None` keeps both kinds.
    pub kind: Option<VulnKind>,
    /// `(slice_len, gadget_len)` pairs; `None` uses the pipeline lengths.
    pub sweep: Option<Vec<(usize, usize)>>,
    /// One row per mode; a single entry is an ordinary run.
    pub modes: Vec<Mode>,
    /// Model seeds (initialization, shuffling, dropout). Folds and the
    /// embedding table depend only on the pipeline seed.
    pub seeds: Vec<u64>,
    pub within_floor: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            setting: Setting::CombinedProject,
            folds: 5,
            kind: None,
            sweep: None,
            modes: vec![Mode::Combined],
            seeds: vec![0],
            within_floor: WITHIN_PROJECT_FLOOR,
        }
    }
}

impl ExperimentPlan {
    pub fn ablation() -> Self {
        ExperimentPlan { modes: Mode::ALL.to_vec(), ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pipeline: PipelineConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

/// One (length pair, mode, seed) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub slice_len: usize,
    pub gadget_len: usize,
    pub mode: Mode,
    pub seed: u64,
    pub folds: Vec<MetricReport>,
    pub mean: MetricReport,
    pub histories: Vec<Vec<EpochStats>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub warnings: usize,
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    pub fn csv(&self) -> String {
        let mut out = format!("slice_len,gadget_len,mode,seed,{}\n", MetricReport::csv_header());
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.slice_len, r.gadget_len, r.mode, r.seed, r.mean.csv_fields()));
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "slice_len={} gadget_len={} mode={} seed={}\n{}\n",
                r.slice_len,
                r.gadget_len,
                r.mode,
                r.seed,
                r.mean.table()
            ));
        }
        out
    }

    /// Mean R@K of a mode over all seeds and length pairs.
    pub fn mode_recall(&self, mode: Mode, k: u32) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.mode == mode).filter_map(|r| r.mean.recall(k)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Trains on `train_idx`, scores `test_idx` and returns the metrics together
/// with the training history.
pub fn run_fold(
    samples: &[vulnrank_neural::Sample<f32>],
    train_idx: &[usize],
    test_idx: &[usize],
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    seed: u64,
) -> Result<(MetricReport, Vec<EpochStats>), EvalError> {
    let train_set: Vec<_> = train_idx.iter().map(|&i| samples[i].clone()).collect();
    let test_set: Vec<_> = test_idx.iter().map(|&i| samples[i].clone()).collect();
    let mut model = RankModel::<f32>::new(model_cfg.clone(), sub_seed(seed, "init"))?;
    let tc = TrainConfig { seed: sub_seed(seed, "shuffle"), ..train_cfg.clone() };
    let history = train(&mut model, &train_set, &tc)?;
    let scores: Vec<f64> = predict(&model, &test_set)?.iter().map(|p| p[1] as f64).collect();
    let ranked = rank(&scores, test_idx)?;
    let tps: Vec<usize> = test_idx.iter().copied().filter(|&i| samples[i].label == 1).collect();
    Ok((MetricReport::compute(&ranked, &tps), history))
}

pub fn run_experiment(
    corpus: &Corpus,
    plan: &ExperimentPlan,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult, EvalError> {
    let warnings: Vec<_> = corpus
        .warnings
        .iter()
        .filter(|w| plan.kind.is_none_or(|k| w.kind == k))
        .filter(|w| match &plan.setting {
            Setting::WithinProject(p) => &w.project == p,
            Setting::CombinedProject => true,
        })
        .cloned()
        .collect();
    if let Setting::WithinProject(p) = &plan.setting {
        if warnings.len() < plan.within_floor {
            return Err(EvalError::ProjectTooSmall {
                project: p.clone(),
                warnings: warnings.len(),
                floor: plan.within_floor,
            });
        }
    }
    let data = Dataset::build(corpus, &warnings, &cfg.pipeline)?;
    let labels = data.labels()?;
    let folds = kfold_split(&labels, plan.folds, sub_seed(cfg.pipeline.seed, "folds"))?;
    let pairs = plan.sweep.clone().unwrap_or_else(|| vec![(cfg.pipeline.slice_len, cfg.pipeline.gadget_len)]);
    let mut rows = Vec::new();
    for &(slice_len, gadget_len) in &pairs {
        let samples = data.samples(slice_len, gadget_len);
        for &mode in &plan.modes {
            let model_cfg = ModelConfig { mode, embed_dim: cfg.pipeline.embed_dim, ..cfg.model.clone() };
            for &seed in &plan.seeds {
                let mut reports = Vec::with_capacity(plan.folds);
                let mut histories = Vec::with_capacity(plan.folds);
                for f in 0..plan.folds {
                    let (train_idx, test_idx) = fold_indices(&folds, f);
                    let (report, history) =
                        run_fold(&samples, &train_idx, &test_idx, &model_cfg, &cfg.train, mix_seed(seed, f as u64))?;
                    reports.push(report);
                    histories.push(history);
                }
                let mean = MetricReport::mean(&reports).expect("at least two folds");
                rows.push(ResultRow { slice_len, gadget_len, mode, seed, folds: reports, mean, histories });
            }
        }
    }
    Ok(ExperimentResult { warnings: warnings.len(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic_corpus, SynthConfig};

    fn small() -> (Corpus, ExperimentConfig) {
        let corpus = generate_synthetic_corpus(&SynthConfig { files: 40, tp_rate: 0.25, ..SynthConfig::default() });
        let cfg = ExperimentConfig {
            pipeline: PipelineConfig { embed_dim: 4, w2v_epochs: 1, slice_len: 16, gadget_len: 16, ..PipelineConfig::default() },
            model: ModelConfig { filters: 2, hidden: 2, layers: 1, dense: 4, ..ModelConfig::default() },
            train: TrainConfig { epochs: 1, batch_size: 8, ..TrainConfig::default() },
        };
        (corpus, cfg)
    }

    #[test]
    fn sweep_and_ablation_rows() {
        let (corpus, cfg) = small();
        let plan = ExperimentPlan { folds: 2, sweep: Some(vec![(8, 8), (8, 12)]), ..ExperimentPlan::ablation() };
        let r = run_experiment(&corpus, &plan, &cfg).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert!(r.rows.iter().any(|row| row.mode == Mode::Combined));
        assert_eq!(r.rows[1].gadget_len, 8);
        assert_eq!(r.rows[3].gadget_len, 12);
        assert_eq!(r.csv().lines().count(), 7);
        assert_eq!(r, run_experiment(&corpus, &plan, &cfg).unwrap());
    }

    #[test]
    fn within_project_floor() {
        let (corpus, cfg) = small();
        let plan = ExperimentPlan { setting: Setting::WithinProject("proj0".into()), ..ExperimentPlan::default() };
        assert!(matches!(run_experiment(&corpus, &plan, &cfg), Err(EvalError::ProjectTooSmall { floor: 200, .. })));
        let plan = ExperimentPlan { within_floor: 5, folds: 2, ..plan };
        let r = run_experiment(&corpus, &plan, &cfg).unwrap();
        assert_eq!(r.warnings, corpus.warnings.iter().filter(|w| w.project == "proj0").count());
    }

    #[test]
    fn kind_filter() {
        let (corpus, cfg) = small();
        let plan = ExperimentPlan { kind: Some(VulnKind::Npd), folds: 2, ..ExperimentPlan::default() };
        let r = run_experiment(&corpus, &plan, &cfg).unwrap();
        assert_eq!(r.warnings, corpus.warnings.iter().filter(|w| w.kind == VulnKind::Npd).count());
    }
}
