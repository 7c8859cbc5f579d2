use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vulnrank_core::context::{AnalyzedFile, ContextDocument, VulnKind, Warning};
use vulnrank_core::flowgraphs::{cfg_dot, pdg_dot};
use vulnrank_core::frontend::dump_unit;
use vulnrank_eval::{
    generate_synthetic_corpus, rank, run_experiment, Dataset, ExperimentPlan, MetricReport, Setting, SynthConfig,
    WITHIN_PROJECT_FLOOR,
};
use vulnrank_neural::{gradcheck, predict, train, Mode, ModelConfig, RankModel, Sample, Tensor};

use crate::checkpoint::Checkpoint;
use crate::config::{RunConfig, SEED_ENV};
use crate::io::{self, RankedRow};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "vulnrank", version, about = "Rank static-analysis warnings by their likelihood of being real")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set epochs=20`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Master seed; wins over the file and the environment.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Root that warning file paths are relative to.
    #[arg(long)]
    pub src: PathBuf,
    /// Warning set, one JSON record per line.
    #[arg(long)]
    pub warnings: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus (`<out>/src/...`) and its warnings (`<out>/warnings.jsonl`).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 600)]
        files: usize,
        #[arg(long, default_value_t = 0.17)]
        tp_rate: f64,
        #[arg(long, default_value_t = 3)]
        projects: usize,
    },
    /// Write the slice and gadget of every warning as JSON lines.
    Extract {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train word2vec on the extracted contexts and write the table as text.
    Embed {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on every labeled warning and write a checkpoint.
    Train {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch loss and accuracy.
        #[arg(long)]
        loss_csv: Option<PathBuf>,
    },
    /// Score warnings with a checkpoint and write the ranked list.
    Rank {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision and recall at K% of a ranked list against labeled warnings.
    Eval {
        #[arg(long)]
        ranked: PathBuf,
        #[arg(long)]
        warnings: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated experiment, optionally with a length sweep or ablation.
    Experiment {
        #[command(flatten)]
        inputs: Inputs,
        /// Within-project run on this project instead of the combined setting.
        #[arg(long)]
        within: Option<String>,
        #[arg(long, default_value_t = WITHIN_PROJECT_FLOOR)]
        within_floor: usize,
        #[arg(long)]
        kind: Option<VulnKind>,
        /// `SLICExGADGET` pairs, comma separated, e.g. `300x300,300x700`.
        #[arg(long)]
        sweep: Option<String>,
        /// Run all three model modes.
        #[arg(long)]
        ablation: bool,
        /// Model seeds, comma separated; defaults to the master seed.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference check of every parameter tensor of a tiny model.
    Gradcheck {
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Print the AST, or the CFG or PDG of one function as DOT.
    Inspect {
        file: PathBuf,
        #[arg(long)]
        ast: bool,
        #[arg(long, value_name = "FUNCTION")]
        cfg: Option<String>,
        #[arg(long, value_name = "FUNCTION")]
        pdg: Option<String>,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vulnrank: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.overrides.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    let env = std::env::var(SEED_ENV).ok();
    let cfg = || RunConfig::resolve(cli.config.as_deref(), &overrides, env.as_deref());
    match cli.command {
        Command::Synth { out, files, tp_rate, projects } => synth(&cfg()?, &out, files, tp_rate, projects),
        Command::Extract { inputs, out } => extract(&cfg()?, &inputs, &out),
        Command::Embed { inputs, out } => embed(&cfg()?, &inputs, &out),
        Command::Train { inputs, out, loss_csv } => train_cmd(&cfg()?, &inputs, &out, loss_csv.as_deref()),
        Command::Rank { inputs, model, out } => rank_cmd(&inputs, &model, &out),
        Command::Eval { ranked, warnings, out } => eval_cmd(&ranked, &warnings, out.as_deref()),
        Command::Experiment { inputs, within, within_floor, kind, sweep, ablation, seeds, out } => {
            let cfg = cfg()?;
            let plan = ExperimentPlan {
                setting: within.map_or(Setting::CombinedProject, Setting::WithinProject),
                folds: cfg.folds,
                kind,
                sweep: sweep.as_deref().map(parse_sweep).transpose()?,
                modes: if ablation { Mode::ALL.to_vec() } else { vec![cfg.mode] },
                seeds: match seeds {
                    Some(s) => parse_list(&s)?,
                    None => vec![cfg.seed],
                },
                within_floor,
            };
            experiment(&cfg, &inputs, &plan, out.as_deref())
        }
        Command::Gradcheck { tolerance } => gradcheck_cmd(cfg()?.seed, tolerance),
        Command::Inspect { file, ast, cfg, pdg } => inspect(&file, ast, cfg.as_deref(), pdg.as_deref()),
    }
}

fn parse_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| CliError::Usage(format!("bad seed list {s:?}"))))
        .collect()
}

pub fn parse_sweep(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .map(|pair| {
            let bad = || CliError::Usage(format!("bad sweep pair {pair:?}, expected SLICExGADGET"));
            let (a, b) = pair.trim().split_once('x').ok_or_else(bad)?;
            let (a, b) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a == 0 || b == 0 {
                return Err(bad());
            }
            Ok((a, b))
        })
        .collect()
}

fn load(inputs: &Inputs) -> Result<vulnrank_eval::Corpus, CliError> {
    let ws = io::read_warnings(&inputs.warnings)?;
    io::load_corpus(&inputs.src, ws)
}

fn synth(cfg: &RunConfig, out: &Path, files: usize, tp_rate: f64, projects: usize) -> Result<(), CliError> {
    if !(tp_rate > 0.0 && tp_rate < 1.0) || files == 0 || projects == 0 {
        return Err(CliError::Usage("need files ≥ 1, projects ≥ 1 and tp_rate in (0, 1)".into()));
    }
    let corpus = generate_synthetic_corpus(&SynthConfig { files, tp_rate, projects, seed: cfg.corpus_seed() });
    io::save_corpus(out, &corpus)?;
    let tps = corpus.warnings.iter().filter(|w| w.label.is_some_and(|l| l.is_tp())).count();
    println!("wrote {} files, {} warnings ({tps} TP) to {}", corpus.files.len(), corpus.warnings.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct Extracted<'a> {
    id: usize,
    slice: &'a ContextDocument,
    gadget: &'a ContextDocument,
}

fn extract(_cfg: &RunConfig, inputs: &Inputs, out: &Path) -> Result<(), CliError> {
    let corpus = load(inputs)?;
    let files = vulnrank_eval::pipeline::analyze(&corpus, &corpus.warnings)?;
    let mut text = String::new();
    for (id, w) in corpus.warnings.iter().enumerate() {
        let a = &files[&w.file];
        let ctx = |e: vulnrank_core::context::ContextError| CliError::Input(e.to_string());
        let (slice, gadget) = (a.extract_slice_context(w).map_err(ctx)?, a.extract_gadget(w).map_err(ctx)?);
        text.push_str(&serde_json::to_string(&Extracted { id, slice: &slice, gadget: &gadget }).expect("serializes"));
        text.push('\n');
    }
    io::write(out, text)
}

fn embed(cfg: &RunConfig, inputs: &Inputs, out: &Path) -> Result<(), CliError> {
    let corpus = load(inputs)?;
    let data = Dataset::build(&corpus, &corpus.warnings, &cfg.pipeline())?;
    io::write(out, data.table.dump_text())
}

fn finite(v: f64, what: &str) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("{what} is {v}")))
    }
}

fn train_cmd(cfg: &RunConfig, inputs: &Inputs, out: &Path, loss_csv: Option<&Path>) -> Result<(), CliError> {
    let corpus = load(inputs)?;
    let data = Dataset::build(&corpus, &corpus.warnings, &cfg.pipeline())?;
    data.labels()?;
    let samples = data.samples(cfg.slice_len, cfg.gadget_len);
    let mut model = RankModel::<f32>::new(cfg.model(), cfg.init_seed())?;
    let history = train(&mut model, &samples, &cfg.train())?;
    let mut csv = String::from("epoch,loss,accuracy\n");
    for h in &history {
        finite(h.loss, &format!("loss at epoch {}", h.epoch))?;
        csv.push_str(&format!("{},{:.6},{:.6}\n", h.epoch, h.loss, h.accuracy));
    }
    if let Some(p) = loss_csv {
        io::write(p, csv)?;
    }
    Checkpoint { config: cfg.clone(), table: data.table, model }.save(out)?;
    if let Some(last) = history.last() {
        println!("trained {} epochs on {} warnings: loss {:.4}, accuracy {:.4}", history.len(), samples.len(), last.loss, last.accuracy);
    }
    Ok(())
}

fn rank_cmd(inputs: &Inputs, model: &Path, out: &Path) -> Result<(), CliError> {
    let ckpt = Checkpoint::load(model)?;
    let corpus = load(inputs)?;
    let cfg = &ckpt.config;
    let data = Dataset::with_table(&corpus, &corpus.warnings, &cfg.keep, ckpt.table)?;
    let samples = data.samples(cfg.slice_len, cfg.gadget_len);
    let scores: Vec<f64> = predict(&ckpt.model, &samples)?.iter().map(|p| p[1] as f64).collect();
    for (i, s) in scores.iter().enumerate() {
        finite(*s, &format!("score of warning {i}"))?;
    }
    let ids: Vec<usize> = (0..scores.len()).collect();
    let rows: Vec<RankedRow> = rank(&scores, &ids)?
        .into_iter()
        .enumerate()
        .map(|(r, id)| RankedRow { id, score: scores[id], rank: r + 1 })
        .collect();
    io::write(out, io::ranked_csv(&rows))
}

fn eval_cmd(ranked: &Path, warnings: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let rows = io::parse_ranked_csv(&io::read_to_string(ranked)?, &ranked.display().to_string())?;
    let ws: Vec<Warning> = io::read_warnings(warnings)?;
    let mut seen = vec![false; ws.len()];
    for r in &rows {
        match seen.get_mut(r.id) {
            Some(s) if !*s => *s = true,
            _ => return Err(CliError::Input(format!("ranked id {} is unknown or repeated", r.id))),
        }
    }
    let mut tps = Vec::new();
    for r in &rows {
        let label = ws[r.id].label.ok_or_else(|| CliError::Input(format!("warning {} has no label", r.id)))?;
        if label.is_tp() {
            tps.push(r.id);
        }
    }
    let ids: Vec<usize> = rows.iter().map(|r| r.id).collect();
    let report = MetricReport::compute(&ids, &tps);
    print!("{}", report.table());
    if let Some(p) = out {
        io::write(p, format!("{}\n{}\n", MetricReport::csv_header(), report.csv_fields()))?;
    }
    Ok(())
}

fn experiment(cfg: &RunConfig, inputs: &Inputs, plan: &ExperimentPlan, out: Option<&Path>) -> Result<(), CliError> {
    let corpus = load(inputs)?;
    let result = run_experiment(&corpus, plan, &cfg.experiment())?;
    print!("{}", result.table());
    if let Some(p) = out {
        io::write(p, result.csv())?;
    }
    Ok(())
}

/// Tiny two-branch model: sequences of 6 and 7 tokens, 3-wide embeddings,
/// 2 hidden units per direction.
pub fn gradcheck_cmd(seed: u64, tolerance: f64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = |rows: usize| {
        Tensor::new(vec![rows, 3], (0..rows * 3).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("shape")
    };
    let batch: Vec<Sample<f64>> = (0..3).map(|i| Sample { slice: matrix(6), gadget: matrix(7), label: i % 2 }).collect();
    let mut worst = 0.0f64;
    for mode in Mode::ALL {
        let cfg = ModelConfig { embed_dim: 3, filters: 3, kernel_width: 3, hidden: 2, layers: 2, dense: 4, dropout: 0.1, mode };
        let model = RankModel::<f64>::new(cfg, seed)?;
        let report = gradcheck(&model, &batch, Some(&[1, 2, 3]), 1e-5, 1e-8)?;
        let m = report.iter().map(|t| t.max_rel_err).fold(0.0, f64::max);
        println!("{mode}: {} tensors, max relative error {m:.3e}", report.len());
        for t in report.iter().filter(|t| !(t.max_rel_err < tolerance)) {
            println!("  {} {:.3e}", t.name, t.max_rel_err);
        }
        worst = worst.max(if m.is_nan() { f64::INFINITY } else { m });
    }
    println!("max relative error {worst:.3e} (tolerance {tolerance:.1e})");
    if worst < tolerance {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("gradient check error {worst:.3e} exceeds {tolerance:.1e}")))
    }
}

fn inspect(file: &Path, ast: bool, cfg: Option<&str>, pdg: Option<&str>) -> Result<(), CliError> {
    let text = io::read_to_string(file)?;
    let a = AnalyzedFile::parse(file.display().to_string(), text)
        .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let find = |name: &str| {
        a.source.unit.function(name).map(|(i, _)| i).ok_or_else(|| CliError::Usage(format!("no function {name:?}")))
    };
    if ast {
        print!("{}", dump_unit(&a.source.unit));
    }
    if let Some(name) = cfg {
        print!("{}", cfg_dot(&a.source, find(name)?, &a.analysis.cfgs[find(name)?]));
    }
    if let Some(name) = pdg {
        print!("{}", pdg_dot(&a.source, &a.analysis.pdgs[find(name)?]));
    }
    if !ast && cfg.is_none() && pdg.is_none() {
        for f in &a.source.unit.functions {
            println!("{} ({} statements)", f.name, f.statements.len());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sweep("300x300, 600x700").unwrap(), [(300, 300), (600, 700)]);
        assert!(parse_sweep("300").is_err());
        assert!(parse_sweep("0x5").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["vulnrank", "frobnicate"]), 1);
        assert_eq!(run(["vulnrank", "rank", "--src", "x"]), 1);
        assert_eq!(run(["vulnrank", "--help"]), 0);
        assert_eq!(run(["vulnrank", "gradcheck", "--set", "bogus=1"]), 1);
    }
}
