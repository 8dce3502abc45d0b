use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use super::eval::{run_eval, EvalArgs};
use super::manifest::ManifestBuilder;
use super::probe::{run_probe, ProbeArgs, ScopeArg, SplitArg, StrategyArg};
use super::rewire::{run_rewire, RewireArgs};
use crate::curator::load_dataset;
use crate::encoders::{default_layer_grid, load_encoder, EncoderSpec};
use crate::error::{ProbeError, Result};
use crate::eval::report::{save_json, save_macro_curve_csv, save_rows_csv, save_stability_csv, save_step_curve_csv};
use crate::eval::{stability_summary, step_curves, EvalReport, LayerSweepRow, MaskRatioRow};
use crate::probers::load_entities;
use crate::rewire::RewireConfig;

pub const LAYER_SWEEP_CSV: &str = "layer_sweep.csv";
pub const MASK_RATIO_CSV: &str = "mask_ratio_sweep.csv";
pub const STEP_CURVE_CSV: &str = "step_curve.csv";
pub const MACRO_CURVE_CSV: &str = "macro_curve.csv";
pub const STABILITY_CSV: &str = "stability.csv";
pub const STABILITY_JSON: &str = "stability.json";
pub const RUNS_DIR: &str = "runs";

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Layer,
    MaskRatio,
    CheckpointStep,
    Seed,
}

impl SweepAxis {
    fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::Layer => "layer",
            SweepAxis::MaskRatio => "mask-ratio",
            SweepAxis::CheckpointStep => "checkpoint-step",
            SweepAxis::Seed => "seed",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    /// Comma-separated axis values. Defaults: the layer grid of the
    /// encoder, mask ratios 0.1..0.5, every saved checkpoint plus step 0.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
    #[arg(long)]
    pub encoder: String,
    /// Rewiring corpus; required for every axis except `layer`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Probe an existing checkpoint or rewire directory (layer axis).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub entities: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Full)]
    pub split: SplitArg,
    #[arg(long, value_delimiter = ',', default_value = "1,10")]
    pub k: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ScopeArg::Full)]
    pub candidate_scope: ScopeArg,
    /// Rewire seeds for the checkpoint-step axis.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Sub-runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_values<T: std::str::FromStr>(values: &[String], what: &str) -> Result<Vec<T>> {
    values
        .iter()
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| ProbeError::Config(format!("invalid {what} value {v:?}")))
        })
        .collect()
}

fn par_map<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ProbeError::Config(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

struct Plan<'a> {
    args: &'a SweepArgs,
}

impl Plan<'_> {
    fn corpus(&self) -> Result<&Path> {
        self.args
            .corpus
            .as_deref()
            .ok_or_else(|| ProbeError::Config(format!("--corpus is required for the {} axis", self.args.axis.as_str())))
    }

    fn rewire(&self, out: &Path, mask_ratio: Option<f64>, seed: Option<u64>) -> Result<PathBuf> {
        let args = RewireArgs {
            encoder: self.args.encoder.clone(),
            corpus: self.corpus()?.to_path_buf(),
            config: self.args.config.clone(),
            out: out.to_path_buf(),
            mask_ratio,
            seed,
            ..Default::default()
        };
        run_rewire(&args)?;
        Ok(out.to_path_buf())
    }

    fn probe_eval(
        &self,
        dir: &Path,
        checkpoint: Option<(&Path, Option<usize>)>,
        layer_limit: Option<usize>,
    ) -> Result<EvalReport> {
        let probe_dir = dir.join("probe");
        let probe = ProbeArgs {
            encoder: Some(self.args.encoder.clone()),
            checkpoint: checkpoint.map(|(p, _)| p.to_path_buf()),
            checkpoint_step: checkpoint.and_then(|(_, s)| s),
            dataset: self.args.dataset.clone(),
            split: self.args.split,
            entities: Some(self.args.entities.clone()),
            strategy: StrategyArg::Contrastive,
            k: self.args.k.iter().copied().max().unwrap_or(10),
            layer_limit,
            candidate_scope: self.args.candidate_scope,
            num_masks: 5,
            max_refine_iters: 10,
            beam: 5,
            max_new_tokens: 10,
            out: probe_dir.clone(),
            ..Default::default()
        };
        run_probe(&probe)?;
        let mut eval = EvalArgs::new(
            probe_dir.join(super::probe::PREDICTIONS_FILE),
            self.args.dataset.clone(),
            self.args.split,
            dir.join("eval"),
        );
        eval.k = self.args.k.clone();
        run_eval(&eval)
    }
}

fn macro_pair(r: &EvalReport) -> (f64, f64) {
    (r.macro_at(1).unwrap_or(0.0), r.macro_at(10).unwrap_or(0.0))
}

#[derive(Serialize)]
struct ResolvedSweep<'a> {
    axis: SweepAxis,
    values: Vec<String>,
    encoder: String,
    rewire: &'a RewireConfig,
    split: &'a str,
    ks: &'a [usize],
    jobs: usize,
}

pub fn run_sweep(args: &SweepArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start("sweep");
    let spec: EncoderSpec = args.encoder.parse()?;
    let config = match &args.config {
        Some(p) => RewireConfig::load(p)?,
        None => RewireConfig::default(),
    };
    config.validate()?;
    if args.split.select(load_dataset(&args.dataset)?).is_empty() {
        return Err(ProbeError::Validation(format!(
            "{} has no {} queries",
            args.dataset.display(),
            args.split.as_str()
        )));
    }
    load_entities(&args.entities)?;
    if args.axis != SweepAxis::Layer && args.corpus.is_none() {
        return Err(ProbeError::Config(format!(
            "--corpus is required for the {} axis",
            args.axis.as_str()
        )));
    }
    if let Some(c) = &args.corpus {
        if !c.is_file() {
            return Err(ProbeError::Config(format!("corpus {} does not exist", c.display())));
        }
    }
    let plan = Plan { args };
    let runs = args.out.join(RUNS_DIR);
    let run_dir = |label: String| runs.join(format!("{}-{label}", args.axis.as_str()));
    let values_used: Vec<String> = match args.axis {
        SweepAxis::Layer => {
            let max_layers = load_encoder(&spec, None)?.max_layers();
            let layers: Vec<usize> = if args.values.is_empty() {
                default_layer_grid(max_layers)
            } else {
                parse_values(&args.values, "layer")?
            };
            if let Some(bad) = layers.iter().find(|&&l| l == 0 || l > max_layers) {
                return Err(ProbeError::Config(format!("layer {bad} outside 1..={max_layers}")));
            }
            std::fs::create_dir_all(&args.out)?;
            let checkpoint = match (&args.corpus, &args.checkpoint) {
                (Some(_), _) => Some(plan.rewire(&runs.join("rewire"), None, None)?),
                (None, Some(c)) => Some(c.clone()),
                (None, None) => None,
            };
            let reports = par_map(args.jobs, &layers, |&l| {
                plan.probe_eval(
                    &run_dir(l.to_string()),
                    checkpoint.as_deref().map(|c| (c, None)),
                    Some(l),
                )
            })?;
            let rows: Vec<LayerSweepRow> = layers
                .iter()
                .zip(&reports)
                .map(|(&l, r)| {
                    let (a1, a10) = macro_pair(r);
                    LayerSweepRow {
                        layer_limit: l,
                        macro_acc1: a1,
                        macro_acc10: a10,
                    }
                })
                .collect();
            save_rows_csv(&rows, &args.out.join(LAYER_SWEEP_CSV))?;
            manifest.output(LAYER_SWEEP_CSV);
            layers.iter().map(ToString::to_string).collect()
        }
        SweepAxis::MaskRatio => {
            let ratios: Vec<f64> = if args.values.is_empty() {
                vec![0.1, 0.2, 0.3, 0.4, 0.5]
            } else {
                parse_values(&args.values, "mask ratio")?
            };
            for &r in &ratios {
                RewireConfig {
                    mask_ratio: r,
                    ..config.clone()
                }
                .validate()?;
            }
            std::fs::create_dir_all(&args.out)?;
            let reports = par_map(args.jobs, &ratios, |&r| {
                let dir = run_dir(r.to_string());
                let rewired = plan.rewire(&dir.join("rewire"), Some(r), None)?;
                plan.probe_eval(&dir, Some((&rewired, None)), None)
            })?;
            let rows: Vec<MaskRatioRow> = ratios
                .iter()
                .zip(&reports)
                .map(|(&m, r)| {
                    let (a1, a10) = macro_pair(r);
                    MaskRatioRow {
                        mask_ratio: m,
                        macro_acc1: a1,
                        macro_acc10: a10,
                    }
                })
                .collect();
            save_rows_csv(&rows, &args.out.join(MASK_RATIO_CSV))?;
            manifest.output(MASK_RATIO_CSV);
            ratios.iter().map(ToString::to_string).collect()
        }
        SweepAxis::CheckpointStep => {
            let seeds = if args.seeds.is_empty() {
                vec![config.seed]
            } else {
                args.seeds.clone()
            };
            let mut steps: Vec<usize> = if args.values.is_empty() {
                let mut s: Vec<usize> = (1..=config.steps / config.checkpoint_every)
                    .map(|i| i * config.checkpoint_every)
                    .collect();
                if config.steps % config.checkpoint_every != 0 {
                    s.push(config.steps);
                }
                s.insert(0, 0);
                s
            } else {
                parse_values(&args.values, "checkpoint step")?
            };
            steps.sort_unstable();
            steps.dedup();
            if let Some(bad) = steps.iter().find(|&&s| s > config.steps) {
                return Err(ProbeError::Config(format!(
                    "checkpoint step {bad} exceeds steps {}",
                    config.steps
                )));
            }
            std::fs::create_dir_all(&args.out)?;
            let rewired = par_map(args.jobs, &seeds, |&s| {
                plan.rewire(&runs.join(format!("seed-{s}")).join("rewire"), None, Some(s))
            })?;
            let grid: Vec<(usize, usize)> = steps
                .iter()
                .flat_map(|&st| (0..seeds.len()).map(move |i| (st, i)))
                .collect();
            let reports = par_map(args.jobs, &grid, |&(st, i)| {
                let dir = run_dir(st.to_string()).join(format!("seed-{}", seeds[i]));
                let ckpt = (st > 0).then(|| (rewired[i].as_path(), Some(st)));
                plan.probe_eval(&dir, ckpt, None)
            })?;
            let mut by_step: BTreeMap<usize, Vec<EvalReport>> = BTreeMap::new();
            for ((st, _), r) in grid.iter().zip(reports) {
                by_step.entry(*st).or_default().push(r);
            }
            let (rows, macro_rows) = step_curves(&by_step)?;
            save_step_curve_csv(&rows, &args.out.join(STEP_CURVE_CSV))?;
            save_macro_curve_csv(&macro_rows, &args.out.join(MACRO_CURVE_CSV))?;
            manifest.output(STEP_CURVE_CSV).output(MACRO_CURVE_CSV);
            steps.iter().map(ToString::to_string).collect()
        }
        SweepAxis::Seed => {
            let seeds: Vec<u64> = parse_values(&args.values, "seed")?;
            if seeds.len() < 2 {
                return Err(ProbeError::Validation("the seed axis needs at least 2 seeds".into()));
            }
            std::fs::create_dir_all(&args.out)?;
            let reports = par_map(args.jobs, &seeds, |&s| {
                let dir = run_dir(s.to_string());
                let rewired = plan.rewire(&dir.join("rewire"), None, Some(s))?;
                plan.probe_eval(&dir, Some((&rewired, None)), None)
            })?;
            let summary = stability_summary(&reports)?;
            save_stability_csv(&summary, &args.out.join(STABILITY_CSV))?;
            save_json(&summary, &args.out.join(STABILITY_JSON))?;
            manifest.output(STABILITY_CSV).output(STABILITY_JSON);
            seeds.iter().map(ToString::to_string).collect()
        }
    };

    manifest.output(RUNS_DIR);
    manifest
        .seed(config.seed)
        .config(&ResolvedSweep {
            axis: args.axis,
            values: values_used,
            encoder: spec.canonical(),
            rewire: &config,
            split: args.split.as_str(),
            ks: &args.k,
            jobs: args.jobs,
        })?
        .input("dataset", &args.dataset)
        .input("entities", &args.entities);
    for (name, p) in [
        ("corpus", &args.corpus),
        ("config", &args.config),
        ("checkpoint", &args.checkpoint),
    ] {
        if let Some(p) = p {
            manifest.input(name, p);
        }
    }
    manifest.finish(&args.out)?;
    Ok(())
}
