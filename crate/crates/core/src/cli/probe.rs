use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::manifest::ManifestBuilder;
use crate::curator::{load_dataset, ProbeQuery, DEFAULT_MASK_PLACEHOLDER};
use crate::encoders::checkpoint::is_checkpoint_dir;
use crate::encoders::{load_encoder, BeamGenerator, EncoderSpec, MaskedLm, TableMlm};
use crate::error::{ProbeError, Result};
use crate::probers::{
    build_entity_index, contrastive_probe_scoped, generate_probe, load_entities, mask_average_rank, mask_predict_probe,
    save_predictions, CandidateScope, FillStrategy, MaskPredictConfig, Strategy,
};
use crate::rewire::{checkpoint_dir, RewireConfig, CHECKPOINTS_DIR, REWIRE_CONFIG_FILE};

pub const PREDICTIONS_FILE: &str = "predictions.jsonl";

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    #[default]
    Contrastive,
    MaskPredict,
    MaskAverage,
    Generate,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Contrastive => Strategy::Contrastive,
            StrategyArg::MaskPredict => Strategy::MaskPredict,
            StrategyArg::MaskAverage => Strategy::MaskAverage,
            StrategyArg::Generate => Strategy::Generate,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitArg {
    #[default]
    Full,
    Hard,
}

impl SplitArg {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitArg::Full => "full",
            SplitArg::Hard => "hard",
        }
    }

    pub fn select(&self, queries: Vec<ProbeQuery>) -> Vec<ProbeQuery> {
        match self {
            SplitArg::Full => queries,
            SplitArg::Hard => queries.into_iter().filter(|q| q.hard).collect(),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FillArg {
    #[default]
    Independent,
    Order,
    Confidence,
}

impl From<FillArg> for FillStrategy {
    fn from(f: FillArg) -> Self {
        match f {
            FillArg::Independent => FillStrategy::Independent,
            FillArg::Order => FillStrategy::Order,
            FillArg::Confidence => FillStrategy::Confidence,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeArg {
    #[default]
    Full,
    Relation,
}

impl From<ScopeArg> for CandidateScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Full => CandidateScope::Full,
            ScopeArg::Relation => CandidateScope::Relation,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProbeArgs {
    /// Encoder spec (contrastive strategy).
    #[arg(long)]
    pub encoder: Option<String>,
    /// A checkpoint directory, or a rewire output directory.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Step to load from a rewire output directory; defaults to its
    /// `probe_checkpoint_step`.
    #[arg(long)]
    pub checkpoint_step: Option<usize>,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Full)]
    pub split: SplitArg,
    /// Entity names, one per line (contrastive and mask-average).
    #[arg(long)]
    pub entities: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Contrastive)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Encoder depth; all layers when omitted.
    #[arg(long)]
    pub layer_limit: Option<usize>,
    #[arg(long, value_enum, default_value_t = ScopeArg::Full)]
    pub candidate_scope: ScopeArg,
    /// Stub MLM table JSON (mask-predict, mask-average, generate).
    #[arg(long)]
    pub mlm: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub num_masks: usize,
    #[arg(long, value_enum, default_value_t = FillArg::Independent)]
    pub fill_strategy: FillArg,
    #[arg(long, value_enum)]
    pub refine: Option<FillArg>,
    #[arg(long, default_value_t = 10)]
    pub max_refine_iters: usize,
    #[arg(long, default_value_t = 5)]
    pub beam: usize,
    #[arg(long, default_value_t = 10)]
    pub max_new_tokens: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Fields of the probe manifest's `config` that `eval` reads back.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct ResolvedProbe {
    pub model: String,
    pub strategy: String,
    pub split: String,
    pub k: usize,
    pub layer_limit: Option<usize>,
    pub checkpoint_step: Option<usize>,
    pub rewire_seed: Option<u64>,
    pub queries: usize,
    #[serde(default)]
    pub extra: serde_json::Value,
}

/// Maps `--checkpoint` to a concrete checkpoint directory plus the rewire
/// config that produced it, if known.
pub fn resolve_checkpoint(dir: &Path, step: Option<usize>) -> Result<(PathBuf, Option<RewireConfig>)> {
    if is_checkpoint_dir(dir) {
        let config = RewireConfig::load(&dir.join(REWIRE_CONFIG_FILE)).ok();
        return Ok((dir.to_path_buf(), config));
    }
    let config_path = dir.join(REWIRE_CONFIG_FILE);
    if !config_path.is_file() || !dir.join(CHECKPOINTS_DIR).is_dir() {
        return Err(ProbeError::Config(format!(
            "{} is neither a checkpoint nor a rewire output directory",
            dir.display()
        )));
    }
    let config = RewireConfig::load(&config_path)?;
    let step = step.unwrap_or(config.probe_checkpoint_step);
    let ckpt = checkpoint_dir(dir, step);
    if !is_checkpoint_dir(&ckpt) {
        let mut available: Vec<String> = std::fs::read_dir(dir.join(CHECKPOINTS_DIR))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str().map(str::to_string))
            .collect();
        available.sort();
        return Err(ProbeError::Config(format!(
            "no checkpoint for step {step} in {} (available: {})",
            dir.display(),
            available.join(", ")
        )));
    }
    Ok((ckpt, Some(config)))
}

fn require<'a>(v: &'a Option<PathBuf>, flag: &str, strategy: Strategy) -> Result<&'a Path> {
    v.as_deref()
        .ok_or_else(|| ProbeError::Config(format!("--{flag} is required for the {strategy} strategy")))
}

pub fn run_probe(args: &ProbeArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start("probe");
    let strategy: Strategy = args.strategy.into();
    if args.k == 0 {
        return Err(ProbeError::Config("--k must be at least 1".into()));
    }
    let queries = args.split.select(load_dataset(&args.dataset)?);
    if queries.is_empty() {
        return Err(ProbeError::Validation(format!(
            "{} has no queries in the {} split",
            args.dataset.display(),
            args.split.as_str()
        )));
    }
    manifest.input("dataset", &args.dataset);

    let (predictions, resolved) = match strategy {
        Strategy::Contrastive => {
            let spec: EncoderSpec = args
                .encoder
                .as_deref()
                .ok_or_else(|| ProbeError::Config("--encoder is required for the contrastive strategy".into()))?
                .parse()?;
            let entities_path = require(&args.entities, "entities", strategy)?;
            let entities = load_entities(entities_path)?;
            manifest.input("entities", entities_path);
            let (ckpt, rewire) = match &args.checkpoint {
                Some(dir) => {
                    let (c, r) = resolve_checkpoint(dir, args.checkpoint_step)?;
                    manifest.input("checkpoint", &c);
                    (Some(c), r)
                }
                None => (None, None),
            };
            let encoder = load_encoder(&spec, ckpt.as_deref())?;
            let layer_limit = args.layer_limit.unwrap_or(encoder.max_layers());
            let index = build_entity_index(encoder.as_encoder(), &entities, layer_limit)?;
            let preds = contrastive_probe_scoped(
                encoder.as_encoder(),
                &index,
                &queries,
                args.k,
                args.candidate_scope.into(),
            )?;
            let resolved = ResolvedProbe {
                model: encoder.identity(),
                strategy: strategy.to_string(),
                split: args.split.as_str().into(),
                k: args.k,
                layer_limit: Some(layer_limit),
                checkpoint_step: Some(encoder.step()),
                rewire_seed: rewire.map(|r| r.seed),
                queries: queries.len(),
                extra: serde_json::json!({ "candidate_scope": args.candidate_scope, "entities": entities.len() }),
            };
            (preds, resolved)
        }
        Strategy::MaskPredict | Strategy::MaskAverage | Strategy::Generate => {
            let mlm_path = require(&args.mlm, "mlm", strategy)?;
            let mlm = Arc::new(TableMlm::load(mlm_path)?);
            manifest.input("mlm", mlm_path);
            let (preds, extra) = match strategy {
                Strategy::MaskPredict => {
                    let cfg = MaskPredictConfig {
                        num_masks: args.num_masks,
                        strategy: args.fill_strategy.into(),
                        refine: args.refine.map(Into::into),
                        max_refine_iters: args.max_refine_iters,
                    };
                    let preds = queries
                        .iter()
                        .map(|q| {
                            mask_predict_probe(
                                mlm.as_ref(),
                                &q.query_id,
                                &q.query_text,
                                DEFAULT_MASK_PLACEHOLDER,
                                &cfg,
                                args.k,
                            )
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let extra = serde_json::json!({
                        "num_masks": args.num_masks,
                        "fill_strategy": args.fill_strategy,
                        "refine": args.refine,
                        "max_refine_iters": args.max_refine_iters,
                    });
                    (preds, extra)
                }
                Strategy::MaskAverage => {
                    let entities_path = require(&args.entities, "entities", strategy)?;
                    let entities = load_entities(entities_path)?;
                    manifest.input("entities", entities_path);
                    let mut oov = std::collections::BTreeSet::new();
                    let mut preds = Vec::with_capacity(queries.len());
                    for q in &queries {
                        let out = mask_average_rank(
                            mlm.as_ref(),
                            &q.query_id,
                            &q.query_text,
                            DEFAULT_MASK_PLACEHOLDER,
                            &entities,
                            args.k,
                        )?;
                        oov.extend(out.out_of_vocab);
                        preds.push(out.prediction);
                    }
                    if !oov.is_empty() {
                        manifest.note(format!("{} candidates contain out-of-vocabulary tokens", oov.len()));
                    }
                    (
                        preds,
                        serde_json::json!({ "entities": entities.len(), "out_of_vocab": oov.len() }),
                    )
                }
                _ => {
                    let generator = BeamGenerator::new(mlm.clone(), args.beam, args.max_new_tokens);
                    let preds = queries
                        .iter()
                        .map(|q| generate_probe(&generator, &q.query_id, &q.query_text, args.k))
                        .collect::<Result<Vec<_>>>()?;
                    (
                        preds,
                        serde_json::json!({ "beam": args.beam, "max_new_tokens": args.max_new_tokens }),
                    )
                }
            };
            let resolved = ResolvedProbe {
                model: mlm.identity(),
                strategy: strategy.to_string(),
                split: args.split.as_str().into(),
                k: args.k,
                layer_limit: None,
                checkpoint_step: None,
                rewire_seed: None,
                queries: queries.len(),
                extra,
            };
            (preds, resolved)
        }
    };

    std::fs::create_dir_all(&args.out)?;
    save_predictions(&predictions, &args.out.join(PREDICTIONS_FILE))?;
    if let Some(seed) = resolved.rewire_seed {
        manifest.seed(seed);
    }
    manifest.config(&resolved)?.output(PREDICTIONS_FILE);
    manifest.finish(&args.out)?;
    eprintln!(
        "wrote {} {} predictions to {}",
        predictions.len(),
        strategy,
        args.out.display()
    );
    Ok(())
}
