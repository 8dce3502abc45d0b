use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::curate::{run_curate, CurateArgs, FULL_FILE};
use super::eval::{run_eval, EvalArgs};
use super::manifest::ManifestBuilder;
use super::probe::{run_probe, ProbeArgs, SplitArg, PREDICTIONS_FILE};
use super::rewire::{run_rewire, RewireArgs};
use crate::error::Result;
use crate::fixtures::{
    Fixtures, CORPUS_FILE, ENTITIES_FILE, FIXTURE_ENCODER, FIXTURE_SEED, REWIRE_FILE, STUB_MLM_FILE, TRIPLES_FILE,
};

#[derive(Args, Debug, Clone)]
pub struct FixturesArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = FIXTURE_SEED)]
    pub seed: u64,
}

pub fn run_fixtures(args: &FixturesArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start("fixtures");
    Fixtures::generate(args.seed).write(&args.out)?;
    manifest.seed(args.seed);
    for f in [TRIPLES_FILE, CORPUS_FILE, ENTITIES_FILE, STUB_MLM_FILE, REWIRE_FILE] {
        manifest.output(f);
    }
    manifest.finish(&args.out)?;
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct DemoArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = FIXTURE_SEED)]
    pub seed: u64,
}

#[derive(Serialize)]
struct DemoConfig<'a> {
    encoder: &'a str,
    stages: [&'a str; 7],
}

/// Full pipeline on generated fixtures: curate, rewire, probe the rewired
/// and the untrained encoder, evaluate both, plus a mask-predict baseline.
pub fn run_demo(args: &DemoArgs) -> Result<()> {
    let manifest = ManifestBuilder::start("demo");
    let out = &args.out;
    let fx = out.join("fixtures");
    run_fixtures(&FixturesArgs {
        out: fx.clone(),
        seed: args.seed,
    })?;
    run_curate(&CurateArgs {
        triples: fx.join(TRIPLES_FILE),
        templates: None,
        out: out.join("curate"),
        max_answers: 10,
        per_relation: 1000,
        seed: args.seed,
        match_threshold: 0.1,
        rouge_threshold: 0.1,
    })?;
    run_rewire(&RewireArgs {
        encoder: FIXTURE_ENCODER.into(),
        corpus: fx.join(CORPUS_FILE),
        config: Some(fx.join(REWIRE_FILE)),
        out: out.join("rewire"),
        seed: Some(args.seed),
        ..Default::default()
    })?;
    let dataset = out.join("curate").join(FULL_FILE);
    let contrastive = |name: &str, checkpoint: Option<PathBuf>| -> Result<()> {
        run_probe(&ProbeArgs {
            encoder: Some(FIXTURE_ENCODER.into()),
            checkpoint,
            dataset: dataset.clone(),
            entities: Some(fx.join(ENTITIES_FILE)),
            k: 10,
            num_masks: 5,
            max_refine_iters: 10,
            beam: 5,
            max_new_tokens: 10,
            out: out.join(format!("probe-{name}")),
            ..Default::default()
        })?;
        run_eval(&EvalArgs::new(
            out.join(format!("probe-{name}")).join(PREDICTIONS_FILE),
            dataset.clone(),
            SplitArg::Full,
            out.join(format!("eval-{name}")),
        ))?;
        Ok(())
    };
    contrastive("rewired", Some(out.join("rewire")))?;
    contrastive("untrained", None)?;
    run_probe(&ProbeArgs {
        dataset: dataset.clone(),
        strategy: super::probe::StrategyArg::MaskPredict,
        mlm: Some(fx.join(STUB_MLM_FILE)),
        k: 10,
        num_masks: 5,
        max_refine_iters: 10,
        beam: 5,
        max_new_tokens: 10,
        out: out.join("probe-mask-predict"),
        ..Default::default()
    })?;
    run_eval(&EvalArgs::new(
        out.join("probe-mask-predict").join(PREDICTIONS_FILE),
        dataset,
        SplitArg::Full,
        out.join("eval-mask-predict"),
    ))?;
    let mut manifest = manifest;
    manifest.seed(args.seed).config(&DemoConfig {
        encoder: FIXTURE_ENCODER,
        stages: [
            "fixtures",
            "curate",
            "rewire",
            "probe-rewired",
            "probe-untrained",
            "probe-mask-predict",
            "eval-*",
        ],
    })?;
    manifest.finish(out)?;
    Ok(())
}
