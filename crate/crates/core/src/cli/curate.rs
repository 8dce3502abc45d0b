use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use super::manifest::ManifestBuilder;
use crate::curator::{
    group_queries, load_triples_file, save_dataset, split_counts, split_hard, GroupingConfig, TemplateRegistry,
    DEFAULT_MASK_PLACEHOLDER,
};
use crate::error::{ProbeError, Result};

pub const FULL_FILE: &str = "full.jsonl";
pub const HARD_FILE: &str = "hard.jsonl";
pub const STATS_FILE: &str = "stats.csv";

#[derive(Args, Debug, Clone, Default)]
pub struct CurateArgs {
    /// Triple dump: `head<TAB>relation<TAB>tail[<TAB>head_id<TAB>tail_id]`.
    #[arg(long)]
    pub triples: PathBuf,
    /// Prompt templates JSON; the bundled 19 templates when omitted.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub max_answers: usize,
    #[arg(long = "per-relation", default_value_t = 1000)]
    pub per_relation: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub match_threshold: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rouge_threshold: f64,
}

#[derive(Serialize)]
struct ResolvedCurate {
    max_answers: usize,
    per_relation: usize,
    match_threshold: f64,
    rouge_threshold: f64,
    mask_placeholder: &'static str,
    relations: usize,
    full_queries: usize,
    hard_queries: usize,
    malformed_lines: usize,
}

pub fn run_curate(args: &CurateArgs) -> Result<()> {
    let mut manifest = ManifestBuilder::start("curate");
    let load = load_triples_file(&args.triples)?;
    let templates = match &args.templates {
        Some(p) => TemplateRegistry::load(p)?,
        None => TemplateRegistry::bundled(),
    };
    for (name, t) in [("match", args.match_threshold), ("rouge", args.rouge_threshold)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(ProbeError::Config(format!(
                "{name} threshold must lie in [0,1], got {t}"
            )));
        }
    }
    let config = GroupingConfig {
        max_answers: args.max_answers,
        per_relation_cap: args.per_relation,
        seed: args.seed,
        ..Default::default()
    };
    let mut queries = group_queries(&load.triples, &templates, &config)?;
    split_hard(&mut queries, args.match_threshold, args.rouge_threshold)?;
    let hard: Vec<_> = queries.iter().filter(|q| q.hard).cloned().collect();
    let counts = split_counts(&queries);

    std::fs::create_dir_all(&args.out)?;
    save_dataset(&queries, &args.out.join(FULL_FILE))?;
    save_dataset(&hard, &args.out.join(HARD_FILE))?;
    write_stats(&args.out.join(STATS_FILE), &counts)?;

    for m in load.malformed.iter().take(20) {
        manifest.note(format!("skipped line {}: {}", m.line, m.reason));
    }
    manifest
        .seed(args.seed)
        .config(&ResolvedCurate {
            max_answers: args.max_answers,
            per_relation: args.per_relation,
            match_threshold: args.match_threshold,
            rouge_threshold: args.rouge_threshold,
            mask_placeholder: DEFAULT_MASK_PLACEHOLDER,
            relations: counts.len(),
            full_queries: queries.len(),
            hard_queries: hard.len(),
            malformed_lines: load.malformed.len(),
        })?
        .input("triples", &args.triples);
    if let Some(t) = &args.templates {
        manifest.input("templates", t);
    }
    manifest.output(FULL_FILE).output(HARD_FILE).output(STATS_FILE);
    manifest.finish(&args.out)?;
    eprintln!(
        "curated {} queries ({} hard) over {} relations into {}",
        queries.len(),
        hard.len(),
        counts.len(),
        args.out.display()
    );
    Ok(())
}

fn write_stats(path: &Path, counts: &std::collections::BTreeMap<String, crate::curator::SplitCounts>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["relation_id", "full", "hard"])?;
    for (rel, c) in counts {
        w.write_record([rel.as_str(), &c.full.to_string(), &c.hard.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
