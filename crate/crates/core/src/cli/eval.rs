use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::manifest::{ManifestBuilder, RunManifest};
use super::probe::{ResolvedProbe, SplitArg};
use crate::curator::{load_dataset, ProbeQuery};
use crate::error::{ProbeError, Result};
use crate::eval::report::{save_confusion_csv, save_json, save_length_bins_csv, save_report_csv};
use crate::eval::{
    aggregate, bin_by_answer_length, expert_rescore, load_annotations, score_predictions, EvalReport, LengthBin,
    DEFAULT_LENGTH_EDGES,
};
use crate::probers::{load_predictions, RankedPrediction};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const LENGTH_BINS_CSV: &str = "length_bins.csv";
pub const EXPERT_JSON: &str = "expert.json";
pub const CONFUSION_CSV: &str = "confusion.csv";

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Full)]
    pub split: SplitArg,
    #[arg(long, value_delimiter = ',', default_value = "1,10")]
    pub k: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Expert annotations CSV: `query_id,candidate,score`.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub perfect_threshold: u8,
    /// Answer-length bin edges in characters.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LENGTH_EDGES.to_vec())]
    pub length_edges: Vec<usize>,
}

impl EvalArgs {
    pub fn new(predictions: PathBuf, dataset: PathBuf, split: SplitArg, out: PathBuf) -> Self {
        EvalArgs {
            predictions,
            dataset,
            split,
            k: vec![1, 10],
            out,
            annotations: None,
            perfect_threshold: 5,
            length_edges: DEFAULT_LENGTH_EDGES.to_vec(),
        }
    }
}

/// Restricts `predictions` to the split. Predictions naming a query absent
/// from the whole dataset are an error.
fn select_predictions(
    predictions: Vec<RankedPrediction>,
    dataset: &[ProbeQuery],
    split: &[ProbeQuery],
) -> Result<Vec<RankedPrediction>> {
    let all: HashSet<&str> = dataset.iter().map(|q| q.query_id.as_str()).collect();
    if let Some(p) = predictions.iter().find(|p| !all.contains(p.query_id.as_str())) {
        return Err(ProbeError::Validation(format!(
            "prediction for query_id {:?} does not match any query in the dataset",
            p.query_id
        )));
    }
    let wanted: HashSet<&str> = split.iter().map(|q| q.query_id.as_str()).collect();
    Ok(predictions
        .into_iter()
        .filter(|p| wanted.contains(p.query_id.as_str()))
        .collect())
}

#[derive(Serialize)]
struct ResolvedEval<'a> {
    split: &'a str,
    ks: &'a [usize],
    length_edges: &'a [usize],
    perfect_threshold: Option<u8>,
    micro: &'a std::collections::BTreeMap<usize, f64>,
    #[serde(rename = "macro")]
    macro_: &'a std::collections::BTreeMap<usize, f64>,
}

/// Length bins for each k.
pub type BinsByK = Vec<(usize, Vec<LengthBin>)>;

/// Scores predictions and returns the report; writes nothing.
pub fn evaluate(args: &EvalArgs) -> Result<(EvalReport, BinsByK)> {
    let dataset = load_dataset(&args.dataset)?;
    let declared: Vec<String> = dataset
        .iter()
        .map(|q| q.relation_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let split = args.split.select(dataset.clone());
    let predictions = select_predictions(load_predictions(&args.predictions)?, &dataset, &split)?;
    let hits = score_predictions(&predictions, &split, &args.k)?;
    let mut report = aggregate(&hits, &args.k, &declared);
    report.split = args.split.as_str().into();
    report.strategy = predictions.first().map(|p| p.strategy.clone()).unwrap_or_default();
    let probe = args
        .predictions
        .parent()
        .and_then(|d| RunManifest::read(d).ok())
        .and_then(|m| serde_json::from_value::<ResolvedProbe>(m.config).ok());
    if let Some(p) = probe {
        report.model = p.model;
        report.metadata.layer_limit = p.layer_limit;
        report.metadata.checkpoint_step = p.checkpoint_step;
        report.metadata.seed = p.rewire_seed;
    }
    let by_id: std::collections::HashMap<&str, &ProbeQuery> = split.iter().map(|q| (q.query_id.as_str(), q)).collect();
    let ordered: Vec<ProbeQuery> = hits.iter().map(|h| by_id[h.query_id.as_str()].clone()).collect();
    let bins = args
        .k
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let flags: Vec<bool> = hits.iter().map(|h| h.hits[i]).collect();
            bin_by_answer_length(&ordered, &flags, &args.length_edges).map(|b| (k, b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((report, bins))
}

pub fn run_eval(args: &EvalArgs) -> Result<EvalReport> {
    let mut manifest = ManifestBuilder::start("eval");
    let (report, bins) = evaluate(args)?;
    let expert = match &args.annotations {
        Some(path) => {
            let annotations = load_annotations(path)?;
            let dataset = load_dataset(&args.dataset)?;
            let predictions = load_predictions(&args.predictions)?;
            let k = args.k.iter().copied().max().unwrap_or(10);
            Some(expert_rescore(
                &predictions,
                &annotations,
                &dataset,
                k,
                args.perfect_threshold,
            )?)
        }
        None => None,
    };

    std::fs::create_dir_all(&args.out)?;
    save_json(&report, &args.out.join(REPORT_JSON))?;
    save_report_csv(&report, &args.out.join(REPORT_CSV))?;
    save_length_bins_csv(&bins, &args.out.join(LENGTH_BINS_CSV))?;
    manifest.output(REPORT_JSON).output(REPORT_CSV).output(LENGTH_BINS_CSV);
    if let Some(e) = &expert {
        save_json(e, &args.out.join(EXPERT_JSON))?;
        save_confusion_csv(&e.table, &args.out.join(CONFUSION_CSV))?;
        manifest.output(EXPERT_JSON).output(CONFUSION_CSV);
        for n in &e.notes {
            manifest.note(n.clone());
        }
    }
    for rel in &report.metadata.empty_relations {
        manifest.note(format!("relation {rel} has no queries in the {} split", report.split));
    }
    if let Some(seed) = report.metadata.seed {
        manifest.seed(seed);
    }
    manifest
        .config(&ResolvedEval {
            split: args.split.as_str(),
            ks: &args.k,
            length_edges: &args.length_edges,
            perfect_threshold: args.annotations.as_ref().map(|_| args.perfect_threshold),
            micro: &report.micro_acc,
            macro_: &report.macro_acc,
        })?
        .input("predictions", &args.predictions)
        .input("dataset", &args.dataset);
    if let Some(a) = &args.annotations {
        manifest.input("annotations", a);
    }
    manifest.finish(&args.out)?;
    let summary: Vec<String> = report
        .ks
        .iter()
        .map(|k| {
            format!(
                "acc@{k} macro {:.4} micro {:.4}",
                report.macro_at(*k).unwrap_or(0.0),
                report.micro_at(*k).unwrap_or(0.0)
            )
        })
        .collect();
    eprintln!("{} queries: {}", report.total_queries, summary.join(", "));
    Ok(report)
}
