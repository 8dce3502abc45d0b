//! Retrieval probing: rank the entity vocabulary by cosine similarity.

use probeforge::curator::{curate, GroupingConfig, TemplateRegistry};
use probeforge::encoders::{Encoder, ReferenceEncoder};
use probeforge::eval::{aggregate, score_predictions, EvalReport};
use probeforge::fixtures::Fixtures;
use probeforge::probers::{build_entity_index, contrastive_probe};

pub fn run_example() -> probeforge::Result<EvalReport> {
    let fx = Fixtures::generate(7);
    let queries = curate(&fx.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    let encoder = ReferenceEncoder::with_dim_seed(128, 7)?;
    let index = build_entity_index(&encoder, &fx.entities, encoder.max_layers())?;
    let predictions = contrastive_probe(&encoder, &index, &queries, 10)?;

    let p = &predictions[0];
    println!("{} top-3: {:?}", p.query_id, p.top(3).collect::<Vec<_>>());
    let hits = score_predictions(&predictions, &queries, &[1, 10])?;
    let report = aggregate(&hits, &[1, 10], &[]);
    println!(
        "untrained encoder over {} entities: acc@1 {:.3}, acc@10 {:.3}",
        index.len(),
        report.macro_at(1).unwrap_or(0.0),
        report.macro_at(10).unwrap_or(0.0)
    );
    Ok(report)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
