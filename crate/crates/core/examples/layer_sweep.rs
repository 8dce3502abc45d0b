//! Probing with only the first L encoder layers.

use probeforge::curator::{curate, GroupingConfig, TemplateRegistry};
use probeforge::encoders::{default_layer_grid, Encoder, ReferenceConfig, ReferenceEncoder};
use probeforge::eval::{aggregate, score_predictions, LayerSweepRow};
use probeforge::fixtures::Fixtures;
use probeforge::probers::{build_entity_index, contrastive_probe};

pub fn run_example() -> probeforge::Result<Vec<LayerSweepRow>> {
    let fx = Fixtures::generate(7);
    let queries = curate(&fx.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    let encoder = ReferenceEncoder::new(ReferenceConfig {
        dim: 64,
        seed: 7,
        layers: 12,
        ..ReferenceConfig::default()
    })?;
    let mut rows = Vec::new();
    for layer_limit in default_layer_grid(encoder.max_layers()) {
        let index = build_entity_index(&encoder, &fx.entities, layer_limit)?;
        let predictions = contrastive_probe(&encoder, &index, &queries, 10)?;
        let report = aggregate(&score_predictions(&predictions, &queries, &[1, 10])?, &[1, 10], &[]);
        let row = LayerSweepRow {
            layer_limit,
            macro_acc1: report.macro_at(1).unwrap_or(0.0),
            macro_acc10: report.macro_at(10).unwrap_or(0.0),
        };
        println!(
            "L={:>2}  acc@1 {:.3}  acc@10 {:.3}",
            row.layer_limit, row.macro_acc1, row.macro_acc10
        );
        rows.push(row);
    }
    Ok(rows)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
