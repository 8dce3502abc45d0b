//! Mean and spread of probing accuracy across rewiring seeds.

use probeforge::curator::{curate, GroupingConfig, TemplateRegistry};
use probeforge::encoders::{Encoder, ReferenceEncoder};
use probeforge::eval::{aggregate, score_predictions, stability_summary, StabilitySummary};
use probeforge::fixtures::{fixture_rewire_config, Fixtures};
use probeforge::probers::{build_entity_index, contrastive_probe};
use probeforge::rewire::{build_pairs, rewire_train, sample_sentences, RewireConfig};

pub fn run_example() -> probeforge::Result<StabilitySummary> {
    let fx = Fixtures::generate(7);
    let queries = curate(&fx.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    let corpus = fx.corpus.join("\n");
    let mut reports = Vec::new();
    for seed in [1, 2, 3] {
        let config = RewireConfig {
            steps: 150,
            seed,
            ..fixture_rewire_config()
        };
        let sentences = sample_sentences(
            corpus.as_bytes(),
            config.num_sentences,
            seed,
            config.min_words,
            config.max_words,
        )?;
        let pairs = build_pairs(&sentences, config.mask_ratio, "[MASK]");
        let mut encoder = ReferenceEncoder::with_dim_seed(128, seed)?;
        rewire_train(&mut encoder, &pairs, &config, None)?;
        let index = build_entity_index(&encoder, &fx.entities, encoder.max_layers())?;
        let predictions = contrastive_probe(&encoder, &index, &queries, 10)?;
        let report = aggregate(&score_predictions(&predictions, &queries, &[1, 10])?, &[1, 10], &[]);
        println!("seed {seed}: acc@10 {:.3}", report.macro_at(10).unwrap_or(0.0));
        reports.push(report);
    }
    let summary = stability_summary(&reports)?;
    for (rel, by_k) in &summary.per_relation {
        let s = &by_k[&10];
        println!("{rel:<24} acc@10 {:.3} ± {:.3}", s.mean, s.std);
    }
    Ok(summary)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
