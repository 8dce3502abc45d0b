//! Contrastive rewiring of the reference encoder on raw sentences.

use probeforge::encoders::{Encoder, ReferenceEncoder, TrainableEncoder};
use probeforge::fixtures::{fixture_rewire_config, Fixtures};
use probeforge::rewire::{build_pairs, rewire_train, sample_sentences, LossRecord};

pub fn run_example() -> probeforge::Result<Vec<LossRecord>> {
    let corpus = Fixtures::generate(7).corpus.join("\n");
    let config = probeforge::rewire::RewireConfig {
        steps: 100,
        ..fixture_rewire_config()
    };
    let sentences = sample_sentences(
        corpus.as_bytes(),
        config.num_sentences,
        config.seed,
        config.min_words,
        config.max_words,
    )?;
    let pairs = build_pairs(&sentences, config.mask_ratio, "[MASK]");
    println!(
        "{} pairs, e.g. {:?} -> {:?}",
        pairs.len(),
        pairs[0].query,
        pairs[0].answer
    );

    let mut encoder = ReferenceEncoder::with_dim_seed(128, 7)?;
    let outcome = rewire_train(&mut encoder, &pairs, &config, None)?;
    let mean = |rs: &[LossRecord]| rs.iter().map(|r| r.loss_mean).sum::<f64>() / rs.len() as f64;
    let n = outcome.trace.len();
    println!(
        "{} after {} steps: loss {:.3} (first 10) -> {:.3} (last 10)",
        encoder.identity(),
        encoder.step(),
        mean(&outcome.trace[..10]),
        mean(&outcome.trace[n - 10..])
    );
    Ok(outcome.trace)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
