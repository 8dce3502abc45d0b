//! Candidate ranking by mean token log-probability at expanded masks.

use probeforge::curator::{curate, GroupingConfig, TemplateRegistry};
use probeforge::fixtures::Fixtures;
use probeforge::probers::{mask_average_rank, MaskAverageOutcome};

pub fn run_example() -> probeforge::Result<MaskAverageOutcome> {
    let fx = Fixtures::generate(7);
    let mlm = fx.stub_mlm()?;
    let queries = curate(&fx.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    let q = queries.iter().find(|q| q.hard).expect("fixtures contain hard queries");
    let outcome = mask_average_rank(&mlm, &q.query_id, &q.query_text, "[MASK]", &fx.entities, 5)?;
    println!("{} gold {:?}", q.query_text, q.answers);
    for (name, score) in &outcome.prediction.candidates {
        println!("  {score:>8.3}  {name}");
    }
    println!(
        "{} candidates fell outside the stub vocabulary",
        outcome.out_of_vocab.len()
    );
    Ok(outcome)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
