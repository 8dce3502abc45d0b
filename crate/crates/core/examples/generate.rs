//! Generation-based probing with beam search over the stub masked LM.

use std::sync::Arc;

use probeforge::curator::{curate, GroupingConfig, TemplateRegistry};
use probeforge::encoders::BeamGenerator;
use probeforge::fixtures::Fixtures;
use probeforge::probers::{generate_probe, RankedPrediction};

pub fn run_example() -> probeforge::Result<Vec<RankedPrediction>> {
    let fx = Fixtures::generate(7);
    let generator = BeamGenerator::new(Arc::new(fx.stub_mlm()?), 5, 4);
    let queries = curate(&fx.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    let mut out = Vec::new();
    for q in queries.iter().take(3) {
        let p = generate_probe(&generator, &q.query_id, &q.query_text, 5)?;
        println!(
            "{} gold {:?}\n  -> {:?}",
            q.query_text,
            q.answers,
            p.top(5).collect::<Vec<_>>()
        );
        out.push(p);
    }
    Ok(out)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
