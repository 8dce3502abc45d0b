//! Multi-token mask filling with the bundled stub masked LM.

use probeforge::curator::{curate, GroupingConfig, TemplateRegistry};
use probeforge::fixtures::Fixtures;
use probeforge::probers::{mask_predict, mask_predict_probe, FillStrategy, MaskPredictConfig, RankedPrediction};

pub fn run_example() -> probeforge::Result<Vec<RankedPrediction>> {
    let fx = Fixtures::generate(7);
    let mlm = fx.stub_mlm()?;
    let queries = curate(&fx.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    let q = &queries[0];
    println!("{} gold {:?}", q.query_text, q.answers);

    let mut out = Vec::new();
    for strategy in [FillStrategy::Independent, FillStrategy::Order, FillStrategy::Confidence] {
        let config = MaskPredictConfig {
            num_masks: 3,
            strategy,
            refine: Some(FillStrategy::Order),
            max_refine_iters: 10,
        };
        let single = mask_predict(
            &mlm,
            &q.query_text,
            "[MASK]",
            &MaskPredictConfig {
                refine: None,
                ..config.clone()
            },
        )?;
        let ranked = mask_predict_probe(&mlm, &q.query_id, &q.query_text, "[MASK]", &config, 5)?;
        println!(
            "{strategy:?}: 3 masks -> {:?}; refined ranking {:?}",
            single.answer,
            ranked.top(5).collect::<Vec<_>>()
        );
        out.push(ranked);
    }
    Ok(out)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
