//! Runs every example and checks its headline result.

#[allow(dead_code)]
#[path = "../examples/cli_pipeline.rs"]
mod cli_pipeline;
#[allow(dead_code)]
#[path = "../examples/contrastive_probe.rs"]
mod contrastive_probe;
#[allow(dead_code)]
#[path = "../examples/curate.rs"]
mod curate;
#[allow(dead_code)]
#[path = "../examples/expert_rescoring.rs"]
mod expert_rescoring;
#[allow(dead_code)]
#[path = "../examples/generate.rs"]
mod generate;
#[allow(dead_code)]
#[path = "../examples/hardness.rs"]
mod hardness;
#[allow(dead_code)]
#[path = "../examples/layer_sweep.rs"]
mod layer_sweep;
#[allow(dead_code)]
#[path = "../examples/mask_average.rs"]
mod mask_average;
#[allow(dead_code)]
#[path = "../examples/mask_predict.rs"]
mod mask_predict;
#[allow(dead_code)]
#[path = "../examples/rewire.rs"]
mod rewire;
#[allow(dead_code)]
#[path = "../examples/stability.rs"]
mod stability;

#[test]
fn curate_example() {
    let queries = curate::run_example().unwrap();
    assert_eq!(queries.len(), 60);
    assert_eq!(queries.iter().filter(|q| q.hard).count(), 54);
}

#[test]
fn hardness_example() {
    let flags: Vec<(String, bool)> = hardness::run_example()
        .unwrap()
        .into_iter()
        .map(|(id, _, hard)| (id, hard))
        .collect();
    assert_eq!(
        flags,
        vec![
            ("dengue".into(), false),
            ("magnesium".into(), false),
            ("disjoint".into(), true)
        ]
    );
}

#[test]
fn rewire_example_lowers_loss() {
    let trace = rewire::run_example().unwrap();
    assert_eq!(trace.len(), 100);
    assert!(trace[99].loss_mean < trace[0].loss_mean);
}

#[test]
fn contrastive_example() {
    let report = contrastive_probe::run_example().unwrap();
    assert_eq!(report.total_queries, 60);
}

#[test]
fn mask_predict_example() {
    let ranked = mask_predict::run_example().unwrap();
    assert_eq!(ranked.len(), 3);
    assert!(ranked
        .iter()
        .all(|p| p.strategy == "mask-predict" && !p.candidates.is_empty()));
}

#[test]
fn mask_average_example() {
    let outcome = mask_average::run_example().unwrap();
    assert_eq!(outcome.prediction.candidates.len(), 5);
    assert!(!outcome.out_of_vocab.is_empty());
}

#[test]
fn generate_example() {
    let preds = generate::run_example().unwrap();
    assert_eq!(preds.len(), 3);
    assert!(preds.iter().all(|p| p.candidates.len() <= 5));
}

#[test]
fn expert_example() {
    let r = expert_rescoring::run_example().unwrap();
    assert_eq!(r.table.topk_gold_hits(), 16);
    assert_eq!(r.table.topk_total(), 150);
}

#[test]
fn layer_sweep_example() {
    let rows = layer_sweep::run_example().unwrap();
    let layers: Vec<usize> = rows.iter().map(|r| r.layer_limit).collect();
    assert_eq!(layers, vec![3, 5, 7, 9, 11, 12]);
}

#[test]
fn stability_example() {
    let s = stability::run_example().unwrap();
    assert_eq!(s.runs, 3);
    assert_eq!(s.per_relation.len(), 3);
}

#[test]
fn cli_pipeline_example() {
    let out = cli_pipeline::run_example().unwrap();
    assert!(out.join("eval-rewired").join("report.json").is_file());
    std::fs::remove_dir_all(out).unwrap();
}
