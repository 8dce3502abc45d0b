use ndarray::Array2;
use probeforge::curator::{rouge_l_tokens, ProbeQuery};
use probeforge::encoders::{load_encoder, Encoder, EncoderSpec, MaskRule, Matrix, ReferenceEncoder, TableMlm};
use probeforge::eval::{aggregate, expert_rescore, hit_at_k, score_predictions, QueryHits};
use probeforge::fixtures::{ExpertSample, Fixtures};
use probeforge::probers::{
    build_entity_index, contrastive_probe, mask_average_rank, mask_predict, FillStrategy, MaskPredictConfig,
    RankedPrediction,
};
use probeforge::rewire::{checkpoint_dir, infonce_loss, rewire_train, tail_mask, MaskedPair, RewireConfig};
use proptest::prelude::*;

fn lcs_table(a: &[u8], b: &[u8]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

fn token_seq() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..5, 1..=8)
}

fn matrix(n: usize, d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, n * d).prop_filter_map("zero row", move |v| {
        let m = Array2::from_shape_vec((n, d), v).unwrap();
        m.rows().into_iter().all(|r| r.dot(&r) > 1e-6).then_some(m)
    })
}

fn batch() -> impl Strategy<Value = (Matrix, Matrix, f64)> {
    (1usize..=6, 2usize..=8).prop_flat_map(|(n, d)| (matrix(n, d), matrix(n, d), 0.05f64..1.0))
}

fn query(id: String, relation: &str) -> ProbeQuery {
    ProbeQuery {
        query_id: id,
        relation_id: relation.into(),
        head_name: "h".into(),
        query_text: "h [MASK] .".into(),
        answers: vec!["gold".into()],
        hard: true,
    }
}

proptest! {
    #[test]
    fn rouge_matches_dp_and_is_symmetric(a in token_seq(), b in token_seq()) {
        let lcs = lcs_table(&a, &b) as f64;
        let (p, r) = (lcs / a.len() as f64, lcs / b.len() as f64);
        let expected = if lcs == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let got = rouge_l_tokens(&a, &b).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12);
        prop_assert_eq!(got, rouge_l_tokens(&b, &a).unwrap());
        prop_assert_eq!(rouge_l_tokens(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn hit_at_k_is_monotone(
        cands in prop::collection::vec(("[a-e]{1,2}", -5.0f64..0.0), 0..15),
        gold in prop::collection::vec("[a-e]{1,2}", 1..4),
    ) {
        let p = RankedPrediction::from_scored("q", "t", cands, 15);
        for k in 1..16 {
            prop_assert!(!hit_at_k(&p, &gold, k) || hit_at_k(&p, &gold, k + 1));
        }
    }

    #[test]
    fn macro_equals_micro_when_balanced(
        relations in 1usize..5,
        per_relation in 1usize..8,
        seed_hits in prop::collection::vec(any::<bool>(), 40),
    ) {
        let mut records = Vec::new();
        for r in 0..relations {
            for i in 0..per_relation {
                let h = seed_hits[(r * per_relation + i) % seed_hits.len()];
                records.push(QueryHits { query_id: format!("{r}-{i}"), relation_id: format!("rel{r}"), hits: vec![h] });
            }
        }
        let report = aggregate(&records, &[1], &[]);
        prop_assert!((report.macro_at(1).unwrap() - report.micro_at(1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn infonce_nonnegative_and_permutation_invariant((q, a, tau) in batch(), perm_seed in any::<u64>()) {
        let n = q.nrows();
        let loss = infonce_loss(&q, &a, tau).unwrap();
        prop_assert!(loss >= 0.0);
        if n >= 2 {
            prop_assert!(loss > 0.0);
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut s = perm_seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let pq = q.select(ndarray::Axis(0), &order);
        let pa = a.select(ndarray::Axis(0), &order);
        prop_assert!((infonce_loss(&pq, &pa, tau).unwrap() - loss).abs() <= 1e-9);
    }

    #[test]
    fn infonce_drops_as_temperature_falls(n in 2usize..=5, noise in matrix(5, 8)) {
        // Near-orthogonal anchors with close positives: each positive is the strict argmax.
        let q = Array2::from_shape_fn((n, 8), |(i, j)| if i == j { 1.0 } else { 0.0 });
        let a = &q + &(noise.slice(ndarray::s![..n, ..]).to_owned() * 0.2);
        let cos = |x: ndarray::ArrayView1<f64>, y: ndarray::ArrayView1<f64>| x.dot(&y) / (x.dot(&x) * y.dot(&y)).sqrt();
        for i in 0..n {
            let pos = cos(q.row(i), a.row(i));
            for j in 0..n {
                if j != i {
                    prop_assume!(pos > cos(q.row(i), a.row(j)));
                    prop_assume!(pos > cos(q.row(i), q.row(j)));
                }
            }
        }
        let l1 = infonce_loss(&q, &a, 1.0).unwrap();
        let l2 = infonce_loss(&q, &a, 0.1).unwrap();
        let l3 = infonce_loss(&q, &a, 0.03).unwrap();
        prop_assert!(l1 > l2 && l2 > l3, "{l1} {l2} {l3}");
    }

    #[test]
    fn tail_mask_keeps_answer_and_final_period(words in prop::collection::vec("[a-z]{1,6}", 0..12), ratio in 0.05f64..0.95) {
        let sentence = format!("{} .", words.join(" "));
        match tail_mask(&sentence, ratio, "[MASK]") {
            Some(p) => {
                prop_assert!(!p.answer.trim().is_empty());
                prop_assert!(p.query.ends_with("[MASK] ."));
                prop_assert!(!p.answer.contains('.'));
            }
            None => prop_assert!(words.len() < 2),
        }
    }

    #[test]
    fn order_equals_independent_for_positional_stub(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 1..=4),
    ) {
        let vocab: Vec<String> = ["w", "x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let rules = rows
            .iter()
            .enumerate()
            .map(|(p, ws)| MaskRule {
                position: Some(p + 1),
                left: None,
                weights: vocab.iter().cloned().zip(ws.iter().copied()).collect(),
            })
            .collect();
        let mlm = TableMlm::new("positional", vocab, "[MASK]", 0.01, rules).unwrap();
        let cfg = |strategy| MaskPredictConfig { num_masks: rows.len(), strategy, refine: None, max_refine_iters: 10 };
        let ind = mask_predict(&mlm, "h [MASK]", "[MASK]", &cfg(FillStrategy::Independent)).unwrap();
        let ord = mask_predict(&mlm, "h [MASK]", "[MASK]", &cfg(FillStrategy::Order)).unwrap();
        prop_assert_eq!(ind.answer, ord.answer);
    }
}

fn fixture_entities() -> (Fixtures, Vec<String>) {
    let fx = Fixtures::generate(7);
    let entities = fx.entities.clone();
    (fx, entities)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mask_average_ignores_candidate_order(shuffled in Just(Fixtures::generate(7).entities).prop_shuffle()) {
        let (fx, entities) = fixture_entities();
        let mlm = fx.stub_mlm().unwrap();
        let q = "fafes may be able to prevent [MASK] .";
        let sorted = |mut c: Vec<(String, f64)>| {
            c.sort_by(|a, b| a.0.cmp(&b.0));
            c
        };
        let base = mask_average_rank(&mlm, "q", q, "[MASK]", &entities, entities.len()).unwrap();
        let perm = mask_average_rank(&mlm, "q", q, "[MASK]", &shuffled, shuffled.len()).unwrap();
        prop_assert_eq!(sorted(base.prediction.candidates), sorted(perm.prediction.candidates));
    }

    #[test]
    fn contrastive_top_k_is_a_prefix(j in 1usize..=150, seed in 0u64..4) {
        let (_, entities) = fixture_entities();
        let enc = ReferenceEncoder::with_dim_seed(16, seed).unwrap();
        let index = build_entity_index(&enc, &entities, enc.max_layers()).unwrap();
        let q = [query("q".into(), "r")];
        let all = contrastive_probe(&enc, &index, &q, entities.len()).unwrap();
        let top = contrastive_probe(&enc, &index, &q, j).unwrap();
        prop_assert_eq!(&all[0].candidates[..j], &top[0].candidates[..]);
    }

    #[test]
    fn scaling_index_vectors_keeps_rankings(exp in -20i32..20) {
        let (_, entities) = fixture_entities();
        let inner = ReferenceEncoder::with_dim_seed(16, 1).unwrap();
        let scaled = Scaled { inner: inner.clone(), factor: 2f64.powi(exp) };
        let queries: Vec<ProbeQuery> = (0..5).map(|i| ProbeQuery {
            query_text: format!("{} may treat [MASK] .", entities[i * 7]),
            ..query(format!("q{i}"), "r")
        }).collect();
        let plain = contrastive_probe(&inner, &build_entity_index(&inner, &entities, 4).unwrap(), &queries, 20).unwrap();
        let other = contrastive_probe(&scaled, &build_entity_index(&scaled, &entities, 4).unwrap(), &queries, 20).unwrap();
        for (a, b) in plain.iter().zip(&other) {
            prop_assert_eq!(a.top(20).collect::<Vec<_>>(), b.top(20).collect::<Vec<_>>());
        }
    }
}

struct Scaled {
    inner: ReferenceEncoder,
    factor: f64,
}

impl Encoder for Scaled {
    fn identity(&self) -> String {
        self.inner.identity()
    }
    fn embedding_dim(&self) -> usize {
        self.inner.embedding_dim()
    }
    fn max_layers(&self) -> usize {
        self.inner.max_layers()
    }
    fn forward(&self, texts: &[&str], layer_limit: usize) -> Matrix {
        self.inner.forward(texts, layer_limit) * self.factor
    }
}

fn synthetic_pairs(n: usize) -> Vec<MaskedPair> {
    let fx = Fixtures::generate(11);
    fx.corpus
        .iter()
        .filter_map(|s| tail_mask(s, 0.5, "[MASK]"))
        .take(n)
        .collect()
}

#[test]
fn reference_loss_decreases_on_a_fixed_batch() {
    let pairs = synthetic_pairs(16);
    let config = RewireConfig {
        learning_rate: 1e-2,
        steps: 10,
        checkpoint_every: 10,
        batch_size: 16,
        temperature: 0.1,
        ..RewireConfig::default()
    };
    let mut enc = ReferenceEncoder::with_dim_seed(64, 3).unwrap();
    let trace = rewire_train(&mut enc, &pairs, &config, None).unwrap().trace;
    for w in trace.windows(2) {
        assert!(w[1].loss_sum < w[0].loss_sum, "{:?}", trace);
    }
}

#[test]
fn reference_loss_falls_over_fifty_steps() {
    let pairs = synthetic_pairs(200);
    assert_eq!(pairs.len(), 200);
    let config = RewireConfig {
        learning_rate: 1e-2,
        steps: 50,
        batch_size: 32,
        temperature: 0.1,
        ..RewireConfig::default()
    };
    let mut enc = ReferenceEncoder::with_dim_seed(64, 3).unwrap();
    let trace = rewire_train(&mut enc, &pairs, &config, None).unwrap().trace;
    let mean = |r: &[probeforge::rewire::LossRecord]| r.iter().map(|x| x.loss_mean).sum::<f64>() / r.len() as f64;
    assert!(mean(&trace[40..]) < mean(&trace[..10]));
}

#[test]
fn resumed_run_matches_uninterrupted_run() {
    let pairs = synthetic_pairs(64);
    let config = RewireConfig {
        learning_rate: 0.05,
        steps: 12,
        batch_size: 16,
        checkpoint_every: 5,
        temperature: 0.1,
        seed: 9,
        ..RewireConfig::default()
    };
    let tmp = tempfile::tempdir().unwrap();
    let mut straight = ReferenceEncoder::with_dim_seed(32, 5).unwrap();
    let full = rewire_train(&mut straight, &pairs, &config, Some(tmp.path()))
        .unwrap()
        .trace;

    let spec: EncoderSpec = "reference:dim=32,seed=5".parse().unwrap();
    let mut resumed = load_encoder(&spec, Some(&checkpoint_dir(tmp.path(), 5))).unwrap();
    assert_eq!(resumed.step(), 5);
    let rest = rewire_train(resumed.as_mut(), &pairs, &config, None).unwrap().trace;
    assert_eq!(rest[0].step, 6);
    assert_eq!(rest[0].loss_sum, full[5].loss_sum);
    assert_eq!(rest.last().unwrap().loss_sum, full.last().unwrap().loss_sum);
}

#[test]
fn expert_gold_accuracy_equals_micro() {
    let s = ExpertSample::generate();
    let r = expert_rescore(&s.predictions, &s.annotations, &s.queries, 10, 5).unwrap();
    let hits = score_predictions(&s.predictions, &s.queries, &[10]).unwrap();
    let micro = aggregate(&hits, &[10], &[]).micro_at(10).unwrap();
    assert_eq!(r.gold_acc, micro);
}

#[test]
fn relations_without_queries_are_flagged() {
    let records: Vec<QueryHits> = ["a", "b"]
        .iter()
        .map(|r| QueryHits {
            query_id: r.to_string(),
            relation_id: r.to_string(),
            hits: vec![true],
        })
        .collect();
    let declared = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let report = aggregate(&records, &[1], &declared);
    assert_eq!(report.metadata.empty_relations, vec!["c".to_string()]);
    assert_eq!(report.per_relation.len(), 2);
}
