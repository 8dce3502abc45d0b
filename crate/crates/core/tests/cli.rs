use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use probeforge::cli::RunManifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_probeforge"));
    c.env_remove("PROBEFORGE_CACHE");
    c
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn curate_into(dir: &Path) -> PathBuf {
    let out = dir.join("curate");
    let o = run(bin().args([
        "curate",
        "--triples",
        s(&fixtures().join("triples.tsv")),
        "--out",
        s(&out),
    ]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn files_except_manifests(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.file_name().unwrap() != "manifest.json" {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(bin().args(["curate", "--out", s(&tmp.path().join("x"))]));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--triples"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn unreadable_triples_fail_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(bin().args([
        "curate",
        "--triples",
        s(&tmp.path().join("missing.tsv")),
        "--out",
        s(&out),
    ]));
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn eval_rejects_unknown_query_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let dataset = curate_into(tmp.path()).join("full.jsonl");
    let preds = tmp.path().join("preds.jsonl");
    std::fs::write(
        &preds,
        "{\"query_id\":\"nope-0000\",\"strategy\":\"contrastive\",\"candidates\":[[\"a\",0.5]]}\n",
    )
    .unwrap();
    let out = tmp.path().join("eval");
    let o = run(bin().args([
        "eval",
        "--predictions",
        s(&preds),
        "--dataset",
        s(&dataset),
        "--out",
        s(&out),
    ]));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope-0000"));
    assert!(!out.exists());
}

#[test]
fn eval_rejects_missing_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let dataset = curate_into(tmp.path()).join("full.jsonl");
    let first = std::fs::read_to_string(&dataset)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    let id: serde_json::Value = serde_json::from_str(&first).unwrap();
    let preds = tmp.path().join("preds.jsonl");
    std::fs::write(
        &preds,
        format!(
            "{{\"query_id\":{},\"strategy\":\"contrastive\",\"candidates\":[]}}\n",
            id["query_id"]
        ),
    )
    .unwrap();
    let out = tmp.path().join("eval");
    let o = run(bin().args([
        "eval",
        "--predictions",
        s(&preds),
        "--dataset",
        s(&dataset),
        "--out",
        s(&out),
    ]));
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn expert_eval_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixtures();
    let out = tmp.path().join("eval");
    let o = run(bin().args([
        "eval",
        "--predictions",
        s(&f.join("expert_predictions.jsonl")),
        "--dataset",
        s(&f.join("expert_dataset.jsonl")),
        "--annotations",
        s(&f.join("expert_annotations.csv")),
        "--out",
        s(&out),
    ]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.join("confusion.csv")).unwrap();
    assert!(table.starts_with("score,top1_yes,top1_no,topk_yes,topk_no,sum\n5,4,1,13,20,38\n"));
    let m = RunManifest::read(&out).unwrap();
    assert!(m.notes.iter().any(|n| n.contains("38/150")));
}

#[test]
fn committed_fixtures_match_the_generator() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(bin().args(["fixtures", "--out", s(tmp.path())]));
    assert!(o.status.success());
    let generated = files_except_manifests(tmp.path());
    let committed = files_except_manifests(&fixtures());
    assert_eq!(
        generated.keys().collect::<Vec<_>>(),
        committed.keys().collect::<Vec<_>>()
    );
    for (path, bytes) in &generated {
        assert!(
            committed[path] == *bytes,
            "{} drifted from the generator",
            path.display()
        );
    }
}

#[test]
fn demo_produces_every_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("demo");
    let o = run(bin().args(["demo", "--out", s(&out)]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for stage in [
        "fixtures",
        "curate",
        "rewire",
        "probe-rewired",
        "eval-rewired",
        "probe-untrained",
        "eval-untrained",
        "probe-mask-predict",
        "eval-mask-predict",
    ] {
        let m = RunManifest::read(&out.join(stage)).unwrap_or_else(|e| panic!("{stage}: {e}"));
        for file in &m.outputs {
            assert!(
                out.join(stage).join(file).exists(),
                "{stage} lists missing output {file}"
            );
        }
    }
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("curate/hard.jsonl").is_file());
    assert!(out.join("rewire/loss_trace.csv").is_file());
    assert!(out.join("rewire/checkpoints/step_000500/weights.bin").is_file());
    assert!(out.join("eval-rewired/report.csv").is_file());
}

#[test]
fn rewire_cache_restores_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixtures();
    let cache = tmp.path().join("cache");
    let rewire = |out: &Path| {
        run(bin().env("PROBEFORGE_CACHE", &cache).args([
            "rewire",
            "--encoder",
            "reference:dim=32,seed=1",
            "--corpus",
            s(&f.join("corpus.txt")),
            "--config",
            s(&f.join("rewire.json")),
            "--steps",
            "60",
            "--checkpoint-every",
            "30",
            "--probe-checkpoint-step",
            "60",
            "--out",
            s(out),
        ]))
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(rewire(&a).status.success());
    assert!(cache.join("rewire").read_dir().unwrap().count() == 1);
    assert!(rewire(&b).status.success());
    assert_eq!(files_except_manifests(&a), files_except_manifests(&b));
    let m = RunManifest::read(&b).unwrap();
    assert!(m.notes.iter().any(|n| n.contains("cache")));
}

#[test]
fn probe_lists_available_checkpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let f = fixtures();
    let rw = tmp.path().join("rw");
    let o = run(bin().args([
        "rewire",
        "--encoder",
        "reference:dim=32,seed=1",
        "--corpus",
        s(&f.join("corpus.txt")),
        "--config",
        s(&f.join("rewire.json")),
        "--steps",
        "40",
        "--checkpoint-every",
        "20",
        "--probe-checkpoint-step",
        "40",
        "--out",
        s(&rw),
    ]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dataset = curate_into(tmp.path()).join("full.jsonl");
    let out = tmp.path().join("probe");
    let o = run(bin().args([
        "probe",
        "--encoder",
        "reference:dim=32,seed=1",
        "--checkpoint",
        s(&rw),
        "--checkpoint-step",
        "30",
        "--dataset",
        s(&dataset),
        "--entities",
        s(&f.join("entities.txt")),
        "--out",
        s(&out),
    ]));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("20") && err.contains("40"), "{err}");
    assert!(!out.exists());
}
