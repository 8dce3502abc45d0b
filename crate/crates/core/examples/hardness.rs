//! Leakage scores behind the easy/hard split.

use probeforge::curator::{hardness, rouge_l, Hardness, ProbeQuery};

fn query(id: &str, text: &str, answer: &str) -> ProbeQuery {
    ProbeQuery {
        query_id: id.into(),
        relation_id: "may_prevent".into(),
        head_name: String::new(),
        query_text: text.into(),
        answers: vec![answer.into()],
        hard: false,
    }
}

pub fn run_example() -> probeforge::Result<Vec<(String, Hardness, bool)>> {
    let cases = [
        query(
            "dengue",
            "Dengue virus live antigen CYD serotype 1 may be able to prevent [MASK] .",
            "Dengue",
        ),
        query(
            "magnesium",
            "Magnesium Chloride may be able to prevent [MASK] .",
            "Magnesium Deficiency",
        ),
        query("disjoint", "Aspirin may be able to prevent [MASK] .", "heart attack"),
    ];
    let mut out = Vec::new();
    for q in &cases {
        let h = hardness(q)?;
        let hard = h.is_hard(0.1, 0.1);
        println!(
            "{:<10} avg_match {:.3}  rouge_l {:.3}  hard {hard}",
            q.query_id, h.avg_match, h.max_rouge_l
        );
        out.push((q.query_id.clone(), h, hard));
    }
    println!("rouge_l(\"a b c d\", \"a c\") = {:.4}", rouge_l("a b c d", "a c")?);
    Ok(out)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
