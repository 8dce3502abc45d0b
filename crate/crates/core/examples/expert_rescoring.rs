//! Rescoring top-k predictions with expert annotations.

use probeforge::eval::{expert_rescore, ConfusionTable, ExpertRescore};
use probeforge::fixtures::ExpertSample;

pub fn run_example() -> probeforge::Result<ExpertRescore> {
    let sample = ExpertSample::generate();
    let r = expert_rescore(&sample.predictions, &sample.annotations, &sample.queries, 10, 5)?;
    println!("{} queries, {} candidates", r.queries, r.candidates);
    println!("gold acc@10 {:.3}, annotated acc@10 {:.3}", r.gold_acc, r.annotated_acc);
    print_table(&r.table);
    println!(
        "gold rate {}/{}; score-5 rate {:.3} (top-k cells) vs {:.3} (row sum)",
        r.table.topk_gold_hits(),
        r.table.topk_total(),
        r.table.annotated_rate_topk(5),
        r.table.annotated_rate_row_sum(5)
    );
    for d in r.table.discrepancies(5) {
        println!("note: {d}");
    }
    Ok(r)
}

fn print_table(t: &ConfusionTable) {
    println!("score  top1 Y/N  top{} Y/N  sum", t.k);
    for (score, row) in t.rows.iter().rev() {
        println!(
            "{score:>5}  {:>4}/{:<4} {:>4}/{:<4} {:>4}",
            row.top1_yes,
            row.top1_no,
            row.topk_yes,
            row.topk_no,
            row.sum()
        );
    }
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
