//! Turn a triple dump into full and hard cloze datasets.

use probeforge::curator::{curate, load_triples, split_counts, GroupingConfig, ProbeQuery, TemplateRegistry};
use probeforge::fixtures::Fixtures;

pub fn run_example() -> probeforge::Result<Vec<ProbeQuery>> {
    let tsv = Fixtures::generate(7).triples_tsv();
    let load = load_triples(tsv.as_bytes(), "fixtures")?;
    let queries = curate(&load.triples, &TemplateRegistry::bundled(), &GroupingConfig::default())?;
    for (rel, c) in split_counts(&queries) {
        println!("{rel:<24} full {:>3}  hard {:>3}", c.full, c.hard);
    }
    if let Some(q) = queries.first() {
        println!("{}: {} -> {:?}", q.query_id, q.query_text, q.answers);
    }
    Ok(queries)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
