//! The full command-line pipeline on the bundled fixtures.

use std::path::PathBuf;

use probeforge::cli::demo::{run_demo, DemoArgs};

pub fn run_example() -> probeforge::Result<PathBuf> {
    let out = std::env::temp_dir().join(format!("probeforge-demo-{}", std::process::id()));
    run_demo(&DemoArgs {
        out: out.clone(),
        seed: 7,
    })?;
    for stage in ["eval-untrained", "eval-rewired"] {
        let report = probeforge::eval::report::load_report(&out.join(stage).join("report.json"))?;
        println!("{stage:<16} acc@10 {:.3}", report.macro_at(10).unwrap_or(0.0));
    }
    println!("artifacts in {}", out.display());
    Ok(out)
}

fn main() -> probeforge::Result<()> {
    run_example().map(|_| ())
}
