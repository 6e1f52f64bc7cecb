//! Run the default pipeline and print the check lines, graft statuses and
//! overall verdict with timing. A minimal library-level version of
//! `metazeta run`.

use metazeta::pipeline::{run_pipeline, PipelineConfig};

fn main() {
    let cfg = PipelineConfig::default();
    let start = std::time::Instant::now();
    match run_pipeline(&cfg) {
        Ok(outcome) => {
            println!("elapsed: {:.1?}", start.elapsed());
            println!("meta L: {}", outcome.manifest.meta_big_l);
            for (k, v) in &outcome.manifest.checks {
                println!("{}: {k}", if *v { "PASS" } else { "FAIL" });
            }
            for (l, status) in &outcome.manifest.grafts {
                println!("graft {l}: {}", serde_json::to_string(status).unwrap());
            }
            println!("overall: {}", outcome.manifest.overall_pass);
        }
        Err(e) => {
            println!("pipeline error: {e}");
            std::process::exit(1);
        }
    }
}
