//! The whole chain on the fixture configuration, once per scripted opinion.
//!
//!     cargo run --release --example pipeline -- /tmp/robopinion

use std::path::{Path, PathBuf};

use robopinion::config::PipelineConfig;
use robopinion::pipeline::run_pipeline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_out".into()));

    for script in ["all_negative", "mirrored", "all_neutral", "worded"] {
        let mut config = PipelineConfig::load(&root.join("pipeline.conf"))?;
        config.script = Some(root.join(format!("scripts/{script}.txt")));
        config.out = out.join(script);
        match run_pipeline(&config, None) {
            Ok(outcome) => {
                let r = outcome.scored.result;
                let note = if outcome.scored.degenerate() { "  (constant profile)" } else { "" };
                println!(
                    "{script:<13} score {:+.3}  pos {:.3} neg {:.3} neutral {:.3}  association {:.3}{note}",
                    r.score, r.pos_len, r.neg_len, r.neutral_len, outcome.run.correct_rate
                );
            }
            Err(e) => println!("{script:<13} failed: {e} (exit {})", e.exit_code()),
        }
    }
    println!("artifacts under {}", out.display());
    Ok(())
}
