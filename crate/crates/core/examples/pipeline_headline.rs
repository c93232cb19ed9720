//! One end-to-end run at g = 0.3, E = 500%, k = 2, written to a directory.

use synthpriv::pipeline::{self, PipelineConfig};
use synthpriv::surrogate::{self, SurrogateConfig};

fn main() -> synthpriv::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("synthpriv-headline"));
    let data = surrogate::generate(&SurrogateConfig::default());
    let cfg = PipelineConfig {
        qi_columns: surrogate::pipeline_config().qi_columns,
        ..PipelineConfig::headline()
    };

    let outcome = pipeline::run_on(&data, &cfg)?;
    pipeline::write_outcome(&outcome, &out)?;

    println!("stages: {}", outcome.stages.join(" -> "));
    println!(
        "released {} records, risk {:.3} at k = {}",
        outcome.released.len(),
        outcome.risk.risk,
        cfg.k
    );
    for e in &outcome.evals {
        println!("{:<4} accuracy {:.4}", e.classifier, e.accuracy);
    }
    println!("written to {}", out.display());
    Ok(())
}
