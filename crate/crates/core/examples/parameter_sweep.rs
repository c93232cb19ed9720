//! Sweep noise level and SMOTE amount, then write the per-figure tables.

use synthpriv::pipeline::{self, SweepGrid};
use synthpriv::surrogate::{self, SurrogateConfig};

fn main() -> synthpriv::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("synthpriv-sweep"));
    let data = surrogate::generate(&SurrogateConfig {
        records: 6000,
        ..Default::default()
    });
    let cfg = pipeline::PipelineConfig {
        out: Some(out.clone()),
        ..surrogate::pipeline_config()
    };
    let grid = SweepGrid {
        noise_levels: vec![0.0, 0.3, 1.0],
        ..SweepGrid::figure_grid()
    };

    let report = pipeline::run_sweep(&data, &cfg, &grid)?;
    for g in &grid.noise_levels {
        let risks: Vec<String> = grid
            .smote_amounts
            .iter()
            .map(|&e| format!("{:.3}", report.risk(*g, e, 2).unwrap_or(f64::NAN)))
            .collect();
        println!(
            "g = {g:<3} risk by E {:?}: {}",
            grid.smote_amounts,
            risks.join(" ")
        );
    }
    let plots = pipeline::emit_plot_data(&report, &out.join("plots"))?;
    println!(
        "{} tables under {}",
        plots.len(),
        out.join("plots").display()
    );
    Ok(())
}
