//! Add noise at several levels and compare the realized spread with the
//! requested one.

use synthpriv::noise::{self, NoiseConfig, NoiseModel};
use synthpriv::surrogate::{self, SurrogateConfig};
use synthpriv::RngSeed;

fn main() -> synthpriv::Result<()> {
    let data = surrogate::generate(&SurrogateConfig {
        records: 6000,
        ..Default::default()
    });
    let sigma = noise::attribute_std(&data);

    for level in [0.0, 0.1, 0.3, 1.0] {
        let cfg = NoiseConfig {
            level,
            model: NoiseModel::DiagonalScaled,
            seed: RngSeed(3),
        };
        let out = noise::perturb(&data, &cfg)?;
        // Realized noise std on the first channel, relative to g * sigma.
        let diffs: Vec<f64> = out
            .rows()
            .iter()
            .zip(data.rows())
            .map(|(a, b)| a.values[0] - b.values[0])
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        let ratio = if level > 0.0 {
            std / (level * sigma[0])
        } else {
            f64::NAN
        };
        println!("g = {level:<4} noise std {std:.4}  ratio to g*sigma {ratio:.3}");
    }

    // Correlated noise follows the data covariance instead.
    let model = noise::estimate_covariance(&data)?;
    let full = noise::perturb(
        &data,
        &NoiseConfig {
            level: 0.3,
            model: NoiseModel::FullCovariance,
            seed: RngSeed(3),
        },
    )?;
    println!(
        "full covariance: d = {}, released {} records, K[0][1] = {:.4}",
        model.dim(),
        full.len(),
        model.covariance()[(0, 1)]
    );
    let at_mean: Vec<f64> = model.mean().iter().copied().collect();
    println!(
        "density at the mean: {:.3e}",
        noise::gaussian_density(&model, &at_mean)?
    );
    Ok(())
}
