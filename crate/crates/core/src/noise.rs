//! Multivariate Gaussian model and additive perturbation `Y = X + Z`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Provenance, Record, RngSeed};
use crate::error::{Error, Result};

/// Eigenvalues in `[-PSD_TOLERANCE, 0)` are treated as zero.
pub const PSD_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Independent noise per attribute with std `g * sigma_a`.
    #[default]
    DiagonalScaled,
    /// Correlated noise with covariance `g^2 * K_X`.
    FullCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Noise level `g`, relative to the data's own spread.
    pub level: f64,
    #[serde(default)]
    pub model: NoiseModel,
    pub seed: RngSeed,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.level >= 0.0 && self.level.is_finite() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(format!(
                "noise level must be finite and >= 0, got {}",
                self.level
            )))
        }
    }
}

/// Mean vector and covariance matrix of a multivariate Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: covariance.nrows(),
            });
        }
        for i in 0..d {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::ConfigInvalid("covariance is not symmetric".into()));
                }
            }
        }
        Ok(GaussianModel {
            mean: DVector::from_vec(mean),
            covariance,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Same mean, covariance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> GaussianModel {
        GaussianModel {
            mean: self.mean.clone(),
            covariance: &self.covariance * factor,
        }
    }

    /// `A` with `A * A^T = K`, from the eigendecomposition with tiny negative
    /// eigenvalues clamped to zero.
    pub fn factor(&self) -> Result<DMatrix<f64>> {
        let eig = self.covariance.clone().symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE {
            return Err(Error::FactorizationFailure(min));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        Ok(eig.eigenvectors * DMatrix::from_diagonal(&roots))
    }
}

/// Column means and population covariance `(1/n) * sum (x - mu)(x - mu)^T`.
pub fn estimate_covariance(data: &Dataset) -> Result<GaussianModel> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewRecords(n));
    }
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for r in data.rows() {
        for (m, v) in mean.iter_mut().zip(&r.values) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut dev = vec![0.0; d];
    for r in data.rows() {
        for ((o, v), m) in dev.iter_mut().zip(&r.values).zip(&mean) {
            *o = v - m;
        }
        for i in 0..d {
            for j in 0..=i {
                cov[(i, j)] += dev[i] * dev[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / n as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    GaussianModel::new(mean, cov)
}

/// Joint density `(2 pi)^(-d/2) det(K)^(-1/2) exp(-(x-mu)^T K^-1 (x-mu) / 2)`.
pub fn gaussian_density(model: &GaussianModel, x: &[f64]) -> Result<f64> {
    let d = model.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: d,
        });
    }
    let chol = model
        .covariance
        .clone()
        .cholesky()
        .ok_or(Error::SingularCovariance)?;
    let l = chol.l();
    let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    if !log_det.is_finite() {
        return Err(Error::SingularCovariance);
    }
    let diff = DVector::from_column_slice(x) - &model.mean;
    let solved = chol.solve(&diff);
    let quad = diff.dot(&solved);
    let log_pdf = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad);
    Ok(log_pdf.exp())
}

/// `count` zero-mean draws with the model's covariance (its mean is
/// ignored), one row per draw. Row `i` uses random stream `i`.
pub fn sample_noise(model: &GaussianModel, count: usize, seed: RngSeed) -> Result<DMatrix<f64>> {
    let a = model.factor()?;
    let d = model.dim();
    let rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| correlated_draw(&a, d, &mut seed.stream(i as u64)))
        .collect();
    Ok(DMatrix::from_fn(count, d, |i, j| rows[i][j]))
}

fn correlated_draw<R: Rng>(a: &DMatrix<f64>, d: usize, rng: &mut R) -> Vec<f64> {
    let eps: DVector<f64> = DVector::from_fn(d, |_, _| rng.sample(StandardNormal));
    (a * eps).as_slice().to_vec()
}

/// Population standard deviation of every attribute.
pub fn attribute_std(data: &Dataset) -> Vec<f64> {
    let n = data.len() as f64;
    (0..data.dim())
        .map(|j| {
            let mean = data.column(j).sum::<f64>() / n;
            (data.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

/// Add zero-mean Gaussian noise to every numeric attribute. Labels pass
/// through untouched.
pub fn perturb(data: &Dataset, cfg: &NoiseConfig) -> Result<Dataset> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let g = cfg.level;
    if g == 0.0 {
        return Ok(data.clone().with_provenance(Provenance::Perturbed));
    }
    let rows: Vec<Record> = match cfg.model {
        NoiseModel::DiagonalScaled => {
            let scale: Vec<f64> = attribute_std(data).into_iter().map(|s| g * s).collect();
            data.rows()
                .par_iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut rng = cfg.seed.stream(i as u64);
                    let values = r
                        .values
                        .iter()
                        .zip(&scale)
                        .map(|(&v, &s)| {
                            let z: f64 = rng.sample(StandardNormal);
                            if s == 0.0 {
                                v
                            } else {
                                v + s * z
                            }
                        })
                        .collect();
                    Record {
                        values,
                        label: r.label.clone(),
                    }
                })
                .collect()
        }
        NoiseModel::FullCovariance => {
            let model = estimate_covariance(data)?.scaled(g * g);
            let a = model.factor()?;
            let d = data.dim();
            data.rows()
                .par_iter()
                .enumerate()
                .map(|(i, r)| {
                    let z = correlated_draw(&a, d, &mut cfg.seed.stream(i as u64));
                    Record {
                        values: r.values.iter().zip(z).map(|(v, z)| v + z).collect(),
                        label: r.label.clone(),
                    }
                })
                .collect()
        }
    };
    Ok(Dataset::from_parts_unchecked(
        data.schema().clone(),
        rows,
        Provenance::Perturbed,
    ))
}
