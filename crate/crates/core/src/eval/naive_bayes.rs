use std::f64::consts::PI;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

use super::Classifier;

/// Relative variance floor: `VAR_FLOOR * max_a var_a` over the whole
/// training set.
pub const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes: class priors plus an independent normal
/// likelihood per attribute and class.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub classes: Vec<Label>,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

pub fn nb_train(train: &Dataset) -> Result<NaiveBayesModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    let d = train.dim();
    let n = train.len() as f64;
    let counts = train.class_counts();
    if let Some((label, _)) = counts.iter().find(|(_, &c)| c < 2) {
        return Err(Error::DegenerateClass(label.clone()));
    }
    let classes: Vec<Label> = counts.keys().cloned().collect();
    let c = classes.len();

    let mut sums = vec![vec![0.0; d]; c];
    for r in train.rows() {
        let k = classes.binary_search(&r.label).expect("label counted");
        for (s, v) in sums[k].iter_mut().zip(&r.values) {
            *s += v;
        }
    }
    let sizes: Vec<f64> = counts.values().map(|&v| v as f64).collect();
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&sizes)
        .map(|(s, &m)| s.iter().map(|v| v / m).collect())
        .collect();
    let mut sq = vec![vec![0.0; d]; c];
    for r in train.rows() {
        let k = classes.binary_search(&r.label).expect("label counted");
        for ((s, v), m) in sq[k].iter_mut().zip(&r.values).zip(&means[k]) {
            *s += (v - m) * (v - m);
        }
    }

    let max_global_var = crate::noise::attribute_std(train)
        .into_iter()
        .map(|s| s * s)
        .fold(0.0, f64::max);
    let floor = if max_global_var > 0.0 {
        VAR_FLOOR * max_global_var
    } else {
        VAR_FLOOR
    };
    let variances = sq
        .iter()
        .zip(&sizes)
        .map(|(s, &m)| s.iter().map(|v| (v / m).max(floor)).collect())
        .collect();

    Ok(NaiveBayesModel {
        classes,
        priors: sizes.iter().map(|m| m / n).collect(),
        means,
        variances,
    })
}

impl NaiveBayesModel {
    /// `log P(y) + sum_j log P(z_j | y)` for each class, in class order.
    pub fn log_scores(&self, z: &[f64]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|k| {
                let ll: f64 = z
                    .iter()
                    .zip(&self.means[k])
                    .zip(&self.variances[k])
                    .map(|((x, m), v)| -0.5 * (2.0 * PI * v).ln() - (x - m) * (x - m) / (2.0 * v))
                    .sum();
                self.priors[k].ln() + ll
            })
            .collect()
    }
}

impl Classifier for NaiveBayesModel {
    fn name(&self) -> &str {
        "nb"
    }

    /// Argmax of the log posterior; exact ties go to the lower class.
    fn predict(&self, x: &[f64]) -> Label {
        let scores = self.log_scores(x);
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        self.classes[best].clone()
    }
}

pub fn nb_classify(model: &NaiveBayesModel, z: &[f64]) -> Result<Label> {
    let d = model.means.first().map_or(0, Vec::len);
    if z.len() != d {
        return Err(Error::DimensionMismatch {
            left: z.len(),
            right: d,
        });
    }
    Ok(model.predict(z))
}
