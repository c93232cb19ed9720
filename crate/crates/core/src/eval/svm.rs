//! Linear SVM: decision rule `sign(u . z + c)` and a stochastic subgradient
//! trainer for the L2-regularized hinge loss.

use rand::seq::SliceRandom;

use crate::data::{Dataset, Label, RngSeed};
use crate::error::{Error, Result};

use super::Classifier;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub offset: f64,
    /// Class mapped to -1.
    pub negative: Label,
    /// Class mapped to +1.
    pub positive: Label,
}

impl LinearSvmModel {
    pub fn margin(&self, z: &[f64]) -> f64 {
        dot(&self.weights, z) + self.offset
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// +1 or -1; a point exactly on the hyperplane is +1.
pub fn svm_decision(model: &LinearSvmModel, z: &[f64]) -> Result<i8> {
    if z.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            left: z.len(),
            right: model.weights.len(),
        });
    }
    Ok(if model.margin(z) >= 0.0 { 1 } else { -1 })
}

/// `reg/2 |w|^2 + mean hinge`.
pub fn objective(xs: &[&[f64]], ys: &[f64], w: &[f64], b: f64, reg: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum::<f64>()
        / xs.len() as f64;
    0.5 * reg * dot(w, w) + hinge
}

/// Pegasos-style subgradient descent. The bias is learned as the weight of
/// a constant extra input, so it is lightly regularized along with the rest.
/// The returned iterate is the best objective seen at epoch boundaries, the
/// all-zero start included, so it never loses to the zero model.
pub(crate) fn fit_hinge(
    xs: &[&[f64]],
    ys: &[f64],
    epochs: usize,
    reg: f64,
    seed: RngSeed,
) -> (Vec<f64>, f64) {
    let d = xs.first().map_or(0, |x| x.len());
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut best = (objective(xs, ys, &w, b, reg), w.clone(), b);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = seed.rng();
    let radius = 1.0 / reg.sqrt();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (reg * t as f64);
            let (x, y) = (xs[i], ys[i]);
            let violated = y * (dot(&w, x) + b) < 1.0;
            let shrink = 1.0 - eta * reg;
            for (wj, xj) in w.iter_mut().zip(x) {
                *wj *= shrink;
                if violated {
                    *wj += eta * y * xj;
                }
            }
            b *= shrink;
            if violated {
                b += eta * y;
            }
            let norm = (dot(&w, &w) + b * b).sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
                b *= s;
            }
        }
        let obj = objective(xs, ys, &w, b, reg);
        if obj < best.0 {
            best = (obj, w.clone(), b);
        }
    }
    (best.1, best.2)
}

/// Binary training: the lower label maps to -1, the higher to +1.
pub fn svm_train(
    train: &Dataset,
    epochs: usize,
    reg: f64,
    seed: RngSeed,
) -> Result<LinearSvmModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    if !(reg > 0.0 && reg.is_finite()) {
        return Err(Error::ConfigInvalid(format!(
            "regularization must be > 0, got {reg}"
        )));
    }
    let labels = train.labels();
    let [negative, positive] =
        <[Label; 2]>::try_from(labels.clone()).map_err(|_| Error::NonBinaryLabels(labels.len()))?;
    let xs: Vec<&[f64]> = train.rows().iter().map(|r| r.values.as_slice()).collect();
    let ys: Vec<f64> = train
        .rows()
        .iter()
        .map(|r| if r.label == positive { 1.0 } else { -1.0 })
        .collect();
    let (weights, offset) = fit_hinge(&xs, &ys, epochs, reg, seed);
    Ok(LinearSvmModel {
        weights,
        offset,
        negative,
        positive,
    })
}

impl Classifier for LinearSvmModel {
    fn name(&self) -> &str {
        "svm"
    }

    fn predict(&self, x: &[f64]) -> Label {
        if self.margin(x) >= 0.0 {
            self.positive.clone()
        } else {
            self.negative.clone()
        }
    }
}

/// One linear SVM per class against the rest; predicts the class with the
/// largest margin (lower class on ties).
#[derive(Debug, Clone)]
pub struct OneVsRestSvm {
    classes: Vec<Label>,
    models: Vec<(Vec<f64>, f64)>,
}

impl OneVsRestSvm {
    pub fn fit(train: &Dataset, epochs: usize, reg: f64, seed: RngSeed) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainSet);
        }
        let classes = train.labels();
        if classes.len() < 2 {
            return Err(Error::NonBinaryLabels(classes.len()));
        }
        let xs: Vec<&[f64]> = train.rows().iter().map(|r| r.values.as_slice()).collect();
        let models = classes
            .iter()
            .map(|c| {
                let ys: Vec<f64> = train
                    .rows()
                    .iter()
                    .map(|r| if &r.label == c { 1.0 } else { -1.0 })
                    .collect();
                fit_hinge(&xs, &ys, epochs, reg, seed.derive(c.as_str()))
            })
            .collect();
        Ok(OneVsRestSvm { classes, models })
    }
}

impl Classifier for OneVsRestSvm {
    fn name(&self) -> &str {
        "svm"
    }

    fn predict(&self, x: &[f64]) -> Label {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, (w, b)) in self.models.iter().enumerate() {
            let m = dot(w, x) + b;
            if m > best.0 {
                best = (m, k);
            }
        }
        self.classes[best.1].clone()
    }
}
