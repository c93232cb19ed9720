//! Utility evaluation: classifiers trained on released data and scored on a
//! clean held-out split.

pub mod knn;
pub mod metrics;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, RngSeed};
use crate::error::{Error, Result};

pub use knn::{knn_classify, KnnModel};
pub use metrics::{BinaryCounts, ClassMetrics, ConfusionMatrix, EvalReport};
pub use naive_bayes::{nb_classify, nb_train, NaiveBayesModel};
pub use svm::{svm_decision, svm_train, LinearSvmModel, OneVsRestSvm};
pub use tree::{dt_classify, dt_train, DecisionTreeModel};

/// A trained model.
pub trait Classifier: Send + Sync {
    fn name(&self) -> &str;
    fn predict(&self, x: &[f64]) -> Label;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Nb,
    Dt,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [Self::Knn, Self::Nb, Self::Dt, Self::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Knn => "knn",
            Self::Nb => "nb",
            Self::Dt => "dt",
            Self::Svm => "svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown classifier `{s}`")))
    }
}

/// Hyperparameters for every built-in classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub knn_k: usize,
    pub knn_q: f64,
    pub dt_max_depth: usize,
    pub dt_min_leaf: usize,
    pub svm_epochs: usize,
    pub svm_reg: f64,
    /// z-score features using training-set statistics before fitting.
    pub standardize: bool,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            knn_k: 3,
            knn_q: 2.0,
            dt_max_depth: 12,
            dt_min_leaf: 2,
            svm_epochs: 20,
            svm_reg: 1e-3,
            standardize: false,
        }
    }
}

/// Gradient-boosting settings kept for reference only; no boosted model is
/// implemented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostingReference {
    pub n_estimators: usize,
}

pub const BOOSTING_REFERENCE: BoostingReference = BoostingReference { n_estimators: 61 };

struct Standardized {
    inner: Box<dyn Classifier>,
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Classifier for Standardized {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn predict(&self, x: &[f64]) -> Label {
        let z: Vec<f64> = x
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        self.inner.predict(&z)
    }
}

fn standardize(train: &Dataset) -> (Dataset, Vec<f64>, Vec<f64>) {
    let n = train.len() as f64;
    let mean: Vec<f64> = (0..train.dim())
        .map(|j| train.column(j).sum::<f64>() / n)
        .collect();
    let scale: Vec<f64> = crate::noise::attribute_std(train)
        .into_iter()
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let rows = train
        .rows()
        .iter()
        .map(|r| crate::data::Record {
            values: r
                .values
                .iter()
                .zip(mean.iter().zip(&scale))
                .map(|(v, (m, s))| (v - m) / s)
                .collect(),
            label: r.label.clone(),
        })
        .collect();
    let ds = Dataset::new(train.schema().clone(), rows, train.provenance())
        .expect("standardized values stay finite");
    (ds, mean, scale)
}

pub fn fit(
    kind: ClassifierKind,
    train: &Dataset,
    params: &ClassifierParams,
    seed: RngSeed,
) -> Result<Box<dyn Classifier>> {
    if train.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    if params.standardize {
        let (scaled, mean, scale) = standardize(train);
        let inner = fit(
            kind,
            &scaled,
            &ClassifierParams {
                standardize: false,
                ..*params
            },
            seed,
        )?;
        return Ok(Box::new(Standardized { inner, mean, scale }));
    }
    Ok(match kind {
        ClassifierKind::Knn => Box::new(KnnModel::fit(train, params.knn_k, params.knn_q)?),
        ClassifierKind::Nb => Box::new(nb_train(train)?),
        ClassifierKind::Dt => Box::new(dt_train(train, params.dt_max_depth, params.dt_min_leaf)?),
        ClassifierKind::Svm => {
            if train.labels().len() == 2 {
                Box::new(svm_train(train, params.svm_epochs, params.svm_reg, seed)?)
            } else {
                Box::new(OneVsRestSvm::fit(
                    train,
                    params.svm_epochs,
                    params.svm_reg,
                    seed,
                )?)
            }
        }
    })
}

/// Predict every test record and summarize.
pub fn score(model: &dyn Classifier, test: &Dataset) -> EvalReport {
    let predicted: Vec<Label> = test
        .rows()
        .par_iter()
        .map(|r| model.predict(&r.values))
        .collect();
    let cm =
        ConfusionMatrix::from_pairs(test.rows().iter().map(|r| &r.label).zip(predicted.iter()));
    EvalReport::from_confusion(model.name(), cm)
}

/// Train `kind` on `train`, score on `test`.
pub fn evaluate(
    kind: ClassifierKind,
    params: &ClassifierParams,
    train: &Dataset,
    test: &Dataset,
    seed: RngSeed,
) -> Result<EvalReport> {
    if train.schema() != test.schema() {
        return Err(Error::SchemaMismatch);
    }
    let model = fit(kind, train, params, seed)?;
    Ok(score(model.as_ref(), test))
}
