use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::smote::minkowski_unchecked;

use super::Classifier;

/// Brute-force k-nearest-neighbour classifier.
#[derive(Debug, Clone)]
pub struct KnnModel {
    features: Vec<f64>,
    labels: Vec<Label>,
    dim: usize,
    k: usize,
    q: f64,
}

impl KnnModel {
    pub fn fit(train: &Dataset, k: usize, q: f64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainSet);
        }
        if k == 0 || k > train.len() {
            return Err(Error::ConfigInvalid(format!(
                "k = {k} must lie in [1, {}]",
                train.len()
            )));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::ConfigInvalid(format!("Minkowski exponent {q} < 1")));
        }
        Ok(KnnModel {
            features: train
                .rows()
                .iter()
                .flat_map(|r| r.values.iter().copied())
                .collect(),
            labels: train.rows().iter().map(|r| r.label.clone()).collect(),
            dim: train.dim(),
            k,
            q,
        })
    }

    /// Indices of the k nearest training records, closest first; equal
    /// distances keep the lower index first.
    fn nearest(&self, query: &[f64]) -> Vec<(f64, usize)> {
        let k = self.k;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, row) in self.features.chunks_exact(self.dim).enumerate() {
            let d = minkowski_unchecked(query, row, self.q);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let at = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(at, (d, i));
            best.truncate(k);
        }
        best
    }
}

impl Classifier for KnnModel {
    fn name(&self) -> &str {
        "knn"
    }

    /// Majority vote; among classes tied on votes, the one owning the
    /// nearest neighbour wins.
    fn predict(&self, x: &[f64]) -> Label {
        let nearest = self.nearest(x);
        let mut votes: Vec<(&Label, usize)> = Vec::new();
        for &(_, i) in &nearest {
            let l = &self.labels[i];
            match votes.iter_mut().find(|(v, _)| *v == l) {
                Some(slot) => slot.1 += 1,
                None => votes.push((l, 1)),
            }
        }
        // `votes` is in first-seen (= nearest-first) order; max_by_key keeps
        // the last maximum, so scan in reverse.
        votes
            .iter()
            .rev()
            .max_by_key(|(_, n)| *n)
            .map(|(l, _)| (*l).clone())
            .expect("k >= 1")
    }
}

pub fn knn_classify(train: &Dataset, query: &[f64], k: usize, q: f64) -> Result<Label> {
    let model = KnnModel::fit(train, k, q)?;
    if query.len() != model.dim {
        return Err(Error::DimensionMismatch {
            left: query.len(),
            right: model.dim,
        });
    }
    Ok(model.predict(query))
}
