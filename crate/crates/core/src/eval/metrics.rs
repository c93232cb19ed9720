//! Confusion matrices and the precision / recall / F-measure family.
//!
//! Multi-class results are reduced one-vs-rest per class and macro-averaged.
//! A zero denominator yields 0 for that metric.

use serde::{Deserialize, Serialize};

use crate::data::Label;

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl BinaryCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f_measure(&self) -> f64 {
        f_measure(self.precision(), self.recall())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Square count matrix, rows = actual class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    /// Label set is the union of actual and predicted labels, naturally
    /// ordered.
    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a Label, &'a Label)> + Clone,
    {
        let mut labels: Vec<Label> = pairs
            .clone()
            .into_iter()
            .flat_map(|(a, p)| [a.clone(), p.clone()])
            .collect();
        labels.sort();
        labels.dedup();
        let c = labels.len();
        let mut counts = vec![vec![0u64; c]; c];
        for (actual, predicted) in pairs {
            let i = labels.binary_search(actual).expect("label collected");
            let j = labels.binary_search(predicted).expect("label collected");
            counts[i][j] += 1;
        }
        ConfusionMatrix { labels, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total())
    }

    pub fn one_vs_rest(&self, class: usize) -> BinaryCounts {
        let total = self.total();
        let tp = self.counts[class][class];
        let actual: u64 = self.counts[class].iter().sum();
        let predicted: u64 = self.counts.iter().map(|row| row[class]).sum();
        BinaryCounts {
            tp,
            fp: predicted - tp,
            fn_: actual - tp,
            tn: total + tp - actual - predicted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub counts: BinaryCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: String,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f_measure: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
    /// Zero-denominator events and similar remarks.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn from_confusion(classifier: impl Into<String>, confusion: ConfusionMatrix) -> Self {
        let mut notes = Vec::new();
        let per_class: Vec<ClassMetrics> = confusion
            .labels
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let counts = confusion.one_vs_rest(i);
                if counts.tp + counts.fp == 0 {
                    notes.push(format!(
                        "class {label}: never predicted, precision set to 0"
                    ));
                }
                if counts.tp + counts.fn_ == 0 {
                    notes.push(format!(
                        "class {label}: absent from test set, recall set to 0"
                    ));
                }
                ClassMetrics {
                    label: label.clone(),
                    precision: counts.precision(),
                    recall: counts.recall(),
                    f_measure: counts.f_measure(),
                    counts,
                }
            })
            .collect();
        let mean = |f: fn(&ClassMetrics) -> f64| {
            if per_class.is_empty() {
                0.0
            } else {
                per_class.iter().map(f).sum::<f64>() / per_class.len() as f64
            }
        };
        EvalReport {
            classifier: classifier.into(),
            accuracy: confusion.accuracy(),
            macro_precision: mean(|m| m.precision),
            macro_recall: mean(|m| m.recall),
            macro_f_measure: mean(|m| m.f_measure),
            per_class,
            confusion,
            notes,
        }
    }
}
