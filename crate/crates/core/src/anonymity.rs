//! Quasi-identifier generalization, equivalence classes and the
//! k-anonymity re-identification risk score.
//!
//! Risk is the fraction of records whose generalized quasi-identifier tuple
//! is shared by fewer than `k` records.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, Dataset, Record};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "bins")]
pub enum Generalization {
    /// Equal-width bins over the column's observed range.
    EqualWidthBins(usize),
    /// Remove the column from the released data.
    Drop,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiColumn {
    pub name: String,
    pub generalization: Generalization,
}

/// Quasi-identifier columns and how each is generalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiIdentifierSpec {
    pub columns: Vec<QiColumn>,
}

impl QuasiIdentifierSpec {
    pub fn new(columns: Vec<QiColumn>) -> Self {
        QuasiIdentifierSpec { columns }
    }

    /// Every numeric column, binned into `bins` equal-width bins.
    pub fn all_numeric(data: &Dataset, bins: usize) -> Self {
        Self::binned(data.schema().feature_names(), bins)
    }

    pub fn binned<I, S>(names: I, bins: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        QuasiIdentifierSpec {
            columns: names
                .into_iter()
                .map(|n| QiColumn {
                    name: n.as_ref().to_owned(),
                    generalization: Generalization::EqualWidthBins(bins),
                })
                .collect(),
        }
    }

    /// Resolves column names to feature indices.
    fn resolve(&self, data: &Dataset) -> Result<Vec<(usize, Generalization)>> {
        if self.columns.is_empty() {
            return Err(Error::ConfigInvalid(
                "quasi-identifier spec lists no columns".into(),
            ));
        }
        let schema = data.schema();
        self.columns
            .iter()
            .map(|c| {
                let is_label = schema
                    .columns()
                    .iter()
                    .any(|sc| sc.name == c.name && sc.kind == ColumnKind::Label);
                if is_label {
                    return Err(Error::ConfigInvalid(format!(
                        "label column `{}` cannot be a quasi-identifier",
                        c.name
                    )));
                }
                let idx = schema
                    .feature_index(&c.name)
                    .ok_or_else(|| Error::UnknownColumn(c.name.clone()))?;
                if c.generalization == Generalization::EqualWidthBins(0) {
                    return Err(Error::ZeroBins(c.name.clone()));
                }
                Ok((idx, c.generalization))
            })
            .collect()
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        self.resolve(data).map(|_| ())
    }
}

/// Bin index of `v` for a column spanning `[min, max]`.
pub fn bin_index(v: f64, min: f64, max: f64, bins: usize) -> f64 {
    let span = max - min;
    if span <= 0.0 {
        return 0.0;
    }
    let eps = 1e-9 * span;
    ((v - min) * bins as f64 / (span + eps)).floor()
}

/// Apply each rule to its column. Bin edges come from the column's own
/// min/max in `data`.
pub fn generalize(data: &Dataset, spec: &QuasiIdentifierSpec) -> Result<Dataset> {
    let rules = spec.resolve(data)?;
    let mut rows: Vec<Record> = data.rows().to_vec();
    let mut dropped = Vec::new();
    for &(j, rule) in &rules {
        match rule {
            Generalization::Identity => {}
            Generalization::Drop => dropped.push(j),
            Generalization::EqualWidthBins(bins) => {
                let (min, max) = data
                    .column(j)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                for r in &mut rows {
                    r.values[j] = bin_index(r.values[j], min, max, bins);
                }
            }
        }
    }
    if dropped.is_empty() {
        return Ok(Dataset::from_parts_unchecked(
            data.schema().clone(),
            rows,
            data.provenance(),
        ));
    }
    dropped.sort_unstable();
    dropped.dedup();
    for r in &mut rows {
        r.values = r
            .values
            .iter()
            .enumerate()
            .filter(|(j, _)| dropped.binary_search(j).is_err())
            .map(|(_, v)| *v)
            .collect();
    }
    Ok(Dataset::from_parts_unchecked(
        data.schema().without_features(&dropped),
        rows,
        data.provenance(),
    ))
}

/// Generalized quasi-identifier tuple, compared bitwise (with `-0.0`
/// folded into `0.0`).
pub type QiKey = Vec<u64>;

fn key_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// Records grouped by identical generalized quasi-identifier values, in
/// order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClasses {
    groups: IndexMap<QiKey, Vec<usize>>,
    total: usize,
}

impl EquivalenceClasses {
    pub fn groups(&self) -> impl Iterator<Item = (&QiKey, &[usize])> {
        self.groups.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.values().map(Vec::len)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn total_records(&self) -> usize {
        self.total
    }

    /// Build directly from group sizes; record indices are assigned
    /// consecutively.
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mut groups = IndexMap::new();
        let mut next = 0;
        for (g, &s) in sizes.iter().enumerate() {
            assert!(s > 0, "equivalence classes are non-empty");
            groups.insert(vec![g as u64], (next..next + s).collect());
            next += s;
        }
        EquivalenceClasses {
            groups,
            total: next,
        }
    }
}

pub fn equivalence_classes(
    data: &Dataset,
    spec: &QuasiIdentifierSpec,
) -> Result<EquivalenceClasses> {
    let rules = spec.resolve(data)?;
    let generalized = generalize(data, spec)?;
    // Drop rules take their column out of the tuple entirely.
    let kept: Vec<&str> = spec
        .columns
        .iter()
        .zip(&rules)
        .filter(|(_, (_, g))| *g != Generalization::Drop)
        .map(|(c, _)| c.name.as_str())
        .collect();
    let positions: Vec<usize> = kept
        .iter()
        .map(|n| {
            generalized
                .schema()
                .feature_index(n)
                .expect("kept columns survive generalization")
        })
        .collect();

    let mut groups: IndexMap<QiKey, Vec<usize>> = IndexMap::new();
    for (i, r) in generalized.rows().iter().enumerate() {
        let key: QiKey = positions.iter().map(|&j| key_bits(r.values[j])).collect();
        groups.entry(key).or_default().push(i);
    }
    Ok(EquivalenceClasses {
        groups,
        total: data.len(),
    })
}

/// True iff every equivalence class has at least `k` members.
pub fn check_k_anonymity(classes: &EquivalenceClasses, k: usize) -> bool {
    classes.sizes().all(|s| s >= k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub k: usize,
    /// Equivalence-class size -> number of classes of that size.
    pub class_size_histogram: BTreeMap<usize, usize>,
    pub equivalence_classes: usize,
    pub total_records: usize,
    pub at_risk_count: usize,
    pub risk: f64,
    pub satisfies_k_anonymity: bool,
}

pub fn risk_report(classes: &EquivalenceClasses, k: usize) -> RiskReport {
    let mut histogram = BTreeMap::new();
    let mut at_risk = 0;
    for s in classes.sizes() {
        *histogram.entry(s).or_insert(0) += 1;
        if s < k {
            at_risk += s;
        }
    }
    let total = classes.total_records();
    RiskReport {
        k,
        class_size_histogram: histogram,
        equivalence_classes: classes.len(),
        total_records: total,
        at_risk_count: at_risk,
        risk: if total == 0 {
            0.0
        } else {
            at_risk as f64 / total as f64
        },
        satisfies_k_anonymity: at_risk == 0,
    }
}

/// Generalize, group and score in one call.
pub fn audit(data: &Dataset, spec: &QuasiIdentifierSpec, k: usize) -> Result<RiskReport> {
    if k == 0 {
        return Err(Error::ConfigInvalid("k must be >= 1".into()));
    }
    Ok(risk_report(&equivalence_classes(data, spec)?, k))
}
