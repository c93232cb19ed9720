//! SMOTE oversampling: exact k-nearest-neighbour search under a Minkowski
//! metric and interpolation toward a random neighbour.
//!
//! The oversampling amount is a percentage `E`. It is decomposed as
//! `E = 100 * whole + rem`: every minority record produces `whole` synthetic
//! records, and a seeded random subset of `floor(rem * M / 100)` records
//! produces one more. The total is therefore always `floor(E * M / 100)`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, Provenance, Record, RngSeed};
use crate::error::{Error, Result};

/// How the interpolation factor is drawn for a synthetic record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// A fresh factor in `[0, 1)` for every attribute. The synthetic point
    /// lies in the axis-aligned box spanned by the record and its neighbour.
    #[default]
    PerAttribute,
    /// One factor per synthetic record. The synthetic point lies on the
    /// segment between the record and its neighbour.
    PerRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    /// Oversampling amount `E` in percent (500 means five synthetic records
    /// per minority record).
    pub amount_percent: u32,
    /// Neighbour count `s`.
    pub neighbors: usize,
    /// Minkowski exponent `q`.
    #[serde(default = "default_q")]
    pub minkowski_q: f64,
    #[serde(default)]
    pub gap: GapMode,
    pub seed: RngSeed,
}

fn default_q() -> f64 {
    2.0
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            amount_percent: 100,
            neighbors: 5,
            minkowski_q: 2.0,
            gap: GapMode::PerAttribute,
            seed: RngSeed(0),
        }
    }
}

impl SmoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.amount_percent == 0 {
            return Err(Error::ConfigInvalid("SMOTE amount must be >= 1%".into()));
        }
        if self.neighbors == 0 {
            return Err(Error::ConfigInvalid("neighbour count must be >= 1".into()));
        }
        if !(self.minkowski_q >= 1.0 && self.minkowski_q.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "Minkowski exponent must be finite and >= 1, got {}",
                self.minkowski_q
            )));
        }
        Ok(())
    }

    /// Number of synthetic records generated from `minority_count` records.
    pub fn synthetic_count(&self, minority_count: usize) -> usize {
        self.amount_percent as usize * minority_count / 100
    }
}

/// `(sum_j |a_j - b_j|^q)^(1/q)`.
pub fn minkowski_distance(a: &[f64], b: &[f64], q: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(minkowski_unchecked(a, b, q))
}

#[inline]
pub(crate) fn minkowski_unchecked(a: &[f64], b: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    } else if q == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// Sorted neighbour lists, one row per minority record. Indices refer to
/// positions among the minority records.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    rows: Vec<Vec<Neighbor>>,
}

impl NeighborTable {
    pub fn rows(&self) -> &[Vec<Neighbor>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[Neighbor] {
        &self.rows[j]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn neighbors(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Neighbour search for the records of class `label` by linear scan over
    /// every record of `data` (O(M * N * d)). Ties go to the lower minority
    /// index.
    pub fn build_within(data: &Dataset, label: &Label, s: usize, q: f64) -> Result<Self> {
        let members: Vec<&[f64]> = data
            .rows()
            .iter()
            .filter(|r| &r.label == label)
            .map(|r| r.values.as_slice())
            .collect();
        if members.len() <= s {
            return Err(Error::NotEnoughRecords {
                neighbors: s,
                records: members.len(),
            });
        }
        if s == 0 {
            return Err(Error::ConfigInvalid("neighbour count must be >= 1".into()));
        }
        let rows = members
            .par_iter()
            .enumerate()
            .map(|(j, query)| {
                let mut best: Vec<Neighbor> = Vec::with_capacity(s + 1);
                let mut local = 0usize;
                for r in data.rows() {
                    if &r.label != label {
                        continue;
                    }
                    let i = local;
                    local += 1;
                    if i == j {
                        continue;
                    }
                    let d = minkowski_unchecked(query, &r.values, q);
                    if best.len() == s && d >= best[s - 1].distance {
                        continue;
                    }
                    // Insert after any equal distances: those have lower indices.
                    let at = best.partition_point(|n| n.distance <= d);
                    best.insert(
                        at,
                        Neighbor {
                            index: i,
                            distance: d,
                        },
                    );
                    best.truncate(s);
                }
                best
            })
            .collect();
        Ok(NeighborTable { rows })
    }
}

/// `s` nearest same-class neighbours of every record in `minority`.
pub fn nearest_neighbors(minority: &Dataset, s: usize, q: f64) -> Result<NeighborTable> {
    let Some(first) = minority.rows().first() else {
        return Err(Error::NotEnoughRecords {
            neighbors: s,
            records: 0,
        });
    };
    let label = first.label.clone();
    if minority.rows().iter().any(|r| r.label != label) {
        return Err(Error::ConfigInvalid(
            "neighbour search expects records of a single class".into(),
        ));
    }
    NeighborTable::build_within(minority, &label, s, q)
}

/// Minority indices that receive one extra synthetic record for the
/// fractional part of the amount.
fn remainder_subset(minority_count: usize, cfg: &SmoteConfig) -> Vec<bool> {
    let rem = (cfg.amount_percent % 100) as usize;
    let take = rem * minority_count / 100;
    let mut idx: Vec<usize> = (0..minority_count).collect();
    idx.shuffle(&mut cfg.seed.derive("smote-remainder").rng());
    let mut chosen = vec![false; minority_count];
    for &i in &idx[..take] {
        chosen[i] = true;
    }
    chosen
}

/// Synthetic records for `minority`, using a neighbour table built over it.
/// Output order is by originating record; each record draws from its own
/// random stream.
pub fn generate_synthetic(
    minority: &Dataset,
    table: &NeighborTable,
    cfg: &SmoteConfig,
) -> Result<Dataset> {
    cfg.validate()?;
    let m = minority.len();
    if table.len() != m {
        return Err(Error::ConfigInvalid(format!(
            "neighbour table has {} rows for {} minority records",
            table.len(),
            m
        )));
    }
    if table.neighbors() != cfg.neighbors {
        return Err(Error::ConfigInvalid(format!(
            "neighbour table built with s = {}, config asks for {}",
            table.neighbors(),
            cfg.neighbors
        )));
    }
    let whole = (cfg.amount_percent / 100) as usize;
    let extra = remainder_subset(m, cfg);
    let originals = minority.rows();

    let rows: Vec<Record> = (0..m)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut rng = cfg.seed.stream(j as u64);
            let n = whole + usize::from(extra[j]);
            let base = &originals[j];
            let neigh = table.row(j);
            (0..n)
                .map(|_| {
                    let pick = neigh[rng.random_range(0..neigh.len())].index;
                    let other = &originals[pick].values;
                    let values = interpolate(&base.values, other, cfg.gap, &mut rng);
                    Record {
                        values,
                        label: base.label.clone(),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    Ok(Dataset::from_parts_unchecked(
        minority.schema().clone(),
        rows,
        Provenance::Synthetic,
    ))
}

fn interpolate<R: Rng>(base: &[f64], other: &[f64], mode: GapMode, rng: &mut R) -> Vec<f64> {
    let shared = match mode {
        GapMode::PerRecord => Some(rng.random::<f64>()),
        GapMode::PerAttribute => None,
    };
    base.iter()
        .zip(other)
        .map(|(&a, &b)| {
            let gap = shared.unwrap_or_else(|| rng.random::<f64>());
            let v = a + gap * (b - a);
            // a + gap*(b-a) can land one ulp past b after rounding.
            v.clamp(a.min(b), a.max(b))
        })
        .collect()
}

/// Oversample class `minority_label` and append the synthetic records after
/// the untouched input records.
pub fn run_smote(data: &Dataset, minority_label: &Label, cfg: &SmoteConfig) -> Result<Dataset> {
    cfg.validate()?;
    let minority = data.filter_label(minority_label);
    if minority.is_empty() {
        return Err(Error::UnknownLabel(minority_label.clone()));
    }
    let table = NeighborTable::build_within(data, minority_label, cfg.neighbors, cfg.minkowski_q)?;
    let synthetic = generate_synthetic(&minority, &table, cfg)?;
    data.concat(&synthetic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Schema;

    fn line(xs: &[f64]) -> Dataset {
        let schema = Schema::with_features(&["x"], "y").unwrap();
        let rows = xs.iter().map(|&x| Record::new(vec![x], "m")).collect();
        Dataset::new(schema, rows, Provenance::Original).unwrap()
    }

    fn plane(points: &[(f64, f64, &str)]) -> Dataset {
        let schema = Schema::with_features(&["a", "b"], "y").unwrap();
        let rows = points
            .iter()
            .map(|&(a, b, l)| Record::new(vec![a, b], l))
            .collect();
        Dataset::new(schema, rows, Provenance::Original).unwrap()
    }

    fn cfg(amount: u32, s: usize) -> SmoteConfig {
        SmoteConfig {
            amount_percent: amount,
            neighbors: s,
            seed: RngSeed(11),
            ..SmoteConfig::default()
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            minkowski_distance(&[1.5, 2.0], &[1.5, 2.0], 3.0).unwrap(),
            0.0
        );
        assert_eq!(
            minkowski_distance(&[0.0, 0.0], &[3.0, 4.0], 2.0).unwrap(),
            5.0
        );
        assert_eq!(
            minkowski_distance(&[1.0, 2.0, 3.0], &[4.0, 0.0, 3.0], 1.0).unwrap(),
            5.0
        );
        assert!(matches!(
            minkowski_distance(&[1.0], &[1.0, 2.0], 2.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn odd_exponent_uses_absolute_differences() {
        let d = minkowski_distance(&[0.0, 0.0], &[-1.0, -1.0], 3.0).unwrap();
        assert!((d - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn collinear_neighbors() {
        let t = nearest_neighbors(&line(&[0.0, 1.0, 10.0]), 1, 2.0).unwrap();
        let first: Vec<usize> = t.rows().iter().map(|r| r[0].index).collect();
        assert_eq!(first, vec![1, 0, 1]);
    }

    #[test]
    fn duplicates_pick_each_other() {
        let t = nearest_neighbors(&line(&[2.0, 2.0, 3.0]), 1, 2.0).unwrap();
        assert_eq!(t.row(0)[0].index, 1);
        assert_eq!(t.row(1)[0].index, 0);
        assert_eq!(t.row(0)[0].distance, 0.0);
    }

    #[test]
    fn ties_prefer_lower_index() {
        // 1 is equidistant from 0 and 2.
        let t = nearest_neighbors(&line(&[0.0, 1.0, 2.0]), 1, 2.0).unwrap();
        assert_eq!(t.row(1)[0].index, 0);
    }

    #[test]
    fn too_few_records() {
        assert!(matches!(
            nearest_neighbors(&line(&[0.0, 1.0]), 2, 2.0),
            Err(Error::NotEnoughRecords { .. })
        ));
    }

    #[test]
    fn identical_pair_reproduces_point() {
        let ds = plane(&[(3.0, -1.0, "m"), (3.0, -1.0, "m")]);
        let out = run_smote(&ds, &Label::from("m"), &cfg(300, 1)).unwrap();
        assert_eq!(out.len(), 2 + 6);
        for r in &out.rows()[2..] {
            assert_eq!(r.values, vec![3.0, -1.0]);
        }
    }

    #[test]
    fn per_record_gap_stays_on_segment() {
        let ds = plane(&[(0.0, 0.0, "m"), (1.0, 1.0, "m")]);
        for seed in 0..50 {
            let c = SmoteConfig {
                gap: GapMode::PerRecord,
                seed: RngSeed(seed),
                ..cfg(500, 1)
            };
            let out = run_smote(&ds, &Label::from("m"), &c).unwrap();
            for r in &out.rows()[2..] {
                assert_eq!(r.values[0], r.values[1]);
                assert!((0.0..1.0).contains(&r.values[0]));
            }
        }
    }

    #[test]
    fn per_attribute_gap_stays_in_box() {
        let ds = plane(&[(0.0, 0.0, "m"), (1.0, 1.0, "m")]);
        let out = run_smote(&ds, &Label::from("m"), &cfg(500, 1)).unwrap();
        let distinct = out.rows()[2..]
            .iter()
            .filter(|r| r.values[0] != r.values[1])
            .count();
        assert!(distinct > 0);
        for r in &out.rows()[2..] {
            assert!(r.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn amount_500_gives_five_per_record() {
        let pts: Vec<f64> = (0..7).map(f64::from).collect();
        let ds = line(&pts);
        let out = run_smote(&ds, &Label::from("m"), &cfg(500, 2)).unwrap();
        assert_eq!(out.len() - ds.len(), 35);
    }

    #[test]
    fn fractional_amounts_follow_floor_law() {
        let pts: Vec<f64> = (0..10).map(f64::from).collect();
        let ds = line(&pts);
        for (amount, extra) in [(100, 10), (130, 13), (50, 5), (220, 22), (1, 0)] {
            let out = run_smote(&ds, &Label::from("m"), &cfg(amount, 3)).unwrap();
            assert_eq!(out.len() - ds.len(), extra, "E = {amount}");
        }
    }

    #[test]
    fn originals_untouched_and_majority_unchanged() {
        let ds = plane(&[
            (0.0, 0.0, "m"),
            (1.0, 0.5, "m"),
            (0.2, 0.9, "m"),
            (5.0, 5.0, "M"),
            (6.0, 5.0, "M"),
        ]);
        let out = run_smote(&ds, &Label::from("m"), &cfg(200, 2)).unwrap();
        assert_eq!(&out.rows()[..5], ds.rows());
        assert_eq!(out.count_of(&Label::from("M")), 2);
        assert_eq!(out.count_of(&Label::from("m")), 9);
        assert!(out.rows()[5..].iter().all(|r| r.values[0] <= 1.0));
    }

    #[test]
    fn unknown_minority_label() {
        let ds = line(&[0.0, 1.0]);
        assert!(matches!(
            run_smote(&ds, &Label::from("zzz"), &cfg(100, 1)),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn invalid_config() {
        let ds = line(&[0.0, 1.0, 2.0]);
        let bad = SmoteConfig {
            minkowski_q: 0.5,
            ..cfg(100, 1)
        };
        assert!(matches!(
            run_smote(&ds, &Label::from("m"), &bad),
            Err(Error::ConfigInvalid(_))
        ));
        assert!(run_smote(&ds, &Label::from("m"), &cfg(0, 1)).is_err());
    }
}
