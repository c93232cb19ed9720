//! Tabular dataset model: schema, records, CSV ingestion, stratified splits
//! and seeded shuffling.
//!
//! A [`Dataset`] holds numeric feature vectors plus one opaque class label per
//! record. Labels are never used arithmetically; they only need an ordering so
//! that tie rules elsewhere are deterministic.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Opaque class identifier.
///
/// Ordered "naturally": labels that parse as integers sort numerically and
/// before any non-integer label, the rest sort lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<i64>(), other.0.parse::<i64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered column list with exactly one label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schema {
    columns: Vec<Column>,
    label_column: usize,
}

#[derive(Deserialize)]
struct SchemaFile {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(Error::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate column `{}`",
                    c.name
                )));
            }
        }
        let labels: Vec<usize> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Label)
            .map(|(i, _)| i)
            .collect();
        match labels.as_slice() {
            [i] => Ok(Schema {
                label_column: *i,
                columns,
            }),
            [] => Err(Error::InvalidSchema("no label column".into())),
            _ => Err(Error::InvalidSchema("more than one label column".into())),
        }
    }

    /// Numeric features named by `features`, label column named `label`
    /// appended last.
    pub fn with_features<S: AsRef<str>>(features: &[S], label: &str) -> Result<Self> {
        let mut columns: Vec<Column> = features
            .iter()
            .map(|n| Column {
                name: n.as_ref().to_owned(),
                kind: ColumnKind::Numeric,
            })
            .collect();
        columns.push(Column {
            name: label.to_owned(),
            kind: ColumnKind::Label,
        });
        Schema::new(columns)
    }

    /// Parse a TOML schema file:
    ///
    /// ```toml
    /// [[columns]]
    /// name = "x"
    /// kind = "numeric"
    ///
    /// [[columns]]
    /// name = "activity"
    /// kind = "label"
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: SchemaFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<schema>".into(),
            message: e.to_string(),
        })?;
        Schema::new(file.columns)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.into(),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            columns: &'a [Column],
        }
        toml::to_string(&Out {
            columns: &self.columns,
        })
        .expect("schema serializes")
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn label_column(&self) -> usize {
        self.label_column
    }

    pub fn label_name(&self) -> &str {
        &self.columns[self.label_column].name
    }

    /// Names of the numeric columns, in record-value order.
    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Numeric)
            .map(|c| c.name.as_str())
    }

    /// Number of numeric attributes `d`.
    pub fn dim(&self) -> usize {
        self.columns.len() - 1
    }

    /// Position of a numeric column inside `Record::values`.
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names().position(|n| n == name)
    }

    /// Schema without the given numeric features.
    pub(crate) fn without_features(&self, drop: &[usize]) -> Schema {
        let mut feature = 0;
        let columns = self
            .columns
            .iter()
            .filter(|c| {
                if c.kind == ColumnKind::Label {
                    return true;
                }
                let keep = !drop.contains(&feature);
                feature += 1;
                keep
            })
            .cloned()
            .collect();
        Schema::new(columns).expect("subset of a valid schema is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub values: Vec<f64>,
    pub label: Label,
}

impl Record {
    pub fn new(values: Vec<f64>, label: impl Into<Label>) -> Self {
        Record {
            values,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Original,
    Synthetic,
    Perturbed,
    Merged,
}

/// Seed for every stochastic operation. Equal seeds and equal inputs give
/// bit-identical outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent generator for item `index` (a record, a row). Streams are
    /// addressed directly, so parallel and serial consumers agree.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// Sub-seed keyed by a stage name (and optionally a grid coordinate).
    pub fn derive(self, key: &str) -> RngSeed {
        let mut h = Sha256::new();
        h.update(self.0.to_le_bytes());
        h.update(key.as_bytes());
        let digest = h.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        RngSeed(u64::from_le_bytes(bytes))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Record>,
    provenance: Provenance,
}

impl Dataset {
    /// Validates record width and finiteness.
    pub fn new(schema: Schema, rows: Vec<Record>, provenance: Provenance) -> Result<Self> {
        let d = schema.dim();
        let names: Vec<&str> = schema.feature_names().collect();
        for (i, r) in rows.iter().enumerate() {
            if r.values.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    found: r.values.len(),
                    expected: d,
                });
            }
            if let Some(j) = r.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonNumericCell {
                    row: i,
                    column: names[j].to_owned(),
                    value: r.values[j].to_string(),
                });
            }
        }
        Ok(Dataset {
            schema,
            rows,
            provenance,
        })
    }

    pub(crate) fn from_parts_unchecked(
        schema: Schema,
        rows: Vec<Record>,
        provenance: Provenance,
    ) -> Self {
        Dataset {
            schema,
            rows,
            provenance,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Record> {
        self.rows
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.schema.dim()
    }

    /// Distinct labels in natural order.
    pub fn labels(&self) -> Vec<Label> {
        self.class_counts().into_keys().collect()
    }

    pub fn class_counts(&self) -> BTreeMap<Label, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.label.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn count_of(&self, label: &Label) -> usize {
        self.rows.iter().filter(|r| &r.label == label).count()
    }

    /// Records carrying `label`, as a new dataset with the same schema.
    pub fn filter_label(&self, label: &Label) -> Dataset {
        let rows = self
            .rows
            .iter()
            .filter(|r| &r.label == label)
            .cloned()
            .collect();
        Dataset::from_parts_unchecked(self.schema.clone(), rows, self.provenance)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Concatenate `other` after `self`. Schemas must match.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch);
        }
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        Ok(Dataset::from_parts_unchecked(
            self.schema.clone(),
            rows,
            Provenance::Merged,
        ))
    }

    /// Column `j` of the feature matrix.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r.values[j])
    }
}

/// Read a comma-delimited CSV whose header contains every schema column
/// (in any order). Extra columns are ignored. Empty numeric cells are
/// rejected rather than imputed.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ds = read_csv(file, schema)?;
    if ds.is_empty() {
        return Err(Error::EmptyFile(path.into()));
    }
    ds.provenance = Provenance::Original;
    Ok(ds)
}

/// Reader-based variant of [`load_csv`]; does not reject an empty body.
pub fn read_csv<R: std::io::Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let positions: Vec<usize> = schema
        .columns()
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c.name)
                .ok_or_else(|| Error::MissingColumn(c.name.clone()))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut values = Vec::with_capacity(schema.dim());
        let mut label = None;
        for (col, &pos) in schema.columns().iter().zip(&positions) {
            let cell = rec.get(pos).ok_or(Error::RaggedRow {
                row: i,
                found: rec.len(),
                expected: header.len(),
            })?;
            match col.kind {
                ColumnKind::Label => label = Some(Label::new(cell)),
                ColumnKind::Numeric => {
                    if cell.is_empty() {
                        return Err(Error::MissingValue {
                            row: i,
                            column: col.name.clone(),
                        });
                    }
                    let v: f64 = cell
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| Error::NonNumericCell {
                            row: i,
                            column: col.name.clone(),
                            value: cell.to_owned(),
                        })?;
                    values.push(v);
                }
            }
        }
        rows.push(Record {
            values,
            label: label.expect("schema has a label column"),
        });
    }
    Ok(Dataset::from_parts_unchecked(
        schema.clone(),
        rows,
        Provenance::Original,
    ))
}

/// Write in schema column order. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_csv<W: std::io::Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let schema = data.schema();
    w.write_record(schema.columns().iter().map(|c| c.name.as_str()))?;
    let label_at = schema.label_column();
    let mut fields: Vec<String> = Vec::with_capacity(schema.columns().len());
    for r in data.rows() {
        fields.clear();
        let mut vals = r.values.iter();
        for j in 0..schema.columns().len() {
            if j == label_at {
                fields.push(r.label.to_string());
            } else {
                fields.push(vals.next().expect("width checked").to_string());
            }
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(data, std::io::BufWriter::new(file))
}

/// Per-class split: each class contributes `round(n_c * test_fraction)`
/// records to the test side (clamped so both sides keep at least one).
/// Record order within each side follows the input order.
pub fn stratified_split(
    data: &Dataset,
    test_fraction: f64,
    seed: RngSeed,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::ConfigInvalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class: BTreeMap<&Label, Vec<usize>> = BTreeMap::new();
    for (i, r) in data.rows().iter().enumerate() {
        by_class.entry(&r.label).or_default().push(i);
    }
    let mut in_test = vec![false; data.len()];
    let mut rng = seed.rng();
    for (label, mut idx) in by_class {
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall(label.clone()));
        }
        let n = idx.len();
        let take = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
        idx.shuffle(&mut rng);
        for &i in &idx[..take] {
            in_test[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (r, t) in data.rows().iter().zip(in_test) {
        if t {
            test.push(r.clone());
        } else {
            train.push(r.clone());
        }
    }
    let schema = data.schema().clone();
    Ok((
        Dataset::from_parts_unchecked(schema.clone(), train, data.provenance()),
        Dataset::from_parts_unchecked(schema, test, data.provenance()),
    ))
}

/// Keep a uniformly random subset of `count` records of class `label`.
/// Records of other classes keep their relative order and come first; the
/// retained subset follows in shuffled order.
pub fn shuffle_class_subset(
    data: &Dataset,
    label: &Label,
    count: usize,
    seed: RngSeed,
) -> Result<Dataset> {
    let (mut members, others): (Vec<&Record>, Vec<&Record>) =
        data.rows().iter().partition(|r| &r.label == label);
    if count > members.len() {
        return Err(Error::CountExceedsClass {
            label: label.clone(),
            requested: count,
            available: members.len(),
        });
    }
    members.shuffle(&mut seed.rng());
    let rows = others
        .into_iter()
        .chain(members.into_iter().take(count))
        .cloned()
        .collect();
    Ok(Dataset::from_parts_unchecked(
        data.schema().clone(),
        rows,
        data.provenance(),
    ))
}
