//! End-to-end runs: split, SMOTE on the training side, perturbation of the
//! merged table, k-anonymity audit of exactly what would be released, and
//! utility evaluation on the untouched test split. Also the parameter sweep
//! and the per-figure CSV tables derived from it.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anonymity::{self, QuasiIdentifierSpec, RiskReport, DEFAULT_BINS};
use crate::data::{self, Dataset, Label, RngSeed, Schema};
use crate::error::{Error, Result};
use crate::eval::{self, ClassifierKind, ClassifierParams, EvalReport};
use crate::noise::{self, NoiseConfig, NoiseModel};
use crate::smote::{self, GapMode, SmoteConfig};

/// Stage names, in execution order.
pub const STAGES: [&str; 6] = ["load", "split", "smote", "perturb", "audit", "evaluate"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub minority_label: Label,
    /// SMOTE amount `E` in percent.
    pub smote_amount: u32,
    pub neighbors: usize,
    pub minkowski_q: f64,
    pub gap_mode: GapMode,
    /// Gaussian noise level `g`.
    pub noise: f64,
    pub noise_model: NoiseModel,
    /// Quasi-identifier columns; empty means every numeric column.
    pub qi_columns: Vec<String>,
    pub bins: usize,
    /// Full per-column rules; overrides `qi_columns` / `bins` when set.
    pub qi_rules: Option<QuasiIdentifierSpec>,
    pub k: usize,
    pub classifiers: Vec<ClassifierKind>,
    pub classifier_params: ClassifierParams,
    pub test_fraction: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            schema: None,
            minority_label: Label::from(crate::surrogate::MINORITY_ACTIVITY),
            smote_amount: 100,
            neighbors: 5,
            minkowski_q: 2.0,
            gap_mode: GapMode::PerAttribute,
            noise: 0.0,
            noise_model: NoiseModel::DiagonalScaled,
            qi_columns: Vec::new(),
            bins: DEFAULT_BINS,
            qi_rules: None,
            k: 2,
            classifiers: vec![ClassifierKind::Knn, ClassifierKind::Nb, ClassifierKind::Dt],
            classifier_params: ClassifierParams::default(),
            test_fraction: 0.3,
            seed: 7,
            out: None,
        }
    }
}

impl PipelineConfig {
    /// g = 0.3, E = 500%, k = 2 with the default quasi-identifiers.
    pub fn headline() -> Self {
        PipelineConfig {
            smote_amount: 500,
            noise: 0.3,
            k: 2,
            ..Default::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            path: "<config>".into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    /// Resolve relative `input`, `schema` and `out` against `dir`, normally
    /// the directory holding the config file.
    pub fn rebase(&mut self, dir: &Path) {
        for path in [&mut self.input, &mut self.schema, &mut self.out]
            .into_iter()
            .flatten()
        {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn qi_spec(&self, data: &Dataset) -> QuasiIdentifierSpec {
        if let Some(rules) = &self.qi_rules {
            return rules.clone();
        }
        if self.qi_columns.is_empty() {
            QuasiIdentifierSpec::all_numeric(data, self.bins)
        } else {
            QuasiIdentifierSpec::binned(&self.qi_columns, self.bins)
        }
    }

    /// Grid coordinate string used in sub-seed derivation and directory
    /// names.
    pub fn point_key(&self) -> String {
        format!("g{}_E{}_k{}", self.noise, self.smote_amount, self.k)
    }

    /// Seed for one stage at this config's grid point.
    pub fn stage_seed(&self, stage: &str) -> RngSeed {
        RngSeed(self.seed).derive(&format!("{stage}|{}", self.point_key()))
    }

    /// The split depends only on the master seed, so every grid point is
    /// scored on the same held-out records.
    pub fn split_seed(&self) -> RngSeed {
        RngSeed(self.seed).derive("split")
    }

    pub fn smote_config(&self) -> SmoteConfig {
        SmoteConfig {
            amount_percent: self.smote_amount,
            neighbors: self.neighbors,
            minkowski_q: self.minkowski_q,
            gap: self.gap_mode,
            seed: self.stage_seed("smote"),
        }
    }

    pub fn noise_config(&self) -> NoiseConfig {
        NoiseConfig {
            level: self.noise,
            model: self.noise_model,
            seed: self.stage_seed("perturb"),
        }
    }

    pub fn validate(&self, data: &Dataset) -> Result<()> {
        self.smote_config().validate()?;
        self.noise_config().validate()?;
        if self.k == 0 {
            return Err(Error::ConfigInvalid("k must be >= 1".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::ConfigInvalid("no classifiers selected".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if data.count_of(&self.minority_label) == 0 {
            return Err(Error::UnknownLabel(self.minority_label.clone()));
        }
        self.qi_spec(data).validate(data)
    }
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub released: Dataset,
    pub risk: RiskReport,
    pub evals: Vec<EvalReport>,
    /// Stages in the order they ran.
    pub stages: Vec<&'static str>,
    /// Released records identical to a held-out test record that is not
    /// also a training record. Always 0 unless something leaks.
    pub leaked_records: usize,
}

fn record_key(r: &crate::data::Record) -> (Vec<u64>, &str) {
    (
        r.values.iter().map(|v| v.to_bits()).collect(),
        r.label.as_str(),
    )
}

fn leakage(train: &Dataset, test: &Dataset, released: &Dataset) -> usize {
    let train_keys: HashSet<_> = train.rows().iter().map(record_key).collect();
    let test_only: HashSet<_> = test
        .rows()
        .iter()
        .map(record_key)
        .filter(|k| !train_keys.contains(k))
        .collect();
    released
        .rows()
        .iter()
        .filter(|r| test_only.contains(&record_key(r)))
        .count()
}

/// Run every stage on an in-memory dataset. Nothing is written.
pub fn run_on(data: &Dataset, cfg: &PipelineConfig) -> Result<Outcome> {
    cfg.validate(data)?;
    let mut stages = vec!["load"];

    let (train, test) = data::stratified_split(data, cfg.test_fraction, cfg.split_seed())
        .map_err(|e| e.in_stage("split"))?;
    stages.push("split");

    let merged = smote::run_smote(&train, &cfg.minority_label, &cfg.smote_config())
        .map_err(|e| e.in_stage("smote"))?;
    stages.push("smote");

    let released =
        noise::perturb(&merged, &cfg.noise_config()).map_err(|e| e.in_stage("perturb"))?;
    stages.push("perturb");

    let risk = anonymity::audit(&released, &cfg.qi_spec(&released), cfg.k)
        .map_err(|e| e.in_stage("audit"))?;
    stages.push("audit");

    let evals = cfg
        .classifiers
        .iter()
        .map(|&kind| {
            eval::evaluate(
                kind,
                &cfg.classifier_params,
                &released,
                &test,
                cfg.stage_seed(kind.as_str()),
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("evaluate"))?;
    stages.push("evaluate");

    let leaked_records = leakage(&train, &test, &released);
    Ok(Outcome {
        released,
        risk,
        evals,
        stages,
        leaked_records,
    })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `released.csv`, `risk.json` and one `eval_<classifier>.json` per model.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    data::save_csv(&outcome.released, dir.join("released.csv"))?;
    write_json(&outcome.risk, &dir.join("risk.json"))?;
    for e in &outcome.evals {
        write_json(e, &dir.join(format!("eval_{}.json", e.classifier)))?;
    }
    Ok(())
}

pub fn load_input(cfg: &PipelineConfig) -> Result<Dataset> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("no input file given".into()))?;
    let schema = match &cfg.schema {
        Some(p) => Schema::load(p).map_err(|e| e.in_stage("load"))?,
        None => {
            return Err(Error::ConfigInvalid("no schema file given".into()));
        }
    };
    data::load_csv(input, &schema).map_err(|e| e.in_stage("load"))
}

/// Load the configured input, run, and write artifacts to `cfg.out` when
/// set.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Outcome> {
    let data = load_input(cfg)?;
    let outcome = run_on(&data, cfg)?;
    if let Some(out) = &cfg.out {
        write_outcome(&outcome, out)?;
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub noise_levels: Vec<f64>,
    pub smote_amounts: Vec<u32>,
    pub k_values: Vec<usize>,
}

impl SweepGrid {
    /// g in {0.1, 0.3, 0.6, 1.0} x E in {130, 220, 370, 500} x k = 2.
    pub fn figure_grid() -> Self {
        SweepGrid {
            noise_levels: vec![0.1, 0.3, 0.6, 1.0],
            smote_amounts: vec![130, 220, 370, 500],
            k_values: vec![2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_levels.is_empty() || self.smote_amounts.is_empty() || self.k_values.is_empty()
        {
            return Err(Error::ConfigInvalid("sweep grid has an empty axis".into()));
        }
        if self
            .noise_levels
            .iter()
            .any(|g| !(*g >= 0.0 && g.is_finite()))
        {
            return Err(Error::ConfigInvalid(
                "noise levels must be finite and >= 0".into(),
            ));
        }
        if self.smote_amounts.contains(&0) {
            return Err(Error::ConfigInvalid("SMOTE amounts must be >= 1".into()));
        }
        if self.k_values.contains(&0) {
            return Err(Error::ConfigInvalid("k values must be >= 1".into()));
        }
        Ok(())
    }

    /// Points sorted by (g, E, k).
    pub fn points(&self) -> Vec<(f64, u32, usize)> {
        let mut g = self.noise_levels.clone();
        g.sort_by(f64::total_cmp);
        g.dedup();
        let mut e = self.smote_amounts.clone();
        e.sort_unstable();
        e.dedup();
        let mut k = self.k_values.clone();
        k.sort_unstable();
        k.dedup();
        let mut out = Vec::new();
        for &gi in &g {
            for &ei in &e {
                for &ki in &k {
                    out.push((gi, ei, ki));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g: f64,
    pub smote_percent: u32,
    pub k: usize,
    pub classifier: ClassifierKind,
    /// `ok` or the failure message.
    pub status: String,
    pub accuracy: Option<f64>,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
    pub macro_f_measure: Option<f64>,
    pub risk: Option<f64>,
    pub satisfies_k_anonymity: Option<bool>,
    /// Wall-clock time of the whole grid point. Not written to the CSV,
    /// which stays byte-identical across runs.
    pub seconds: f64,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub test_fraction: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn row(&self, g: f64, e: u32, k: usize, c: ClassifierKind) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.g == g && r.smote_percent == e && r.k == k && r.classifier == c)
    }

    pub fn accuracy(&self, g: f64, e: u32, k: usize, c: ClassifierKind) -> Option<f64> {
        self.row(g, e, k, c).and_then(|r| r.accuracy)
    }

    pub fn risk(&self, g: f64, e: u32, k: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.g == g && r.smote_percent == e && r.k == k)
            .and_then(|r| r.risk)
    }

    pub fn to_csv_string(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        let mut s = String::from(
            "g,smote_percent,k,classifier,status,accuracy,macro_precision,macro_recall,macro_f_measure,risk,satisfies_k_anonymity\n",
        );
        for r in &self.rows {
            let status = r.status.replace([',', '\n'], ";");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.g,
                r.smote_percent,
                r.k,
                r.classifier,
                status,
                opt(&r.accuracy),
                opt(&r.macro_precision),
                opt(&r.macro_recall),
                opt(&r.macro_f_measure),
                opt(&r.risk),
                opt(&r.satisfies_k_anonymity),
            );
        }
        s
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("sweep.csv");
        std::fs::write(&csv_path, self.to_csv_string()).map_err(|e| Error::io(&csv_path, e))?;
        write_json(self, &dir.join("sweep.json"))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn point_rows(cfg: &PipelineConfig, result: &Result<Outcome>, seconds: f64) -> Vec<SweepRow> {
    cfg.classifiers
        .iter()
        .enumerate()
        .map(|(i, &classifier)| {
            let base = SweepRow {
                g: cfg.noise,
                smote_percent: cfg.smote_amount,
                k: cfg.k,
                classifier,
                status: "ok".into(),
                accuracy: None,
                macro_precision: None,
                macro_recall: None,
                macro_f_measure: None,
                risk: None,
                satisfies_k_anonymity: None,
                seconds,
            };
            match result {
                Ok(o) => {
                    let e = &o.evals[i];
                    SweepRow {
                        accuracy: Some(e.accuracy),
                        macro_precision: Some(e.macro_precision),
                        macro_recall: Some(e.macro_recall),
                        macro_f_measure: Some(e.macro_f_measure),
                        risk: Some(o.risk.risk),
                        satisfies_k_anonymity: Some(o.risk.satisfies_k_anonymity),
                        ..base
                    }
                }
                Err(err) => SweepRow {
                    status: format!("failed: {err}"),
                    ..base
                },
            }
        })
        .collect()
}

/// One pipeline run per grid point. A failing point is recorded and the
/// sweep carries on. Rows are ordered by (g, E, k, classifier order).
pub fn run_sweep(data: &Dataset, cfg: &PipelineConfig, grid: &SweepGrid) -> Result<SweepReport> {
    grid.validate()?;
    let per_point: Vec<Vec<SweepRow>> = grid
        .points()
        .into_par_iter()
        .map(|(g, e, k)| {
            let point_cfg = PipelineConfig {
                noise: g,
                smote_amount: e,
                k,
                ..cfg.clone()
            };
            let start = Instant::now();
            let mut result = run_on(data, &point_cfg);
            if let (Ok(o), Some(out)) = (&result, &cfg.out) {
                if let Err(err) = write_outcome(o, &out.join(point_cfg.point_key())) {
                    result = Err(err);
                }
            }
            point_rows(&point_cfg, &result, start.elapsed().as_secs_f64())
        })
        .collect();
    let report = SweepReport {
        seed: cfg.seed,
        test_fraction: cfg.test_fraction,
        rows: per_point.into_iter().flatten().collect(),
    };
    if let Some(out) = &cfg.out {
        report.save(out)?;
    }
    Ok(report)
}

/// Per-figure tables: `accuracy_E{E}_k{k}.csv` (header `g,classifier,accuracy`)
/// and `risk_g{g}_k{k}.csv` (header `smote_percent,risk`). Failed points are
/// skipped. Returns the written paths.
pub fn emit_plot_data(report: &SweepReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(Error::ConfigInvalid("sweep report is empty".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let ok: Vec<&SweepRow> = report.rows.iter().filter(|r| r.is_ok()).collect();

    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    let mut ek: Vec<(u32, usize)> = ok.iter().map(|r| (r.smote_percent, r.k)).collect();
    ek.sort_unstable();
    ek.dedup();
    for (e, k) in ek {
        let mut body = String::from("g,classifier,accuracy\n");
        for r in ok.iter().filter(|r| r.smote_percent == e && r.k == k) {
            let _ = writeln!(
                body,
                "{},{},{}",
                r.g,
                r.classifier,
                r.accuracy.unwrap_or(f64::NAN)
            );
        }
        write(format!("accuracy_E{e}_k{k}.csv"), body)?;
    }

    let mut gk: Vec<(f64, usize)> = ok.iter().map(|r| (r.g, r.k)).collect();
    gk.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    gk.dedup();
    for (g, k) in gk {
        let mut body = String::from("smote_percent,risk\n");
        let mut seen = Vec::new();
        for r in ok.iter().filter(|r| r.g == g && r.k == k) {
            if seen.contains(&r.smote_percent) {
                continue;
            }
            seen.push(r.smote_percent);
            let _ = writeln!(body, "{},{}", r.smote_percent, r.risk.unwrap_or(f64::NAN));
        }
        write(format!("risk_g{g}_k{k}.csv"), body)?;
    }
    Ok(written)
}
