//! Property suites shared by the integration tests and the acceptance
//! runner. Each check returns a one-line summary on success and a
//! description of the first violation otherwise.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use synthpriv::anonymity::{self, bin_index, QuasiIdentifierSpec};
use synthpriv::eval::{BinaryCounts, ConfusionMatrix, EvalReport};
use synthpriv::noise::{self, NoiseConfig, NoiseModel};
use synthpriv::pipeline::{self, PipelineConfig, SweepGrid};
use synthpriv::smote::{self, minkowski_distance, GapMode, SmoteConfig};
use synthpriv::surrogate::{self, SurrogateConfig};
use synthpriv::{Dataset, Label, Provenance, Record, RngSeed, Schema};

pub type Check = Result<String, String>;

pub fn table(values: Vec<Vec<f64>>, labels: &[&str]) -> Dataset {
    let d = values.first().map_or(1, Vec::len);
    let names: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    let schema = Schema::with_features(&names, "label").unwrap();
    let rows = values
        .into_iter()
        .zip(labels.iter().cycle())
        .map(|(v, l)| Record::new(v, *l))
        .collect();
    Dataset::new(schema, rows, Provenance::Original).unwrap()
}

fn random_table<R: Rng>(rng: &mut R, n: usize, d: usize, minority: usize) -> Dataset {
    let values = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-50.0..50.0)).collect())
        .collect();
    let labels: Vec<&str> = (0..n)
        .map(|i| if i < minority { "min" } else { "maj" })
        .collect();
    table(values, &labels)
}

/// Every synthetic value lies in the per-attribute box of its record and one
/// of that record's neighbours.
pub fn smote_convexity(target: usize) -> Check {
    let mut rng = RngSeed(101).rng();
    let mut checked = 0usize;
    let mut round = 0u64;
    while checked < target {
        round += 1;
        let m = rng.random_range(4..30);
        let d = rng.random_range(1..6);
        let s = rng.random_range(1..m.min(6));
        let data = random_table(&mut rng, m, d, m);
        let gap = if round.is_multiple_of(2) {
            GapMode::PerRecord
        } else {
            GapMode::PerAttribute
        };
        let cfg = SmoteConfig {
            amount_percent: rng.random_range(1..800),
            neighbors: s,
            gap,
            seed: RngSeed(round),
            ..Default::default()
        };
        let table = smote::nearest_neighbors(&data, s, 2.0).map_err(|e| e.to_string())?;
        let synth = smote::generate_synthetic(&data, &table, &cfg).map_err(|e| e.to_string())?;
        let rows = data.rows();
        for z in synth.rows() {
            let inside = (0..m).any(|j| {
                table.row(j).iter().any(|n| {
                    let (a, b) = (&rows[j].values, &rows[n.index].values);
                    z.values
                        .iter()
                        .zip(a.iter().zip(b))
                        .all(|(v, (x, y))| *v >= x.min(*y) && *v <= x.max(*y))
                })
            });
            if !inside {
                return Err(format!(
                    "synthetic record {:?} outside every parent box",
                    z.values
                ));
            }
            if gap == GapMode::PerRecord {
                // Same factor on every attribute: collinear with some pair.
                let ok = (0..m).any(|j| {
                    table.row(j).iter().any(|n| {
                        let (a, b) = (&rows[j].values, &rows[n.index].values);
                        let t: Vec<f64> = z
                            .values
                            .iter()
                            .zip(a.iter().zip(b))
                            .filter(|(_, (x, y))| (*y - *x).abs() > 1e-9)
                            .map(|(v, (x, y))| (v - x) / (y - x))
                            .collect();
                        t.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9)
                    })
                });
                if !ok {
                    return Err(format!(
                        "per-record synthetic {:?} not on a parent segment",
                        z.values
                    ));
                }
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} synthetic points inside their parent boxes"
    ))
}

/// Identity, symmetry and the triangle inequality for q in {1, 2, 3.5}.
pub fn metric_axioms(triples: usize) -> Check {
    let mut rng = RngSeed(202).rng();
    for t in 0..triples {
        let d = rng.random_range(1..8);
        let q = [1.0, 2.0, 3.5][t % 3];
        let p: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..d).map(|_| rng.random_range(-100.0..100.0)).collect())
            .collect();
        let dist = |a: &Vec<f64>, b: &Vec<f64>| minkowski_distance(a, b, q).unwrap();
        let (ab, ba, bc, ac) = (
            dist(&p[0], &p[1]),
            dist(&p[1], &p[0]),
            dist(&p[1], &p[2]),
            dist(&p[0], &p[2]),
        );
        if dist(&p[0], &p[0]) != 0.0 {
            return Err(format!("d(a, a) != 0 for {:?}", p[0]));
        }
        if ab < 0.0 || (ab - ba).abs() > 1e-12 * ab.max(1.0) {
            return Err(format!("asymmetric: {ab} vs {ba}"));
        }
        if ac > ab + bc + 1e-9 * (ab + bc).max(1.0) {
            return Err(format!(
                "triangle inequality fails: {ac} > {ab} + {bc} (q = {q})"
            ));
        }
    }
    Ok(format!("{triples} triples"))
}

/// The minority class grows by exactly floor(E * M / 100) records.
pub fn e_count_law() -> Check {
    let mut rng = RngSeed(303).rng();
    let mut cases = 0;
    for e in [100u32, 130, 220, 370, 500] {
        for m in [6usize, 10, 13, 27, 40] {
            let data = random_table(&mut rng, m + 25, 3, m);
            let cfg = SmoteConfig {
                amount_percent: e,
                neighbors: 5,
                seed: RngSeed(cases),
                ..Default::default()
            };
            let out =
                smote::run_smote(&data, &Label::from("min"), &cfg).map_err(|e| e.to_string())?;
            let grown = out.count_of(&Label::from("min")) - m;
            let want = (e as usize * m) / 100;
            if grown != want || out.count_of(&Label::from("maj")) != 25 {
                return Err(format!(
                    "E = {e}, M = {m}: grew by {grown}, expected {want}"
                ));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (E, M) combinations"))
}

fn gaussian_columns(n: usize, sigmas: &[f64], seed: u64) -> Dataset {
    let mut rng = RngSeed(seed).rng();
    let cols: Vec<Normal<f64>> = sigmas
        .iter()
        .map(|&s| Normal::new(5.0, s).unwrap())
        .collect();
    let values = (0..n)
        .map(|_| cols.iter().map(|c| c.sample(&mut rng)).collect())
        .collect();
    table(values, &["a", "b"])
}

fn realized_noise(before: &Dataset, after: &Dataset, j: usize) -> Vec<f64> {
    after
        .rows()
        .iter()
        .zip(before.rows())
        .map(|(a, b)| a.values[j] - b.values[j])
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn noise_identity() -> Check {
    let data = gaussian_columns(2000, &[1.0, 10.0, 0.01], 1);
    for model in [NoiseModel::DiagonalScaled, NoiseModel::FullCovariance] {
        let out = noise::perturb(
            &data,
            &NoiseConfig {
                level: 0.0,
                model,
                seed: RngSeed(9),
            },
        )
        .map_err(|e| e.to_string())?;
        if out.rows() != data.rows() {
            return Err(format!("{model:?}: g = 0 changed the data"));
        }
    }
    Ok("g = 0 leaves every value bit-identical".into())
}

/// Realized noise std / (g * sigma_a) per attribute, at n records.
pub fn noise_std_ratio(n: usize) -> Check {
    let sigmas = [1.0, 10.0, 0.2];
    let data = gaussian_columns(n, &sigmas, 2);
    let sample_sigma = noise::attribute_std(&data);
    let g = 0.3;
    let out = noise::perturb(
        &data,
        &NoiseConfig {
            level: g,
            model: NoiseModel::DiagonalScaled,
            seed: RngSeed(4),
        },
    )
    .map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for (j, s) in sample_sigma.iter().enumerate() {
        let (mean, std) = mean_std(&realized_noise(&data, &out, j));
        let ratio = std / (g * s);
        if !(0.95..=1.05).contains(&ratio) {
            return Err(format!(
                "attribute {j}: std ratio {ratio:.4} outside [0.95, 1.05]"
            ));
        }
        let bound = 3.0 * g * s / (n as f64).sqrt();
        if mean.abs() >= bound {
            return Err(format!(
                "attribute {j}: mean shift {mean:.3e} >= {bound:.3e}"
            ));
        }
        ratios.push(format!("{ratio:.4}"));
    }
    Ok(format!("n = {n}, ratios [{}]", ratios.join(", ")))
}

/// Kolmogorov-Smirnov statistic of the standardized noise against N(0, 1).
pub fn noise_ks(n: usize) -> Check {
    let data = gaussian_columns(n, &[3.0, 0.5], 3);
    let sigma = noise::attribute_std(&data);
    let g = 0.3;
    let out = noise::perturb(
        &data,
        &NoiseConfig {
            level: g,
            model: NoiseModel::DiagonalScaled,
            seed: RngSeed(5),
        },
    )
    .map_err(|e| e.to_string())?;
    let reference = StatNormal::new(0.0, 1.0).unwrap();
    let limit = 1.63 / (n as f64).sqrt();
    let mut stats = Vec::new();
    for (j, s) in sigma.iter().enumerate() {
        let mut z: Vec<f64> = realized_noise(&data, &out, j)
            .iter()
            .map(|v| v / (g * s))
            .collect();
        z.sort_by(f64::total_cmp);
        let nf = n as f64;
        let d = z
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = reference.cdf(x);
                (f - i as f64 / nf)
                    .abs()
                    .max(((i + 1) as f64 / nf - f).abs())
            })
            .fold(0.0, f64::max);
        if d >= limit {
            return Err(format!("attribute {j}: KS {d:.5} >= {limit:.5}"));
        }
        stats.push(format!("{d:.5}"));
    }
    Ok(format!("n = {n}, KS [{}] < {limit:.5}", stats.join(", ")))
}

/// Bins computed independently of the library, records grouped by O(n^2)
/// pairwise comparison.
fn oracle_groups(data: &Dataset, columns: &[usize], bins: usize) -> BTreeSet<Vec<usize>> {
    let n = data.len();
    let keys: Vec<Vec<i64>> = data
        .rows()
        .iter()
        .map(|r| {
            columns
                .iter()
                .map(|&j| {
                    let col: Vec<f64> = data.rows().iter().map(|r| r.values[j]).collect();
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if hi == lo {
                        0
                    } else {
                        let span = hi - lo;
                        ((r.values[j] - lo) * bins as f64 / (span + 1e-9 * span)).floor() as i64
                    }
                })
                .collect()
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut groups = BTreeSet::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> = (i..n).filter(|&k| keys[k] == keys[i]).collect();
        for &k in &members {
            assigned[k] = true;
        }
        groups.insert(members);
    }
    groups
}

pub fn anonymity_oracle(tables: usize) -> Check {
    let mut rng = RngSeed(404).rng();
    for t in 0..tables {
        let n = rng.random_range(1..=100);
        let d = rng.random_range(1..5);
        // Few distinct values so that classes of several records occur.
        let levels = rng.random_range(2..12);
        let values: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| rng.random_range(0..levels) as f64 * 1.7 - 3.0)
                    .collect()
            })
            .collect();
        let data = table(values, &["u", "v", "w"]);
        let qi: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.7)).collect();
        let qi = if qi.is_empty() { vec![0] } else { qi };
        let bins = rng.random_range(1..8);
        let names: Vec<String> = qi.iter().map(|j| format!("x{j}")).collect();
        let spec = QuasiIdentifierSpec::binned(&names, bins);

        let classes = anonymity::equivalence_classes(&data, &spec).map_err(|e| e.to_string())?;
        let got: BTreeSet<Vec<usize>> = classes.groups().map(|(_, g)| g.to_vec()).collect();
        let want = oracle_groups(&data, &qi, bins);
        if got != want {
            return Err(format!(
                "table {t}: grouping differs from the pairwise oracle"
            ));
        }
        for k in 1..6 {
            let at_risk: usize = want.iter().filter(|g| g.len() < k).map(Vec::len).sum();
            let r = anonymity::risk_report(&classes, k);
            if r.at_risk_count != at_risk || (r.risk - at_risk as f64 / n as f64).abs() > 1e-15 {
                return Err(format!("table {t}, k = {k}: risk differs from oracle"));
            }
            if anonymity::check_k_anonymity(&classes, k) != (r.risk == 0.0) {
                return Err(format!("table {t}, k = {k}: check disagrees with risk"));
            }
        }
    }
    Ok(format!("{tables} random tables match the pairwise oracle"))
}

pub fn risk_monotone_in_k() -> Check {
    let mut rng = RngSeed(505).rng();
    for t in 0..100 {
        let data = random_table(&mut rng, 80, 3, 10);
        let spec = QuasiIdentifierSpec::all_numeric(&data, 1 + t % 6);
        let mut prev = 0.0;
        for k in 1..12 {
            let r = anonymity::audit(&data, &spec, k)
                .map_err(|e| e.to_string())?
                .risk;
            if r < prev {
                return Err(format!(
                    "table {t}: risk fell from {prev} to {r} at k = {k}"
                ));
            }
            prev = r;
        }
    }
    Ok("risk non-decreasing in k over 100 tables".into())
}

/// Halving the bin count or dropping a QI column never raises risk.
pub fn coarsening_monotone() -> Check {
    let mut rng = RngSeed(606).rng();
    for t in 0..100 {
        let data = random_table(&mut rng, 120, 3, 10);
        let k = 1 + t % 4;
        for bins in [2usize, 4, 8, 16] {
            let fine = anonymity::audit(&data, &QuasiIdentifierSpec::all_numeric(&data, bins), k)
                .map_err(|e| e.to_string())?
                .risk;
            let coarse =
                anonymity::audit(&data, &QuasiIdentifierSpec::all_numeric(&data, bins / 2), k)
                    .map_err(|e| e.to_string())?
                    .risk;
            let fewer =
                anonymity::audit(&data, &QuasiIdentifierSpec::binned(["x0", "x1"], bins), k)
                    .map_err(|e| e.to_string())?
                    .risk;
            if coarse > fine || fewer > fine {
                return Err(format!(
                    "table {t}, bins {bins}, k {k}: fine {fine}, half bins {coarse}, fewer columns {fewer}"
                ));
            }
        }
    }
    // The library's binning agrees with the closed form on a hand case.
    if bin_index(10.0, 0.0, 10.0, 2) != 1.0 || bin_index(5.0, 0.0, 10.0, 2) != 0.0 {
        return Err("bin formula".into());
    }
    Ok("coarser generalization never raises risk (100 tables)".into())
}

/// Precision, recall and F recomputed from raw confusion counts.
pub fn metrics_recompute() -> Check {
    let hand = BinaryCounts {
        tp: 8,
        fp: 2,
        fn_: 4,
        tn: 0,
    };
    let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;
    if !(close(hand.precision(), 0.8, 1e-12)
        && close(hand.recall(), 2.0 / 3.0, 1e-12)
        && close(hand.f_measure(), 0.7273, 5e-5))
    {
        return Err(format!(
            "hand case gave {} / {} / {}",
            hand.precision(),
            hand.recall(),
            hand.f_measure()
        ));
    }
    let mut rng = RngSeed(707).rng();
    let labels = ["a", "b", "c", "d"];
    for t in 0..500 {
        let n = rng.random_range(1..200);
        let c = rng.random_range(2..5);
        let pairs: Vec<(Label, Label)> = (0..n)
            .map(|_| {
                let truth = rng.random_range(0..c);
                let pred = if rng.random_bool(0.6) {
                    truth
                } else {
                    rng.random_range(0..c)
                };
                (Label::from(labels[truth]), Label::from(labels[pred]))
            })
            .collect();
        let cm = ConfusionMatrix::from_pairs(pairs.iter().map(|(a, b)| (a, b)));
        let report = EvalReport::from_confusion("x", cm);
        let classes: BTreeSet<&Label> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        let mut sum_p = 0.0;
        let mut sum_r = 0.0;
        let mut sum_f = 0.0;
        for cls in &classes {
            let tp = pairs.iter().filter(|(a, b)| a == *cls && b == *cls).count() as f64;
            let fp = pairs.iter().filter(|(a, b)| a != *cls && b == *cls).count() as f64;
            let fnn = pairs.iter().filter(|(a, b)| a == *cls && b != *cls).count() as f64;
            let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let r = if tp + fnn > 0.0 { tp / (tp + fnn) } else { 0.0 };
            let f = if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            };
            let got = report
                .per_class
                .iter()
                .find(|m| &m.label == *cls)
                .ok_or_else(|| format!("case {t}: class {cls} missing"))?;
            if !(close(got.precision, p, 1e-12)
                && close(got.recall, r, 1e-12)
                && close(got.f_measure, f, 1e-12))
            {
                return Err(format!("case {t}, class {cls}: per-class metrics differ"));
            }
            if f > (p + r) / 2.0 + 1e-12 {
                return Err(format!("case {t}: F above the arithmetic mean"));
            }
            sum_p += p;
            sum_r += r;
            sum_f += f;
        }
        let k = classes.len() as f64;
        let acc = pairs.iter().filter(|(a, b)| a == b).count() as f64 / n as f64;
        if !(close(report.macro_precision, sum_p / k, 1e-12)
            && close(report.macro_recall, sum_r / k, 1e-12)
            && close(report.macro_f_measure, sum_f / k, 1e-12)
            && close(report.accuracy, acc, 1e-12))
        {
            return Err(format!("case {t}: macro averages differ"));
        }
    }
    Ok("hand case and 500 random confusion matrices".into())
}

/// Two identical sweeps produce byte-identical CSVs.
pub fn sweep_determinism() -> Check {
    let data = surrogate::generate(&SurrogateConfig {
        records: 1500,
        ..Default::default()
    });
    let cfg = surrogate::pipeline_config();
    let grid = SweepGrid {
        noise_levels: vec![0.0, 0.3],
        smote_amounts: vec![130, 500],
        k_values: vec![2],
    };
    let a = pipeline::run_sweep(&data, &cfg, &grid).map_err(|e| e.to_string())?;
    let b =
        pipeline::run_sweep(&data, &PipelineConfig { ..cfg }, &grid).map_err(|e| e.to_string())?;
    let (ca, cb) = (a.to_csv_string(), b.to_csv_string());
    if ca != cb {
        return Err("sweep CSVs differ between identical runs".into());
    }
    Ok(format!(
        "{} rows, {} bytes identical",
        a.rows.len(),
        ca.len()
    ))
}
