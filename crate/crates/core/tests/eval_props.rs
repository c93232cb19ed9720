// Oracle values are printed at full mpmath precision.
#![allow(clippy::excessive_precision)]

mod common;

use rand::Rng;
use synthpriv::eval::{self, knn_classify, nb_train, ClassifierKind, ClassifierParams};
use synthpriv::smote::minkowski_distance;
use synthpriv::{Label, RngSeed};

use common::table;

#[test]
fn metrics_match_recomputation() {
    println!("{}", common::metrics_recompute().unwrap());
}

const NB_TRAIN: [(f64, f64, &str); 20] = [
    (1.0, 2.0, "a"),
    (1.5, 1.8, "a"),
    (0.7, 2.6, "a"),
    (1.2, 2.2, "a"),
    (0.9, 1.5, "a"),
    (1.8, 2.4, "a"),
    (1.1, 1.9, "a"),
    (4.0, 0.5, "b"),
    (4.6, 1.1, "b"),
    (3.8, 0.2, "b"),
    (5.1, 0.9, "b"),
    (4.3, -0.3, "b"),
    (4.9, 0.4, "b"),
    (2.5, 4.0, "c"),
    (3.1, 4.8, "c"),
    (2.2, 5.3, "c"),
    (2.9, 3.9, "c"),
    (3.4, 4.4, "c"),
    (2.0, 4.6, "c"),
    (2.7, 5.0, "c"),
];

/// Posterior of each class, evaluated at 50 significant digits from the
/// prior times the product of per-attribute normal densities.
const NB_ORACLE: [((f64, f64), &str, [f64; 3]); 10] = [
    (
        (1.0, 2.0),
        "a",
        [
            0.99999999970216671,
            2.1059513330125232e-15,
            2.978311832638331e-10,
        ],
    ),
    (
        (4.5, 0.5),
        "b",
        [5.3942208240981354e-25, 1.0, 4.4516484468536215e-20],
    ),
    (
        (2.7, 4.5),
        "c",
        [
            1.4877083117275241e-15,
            9.0365530896238355e-21,
            0.99999999999999851,
        ],
    ),
    (
        (2.6, 2.4),
        "a",
        [
            0.88535824037036357,
            0.000170980431832013,
            0.11447077919780441,
        ],
    ),
    (
        (3.0, 1.8),
        "b",
        [
            0.011563624059009498,
            0.98812239950832548,
            0.00031397643266501752,
        ],
    ),
    (
        (2.0, 3.2),
        "c",
        [
            0.080153649341515216,
            2.5339642322347933e-12,
            0.91984635065595082,
        ],
    ),
    (
        (3.3, 3.0),
        "c",
        [
            1.4645006417729641e-7,
            5.1966780226733532e-6,
            0.99999465687191315,
        ],
    ),
    (
        (0.0, 0.0),
        "a",
        [
            0.99999999994780539,
            5.2194610099051825e-11,
            1.9080015909481465e-18,
        ],
    ),
    (
        (6.0, 6.0),
        "c",
        [7.8178827318960836e-58, 1.0900189641866828e-21, 1.0],
    ),
    (
        (2.2, 2.9),
        "c",
        [
            0.49081603049636194,
            2.2022312627313867e-9,
            0.5091839673014068,
        ],
    ),
];

fn nb_data() -> synthpriv::Dataset {
    let values = NB_TRAIN.iter().map(|(x, y, _)| vec![*x, *y]).collect();
    let labels: Vec<&str> = NB_TRAIN.iter().map(|r| r.2).collect();
    table(values, &labels)
}

fn posterior(scores: &[f64]) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|v| v / z).collect()
}

#[test]
fn naive_bayes_matches_high_precision_oracle() {
    let model = nb_train(&nb_data()).unwrap();
    for ((x, y), want, post) in NB_ORACLE {
        let got = eval::nb_classify(&model, &[x, y]).unwrap();
        assert_eq!(got, Label::from(want), "query ({x}, {y})");
        for (p, q) in posterior(&model.log_scores(&[x, y])).iter().zip(post) {
            assert!((p - q).abs() < 1e-9, "query ({x}, {y}): {p} vs {q}");
        }
    }
}

#[test]
fn naive_bayes_is_shift_invariant() {
    let data = nb_data();
    let base = nb_train(&data).unwrap();
    let shifted_rows: Vec<Vec<f64>> = data
        .rows()
        .iter()
        .map(|r| vec![r.values[0] + 100.0, r.values[1] - 40.0])
        .collect();
    let labels: Vec<&str> = data.rows().iter().map(|r| r.label.as_str()).collect();
    let shifted = nb_train(&table(shifted_rows, &labels)).unwrap();
    let mut rng = RngSeed(3).rng();
    for _ in 0..500 {
        let q = [rng.random_range(-2.0..8.0), rng.random_range(-2.0..8.0)];
        assert_eq!(
            eval::nb_classify(&base, &q).unwrap(),
            eval::nb_classify(&shifted, &[q[0] + 100.0, q[1] - 40.0]).unwrap()
        );
    }
}

/// Majority of the k nearest by a full sort; ties go to the class whose
/// member is nearest.
fn knn_oracle(train: &[(Vec<f64>, &str)], q: &[f64], k: usize) -> String {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (x, _))| (minkowski_distance(x, q, 2.0).unwrap(), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let top = &d[..k];
    let votes = |l: &str| top.iter().filter(|(_, i)| train[*i].1 == l).count();
    let best = top.iter().map(|(_, i)| votes(train[*i].1)).max().unwrap();
    let winner = top
        .iter()
        .find(|(_, i)| votes(train[*i].1) == best)
        .unwrap();
    train[winner.1].1.to_string()
}

#[test]
fn knn_matches_sort_oracle_on_random_sets() {
    let mut rng = RngSeed(9).rng();
    for _ in 0..200 {
        let n = rng.random_range(5..40);
        let pts: Vec<(Vec<f64>, &str)> = (0..n)
            .map(|_| {
                let l = ["p", "q", "r"][rng.random_range(0..3)];
                (
                    vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)],
                    l,
                )
            })
            .collect();
        let data = table(
            pts.iter().map(|p| p.0.clone()).collect(),
            &pts.iter().map(|p| p.1).collect::<Vec<_>>(),
        );
        for _ in 0..20 {
            let q = [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)];
            let got = knn_classify(&data, &q, 3, 2.0).unwrap();
            assert_eq!(got.as_str(), knn_oracle(&pts, &q, 3));
        }
    }
}

#[test]
fn macro_metrics_on_real_split() {
    let data = synthpriv::surrogate::generate(&synthpriv::surrogate::SurrogateConfig {
        records: 1500,
        ..Default::default()
    });
    let (train, test) = synthpriv::data::stratified_split(&data, 0.3, RngSeed(1)).unwrap();
    for kind in ClassifierKind::ALL {
        let r = eval::evaluate(
            kind,
            &ClassifierParams::default(),
            &train,
            &test,
            RngSeed(2),
        )
        .unwrap();
        let k = r.per_class.len() as f64;
        let mean_p = r.per_class.iter().map(|c| c.precision).sum::<f64>() / k;
        let mean_f = r.per_class.iter().map(|c| c.f_measure).sum::<f64>() / k;
        assert!((r.macro_precision - mean_p).abs() < 1e-12);
        assert!((r.macro_f_measure - mean_f).abs() < 1e-12);
        assert!(r.macro_f_measure <= (r.macro_precision + r.macro_recall) / 2.0 + 1e-12);
        assert_eq!(r.confusion.total(), test.len() as u64);
    }
}
