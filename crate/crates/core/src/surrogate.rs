//! Generated stand-in for the MHEALTH body-sensor recordings.
//!
//! Layout follows the public dataset: 23 channels (chest accelerometer, two
//! ECG leads, then accelerometer / gyroscope / magnetometer triples for the
//! left ankle and the right lower arm) plus an `activity` label in 1..=12.
//! Eleven activities are recorded for about a minute each; the twelfth
//! (jump front and back) is roughly a third as long and serves as the
//! minority class.
//!
//! Records are consecutive 50 Hz samples. Each subject performs each
//! activity as one contiguous segment: a body posture fixes the gravity
//! direction seen by each accelerometer and the field seen by each
//! magnetometer, a periodic motion at the activity's cadence rides on top,
//! and every subject has their own sensor-placement offsets and motion
//! strength. The ECG leads carry an R-peak once per heartbeat, giving them
//! heavy tails.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, Provenance, Record, RngSeed, Schema};
use crate::pipeline::PipelineConfig;

pub const CHANNELS: [&str; 23] = [
    "chest_acc_x",
    "chest_acc_y",
    "chest_acc_z",
    "ecg_lead1",
    "ecg_lead2",
    "ankle_acc_x",
    "ankle_acc_y",
    "ankle_acc_z",
    "ankle_gyro_x",
    "ankle_gyro_y",
    "ankle_gyro_z",
    "ankle_mag_x",
    "ankle_mag_y",
    "ankle_mag_z",
    "arm_acc_x",
    "arm_acc_y",
    "arm_acc_z",
    "arm_gyro_x",
    "arm_gyro_y",
    "arm_gyro_z",
    "arm_mag_x",
    "arm_mag_y",
    "arm_mag_z",
];

pub const LABEL_COLUMN: &str = "activity";

/// Activity 12 (jump front and back).
pub const MINORITY_ACTIVITY: i64 = 12;

/// Quasi-identifiers for this layout: the chest unit (accelerometer and the
/// two ECG leads), i.e. everything a single body-worn device reports.
/// Auditing all 23 channels at once leaves nearly every record in its own
/// equivalence class, which says nothing.
pub const QUASI_IDENTIFIERS: [&str; 5] = [
    "chest_acc_x",
    "chest_acc_y",
    "chest_acc_z",
    "ecg_lead1",
    "ecg_lead2",
];

pub fn schema() -> Schema {
    Schema::with_features(&CHANNELS, LABEL_COLUMN).expect("static schema is valid")
}

pub fn minority_label() -> Label {
    Label::from(MINORITY_ACTIVITY)
}

/// Pipeline defaults for surrogate data: minority activity 12 and the
/// chest-unit quasi-identifiers.
pub fn pipeline_config() -> PipelineConfig {
    PipelineConfig {
        minority_label: minority_label(),
        qi_columns: QUASI_IDENTIFIERS.iter().map(|c| c.to_string()).collect(),
        ..PipelineConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    /// Total number of records.
    pub records: usize,
    pub subjects: usize,
    pub seed: RngSeed,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            records: 12_000,
            subjects: 10,
            seed: RngSeed(2014),
        }
    }
}

/// Body posture: unit gravity direction per accelerometer (chest, ankle,
/// arm).
#[derive(Clone, Copy)]
struct Posture([[f64; 3]; 3]);

const UPRIGHT: Posture = Posture([[0.0, -1.0, 0.1], [0.0, -1.0, 0.05], [0.1, -0.95, -0.3]]);
const SEATED: Posture = Posture([[0.1, -0.95, 0.3], [0.3, -0.6, 0.74], [0.5, -0.7, 0.5]]);
const SUPINE: Posture = Posture([[0.05, 0.1, 0.99], [0.1, 0.0, 0.99], [0.6, 0.1, 0.79]]);
const BENT: Posture = Posture([[0.0, -0.6, 0.8], [0.0, -1.0, 0.05], [0.2, -0.4, 0.89]]);
const ARMS_UP: Posture = Posture([[0.0, -1.0, 0.1], [0.0, -1.0, 0.05], [0.2, 0.9, 0.38]]);
const CROUCH: Posture = Posture([[0.0, -0.9, 0.43], [0.4, -0.9, 0.17], [0.1, -0.9, -0.42]]);
const CYCLE: Posture = Posture([[0.2, -0.9, 0.39], [0.5, -0.8, 0.33], [0.7, -0.7, 0.14]]);

struct Activity {
    posture: Posture,
    /// Motion amplitude in m/s^2 at (chest, ankle, arm).
    amplitude: [f64; 3],
    /// Motion shape weights on the three axes.
    shape: [f64; 3],
    /// Relative duration.
    weight: f64,
    /// Heart-rate factor in [0, 1].
    effort: f64,
    /// Motion cadence in Hz.
    cadence: f64,
}

fn activities() -> [Activity; 12] {
    let act = |posture, amplitude, shape, weight, effort, cadence| Activity {
        posture,
        amplitude,
        shape,
        weight,
        effort,
        cadence,
    };
    [
        // 1 standing still
        act(UPRIGHT, [0.05, 0.05, 0.08], [1.0, 1.0, 1.0], 1.0, 0.2, 0.3),
        // 2 sitting and relaxing
        act(SEATED, [0.05, 0.05, 0.08], [1.0, 1.0, 1.0], 1.0, 0.15, 0.25),
        // 3 lying down
        act(SUPINE, [0.04, 0.04, 0.05], [1.0, 1.0, 1.0], 1.0, 0.1, 0.2),
        // 4 walking
        act(UPRIGHT, [1.2, 4.0, 2.0], [0.6, 1.0, 0.8], 1.0, 0.4, 1.8),
        // 5 climbing stairs
        act(UPRIGHT, [1.6, 4.6, 2.2], [0.7, 1.0, 0.9], 1.0, 0.55, 1.6),
        // 6 waist bends forward
        act(BENT, [2.0, 0.4, 2.5], [0.3, 1.0, 0.9], 1.0, 0.35, 0.4),
        // 7 frontal elevation of arms
        act(ARMS_UP, [0.3, 0.2, 4.5], [0.2, 0.5, 1.0], 1.0, 0.3, 0.5),
        // 8 knees bending (crouching)
        act(CROUCH, [2.2, 2.0, 1.2], [0.4, 1.0, 0.6], 1.0, 0.45, 0.6),
        // 9 cycling
        act(CYCLE, [0.8, 3.2, 0.6], [1.0, 0.8, 0.4], 1.0, 0.5, 1.2),
        // 10 jogging
        act(UPRIGHT, [3.5, 8.0, 4.5], [0.5, 1.0, 0.7], 1.0, 0.7, 2.6),
        // 11 running
        act(UPRIGHT, [5.0, 11.0, 6.0], [0.5, 1.0, 0.8], 1.0, 0.85, 3.0),
        // 12 jump front and back
        act(
            CROUCH,
            [6.5, 9.0, 5.0],
            [1.0, 0.4, 0.9],
            1.0 / 3.0,
            0.9,
            1.1,
        ),
    ]
}

const GRAVITY: f64 = 9.8;

/// Integer class sizes proportional to activity durations, summing to
/// `records`.
fn class_sizes(records: usize, acts: &[Activity]) -> Vec<usize> {
    let total: f64 = acts.iter().map(|a| a.weight).sum();
    let mut sizes: Vec<usize> = acts
        .iter()
        .map(|a| (records as f64 * a.weight / total).floor() as usize)
        .collect();
    let (mut k, len) = (0, sizes.len());
    while sizes.iter().sum::<usize>() < records {
        sizes[k % len] += 1;
        k += 1;
    }
    sizes
}

/// Magnetometer reading for a posture: the earth field rotated into the
/// sensor frame, approximated by mixing the gravity direction with a fixed
/// horizontal component.
fn magnetic(g: [f64; 3], heading: f64) -> [f64; 3] {
    [
        0.5 * g[0] + 0.4 * heading.cos(),
        0.5 * g[1] + 0.4 * heading.sin(),
        0.5 * g[2] - 0.2,
    ]
}

const SAMPLE_RATE: f64 = 50.0;

pub fn generate(cfg: &SurrogateConfig) -> Dataset {
    let acts = activities();
    let sizes = class_sizes(cfg.records, &acts);
    let subjects = cfg.subjects.max(1);
    let mut rng = cfg.seed.rng();

    // Placement offsets per subject and channel, scaled to the channel's
    // typical range.
    let offsets: Vec<[f64; 23]> = (0..subjects)
        .map(|_| {
            std::array::from_fn(|c| {
                let scale = match c {
                    0..=2 | 5..=7 | 14..=16 => 0.8,
                    3 | 4 => 0.1,
                    8..=10 | 17..=19 => 0.05,
                    _ => 0.1,
                };
                scale * rng.sample::<f64, _>(StandardNormal)
            })
        })
        .collect();
    let headings: Vec<f64> = (0..subjects)
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect();
    let strength = Normal::new(1.0f64, 0.15).expect("valid std");
    let strengths: Vec<f64> = (0..subjects)
        .map(|_| strength.sample(&mut rng).max(0.5))
        .collect();
    let resting_rate: Vec<f64> = (0..subjects)
        .map(|_| rng.random_range(60.0..80.0))
        .collect();

    let mut rows = Vec::with_capacity(cfg.records);
    for (a, (act, &n)) in acts.iter().zip(&sizes).enumerate() {
        let label = Label::from(a as i64 + 1);
        for subject in 0..subjects {
            let len = (subject + 1) * n / subjects - subject * n / subjects;
            let mut phase: f64 = rng.random_range(0.0..2.0 * PI);
            let mut beat: f64 = rng.random_range(0.0..2.0 * PI);
            let bpm = resting_rate[subject] + 100.0 * act.effort;
            for _ in 0..len {
                phase += 2.0 * PI * act.cadence / SAMPLE_RATE
                    + 0.05 * rng.sample::<f64, _>(StandardNormal);
                beat += 2.0 * PI * bpm / 60.0 / SAMPLE_RATE;
                rows.push(Record {
                    values: sample(
                        act,
                        phase,
                        beat,
                        strengths[subject],
                        headings[subject],
                        &offsets[subject],
                        &mut rng,
                    ),
                    label: label.clone(),
                });
            }
        }
    }
    Dataset::new(schema(), rows, Provenance::Original).expect("generated values are finite")
}

fn sample<R: Rng>(
    act: &Activity,
    phase: f64,
    beat: f64,
    strength: f64,
    heading: f64,
    offset: &[f64; 23],
    rng: &mut R,
) -> Vec<f64> {
    let mut v = [0.0f64; 23];
    // Accelerometers at chest (0..3), ankle (5..8), arm (14..17).
    for (s, base) in [(0usize, 0usize), (1, 5), (2, 14)] {
        let g = act.posture.0[s];
        let amp = act.amplitude[s] * strength;
        let wave = [phase.sin(), (2.0 * phase).sin(), phase.cos()];
        let jitter = 0.03 + 0.03 * amp;
        for ax in 0..3 {
            let e: f64 = rng.sample(StandardNormal);
            v[base + ax] = GRAVITY * g[ax] + amp * act.shape[ax] * wave[ax] + jitter * e;
        }
    }
    // Gyroscopes at ankle (8..11) and arm (17..20): angular rate of the same
    // periodic motion.
    for (s, base) in [(1usize, 8usize), (2, 17)] {
        let amp = act.amplitude[s] * strength * 0.12;
        let wave = [phase.cos(), (2.0 * phase).cos(), -phase.sin()];
        for ax in 0..3 {
            let e: f64 = rng.sample(StandardNormal);
            v[base + ax] = amp * act.shape[ax] * wave[ax] + (0.01 + 0.03 * amp) * e;
        }
    }
    // Magnetometers at ankle (11..14) and arm (20..23).
    for (s, base) in [(1usize, 11usize), (2, 20)] {
        let m = magnetic(act.posture.0[s], heading);
        for ax in 0..3 {
            let e: f64 = rng.sample(StandardNormal);
            v[base + ax] = m[ax] + 0.02 * e;
        }
    }
    // ECG: baseline wander plus an R-peak near the start of each beat.
    let within = (beat + PI).rem_euclid(2.0 * PI) - PI;
    let peak = (-(within * within) / (2.0 * 0.12 * 0.12)).exp();
    for lead in 0..2 {
        let e: f64 = rng.sample(StandardNormal);
        let polarity = if lead == 0 { 1.0 } else { -0.7 };
        v[3 + lead] = 0.1 * e + 0.2 * (beat + lead as f64).sin() + 4.0 * polarity * peak;
    }
    for (x, o) in v.iter_mut().zip(offset) {
        *x += o;
    }
    v.to_vec()
}
