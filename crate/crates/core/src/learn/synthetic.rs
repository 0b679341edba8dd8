//! Seeded synthetic datasets in the shape of real feature vectors: 78
//! non-negative slots, balanced labels, unused slots left at zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::metrics::{FeatureVector, FEATURE_COUNT};
use crate::miner::{DatasetRecord, Origin};

fn record(values: Vec<f64>, label: bool) -> DatasetRecord {
    let mut x = values;
    x.resize(FEATURE_COUNT, 0.0);
    DatasetRecord {
        features: FeatureVector::try_from(x).expect("synthetic values are finite and non-negative"),
        label,
        origin: if label { Origin::MinedPositive } else { Origin::SampledNegative },
        provenance: None,
    }
}

pub const SEPARABLE_INFORMATIVE: usize = 8;
pub const SEPARABLE_NOISE: usize = 8;

/// Two Gaussian blobs on eight slots plus eight uniform noise slots. Draws
/// whose informative sum falls within a margin of the midpoint are
/// rejected, so the classes are strictly separated by `sum = 40`.
pub fn separable(n: usize, seed: u64) -> Vec<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = Normal::new(3.0, 1.0).unwrap();
    let hi = Normal::new(7.0, 1.0).unwrap();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let label = out.len() % 2 == 1;
        let blob = if label { &hi } else { &lo };
        let mut x: Vec<f64> = (0..SEPARABLE_INFORMATIVE).map(|_| blob.sample(&mut rng)).collect();
        let sum: f64 = x.iter().sum();
        if x.iter().any(|&v| v < 0.0) || (36.0..=44.0).contains(&sum) {
            continue;
        }
        x.extend((0..SEPARABLE_NOISE).map(|_| rng.gen::<f64>()));
        out.push(record(x, label));
    }
    out
}

/// A harder mixture of two sub-populations, told apart by slot 0:
///
/// * XOR group: the label is `(x1 > 1) xor (x2 > 1)`; no linear or
///   per-slot signal exists.
/// * diagonal group: slots 3 and 4 share a wide common component and the
///   label only shifts their difference, which a linear model can use but
///   per-slot likelihoods barely see.
///
/// In each group the other group's slots follow the same class-independent
/// distribution.
pub fn overlap(n: usize, seed: u64) -> Vec<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.3).unwrap();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2 == 1;
        let diagonal = (i / 2) % 2 == 1;
        let t = rng.gen_range(4.0..13.0);
        let (x1, x2, x3, x4) = if diagonal {
            let d = if label { 1.0 } else { -1.0 };
            (
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..2.0),
                t + d + jitter.sample(&mut rng),
                t - d + jitter.sample(&mut rng),
            )
        } else {
            let a = rng.gen_bool(0.5);
            let b = a ^ label;
            let half = |hi: bool, rng: &mut ChaCha8Rng| if hi { rng.gen_range(1.0..2.0) } else { rng.gen_range(0.0..1.0) };
            let d = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (
                half(a, &mut rng),
                half(b, &mut rng),
                t + d + jitter.sample(&mut rng),
                t - d + jitter.sample(&mut rng),
            )
        };
        out.push(record(vec![diagonal as u8 as f64, x1, x2, x3, x4], label));
    }
    out
}
