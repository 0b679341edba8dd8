//! Learning-suite checks shared by the core tests and the acceptance run.

use pastewatch_core::learn::{
    bootstrap_eval, examples_of, logistic, synthetic, ForestHyper, Hyper, LogisticHyper, ModelKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest relative error between the analytic logistic gradient and
/// central finite differences over `instances` random problems.
pub fn gradient_error(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let dim = rng.gen_range(2..12);
        let n = rng.gen_range(5..40);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let ys: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let l2 = 1e-4;
        let (gw, gb) = logistic::gradient(&w, b, &xs, &ys, l2);
        for j in 0..dim {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let num = (logistic::loss(&wp, b, &xs, &ys, l2) - logistic::loss(&wm, b, &xs, &ys, l2)) / (2.0 * h);
            worst = worst.max(rel(gw[j], num));
        }
        let num = (logistic::loss(&w, b + h, &xs, &ys, l2) - logistic::loss(&w, b - h, &xs, &ys, l2)) / (2.0 * h);
        worst = worst.max(rel(gb, num));
    }
    worst
}

pub const SEPARABLE_RECORDS: usize = 2000;
pub const SEPARABLE_ITERATIONS: usize = 100;

/// Mean out-of-sample bootstrap F of logistic regression and the forest on
/// the separable synthetic set.
pub fn separable_f(seed: u64) -> (f64, f64) {
    let data = examples_of(&synthetic::separable(SEPARABLE_RECORDS, seed));
    let f = |h: Hyper| {
        bootstrap_eval(&h, &data, SEPARABLE_ITERATIONS, seed, 0.5)
            .expect("bootstrap runs")
            .metrics
            .f_measure
    };
    (
        f(Hyper::Logistic(LogisticHyper { seed, ..Default::default() })),
        f(Hyper::Forest(ForestHyper { seed, ..Default::default() })),
    )
}

pub const OVERLAP_RECORDS: usize = 1000;
pub const OVERLAP_ITERATIONS: usize = 20;

/// Mean bootstrap F of forest, logistic and Bayes on the overlap set.
pub fn overlap_f(seed: u64) -> [f64; 3] {
    let data = examples_of(&synthetic::overlap(OVERLAP_RECORDS, seed));
    [ModelKind::Forest, ModelKind::Logistic, ModelKind::Bayes].map(|k| {
        bootstrap_eval(&Hyper::default_for(k, seed), &data, OVERLAP_ITERATIONS, seed, 0.5)
            .expect("bootstrap runs")
            .metrics
            .f_measure
    })
}
