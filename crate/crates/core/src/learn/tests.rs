use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::metrics::FEATURE_COUNT;

fn ex(x: &[f64], label: bool) -> Example {
    Example::new(x.to_vec(), label)
}

fn one_d(points: &[(f64, bool)]) -> Vec<Example> {
    points.iter().map(|&(x, l)| ex(&[x], l)).collect()
}

fn separable(n: usize, seed: u64) -> Vec<Example> {
    examples_of(&synthetic::separable(n, seed))
}

#[test]
fn scaler_rules() {
    let s = fit_scaler(&[ex(&[5.0, 0.0], true), ex(&[5.0, 2.0], false)]).unwrap();
    assert_eq!(s.mean, [5.0, 1.0]);
    assert_eq!(s.std[0], 1.0);
    assert_eq!(s.std[1], 2f64.sqrt());
    assert!(fit_scaler(&[ex(&[1.0], true)]).is_err());

    let data = separable(40, 1);
    let s = fit_scaler(&data).unwrap();
    let dim = data[0].x.len();
    let mut sums = vec![0.0; dim];
    for e in &data {
        for (a, v) in sums.iter_mut().zip(s.transform(&e.x)) {
            *a += v;
        }
    }
    assert!(sums.iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn untrained_logistic_is_half() {
    let h = LogisticHyper { epochs: 0, ..Default::default() };
    let m = train_logistic(&separable(20, 2), h).unwrap();
    assert_eq!(m.predict_proba(&[3.0; FEATURE_COUNT]).unwrap(), 0.5);
}

#[test]
fn logistic_formula() {
    let mut w = vec![0.0; FEATURE_COUNT];
    w[0] = 1.0;
    w[1] = -1.0;
    let p = LogisticParams { weights: w, bias: 0.0 };
    let mut x = vec![0.0; FEATURE_COUNT];
    x[0] = 2.0;
    x[1] = 1.0;
    let want = 1.0 / (1.0 + (-1f64).exp());
    assert_eq!(p.predict(&x), want);
    assert!((want - 0.7311).abs() < 1e-4);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let dim = 6;
        let xs: Vec<Vec<f64>> = (0..15).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<bool> = (0..15).map(|_| rng.gen()).collect();
        let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let l2 = 1e-2;
        let (gw, gb) = logistic::gradient(&w, b, &xs, &ys, l2);
        let h = 1e-5;
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-8);
        for j in 0..dim {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let num = (logistic::loss(&wp, b, &xs, &ys, l2) - logistic::loss(&wm, b, &xs, &ys, l2)) / (2.0 * h);
            assert!(rel(gw[j], num) <= 1e-4, "slot {j}: {} vs {num}", gw[j]);
        }
        let num = (logistic::loss(&w, b + h, &xs, &ys, l2) - logistic::loss(&w, b - h, &xs, &ys, l2)) / (2.0 * h);
        assert!(rel(gb, num) <= 1e-4);
    }
}

fn accuracy(m: &Model, data: &[Example]) -> f64 {
    data.iter()
        .filter(|e| (m.predict_proba(&e.x).unwrap() >= 0.5) == e.label)
        .count() as f64
        / data.len() as f64
}

#[test]
fn logistic_fits_separable_blobs() {
    let data = separable(400, 3);
    let m = train_logistic(&data, LogisticHyper::default()).unwrap();
    assert!(accuracy(&m, &data) >= 0.99);
}

#[test]
fn single_class_is_rejected() {
    let data: Vec<Example> = separable(20, 4).into_iter().filter(|e| e.label).collect();
    assert!(matches!(train_logistic(&data, Default::default()), Err(Error::Data(_))));
    assert!(matches!(train_forest(&data, Default::default()), Err(Error::Data(_))));
    assert!(matches!(train_bayes(&data), Err(Error::Data(_))));
}

#[test]
fn stump_less_forest_predicts_majority_frequency() {
    let data = one_d(&[(1.0, true), (2.0, true), (3.0, true), (4.0, false)]);
    let h = ForestHyper { trees: 1, max_depth: 0, bootstrap: false, ..Default::default() };
    let m = train_forest(&data, h).unwrap();
    for x in [-5.0, 0.0, 2.5, 100.0] {
        assert_eq!(m.predict_proba(&[x]).unwrap(), 0.75);
    }
}

#[test]
fn single_threshold_needs_one_split() {
    let data = one_d(&[(0.0, false), (1.0, false), (2.0, false), (3.0, true), (4.0, true), (5.0, true)]);
    let h = ForestHyper { trees: 1, max_depth: 1, min_leaf: 1, bootstrap: false, ..Default::default() };
    let m = train_forest(&data, h).unwrap();
    assert_eq!(accuracy(&m, &data), 1.0);
    let Params::Forest(f) = &m.params else { panic!() };
    assert_eq!(f.trees[0].depth(), 1);
}

#[test]
fn forest_is_mean_of_leaves() {
    let leaf = |p| Tree { nodes: vec![Node::Leaf { p }] };
    let f = ForestParams { trees: vec![leaf(1.0), leaf(0.0)] };
    assert_eq!(f.predict(&[0.0]), 0.5);

    let data = separable(60, 5);
    let m = train_forest(&data, ForestHyper { trees: 7, seed: 1, ..Default::default() }).unwrap();
    let Params::Forest(f) = &m.params else { panic!() };
    for e in &data {
        let z = m.scaler.transform(&e.x);
        let mut sum = 0.0;
        for t in &f.trees {
            sum += t.predict(&z);
        }
        assert_eq!(m.predict_proba(&e.x).unwrap(), sum / 7.0);
    }
}

#[test]
fn training_is_deterministic_and_order_free() {
    let data = separable(80, 6);
    let mut shuffled = data.clone();
    shuffled.reverse();
    shuffled.swap(3, 40);
    for hyper in [
        Hyper::default_for(ModelKind::Logistic, 4),
        Hyper::Forest(ForestHyper { trees: 10, seed: 4, ..Default::default() }),
        Hyper::default_for(ModelKind::Bayes, 4),
    ] {
        let a = train(&hyper, &data).unwrap().to_json();
        assert_eq!(a, train(&hyper, &data).unwrap().to_json());
        assert_eq!(a, train(&hyper, &shuffled).unwrap().to_json());
    }
}

#[test]
fn mirrored_bayes_boundary_is_zero() {
    let data = one_d(&[(1.0, true), (2.0, true), (3.0, true), (-1.0, false), (-2.0, false), (-3.0, false)]);
    let m = train_bayes(&data).unwrap();
    assert!((m.predict_proba(&[0.0]).unwrap() - 0.5).abs() < 1e-12);
    assert!(m.predict_proba(&[0.01]).unwrap() > 0.5);
    assert!(m.predict_proba(&[-0.01]).unwrap() < 0.5);
}

#[test]
fn identical_likelihoods_give_half() {
    let p = BayesParams {
        prior: [0.5, 0.5],
        mean: [vec![1.0, 2.0], vec![1.0, 2.0]],
        var: [vec![1.0, 3.0], vec![1.0, 3.0]],
    };
    assert_eq!(p.predict(&[7.0, -4.0]), 0.5);
}

#[test]
fn bayes_posterior_by_hand() {
    // Class means 1 and 5, population variance 1 each, equal priors. At
    // x = 3.5 the log-odds are ((3.5-1)^2 - (3.5-5)^2) / 2 = 2; the
    // standardization is affine so the odds are unchanged by it.
    let data = one_d(&[(0.0, false), (2.0, false), (4.0, true), (6.0, true)]);
    let m = train_bayes(&data).unwrap();
    let want = 1.0 / (1.0 + (-2f64).exp());
    assert!((m.predict_proba(&[3.5]).unwrap() - want).abs() < 1e-12);
}

#[test]
fn probabilities_stay_in_range() {
    let data = separable(60, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [ModelKind::Logistic, ModelKind::Forest, ModelKind::Bayes] {
        let m = train(&Hyper::default_for(kind, 1), &data).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..FEATURE_COUNT).map(|_| rng.gen_range(-1e3..1e3)).collect();
            let p = m.predict_proba(&x).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }
}

#[test]
fn evaluation_formulas() {
    let r = evaluate_scores(&[0.9, 0.2, 0.8], &[true, false, true], 0.5).unwrap();
    assert_eq!((r.metrics.precision, r.metrics.recall, r.metrics.f_measure), (1.0, 1.0, 1.0));

    let scores = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
    let labels = [true, true, true, false, true, true, false];
    let r = evaluate_scores(&scores, &labels, 0.5).unwrap();
    assert_eq!(r.confusion, Confusion { tp: 3, fp: 1, tn: 1, fn_: 2 });
    assert_eq!(r.metrics.precision, 0.75);
    assert_eq!(r.metrics.recall, 0.6);
    assert!((r.metrics.f_measure - 2.0 / 3.0).abs() < 1e-12);

    let r = evaluate_scores(&[0.7; 4], &[true, false, true, false], 0.5).unwrap();
    assert_eq!((r.metrics.precision, r.metrics.recall), (0.5, 1.0));
    assert!((r.metrics.f_measure - 2.0 / 3.0).abs() < 1e-12);

    let r = evaluate_scores(&[0.1, 0.2], &[false, false], 0.5).unwrap();
    assert_eq!(r.undefined, ["precision", "recall", "pr_auc"]);
    assert_eq!(r.metrics.f_measure, 0.0);
}

#[test]
fn average_precision() {
    assert_eq!(pr_auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
    assert_eq!(pr_auc(&[0.1, 0.9], &[true, false]).unwrap(), 0.5);
    assert_eq!(pr_auc(&[0.3, 0.9, 0.1], &[true, true, true]).unwrap(), 1.0);
    assert!(pr_auc(&[0.3], &[false]).is_err());
    // Ties keep input order: the negative listed first ranks first.
    assert_eq!(pr_auc(&[0.5, 0.5], &[false, true]).unwrap(), 0.5);
    assert_eq!(pr_auc(&[0.5, 0.5], &[true, false]).unwrap(), 1.0);
}

#[test]
fn recall_never_rises_with_threshold() {
    let data = examples_of(&synthetic::overlap(200, 3));
    let m = train_logistic(&data, Default::default()).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..=20 {
        let r = evaluate(&m, &data, k as f64 / 20.0).unwrap();
        assert!(r.metrics.recall <= last);
        last = r.metrics.recall;
    }
}

#[test]
fn oracle_scores_are_perfect() {
    let data = separable(30, 8);
    let scores: Vec<f64> = data.iter().map(|e| if e.label { 1.0 } else { 0.0 }).collect();
    let labels: Vec<bool> = data.iter().map(|e| e.label).collect();
    let r = evaluate_scores(&scores, &labels, 0.5).unwrap();
    assert_eq!(r.metrics.f_measure, 1.0);
    assert_eq!(r.metrics.pr_auc, 1.0);
}

#[test]
fn bootstrap_contract() {
    let data = separable(40, 9);
    let bayes = Hyper::default_for(ModelKind::Bayes, 0);
    let one = bootstrap_eval(&bayes, &data, 1, 3, 0.5).unwrap();
    assert_eq!(one.bootstrap.as_ref().unwrap().iterations.len(), 1);
    assert_eq!(one.bootstrap.as_ref().unwrap().std.f_measure, 0.0);

    let a = bootstrap_eval(&bayes, &data, 5, 3, 0.5).unwrap();
    let b = bootstrap_eval(&bayes, &data, 5, 3, 0.5).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

    assert!(bootstrap_eval(&bayes, &data[..19], 1, 3, 0.5).is_err());
    // A single positive among many negatives is almost never out of bag.
    let mut rare = separable(40, 9);
    rare.iter_mut().for_each(|e| e.label = false);
    rare[0].label = true;
    assert!(matches!(bootstrap_eval(&bayes, &rare, 1, 0, 0.5), Err(Error::Data(_))));
}

#[test]
fn out_of_bag_size_matches_simulation() {
    // The oracle simulates the draw process directly: the expected number
    // of never-drawn records for n = 1000 is n(1 - 1/n)^n, about 367.7.
    let expected = 1000.0 * (1.0 - 1.0 / 1000f64).powi(1000);
    assert!((330.0..=405.0).contains(&expected));
    let data = separable(1000, 10);
    let r = bootstrap_eval(&Hyper::default_for(ModelKind::Bayes, 0), &data, 100, 11, 0.5).unwrap();
    let it = &r.bootstrap.unwrap().iterations;
    let mean = it.iter().map(|i| i.test_size as f64).sum::<f64>() / it.len() as f64;
    assert!((330.0..=405.0).contains(&mean), "{mean}");
    assert!((mean - expected).abs() < 10.0);
}

#[test]
fn model_files_round_trip() {
    let data = separable(60, 12);
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let probes: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..FEATURE_COUNT).map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect();
    for kind in [ModelKind::Logistic, ModelKind::Forest, ModelKind::Bayes] {
        let m = train(&Hyper::default_for(kind, 5), &data).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        for x in &probes {
            assert_eq!(m.predict_proba(x).unwrap().to_bits(), back.predict_proba(x).unwrap().to_bits());
        }

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::ModelFormat(_))));

        let older = text.replace("\"catalog_version\":1", "\"catalog_version\":0");
        std::fs::write(&path, older).unwrap();
        assert!(matches!(
            load_model(&path),
            Err(Error::CatalogVersion { expected: 1, found: 0 })
        ));
    }
}

#[test]
fn model_json_keys_are_sorted() {
    let m = train_bayes(&one_d(&[(0.0, false), (1.0, false), (2.0, true), (3.0, true)])).unwrap();
    let text = m.to_json();
    let cv = text.find("\"catalog_version\"").unwrap();
    let dim = text.find("\"dim\"").unwrap();
    let format = text.find("\"format\"").unwrap();
    assert!(cv < dim && dim < format);
}
