mod support;

use std::collections::HashMap;

use pastewatch_core::error::Error;
use pastewatch_core::miner::{
    excluded_top, is_extractable, mine_negatives, rank_corpus, read_dataset, write_dataset,
    Candidate, ScoreWeights, PER_METHOD_CAP,
};
use pastewatch_core::syntax::locate_fragment;
use support::load_fixtures;

fn corpus() -> Vec<pastewatch_core::syntax::SyntaxTree> {
    let mut trees = load_fixtures("flow");
    trees.extend(load_fixtures("clones"));
    trees
}

#[test]
fn mining_is_deterministic() {
    let trees = corpus();
    let w = ScoreWeights::default();
    let a = mine_negatives(&trees, 20, 3, &w).unwrap();
    let b = mine_negatives(&trees, 20, 3, &w).unwrap();
    assert_eq!(a, b);
    let c = mine_negatives(&trees, 20, 4, &w).unwrap();
    assert_ne!(a, c);
}

#[test]
fn shortfall_names_the_numbers() {
    let trees = corpus();
    match mine_negatives(&trees, 100_000, 1, &ScoreWeights::default()) {
        Err(Error::InsufficientCandidates { needed, available }) => {
            assert_eq!(needed, 100_000);
            assert!(available > 0 && available < needed);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn mined_negatives_are_eligible_and_outside_the_top() {
    let trees = corpus();
    let w = ScoreWeights::default();
    let ranked = rank_corpus(&trees, &w);
    let top: Vec<_> = ranked[..excluded_top(ranked.len())]
        .iter()
        .map(|c| (c.fragment.path.clone(), c.fragment.span))
        .collect();
    let mined = mine_negatives(&trees, 40, 8, &w).unwrap();
    let mut per_method: HashMap<(String, String), usize> = HashMap::new();
    for r in &mined {
        assert!(!r.label);
        let p = r.provenance.as_ref().unwrap();
        assert!(!top.contains(&(p.path.clone(), p.span)));
        *per_method.entry((p.path.clone(), p.method.clone())).or_default() += 1;
        let tree = trees.iter().find(|t| t.path == p.path).unwrap();
        let (m, fr) = locate_fragment(tree, p.span).unwrap();
        assert!(is_extractable(&Candidate::measure(fr, m, &w).unwrap()));
    }
    assert!(per_method.values().all(|&n| n <= PER_METHOD_CAP));
}

/// A power-of-two factor scales every score exactly, so ties stay ties.
#[test]
fn uniform_weight_scaling_keeps_the_ranking() {
    let trees = corpus();
    let w = ScoreWeights::default();
    let scaled = ScoreWeights {
        length: w.length * 4.0,
        depth: w.depth * 4.0,
        live_in: w.live_in * 4.0,
        live_out: w.live_out * 4.0,
    };
    let order = |w: &ScoreWeights| {
        rank_corpus(&trees, w)
            .iter()
            .map(|c| (c.fragment.path.clone(), c.fragment.span))
            .collect::<Vec<_>>()
    };
    assert_eq!(order(&w), order(&scaled));
}

#[test]
fn dataset_files_round_trip_exactly() {
    let trees = corpus();
    let w = ScoreWeights::default();
    let mined = mine_negatives(&trees, 15, 2, &w).unwrap();
    let mut buf = Vec::new();
    write_dataset(&mut buf, &w, Some(2), &mined).unwrap();
    let back = read_dataset(&buf[..]).unwrap();
    assert_eq!(back.seed, Some(2));
    assert_eq!(back.records.len(), mined.len());
    for (a, b) in mined.iter().zip(&back.records) {
        assert_eq!(a.features, b.features);
        assert_eq!((a.label, a.origin), (b.label, b.origin));
    }
    let mut again = Vec::new();
    write_dataset(&mut again, &w, back.seed, &back.records).unwrap();
    assert_eq!(buf, again);
}
