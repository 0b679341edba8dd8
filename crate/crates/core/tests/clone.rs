mod support;

use pastewatch_core::clone::find_duplicates;
use pastewatch_core::syntax::{locate_fragment, parse_compilation_unit, Span};
use support::clones::{check_mutations, check_substring_agreement};
use support::load_fixtures;

#[test]
fn rename_and_reorder_invariance() {
    let trees = load_fixtures("flow");
    check_mutations(&trees, 200, 11).unwrap();
}

#[test]
fn substring_detection_matches_naive_scan() {
    let trees = load_fixtures("flow");
    check_substring_agreement(&trees, 2000, 5).unwrap();
}

#[test]
fn planted_clones_in_fixture_file() {
    let src = std::fs::read_to_string(support::fixture_dir("clones").join("Report.java")).unwrap();
    let t = parse_compilation_unit(&src).unwrap();
    let paste = "double gross = net * (1 + rate);\n        gross = Math.round(gross * 100) / 100.0;";
    let at = src.find(paste).unwrap();
    let (_, fr) = locate_fragment(&t, Span::new(at, at + paste.len())).unwrap();
    let d = find_duplicates(&fr, &t, 0.8).unwrap();
    let names: Vec<_> = d.iter().map(|m| (m.method.as_str(), m.exact)).collect();
    assert!(names.contains(&("invoiceTotal", true)), "{names:?}");
    assert!(names.contains(&("refundTotal", true)), "{names:?}");
    assert!(!names.iter().any(|(n, _)| *n == "header"));
    for w in d.windows(2) {
        assert!(w[0].similarity >= w[1].similarity);
    }
}
