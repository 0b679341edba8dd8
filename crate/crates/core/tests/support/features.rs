//! Feature-vector contract checks shared by the test suites.

use pastewatch_core::metrics::{catalog, extract_features, FeatureVector, FEATURE_COUNT};
use pastewatch_core::syntax::{locate_fragment, methods_of, parse_file, CodeFragment, Span, SyntaxTree};

use super::fixture_dir;

fn within_one_ulp(a: f64, b: f64) -> bool {
    a == b || (a.to_bits() as i64 - b.to_bits() as i64).abs() <= 1
}

/// Length, finiteness and per-line identities of one vector.
pub fn check_vector(v: &FeatureVector) -> Result<(), String> {
    let s = v.as_slice();
    if s.len() != FEATURE_COUNT {
        return Err(format!("length {}", s.len()));
    }
    if let Some(i) = s.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(format!("slot {i} = {}", s[i]));
    }
    let lines = s[62];
    let mut pairs: Vec<(usize, usize)> = (0..31).map(|k| (2 * k, 2 * k + 1)).collect();
    pairs.extend([(63, 64), (65, 66), (74, 75)]);
    for (total, per_line) in pairs {
        if !within_one_ulp(s[per_line] * lines, s[total]) {
            return Err(format!(
                "slot {per_line} * lines = {} but slot {total} = {}",
                s[per_line] * lines,
                s[total]
            ));
        }
    }
    if !(s[69] > 0.0 && s[69] <= 1.0) {
        return Err(format!("slot 69 = {}", s[69]));
    }
    Ok(())
}

/// Every sibling run of every method in `trees`, with its vector.
pub fn all_vectors(trees: &[SyntaxTree]) -> Vec<(CodeFragment, FeatureVector)> {
    let mut out = Vec::new();
    for t in trees {
        for m in methods_of(t) {
            m.body.walk_blocks(&mut |b| {
                for start in 0..b.stmts.len() {
                    for len in 1..=b.stmts.len() - start {
                        let fr = CodeFragment::from_run(t, b, start, len);
                        let v = extract_features(&fr, m).unwrap();
                        out.push((fr, v));
                    }
                }
            });
        }
    }
    out
}

fn parse_value(text: &str) -> f64 {
    match text.split_once('/') {
        Some((n, d)) => n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap(),
        None => text.parse().unwrap(),
    }
}

/// Compares the golden fixture fragment against the hand-audited file.
pub fn check_golden() -> Result<(), String> {
    let dir = fixture_dir("golden");
    let src = std::fs::read_to_string(dir.join("Inventory.java")).unwrap();
    let t = parse_file(&src, "Inventory.java").unwrap();
    let start = src.find("int added = 0;").unwrap();
    let end = src.find("this.restocks").unwrap();
    let (m, fr) = locate_fragment(&t, Span::new(start, end)).ok_or("fragment not located")?;
    let v = extract_features(&fr, m).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(dir.join("restock.features")).unwrap();
    let mut seen = 0;
    for line in golden.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let slot: usize = parts[0].parse().unwrap();
        if catalog()[slot].name != parts[1] {
            return Err(format!("slot {slot} is `{}` in the catalog, `{}` in the golden file", catalog()[slot].name, parts[1]));
        }
        let want = parse_value(parts[2]);
        if v.get(slot).to_bits() != want.to_bits() {
            return Err(format!("slot {slot} {}: got {:?}, golden {want:?}", parts[1], v.get(slot)));
        }
        seen += 1;
    }
    if seen != FEATURE_COUNT {
        return Err(format!("golden file has {seen} slots"));
    }
    Ok(())
}
