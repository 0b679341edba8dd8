//! Randomized clone-detector properties, driven by a seeded generator.

use std::collections::HashMap;

use pastewatch_core::clone::{
    is_substring_match, meets_minimum_size, normalize, similarity, token_bag, NormTokenSeq,
};
use pastewatch_core::syntax::{
    locate_fragment, methods_of, parse_file, tokenize_code, CodeFragment, Span, SyntaxTree,
    TokenKind,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every multi-statement run of every fixture method that is large enough
/// for duplicate search.
pub fn searchable_runs(trees: &[SyntaxTree]) -> Vec<(usize, CodeFragment)> {
    let mut out = Vec::new();
    for (i, t) in trees.iter().enumerate() {
        for m in methods_of(t) {
            m.body.walk_blocks(&mut |b| {
                for start in 0..b.stmts.len() {
                    for len in 2..=b.stmts.len() - start {
                        let fr = CodeFragment::from_run(t, b, start, len);
                        if meets_minimum_size(&fr) {
                            out.push((i, fr));
                        }
                    }
                }
            });
        }
    }
    out
}

/// Similarity of the fragment with every method of its file, the
/// fragment's own tokens excluded.
pub fn similarity_profile(fr: &CodeFragment, tree: &SyntaxTree) -> Vec<f64> {
    let bag = token_bag(&normalize(&fr.tokens));
    methods_of(tree)
        .iter()
        .map(|m| {
            let rest: Vec<_> = m
                .body_tokens
                .iter()
                .filter(|t| !fr.span.contains(t.span))
                .cloned()
                .collect();
            similarity(&bag, &token_bag(&normalize(&rest)))
        })
        .collect()
}

fn rename(text: &str, rng: &mut ChaCha8Rng) -> String {
    let toks = tokenize_code(text).unwrap();
    let mut map: HashMap<&str, String> = HashMap::new();
    let mut out = String::new();
    let mut last = 0;
    for t in &toks {
        if t.kind == TokenKind::Identifier {
            let n = map.len();
            let fresh = map
                .entry(t.text.as_str())
                .or_insert_with(|| format!("r{}_{}", rng.gen_range(0..1000), n));
            out.push_str(&text[last..t.span.start]);
            out.push_str(fresh);
            last = t.span.end;
        }
    }
    out.push_str(&text[last..]);
    out
}

fn permute(fr: &CodeFragment, source: &str, rng: &mut ChaCha8Rng) -> String {
    let mut parts: Vec<&str> = fr
        .statements
        .iter()
        .map(|s| &source[s.span.start..s.span.end])
        .collect();
    parts.shuffle(rng);
    parts.join("\n")
}

fn splice(tree: &SyntaxTree, span: Span, text: &str) -> (SyntaxTree, CodeFragment) {
    let src = format!("{}{}{}", &tree.source[..span.start], text, &tree.source[span.end..]);
    let t = parse_file(&src, &tree.path).expect("mutated file parses");
    let (_, fr) = locate_fragment(&t, Span::new(span.start, span.start + text.len()))
        .expect("mutated fragment locates");
    (t, fr)
}

/// Applies `count` random rename or reorder mutations to fixture runs and
/// checks that normalization and every similarity are unchanged.
pub fn check_mutations(trees: &[SyntaxTree], count: usize, seed: u64) -> Result<(), String> {
    let runs = searchable_runs(trees);
    if runs.is_empty() {
        return Err("no searchable runs".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..count {
        let (ti, fr) = &runs[rng.gen_range(0..runs.len())];
        let tree = &trees[*ti];
        let before = similarity_profile(fr, tree);
        let reorder = k % 2 == 1;
        let text = if reorder {
            permute(fr, &tree.source, &mut rng)
        } else {
            rename(&fr.text, &mut rng)
        };
        let (t2, fr2) = splice(tree, fr.span, &text);
        if !reorder && normalize(&fr.tokens) != normalize(&fr2.tokens) {
            return Err(format!("rename changed normalization of `{}`", fr.text));
        }
        if reorder && token_bag(&normalize(&fr.tokens)) != token_bag(&normalize(&fr2.tokens)) {
            return Err(format!("reorder changed bag of `{}`", fr.text));
        }
        let after = similarity_profile(&fr2, &t2);
        if before != after {
            return Err(format!(
                "{} changed similarities of `{}`: {before:?} vs {after:?}",
                if reorder { "reorder" } else { "rename" },
                fr.text
            ));
        }
    }
    Ok(())
}

fn random_seq(rng: &mut ChaCha8Rng, alphabet: &[&str], n: usize) -> Vec<String> {
    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())].to_string()).collect()
}

pub fn naive_contains(f: &[String], m: &[String]) -> bool {
    if f.len() > m.len() {
        return false;
    }
    (0..=m.len() - f.len()).any(|i| (0..f.len()).all(|j| m[i + j] == f[j]))
}

/// Compares substring detection against a naive scan, on random sequences
/// over a tiny alphabet and on every fixture run against every method.
pub fn check_substring_agreement(trees: &[SyntaxTree], count: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = ["ID", "=", ";", "LIT_INT"];
    for _ in 0..count {
        let f_len = rng.gen_range(1..=5);
        let m_len = rng.gen_range(0..14);
        let f = random_seq(&mut rng, &alphabet, f_len);
        let m = random_seq(&mut rng, &alphabet, m_len);
        let ours = is_substring_match(&NormTokenSeq(f.clone()), &NormTokenSeq(m.clone())).unwrap();
        if ours != naive_contains(&f, &m) {
            return Err(format!("disagree on {f:?} in {m:?}"));
        }
    }
    for (ti, fr) in searchable_runs(trees) {
        let f = normalize(&fr.tokens);
        for m in methods_of(&trees[ti]) {
            let body = normalize(&m.body_tokens);
            if is_substring_match(&f, &body).unwrap() != naive_contains(&f.0, &body.0) {
                return Err(format!("disagree on `{}` in {}", fr.text, m.name));
            }
        }
    }
    Ok(())
}
