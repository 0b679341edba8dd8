//! Brute-force enumeration oracle: every (block, start, length) triple,
//! filtered by the eligibility rules.

use pastewatch_core::miner::{enumerate_candidates, is_extractable, Candidate, ScoreWeights};
use pastewatch_core::syntax::{count_statements, methods_of, CodeFragment, Span, SyntaxTree};

/// Compares `enumerate_candidates` with the triple scan on every fixture
/// method of at most 25 statements. Returns the number of candidates seen.
pub fn check_enumeration(trees: &[SyntaxTree]) -> Result<usize, String> {
    let w = ScoreWeights::default();
    let mut total = 0;
    for t in trees {
        for m in methods_of(t) {
            if count_statements(&m.body.stmts) > 25 {
                continue;
            }
            let mut triples: Vec<(usize, usize, Span)> = Vec::new();
            m.body.walk_blocks(&mut |b| {
                for start in 0..b.stmts.len() {
                    for len in 1..=b.stmts.len() - start {
                        let fr = CodeFragment::from_run(t, b, start, len);
                        let c = Candidate::measure(fr, m, &w).expect("run lies in its method");
                        if is_extractable(&c) {
                            triples.push((c.fragment.span.start, len, c.fragment.span));
                        }
                    }
                }
            });
            triples.sort();
            let got: Vec<Span> = enumerate_candidates(t, m, &w).iter().map(|c| c.fragment.span).collect();
            let want: Vec<Span> = triples.iter().map(|x| x.2).collect();
            if got != want {
                return Err(format!("{}::{}: enumerated {got:?}, triple scan {want:?}", t.path, m.name));
            }
            total += got.len();
        }
    }
    Ok(total)
}
