#![allow(dead_code)]

pub mod candidates;
pub mod clones;
pub mod dataflow;
pub mod features;
pub mod learning;

use std::path::PathBuf;

use pastewatch_core::syntax::{parse_file, SyntaxTree};

pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures")).join(name)
}

/// Parses every `.java` file in a fixture directory, sorted by name.
pub fn load_fixtures(name: &str) -> Vec<SyntaxTree> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir(name))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "java"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let src = std::fs::read_to_string(p).unwrap();
            parse_file(&src, &p.display().to_string()).unwrap()
        })
        .collect()
}
