#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudoword"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// First half alternates `a b`, second half alternates `x y`.
pub fn two_topic_corpus(tokens: usize) -> String {
    let mut words = Vec::with_capacity(tokens);
    for i in 0..tokens {
        let pair = if i < tokens / 2 { ["a", "b"] } else { ["x", "y"] };
        words.push(pair[i % 2]);
    }
    words.join(" ")
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Parse a word2vec text file into (word, vector) rows.
pub fn read_vectors(path: &Path) -> Vec<(String, Vec<f64>)> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split_whitespace();
            let w = it.next().unwrap().to_string();
            (w, it.map(|x| x.parse().unwrap()).collect())
        })
        .collect()
}

pub fn vector<'a>(rows: &'a [(String, Vec<f64>)], word: &str) -> &'a [f64] {
    &rows.iter().find(|(w, _)| w == word).unwrap().1
}
