//! Word-similarity benchmarks and nearest-neighbour inspection.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::embeddings::Embeddings;
use crate::util::dot;
use crate::{Error, Result};

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!("vector lengths differ: {} vs {}", a.len(), b.len())));
    }
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Argument("cosine of a zero vector".into()));
    }
    Ok((dot(a, b) / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Ranks starting at 1; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Argument(format!("list lengths differ: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!("{} values", xs.len())));
    }
    let all_tied = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if all_tied(xs) || all_tied(ys) {
        return Err(Error::UndefinedCorrelation("every value in a list is tied".into()));
    }
    Ok(pearson(&average_ranks(xs), &average_ranks(ys)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSet {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

impl BenchmarkSet {
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String, f64)>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::Argument(format!("benchmark {name} has no pairs")));
        }
        let mut seen: HashMap<(&str, &str), f64> = HashMap::new();
        for (a, b, score) in &pairs {
            let key = if a <= b { (a.as_str(), b.as_str()) } else { (b.as_str(), a.as_str()) };
            if let Some(prev) = seen.insert(key, *score) {
                if prev != *score {
                    return Err(Error::Argument(format!(
                        "benchmark {name}: pair ({a}, {b}) listed with scores {prev} and {score}"
                    )));
                }
            }
        }
        Ok(BenchmarkSet { name, pairs })
    }

    /// `word_a<TAB>word_b<TAB>score` lines; blank lines and `#` comments are skipped.
    pub fn read_from<R: BufRead>(reader: R, name: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(name, e))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            let [a, b, score] = fields[..] else {
                return Err(Error::format(name, line_no, "expected word_a<TAB>word_b<TAB>score"));
            };
            let score: f64 = score
                .parse()
                .map_err(|_| Error::format(name, line_no, format!("invalid score {score:?}")))?;
            pairs.push((a.to_owned(), b.to_owned(), score));
        }
        BenchmarkSet::new(name, pairs).map_err(|e| Error::format(name, 0, e.to_string()))
    }

    /// Load a benchmark; its name is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let mut set = Self::read_from(BufReader::new(file), &path.display().to_string())?;
        set.name = name;
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub name: String,
    pub rho: f64,
    pub evaluated_pairs: usize,
    pub skipped_pairs: usize,
}

impl fmt::Display for BenchmarkResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} rho={:.4} pairs={} skipped={}",
            self.name, self.rho, self.evaluated_pairs, self.skipped_pairs
        )
    }
}

/// Spearman correlation between embedding cosines and human scores over
/// the pairs whose words both have embeddings.
pub fn run_benchmark(embeddings: &Embeddings, bench: &BenchmarkSet) -> Result<BenchmarkResult> {
    let mut model = Vec::with_capacity(bench.pairs.len());
    let mut human = Vec::with_capacity(bench.pairs.len());
    for (a, b, score) in &bench.pairs {
        if let (Some(va), Some(vb)) = (embeddings.get(a), embeddings.get(b)) {
            model.push(cosine(va, vb)?);
            human.push(*score);
        }
    }
    let evaluated = model.len();
    let skipped = bench.pairs.len() - evaluated;
    if evaluated < 2 {
        return Err(Error::Coverage { evaluated, skipped });
    }
    Ok(BenchmarkResult {
        name: bench.name.clone(),
        rho: spearman(&model, &human)?,
        evaluated_pairs: evaluated,
        skipped_pairs: skipped,
    })
}

/// The `k` words most cosine-similar to `query`, excluding the query itself.
/// Ties are broken lexicographically.
pub fn nearest_neighbors(embeddings: &Embeddings, query: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let q = embeddings
        .get(query)
        .ok_or_else(|| Error::Argument(format!("query word {query:?} is not in the vocabulary")))?;
    let mut scored = embeddings
        .iter()
        .filter(|(w, _)| *w != query)
        .map(|(w, v)| cosine(q, v).map(|c| (w.to_owned(), c)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}
