//! Visual feature ingestion and per-word visual representations.
//!
//! Each visual word comes with a cluster of feature vectors (one per sampled
//! image). A cluster is summarised either by its centroid, which is used as a
//! fixed `v_w`, or by a diagonal-covariance Gaussian mixture from which a
//! fresh `v_w` is drawn at every training step.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng as _;
use rand::seq::IndexedRandom as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::rng::{self, Rng};
use crate::util::{join_f64, parse_f64s};
use crate::{Error, Result};

/// Smallest variance ever used, whatever the data scale.
pub const MIN_VARIANCE_FLOOR: f64 = 1e-8;
/// Variance floor relative to the average per-dimension variance of all samples.
pub const RELATIVE_VARIANCE_FLOOR: f64 = 1e-6;
/// Relative log-likelihood improvement below which EM stops.
pub const EM_TOLERANCE: f64 = 1e-6;

const KMEANS_MAX_ITERS: usize = 100;

/// Raw per-word feature clusters, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualFeatureSet {
    dim: usize,
    samples: IndexMap<String, Vec<Vec<f64>>>,
}

impl VisualFeatureSet {
    pub fn new(dim: usize) -> Self {
        VisualFeatureSet {
            dim,
            samples: IndexMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn insert(&mut self, word: &str, sample: Vec<f64>) -> Result<()> {
        if sample.len() != self.dim {
            return Err(Error::Argument(format!(
                "sample for {word:?} has {} values, expected {}",
                sample.len(),
                self.dim
            )));
        }
        self.samples.entry(word.to_owned()).or_default().push(sample);
        Ok(())
    }

    pub fn samples(&self, word: &str) -> Option<&[Vec<f64>]> {
        self.samples.get(word).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Vec<f64>])> {
        self.samples.iter().map(|(w, s)| (w.as_str(), s.as_slice()))
    }

    pub fn read_from<R: BufRead>(reader: R, expected_dim: Option<usize>, source: &str) -> Result<Self> {
        let mut set: Option<VisualFeatureSet> = expected_dim.map(VisualFeatureSet::new);
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(source, e))?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = parse_f64s(fields, source, line_no)?;
            let set = set.get_or_insert_with(|| VisualFeatureSet::new(values.len()));
            if values.is_empty() || values.len() != set.dim {
                return Err(Error::format(
                    source,
                    line_no,
                    format!("expected {} feature values for {word:?}, found {}", set.dim, values.len()),
                ));
            }
            set.samples.entry(word.to_owned()).or_default().push(values);
        }
        match set {
            Some(set) if !set.is_empty() => Ok(set),
            _ => Err(Error::format(source, 1, "feature file contains no samples")),
        }
    }

    /// One `word v_1 … v_d` line per sample, grouped by word.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (word, samples) in &self.samples {
            for s in samples {
                writeln!(out, "{word} {}", join_f64(s))?;
            }
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Default variance floor: a millionth of the mean per-dimension
    /// variance over every sample, but never below [`MIN_VARIANCE_FLOOR`].
    pub fn default_variance_floor(&self) -> f64 {
        let all: Vec<&Vec<f64>> = self.samples.values().flatten().collect();
        let n = all.len() as f64;
        if all.is_empty() || self.dim == 0 {
            return MIN_VARIANCE_FLOOR;
        }
        let mut mean = vec![0.0; self.dim];
        for s in &all {
            for (m, x) in mean.iter_mut().zip(s.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var_sum = 0.0;
        for s in &all {
            for (m, x) in mean.iter().zip(s.iter()) {
                var_sum += (x - m) * (x - m);
            }
        }
        let avg_var = var_sum / n / self.dim as f64;
        (RELATIVE_VARIANCE_FLOOR * avg_var).max(MIN_VARIANCE_FLOOR)
    }
}

pub fn load_features(path: &Path, expected_dim: Option<usize>) -> Result<VisualFeatureSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    VisualFeatureSet::read_from(BufReader::new(file), expected_dim, &path.display().to_string())
}

pub fn compute_centroid(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Argument("centroid of an empty sample list".into()))?;
    // Running mean: exact when every sample is identical.
    let mut mean = vec![0.0; first.len()];
    for (i, s) in samples.iter().enumerate() {
        if s.len() != mean.len() {
            return Err(Error::Argument("samples have inconsistent dimensions".into()));
        }
        let k = (i + 1) as f64;
        for (m, x) in mean.iter_mut().zip(s) {
            *m += (x - *m) / k;
        }
    }
    Ok(mean)
}

/// One axis-aligned Gaussian of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    pub components: Vec<Component>,
}

impl Mixture {
    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    fn log_norms(&self) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.weight.ln()
                    - 0.5 * c.variance.iter().map(|v| (2.0 * std::f64::consts::PI * v).ln()).sum::<f64>()
            })
            .collect()
    }

    /// Per-component log(π_k N(x | μ_k, σ²_k)).
    fn component_log_densities(&self, x: &[f64], norms: &[f64], out: &mut [f64]) {
        for ((c, norm), o) in self.components.iter().zip(norms).zip(out.iter_mut()) {
            let quad: f64 = x
                .iter()
                .zip(&c.mean)
                .zip(&c.variance)
                .map(|((x, m), v)| (x - m) * (x - m) / v)
                .sum();
            *o = norm - 0.5 * quad;
        }
    }

    /// Total log-likelihood of `samples` under the mixture.
    pub fn log_likelihood(&self, samples: &[Vec<f64>]) -> f64 {
        let norms = self.log_norms();
        let mut buf = vec![0.0; self.components.len()];
        samples
            .iter()
            .map(|x| {
                self.component_log_densities(x, &norms, &mut buf);
                log_sum_exp(&buf)
            })
            .sum()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub enum VisualRepresentation {
    Centroid(Vec<f64>),
    Mixture(Mixture),
}

impl VisualRepresentation {
    pub fn dim(&self) -> usize {
        match self {
            VisualRepresentation::Centroid(c) => c.len(),
            VisualRepresentation::Mixture(m) => m.dim(),
        }
    }
}

/// Result of an EM run.
#[derive(Debug, Clone)]
pub struct MixtureFit {
    pub mixture: Mixture,
    /// Log-likelihood of the initial parameters followed by one entry per
    /// EM iteration.
    pub log_likelihoods: Vec<f64>,
}

/// Fit a `k`-component diagonal Gaussian mixture by EM, starting from a
/// seeded k-means++ / Lloyd clustering.
pub fn fit_mixture(
    samples: &[Vec<f64>],
    k: usize,
    max_iters: usize,
    variance_floor: f64,
    seed: u64,
) -> Result<MixtureFit> {
    if k == 0 {
        return Err(Error::Argument("mixture needs at least one component".into()));
    }
    if k > samples.len() {
        return Err(Error::Argument(format!(
            "cannot fit {k} components to {} samples",
            samples.len()
        )));
    }
    if !(variance_floor > 0.0) {
        return Err(Error::Argument("variance floor must be positive".into()));
    }
    let dim = samples[0].len();
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::Argument("samples have inconsistent dimensions".into()));
    }

    let mut rng = rng::seeded(seed);
    let assignment = kmeans(samples, k, &mut rng);
    let mut resp = vec![0.0; samples.len() * k];
    for (i, &a) in assignment.iter().enumerate() {
        resp[i * k + a] = 1.0;
    }
    let mut mixture = Mixture {
        components: vec![
            Component {
                weight: 1.0 / k as f64,
                mean: vec![0.0; dim],
                variance: vec![variance_floor; dim],
            };
            k
        ],
    };
    m_step(samples, &resp, variance_floor, &mut mixture);

    let mut log_likelihoods = vec![e_step(samples, &mixture, &mut resp)];
    for _ in 0..max_iters {
        m_step(samples, &resp, variance_floor, &mut mixture);
        let ll = e_step(samples, &mixture, &mut resp);
        let prev = *log_likelihoods.last().unwrap();
        log_likelihoods.push(ll);
        if ll - prev <= EM_TOLERANCE * prev.abs() {
            break;
        }
    }
    Ok(MixtureFit {
        mixture,
        log_likelihoods,
    })
}

/// Fill `resp` with posterior responsibilities and return the log-likelihood.
fn e_step(samples: &[Vec<f64>], mixture: &Mixture, resp: &mut [f64]) -> f64 {
    let k = mixture.components.len();
    let norms = mixture.log_norms();
    let mut ll = 0.0;
    for (x, r) in samples.iter().zip(resp.chunks_mut(k)) {
        mixture.component_log_densities(x, &norms, r);
        let lse = log_sum_exp(r);
        ll += lse;
        r.iter_mut().for_each(|v| *v = (*v - lse).exp());
    }
    ll
}

fn m_step(samples: &[Vec<f64>], resp: &[f64], floor: f64, mixture: &mut Mixture) {
    let k = mixture.components.len();
    let n = samples.len() as f64;
    for (j, comp) in mixture.components.iter_mut().enumerate() {
        let mass: f64 = resp.iter().skip(j).step_by(k).sum();
        if mass <= f64::MIN_POSITIVE {
            // Collapsed component: keep its shape, give it a negligible weight.
            comp.weight = f64::MIN_POSITIVE;
            continue;
        }
        comp.weight = mass / n;
        comp.mean.iter_mut().for_each(|m| *m = 0.0);
        for (x, r) in samples.iter().zip(resp.chunks(k)) {
            let r = r[j];
            for (m, x) in comp.mean.iter_mut().zip(x) {
                *m += r * x;
            }
        }
        comp.mean.iter_mut().for_each(|m| *m /= mass);
        comp.variance.iter_mut().for_each(|v| *v = 0.0);
        for (x, r) in samples.iter().zip(resp.chunks(k)) {
            let r = r[j];
            for ((v, x), m) in comp.variance.iter_mut().zip(x).zip(&comp.mean) {
                *v += r * (x - m) * (x - m);
            }
        }
        comp.variance.iter_mut().for_each(|v| *v = (*v / mass).max(floor));
    }
    let total: f64 = mixture.components.iter().map(|c| c.weight).sum();
    mixture.components.iter_mut().for_each(|c| c.weight /= total);
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Hard cluster assignment from k-means++ seeding followed by Lloyd
/// iterations. Every cluster ends up non-empty.
fn kmeans(samples: &[Vec<f64>], k: usize, rng: &mut Rng) -> Vec<usize> {
    let n = samples.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(samples.choose(rng).unwrap().clone());
    let mut nearest: Vec<f64> = samples.iter().map(|s| sq_dist(s, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in nearest.iter().enumerate() {
                if target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(samples[next].clone());
        for (d, s) in nearest.iter_mut().zip(samples) {
            *d = d.min(sq_dist(s, centers.last().unwrap()));
        }
    }

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for (i, s) in samples.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(s, &centers[a]).total_cmp(&sq_dist(s, &centers[b])))
                .unwrap();
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        fill_empty_clusters(samples, &centers, &mut assignment, k);
        for (j, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> =
                samples.iter().zip(&assignment).filter(|(_, &a)| a == j).map(|(s, _)| s).collect();
            center.iter_mut().for_each(|c| *c = 0.0);
            for m in &members {
                for (c, x) in center.iter_mut().zip(m.iter()) {
                    *c += x;
                }
            }
            let count = members.len() as f64;
            center.iter_mut().for_each(|c| *c /= count);
        }
        if !changed {
            break;
        }
    }
    assignment
}

fn fill_empty_clusters(samples: &[Vec<f64>], centers: &[Vec<f64>], assignment: &mut [usize], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        assignment.iter().for_each(|&a| sizes[a] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        // Move the point farthest from its center out of a cluster that can spare it.
        let donor = (0..samples.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .max_by(|&a, &b| {
                sq_dist(&samples[a], &centers[assignment[a]])
                    .total_cmp(&sq_dist(&samples[b], &centers[assignment[b]]))
            })
            .expect("k <= n guarantees a donor");
        assignment[donor] = empty;
    }
}

/// Draw a visual vector: the centroid itself, or a sample from the mixture.
pub fn sample_visual(repr: &VisualRepresentation, rng: &mut Rng) -> Vec<f64> {
    match repr {
        VisualRepresentation::Centroid(c) => c.clone(),
        VisualRepresentation::Mixture(m) => {
            let comp = pick_component(m, rng);
            comp.mean
                .iter()
                .zip(&comp.variance)
                .map(|(mu, var)| {
                    let z: f64 = rng.sample(StandardNormal);
                    mu + var.sqrt() * z
                })
                .collect()
        }
    }
}

fn pick_component<'a>(m: &'a Mixture, rng: &mut Rng) -> &'a Component {
    if m.components.len() == 1 {
        return &m.components[0];
    }
    let mut u = rng.random::<f64>();
    for c in &m.components {
        if u < c.weight {
            return c;
        }
        u -= c.weight;
    }
    m.components.last().unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreMode {
    Centroid,
    Mixture,
}

impl StoreMode {
    fn as_str(self) -> &'static str {
        match self {
            StoreMode::Centroid => "centroid",
            StoreMode::Mixture => "mixture",
        }
    }
}

/// Fitted representations for every visual word.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualStore {
    pub mode: StoreMode,
    pub dim: usize,
    pub k: usize,
    pub floor: f64,
    entries: IndexMap<String, VisualRepresentation>,
}

impl VisualStore {
    pub fn new(mode: StoreMode, dim: usize, k: usize, floor: f64) -> Self {
        VisualStore {
            mode,
            dim,
            k,
            floor,
            entries: IndexMap::new(),
        }
    }

    pub fn insert(&mut self, word: &str, repr: VisualRepresentation) -> Result<()> {
        let matches_mode = matches!(
            (&repr, self.mode),
            (VisualRepresentation::Centroid(_), StoreMode::Centroid)
                | (VisualRepresentation::Mixture(_), StoreMode::Mixture)
        );
        if !matches_mode || repr.dim() != self.dim {
            return Err(Error::Argument(format!(
                "representation for {word:?} does not match a {} store of dimension {}",
                self.mode.as_str(),
                self.dim
            )));
        }
        self.entries.insert(word.to_owned(), repr);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&VisualRepresentation> {
        self.entries.get(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &VisualRepresentation)> {
        self.entries.iter().map(|(w, r)| (w.as_str(), r))
    }

    /// Centroid for every word in `features`.
    pub fn fit_centroids(features: &VisualFeatureSet, floor: f64) -> Result<Self> {
        let fitted: Vec<_> = features
            .iter()
            .map(|(w, s)| compute_centroid(s).map(|c| (w, VisualRepresentation::Centroid(c))))
            .collect::<Result<_>>()?;
        let mut store = VisualStore::new(StoreMode::Centroid, features.dim(), 1, floor);
        for (w, r) in fitted {
            store.insert(w, r)?;
        }
        Ok(store)
    }

    /// Mixture for every word in `features`. Words are fitted in parallel,
    /// each from its own seed stream, so the result does not depend on
    /// scheduling. Words with fewer than `k` samples get one component per
    /// sample.
    pub fn fit_mixtures(
        features: &VisualFeatureSet,
        k: usize,
        max_iters: usize,
        floor: f64,
        seed: u64,
    ) -> Result<Self> {
        let words: Vec<(&str, &[Vec<f64>])> = features.iter().collect();
        let fitted: Vec<_> = words
            .par_iter()
            .map(|&(word, samples)| {
                let k_word = k.min(samples.len());
                if k_word < k {
                    log::warn!("{word}: only {} samples, fitting {k_word} components", samples.len());
                }
                let word_seed = {
                    use rand::RngCore as _;
                    rng::fork(seed, word).next_u64()
                };
                fit_mixture(samples, k_word, max_iters, floor, word_seed)
                    .map(|fit| VisualRepresentation::Mixture(fit.mixture))
            })
            .collect::<Result<_>>()?;
        let mut store = VisualStore::new(StoreMode::Mixture, features.dim(), k, floor);
        for ((w, _), r) in words.into_iter().zip(fitted) {
            store.insert(w, r)?;
        }
        Ok(store)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "MODE {} DIM {} K {} FLOOR {:?}",
            self.mode.as_str(),
            self.dim,
            self.k,
            self.floor
        )?;
        for (word, repr) in &self.entries {
            writeln!(out, "WORD {word}")?;
            match repr {
                VisualRepresentation::Centroid(c) => writeln!(out, "CENTROID {}", join_f64(c))?,
                VisualRepresentation::Mixture(m) => {
                    for comp in &m.components {
                        writeln!(out, "WEIGHT {:?}", comp.weight)?;
                        writeln!(out, "MEAN {}", join_f64(&comp.mean))?;
                        writeln!(out, "VARIANCE {}", join_f64(&comp.variance))?;
                    }
                }
            }
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::format(source, 1, "empty visual representation file")),
        };
        let h: Vec<&str> = header.split_whitespace().collect();
        let mut store = match h.as_slice() {
            ["MODE", mode, "DIM", dim, "K", k, "FLOOR", floor] => {
                let mode = match *mode {
                    "centroid" => StoreMode::Centroid,
                    "mixture" => StoreMode::Mixture,
                    other => return Err(Error::format(source, 1, format!("unknown mode {other:?}"))),
                };
                let bad = || Error::format(source, 1, "malformed header");
                VisualStore::new(
                    mode,
                    dim.parse().map_err(|_| bad())?,
                    k.parse().map_err(|_| bad())?,
                    floor.parse().map_err(|_| bad())?,
                )
            }
            _ => {
                return Err(Error::format(
                    source,
                    1,
                    "expected header \"MODE <centroid|mixture> DIM <d> K <k> FLOOR <f>\"",
                ))
            }
        };

        let mut current: Option<(String, usize)> = None;
        let mut centroid: Option<Vec<f64>> = None;
        let mut components: Vec<Component> = Vec::new();
        let mut pending_weight: Option<f64> = None;
        let mut pending_mean: Option<Vec<f64>> = None;

        let flush = |store: &mut VisualStore,
                     current: &mut Option<(String, usize)>,
                     centroid: &mut Option<Vec<f64>>,
                     components: &mut Vec<Component>|
         -> Result<()> {
            if let Some((word, line_no)) = current.take() {
                let repr = match store.mode {
                    StoreMode::Centroid => VisualRepresentation::Centroid(
                        centroid
                            .take()
                            .ok_or_else(|| Error::format(source, line_no, format!("no centroid for {word:?}")))?,
                    ),
                    StoreMode::Mixture => {
                        if components.is_empty() {
                            return Err(Error::format(source, line_no, format!("no components for {word:?}")));
                        }
                        VisualRepresentation::Mixture(Mixture {
                            components: std::mem::take(components),
                        })
                    }
                };
                store
                    .insert(&word, repr)
                    .map_err(|e| Error::format(source, line_no, e.to_string()))?;
            }
            Ok(())
        };

        for (line_no, line) in lines {
            let line = line.map_err(|e| Error::io(source, e))?;
            let mut fields = line.split_whitespace();
            let Some(tag) = fields.next() else { continue };
            let expect_dim = |v: Vec<f64>| -> Result<Vec<f64>> {
                if v.len() == store.dim {
                    Ok(v)
                } else {
                    Err(Error::format(
                        source,
                        line_no,
                        format!("expected {} values, found {}", store.dim, v.len()),
                    ))
                }
            };
            match (tag, store.mode) {
                ("WORD", _) => {
                    if pending_weight.is_some() || pending_mean.is_some() {
                        return Err(Error::format(source, line_no, "incomplete component"));
                    }
                    flush(&mut store, &mut current, &mut centroid, &mut components)?;
                    let word = fields
                        .next()
                        .ok_or_else(|| Error::format(source, line_no, "missing word"))?;
                    current = Some((word.to_owned(), line_no));
                }
                (_, _) if current.is_none() => {
                    return Err(Error::format(source, line_no, format!("{tag} outside a WORD block")))
                }
                ("CENTROID", StoreMode::Centroid) => {
                    centroid = Some(expect_dim(parse_f64s(fields, source, line_no)?)?);
                }
                ("WEIGHT", StoreMode::Mixture) => {
                    let w = parse_f64s(fields, source, line_no)?;
                    match w.as_slice() {
                        [w] if *w > 0.0 => pending_weight = Some(*w),
                        _ => return Err(Error::format(source, line_no, "expected one positive weight")),
                    }
                }
                ("MEAN", StoreMode::Mixture) if pending_weight.is_some() => {
                    pending_mean = Some(expect_dim(parse_f64s(fields, source, line_no)?)?);
                }
                ("VARIANCE", StoreMode::Mixture) if pending_mean.is_some() => {
                    let variance = expect_dim(parse_f64s(fields, source, line_no)?)?;
                    if variance.iter().any(|v| !(*v > 0.0)) {
                        return Err(Error::format(source, line_no, "variances must be positive"));
                    }
                    components.push(Component {
                        weight: pending_weight.take().unwrap(),
                        mean: pending_mean.take().unwrap(),
                        variance,
                    });
                }
                _ => return Err(Error::format(source, line_no, format!("unexpected {tag} line"))),
            }
        }
        if pending_weight.is_some() || pending_mean.is_some() {
            return Err(Error::format(source, 0, "incomplete component at end of file"));
        }
        flush(&mut store, &mut current, &mut centroid, &mut components)?;
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }
}
