//! Skip-gram training with visual pseudowords.
//!
//! A context word `x` enters the objective as its pseudoword
//! `z_x = u_x + M v_x`, with `v_x = 0` for words without visual data. Two
//! output layers are available:
//!
//! * [`Backend::ExactSoftmax`] scores the context against every vocabulary
//!   word: `log p(c | t) = z_c·u_t − log Σ_w exp(z_w·u_t)`, where `z_w` is built
//!   from the output vector `u'_w`. It costs O(W) per pair and serves as the
//!   reference on small vocabularies.
//! * [`Backend::HierarchicalSoftmax`] uses the context pseudoword
//!   `z_c = u_c + M v_c` as the input vector predicting the target's Huffman
//!   path: `log p = Σ log σ(s_n · v'_n·z_c)`.
//!
//! Parameters live in [`ParamMatrix`], a matrix of relaxed atomics, so worker
//! threads can apply unsynchronized updates to shared rows. With one thread
//! and a fixed seed the whole run is bit-reproducible.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::Rng as _;

use crate::corpus::{self, Pairs, Vocabulary};
use crate::embeddings::Embeddings;
use crate::huffman::HuffmanTree;
use crate::mapping::{self, MappingMatrix};
use crate::rng::{self, Rng};
use crate::util::dot;
use crate::visual::{sample_visual, StoreMode, VisualRepresentation, VisualStore};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    ExactSoftmax,
    HierarchicalSoftmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisualMode {
    /// Plain text skip-gram.
    None,
    /// Fixed centroid per visual word.
    Centroid,
    /// Fresh draw from the fitted mixture at every step.
    Hypersphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingInit {
    Random,
    Neural,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub d_emb: usize,
    pub window: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_floor: f64,
    pub subsample_threshold: f64,
    pub backend: Backend,
    pub visual_mode: VisualMode,
    pub mapping_init: MappingInit,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            d_emb: 300,
            window: 5,
            epochs: 5,
            lr_initial: 0.025,
            lr_floor: 0.025 * 1e-4,
            subsample_threshold: 0.0,
            backend: Backend::HierarchicalSoftmax,
            visual_mode: VisualMode::None,
            mapping_init: MappingInit::Random,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_emb == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(self.lr_floor < self.lr_initial) || !(self.lr_floor >= 0.0) {
            return Err(Error::Config(format!(
                "need 0 <= lr_floor < lr_initial, got {} and {}",
                self.lr_floor, self.lr_initial
            )));
        }
        if !(self.subsample_threshold >= 0.0) {
            return Err(Error::Config("subsample threshold must be non-negative".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// Dense matrix of `f64` stored as relaxed atomics.
pub struct ParamMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<AtomicU64>,
}

impl ParamMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_values(rows, cols, vec![0.0; rows * cols])
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols);
        ParamMatrix {
            rows,
            cols,
            cells: values.into_iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        f64::from_bits(self.cells[r * self.cols + c].load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, r: usize, c: usize, value: f64) {
        self.cells[r * self.cols + c].store(value.to_bits(), Ordering::Relaxed);
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        x.iter().enumerate().map(|(c, xv)| self.get(r, c) * xv).sum()
    }

    /// `row[r] += scale · delta`; returns false if any updated value is not finite.
    fn add_scaled(&self, r: usize, scale: f64, delta: &[f64]) -> bool {
        let mut finite = true;
        for (c, d) in delta.iter().enumerate() {
            let v = self.get(r, c) + scale * d;
            finite &= v.is_finite();
            self.set(r, c, v);
        }
        finite
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.cells.iter().map(|c| f64::from_bits(c.load(Ordering::Relaxed))).collect()
    }
}

impl Clone for ParamMatrix {
    fn clone(&self) -> Self {
        Self::from_values(self.rows, self.cols, self.to_vec())
    }
}

impl PartialEq for ParamMatrix {
    /// Bitwise equality.
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.cells.iter().zip(&other.cells).all(|(a, b)| {
                a.load(Ordering::Relaxed) == b.load(Ordering::Relaxed)
            })
    }
}

impl std::fmt::Debug for ParamMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ParamMatrix({}x{})", self.rows, self.cols)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    /// `u_w`, one row per word. These are the exported embeddings.
    pub input: ParamMatrix,
    /// `u'_w` per word (exact backend) or one vector per inner Huffman node.
    pub output: ParamMatrix,
    /// `M`, present whenever visual machinery is enabled.
    pub mapping: Option<ParamMatrix>,
}

impl ModelParameters {
    /// Input vectors uniform on `[-0.5/d_emb, 0.5/d_emb]`, output vectors zero.
    pub fn init(
        vocab_size: usize,
        d_emb: usize,
        backend: Backend,
        mapping: Option<&MappingMatrix>,
        rng: &mut Rng,
    ) -> Self {
        let half = 0.5 / d_emb as f64;
        let input = (0..vocab_size * d_emb).map(|_| rng.random_range(-half..=half)).collect();
        let output_rows = match backend {
            Backend::ExactSoftmax => vocab_size,
            Backend::HierarchicalSoftmax => vocab_size.saturating_sub(1),
        };
        ModelParameters {
            input: ParamMatrix::from_values(vocab_size, d_emb, input),
            output: ParamMatrix::zeros(output_rows, d_emb),
            mapping: mapping.map(|m| ParamMatrix::from_values(m.rows(), m.cols(), m.values().to_vec())),
        }
    }

    pub fn d_emb(&self) -> usize {
        self.input.cols()
    }

    pub fn mapping_matrix(&self) -> Option<MappingMatrix> {
        self.mapping
            .as_ref()
            .map(|m| MappingMatrix::from_vec(m.rows(), m.cols(), m.to_vec()).expect("finite mapping"))
    }

    /// The input vectors as word embeddings, in vocabulary order.
    pub fn input_embeddings(&self, vocab: &Vocabulary) -> Embeddings {
        let mut out = Embeddings::new(self.d_emb());
        for (id, word) in vocab.words().iter().enumerate() {
            out.push(word, &self.input.row(id)).expect("vocabulary words are unique");
        }
        out
    }
}

/// `u + M·v`, or `u` itself when the word has no visual data.
pub fn compose_pseudoword(u: &[f64], v: Option<&[f64]>, m: &MappingMatrix) -> Result<Vec<f64>> {
    if m.rows() != u.len() {
        return Err(Error::Argument(format!(
            "mapping has {} rows, embedding has {} dimensions",
            m.rows(),
            u.len()
        )));
    }
    let mut z = u.to_vec();
    if let Some(v) = v {
        for (zi, p) in z.iter_mut().zip(mapping::project(m, v)?) {
            *zi += p;
        }
    }
    Ok(z)
}

fn add_projection(z: &mut [f64], m: &ParamMatrix, v: &[f64]) {
    for (r, zr) in z.iter_mut().enumerate() {
        *zr += m.row_dot(r, v);
    }
}

/// Numerically stable `log σ(x)`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Output-side pseudowords `z_w = u'_w + M v_w` for every word.
pub fn pseudo_outputs(
    params: &ModelParameters,
    visual: &mut dyn FnMut(usize) -> Option<Vec<f64>>,
) -> Vec<Vec<f64>> {
    (0..params.output.rows())
        .map(|w| {
            let mut z = params.output.row(w);
            if let (Some(m), Some(v)) = (&params.mapping, visual(w)) {
                add_projection(&mut z, m, &v);
            }
            z
        })
        .collect()
}

/// Full-softmax `log p(context | target)` given the target's input vector
/// and the output pseudowords of the whole vocabulary.
pub fn exact_log_prob(target_vec: &[f64], context_id: usize, pseudo_outputs: &[Vec<f64>]) -> f64 {
    let scores: Vec<f64> = pseudo_outputs.iter().map(|z| dot(z, target_vec)).collect();
    scores[context_id] - log_sum_exp(&scores)
}

/// Hierarchical-softmax `log p(word | input_vec)` along the word's Huffman path.
pub fn hs_log_prob(input_vec: &[f64], word_id: usize, tree: &HuffmanTree, nodes: &ParamMatrix) -> f64 {
    tree.path(word_id)
        .iter()
        .zip(tree.code(word_id))
        .map(|(&n, &bit)| {
            let sign = if bit == 0 { 1.0 } else { -1.0 };
            log_sigmoid(sign * nodes.row_dot(n as usize, input_vec))
        })
        .sum()
}

/// Loss and gradient of one (target, context) pair, before any update.
///
/// The mapping gradient is kept factored: `∂L/∂M = Σ g·vᵀ` over the
/// `(g, v)` terms.
#[derive(Debug, Clone, Default)]
pub struct PairGradient {
    pub loss: f64,
    pub input: Vec<(usize, Vec<f64>)>,
    pub output: Vec<(usize, Vec<f64>)>,
    pub mapping: Vec<(Vec<f64>, Vec<f64>)>,
}

impl PairGradient {
    /// Dense `∂L/∂M`.
    pub fn mapping_dense(&self, rows: usize, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * cols];
        for (g, v) in &self.mapping {
            for (r, gr) in g.iter().enumerate() {
                for (c, vc) in v.iter().enumerate() {
                    out[r * cols + c] += gr * vc;
                }
            }
        }
        out
    }
}

/// Negative log-likelihood of the pair and its gradient with respect to
/// every parameter. `visual` supplies `v_w` for a word id (or `None`).
pub fn pair_gradient(
    backend: Backend,
    target: usize,
    context: usize,
    params: &ModelParameters,
    tree: &HuffmanTree,
    visual: &mut dyn FnMut(usize) -> Option<Vec<f64>>,
) -> PairGradient {
    match backend {
        Backend::HierarchicalSoftmax => hs_gradient(target, context, params, tree, visual),
        Backend::ExactSoftmax => exact_gradient(target, context, params, visual),
    }
}

fn hs_gradient(
    target: usize,
    context: usize,
    params: &ModelParameters,
    tree: &HuffmanTree,
    visual: &mut dyn FnMut(usize) -> Option<Vec<f64>>,
) -> PairGradient {
    let mut z = params.input.row(context);
    let v = match &params.mapping {
        Some(m) => visual(context).inspect(|v| add_projection(&mut z, m, v)),
        None => None,
    };

    let mut loss = 0.0;
    let mut grad_z = vec![0.0; z.len()];
    let mut output = Vec::with_capacity(tree.path(target).len());
    for (&node, &bit) in tree.path(target).iter().zip(tree.code(target)) {
        let node = node as usize;
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        let node_vec = params.output.row(node);
        let a = sign * dot(&node_vec, &z);
        loss -= log_sigmoid(a);
        // d(-log σ(s·a))/da = -s·σ(-s·a)
        let g = -sign * sigmoid(-a);
        for (gz, nv) in grad_z.iter_mut().zip(&node_vec) {
            *gz += g * nv;
        }
        output.push((node, z.iter().map(|x| g * x).collect()));
    }

    let mapping = match v {
        Some(v) => vec![(grad_z.clone(), v)],
        None => Vec::new(),
    };
    PairGradient {
        loss,
        input: vec![(context, grad_z)],
        output,
        mapping,
    }
}

fn exact_gradient(
    target: usize,
    context: usize,
    params: &ModelParameters,
    visual: &mut dyn FnMut(usize) -> Option<Vec<f64>>,
) -> PairGradient {
    let x = params.input.row(target);
    let words = params.output.rows();
    let mut visuals: Vec<Option<Vec<f64>>> = Vec::with_capacity(words);
    let mut zs: Vec<Vec<f64>> = Vec::with_capacity(words);
    for w in 0..words {
        let mut z = params.output.row(w);
        let v = match &params.mapping {
            Some(m) => visual(w).inspect(|v| add_projection(&mut z, m, v)),
            None => None,
        };
        visuals.push(v);
        zs.push(z);
    }

    let scores: Vec<f64> = zs.iter().map(|z| dot(z, &x)).collect();
    let lse = log_sum_exp(&scores);
    let loss = lse - scores[context];

    let mut grad_x = vec![0.0; x.len()];
    let mut output = Vec::with_capacity(words);
    let mut mapping = Vec::new();
    for (w, (z, v)) in zs.iter().zip(visuals).enumerate() {
        let p = (scores[w] - lse).exp();
        let coeff = if w == context { p - 1.0 } else { p };
        for (gx, zv) in grad_x.iter_mut().zip(z) {
            *gx += coeff * zv;
        }
        let grad_z: Vec<f64> = x.iter().map(|xv| coeff * xv).collect();
        if let Some(v) = v {
            mapping.push((grad_z.clone(), v));
        }
        output.push((w, grad_z));
    }
    PairGradient {
        loss,
        input: vec![(target, grad_x)],
        output,
        mapping,
    }
}

/// Per-word access to fitted visual representations, indexed by vocabulary id.
#[derive(Debug, Clone)]
pub struct VisualLookup<'a> {
    slots: Vec<Option<&'a VisualRepresentation>>,
    dim: usize,
    mode: Option<StoreMode>,
}

impl<'a> VisualLookup<'a> {
    /// No visual words at all.
    pub fn none(vocab_size: usize) -> Self {
        VisualLookup {
            slots: vec![None; vocab_size],
            dim: 0,
            mode: None,
        }
    }

    /// Words of `store` that are in the vocabulary with a corpus count of at
    /// least `min_count` become visual; everything else keeps `v = 0`.
    pub fn new(vocab: &Vocabulary, store: &'a VisualStore, min_count: u64) -> Self {
        let mut slots = vec![None; vocab.len()];
        for (word, repr) in store.iter() {
            if let Some(id) = vocab.id(word) {
                if vocab.count(id) >= min_count {
                    slots[id] = Some(repr);
                }
            }
        }
        VisualLookup {
            slots,
            dim: store.dim,
            mode: Some(store.mode),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_visual(&self, id: usize) -> bool {
        self.slots[id].is_some()
    }

    pub fn visual_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn draw(&self, id: usize, rng: &mut Rng) -> Option<Vec<f64>> {
        self.slots[id].map(|r| sample_visual(r, rng))
    }
}

/// One SGD update on a (target, context) pair. Returns the pair's negative
/// log-likelihood before the update.
#[allow(clippy::too_many_arguments)]
pub fn train_step(
    target: usize,
    context: usize,
    params: &ModelParameters,
    tree: &HuffmanTree,
    backend: Backend,
    visual: &VisualLookup<'_>,
    lr: f64,
    rng: &mut Rng,
) -> Result<f64> {
    let grad = pair_gradient(backend, target, context, params, tree, &mut |w| visual.draw(w, rng));
    apply_gradient(&grad, params, lr).map_err(|which| {
        Error::Numerical(format!(
            "non-finite {which} after update on pair ({target}, {context}) at lr {lr:e}, loss {}",
            grad.loss
        ))
    })?;
    Ok(grad.loss)
}

fn apply_gradient(grad: &PairGradient, params: &ModelParameters, lr: f64) -> std::result::Result<(), &'static str> {
    let mut ok = true;
    for (r, g) in &grad.input {
        ok &= params.input.add_scaled(*r, -lr, g);
    }
    if !ok {
        return Err("input vector");
    }
    for (r, g) in &grad.output {
        ok &= params.output.add_scaled(*r, -lr, g);
    }
    if !ok {
        return Err("output vector");
    }
    if let Some(m) = &params.mapping {
        for (g, v) in &grad.mapping {
            for (r, gr) in g.iter().enumerate() {
                ok &= m.add_scaled(r, -lr * gr, v);
            }
        }
    }
    if !ok {
        return Err("mapping");
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub params: ModelParameters,
    /// Mean negative log-likelihood per pair for each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Train on the corpus file at `corpus_path`.
pub fn train(
    corpus_path: &Path,
    vocab: &Vocabulary,
    tree: &HuffmanTree,
    visual: &VisualLookup<'_>,
    mapping: Option<MappingMatrix>,
    config: &TrainingConfig,
) -> Result<TrainedModel> {
    let tokens = corpus::read_tokens(corpus_path)?;
    let ids = vocab.encode(&tokens);
    train_ids(&ids, vocab, tree, visual, mapping, config)
}

/// Train on an already-encoded corpus.
///
/// When visual modes are enabled and no `mapping` is given, `M` is drawn
/// with [`mapping::init_random`] from the `"mapping"` stream of the seed.
pub fn train_ids(
    ids: &[usize],
    vocab: &Vocabulary,
    tree: &HuffmanTree,
    visual: &VisualLookup<'_>,
    mapping: Option<MappingMatrix>,
    config: &TrainingConfig,
) -> Result<TrainedModel> {
    config.validate()?;
    if config.backend == Backend::HierarchicalSoftmax && tree.leaf_count() != vocab.len() {
        return Err(Error::Config(format!(
            "Huffman tree has {} leaves but the vocabulary has {} words",
            tree.leaf_count(),
            vocab.len()
        )));
    }
    if visual.len() != vocab.len() {
        return Err(Error::Config(format!(
            "visual lookup covers {} words but the vocabulary has {}",
            visual.len(),
            vocab.len()
        )));
    }

    let no_visual = VisualLookup::none(vocab.len());
    let (visual, mapping) = match config.visual_mode {
        VisualMode::None => (&no_visual, None),
        mode => {
            match (mode, visual.mode) {
                (VisualMode::Centroid, Some(StoreMode::Mixture)) => {
                    return Err(Error::Config("centroid training needs a centroid visual store".into()))
                }
                (VisualMode::Hypersphere, Some(StoreMode::Centroid)) => {
                    return Err(Error::Config("hypersphere training needs a mixture visual store".into()))
                }
                _ => {}
            }
            let m = match mapping {
                Some(m) => m,
                None if config.mapping_init == MappingInit::Random => {
                    mapping::init_random(config.d_emb, visual.dim(), &mut rng::fork(config.seed, "mapping"))
                }
                None => {
                    return Err(Error::Config(
                        "neural mapping initialization requires a pretrained mapping".into(),
                    ))
                }
            };
            if m.rows() != config.d_emb || (visual.mode.is_some() && m.cols() != visual.dim()) {
                return Err(Error::Config(format!(
                    "mapping is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    config.d_emb,
                    visual.dim()
                )));
            }
            (visual, Some(m))
        }
    };

    let params = ModelParameters::init(
        vocab.len(),
        config.d_emb,
        config.backend,
        mapping.as_ref(),
        &mut rng::fork(config.seed, "embeddings"),
    );

    let shard_len = ids.len().div_ceil(config.threads).max(1);
    let shards: Vec<&[usize]> = ids.chunks(shard_len).collect();
    let pairs_per_epoch: u64 = shards.iter().map(|s| corpus::pair_count(s.len(), config.window)).sum();
    let schedule = Schedule {
        lr_initial: config.lr_initial,
        lr_floor: config.lr_floor,
        total: (pairs_per_epoch * config.epochs as u64).max(1),
    };
    let processed = AtomicU64::new(0);

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let run_shard = |shard_idx: usize, shard: &[usize]| -> Result<(f64, u64)> {
            let mut rng = rng::fork(config.seed, &format!("train/{epoch}/{shard_idx}"));
            let kept = corpus::subsample(shard, vocab, config.subsample_threshold, &mut rng);
            let mut loss = 0.0;
            let mut count = 0u64;
            let mut local = 0u64;
            let mut base = processed.load(Ordering::Relaxed);
            for (target, context) in Pairs::new(&kept[..], config.window) {
                let lr = schedule.lr(base + local);
                loss += train_step(target, context, &params, tree, config.backend, visual, lr, &mut rng)?;
                count += 1;
                local += 1;
                if local == SYNC_INTERVAL {
                    base = processed.fetch_add(local, Ordering::Relaxed) + local;
                    local = 0;
                }
            }
            processed.fetch_add(local, Ordering::Relaxed);
            Ok((loss, count))
        };

        let results: Vec<Result<(f64, u64)>> = if shards.len() == 1 {
            vec![run_shard(0, shards[0])]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let run = &run_shard;
                        scope.spawn(move || run(i, s))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
            })
        };

        let (mut loss, mut count) = (0.0, 0u64);
        for r in results {
            let (l, c) = r?;
            loss += l;
            count += c;
        }
        let mean = if count > 0 { loss / count as f64 } else { 0.0 };
        let secs = started.elapsed().as_secs_f64();
        log::info!(
            "epoch {}/{}: loss {:.6}, lr {:.6}, {:.0} pairs/s",
            epoch + 1,
            config.epochs,
            mean,
            schedule.lr(processed.load(Ordering::Relaxed)),
            count as f64 / secs.max(1e-9)
        );
        epoch_losses.push(mean);
    }

    Ok(TrainedModel { params, epoch_losses })
}

const SYNC_INTERVAL: u64 = 10_000;

struct Schedule {
    lr_initial: f64,
    lr_floor: f64,
    total: u64,
}

impl Schedule {
    /// Linear decay from `lr_initial` to `lr_floor` over the expected number of pairs.
    fn lr(&self, processed: u64) -> f64 {
        let progress = (processed as f64 / self.total as f64).min(1.0);
        self.lr_initial + (self.lr_floor - self.lr_initial) * progress
    }
}
