//! The linear map `M` from visual feature space into the embedding space.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom as _;
use rand::Rng as _;

use crate::embeddings::Embeddings;
use crate::rng::Rng;
use crate::util::{dot, join_f64, parse_f64s};
use crate::{Error, Result};

/// Row-major `rows × cols` matrix (`rows` = embedding dimension, `cols` =
/// visual dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct MappingMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl MappingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MappingMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{} values cannot form a {rows}x{cols} matrix",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("mapping entries must be finite".into()));
        }
        Ok(MappingMatrix { rows, cols, values })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "MAPPING {} {}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(out, "{}", join_f64(self.row(r)))?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::format(source, 1, "empty mapping file")),
        };
        let (rows, cols) = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["MAPPING", r, c] => match (r.parse::<usize>(), c.parse::<usize>()) {
                (Ok(r), Ok(c)) => (r, c),
                _ => return Err(Error::format(source, 1, "malformed header")),
            },
            _ => return Err(Error::format(source, 1, "expected header \"MAPPING <rows> <cols>\"")),
        };
        let mut values = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row = parse_f64s(line.split_whitespace(), source, line_no)?;
            if row.len() != cols {
                return Err(Error::format(
                    source,
                    line_no,
                    format!("expected {cols} values, found {}", row.len()),
                ));
            }
            values.extend(row);
            seen += 1;
        }
        if seen != rows {
            return Err(Error::format(source, 1, format!("expected {rows} rows, found {seen}")));
        }
        MappingMatrix::from_vec(rows, cols, values).map_err(|e| Error::format(source, 1, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }
}

/// Entries drawn uniformly from `[-0.5/d_emb, 0.5/d_emb]`, the same scheme
/// as the input embeddings.
pub fn init_random(d_emb: usize, d_v: usize, rng: &mut Rng) -> MappingMatrix {
    let half = 0.5 / d_emb as f64;
    let values = (0..d_emb * d_v).map(|_| rng.random_range(-half..=half)).collect();
    MappingMatrix {
        rows: d_emb,
        cols: d_v,
        values,
    }
}

/// `M·v`.
pub fn project(m: &MappingMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.cols {
        return Err(Error::Argument(format!(
            "visual vector has length {}, mapping expects {}",
            v.len(),
            m.cols
        )));
    }
    Ok((0..m.rows).map(|r| dot(m.row(r), v)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuralInitOptions {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for NeuralInitOptions {
    fn default() -> Self {
        NeuralInitOptions {
            epochs: 100,
            lr: 0.01,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NeuralFit {
    pub matrix: MappingMatrix,
    pub initial_mse: f64,
    /// Training MSE after each epoch.
    pub mse_history: Vec<f64>,
    pub pairs_used: usize,
    /// Feature words without a pretrained target.
    pub skipped: usize,
    pub final_lr: f64,
}

impl NeuralFit {
    pub fn final_mse(&self) -> f64 {
        self.mse_history.last().copied().unwrap_or(self.initial_mse)
    }
}

/// Fit `M` as a bias-free linear regressor from visual vectors to pretrained
/// word embeddings, minimising `(1/N) Σ_w ‖M v_w − e_w‖²` by shuffled
/// mini-batch gradient descent.
///
/// An epoch that increases the training MSE is rolled back and the learning
/// rate halved, so the recorded MSE never increases.
pub fn init_neural(
    features: &[(String, Vec<f64>)],
    targets: &Embeddings,
    options: &NeuralInitOptions,
    rng: &mut Rng,
) -> Result<NeuralFit> {
    let mut pairs: Vec<(&[f64], &[f64])> = Vec::new();
    let mut skipped = 0;
    let d_v = features.first().map(|(_, v)| v.len()).unwrap_or(0);
    for (word, v) in features {
        if v.len() != d_v {
            return Err(Error::Argument(format!(
                "visual vector for {word:?} has length {}, expected {d_v}",
                v.len()
            )));
        }
        match targets.get(word) {
            Some(e) => pairs.push((v.as_slice(), e)),
            None => skipped += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::Config(
            "no word has both visual features and a pretrained embedding".into(),
        ));
    }
    if options.batch_size == 0 || !(options.lr > 0.0) {
        return Err(Error::Argument("batch size and learning rate must be positive".into()));
    }

    let d_emb = targets.dim();
    let mut m = init_random(d_emb, d_v, rng);
    let initial_mse = mse(&m, &pairs);
    let mut prev = initial_mse;
    let mut lr = options.lr;
    let mut history = Vec::with_capacity(options.epochs);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut grad = vec![0.0; d_emb * d_v];
    let mut residual = vec![0.0; d_emb];

    for _ in 0..options.epochs {
        let snapshot = m.values.clone();
        order.shuffle(rng);
        for batch in order.chunks(options.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 2.0 / batch.len() as f64;
            for &i in batch {
                let (v, e) = pairs[i];
                for (r, res) in residual.iter_mut().enumerate() {
                    *res = dot(m.row(r), v) - e[r];
                }
                for (r, res) in residual.iter().enumerate() {
                    let g_row = &mut grad[r * d_v..(r + 1) * d_v];
                    for (g, x) in g_row.iter_mut().zip(v) {
                        *g += scale * res * x;
                    }
                }
            }
            for (w, g) in m.values.iter_mut().zip(&grad) {
                *w -= lr * g;
            }
        }
        let current = mse(&m, &pairs);
        if !(current <= prev) {
            m.values = snapshot;
            lr *= 0.5;
            log::debug!("mapping pretraining: MSE rose to {current:e}, lr -> {lr:e}");
            history.push(prev);
        } else {
            prev = current;
            history.push(current);
        }
    }

    Ok(NeuralFit {
        matrix: m,
        initial_mse,
        mse_history: history,
        pairs_used: pairs.len(),
        skipped,
        final_lr: lr,
    })
}

fn mse(m: &MappingMatrix, pairs: &[(&[f64], &[f64])]) -> f64 {
    let total: f64 = pairs
        .iter()
        .map(|(v, e)| {
            (0..m.rows)
                .map(|r| {
                    let d = dot(m.row(r), v) - e[r];
                    d * d
                })
                .sum::<f64>()
        })
        .sum();
    total / pairs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn random_init_is_seeded_and_bounded() {
        let a = init_random(6, 4, &mut seeded(5));
        let b = init_random(6, 4, &mut seeded(5));
        assert_eq!(a, b);
        let half = 0.5 / 6.0;
        assert!(a.values().iter().all(|v| (-half..=half).contains(v)));
    }

    #[test]
    fn identity_and_zero_projection() {
        let v = [0.5, -1.0, 2.0];
        assert_eq!(project(&MappingMatrix::identity(3), &v).unwrap(), v);
        let m = init_random(4, 3, &mut seeded(1));
        assert_eq!(project(&m, &[0.0; 3]).unwrap(), [0.0; 4]);
    }

    #[test]
    fn projection_dimension_mismatch() {
        let m = MappingMatrix::zeros(2, 3);
        assert!(matches!(project(&m, &[1.0, 2.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn neural_init_requires_overlap() {
        let mut targets = Embeddings::new(2);
        targets.push("cat", &[1.0, 0.0]).unwrap();
        let features = vec![("dog".to_owned(), vec![1.0])];
        let err = init_neural(&features, &targets, &NeuralInitOptions::default(), &mut seeded(0)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn zero_targets_shrink_mapping() {
        let mut targets = Embeddings::new(3);
        let mut features = Vec::new();
        let mut rng = seeded(2);
        for i in 0..20 {
            let w = format!("w{i}");
            targets.push(&w, &[0.0; 3]).unwrap();
            features.push((w, (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()));
        }
        let opts = NeuralInitOptions { epochs: 50, lr: 0.1, batch_size: 4 };
        let fit = init_neural(&features, &targets, &opts, &mut seeded(3)).unwrap();
        assert!(fit.final_mse() < fit.initial_mse);
        assert!(fit.matrix.frobenius_norm() < 1e-3);
    }

    #[test]
    fn one_hot_input_only_moves_its_column() {
        let mut targets = Embeddings::new(3);
        targets.push("cat", &[0.3, -0.2, 0.9]).unwrap();
        let features = vec![("cat".to_owned(), vec![0.0, 1.0, 0.0, 0.0])];
        let opts = NeuralInitOptions { epochs: 200, lr: 0.1, batch_size: 1 };
        let init = init_random(3, 4, &mut seeded(8));
        let fit = init_neural(&features, &targets, &opts, &mut seeded(8)).unwrap();
        for c in [0, 2, 3] {
            assert_eq!(fit.matrix.column(c), init.column(c));
        }
        for (got, want) in fit.matrix.column(1).iter().zip([0.3, -0.2, 0.9]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn mapping_file_round_trip() {
        let m = init_random(3, 5, &mut seeded(12));
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert!(buf.starts_with(b"MAPPING 3 5\n"));
        assert_eq!(MappingMatrix::read_from(buf.as_slice(), "mem").unwrap(), m);
    }

    #[test]
    fn mapping_file_wrong_row_count() {
        assert!(MappingMatrix::read_from("MAPPING 2 1\n0.5\n".as_bytes(), "m").is_err());
    }
}
