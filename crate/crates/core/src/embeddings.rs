//! Dense word vectors and the word2vec text format.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::util::{join_f64, parse_f64s};
use crate::{Error, Result};

/// Row-major word vectors with a word index.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl Embeddings {
    pub fn new(dim: usize) -> Self {
        Embeddings {
            words: Vec::new(),
            index: HashMap::new(),
            dim,
            data: Vec::new(),
        }
    }

    pub fn push(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Argument(format!(
                "vector for {word:?} has length {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(word) {
            return Err(Error::Argument(format!("duplicate word {word:?}")));
        }
        self.index.insert(word.to_owned(), self.words.len());
        self.words.push(word.to_owned());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vector(i))
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words.iter().enumerate().map(|(i, w)| (w.as_str(), self.vector(i)))
    }

    /// Append `extra` zero columns to every vector.
    pub fn pad_zeros(&self, extra: usize) -> Embeddings {
        let mut out = Embeddings::new(self.dim + extra);
        let mut buf = vec![0.0; self.dim + extra];
        for (w, v) in self.iter() {
            buf[..self.dim].copy_from_slice(v);
            out.push(w, &buf).unwrap();
        }
        out
    }

    /// Multiply every vector by `factor`.
    pub fn scaled(&self, factor: f64) -> Embeddings {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    /// Header `"<W> <D>"`, then one `word v_1 … v_D` line per word.
    pub fn write_word2vec<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (w, v) in self.iter() {
            writeln!(out, "{w} {}", join_f64(v))?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_word2vec(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn read_word2vec<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::format(source, 1, "empty embedding file")),
        };
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(source, 1, "expected header \"<words> <dims>\""))?;
        let [n_words, dim] = dims[..] else {
            return Err(Error::format(source, 1, "expected header \"<words> <dims>\""));
        };

        let mut emb = Embeddings::new(dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io(source, e))?;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = parse_f64s(fields, source, line_no)?;
            if values.len() != dim {
                return Err(Error::format(
                    source,
                    line_no,
                    format!("expected {dim} values for {word:?}, found {}", values.len()),
                ));
            }
            emb.push(word, &values)
                .map_err(|e| Error::format(source, line_no, e.to_string()))?;
        }
        if emb.len() != n_words {
            return Err(Error::format(
                source,
                1,
                format!("header declares {n_words} words, found {}", emb.len()),
            ));
        }
        Ok(emb)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_word2vec(BufReader::new(file), &path.display().to_string())
    }
}
