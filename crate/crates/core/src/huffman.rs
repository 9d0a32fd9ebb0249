//! Huffman coding tree for the hierarchical softmax.
//!
//! Leaves are vocabulary ids `0..W`; inner nodes are numbered `0..W-1` in
//! merge order, so the root is always node `W-2`. A word's probability is the
//! product of one sigmoid branch decision per inner node on its path.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::corpus::Vocabulary;
use crate::{Error, Result};

/// Branch direction at an inner node. Code bit 0 maps to `Positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    paths: Vec<Vec<u32>>,
    codes: Vec<Vec<u8>>,
    node_count: usize,
}

impl HuffmanTree {
    pub fn from_vocabulary(vocab: &Vocabulary) -> Result<Self> {
        build_huffman(vocab.counts())
    }

    pub fn leaf_count(&self) -> usize {
        self.paths.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Inner-node ids from the root down to `word_id`'s parent.
    pub fn path(&self, word_id: usize) -> &[u32] {
        &self.paths[word_id]
    }

    /// Branch bits aligned with [`HuffmanTree::path`].
    pub fn code(&self, word_id: usize) -> &[u8] {
        &self.codes[word_id]
    }

    /// Root-to-leaf (inner node, sign) sequence of `word_id`.
    pub fn path_of(&self, word_id: usize) -> Result<Vec<(usize, Sign)>> {
        if word_id >= self.leaf_count() {
            return Err(Error::Argument(format!(
                "word id {word_id} out of range for {} leaves",
                self.leaf_count()
            )));
        }
        Ok(self.paths[word_id]
            .iter()
            .zip(&self.codes[word_id])
            .map(|(&n, &b)| (n as usize, Sign::from_bit(b)))
            .collect())
    }

    /// Σ count·code length for the given leaf weights.
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        counts
            .iter()
            .zip(&self.codes)
            .map(|(&c, code)| c * code.len() as u64)
            .sum()
    }
}

/// Build an optimal prefix code over `counts`.
///
/// Merges always take the two lightest nodes; equal weights are resolved in
/// favour of the smaller node id (leaves first, then inner nodes in creation
/// order). The first node taken receives bit 0.
pub fn build_huffman(counts: &[u64]) -> Result<HuffmanTree> {
    let leaves = counts.len();
    if leaves < 2 {
        return Err(Error::Config(format!(
            "hierarchical softmax needs at least 2 words, got {leaves}"
        )));
    }

    let total_nodes = 2 * leaves - 1;
    let mut parent = vec![usize::MAX; total_nodes];
    let mut bit = vec![0u8; total_nodes];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        counts.iter().enumerate().map(|(id, &c)| Reverse((c, id))).collect();

    for next in leaves..total_nodes {
        let Reverse((w0, n0)) = heap.pop().expect("heap holds at least two nodes");
        let Reverse((w1, n1)) = heap.pop().expect("heap holds at least two nodes");
        parent[n0] = next;
        parent[n1] = next;
        bit[n1] = 1;
        heap.push(Reverse((w0 + w1, next)));
    }

    let root = total_nodes - 1;
    let mut paths = Vec::with_capacity(leaves);
    let mut codes = Vec::with_capacity(leaves);
    for leaf in 0..leaves {
        let mut path = Vec::new();
        let mut code = Vec::new();
        let mut node = leaf;
        while node != root {
            code.push(bit[node]);
            node = parent[node];
            path.push((node - leaves) as u32);
        }
        path.reverse();
        code.reverse();
        paths.push(path);
        codes.push(code);
    }

    Ok(HuffmanTree {
        paths,
        codes,
        node_count: leaves - 1,
    })
}
