//! Vocabulary construction and skip-gram pair streaming.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng as _;

use crate::rng::Rng;
use crate::{Error, Result};

/// Word ↔ id map with corpus counts.
///
/// Ids are dense and assigned in descending count order, ties broken
/// lexicographically, so the most frequent word has id 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Count `tokens` and keep the words seen at least `min_count` times.
    pub fn from_tokens<'a, I>(tokens: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for tok in tokens {
            *counts.entry(tok).or_insert(0) += 1;
        }
        let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::Config(format!("empty vocabulary: no word occurs at least {min_count} times")));
        }
        kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_sorted(kept.into_iter().map(|(w, c)| (w.to_owned(), c))))
    }

    fn from_sorted(entries: impl Iterator<Item = (String, u64)>) -> Self {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut index = HashMap::new();
        for (word, count) in entries {
            index.insert(word.clone(), words.len());
            words.push(word);
            counts.push(count);
        }
        let total_tokens = counts.iter().sum();
        Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of retained-token occurrences in the corpus.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Map tokens to ids, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "WORDS {} TOKENS {}", self.len(), self.total_tokens)?;
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{word}\t{count}")?;
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
            Some(line) => line.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::format(source, 1, "empty vocabulary file")),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n_words, n_tokens) = match fields.as_slice() {
            ["WORDS", w, "TOKENS", t] => match (w.parse::<usize>(), t.parse::<u64>()) {
                (Ok(w), Ok(t)) => (w, t),
                _ => return Err(Error::format(source, 1, "malformed header")),
            },
            _ => return Err(Error::format(source, 1, "expected header \"WORDS <W> TOKENS <T>\"")),
        };

        let mut entries = Vec::with_capacity(n_words);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(source, line_no, "expected \"word<TAB>count\""))?;
            let count = count
                .parse::<u64>()
                .map_err(|_| Error::format(source, line_no, format!("invalid count {count:?}")))?;
            entries.push((word.to_owned(), count));
        }
        if entries.len() != n_words {
            return Err(Error::format(
                source,
                1,
                format!("header declares {n_words} words, found {}", entries.len()),
            ));
        }
        let vocab = Self::from_sorted(entries.into_iter());
        if vocab.index.len() != vocab.words.len() {
            return Err(Error::format(source, 1, "duplicate word in vocabulary"));
        }
        if vocab.total_tokens != n_tokens {
            return Err(Error::format(
                source,
                1,
                format!("header declares {n_tokens} tokens, counts sum to {}", vocab.total_tokens),
            ));
        }
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), &path.display().to_string())
    }
}

/// Read a whitespace-tokenized corpus into memory.
pub fn read_tokens(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.split_whitespace().map(str::to_owned).collect())
}

/// Build the vocabulary of the corpus at `path`.
pub fn build_vocabulary(path: &Path, min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::Argument("min_count must be positive".into()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Vocabulary::from_tokens(text.split_whitespace(), min_count)
}

/// Probability of keeping one occurrence of a word under frequent-word
/// subsampling. A threshold of zero disables subsampling.
pub fn subsample_keep_probability(word_count: u64, total_tokens: u64, threshold: f64) -> f64 {
    if threshold <= 0.0 || word_count == 0 {
        return 1.0;
    }
    let ratio = threshold / (word_count as f64 / total_tokens as f64);
    (ratio.sqrt() + ratio).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    pub window_size: usize,
    pub subsample_threshold: f64,
}

impl WindowConfig {
    pub fn new(window_size: usize, subsample_threshold: f64) -> Result<Self> {
        if window_size == 0 {
            return Err(Error::Argument("window size must be at least 1".into()));
        }
        if !(subsample_threshold >= 0.0) {
            return Err(Error::Argument("subsample threshold must be non-negative".into()));
        }
        Ok(WindowConfig {
            window_size,
            subsample_threshold,
        })
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            window_size: 5,
            subsample_threshold: 0.0,
        }
    }
}

/// Drop tokens according to frequent-word subsampling. With a zero
/// threshold the input is returned unchanged and `rng` is not touched.
pub fn subsample(ids: &[usize], vocab: &Vocabulary, threshold: f64, rng: &mut Rng) -> Vec<usize> {
    if threshold <= 0.0 {
        return ids.to_vec();
    }
    let keep: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| subsample_keep_probability(c, vocab.total_tokens(), threshold))
        .collect();
    ids.iter()
        .copied()
        .filter(|&id| keep[id] >= 1.0 || rng.random::<f64>() < keep[id])
        .collect()
}

/// Stream the (target, context) pairs of `tokens`.
///
/// Out-of-vocabulary tokens are removed (and subsampling applied) before
/// windowing, so windows close over dropped words.
pub fn iterate_pairs<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocabulary,
    config: &WindowConfig,
    rng: &mut Rng,
) -> Pairs<Vec<usize>> {
    let ids = subsample(&vocab.encode(tokens), vocab, config.subsample_threshold, rng);
    Pairs::new(ids, config.window_size)
}

/// Iterator over all fixed-window (target, context) pairs of an id sequence.
#[derive(Debug, Clone)]
pub struct Pairs<T> {
    ids: T,
    window: usize,
    pos: usize,
    ctx: usize,
    ctx_end: usize,
}

impl<T: AsRef<[usize]>> Pairs<T> {
    pub fn new(ids: T, window: usize) -> Self {
        let mut pairs = Pairs {
            ids,
            window,
            pos: 0,
            ctx: 0,
            ctx_end: 0,
        };
        pairs.reset_window();
        pairs
    }

    fn reset_window(&mut self) {
        let len = self.ids.as_ref().len();
        self.ctx = self.pos.saturating_sub(self.window);
        self.ctx_end = (self.pos + self.window + 1).min(len);
    }
}

impl<T: AsRef<[usize]>> Iterator for Pairs<T> {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        while self.pos < self.ids.as_ref().len() {
            while self.ctx < self.ctx_end {
                let c = self.ctx;
                self.ctx += 1;
                if c != self.pos {
                    let ids = self.ids.as_ref();
                    return Some((ids[self.pos], ids[c]));
                }
            }
            self.pos += 1;
            self.reset_window();
        }
        None
    }
}

/// Number of pairs a sequence of `len` tokens produces with window `window`.
pub fn pair_count(len: usize, window: usize) -> u64 {
    (0..len)
        .map(|t| {
            let lo = t.saturating_sub(window);
            let hi = (t + window).min(len.saturating_sub(1));
            (hi - lo) as u64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn vocab_of(text: &str, min_count: u64) -> Vocabulary {
        Vocabulary::from_tokens(text.split_whitespace(), min_count).unwrap()
    }

    #[test]
    fn min_count_filters_words() {
        let v = vocab_of("a a a b b c", 2);
        assert_eq!(v.words(), ["a", "b"]);
        assert_eq!(v.counts(), [3, 2]);
        assert_eq!(v.total_tokens(), 5);
    }

    #[test]
    fn ids_follow_descending_count() {
        let v = vocab_of("a a a b b c", 1);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.id("c"), Some(2));
    }

    #[test]
    fn count_ties_break_lexicographically() {
        let v = vocab_of("zeta alpha mid zeta alpha", 1);
        assert_eq!(v.words(), ["alpha", "zeta", "mid"]);
    }

    #[test]
    fn empty_after_filtering_is_config_error() {
        let err = Vocabulary::from_tokens("a b".split_whitespace(), 5).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn missing_corpus_is_io_error() {
        let err = build_vocabulary(Path::new("/nonexistent/corpus.txt"), 1).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn vocabulary_file_round_trip() {
        let v = vocab_of("a a a b b c", 1);
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "WORDS 3 TOKENS 6\na\t3\nb\t2\nc\t1\n");
        let back = Vocabulary::read_from(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn vocabulary_file_rejects_bad_totals() {
        let err = Vocabulary::read_from("WORDS 1 TOKENS 9\na\t3\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn subsampling_disabled_keeps_everything() {
        assert_eq!(subsample_keep_probability(999, 1000, 0.0), 1.0);
    }

    #[test]
    fn subsampling_at_threshold_frequency_clips_to_one() {
        assert_eq!(subsample_keep_probability(1, 1000, 1e-3), 1.0);
    }

    #[test]
    fn subsampling_matches_high_precision_value() {
        // f = 0.1, t/f = 0.01: sqrt(0.01) + 0.01 = 0.11 (exact decimal arithmetic).
        let p = subsample_keep_probability(100, 1000, 1e-3);
        assert!((p - 0.11).abs() < 1e-15, "{p}");
    }

    #[test]
    fn window_of_one() {
        let v = vocab_of("a b c", 1);
        let pairs: Vec<_> = iterate_pairs(&["a", "b", "c"], &v, &WindowConfig::new(1, 0.0).unwrap(), &mut seeded(0))
            .map(|(t, c)| (v.word(t).to_owned(), v.word(c).to_owned()))
            .collect();
        let expect = [("a", "b"), ("b", "a"), ("b", "c"), ("c", "b")];
        assert_eq!(pairs.len(), expect.len());
        for (got, want) in pairs.iter().zip(expect) {
            assert_eq!((got.0.as_str(), got.1.as_str()), want);
        }
    }

    #[test]
    fn single_token_has_no_pairs() {
        let v = vocab_of("a", 1);
        for c in 1..5 {
            let cfg = WindowConfig::new(c, 0.0).unwrap();
            assert_eq!(iterate_pairs(&["a"], &v, &cfg, &mut seeded(0)).count(), 0);
        }
    }

    #[test]
    fn oov_tokens_are_removed_before_windowing() {
        let v = vocab_of("a a b b", 2);
        let cfg = WindowConfig::new(1, 0.0).unwrap();
        let pairs: Vec<_> = iterate_pairs(&["a", "zzz", "b"], &v, &cfg, &mut seeded(0)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn zero_window_is_rejected() {
        assert!(WindowConfig::new(0, 0.0).is_err());
    }

    #[test]
    fn pair_count_matches_iterator() {
        for len in 0..20 {
            for w in 1..6 {
                let ids: Vec<usize> = (0..len).collect();
                assert_eq!(Pairs::new(&ids[..], w).count() as u64, pair_count(len, w));
            }
        }
    }
}
