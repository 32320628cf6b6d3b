//! Self-troenpy: the troenpy of the distribution of words found within a
//! window around each occurrence of a term.
//!
//! Counting runs sentence by sentence; windows never cross a sentence
//! boundary and the centre position is excluded. Every occurrence of a term
//! contributes its own window, so repeated tokens are counted with
//! multiplicity, and a term seen near another copy of itself counts itself as
//! a neighbor.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::itc::{entropy, troenpy, Distribution, LogConfig};

/// Default window radius.
pub const DEFAULT_RADIUS: usize = 10;
/// Default embedding width.
pub const DEFAULT_DIM: usize = 64;
/// Half-width of the uniform interval embedding rows are drawn from.
pub const INIT_RANGE: f64 = 0.1;

/// Windowed co-occurrence counts `CT_w` and unigram counts `CT_*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborCounts {
    radius: usize,
    /// Per term, `(neighbor, count)` sorted by neighbor id.
    neighbors: Vec<Vec<(TermId, u64)>>,
    totals: Vec<u64>,
}

impl NeighborCounts {
    /// Counts every sentence of `corpus`, in parallel over blocks of sentences.
    pub fn count(corpus: &Corpus, radius: usize) -> Result<Self> {
        check_radius(radius)?;
        let vocab_size = corpus.vocabulary().len();
        let docs = corpus.documents();
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let block = docs
            .len()
            .div_ceil(rayon::current_num_threads() * 4)
            .max(64);
        docs.par_chunks(block)
            .map(|chunk| {
                Self::count_block(
                    chunk.iter().map(|d| d.tokens.as_slice()),
                    vocab_size,
                    radius,
                )
            })
            .reduce_with(|mut a, b| {
                a.merge_unchecked(&b);
                a
            })
            .ok_or(Error::EmptyCorpus)
    }

    /// Single-threaded counting over token-id sentences.
    pub fn count_sentences<'a, I>(sentences: I, vocab_size: usize, radius: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [TermId]>,
    {
        check_radius(radius)?;
        let mut sentences = sentences.into_iter().peekable();
        if sentences.peek().is_none() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::count_block(sentences, vocab_size, radius))
    }

    fn count_block<'a, I>(sentences: I, vocab_size: usize, radius: usize) -> Self
    where
        I: IntoIterator<Item = &'a [TermId]>,
    {
        let mut maps: Vec<HashMap<TermId, u64>> = vec![HashMap::new(); vocab_size];
        let mut totals = vec![0u64; vocab_size];
        for sentence in sentences.into_iter().filter(|s| !s.is_empty()) {
            for (i, &w) in sentence.iter().enumerate() {
                totals[w] += 1;
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(sentence.len() - 1);
                let map = &mut maps[w];
                for (j, &v) in sentence[lo..=hi].iter().enumerate() {
                    if lo + j != i {
                        *map.entry(v).or_insert(0) += 1;
                    }
                }
            }
        }
        let neighbors = maps
            .into_iter()
            .map(|m| {
                let mut v: Vec<_> = m.into_iter().collect();
                v.sort_unstable_by_key(|e| e.0);
                v
            })
            .collect();
        NeighborCounts {
            radius,
            neighbors,
            totals,
        }
    }

    /// Adds counts from a disjoint set of sentences.
    pub fn merge(&mut self, other: &NeighborCounts) -> Result<()> {
        if self.radius != other.radius || self.totals.len() != other.totals.len() {
            return Err(Error::Invariant(
                "merging neighbor counts of different shapes".into(),
            ));
        }
        self.merge_unchecked(other);
        Ok(())
    }

    fn merge_unchecked(&mut self, other: &NeighborCounts) {
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        for (mine, theirs) in self.neighbors.iter_mut().zip(&other.neighbors) {
            if theirs.is_empty() {
                continue;
            }
            let mut merged = Vec::with_capacity(mine.len() + theirs.len());
            let (mut i, mut j) = (0, 0);
            while i < mine.len() || j < theirs.len() {
                match (mine.get(i), theirs.get(j)) {
                    (Some(&(a, x)), Some(&(b, y))) if a == b => {
                        merged.push((a, x + y));
                        i += 1;
                        j += 1;
                    }
                    (Some(&(a, x)), Some(&(b, _))) if a < b => {
                        merged.push((a, x));
                        i += 1;
                    }
                    (Some(&e), None) => {
                        merged.push(e);
                        i += 1;
                    }
                    (_, Some(&e)) => {
                        merged.push(e);
                        j += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            *mine = merged;
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vocab_size(&self) -> usize {
        self.totals.len()
    }

    /// `CT_w` as sorted `(neighbor, count)` pairs.
    pub fn neighbors(&self, term: TermId) -> &[(TermId, u64)] {
        &self.neighbors[term]
    }

    /// `CT_w[v]`.
    pub fn get(&self, term: TermId, neighbor: TermId) -> u64 {
        let row = &self.neighbors[term];
        row.binary_search_by_key(&neighbor, |e| e.0)
            .map_or(0, |i| row[i].1)
    }

    /// `CT_*`: occurrences of each term.
    pub fn totals(&self) -> &[u64] {
        &self.totals
    }
}

fn check_radius(radius: usize) -> Result<()> {
    if radius == 0 {
        return Err(Error::Domain("window radius must be at least 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTroenpyEntry {
    pub term: String,
    pub count: u64,
    pub weight: f64,
}

/// Self-troenpy per term, in vocabulary order, plus corpus-level statistics of
/// the unigram distribution `CT_*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTroenpyTable {
    pub entries: Vec<SelfTroenpyEntry>,
    pub corpus_troenpy: f64,
    pub corpus_entropy: f64,
}

impl SelfTroenpyTable {
    /// `weight(w) = T(normalize(CT_w))`, with no corpus-level offset subtracted.
    pub fn compute(counts: &NeighborCounts, vocab: &Vocabulary, cfg: &LogConfig) -> Result<Self> {
        if vocab.len() != counts.vocab_size() {
            return Err(Error::Invariant(format!(
                "vocabulary has {} terms but counts cover {}",
                vocab.len(),
                counts.vocab_size()
            )));
        }
        let entries = vocab
            .iter()
            .map(|(id, term)| {
                let row: Vec<u64> = counts.neighbors(id).iter().map(|e| e.1).collect();
                let weight = match Distribution::from_counts(&row) {
                    Ok(d) => troenpy(&d, cfg),
                    Err(_) => {
                        log::warn!("term '{term}' has no neighbors; self-troenpy set to 0");
                        0.0
                    }
                };
                SelfTroenpyEntry {
                    term: term.to_string(),
                    count: counts.totals()[id],
                    weight,
                }
            })
            .collect();
        Self::with_corpus_stats(entries, cfg)
    }

    /// Rebuilds a table from stored rows; corpus statistics are recomputed
    /// from the occurrence counts.
    pub fn from_entries(entries: Vec<SelfTroenpyEntry>, cfg: &LogConfig) -> Result<Self> {
        if let Some(e) = entries
            .iter()
            .find(|e| !e.weight.is_finite() || e.weight < 0.0)
        {
            return Err(Error::Domain(format!(
                "weight of '{}' is {}, expected a finite value >= 0",
                e.term, e.weight
            )));
        }
        Self::with_corpus_stats(entries, cfg)
    }

    fn with_corpus_stats(entries: Vec<SelfTroenpyEntry>, cfg: &LogConfig) -> Result<Self> {
        let totals: Vec<u64> = entries.iter().map(|e| e.count).collect();
        let unigram = Distribution::from_counts(&totals).map_err(|_| Error::EmptyCorpus)?;
        Ok(SelfTroenpyTable {
            entries,
            corpus_troenpy: troenpy(&unigram, cfg),
            corpus_entropy: entropy(&unigram, cfg),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// TSV with header `term  count  self_troenpy`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "term\tcount\tself_troenpy")?;
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}", e.term, e.count, sig9(e.weight))?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R, cfg: &LogConfig) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: "<self-troenpy table>".into(),
            line,
            message,
        };
        let mut entries = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<self-troenpy table>", e))?;
            if i == 0 && line.starts_with("term\t") {
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [term, count, weight] = fields[..] else {
                return Err(parse_err(
                    i + 1,
                    format!("expected 3 fields, got {}", fields.len()),
                ));
            };
            entries.push(SelfTroenpyEntry {
                term: term.to_string(),
                count: count
                    .parse()
                    .map_err(|e| parse_err(i + 1, format!("bad count '{count}': {e}")))?,
                weight: weight
                    .parse()
                    .map_err(|e| parse_err(i + 1, format!("bad weight '{weight}': {e}")))?,
            });
        }
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Self::from_entries(entries, cfg)
    }
}

/// Terms by descending self-troenpy; ties go to the more frequent term, then
/// to the lexicographically smaller one.
pub fn rank_terms(
    table: &SelfTroenpyTable,
    top_n: usize,
    min_count: u64,
) -> Vec<&SelfTroenpyEntry> {
    let mut ranked: Vec<&SelfTroenpyEntry> = table
        .entries
        .iter()
        .filter(|e| e.count >= min_count)
        .collect();
    ranked.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(b.count.cmp(&a.count))
            .then_with(|| a.term.cmp(&b.term))
    });
    ranked.truncate(top_n);
    ranked
}

/// Embedding rows in vocabulary order, each with L2 norm equal to its term's
/// self-troenpy.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingInit {
    pub terms: Vec<String>,
    pub dim: usize,
    /// Row-major `terms.len() × dim`.
    pub data: Vec<f64>,
}

impl EmbeddingInit {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Word-vector text format: a `rows dim` header, then `term v1 … v_dim`.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.terms.len(), self.dim)?;
        for (i, term) in self.terms.iter().enumerate() {
            write!(out, "{term}")?;
            for v in self.row(i) {
                write!(out, " {}", sig9(*v))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Draws each row uniformly from `[-0.1, 0.1]^dim`, scales it to unit length
/// and multiplies by the term's weight. Zero-weight terms get zero rows.
pub fn embedding_init(table: &SelfTroenpyTable, dim: usize, seed: u64) -> Result<EmbeddingInit> {
    if dim == 0 {
        return Err(Error::Domain(
            "embedding dimension must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(table.len() * dim);
    let mut row = vec![0.0; dim];
    for entry in &table.entries {
        for x in row.iter_mut() {
            *x = rng.random_range(-INIT_RANGE..=INIT_RANGE);
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { entry.weight / norm } else { 0.0 };
        data.extend(row.iter().map(|x| x * scale));
    }
    Ok(EmbeddingInit {
        terms: table.entries.iter().map(|e| e.term.clone()).collect(),
        dim,
        data,
    })
}
