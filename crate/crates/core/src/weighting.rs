//! Supervised term weights from document class labels.
//!
//! For a term `w` the documents split into the whole collection `DC_*`, the
//! documents containing `w` (`DC_1`) and those lacking it (`DC_0`). Each
//! collection has a class histogram, and the weights compare those histograms:
//!
//! * PCF: `T(DC_1) - T(DC_*)`, a troenpy gain.
//! * NCF variants: `H(DC_1) - H(DC_0)`, `H(DC_1) - H(DC_*)`, `H(DC_*) - H(DC_0)`.
//! * IDF: `1 + log(n / (1 + df))`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, Corpus, Document, TermId, Vocabulary};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::itc::{entropy, troenpy, Distribution, LogConfig};

/// Per-term class histograms of document presence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCounts {
    num_classes: usize,
    ct_star: Vec<u64>,
    /// `vocab_size × num_classes`, row-major.
    ct_1: Vec<u64>,
}

impl ClassCounts {
    pub fn new(vocab_size: usize, num_classes: usize) -> Self {
        ClassCounts {
            num_classes,
            ct_star: vec![0; num_classes],
            ct_1: vec![0; vocab_size * num_classes],
        }
    }

    /// Counts over every document of a labeled corpus.
    pub fn from_corpus(corpus: &Corpus) -> Result<Self> {
        let k = corpus.num_classes().ok_or(Error::Unlabeled)?;
        Self::from_documents(corpus.documents(), corpus.vocabulary().len(), k)
    }

    /// Counts over a subset of documents, typically one training split.
    pub fn from_documents<'a, I>(docs: I, vocab_size: usize, num_classes: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut counts = Self::new(vocab_size, num_classes);
        for doc in docs {
            counts.add(doc)?;
        }
        Ok(counts)
    }

    /// Adds one document. Presence is binary: repeats inside a document count once.
    pub fn add(&mut self, doc: &Document) -> Result<()> {
        let class = doc.label.ok_or(Error::Unlabeled)?;
        if class >= self.num_classes {
            return Err(Error::Invariant(format!(
                "class id {class} outside 0..{}",
                self.num_classes
            )));
        }
        self.ct_star[class] += 1;
        let mut seen: Vec<TermId> = doc.tokens.clone();
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            self.ct_1[term * self.num_classes + class] += 1;
        }
        Ok(())
    }

    /// Adds counts gathered over a disjoint set of documents.
    pub fn merge(&mut self, other: &ClassCounts) -> Result<()> {
        if other.num_classes != self.num_classes || other.ct_1.len() != self.ct_1.len() {
            return Err(Error::Invariant(
                "merging counts of different shapes".into(),
            ));
        }
        for (a, b) in self.ct_star.iter_mut().zip(&other.ct_star) {
            *a += b;
        }
        for (a, b) in self.ct_1.iter_mut().zip(&other.ct_1) {
            *a += b;
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn vocab_size(&self) -> usize {
        self.ct_1.len().checked_div(self.num_classes).unwrap_or(0)
    }

    /// Total number of documents n.
    pub fn n(&self) -> u64 {
        self.ct_star.iter().sum()
    }

    pub fn ct_star(&self) -> &[u64] {
        &self.ct_star
    }

    /// Class histogram of documents containing `term`.
    pub fn ct_1(&self, term: TermId) -> &[u64] {
        &self.ct_1[term * self.num_classes..(term + 1) * self.num_classes]
    }

    /// Class histogram of documents lacking `term`.
    pub fn ct_0(&self, term: TermId) -> Vec<u64> {
        self.ct_star
            .iter()
            .zip(self.ct_1(term))
            .map(|(s, one)| s - one)
            .collect()
    }

    /// Document frequency of `term`.
    pub fn df(&self, term: TermId) -> u64 {
        self.ct_1(term).iter().sum()
    }

    /// Classes with no document in these counts.
    pub fn missing_classes(&self) -> Vec<ClassId> {
        (0..self.num_classes)
            .filter(|&c| self.ct_star[c] == 0)
            .collect()
    }
}

/// Count smoothing applied before class histograms are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// Raw counts; point masses rely on the log clamp.
    #[default]
    None,
    /// Adds α to every class count.
    Laplace(f64),
}

impl FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(Smoothing::None);
        }
        let alpha = match s.strip_prefix("laplace") {
            Some("") => 1.0,
            Some(rest) => rest
                .strip_prefix(':')
                .and_then(|a| a.parse::<f64>().ok())
                .ok_or_else(|| Error::Domain(format!("bad smoothing '{s}'")))?,
            None => {
                return Err(Error::Domain(format!(
                    "bad smoothing '{s}' (expected none or laplace:α)"
                )))
            }
        };
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "laplace α must be positive, got {alpha}"
            )));
        }
        Ok(Smoothing::Laplace(alpha))
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::None => f.write_str("none"),
            Smoothing::Laplace(a) => write!(f, "laplace:{a}"),
        }
    }
}

impl Smoothing {
    /// Normalized histogram; `None` when it holds no mass.
    fn distribution(&self, counts: &[u64]) -> Option<Distribution> {
        let alpha = match self {
            Smoothing::None => 0.0,
            Smoothing::Laplace(a) => *a,
        };
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64 + alpha).collect();
        Distribution::normalize(&weights).ok()
    }
}

/// `1 + log(n / (1 + d))`.
pub fn idf(n: u64, d: u64, cfg: &LogConfig) -> Result<f64> {
    if n == 0 || d > n {
        return Err(Error::Domain(format!(
            "idf needs n >= 1 and d <= n, got n={n}, d={d}"
        )));
    }
    Ok(1.0 + cfg.log(n as f64 / (1.0 + d as f64)))
}

fn class_distribution(counts: &[u64], smoothing: Smoothing, what: &str) -> Result<Distribution> {
    smoothing
        .distribution(counts)
        .ok_or_else(|| Error::Invariant(format!("{what} histogram is empty")))
}

fn histogram_entropy(counts: &[u64], smoothing: Smoothing, cfg: &LogConfig) -> f64 {
    // An empty DC_0 (term present everywhere) has entropy 0, smoothed or not.
    if counts.iter().all(|&c| c == 0) {
        return 0.0;
    }
    smoothing
        .distribution(counts)
        .map_or(0.0, |d| entropy(&d, cfg))
}

/// Positive class frequency `T(DC_1) - T(DC_*)`.
pub fn pcf(
    counts: &ClassCounts,
    term: TermId,
    smoothing: Smoothing,
    cfg: &LogConfig,
) -> Result<f64> {
    let present = class_distribution(counts.ct_1(term), smoothing, "DC_1")?;
    let all = class_distribution(counts.ct_star(), smoothing, "DC_*")?;
    Ok(troenpy(&present, cfg) - troenpy(&all, cfg))
}

/// The three entropy-difference weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NcfVariant {
    /// `H(DC_1) - H(DC_0)`
    OneZero,
    /// `H(DC_1) - H(DC_*)`
    OneStar,
    /// `H(DC_*) - H(DC_0)`
    StarZero,
}

/// Negative class frequency in the chosen variant.
pub fn ncf(
    counts: &ClassCounts,
    term: TermId,
    variant: NcfVariant,
    smoothing: Smoothing,
    cfg: &LogConfig,
) -> Result<f64> {
    let h1 = || -> Result<f64> {
        Ok(entropy(
            &class_distribution(counts.ct_1(term), smoothing, "DC_1")?,
            cfg,
        ))
    };
    let h_star = || -> Result<f64> {
        Ok(entropy(
            &class_distribution(counts.ct_star(), smoothing, "DC_*")?,
            cfg,
        ))
    };
    let h0 = || histogram_entropy(&counts.ct_0(term), smoothing, cfg);
    Ok(match variant {
        NcfVariant::OneZero => h1()? - h0(),
        NcfVariant::OneStar => h1()? - h_star()?,
        NcfVariant::StarZero => h_star()? - h0(),
    })
}

/// All weights of one term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermWeight {
    pub df: u64,
    pub idf: f64,
    pub pcf: f64,
    pub ncf_10: f64,
    pub ncf_1star: f64,
    pub ncf_star0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightOptions {
    pub smoothing: Smoothing,
    pub log: LogConfig,
}

/// Weights indexed by term id. Terms absent from the counted documents have
/// no entry and are skipped when vectorizing.
#[derive(Debug, Clone, PartialEq)]
pub struct TermWeights {
    weights: Vec<Option<TermWeight>>,
    clamped_terms: usize,
}

impl TermWeights {
    pub fn compute(counts: &ClassCounts, opts: &WeightOptions) -> Result<Self> {
        let cfg = &opts.log;
        let n = counts.n();
        let star = class_distribution(counts.ct_star(), opts.smoothing, "DC_*")?;
        let t_star = troenpy(&star, cfg);
        let h_star = entropy(&star, cfg);
        let mut clamped_terms = 0;

        let weights = (0..counts.vocab_size())
            .map(|term| -> Result<Option<TermWeight>> {
                let df = counts.df(term);
                if df == 0 {
                    return Ok(None);
                }
                let present = class_distribution(counts.ct_1(term), opts.smoothing, "DC_1")?;
                if present.troenpy_clamped(cfg) || star.troenpy_clamped(cfg) {
                    clamped_terms += 1;
                }
                let h1 = entropy(&present, cfg);
                let h0 = histogram_entropy(&counts.ct_0(term), opts.smoothing, cfg);
                Ok(Some(TermWeight {
                    df,
                    idf: idf(n, df, cfg)?,
                    pcf: troenpy(&present, cfg) - t_star,
                    ncf_10: h1 - h0,
                    ncf_1star: h1 - h_star,
                    ncf_star0: h_star - h0,
                }))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(TermWeights {
            weights,
            clamped_terms,
        })
    }

    pub fn get(&self, term: TermId) -> Option<&TermWeight> {
        self.weights.get(term).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Terms whose PCF hit the log clamp.
    pub fn clamped_terms(&self) -> usize {
        self.clamped_terms
    }

    /// Writes the weight table as TSV, one row per weighted term in id order.
    pub fn write_tsv<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> io::Result<()> {
        writeln!(out, "term\tdf\tidf\tpcf\tncf10\tncf1star\tncfstar0")?;
        for (id, w) in self.weights.iter().enumerate() {
            let Some(w) = w else { continue };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                vocab.term(id),
                w.df,
                sig9(w.idf),
                sig9(w.pcf),
                sig9(w.ncf_10),
                sig9(w.ncf_1star),
                sig9(w.ncf_star0),
            )?;
        }
        Ok(())
    }
}

/// Document weighting: `tf × idf × factor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "tf-idf")]
    TfIdf,
    #[serde(rename = "tf-pi")]
    TfPi,
    #[serde(rename = "tf-ncf10")]
    TfNcf10,
    #[serde(rename = "tf-ncf1*")]
    TfNcf1Star,
    #[serde(rename = "tf-ncf*0")]
    TfNcfStar0,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::TfIdf,
        Scheme::TfPi,
        Scheme::TfNcf10,
        Scheme::TfNcf1Star,
        Scheme::TfNcfStar0,
    ];

    /// The multiplier applied on top of `tf × idf`.
    pub fn factor(&self, w: &TermWeight) -> f64 {
        match self {
            Scheme::TfIdf => 1.0,
            Scheme::TfPi => w.pcf,
            Scheme::TfNcf10 => w.ncf_10,
            Scheme::TfNcf1Star => w.ncf_1star,
            Scheme::TfNcfStar0 => w.ncf_star0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::TfIdf => "tf-idf",
            Scheme::TfPi => "tf-pi",
            Scheme::TfNcf10 => "tf-ncf10",
            Scheme::TfNcf1Star => "tf-ncf1*",
            Scheme::TfNcfStar0 => "tf-ncf*0",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tf-idf" => Ok(Scheme::TfIdf),
            "tf-pi" => Ok(Scheme::TfPi),
            "tf-ncf10" => Ok(Scheme::TfNcf10),
            "tf-ncf1*" | "tf-ncf1star" => Ok(Scheme::TfNcf1Star),
            "tf-ncf*0" | "tf-ncfstar0" => Ok(Scheme::TfNcfStar0),
            other => Err(Error::Domain(format!("unknown scheme '{other}'"))),
        }
    }
}

/// What to do with negative scheme factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Negatives {
    #[default]
    Raw,
    Clamp0,
}

impl FromStr for Negatives {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Negatives::Raw),
            "clamp0" => Ok(Negatives::Clamp0),
            other => Err(Error::Domain(format!(
                "unknown negatives policy '{other}' (expected raw or clamp0)"
            ))),
        }
    }
}

impl fmt::Display for Negatives {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Negatives::Raw => "raw",
            Negatives::Clamp0 => "clamp0",
        })
    }
}

/// Sparse vector with strictly increasing term ids and no zero entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(TermId, f64)>,
}

impl SparseVector {
    /// Builds from arbitrary `(term, value)` pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (TermId, f64)>) -> Self {
        let mut acc: BTreeMap<TermId, f64> = BTreeMap::new();
        for (t, v) in pairs {
            *acc.entry(t).or_insert(0.0) += v;
        }
        SparseVector {
            entries: acc.into_iter().filter(|(_, v)| *v != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn get(&self, term: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&term, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn scale(&mut self, by: f64) {
        for (_, v) in &mut self.entries {
            *v *= by;
        }
        self.entries.retain(|(_, v)| *v != 0.0);
    }

    /// Scales to unit L2 norm; the zero vector stays zero.
    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            for (_, v) in &mut self.entries {
                *v /= norm;
            }
        }
    }
}

/// Weighted, L2-normalized document vector. Terms without weights are skipped.
pub fn vectorize(
    doc: &Document,
    weights: &TermWeights,
    scheme: Scheme,
    negatives: Negatives,
) -> SparseVector {
    let mut tf: BTreeMap<TermId, u64> = BTreeMap::new();
    for &t in &doc.tokens {
        *tf.entry(t).or_insert(0) += 1;
    }
    let mut v = SparseVector::from_pairs(tf.into_iter().filter_map(|(t, count)| {
        let w = weights.get(t)?;
        let mut factor = scheme.factor(w);
        if negatives == Negatives::Clamp0 && factor < 0.0 {
            factor = 0.0;
        }
        Some((t, count as f64 * w.idf * factor))
    }));
    v.normalize();
    v
}
