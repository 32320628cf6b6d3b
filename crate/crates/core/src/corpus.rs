//! Tokenization, vocabularies and corpus loading.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type TermId = usize;
pub type ClassId = usize;

/// Tokenizer switches. The default lowercases and splits on every maximal run
/// of non-alphanumeric characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub keep_case: bool,
    /// Emit each punctuation character as its own token.
    pub punctuation_tokens: bool,
    pub min_token_len: usize,
    /// Split on whitespace only and keep everything else verbatim. For
    /// corpora that arrive already tokenized.
    pub whitespace_only: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            keep_case: false,
            punctuation_tokens: false,
            min_token_len: 1,
            whitespace_only: false,
        }
    }
}

impl TokenizerConfig {
    pub fn whitespace() -> Self {
        TokenizerConfig {
            whitespace_only: true,
            keep_case: true,
            ..Default::default()
        }
    }
}

pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    let push = |piece: &str, out: &mut Vec<String>| {
        if piece.chars().count() < cfg.min_token_len.max(1) {
            return;
        }
        if cfg.keep_case {
            out.push(piece.to_string());
        } else {
            out.push(piece.to_lowercase());
        }
    };

    if cfg.whitespace_only {
        for piece in text.split_whitespace() {
            push(piece, &mut out);
        }
        return out;
    }

    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            push(&text[s..i], &mut out);
        }
        if cfg.punctuation_tokens && !ch.is_whitespace() {
            push(&text[i..i + ch.len_utf8()], &mut out);
        }
    }
    if let Some(s) = start {
        push(&text[s..], &mut out);
    }
    out
}

/// Dense, insertion-ordered string interner.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Interner {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> usize {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.items.len();
        self.items.push(s.to_string());
        self.index.insert(s.to_string(), id);
        id
    }
}

/// Term strings and their ids, in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary(Interner);

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, term: &str) -> TermId {
        self.0.intern(term)
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.0.index.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.0.items[id]
    }

    pub fn len(&self) -> usize {
        self.0.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &str)> {
        self.0.items.iter().map(String::as_str).enumerate()
    }
}

/// Class names and their ids, in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet(Interner);

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, label: &str) -> ClassId {
        self.0.intern(label)
    }

    pub fn id(&self, label: &str) -> Option<ClassId> {
        self.0.index.get(label).copied()
    }

    pub fn label(&self, id: ClassId) -> &str {
        &self.0.items[id]
    }

    pub fn len(&self) -> usize {
        self.0.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &str)> {
        self.0.items.iter().map(String::as_str).enumerate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub tokens: Vec<TermId>,
    pub label: Option<ClassId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// `label<TAB>text`, one document per line.
    Tsv,
    /// One subdirectory per class, one document per file.
    DirPerClass,
    /// Unlabeled, one sentence per line.
    PlainLines,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "dir" | "dir-per-class" => Ok(CorpusFormat::DirPerClass),
            "lines" | "plain-lines" => Ok(CorpusFormat::PlainLines),
            other => Err(Error::Domain(format!(
                "unknown corpus format '{other}' (expected tsv, dir-per-class or plain-lines)"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Tsv => "tsv",
            CorpusFormat::DirPerClass => "dir-per-class",
            CorpusFormat::PlainLines => "plain-lines",
        })
    }
}

/// Counts echoed after loading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadReport {
    pub source: PathBuf,
    pub format: CorpusFormat,
    pub documents: usize,
    pub dropped_empty: usize,
    pub tokens: usize,
    pub vocabulary_size: usize,
    pub classes: Option<usize>,
}

/// Tokenized documents plus the vocabulary (and labels, if any) they index.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    labels: Option<LabelSet>,
    dropped_empty: usize,
}

impl Corpus {
    /// Builds a labeled corpus from `(label, text)` pairs.
    pub fn from_labeled<'a, I>(items: I, cfg: &TokenizerConfig) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut corpus = Corpus {
            labels: Some(LabelSet::new()),
            ..Default::default()
        };
        for (label, text) in items {
            corpus.push_text(Some(label), text, cfg);
        }
        corpus.finish()
    }

    /// Builds an unlabeled corpus, one sentence per item.
    pub fn from_sentences<'a, I>(items: I, cfg: &TokenizerConfig) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut corpus = Corpus::default();
        for text in items {
            corpus.push_text(None, text, cfg);
        }
        corpus.finish()
    }

    pub fn load(path: &Path, format: CorpusFormat, cfg: &TokenizerConfig) -> Result<Self> {
        match format {
            CorpusFormat::Tsv => load_tsv(path, cfg),
            CorpusFormat::DirPerClass => load_dir(path, cfg),
            CorpusFormat::PlainLines => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Self::from_sentences(text.lines(), cfg)
            }
        }
    }

    fn push_text(&mut self, label: Option<&str>, text: &str, cfg: &TokenizerConfig) {
        let tokens: Vec<TermId> = tokenize(text, cfg)
            .iter()
            .map(|t| self.vocabulary.intern(t))
            .collect();
        if tokens.is_empty() {
            self.dropped_empty += 1;
            return;
        }
        let label = match (label, self.labels.as_mut()) {
            (Some(l), Some(set)) => Some(set.intern(l)),
            _ => None,
        };
        self.documents.push(Document { tokens, label });
    }

    fn finish(self) -> Result<Self> {
        if self.dropped_empty > 0 {
            log::warn!("dropped {} empty document(s)", self.dropped_empty);
        }
        if self.documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(self)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn labels(&self) -> Option<&LabelSet> {
        self.labels.as_ref()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn dropped_empty(&self) -> usize {
        self.dropped_empty
    }

    /// Number of classes, or `None` for an unlabeled corpus.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(LabelSet::len)
    }

    /// Class id of every document; fails on an unlabeled corpus.
    pub fn class_ids(&self) -> Result<Vec<ClassId>> {
        self.documents
            .iter()
            .map(|d| d.label.ok_or(Error::Unlabeled))
            .collect()
    }

    pub fn report(&self, source: &Path, format: CorpusFormat) -> LoadReport {
        LoadReport {
            source: source.to_path_buf(),
            format,
            documents: self.documents.len(),
            dropped_empty: self.dropped_empty,
            tokens: self.documents.iter().map(|d| d.tokens.len()).sum(),
            vocabulary_size: self.vocabulary.len(),
            classes: self.num_classes(),
        }
    }

    /// Train/test indices for one repeat of `spec`.
    pub fn split(&self, spec: &SplitSpec, repeat_index: usize) -> Result<Split> {
        if spec.stratified {
            split_stratified(&self.class_ids()?, spec, repeat_index)
        } else {
            split_indices(self.len(), spec, repeat_index)
        }
    }
}

fn load_tsv(path: &Path, cfg: &TokenizerConfig) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut corpus = Corpus {
        labels: Some(LabelSet::new()),
        ..Default::default()
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((label, body)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "missing tab between label and text".into(),
            });
        };
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "empty label".into(),
            });
        }
        corpus.push_text(Some(label), body, cfg);
    }
    corpus.finish()
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn load_dir(root: &Path, cfg: &TokenizerConfig) -> Result<Corpus> {
    let mut corpus = Corpus {
        labels: Some(LabelSet::new()),
        ..Default::default()
    };
    for class_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let label = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for file in sorted_entries(&class_dir)?
            .into_iter()
            .filter(|p| p.is_file())
        {
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            corpus.push_text(Some(&label), &text, cfg);
        }
    }
    corpus.finish()
}

/// Repeated random train/test splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            repeats: 50,
            seed: 42,
            stratified: false,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats == 0 {
            return Err(Error::Domain("repeats must be positive".into()));
        }
        Ok(())
    }

    /// Generator for one repeat: ChaCha keyed by the seed, with the repeat
    /// index selecting the stream.
    pub fn rng(&self, repeat_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(repeat_index as u64);
        rng
    }

    fn train_size(&self, n: usize) -> usize {
        let raw = (self.train_fraction * n as f64 - 1e-9).ceil() as usize;
        raw.clamp(1, n - 1)
    }

    fn check(&self, n: usize, repeat_index: usize) -> Result<()> {
        self.validate()?;
        if n < 2 {
            return Err(Error::Domain(format!(
                "cannot split {n} document(s); need at least 2"
            )));
        }
        if repeat_index >= self.repeats {
            return Err(Error::Domain(format!(
                "repeat index {repeat_index} out of range 0..{}",
                self.repeats
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniform random split of `0..n`: the first `⌈fraction · n⌉` entries of a
/// shuffled permutation go to training (kept within `1..n`).
pub fn split_indices(n: usize, spec: &SplitSpec, repeat_index: usize) -> Result<Split> {
    spec.check(n, repeat_index)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut spec.rng(repeat_index));
    let test = perm.split_off(spec.train_size(n));
    Ok(Split { train: perm, test })
}

/// Per-class version of [`split_indices`]; classes with one document go to
/// training.
pub fn split_stratified(
    labels: &[ClassId],
    spec: &SplitSpec,
    repeat_index: usize,
) -> Result<Split> {
    spec.check(labels.len(), repeat_index)?;
    let mut rng = spec.rng(repeat_index);
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for mut members in by_class.into_iter().filter(|m| !m.is_empty()) {
        members.shuffle(&mut rng);
        let cut = if members.len() < 2 {
            members.len()
        } else {
            spec.train_size(members.len())
        };
        split.test.extend_from_slice(&members[cut..]);
        members.truncate(cut);
        split.train.extend(members);
    }
    Ok(split)
}
