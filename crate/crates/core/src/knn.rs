//! Cosine k-nearest-neighbor classification and the repeated-split
//! evaluation harness.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, Corpus, Document, SplitSpec};
use crate::error::{Error, Result};
use crate::weighting::{
    vectorize, ClassCounts, Negatives, Scheme, SparseVector, TermWeights, WeightOptions,
};

/// Neighborhood size used throughout the benchmark protocol.
pub const DEFAULT_K: usize = 7;

const SIMILARITY_GRID: f64 = 1e10;

/// Majority vote among the `k` training vectors most cosine-similar to the
/// query.
///
/// Similarity ties (within 1e-10) go to the lower training index. A tied vote goes to the
/// tied label whose member ranks highest. A zero query has no direction and
/// is assigned the most common training label (lowest id on ties).
pub fn knn_classify(
    train: &[SparseVector],
    labels: &[ClassId],
    query: &SparseVector,
    k: usize,
) -> Result<ClassId> {
    KnnClassifier::new(train.to_vec(), labels.to_vec(), k)?.classify(query)
}

/// A fitted classifier; training vectors are stored L2-normalized.
#[derive(Debug, Clone)]
pub struct KnnClassifier {
    train: Vec<SparseVector>,
    labels: Vec<ClassId>,
    k: usize,
    num_labels: usize,
    majority: ClassId,
}

impl KnnClassifier {
    pub fn new(mut train: Vec<SparseVector>, labels: Vec<ClassId>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if train.is_empty() {
            return Err(Error::Domain("training set is empty".into()));
        }
        if train.len() != labels.len() {
            return Err(Error::Invariant(format!(
                "{} training vectors but {} labels",
                train.len(),
                labels.len()
            )));
        }
        for v in &mut train {
            v.normalize();
        }
        let num_labels = labels.iter().max().map_or(0, |m| m + 1);
        let mut freq = vec![0usize; num_labels];
        for &l in &labels {
            freq[l] += 1;
        }
        let majority = argmax_first(&freq);
        Ok(KnnClassifier {
            train,
            labels,
            k,
            num_labels,
            majority,
        })
    }

    pub fn classify(&self, query: &SparseVector) -> Result<ClassId> {
        let norm = query.norm();
        if norm == 0.0 {
            return Ok(self.majority);
        }
        // Similarities are compared on a 1e-10 grid so that vectors with the
        // same direction tie even when their normalized entries differ in
        // the last bit.
        let mut ranked: Vec<(i64, usize)> = self
            .train
            .iter()
            .enumerate()
            .map(|(i, t)| (((t.dot(query) / norm) * SIMILARITY_GRID).round() as i64, i))
            .collect();
        let by_similarity = |a: &(i64, usize), b: &(i64, usize)| b.0.cmp(&a.0).then(a.1.cmp(&b.1));
        let k = self.k.min(ranked.len());
        if k < ranked.len() {
            ranked.select_nth_unstable_by(k - 1, by_similarity);
            ranked.truncate(k);
        }
        ranked.sort_by(by_similarity);

        let mut votes = vec![0usize; self.num_labels];
        for &(_, i) in &ranked {
            votes[self.labels[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one label");
        let winner = ranked
            .iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&l| votes[l] == top)
            .expect("a neighbor carries the top vote");
        Ok(winner)
    }
}

fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Evaluation settings echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub k: usize,
    pub split: SplitSpec,
    pub weighting: WeightOptions,
    pub negatives: Negatives,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            k: DEFAULT_K,
            split: SplitSpec::default(),
            weighting: WeightOptions::default(),
            negatives: Negatives::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeReport {
    pub scheme: Scheme,
    pub mean_error: f64,
    /// Sample standard deviation across repeats (0 for a single repeat).
    pub std_error: f64,
    pub per_repeat: Vec<f64>,
}

impl SchemeReport {
    fn from_errors(scheme: Scheme, per_repeat: Vec<f64>) -> Self {
        let n = per_repeat.len() as f64;
        let mean_error = per_repeat.iter().sum::<f64>() / n;
        let std_error = if per_repeat.len() > 1 {
            (per_repeat
                .iter()
                .map(|e| (e - mean_error).powi(2))
                .sum::<f64>()
                / (n - 1.0))
                .sqrt()
        } else {
            0.0
        };
        SchemeReport {
            scheme,
            mean_error,
            std_error,
            per_repeat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: EvalOptions,
    pub documents: usize,
    pub classes: usize,
    pub schemes: Vec<SchemeReport>,
}

impl EvalReport {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeReport> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }

    /// Side-by-side table of mean and standard deviation, in percent.
    pub fn write_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "k={} train_fraction={} repeats={} seed={} smoothing={} negatives={}",
            self.config.k,
            self.config.split.train_fraction,
            self.config.split.repeats,
            self.config.split.seed,
            self.config.weighting.smoothing,
            self.config.negatives,
        )?;
        writeln!(out, "{:<10} {:>10} {:>10}", "scheme", "error %", "std %")?;
        for s in &self.schemes {
            writeln!(
                out,
                "{:<10} {:>10.3} {:>10.3}",
                s.scheme.name(),
                100.0 * s.mean_error,
                100.0 * s.std_error
            )?;
        }
        Ok(())
    }

    /// One row per repeat, one column per scheme.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let names: Vec<&str> = self.schemes.iter().map(|s| s.scheme.name()).collect();
        writeln!(out, "repeat,{}", names.join(","))?;
        for r in 0..self.config.split.repeats {
            let row: Vec<String> = self
                .schemes
                .iter()
                .map(|s| s.per_repeat[r].to_string())
                .collect();
            writeln!(out, "{r},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Weights learned on one training split.
#[derive(Debug, Clone)]
pub struct FoldModel {
    pub weights: TermWeights,
    pub missing_classes: Vec<ClassId>,
}

impl FoldModel {
    /// Fits weights on `train` only; the test side never reaches this.
    pub fn fit<'a, I>(
        train: I,
        vocab_size: usize,
        num_classes: usize,
        opts: &WeightOptions,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let counts = ClassCounts::from_documents(train, vocab_size, num_classes)?;
        Ok(FoldModel {
            weights: TermWeights::compute(&counts, opts)?,
            missing_classes: counts.missing_classes(),
        })
    }
}

/// Error rate of each scheme over `opts.split.repeats` random splits.
pub fn evaluate(corpus: &Corpus, schemes: &[Scheme], opts: &EvalOptions) -> Result<EvalReport> {
    if opts.k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if schemes.is_empty() {
        return Err(Error::Domain("no weighting scheme selected".into()));
    }
    opts.split.validate()?;
    let labels = corpus.class_ids()?;
    let num_classes = corpus.num_classes().ok_or(Error::Unlabeled)?;
    let vocab_size = corpus.vocabulary().len();
    let docs = corpus.documents();

    let mut errors = vec![Vec::with_capacity(opts.split.repeats); schemes.len()];
    for repeat in 0..opts.split.repeats {
        let split = corpus.split(&opts.split, repeat)?;
        let model = FoldModel::fit(
            split.train.iter().map(|&i| &docs[i]),
            vocab_size,
            num_classes,
            &opts.weighting,
        )?;
        if !model.missing_classes.is_empty() {
            log::warn!(
                "repeat {repeat}: {} class(es) absent from the training split",
                model.missing_classes.len()
            );
        }
        let train_labels: Vec<ClassId> = split.train.iter().map(|&i| labels[i]).collect();

        for (s, &scheme) in schemes.iter().enumerate() {
            let train_vecs = split
                .train
                .iter()
                .map(|&i| vectorize(&docs[i], &model.weights, scheme, opts.negatives))
                .collect();
            let knn = KnnClassifier::new(train_vecs, train_labels.clone(), opts.k)?;
            let wrong = split
                .test
                .par_iter()
                .map(|&i| {
                    let q = vectorize(&docs[i], &model.weights, scheme, opts.negatives);
                    knn.classify(&q).map(|p| usize::from(p != labels[i]))
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum::<usize>();
            errors[s].push(wrong as f64 / split.test.len() as f64);
        }
    }

    Ok(EvalReport {
        config: opts.clone(),
        documents: corpus.len(),
        classes: num_classes,
        schemes: schemes
            .iter()
            .zip(errors)
            .map(|(&scheme, e)| SchemeReport::from_errors(scheme, e))
            .collect(),
    })
}
