//! Library-versus-oracle comparisons shared by the integration tests and the
//! acceptance runner. Each returns a description of the first mismatch.

use rand::Rng;

use troenpy::corpus::{Corpus, TokenizerConfig};
use troenpy::knn::KnnClassifier;
use troenpy::selftro::NeighborCounts;
use troenpy::weighting::{
    vectorize, ClassCounts, Negatives, Scheme, Smoothing, TermWeights, WeightOptions,
};

use super::{oracle_knn, oracle_weights, oracle_window_counts};

pub type Check = Result<(), String>;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn build_corpus(docs: &[(Vec<String>, usize)]) -> Corpus {
    let texts: Vec<(String, String)> = docs
        .iter()
        .map(|(t, c)| (format!("c{c}"), t.join(" ")))
        .collect();
    Corpus::from_labeled(
        texts.iter().map(|(l, t)| (l.as_str(), t.as_str())),
        &TokenizerConfig::default(),
    )
    .expect("nonempty corpus")
}

/// df, IDF, PCF and the NCF variants against the oracle, for the given
/// smoothing strength (0 means none).
pub fn check_weights(docs: &[(Vec<String>, usize)], k: usize, alpha: f64) -> Check {
    let corpus = build_corpus(docs);
    let counts = ClassCounts::from_corpus(&corpus).map_err(|e| e.to_string())?;
    let smoothing = if alpha > 0.0 {
        Smoothing::Laplace(alpha)
    } else {
        Smoothing::None
    };
    let opts = WeightOptions {
        smoothing,
        ..Default::default()
    };
    let weights = TermWeights::compute(&counts, &opts).map_err(|e| e.to_string())?;
    let expected = oracle_weights(docs, k, alpha);
    if expected.len() != corpus.vocabulary().len() {
        return Err(format!(
            "{} oracle terms vs {} in vocabulary",
            expected.len(),
            corpus.vocabulary().len()
        ));
    }
    // Library class ids follow first appearance; the oracle's are the raw ones.
    let labels = corpus.labels().unwrap();
    for c in 0..k {
        let lib_c = labels.id(&format!("c{c}")).unwrap();
        let star = counts.ct_star()[lib_c];
        let oracle_star = docs.iter().filter(|d| d.1 == c).count() as u64;
        if star != oracle_star {
            return Err(format!("class c{c}: CT_* {star} vs {oracle_star}"));
        }
    }
    for (term, o) in &expected {
        let id = corpus
            .vocabulary()
            .id(term)
            .ok_or(format!("{term} missing"))?;
        let w = weights.get(id).ok_or(format!("{term} has no weight"))?;
        let pairs = [
            ("idf", w.idf, o.idf),
            ("pcf", w.pcf, o.pcf),
            ("ncf10", w.ncf_10, o.ncf_10),
            ("ncf1*", w.ncf_1star, o.ncf_1star),
            ("ncf*0", w.ncf_star0, o.ncf_star0),
        ];
        if w.df != o.df {
            return Err(format!("{term}: df {} vs {}", w.df, o.df));
        }
        for (name, got, want) in pairs {
            if !close(got, want, 1e-9) {
                return Err(format!("{term}: {name} {got} vs oracle {want}"));
            }
        }
    }
    Ok(())
}

/// `ncf_10 = ncf_1* + ncf_*0` for every term.
pub fn check_telescoping(docs: &[(Vec<String>, usize)], alpha: f64) -> Check {
    let corpus = build_corpus(docs);
    let counts = ClassCounts::from_corpus(&corpus).map_err(|e| e.to_string())?;
    let smoothing = if alpha > 0.0 {
        Smoothing::Laplace(alpha)
    } else {
        Smoothing::None
    };
    let opts = WeightOptions {
        smoothing,
        ..Default::default()
    };
    let weights = TermWeights::compute(&counts, &opts).map_err(|e| e.to_string())?;
    for (id, term) in corpus.vocabulary().iter() {
        let w = weights.get(id).unwrap();
        if !close(w.ncf_10, w.ncf_1star + w.ncf_star0, 1e-9) {
            return Err(format!(
                "{term}: {} != {} + {}",
                w.ncf_10, w.ncf_1star, w.ncf_star0
            ));
        }
    }
    Ok(())
}

/// Leave-one-out predictions of the library classifier against the oracle
/// classifier fed the same vectors, for every scheme and a random `k`.
pub fn check_knn<R: Rng>(rng: &mut R, docs: &[(Vec<String>, usize)]) -> Check {
    let corpus = build_corpus(docs);
    let counts = ClassCounts::from_corpus(&corpus).map_err(|e| e.to_string())?;
    let weights =
        TermWeights::compute(&counts, &WeightOptions::default()).map_err(|e| e.to_string())?;
    let labels = corpus.class_ids().map_err(|e| e.to_string())?;
    let m = corpus.vocabulary().len();
    let k = rng.random_range(1..=5);
    for scheme in Scheme::ALL {
        for negatives in [Negatives::Raw, Negatives::Clamp0] {
            let vecs: Vec<_> = corpus
                .documents()
                .iter()
                .map(|d| vectorize(d, &weights, scheme, negatives))
                .collect();
            let dense: Vec<Vec<f64>> = vecs
                .iter()
                .map(|v| (0..m).map(|t| v.get(t)).collect())
                .collect();
            for q in 0..vecs.len() {
                let train: Vec<usize> = (0..vecs.len()).filter(|&i| i != q).collect();
                let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
                let knn = KnnClassifier::new(
                    train.iter().map(|&i| vecs[i].clone()).collect(),
                    train_labels.clone(),
                    k,
                )
                .map_err(|e| e.to_string())?;
                let got = knn.classify(&vecs[q]).map_err(|e| e.to_string())?;
                let dense_train: Vec<Vec<f64>> = train.iter().map(|&i| dense[i].clone()).collect();
                let want = oracle_knn(&dense_train, &train_labels, &dense[q], k);
                if got != want {
                    return Err(format!(
                        "{scheme} {negatives:?} k={k} query {q}: {got} vs oracle {want}"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Window counts against the quadratic counter, plus symmetry.
pub fn check_window(sentences: &[Vec<usize>], vocab_size: usize, c: usize) -> Check {
    let counts =
        NeighborCounts::count_sentences(sentences.iter().map(Vec::as_slice), vocab_size, c)
            .map_err(|e| e.to_string())?;
    let expected = oracle_window_counts(sentences, c);
    for w in 0..vocab_size {
        for v in 0..vocab_size {
            let got = counts.get(w, v);
            let want = expected.get(&(w, v)).copied().unwrap_or(0);
            if got != want {
                return Err(format!("c={c} CT[{w}][{v}] = {got}, oracle {want}"));
            }
            if got != counts.get(v, w) {
                return Err(format!("c={c} CT[{w}][{v}] != CT[{v}][{w}]"));
            }
        }
        let occurrences = sentences.iter().flatten().filter(|&&t| t == w).count() as u64;
        if counts.totals()[w] != occurrences {
            return Err(format!(
                "term {w} occurs {occurrences} times, counted {}",
                counts.totals()[w]
            ));
        }
    }
    Ok(())
}
