//! Brute-force reference implementations written straight from the
//! definitions, plus random input generators. Nothing here calls into the
//! library's math.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

pub const EPS: f64 = 1e-12;

/// `(tokens, class)` per document.
pub type Docs = Vec<(Vec<String>, usize)>;

pub fn oracle_entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * x.max(EPS).ln();
        }
    }
    h
}

pub fn oracle_troenpy(p: &[f64]) -> f64 {
    let mut t = 0.0;
    for &x in p {
        if x > 0.0 {
            t -= x * (1.0 - x).max(EPS).ln();
        }
    }
    t
}

/// Normalized counts plus `alpha` each; `None` if nothing is left.
pub fn normalized(counts: &[u64], alpha: f64) -> Option<Vec<f64>> {
    let total: f64 = counts.iter().map(|&c| c as f64 + alpha).sum();
    if total <= 0.0 {
        return None;
    }
    Some(counts.iter().map(|&c| (c as f64 + alpha) / total).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct OracleWeight {
    pub df: u64,
    pub idf: f64,
    pub pcf: f64,
    pub ncf_10: f64,
    pub ncf_1star: f64,
    pub ncf_star0: f64,
}

/// Term statistics keyed by term string, from `(tokens, class)` documents.
pub fn oracle_weights(
    docs: &[(Vec<String>, usize)],
    k: usize,
    alpha: f64,
) -> BTreeMap<String, OracleWeight> {
    let n = docs.len() as u64;
    let mut ct_star = vec![0u64; k];
    for (_, c) in docs {
        ct_star[*c] += 1;
    }
    let terms: BTreeSet<&String> = docs.iter().flat_map(|(t, _)| t.iter()).collect();
    let p_star = normalized(&ct_star, alpha).unwrap();
    let mut out = BTreeMap::new();
    for term in terms {
        let mut ct_1 = vec![0u64; k];
        let mut ct_0 = vec![0u64; k];
        let mut df = 0;
        for (tokens, c) in docs {
            if tokens.contains(term) {
                ct_1[*c] += 1;
                df += 1;
            } else {
                ct_0[*c] += 1;
            }
        }
        let p1 = normalized(&ct_1, alpha).unwrap();
        let h0 = if ct_0.iter().all(|&c| c == 0) {
            0.0
        } else {
            oracle_entropy(&normalized(&ct_0, alpha).unwrap())
        };
        let h1 = oracle_entropy(&p1);
        let hs = oracle_entropy(&p_star);
        out.insert(
            term.clone(),
            OracleWeight {
                df,
                idf: 1.0 + (n as f64 / (1.0 + df as f64)).ln(),
                pcf: oracle_troenpy(&p1) - oracle_troenpy(&p_star),
                ncf_10: h1 - h0,
                ncf_1star: h1 - hs,
                ncf_star0: hs - h0,
            },
        );
    }
    out
}

/// Cosine KNN over dense vectors with the documented tie rules.
pub fn oracle_knn(train: &[Vec<f64>], labels: &[usize], query: &[f64], k: usize) -> usize {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let qn = norm(query);
    let num_labels = labels.iter().max().unwrap() + 1;
    if qn == 0.0 {
        let mut freq = vec![0; num_labels];
        for &l in labels {
            freq[l] += 1;
        }
        let best = *freq.iter().max().unwrap();
        return freq.iter().position(|&f| f == best).unwrap();
    }
    let sims: Vec<f64> = train
        .iter()
        .map(|t| {
            let tn = norm(t);
            let dot: f64 = t.iter().zip(query).map(|(a, b)| a * b).sum();
            if tn == 0.0 {
                0.0
            } else {
                dot / (tn * qn)
            }
        })
        .collect();
    // j ranks ahead of i if clearly more similar, or tied (within 1e-9) with
    // a lower index.
    let ahead = |j: usize, i: usize| {
        sims[j] > sims[i] + 1e-9 || ((sims[j] - sims[i]).abs() <= 1e-9 && j < i)
    };
    let mut order: Vec<(usize, usize)> = (0..sims.len())
        .map(|i| ((0..sims.len()).filter(|&j| ahead(j, i)).count(), i))
        .collect();
    order.sort();
    let sims: Vec<(f64, usize)> = order.into_iter().map(|(_, i)| (sims[i], i)).collect();
    let top = &sims[..k.min(sims.len())];
    let mut votes = vec![0; num_labels];
    for &(_, i) in top {
        votes[labels[i]] += 1;
    }
    let best = *votes.iter().max().unwrap();
    for &(_, i) in top {
        if votes[labels[i]] == best {
            return labels[i];
        }
    }
    unreachable!()
}

/// Quadratic window counter: `(w, v) -> count`.
pub fn oracle_window_counts(sentences: &[Vec<usize>], c: usize) -> BTreeMap<(usize, usize), u64> {
    let mut out = BTreeMap::new();
    for s in sentences {
        for i in 0..s.len() {
            for j in 0..s.len() {
                if i != j && i.abs_diff(j) <= c {
                    *out.entry((s[i], s[j])).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

/// Labeled corpus with at most `max_docs` documents, `max_terms` distinct
/// terms and `max_classes` classes. Every class id below the returned count
/// appears at least once.
pub fn random_corpus<R: Rng>(
    rng: &mut R,
    max_docs: usize,
    max_terms: usize,
    max_classes: usize,
) -> (Docs, usize) {
    let k = rng.random_range(1..=max_classes);
    let n = rng.random_range(k.max(2)..=max_docs);
    let m = rng.random_range(1..=max_terms);
    let mut classes: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    classes.shuffle(rng);
    let docs = classes
        .into_iter()
        .map(|c| {
            let len = rng.random_range(1..=8);
            let tokens = (0..len)
                .map(|_| format!("t{}", rng.random_range(0..m)))
                .collect();
            (tokens, c)
        })
        .collect();
    (docs, k)
}

/// `A Aᵀ / tr(A Aᵀ)` for a random `A`, with some rank-deficient draws.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    let rank = if rng.random_bool(0.3) {
        rng.random_range(1..=d)
    } else {
        d
    };
    let a: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..rank).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut m = vec![vec![0.0; d]; d];
    let mut trace = 0.0;
    for i in 0..d {
        for j in 0..d {
            m[i][j] = (0..rank).map(|r| a[i][r] * a[j][r]).sum();
        }
        trace += m[i][i];
    }
    for i in 0..d {
        for j in 0..d {
            m[i][j] /= trace;
        }
    }
    // Exact symmetry after rounding.
    for i in 0..d {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

/// Random orthogonal matrix as a product of Givens rotations.
pub fn random_rotation<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| f64::from(i == j)).collect())
        .collect();
    if d < 2 {
        return q;
    }
    for _ in 0..3 * d * d {
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        for row in q.iter_mut() {
            let (a, b) = (row[i], row[j]);
            row[i] = c * a - s * b;
            row[j] = s * a + c * b;
        }
    }
    q
}

/// `Q M Qᵀ`, re-symmetrized.
pub fn conjugate(q: &[Vec<f64>], m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = m.len();
    let mut qm = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            qm[i][j] = (0..d).map(|k| q[i][k] * m[k][j]).sum();
        }
    }
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            out[i][j] = (0..d).map(|k| qm[i][k] * q[j][k]).sum();
        }
    }
    for i in 0..d {
        for j in 0..i {
            let avg = 0.5 * (out[i][j] + out[j][i]);
            out[i][j] = avg;
            out[j][i] = avg;
        }
    }
    out
}

pub fn random_distribution<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    // Mix of flat, peaked and sparse draws.
    let mut w: Vec<f64> = match rng.next_u32() % 3 {
        0 => (0..k).map(|_| rng.random_range(0.0..1.0)).collect(),
        1 => (0..k)
            .map(|_| rng.random_range(0.0f64..1.0).powi(8))
            .collect(),
        _ => (0..k)
            .map(|_| {
                if rng.random_bool(0.5) {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect(),
    };
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}
