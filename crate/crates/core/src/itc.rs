//! Classical certainty measures: entropy, troenpy and their relatives.
//!
//! | Function | Formula |
//! |----------|---------|
//! | [`entropy`] | H(X) = -Σ p log p |
//! | [`troenpy`] | T(X) = -Σ p log(1 - p) |
//! | [`positive_information`] | log(1 / (1 - p)) |
//! | [`troenpy_min`] | log(K / (K - 1)) |
//! | [`dual_cross_entropy`] | -Σ p log((1 - p) / (K - 1)) |
//! | [`conditional_troenpy`] | T(X\|Y) = -Σ p(x,y) log(1 - p(x\|y)) |
//! | [`ppi`] | PPI(X;Y) = T(X\|Y) - T(X) |
//!
//! Every logarithm goes through [`LogConfig::log`], which floors its argument at
//! `clamp_epsilon`. Troenpy diverges as any p approaches 1, so a point mass
//! evaluates to `-log(clamp_epsilon)` (about 27.631 nats at the default 1e-12)
//! instead of infinity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` for validated distributions.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Logarithm base and the floor applied to log arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogConfig {
    base: f64,
    clamp_epsilon: f64,
}

impl Default for LogConfig {
    fn default() -> Self {
        LogConfig {
            base: std::f64::consts::E,
            clamp_epsilon: 1e-12,
        }
    }
}

impl LogConfig {
    pub fn new(base: f64, clamp_epsilon: f64) -> Result<Self> {
        if !base.is_finite() || base <= 1.0 {
            return Err(Error::Domain(format!("log base must be > 1, got {base}")));
        }
        if !(clamp_epsilon > 0.0 && clamp_epsilon <= 1e-3) {
            return Err(Error::Domain(format!(
                "clamp epsilon must lie in (0, 1e-3], got {clamp_epsilon}"
            )));
        }
        Ok(LogConfig {
            base,
            clamp_epsilon,
        })
    }

    /// Natural log with a custom clamp.
    pub fn with_clamp(clamp_epsilon: f64) -> Result<Self> {
        Self::new(std::f64::consts::E, clamp_epsilon)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn clamp_epsilon(&self) -> f64 {
        self.clamp_epsilon
    }

    /// `log_base(max(x, clamp_epsilon))`.
    #[inline]
    pub fn log(&self, x: f64) -> f64 {
        let ln = x.max(self.clamp_epsilon).ln();
        if self.base == std::f64::consts::E {
            ln
        } else {
            ln / self.base.ln()
        }
    }

    /// Whether evaluating `log(x)` hits the floor.
    #[inline]
    pub fn clamps(&self, x: f64) -> bool {
        x < self.clamp_epsilon
    }
}

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates without touching the values: every entry in `[0, 1]`, sum
    /// within [`SUM_TOLERANCE`] of one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {p} is outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(Distribution { probs })
    }

    /// Divides nonnegative weights by their total.
    pub fn normalize(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Normalizes integer counts.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        Self::normalize(&weights)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        Ok(Distribution {
            probs: vec![1.0 / k as f64; k],
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of outcomes K.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// True when some `1 - p` falls below the clamp floor.
    pub fn troenpy_clamped(&self, cfg: &LogConfig) -> bool {
        self.probs
            .iter()
            .zip(complements(&self.probs))
            .any(|(&p, c)| p > 0.0 && cfg.clamps(c))
    }
}

/// Joint table p(x, y): rows index X, columns index the conditioning variable Y.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidJoint("empty table".into()));
        }
        if let Some(i) = table.iter().position(|r| r.len() != cols) {
            return Err(Error::InvalidJoint(format!(
                "row {i} has {} columns, expected {cols}",
                table[i].len()
            )));
        }
        let flat: Vec<f64> = table.into_iter().flatten().collect();
        if let Some(v) = flat.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidJoint(format!("entry {v} is negative")));
        }
        let sum: f64 = flat.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidJoint(format!("entries sum to {sum}, not 1")));
        }
        Ok(JointDistribution {
            rows,
            cols,
            table: flat,
        })
    }

    /// Outer product p(x)·p(y) of two marginals.
    pub fn independent(x: &Distribution, y: &Distribution) -> Self {
        let table = x
            .probs()
            .iter()
            .flat_map(|px| y.probs().iter().map(move |py| px * py))
            .collect();
        JointDistribution {
            rows: x.len(),
            cols: y.len(),
            table,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.cols + y]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// p(x), summed across each row.
    pub fn row_marginal(&self) -> Distribution {
        let probs = (0..self.rows)
            .map(|x| (0..self.cols).map(|y| self.get(x, y)).sum())
            .collect();
        Distribution { probs }
    }

    /// p(y), summed down each column.
    pub fn col_marginal(&self) -> Distribution {
        let probs = (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect();
        Distribution { probs }
    }

    /// Swaps the roles of X and Y.
    pub fn transpose(&self) -> Self {
        let mut table = Vec::with_capacity(self.table.len());
        for y in 0..self.cols {
            for x in 0..self.rows {
                table.push(self.get(x, y));
            }
        }
        JointDistribution {
            rows: self.cols,
            cols: self.rows,
            table,
        }
    }
}

/// Shannon entropy, with `0 log 0 = 0`.
pub fn entropy(d: &Distribution, cfg: &LogConfig) -> f64 {
    // `0.0 - s` keeps a point mass at +0.
    0.0 - d
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * cfg.log(p))
        .sum::<f64>()
}

/// `1 - p_i / Σp` for every entry, computed as the sum of the other entries
/// over the total. A dominant outcome keeps a small complement accurate to a
/// few ulps instead of losing it to cancellation in `1.0 - p`.
pub(crate) fn complements(probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        out[i] = acc;
        acc += probs[i];
    }
    let total = acc;
    let mut acc = 0.0;
    for i in (0..n).rev() {
        out[i] = (out[i] + acc) / total;
        acc += probs[i];
    }
    out
}

fn troenpy_terms(probs: &[f64], cfg: &LogConfig) -> f64 {
    -probs
        .iter()
        .zip(complements(probs))
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, c)| p * cfg.log(c))
        .sum::<f64>()
}

/// Troenpy `-Σ p log(1 - p)`; outcomes with `p = 0` contribute nothing.
pub fn troenpy(d: &Distribution, cfg: &LogConfig) -> f64 {
    troenpy_terms(d.probs(), cfg)
}

/// Positive information `log(1 / (1 - p))` of a single outcome.
pub fn positive_information(p: f64, cfg: &LogConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(-cfg.log(1.0 - p))
}

/// Troenpy of the uniform distribution on `k` outcomes, the smallest value
/// troenpy can take for that support size.
pub fn troenpy_min(k: usize, cfg: &LogConfig) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!(
            "minimum troenpy needs K >= 2 outcomes, got {k}"
        )));
    }
    let k = k as f64;
    Ok(cfg.log(k / (k - 1.0)))
}

/// Cross entropy of `p` against `q_i = (1 - p_i) / (K - 1)`.
///
/// The log floor applies to `1 - p_i` rather than to `q_i`, so the result
/// stays `troenpy(d) + log(K - 1)` for point masses too.
pub fn dual_cross_entropy(d: &Distribution, cfg: &LogConfig) -> Result<f64> {
    let k = d.len();
    if k < 2 {
        return Err(Error::Domain(format!(
            "dual cross entropy needs K >= 2 outcomes, got {k}"
        )));
    }
    let log_km1 = cfg.log((k - 1) as f64);
    Ok(-d
        .probs()
        .iter()
        .zip(complements(d.probs()))
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, c)| p * (cfg.log(c) - log_km1))
        .sum::<f64>())
}

/// `T(X|Y) = Σ_y p(y) T(X | Y = y)`. Columns with `p(y) = 0` contribute nothing.
pub fn conditional_troenpy(j: &JointDistribution, cfg: &LogConfig) -> f64 {
    let py = j.col_marginal();
    let mut total = 0.0;
    for (y, &p_y) in py.probs().iter().enumerate() {
        if p_y <= 0.0 {
            continue;
        }
        let column: Vec<f64> = (0..j.rows()).map(|x| j.get(x, y)).collect();
        total += troenpy_terms(&column, cfg);
    }
    total
}

/// Pure positive information `T(X|Y) - T(X)`. Not symmetric in X and Y.
pub fn ppi(j: &JointDistribution, cfg: &LogConfig) -> f64 {
    conditional_troenpy(j, cfg) - troenpy(&j.row_marginal(), cfg)
}
