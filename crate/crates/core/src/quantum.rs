//! Von Neumann entropy and quantum troenpy of real symmetric density matrices.
//!
//! Both quantities are spectral: they depend only on the eigenvalues of ρ,
//! which are obtained with a cyclic Jacobi eigensolver.

use crate::error::{Error, Result};
use crate::itc::{self, Distribution, LogConfig, SUM_TOLERANCE};

/// Largest tolerated asymmetry `|a_ij - a_ji|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOLERANCE` are treated as rounding noise.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Jacobi stops once the off-diagonal Frobenius norm drops to this.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) Vᵀ` of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `Σ_j λ_j v_j v_jᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        for (j, &lambda) in self.values.iter().enumerate() {
            for r in 0..n {
                let vr = self.vectors[r * n + j] * lambda;
                for c in 0..n {
                    out[r * n + c] += vr * self.vectors[c * n + j];
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += a[p * n + q] * a[p * n + q];
        }
    }
    (2.0 * sum).sqrt()
}

/// Cyclic Jacobi eigensolver for a row-major symmetric `n × n` matrix.
///
/// Each sweep visits every pair `p < q` in row order and applies the plane
/// rotation that annihilates `a_pq`. The input is copied; eigenvalues come out
/// in diagonal order, unsorted. A matrix that is already diagonal is returned
/// untouched.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(matrix.len(), n * n, "matrix is not {n}x{n}");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut sweeps = 0;
    let mut converged = off_diagonal_norm(&a, n) <= JACOBI_TOLERANCE;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A <- A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                // A <- Jᵀ A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                // V <- V J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a, n) <= JACOBI_TOLERANCE;
    }
    if !converged {
        log::warn!(
            "jacobi: off-diagonal norm still above {JACOBI_TOLERANCE:e} after {sweeps} sweeps"
        );
    }

    SymmetricEigen {
        values: (0..n).map(|i| a[i * n + i]).collect(),
        vectors: v,
        sweeps,
        converged,
    }
}

/// A real symmetric, unit-trace matrix. Positive semidefiniteness is checked
/// when the spectrum is computed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidDensityMatrix("empty matrix".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidDensityMatrix(format!(
                "row {i} has {} entries, expected {dim}",
                rows[i].len()
            )));
        }
        Self::from_row_major(dim, rows.into_iter().flatten().collect())
    }

    pub fn from_row_major(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidDensityMatrix(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensityMatrix("non-finite entry".into()));
        }
        for r in 0..dim {
            for c in (r + 1)..dim {
                let gap = (entries[r * dim + c] - entries[c * dim + r]).abs();
                if gap > SYMMETRY_TOLERANCE {
                    return Err(Error::NotSymmetric {
                        row: r,
                        col: c,
                        gap,
                    });
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| entries[i * dim + i]).sum();
        if (trace - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {trace}, not 1"
            )));
        }
        Ok(DensityMatrix { dim, entries })
    }

    /// `diag(probs)`.
    pub fn diagonal(d: &Distribution) -> Self {
        let dim = d.len();
        let mut entries = vec![0.0; dim * dim];
        for (i, &p) in d.probs().iter().enumerate() {
            entries[i * dim + i] = p;
        }
        DensityMatrix { dim, entries }
    }

    /// The maximally mixed state `I / d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(Self::diagonal(&Distribution::uniform(dim)?))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn decompose(&self) -> SymmetricEigen {
        jacobi_eigen(&self.entries, self.dim)
    }

    /// Spectrum in solver order, validated as a distribution.
    ///
    /// Small negative eigenvalues are set to zero; only then is the spectrum
    /// renormalized, so a matrix with a clean spectrum keeps its eigenvalues
    /// bit for bit.
    fn spectrum(&self) -> Result<Distribution> {
        let mut values = self.decompose().values;
        let mut clamped = false;
        for v in values.iter_mut() {
            if *v < -PSD_TOLERANCE {
                return Err(Error::NotPsd(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
                clamped = true;
            } else if *v > 1.0 {
                *v = 1.0;
                clamped = true;
            }
        }
        if clamped {
            Distribution::normalize(&values)
        } else {
            Distribution::new(values)
        }
    }

    /// Eigenvalues sorted in descending order.
    pub fn eigenvalues(&self) -> Result<Distribution> {
        let mut probs = self.spectrum()?.probs().to_vec();
        probs.sort_by(|a, b| b.total_cmp(a));
        Distribution::new(probs)
    }
}

/// `H(ρ) = -tr(ρ ln ρ)`.
pub fn von_neumann_entropy(m: &DensityMatrix, cfg: &LogConfig) -> Result<f64> {
    Ok(itc::entropy(&m.spectrum()?, cfg))
}

/// `T(ρ) = -Σ_j η_j ln(1 - η_j)` over the spectrum of ρ.
pub fn quantum_troenpy(m: &DensityMatrix, cfg: &LogConfig) -> Result<f64> {
    Ok(itc::troenpy(&m.spectrum()?, cfg))
}
