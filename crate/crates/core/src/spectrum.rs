//! Eigenvalue spectra of trace-normalized kernels and their order-α Rényi
//! entropies (in nats).

use faer::{Mat, MatRef, Side};

use crate::error::{Result, VendiError};
use crate::kernel::{KernelMatrix, PSD_TOL};

/// Allowed deviation of the eigenvalue sum from one.
pub const SUM_TOL: f64 = 1e-8;

/// Eigenvalues sorted nonincreasing, clipped to be nonnegative and summing to
/// one, with optional eigenvectors aligned column-by-column.
#[derive(Debug, Clone)]
pub struct EigenSpectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<Mat<f64>>,
}

impl EigenSpectrum {
    /// Builds a spectrum from a probability-like vector. Entries in
    /// `[-1e-8, 0)` are clipped to zero; the result is renormalized.
    pub fn from_eigenvalues(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(VendiError::Param("empty spectrum".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < -SUM_TOL) {
            return Err(VendiError::Param(format!("invalid eigenvalue {v}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(VendiError::Param(format!(
                "eigenvalues sum to {sum}, expected 1"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        clip_and_renormalize(&mut values);
        Ok(Self {
            eigenvalues: values,
            eigenvectors: None,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is the unit eigenvector for `eigenvalues()[i]`, oriented so
    /// its largest-magnitude entry is positive.
    pub fn eigenvectors(&self) -> Option<MatRef<'_, f64>> {
        self.eigenvectors.as_ref().map(|m| m.as_ref())
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// An entropy in nats together with its order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub order: f64,
}

fn clip_and_renormalize(values: &mut [f64]) {
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
}

fn symmetric_view(n: usize, values: &[f64]) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| 0.5 * (values[i * n + j] + values[j * n + i]))
}

fn is_exactly_symmetric(n: usize, values: &[f64]) -> bool {
    (0..n).all(|i| (i + 1..n).all(|j| values[i * n + j] == values[j * n + i]))
}

/// Eigendecomposition of a dense row-major unit-trace PSD matrix.
pub(crate) fn dense_spectrum(
    n: usize,
    values: &[f64],
    with_vectors: bool,
) -> Result<EigenSpectrum> {
    let owned;
    let mat = if is_exactly_symmetric(n, values) {
        MatRef::from_row_major_slice(values, n, n)
    } else {
        owned = symmetric_view(n, values);
        owned.as_ref()
    };
    let solver_err = |e| VendiError::Numerical(format!("eigensolver failed: {e:?}"));

    let (mut eigenvalues, eigenvectors) = if with_vectors {
        let evd = mat.self_adjoint_eigen(Side::Lower).map_err(solver_err)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        // faer returns ascending order; flip to nonincreasing.
        let vals: Vec<f64> = (0..n).rev().map(|i| s[i]).collect();
        let mut vecs = Mat::from_fn(n, n, |r, c| u[(r, n - 1 - c)]);
        for c in 0..n {
            let mut pivot = 0.0f64;
            for r in 0..n {
                let v = vecs[(r, c)];
                if v.abs() > pivot.abs() {
                    pivot = v;
                }
            }
            if pivot < 0.0 {
                for r in 0..n {
                    vecs[(r, c)] = -vecs[(r, c)];
                }
            }
        }
        (vals, Some(vecs))
    } else {
        let mut vals = mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(solver_err)?;
        vals.reverse();
        (vals, None)
    };

    let min = eigenvalues.last().copied().unwrap_or(0.0);
    let floor = -PSD_TOL * n as f64;
    if min < floor {
        return Err(VendiError::Numerical(format!(
            "matrix is not PSD: eigenvalue {min:e} below {floor:e}"
        )));
    }
    // Eigenvalues below the solver's resolution are rounding noise around an
    // exact zero; left in place they bias orders below 1.
    let cutoff = n as f64 * f64::EPSILON * eigenvalues.first().copied().unwrap_or(0.0);
    for v in eigenvalues.iter_mut() {
        if *v < cutoff {
            *v = 0.0;
        }
    }
    clip_and_renormalize(&mut eigenvalues);
    Ok(EigenSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues (and optionally eigenvectors) of a trace-normalized kernel.
///
/// The matrix is symmetrized as `(K + Kᵀ)/2` before decomposition. Fails with
/// [`VendiError::Numerical`] when an eigenvalue falls below `-1e-8 · n`.
pub fn eigen_spectrum(k: &KernelMatrix, with_vectors: bool) -> Result<EigenSpectrum> {
    if !k.is_trace_normalized() {
        return Err(VendiError::Param(
            "eigen_spectrum expects a trace-normalized kernel".into(),
        ));
    }
    dense_spectrum(k.n(), k.values(), with_vectors)
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(VendiError::Param(format!(
            "entropy order must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// Order-α Rényi entropy of the spectrum, clamped to `[0, log n]`.
///
/// `α = 1` is evaluated directly as the Shannon entropy `Σ λ log(1/λ)` with
/// `0 · log(1/0) = 0`.
pub fn renyi_entropy(s: &EigenSpectrum, alpha: f64) -> Result<EntropyValue> {
    check_order(alpha)?;
    let lambdas = s.eigenvalues();
    let raw = if alpha == 1.0 {
        lambdas
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| -l * l.ln())
            .sum::<f64>()
    } else {
        let power_sum: f64 = lambdas
            .iter()
            .filter(|&&l| l > 0.0)
            .map(|&l| l.powf(alpha))
            .sum();
        power_sum.ln() / (1.0 - alpha)
    };
    let max = (lambdas.len() as f64).ln();
    Ok(EntropyValue {
        value: raw.clamp(0.0, max),
        order: alpha,
    })
}

/// Order-2 entropy without an eigensolve: `H₂ = -log ‖K/n‖²_F`.
pub fn entropy_alpha2_fast(k: &KernelMatrix) -> Result<EntropyValue> {
    if !k.is_trace_normalized() {
        return Err(VendiError::Param(
            "entropy_alpha2_fast expects a trace-normalized kernel".into(),
        ));
    }
    let frob: f64 = k.values().iter().map(|v| v * v).sum();
    let max = (k.n() as f64).ln();
    Ok(EntropyValue {
        value: (-frob.ln()).clamp(0.0, max),
        order: 2.0,
    })
}

/// Convenience: eigenvalues of a trace-normalized kernel followed by
/// [`renyi_entropy`].
pub fn kernel_entropy(k: &KernelMatrix, alpha: f64) -> Result<EntropyValue> {
    check_order(alpha)?;
    renyi_entropy(&eigen_spectrum(k, false)?, alpha)
}
