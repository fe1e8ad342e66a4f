//! Normalized kernel matrices and their entrywise products.

use faer::MatRef;

use crate::error::{Result, VendiError};
use crate::ingest::EmbeddingSet;
use crate::par;

/// Symmetry tolerance for kernel matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Per-dimension slack on the smallest eigenvalue before a matrix is
/// declared non-PSD: `λ_min ≥ -PSD_TOL * n`.
pub const PSD_TOL: f64 = 1e-8;

const ROW_BLOCK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    Gaussian {
        sigma: f64,
    },
    Cosine,
    Product(Box<KernelKind>, Box<KernelKind>),
    /// Values supplied directly by the caller.
    Precomputed,
}

/// Dense `n × n` kernel matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
    kind: KernelKind,
    trace_normalized: bool,
}

impl KernelMatrix {
    /// Wraps caller-supplied values. The matrix must be symmetric with a unit
    /// diagonal.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != n * n {
            return Err(VendiError::Param(format!(
                "expected {} values for a {n} x {n} kernel, got {}",
                n * n,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(VendiError::DataAt {
                row: pos / n,
                col: pos % n,
                msg: "non-finite kernel value".into(),
            });
        }
        let k = Self {
            n,
            values,
            kind: KernelKind::Precomputed,
            trace_normalized: false,
        };
        let asym = k.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(VendiError::Param(format!(
                "kernel is not symmetric (max |K - K^T| = {asym:e})"
            )));
        }
        if let Some(i) = (0..n).find(|&i| k.get(i, i) != 1.0) {
            return Err(VendiError::Param(format!(
                "kernel diagonal entry {i} is {} (expected 1)",
                k.get(i, i)
            )));
        }
        Ok(k)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn is_trace_normalized(&self) -> bool {
        self.trace_normalized
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.values, self.n, self.n)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the stored matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let ev = self
            .as_mat()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| VendiError::Numerical(format!("eigensolver failed: {e:?}")))?;
        Ok(ev.first().copied().unwrap_or(0.0))
    }

    /// Fails when the smallest eigenvalue is below `-PSD_TOL * n`.
    pub fn check_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue()?;
        let floor = -PSD_TOL * self.n as f64;
        if min < floor {
            return Err(VendiError::Numerical(format!(
                "kernel is not PSD: smallest eigenvalue {min:e} < {floor:e}"
            )));
        }
        Ok(())
    }
}

/// Four-way unrolled dot product. Summation order depends only on the length,
/// so `dot(a, b) == dot(b, a)` bitwise.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Fills the upper triangle of `out` (row-major `n × n`) with
/// `entry(i, j, <x_i, x_j>)`, mirrors it, and sets the diagonal to 1.
///
/// Rows are processed in blocks so each streamed row `j` is reused across the
/// whole block; every entry comes from the same `dot` call regardless of the
/// blocking, which keeps the output independent of the partitioning.
fn fill_symmetric<F>(set: &EmbeddingSet, entry: F) -> Result<Vec<f64>>
where
    F: Fn(usize, usize, f64) -> f64 + Sync + Send,
{
    let n = set.n();
    let mut out = vec![0.0f64; n * n];
    par::for_each_chunk_mut(&mut out, ROW_BLOCK * n, |block, rows| {
        let start = block * ROW_BLOCK;
        let len = rows.len() / n;
        for j in start..n {
            let xj = set.row(j);
            for bi in 0..len.min(j + 1 - start) {
                let i = start + bi;
                rows[bi * n + j] = entry(i, j, dot(set.row(i), xj));
            }
        }
    });
    for i in 0..n {
        out[i * n + i] = 1.0;
        for j in i + 1..n {
            out[j * n + i] = out[i * n + j];
        }
    }
    if let Some(pos) = out.iter().position(|v| !v.is_finite()) {
        return Err(VendiError::DataAt {
            row: pos / n,
            col: pos % n,
            msg: "non-finite pairwise distance".into(),
        });
    }
    Ok(out)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(VendiError::Param(format!(
            "bandwidth must be positive and finite, got {sigma}"
        )));
    }
    Ok(())
}

fn squared_norms(set: &EmbeddingSet) -> Vec<f64> {
    set.rows().map(|r| dot(r, r)).collect()
}

/// Gaussian kernel `exp(-‖x_i - x_j‖² / (2σ²))`.
///
/// Distances use `‖a‖² + ‖b‖² - 2⟨a, b⟩`, clamped at zero.
pub fn gaussian_kernel(set: &EmbeddingSet, sigma: f64) -> Result<KernelMatrix> {
    check_sigma(sigma)?;
    let norms = squared_norms(set);
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(VendiError::Data("squared norm overflows f64".into()));
    }
    let scale = -1.0 / (2.0 * sigma * sigma);
    let values = fill_symmetric(set, |i, j, ip| {
        let d2 = (norms[i] + norms[j] - 2.0 * ip).max(0.0);
        (d2 * scale).exp()
    })?;
    Ok(KernelMatrix {
        n: set.n(),
        values,
        kind: KernelKind::Gaussian { sigma },
        trace_normalized: false,
    })
}

/// Gaussian kernel from explicit coordinate differences, one entry at a time.
/// Slower than [`gaussian_kernel`]; kept as a reference for cross-checks.
pub fn gaussian_kernel_naive(set: &EmbeddingSet, sigma: f64) -> Result<KernelMatrix> {
    check_sigma(sigma)?;
    let n = set.n();
    let mut values = vec![1.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d2: f64 = set
                .row(i)
                .iter()
                .zip(set.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if !d2.is_finite() {
                return Err(VendiError::DataAt {
                    row: i,
                    col: j,
                    msg: "non-finite pairwise distance".into(),
                });
            }
            values[i * n + j] = (-d2 / (2.0 * sigma * sigma)).exp();
        }
    }
    Ok(KernelMatrix {
        n,
        values,
        kind: KernelKind::Gaussian { sigma },
        trace_normalized: false,
    })
}

/// Cosine kernel `⟨x_i, x_j⟩ / (‖x_i‖‖x_j‖)`, i.e. the linear kernel on the
/// explicit feature map `x / ‖x‖`.
pub fn cosine_kernel(set: &EmbeddingSet) -> Result<KernelMatrix> {
    let norms: Vec<f64> = squared_norms(set).into_iter().map(f64::sqrt).collect();
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        return Err(VendiError::DataAt {
            row: i,
            col: 0,
            msg: "zero-norm row has no direction".into(),
        });
    }
    let values = fill_symmetric(set, |i, j, ip| {
        (ip / (norms[i] * norms[j])).clamp(-1.0, 1.0)
    })?;
    Ok(KernelMatrix {
        n: set.n(),
        values,
        kind: KernelKind::Cosine,
        trace_normalized: false,
    })
}

/// Entrywise product: the kernel matrix of the pairs `[x_i, t_i]` under the
/// product kernel `k_X · k_T`.
pub fn hadamard(a: &KernelMatrix, b: &KernelMatrix) -> Result<KernelMatrix> {
    if a.n != b.n {
        return Err(VendiError::Param(format!(
            "kernel sizes differ: {} vs {}",
            a.n, b.n
        )));
    }
    if a.trace_normalized || b.trace_normalized {
        return Err(VendiError::Param(
            "hadamard expects unit-diagonal kernels, not trace-normalized ones".into(),
        ));
    }
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
    Ok(KernelMatrix {
        n: a.n,
        values,
        kind: KernelKind::Product(Box::new(a.kind.clone()), Box::new(b.kind.clone())),
        trace_normalized: false,
    })
}

/// Divides by `n` so the eigenvalues sum to one. Idempotent.
pub fn trace_normalize(k: KernelMatrix) -> KernelMatrix {
    if k.trace_normalized {
        return k;
    }
    let scale = 1.0 / k.n as f64;
    let values = k.values.into_iter().map(|v| v * scale).collect();
    KernelMatrix {
        n: k.n,
        values,
        kind: k.kind,
        trace_normalized: true,
    }
}
