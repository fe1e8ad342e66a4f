//! Text-mode analysis.
//!
//! With `K_T/n = Σ λ_i v_i v_iᵀ`, the joint kernel splits as
//! `K_X ⊙ K_T / n = Σ λ_i (K_X ⊙ v_i v_iᵀ)`. Each term restricts the sample
//! kernel to the prompts weighted by one text eigenvector; its entropy is a
//! per-mode diversity and its leading eigenvectors point at representative
//! samples.

use faer::Mat;

use crate::error::{Result, VendiError};
use crate::ingest::PairedDataset;
use crate::kernel::{gaussian_kernel, trace_normalize, KernelMatrix};
use crate::par;
use crate::spectrum::{dense_spectrum, eigen_spectrum, renyi_entropy};

/// Below this trace a mode matrix is treated as empty.
const DEGENERATE_TRACE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TextMode {
    pub eigenvalue: f64,
    /// Unit-norm eigenvector of `K_T / n`, largest-magnitude entry positive.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode_index: usize,
    pub text_eigenvalue: f64,
    pub top_samples: Vec<usize>,
    /// Order-α entropy (nats) of the trace-normalized mode matrix.
    pub mode_diversity: f64,
    /// Squared entries of the text eigenvector.
    pub member_weights: Vec<f64>,
    pub degenerate: bool,
}

/// Leading `num_modes` eigenpairs of a trace-normalized prompt kernel.
pub fn text_modes(k_t: &KernelMatrix, num_modes: usize) -> Result<Vec<TextMode>> {
    let n = k_t.n();
    if num_modes == 0 || num_modes > n {
        return Err(VendiError::Param(format!(
            "number of modes must lie in 1..={n}, got {num_modes}"
        )));
    }
    let spec = eigen_spectrum(k_t, true)?;
    let vecs = spec.eigenvectors().expect("requested eigenvectors");
    Ok((0..num_modes)
        .map(|c| TextMode {
            eigenvalue: spec.eigenvalues()[c],
            vector: (0..n).map(|r| vecs[(r, c)]).collect(),
        })
        .collect())
}

/// Number of leading eigenvectors of a mode matrix used to rank samples.
pub fn principal_count(top_k: usize, n: usize) -> usize {
    top_k.div_ceil(5).clamp(1, n)
}

fn mode_report(
    kx: &KernelMatrix,
    mode_index: usize,
    mode: &TextMode,
    alpha: f64,
    top_k: usize,
) -> Result<ModeReport> {
    let n = kx.n();
    let v = &mode.vector;
    let member_weights: Vec<f64> = v.iter().map(|x| x * x).collect();
    // K_X has a unit diagonal, so trace(K_X ⊙ v vᵀ) = Σ v_a².
    let trace: f64 = (0..n).map(|a| kx.get(a, a) * member_weights[a]).sum();
    if trace <= DEGENERATE_TRACE {
        return Ok(ModeReport {
            mode_index,
            text_eigenvalue: mode.eigenvalue,
            top_samples: Vec::new(),
            mode_diversity: 0.0,
            member_weights,
            degenerate: true,
        });
    }
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            m[a * n + b] = kx.get(a, b) * v[a] * v[b] / trace;
        }
    }
    let spec = dense_spectrum(n, &m, true)?;
    let diversity = renyi_entropy(&spec, alpha)?.value;

    let vecs = spec.eigenvectors().expect("requested eigenvectors");
    let p = principal_count(top_k, n);
    let mut ranked: Vec<(usize, f64)> = (0..n)
        .map(|r| (r, (0..p).map(|c| vecs[(r, c)].abs()).fold(0.0, f64::max)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ModeReport {
        mode_index,
        text_eigenvalue: mode.eigenvalue,
        top_samples: ranked.into_iter().take(top_k).map(|(i, _)| i).collect(),
        mode_diversity: diversity,
        member_weights,
        degenerate: false,
    })
}

/// Per-mode diversity and representative samples for the leading
/// `num_modes` text modes.
pub fn mode_decomposition(
    d: &PairedDataset,
    sigma_x: f64,
    sigma_t: f64,
    num_modes: usize,
    alpha: f64,
    top_k: usize,
) -> Result<Vec<ModeReport>> {
    let n = d.n();
    if top_k > n {
        return Err(VendiError::Param(format!("top_k {top_k} exceeds n = {n}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(VendiError::Param(format!("invalid entropy order {alpha}")));
    }
    let (kx, kt) = par::join(
        || gaussian_kernel(&d.x, sigma_x),
        || gaussian_kernel(&d.t, sigma_t),
    );
    let (kx, kt) = (kx?, trace_normalize(kt?));
    let modes = text_modes(&kt, num_modes)?;
    par::map_indices(modes.len(), |i| {
        mode_report(&kx, i, &modes[i], alpha, top_k)
    })
    .into_iter()
    .collect()
}

/// Max-norm residual of `Σ_i λ_i (K_X ⊙ v_i v_iᵀ)` over all `n` modes against
/// `K_X ⊙ K_T / n`.
pub fn reconstruction_residual(d: &PairedDataset, sigma_x: f64, sigma_t: f64) -> Result<f64> {
    let n = d.n();
    let kx = gaussian_kernel(&d.x, sigma_x)?;
    let kt = trace_normalize(gaussian_kernel(&d.t, sigma_t)?);
    let spec = eigen_spectrum(&kt, true)?;
    let v = spec.eigenvectors().expect("requested eigenvectors");
    let scaled = Mat::from_fn(n, n, |r, c| v[(r, c)] * spec.eigenvalues()[c]);
    let text = &scaled * v.transpose();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let summed = kx.get(a, b) * text[(a, b)];
            let direct = kx.get(a, b) * kt.get(a, b);
            worst = worst.max((summed - direct).abs());
        }
    }
    Ok(worst)
}
