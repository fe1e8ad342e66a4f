//! Bandwidth selection: the smallest σ whose score varies by less than a
//! threshold across independent subsample evaluations.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VendiError};
use crate::ingest::{EmbeddingSet, Modality};
use crate::kernel::{gaussian_kernel, trace_normalize};
use crate::par;
use crate::spectrum::{entropy_alpha2_fast, kernel_entropy};

pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_SUBSAMPLE: usize = 1000;
pub const DEFAULT_GRID_LEN: usize = 24;
/// Rows used to estimate the median pairwise distance that anchors the grid.
pub const MEDIAN_ROWS: usize = 1000;

/// Score whose variance drives the selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKind {
    #[default]
    Vendi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthConfig {
    pub score: ScoreKind,
    pub alpha: f64,
    /// Ascending positive grid; `None` uses [`default_grid`].
    pub candidates: Option<Vec<f64>>,
    pub trials: usize,
    /// `None` means `min(n, 1000)`.
    pub subsample_size: Option<usize>,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        Self {
            score: ScoreKind::Vendi,
            alpha: 1.0,
            candidates: None,
            trials: DEFAULT_TRIALS,
            subsample_size: None,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSelection {
    pub sigma: f64,
    pub candidates: Vec<f64>,
    /// Unbiased sample variance of the score, one per candidate.
    pub variances: Vec<f64>,
    pub threshold: f64,
    pub trials: usize,
    pub subsample_size: usize,
    pub seed: u64,
    /// False when no candidate met the threshold and the largest was returned.
    pub passed: bool,
}

/// Bandwidth ranges observed for common embedding families (image, text and
/// video encoders). Informational only; not used by the selector.
pub fn documented_range(modality: Modality) -> Option<(f64, f64)> {
    match modality {
        Modality::Image => Some((20.0, 30.0)),
        Modality::Text => Some((0.1, 0.8)),
        Modality::Video => Some((10.0, 20.0)),
        Modality::Other => None,
    }
}

/// RNG for one `(candidate, trial)` evaluation. Stream 0 is reserved for the
/// grid anchor.
pub fn trial_rng(seed: u64, candidate: usize, trial: usize, trials: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + (candidate * trials + trial) as u64);
    rng
}

/// Median Euclidean distance over distinct pairs of (at most) `max_rows`
/// uniformly chosen rows.
pub fn median_pairwise_distance(set: &EmbeddingSet, max_rows: usize, seed: u64) -> f64 {
    let n = set.n();
    let rows: Vec<usize> = if n > max_rows {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        index::sample(&mut rng, n, max_rows).into_vec()
    } else {
        (0..n).collect()
    };
    let mut dists = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            let d2: f64 = set
                .row(i)
                .iter()
                .zip(set.row(j))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    if dists.is_empty() {
        return 0.0;
    }
    let mid = dists.len() / 2;
    let (_, m, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if dists.len() % 2 == 1 {
        upper
    } else {
        let lower = dists[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// `len` log-spaced values over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..len)
        .map(|i| (a + (b - a) * i as f64 / (len - 1) as f64).exp())
        .collect()
}

/// 24 log-spaced candidates over `[1e-2, 1e2]` times the median pairwise
/// distance (anchored at 1 when every row is identical).
pub fn default_grid(set: &EmbeddingSet, seed: u64) -> Vec<f64> {
    let median = median_pairwise_distance(set, MEDIAN_ROWS, seed);
    let anchor = if median > 0.0 && median.is_finite() {
        median
    } else {
        1.0
    };
    log_grid(1e-2 * anchor, 1e2 * anchor, DEFAULT_GRID_LEN)
}

fn sample_variance(values: &[f64]) -> f64 {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)
}

fn subsample_score(set: &EmbeddingSet, rows: &[usize], sigma: f64, alpha: f64) -> Result<f64> {
    let sub = set.select_rows(rows)?;
    let k = trace_normalize(gaussian_kernel(&sub, sigma)?);
    let h = if alpha == 2.0 {
        entropy_alpha2_fast(&k)?
    } else {
        kernel_entropy(&k, alpha)?
    };
    Ok(h.value.exp())
}

/// Evaluates every candidate on `trials` subsamples and returns the smallest
/// one whose score variance is at most the threshold.
pub fn select_bandwidth(
    set: &EmbeddingSet,
    config: &BandwidthConfig,
) -> Result<BandwidthSelection> {
    let ScoreKind::Vendi = config.score;
    let candidates = match &config.candidates {
        Some(c) => c.clone(),
        None => default_grid(set, config.seed),
    };
    if candidates.is_empty() {
        return Err(VendiError::Param("empty bandwidth grid".into()));
    }
    if candidates.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
        return Err(VendiError::Param(
            "bandwidth candidates must be positive".into(),
        ));
    }
    if candidates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VendiError::Param(
            "bandwidth candidates must be strictly ascending".into(),
        ));
    }
    if config.trials < 2 {
        return Err(VendiError::Param(
            "at least two trials are needed for a variance".into(),
        ));
    }
    if !(config.threshold >= 0.0) {
        return Err(VendiError::Param("threshold must be nonnegative".into()));
    }
    let n = set.n();
    let subsample_size = config.subsample_size.unwrap_or(n.min(DEFAULT_SUBSAMPLE));
    if subsample_size == 0 || subsample_size > n {
        return Err(VendiError::Param(format!(
            "subsample size {subsample_size} must lie in 1..={n}"
        )));
    }

    let trials = config.trials;
    let jobs = candidates.len() * trials;
    let scores = par::map_indices(jobs, |job| {
        let (c, trial) = (job / trials, job % trials);
        let mut rng = trial_rng(config.seed, c, trial, trials);
        let rows = index::sample(&mut rng, n, subsample_size).into_vec();
        subsample_score(set, &rows, candidates[c], config.alpha)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let variances: Vec<f64> = scores.chunks_exact(trials).map(sample_variance).collect();
    let chosen = variances.iter().position(|v| *v <= config.threshold);
    let sigma = chosen.map_or(*candidates.last().unwrap(), |i| candidates[i]);
    Ok(BandwidthSelection {
        sigma,
        candidates,
        variances,
        threshold: config.threshold,
        trials,
        subsample_size,
        seed: config.seed,
        passed: chosen.is_some(),
    })
}
