//! Gaussian prompt mixtures with known population statistics, plus a
//! group-conditional sample generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, VendiError};
use crate::ingest::EmbeddingSet;
use crate::scores::MixtureStats;

/// Mixture `Σ ω_i N(μ_i, (σ_i²/d) I)`, so that `E‖T - μ_i‖² = σ_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    total_variances: Vec<f64>,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        total_variances: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let m = weights.len();
        if m == 0 || means.len() != m || total_variances.len() != m {
            return Err(VendiError::Param(
                "mixture needs matching nonempty weights, means and variances".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(VendiError::Param("mixture weights must be positive".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(VendiError::Param("mixture weights must sum to 1".into()));
        }
        if total_variances
            .iter()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(VendiError::Param(
                "total variances must be nonnegative".into(),
            ));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|mu| mu.len() != d) {
            return Err(VendiError::Param(
                "means must share a nonzero dimension".into(),
            ));
        }
        Ok(Self {
            weights,
            means,
            total_variances,
            seed,
        })
    }

    /// `m` equal-weight components with means `separation/√2 · e_i`, so every
    /// pair of means is `separation` apart, each with total variance
    /// `spread²`.
    pub fn separated(m: usize, separation: f64, spread: f64, seed: u64) -> Result<Self> {
        let scale = separation / 2f64.sqrt();
        let means = (0..m)
            .map(|i| (0..m).map(|c| if c == i { scale } else { 0.0 }).collect())
            .collect();
        Self::new(
            vec![1.0 / m as f64; m],
            means,
            vec![spread * spread; m],
            seed,
        )
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn total_variances(&self) -> &[f64] {
        &self.total_variances
    }

    /// The population statistics the aggregation bound takes.
    pub fn stats(&self, sigma: f64) -> MixtureStats {
        MixtureStats {
            weights: self.weights.clone(),
            means: self.means.clone(),
            total_variances: self.total_variances.clone(),
            sigma,
        }
    }
}

/// Component counts by largest remainder, each at least one.
fn component_counts(weights: &[f64], n: usize) -> Vec<usize> {
    let m = weights.len();
    let mut counts: Vec<usize> = weights
        .iter()
        .map(|w| (w * n as f64).floor() as usize)
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let ra = weights[a] * n as f64 - counts[a] as f64;
        let rb = weights[b] * n as f64 - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().cycle().take(n - assigned) {
        counts[i] += 1;
    }
    for i in 0..m {
        while counts[i] == 0 {
            let donor = (0..m).max_by_key(|&j| counts[j]).unwrap();
            counts[donor] -= 1;
            counts[i] += 1;
        }
    }
    counts
}

/// Draws `n ≥ m` prompts with their 1-based component labels. Component sizes
/// follow the weights (largest remainder, every component nonempty); the order
/// is shuffled.
pub fn sample_mixture(spec: &MixtureSpec, n: usize) -> Result<(EmbeddingSet, Vec<usize>)> {
    let m = spec.num_components();
    if n < m {
        return Err(VendiError::Param(format!("need n >= {m} samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = component_counts(&spec.weights, n)
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| std::iter::repeat_n(i + 1, c))
        .collect();
    labels.shuffle(&mut rng);
    let d = spec.dim();
    let mut data = Vec::with_capacity(n * d);
    for &g in &labels {
        let std = (spec.total_variances[g - 1] / d as f64).sqrt();
        for c in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            data.push(spec.means[g - 1][c] + std * z);
        }
    }
    Ok((EmbeddingSet::new(n, d, data)?, labels))
}

/// Empirical `(mean, total variance)` per component, for diagnostics.
pub fn component_moments(set: &EmbeddingSet, labels: &[usize], m: usize) -> Vec<(Vec<f64>, f64)> {
    let d = set.dim();
    (1..=m)
        .map(|g| {
            let rows: Vec<&[f64]> = (0..set.n())
                .filter(|&i| labels[i] == g)
                .map(|i| set.row(i))
                .collect();
            let k = rows.len().max(1) as f64;
            let mean: Vec<f64> = (0..d)
                .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / k)
                .collect();
            let var = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .zip(&mean)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                })
                .sum::<f64>()
                / k;
            (mean, var)
        })
        .collect()
}

/// Samples `X | G = g ~ N(center_g, (spread_g²/d) I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalGenerator {
    pub centers: Vec<Vec<f64>>,
    /// Root total variance per group.
    pub spreads: Vec<f64>,
    pub seed: u64,
}

impl ConditionalGenerator {
    /// Groups at `separation/√2 · e_g` in `dim ≥ m` dimensions with the given
    /// spreads.
    pub fn separated(dim: usize, separation: f64, spreads: Vec<f64>, seed: u64) -> Result<Self> {
        if dim < spreads.len() {
            return Err(VendiError::Param("dimension must cover every group".into()));
        }
        let scale = separation / 2f64.sqrt();
        let centers = (0..spreads.len())
            .map(|g| (0..dim).map(|c| if c == g { scale } else { 0.0 }).collect())
            .collect();
        Ok(Self {
            centers,
            spreads,
            seed,
        })
    }

    pub fn sample(&self, labels: &[usize]) -> Result<EmbeddingSet> {
        let d = self.centers.first().map_or(0, Vec::len);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut data = Vec::with_capacity(labels.len() * d);
        for &g in labels {
            if g == 0 || g > self.centers.len() {
                return Err(VendiError::Param(format!("label {g} has no generator")));
            }
            let std = self.spreads[g - 1] / (d as f64).sqrt();
            for c in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                data.push(self.centers[g - 1][c] + std * z);
            }
        }
        EmbeddingSet::new(labels.len(), d, data)
    }
}
