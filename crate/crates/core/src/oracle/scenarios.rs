//! Synthetic experiments with known structure, used by the acceptance suite
//! and by `vendi simulate`.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bandwidth::median_pairwise_distance;
use crate::error::{Result, VendiError};
use crate::ingest::{pair, EmbeddingSet, PairedDataset};
use crate::par;
use crate::scores::score_report;

use super::mixture::{ConditionalGenerator, MixtureSpec};
use super::theorem1::{check_theorem1, Theorem1Config};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ModeGrowthSpecified,
    ModeGrowthUnspecified,
    Substitution,
    Theorem1,
}

impl FromStr for Scenario {
    type Err = VendiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode_growth_specified" => Ok(Scenario::ModeGrowthSpecified),
            "mode_growth_unspecified" => Ok(Scenario::ModeGrowthUnspecified),
            "substitution" => Ok(Scenario::Substitution),
            "theorem1" => Ok(Scenario::Theorem1),
            _ => Err(VendiError::Param(format!(
                "unknown scenario '{s}' (expected mode_growth_specified, \
                 mode_growth_unspecified, substitution or theorem1)"
            ))),
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Sweep over the number of sample modes ("breeds"). Sample mode `k` sits at
/// `mode_offset · e_k`; its prompts either name the mode (`informative`) or
/// are all the same generic prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrowthConfig {
    pub max_modes: usize,
    pub per_mode: usize,
    pub dim: usize,
    pub mode_offset: f64,
    /// Per-coordinate standard deviation within a mode.
    pub sample_std: f64,
    pub prompt_offset: f64,
    pub prompt_std: f64,
    pub sigma_x: f64,
    pub sigma_t: f64,
    pub alpha: f64,
}

impl Default for ModeGrowthConfig {
    fn default() -> Self {
        Self {
            max_modes: 10,
            per_mode: 50,
            dim: 16,
            mode_offset: 8.0,
            sample_std: 0.2,
            prompt_offset: 10.0,
            prompt_std: 0.01,
            sigma_x: 1.0,
            sigma_t: 1.0,
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrowthRow {
    pub num_modes: usize,
    pub n: usize,
    pub vendi: f64,
    pub conditional_vendi: f64,
    pub information_vendi: f64,
}

/// Modes are generated once and added one at a time, so step `k` contains
/// exactly the samples of step `k-1` plus one new mode.
pub fn mode_growth(
    informative: bool,
    seed: u64,
    config: &ModeGrowthConfig,
) -> Result<Vec<ModeGrowthRow>> {
    if config.max_modes == 0 || config.max_modes > config.dim {
        return Err(VendiError::Param("max_modes must lie in 1..=dim".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = config.dim;
    let mut xs: Vec<f64> = Vec::new();
    let mut ts: Vec<f64> = Vec::new();
    for mode in 0..config.max_modes {
        let prompt_axis = if informative { mode } else { 0 };
        for _ in 0..config.per_mode {
            for c in 0..d {
                let center = if c == mode { config.mode_offset } else { 0.0 };
                xs.push(center + config.sample_std * normal(&mut rng));
            }
            for c in 0..d {
                let center = if c == prompt_axis {
                    config.prompt_offset
                } else {
                    0.0
                };
                ts.push(center + config.prompt_std * normal(&mut rng));
            }
        }
    }
    let rows = par::map_indices(config.max_modes, |k| -> Result<ModeGrowthRow> {
        let n = (k + 1) * config.per_mode;
        let x = EmbeddingSet::new(n, d, xs[..n * d].to_vec())?;
        let t = EmbeddingSet::new(n, d, ts[..n * d].to_vec())?;
        let r = score_report(
            &pair(x, t, None)?,
            config.sigma_x,
            config.sigma_t,
            config.alpha,
        )?;
        Ok(ModeGrowthRow {
            num_modes: k + 1,
            n,
            vendi: r.vendi_x,
            conditional_vendi: r.conditional_vendi,
            information_vendi: r.information_vendi,
        })
    });
    rows.into_iter().collect()
}

/// Topic-structured prompt/sample pairs where a growing fraction of samples
/// is replaced by samples of random topics.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionConfig {
    pub n: usize,
    pub topics: usize,
    pub dim: usize,
    /// Standard deviation of topic centers.
    pub topic_scale: f64,
    pub noise: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub rates: Vec<f64>,
}

impl Default for SubstitutionConfig {
    fn default() -> Self {
        Self {
            n: 128,
            topics: 16,
            dim: 8,
            topic_scale: 3.0,
            noise: 0.05,
            sigma: 1.0,
            alpha: 1.0,
            rates: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionRow {
    pub rate: f64,
    pub vendi_x: f64,
    pub vendi_t: f64,
    pub conditional_vendi: f64,
    pub information_vendi: f64,
}

/// Substituted index sets are nested: the samples replaced at a lower rate
/// stay replaced at every higher rate.
pub fn substitution(seed: u64, config: &SubstitutionConfig) -> Result<Vec<SubstitutionRow>> {
    let SubstitutionConfig { n, topics, dim, .. } = *config;
    if n == 0 || topics == 0 || dim == 0 {
        return Err(VendiError::Param(
            "substitution sizes must be positive".into(),
        ));
    }
    if config.rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(VendiError::Param(
            "substitution rates must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..topics * dim)
            .map(|_| config.topic_scale * normal(rng))
            .collect()
    };
    let prompt_centers = centers(&mut rng);
    let sample_centers = centers(&mut rng);
    let draw = |rng: &mut ChaCha8Rng, table: &[f64], topic: usize| -> Vec<f64> {
        (0..dim)
            .map(|c| table[topic * dim + c] + config.noise * normal(rng))
            .collect()
    };

    let topic: Vec<usize> = (0..n).map(|_| rng.random_range(0..topics)).collect();
    let t_rows: Vec<Vec<f64>> = topic
        .iter()
        .map(|&g| draw(&mut rng, &prompt_centers, g))
        .collect();
    let x_rows: Vec<Vec<f64>> = topic
        .iter()
        .map(|&g| draw(&mut rng, &sample_centers, g))
        .collect();
    let fresh: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let g = rng.random_range(0..topics);
            draw(&mut rng, &sample_centers, g)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let t = EmbeddingSet::from_rows(&t_rows)?;

    let rows = par::map_indices(config.rates.len(), |ri| -> Result<SubstitutionRow> {
        let rate = config.rates[ri];
        let k = (rate * n as f64).round() as usize;
        let mut xs = x_rows.clone();
        for &i in &order[..k] {
            xs[i] = fresh[i].clone();
        }
        let d = pair(EmbeddingSet::from_rows(&xs)?, t.clone(), None)?;
        let r = score_report(&d, config.sigma, config.sigma, config.alpha)?;
        Ok(SubstitutionRow {
            rate,
            vendi_x: r.vendi_x,
            vendi_t: r.vendi_t,
            conditional_vendi: r.conditional_vendi,
            information_vendi: r.information_vendi,
        })
    });
    rows.into_iter().collect()
}

/// Separated-mixture runs of the aggregation check for `m = 1..=max_modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Scenario {
    pub max_modes: usize,
    pub n: usize,
    /// `‖μ_i - μ_j‖ / σ`.
    pub separation: f64,
    /// `σ_i / σ`.
    pub spread: f64,
    pub sigma: f64,
    pub sigma_x: f64,
    pub alpha: f64,
    /// Root total variance of the outputs of each group (cycled).
    pub x_spreads: Vec<f64>,
}

impl Default for Theorem1Scenario {
    fn default() -> Self {
        Self {
            max_modes: 4,
            n: 2000,
            separation: 20.0,
            spread: 0.01,
            sigma: 1.0,
            sigma_x: 1.0,
            alpha: 2.0,
            x_spreads: vec![0.5, 1.0, 1.5, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Row {
    pub num_modes: usize,
    pub n: usize,
    pub conditional_entropy: f64,
    pub aggregate: f64,
    pub gap: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub pass: bool,
}

/// One run with `m` prompt modes.
pub fn theorem1_run(m: usize, seed: u64, scenario: &Theorem1Scenario) -> Result<Theorem1Row> {
    let spec = MixtureSpec::separated(
        m,
        scenario.separation * scenario.sigma,
        scenario.spread * scenario.sigma,
        seed,
    )?;
    let spreads = (0..m)
        .map(|g| scenario.x_spreads[g % scenario.x_spreads.len()])
        .collect();
    let gen = ConditionalGenerator::separated(
        m.max(4),
        20.0 * scenario.sigma_x,
        spreads,
        seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
    )?;
    let r = check_theorem1(
        &spec,
        &gen,
        &Theorem1Config {
            n: scenario.n,
            sigma: scenario.sigma,
            sigma_x: scenario.sigma_x,
            alpha: scenario.alpha,
        },
    )?;
    Ok(Theorem1Row {
        num_modes: m,
        n: scenario.n,
        conditional_entropy: r.conditional_entropy,
        aggregate: r.aggregate,
        gap: r.gap,
        bound: r.bound,
        vacuous: r.vacuous,
        pass: r.pass,
    })
}

pub fn theorem1_sweep(seed: u64, scenario: &Theorem1Scenario) -> Result<Vec<Theorem1Row>> {
    (1..=scenario.max_modes)
        .map(|m| theorem1_run(m, seed, scenario))
        .collect()
}

/// A random paired dataset with `n` in `n_range`, feature dimensions in
/// `d_range`, and bandwidths set to each modality's median pairwise
/// distance. Even draws correlate `t` with `x`; odd draws are independent.
pub fn random_paired_dataset(
    rng: &mut ChaCha8Rng,
    n_range: std::ops::RangeInclusive<usize>,
    d_range: std::ops::RangeInclusive<usize>,
) -> Result<(PairedDataset, f64, f64)> {
    let n = rng.random_range(n_range);
    let dx = rng.random_range(d_range.clone());
    let dt = rng.random_range(d_range);
    let correlated = rng.random_bool(0.5);
    let x: Vec<f64> = (0..n * dx).map(|_| normal(rng)).collect();
    let mut t: Vec<f64> = (0..n * dt).map(|_| normal(rng)).collect();
    if correlated {
        let shared = dx.min(dt);
        let strength = rng.random_range(0.5..3.0);
        for i in 0..n {
            for c in 0..shared {
                t[i * dt + c] += strength * x[i * dx + c];
            }
        }
    }
    let x = EmbeddingSet::new(n, dx, x)?;
    let t = EmbeddingSet::new(n, dt, t)?;
    let sx = median_pairwise_distance(&x, usize::MAX, 0);
    let st = median_pairwise_distance(&t, usize::MAX, 0);
    Ok((pair(x, t, None)?, sx, st))
}
