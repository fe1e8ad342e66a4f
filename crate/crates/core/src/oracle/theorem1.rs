//! End-to-end check of the mixture aggregation bound on synthetic data.

use crate::error::{Result, VendiError};
use crate::ingest::pair;
use crate::scores::group_conditional_report;

use super::mixture::{sample_mixture, ConditionalGenerator, MixtureSpec};

/// Slack added to the bound before declaring a failure.
pub const PASS_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Config {
    pub n: usize,
    /// Prompt-kernel bandwidth; also the σ in the bound.
    pub sigma: f64,
    pub sigma_x: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub conditional_entropy: f64,
    pub aggregate: f64,
    pub group_entropies: Vec<f64>,
    /// `|H(X|T) - aggregate|`.
    pub gap: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub pass: bool,
}

/// Samples prompts from `spec` and outputs from `x_given_g`, then compares
/// the measured aggregation gap (empirical weights) with the bound evaluated
/// on the population statistics of `spec`.
pub fn check_theorem1(
    spec: &MixtureSpec,
    x_given_g: &ConditionalGenerator,
    config: &Theorem1Config,
) -> Result<Theorem1Report> {
    if !(config.alpha >= 2.0) {
        return Err(VendiError::Param(format!(
            "the aggregation bound needs alpha >= 2, got {}",
            config.alpha
        )));
    }
    let (t, labels) = sample_mixture(spec, config.n)?;
    let x = x_given_g.sample(&labels)?;
    let d = pair(x, t, Some(labels))?;
    let stats = spec.stats(config.sigma);
    let report =
        group_conditional_report(&d, config.sigma_x, config.sigma, config.alpha, Some(&stats))?;
    let bound = report.bound.expect("mixture statistics supplied");
    let gap = report.gap();
    Ok(Theorem1Report {
        conditional_entropy: report.conditional_entropy_joint,
        aggregate: report.aggregate,
        group_entropies: report.per_group.iter().map(|g| g.entropy).collect(),
        gap,
        bound: bound.value,
        vacuous: bound.vacuous,
        pass: bound.vacuous || gap <= bound.value + PASS_SLACK,
    })
}
