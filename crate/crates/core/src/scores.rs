//! Vendi, Conditional-Vendi and Information-Vendi scores.
//!
//! With `K_X`, `K_T` the unit-diagonal kernels of generated samples and
//! prompts, and `H_α` the order-α matrix entropy of a trace-normalized kernel:
//!
//! ```text
//! H(X|T) = H_α(K_X ⊙ K_T / n) - H_α(K_T / n)
//! I(X;T) = H_α(K_X / n) + H_α(K_T / n) - H_α(K_X ⊙ K_T / n)
//! Vendi = exp H(X) = exp H(X|T) · exp I(X;T)
//! ```

use crate::error::{Result, VendiError};
use crate::ingest::{EmbeddingSet, PairedDataset};
use crate::kernel::{gaussian_kernel, hadamard, trace_normalize, KernelMatrix};
use crate::par;
use crate::spectrum::kernel_entropy;

/// Slack allowed on quantities that are nonnegative in exact arithmetic.
pub const NONNEG_TOL: f64 = 1e-8;

/// Relative tolerance on `conditional · information = vendi`.
pub const PRODUCT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub order: f64,
    pub n: usize,
    pub sigma_x: f64,
    pub sigma_t: f64,
    pub vendi_x: f64,
    pub vendi_t: f64,
    pub conditional_vendi: f64,
    pub information_vendi: f64,
    pub h_x: f64,
    pub h_t: f64,
    pub h_xt: f64,
    pub h_x_given_t: f64,
    pub i_xt: f64,
    /// Nonfatal findings, e.g. a slightly negative mutual information.
    pub warnings: Vec<String>,
}

impl ScoreReport {
    /// `|conditional · information / vendi - 1|`.
    pub fn product_residual(&self) -> f64 {
        (self.conditional_vendi * self.information_vendi / self.vendi_x - 1.0).abs()
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(VendiError::Param(format!(
            "entropy order must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

fn entropy_of(set: &EmbeddingSet, sigma: f64, alpha: f64) -> Result<f64> {
    let k = trace_normalize(gaussian_kernel(set, sigma)?);
    Ok(kernel_entropy(&k, alpha)?.value)
}

/// `exp H_α(K/n)` for the Gaussian kernel of `x`; lies in `[1, n]`.
pub fn vendi(x: &EmbeddingSet, sigma: f64, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    Ok(entropy_of(x, sigma, alpha)?.exp())
}

struct PairKernels {
    kx: KernelMatrix,
    kt: KernelMatrix,
    joint: KernelMatrix,
}

fn pair_kernels(d: &PairedDataset, sigma_x: f64, sigma_t: f64) -> Result<PairKernels> {
    let (kx, kt) = par::join(
        || gaussian_kernel(&d.x, sigma_x),
        || gaussian_kernel(&d.t, sigma_t),
    );
    let (kx, kt) = (kx?, kt?);
    let joint = trace_normalize(hadamard(&kx, &kt)?);
    Ok(PairKernels {
        kx: trace_normalize(kx),
        kt: trace_normalize(kt),
        joint,
    })
}

/// `(H_α(joint), H_α(T))`.
fn joint_and_prompt_entropy(
    d: &PairedDataset,
    sigma_x: f64,
    sigma_t: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    check_order(alpha)?;
    let k = pair_kernels(d, sigma_x, sigma_t)?;
    let (hj, ht) = par::join(
        || kernel_entropy(&k.joint, alpha),
        || kernel_entropy(&k.kt, alpha),
    );
    Ok((hj?.value, ht?.value))
}

/// `exp(H_α(K_X ⊙ K_T / n) - H_α(K_T / n))`: diversity of the generated
/// samples not explained by prompt variety.
pub fn conditional_vendi(d: &PairedDataset, sigma_x: f64, sigma_t: f64, alpha: f64) -> Result<f64> {
    let (hj, ht) = joint_and_prompt_entropy(d, sigma_x, sigma_t, alpha)?;
    Ok((hj - ht).exp())
}

/// `exp(H_α(K_X/n) + H_α(K_T/n) - H_α(K_X ⊙ K_T / n))`: how strongly sample
/// diversity follows prompt diversity.
pub fn information_vendi(d: &PairedDataset, sigma_x: f64, sigma_t: f64, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    let k = pair_kernels(d, sigma_x, sigma_t)?;
    let (hx, (ht, hj)) = par::join(
        || kernel_entropy(&k.kx, alpha),
        || {
            par::join(
                || kernel_entropy(&k.kt, alpha),
                || kernel_entropy(&k.joint, alpha),
            )
        },
    );
    Ok((hx?.value + ht?.value - hj?.value).exp())
}

/// All scores from exactly three eigensolves.
///
/// Fails when the conditional entropy is below `-1e-8` or the product identity
/// misses by more than `1e-6` relative. A mutual information below `-1e-8`
/// is reported in `warnings`: for orders above one the matrix entropy is not
/// subadditive, so it can occur on valid inputs.
pub fn score_report(
    d: &PairedDataset,
    sigma_x: f64,
    sigma_t: f64,
    alpha: f64,
) -> Result<ScoreReport> {
    check_order(alpha)?;
    let k = pair_kernels(d, sigma_x, sigma_t)?;
    let (hx, (ht, hxt)) = par::join(
        || kernel_entropy(&k.kx, alpha),
        || {
            par::join(
                || kernel_entropy(&k.kt, alpha),
                || kernel_entropy(&k.joint, alpha),
            )
        },
    );
    let (h_x, h_t, h_xt) = (hx?.value, ht?.value, hxt?.value);
    let h_x_given_t = h_xt - h_t;
    let i_xt = h_x + h_t - h_xt;

    let report = ScoreReport {
        order: alpha,
        n: d.n(),
        sigma_x,
        sigma_t,
        vendi_x: h_x.exp(),
        vendi_t: h_t.exp(),
        conditional_vendi: h_x_given_t.exp(),
        information_vendi: i_xt.exp(),
        h_x,
        h_t,
        h_xt,
        h_x_given_t,
        i_xt,
        warnings: if i_xt < -NONNEG_TOL {
            vec![format!(
                "mutual information {i_xt:e} is negative at order {alpha}"
            )]
        } else {
            Vec::new()
        },
    };
    if h_x_given_t < -NONNEG_TOL {
        return Err(VendiError::Numerical(format!(
            "conditional entropy {h_x_given_t:e} is negative"
        )));
    }
    if report.product_residual() > PRODUCT_TOL {
        return Err(VendiError::Numerical(format!(
            "conditional x information deviates from vendi by {:e}",
            report.product_residual()
        )));
    }
    Ok(report)
}

/// Population mixture statistics of the prompt distribution, used for the
/// aggregation bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureStats {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// `E‖T - μ_i‖²` per component (trace of the covariance).
    pub total_variances: Vec<f64>,
    /// Gaussian bandwidth the bound refers to.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupScore {
    pub group: usize,
    pub weight: f64,
    pub entropy: f64,
    pub vendi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    /// `+∞` when the bound is vacuous.
    pub value: f64,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupScoreReport {
    pub order: f64,
    pub per_group: Vec<GroupScore>,
    /// f-mean of the per-group entropies.
    pub aggregate: f64,
    /// `H_α(X|T)` on the full dataset.
    pub conditional_entropy_joint: f64,
    pub bound: Option<BoundValue>,
}

impl GroupScoreReport {
    pub fn gap(&self) -> f64 {
        (self.conditional_entropy_joint - self.aggregate).abs()
    }
}

/// Generalized mean of group entropies under `f(z) = exp((1-α) z)` with
/// weights `ω_i^α / Σ ω_j^α`.
///
/// At `α = 1` the map is constant; the `α → 1` limit, the `ω`-weighted
/// arithmetic mean, is used instead.
pub fn f_mean(weights: &[f64], entropies: &[f64], alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if weights.len() != entropies.len() || weights.is_empty() {
        return Err(VendiError::Param(
            "f_mean needs one weight per entropy".into(),
        ));
    }
    if alpha == 1.0 {
        let total: f64 = weights.iter().sum();
        return Ok(weights
            .iter()
            .zip(entropies)
            .map(|(w, h)| w * h)
            .sum::<f64>()
            / total);
    }
    let powered: Vec<f64> = weights.iter().map(|w| w.powf(alpha)).collect();
    let total: f64 = powered.iter().sum();
    // log-sum-exp keeps large (1-α)·H from overflowing
    let logs: Vec<f64> = powered
        .iter()
        .zip(entropies)
        .map(|(p, h)| (p / total).ln() + (1.0 - alpha) * h)
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    Ok(lse / (1.0 - alpha))
}

/// Per-group entropies, their f-mean, and the joint conditional entropy.
///
/// Group weights are empirical frequencies; each group's entropy uses only its
/// own `x` rows with the global `sigma_x`. When `mixture` is given, the
/// aggregation bound (defined for `α ≥ 2`) is attached.
pub fn group_conditional_report(
    d: &PairedDataset,
    sigma_x: f64,
    sigma_t: f64,
    alpha: f64,
    mixture: Option<&MixtureStats>,
) -> Result<GroupScoreReport> {
    check_order(alpha)?;
    let labels = d
        .labels()
        .ok_or_else(|| VendiError::Param("group report needs group labels".into()))?;
    let bound = mixture
        .map(|m| {
            theorem1_bound(&m.weights, &m.means, &m.total_variances, m.sigma, alpha).map(|value| {
                BoundValue {
                    value,
                    vacuous: value.is_infinite(),
                }
            })
        })
        .transpose()?;

    let m = d.num_groups();
    let n = d.n() as f64;
    let members: Vec<Vec<usize>> = (1..=m)
        .map(|g| (0..d.n()).filter(|&i| labels[i] == g).collect())
        .collect();
    let per_group = par::map_indices(m, |gi| -> Result<GroupScore> {
        let rows = d.x.select_rows(&members[gi])?;
        let h = entropy_of(&rows, sigma_x, alpha)?;
        Ok(GroupScore {
            group: gi + 1,
            weight: members[gi].len() as f64 / n,
            entropy: h,
            vendi: h.exp(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let weights: Vec<f64> = per_group.iter().map(|g| g.weight).collect();
    let entropies: Vec<f64> = per_group.iter().map(|g| g.entropy).collect();
    let aggregate = f_mean(&weights, &entropies, alpha)?;
    let (hj, ht) = joint_and_prompt_entropy(d, sigma_x, sigma_t, alpha)?;

    Ok(GroupScoreReport {
        order: alpha,
        per_group,
        aggregate,
        conditional_entropy_joint: hj - ht,
        bound,
    })
}

/// Upper bound on `|H_α(X|T) - f-mean|` for a prompt mixture:
///
/// ```text
/// 2 g(8 Σ_i ω_i σ_i²/σ² + 32 Σ_{i>j} ω_i exp(-‖μ_i - μ_j‖²/σ²)),
/// g(z) = α/(α-1) · log(1 / (1 - z/‖ω‖_α))
/// ```
///
/// Returns `+∞` when the argument of `g` reaches `‖ω‖_α`.
pub fn theorem1_bound(
    weights: &[f64],
    means: &[Vec<f64>],
    total_variances: &[f64],
    sigma: f64,
    alpha: f64,
) -> Result<f64> {
    if !(alpha >= 2.0 && alpha.is_finite()) {
        return Err(VendiError::Param(format!(
            "the aggregation bound holds for orders alpha >= 2, got {alpha}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(VendiError::Param(format!(
            "bandwidth must be positive, got {sigma}"
        )));
    }
    let m = weights.len();
    if m == 0 || means.len() != m || total_variances.len() != m {
        return Err(VendiError::Param(
            "weights, means and variances must have the same nonzero length".into(),
        ));
    }
    if weights.iter().any(|w| !(*w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(VendiError::Param(
            "weights must be positive and sum to 1".into(),
        ));
    }
    if total_variances.iter().any(|v| !(*v >= 0.0)) {
        return Err(VendiError::Param(
            "total variances must be nonnegative".into(),
        ));
    }
    let s2 = sigma * sigma;
    let spread: f64 = weights
        .iter()
        .zip(total_variances)
        .map(|(w, v)| w * v / s2)
        .sum();
    let mut overlap = 0.0;
    for i in 1..m {
        for j in 0..i {
            if means[i].len() != means[j].len() {
                return Err(VendiError::Param(
                    "component means differ in dimension".into(),
                ));
            }
            let d2: f64 = means[i]
                .iter()
                .zip(&means[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            overlap += weights[i] * (-d2 / s2).exp();
        }
    }
    let z = 8.0 * spread + 32.0 * overlap;
    if z == 0.0 {
        return Ok(0.0);
    }
    let omega_norm = weights
        .iter()
        .map(|w| w.powf(alpha))
        .sum::<f64>()
        .powf(1.0 / alpha);
    if z >= omega_norm {
        return Ok(f64::INFINITY);
    }
    let g = alpha / (alpha - 1.0) * -(-z / omega_norm).ln_1p();
    Ok(2.0 * g)
}
