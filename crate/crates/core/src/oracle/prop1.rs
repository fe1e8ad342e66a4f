//! Explicit-feature check that `K_X ⊙ K_T / n` and the joint kernel covariance
//! `(1/n) Σ (φ_X(x_i) ⊗ φ_T(t_i))(φ_X(x_i) ⊗ φ_T(t_i))ᵀ` share their nonzero
//! spectrum, using the cosine kernel's finite feature map `φ(x) = x/‖x‖`.

use crate::error::{Result, VendiError};
use crate::ingest::{EmbeddingSet, PairedDataset};
use crate::kernel::{cosine_kernel, hadamard, trace_normalize};
use crate::spectrum::{eigen_spectrum, renyi_entropy};

use super::jacobi::jacobi_eigen;

/// Largest joint feature dimension accepted.
pub const MAX_FEATURE_DIM: usize = 4096;
/// Dimensions up to this size are diagonalized with Jacobi rotations.
pub const JACOBI_MAX_DIM: usize = 512;
/// Discrepancy above which [`check_proposition1`] reports a failure.
pub const FAILURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCovariance {
    pub dim: usize,
    /// Row-major `dim × dim`.
    pub matrix: Vec<f64>,
}

impl FeatureCovariance {
    /// Eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim <= JACOBI_MAX_DIM {
            jacobi_eigen(self.dim, &self.matrix).0
        } else {
            let m = faer::MatRef::from_row_major_slice(&self.matrix, self.dim, self.dim);
            let mut v = m
                .self_adjoint_eigenvalues(faer::Side::Lower)
                .expect("symmetric eigensolve");
            v.reverse();
            v
        }
    }
}

fn unit_features(set: &EmbeddingSet) -> Result<Vec<Vec<f64>>> {
    set.rows()
        .enumerate()
        .map(|(i, r)| {
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(VendiError::DataAt {
                    row: i,
                    col: 0,
                    msg: "zero-norm row has no cosine feature".into(),
                });
            }
            Ok(r.iter().map(|v| v / norm).collect())
        })
        .collect()
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

fn covariance(features: &[Vec<f64>]) -> FeatureCovariance {
    let dim = features[0].len();
    let n = features.len() as f64;
    let mut matrix = vec![0.0; dim * dim];
    for f in features {
        for i in 0..dim {
            for j in 0..dim {
                matrix[i * dim + j] += f[i] * f[j];
            }
        }
    }
    for v in &mut matrix {
        *v /= n;
    }
    FeatureCovariance { dim, matrix }
}

/// `(1/n) Σ φ_i φ_iᵀ` for cosine features, with `φ_i = φ_X(x_i) ⊗ φ_T(t_i)`
/// when `t` is given.
pub fn explicit_feature_covariance(
    x: &EmbeddingSet,
    t: Option<&EmbeddingSet>,
) -> Result<FeatureCovariance> {
    let fx = unit_features(x)?;
    let features = match t {
        None => fx,
        Some(t) => {
            if t.n() != x.n() {
                return Err(VendiError::Pair {
                    x_rows: x.n(),
                    t_rows: t.n(),
                });
            }
            let dim = x.dim() * t.dim();
            if dim > MAX_FEATURE_DIM {
                return Err(VendiError::Param(format!(
                    "joint feature dimension {dim} exceeds {MAX_FEATURE_DIM}"
                )));
            }
            let ft = unit_features(t)?;
            fx.iter().zip(&ft).map(|(a, b)| kron(a, b)).collect()
        }
    };
    if features[0].len() > MAX_FEATURE_DIM {
        return Err(VendiError::Param(format!(
            "feature dimension {} exceeds {MAX_FEATURE_DIM}",
            features[0].len()
        )));
    }
    Ok(covariance(&features))
}

/// Rényi entropy written out independently of the `spectrum` module.
pub fn reference_entropy(eigenvalues: &[f64], alpha: f64) -> f64 {
    let max = eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = eigenvalues.len() as f64 * f64::EPSILON * max;
    let p: Vec<f64> = eigenvalues
        .iter()
        .map(|&v| if v < cutoff { 0.0 } else { v })
        .collect();
    let total: f64 = p.iter().sum();
    if alpha == 1.0 {
        -p.iter()
            .map(|v| v / total)
            .filter(|&v| v > 0.0)
            .map(|v| v * v.ln())
            .sum::<f64>()
    } else {
        p.iter().map(|v| (v / total).powf(alpha)).sum::<f64>().ln() / (1.0 - alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report {
    /// Max deviation between the sorted leading eigenvalues of the two sides,
    /// including the residual mass past `min(n, D)`.
    pub eigenvalue_discrepancy: f64,
    /// `|H(X|T)_kernel - H(X|T)_features|`.
    pub conditional_entropy_gap: f64,
    /// `|I(X;T)_kernel - I(X;T)_features|`.
    pub mutual_information_gap: f64,
}

impl Prop1Report {
    pub fn worst(&self) -> f64 {
        self.eigenvalue_discrepancy
            .max(self.conditional_entropy_gap)
            .max(self.mutual_information_gap)
    }
}

fn spectrum_discrepancy(kernel: &[f64], features: &[f64]) -> f64 {
    let r = kernel.len().min(features.len());
    let head = (0..r)
        .map(|i| (kernel[i] - features[i]).abs())
        .fold(0.0, f64::max);
    let tail = kernel[r..]
        .iter()
        .chain(&features[r..])
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    head.max(tail)
}

/// Compares the kernel route (cosine kernels, Hadamard product, dense
/// eigensolve) against explicit Kronecker features, and the conditional
/// entropy and mutual information computed both ways at order `alpha`.
pub fn check_proposition1(d: &PairedDataset, alpha: f64) -> Result<Prop1Report> {
    let kx = cosine_kernel(&d.x)?;
    let kt = cosine_kernel(&d.t)?;
    let joint = trace_normalize(hadamard(&kx, &kt)?);
    let (kx, kt) = (trace_normalize(kx), trace_normalize(kt));
    let sj = eigen_spectrum(&joint, false)?;
    let sx = eigen_spectrum(&kx, false)?;
    let st = eigen_spectrum(&kt, false)?;

    let cj = explicit_feature_covariance(&d.x, Some(&d.t))?.eigenvalues();
    let cx = explicit_feature_covariance(&d.x, None)?.eigenvalues();
    let ct = explicit_feature_covariance(&d.t, None)?.eigenvalues();

    let eigenvalue_discrepancy = spectrum_discrepancy(sj.eigenvalues(), &cj)
        .max(spectrum_discrepancy(sx.eigenvalues(), &cx))
        .max(spectrum_discrepancy(st.eigenvalues(), &ct));

    let (hj, hx, ht) = (
        renyi_entropy(&sj, alpha)?.value,
        renyi_entropy(&sx, alpha)?.value,
        renyi_entropy(&st, alpha)?.value,
    );
    let (fj, fx, ft) = (
        reference_entropy(&cj, alpha),
        reference_entropy(&cx, alpha),
        reference_entropy(&ct, alpha),
    );
    let report = Prop1Report {
        eigenvalue_discrepancy,
        conditional_entropy_gap: ((hj - ht) - (fj - ft)).abs(),
        mutual_information_gap: ((hx + ht - hj) - (fx + ft - fj)).abs(),
    };
    if report.worst() > FAILURE_TOL {
        return Err(VendiError::OracleFailure(format!(
            "kernel and feature routes disagree: {report:?}"
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::pair;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingSet {
        EmbeddingSet::new(
            n,
            d,
            (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn repeated_unit_vector() {
        let x = EmbeddingSet::new(4, 2, vec![0.6, 0.8, 0.6, 0.8, 0.6, 0.8, 0.6, 0.8]).unwrap();
        let c = explicit_feature_covariance(&x, None).unwrap();
        let expected = [0.36, 0.48, 0.48, 0.64];
        for (a, b) in c.matrix.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn orthonormal_pair() {
        let x = EmbeddingSet::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let c = explicit_feature_covariance(&x, None).unwrap();
        assert_eq!(c.matrix, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn joint_dimension_guard() {
        let x = EmbeddingSet::new(2, 65, vec![1.0; 130]).unwrap();
        assert!(matches!(
            explicit_feature_covariance(&x, Some(&x)),
            Err(VendiError::Param(_))
        ));
    }

    #[test]
    fn single_sample() {
        let x = EmbeddingSet::from_rows(&[[1.0, 2.0]]).unwrap();
        let t = EmbeddingSet::from_rows(&[[3.0, -1.0, 0.5]]).unwrap();
        let r = check_proposition1(&pair(x, t, None).unwrap(), 1.0).unwrap();
        assert!(r.worst() <= 1e-12);
    }

    #[test]
    fn random_small_datasets() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x = random(&mut rng, 16, 3);
        let t = random(&mut rng, 16, 4);
        let cj = explicit_feature_covariance(&x, Some(&t)).unwrap();
        assert_eq!(cj.dim, 12);
        let d = pair(x, t, None).unwrap();
        for alpha in [0.5, 1.0, 2.0, 4.0] {
            let r = check_proposition1(&d, alpha).unwrap();
            assert!(r.worst() <= 1e-9, "{r:?}");
        }
        let x8 = random(&mut rng, 8, 5);
        let t8 = random(&mut rng, 8, 2);
        assert!(
            check_proposition1(&pair(x8, t8, None).unwrap(), 2.0)
                .unwrap()
                .worst()
                <= 1e-8
        );
    }

    #[test]
    fn identical_modalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random(&mut rng, 10, 3);
        let d = pair(x.clone(), x.clone(), None).unwrap();
        let r = check_proposition1(&d, 1.0).unwrap();
        assert!(r.worst() <= 1e-8);
        // the joint kernel is the squared-entry kernel
        let k = crate::kernel::cosine_kernel(&x).unwrap();
        let j = crate::kernel::hadamard(&k, &k).unwrap();
        for (a, b) in j.values().iter().zip(k.values()) {
            assert_abs_diff_eq!(*a, b * b, epsilon = 1e-15);
        }
    }
}
