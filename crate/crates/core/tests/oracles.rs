use vendi_core::oracle::jacobi_eigen;
use vendi_core::spectrum::EigenSpectrum;
use vendi_core::KernelMatrix;

/// Symmetric tridiagonal `[2, -1]` Toeplitz matrix, whose eigenvalues are
/// `2 - 2 cos(kπ/(n+1))`.
fn toeplitz(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 2.0;
        if i + 1 < n {
            m[i * n + i + 1] = -1.0;
            m[(i + 1) * n + i] = -1.0;
        }
    }
    m
}

#[test]
fn jacobi_recovers_closed_form_spectrum() {
    let n = 8;
    let (values, vectors) = jacobi_eigen(n, &toeplitz(n));
    let mut expected: Vec<f64> = (1..=n)
        .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
        .collect();
    expected.sort_by(|a, b| b.total_cmp(a));
    for (v, e) in values.iter().zip(&expected) {
        assert!((v - e).abs() <= 1e-9, "{v} vs {e}");
    }
    // Columns are orthonormal.
    for a in 0..n {
        for b in 0..n {
            let dot: f64 = (0..n)
                .map(|r| vectors[r * n + a] * vectors[r * n + b])
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((dot - want).abs() <= 1e-9);
        }
    }
}

#[test]
fn jacobi_agrees_with_dense_solver() {
    // A unit-diagonal PSD kernel on 8 points of a line.
    let n = 8;
    let values: Vec<f64> = (0..n * n)
        .map(|p| {
            let (i, j) = ((p / n) as f64, (p % n) as f64);
            (-(i - j).powi(2) / 4.0).exp()
        })
        .collect();
    let k = KernelMatrix::from_values(n, values.clone()).unwrap();
    let dense =
        vendi_core::spectrum::eigen_spectrum(&vendi_core::kernel::trace_normalize(k), false)
            .unwrap();
    let (jac, _) = jacobi_eigen(n, &values);
    let jac: Vec<f64> = jac.iter().map(|v| v / n as f64).collect();
    let reference = EigenSpectrum::from_eigenvalues(jac).unwrap();
    for (a, b) in dense.eigenvalues().iter().zip(reference.eigenvalues()) {
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}
