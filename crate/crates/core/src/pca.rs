//! Principal component analysis via a cyclic Jacobi eigensolver.
//!
//! The covariance matrix here is small (feature dimension × feature
//! dimension), so the classic Jacobi rotation scheme is a good fit: simple,
//! allocation-light, and accurate to near machine precision for symmetric
//! matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Sweep cap for the Jacobi iteration; convergence virtually always lands
/// within a handful of sweeps for our matrix sizes.
const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal threshold: iteration stops once the off-diagonal
/// Frobenius norm drops to 1e-12 of the input's Frobenius norm.
const OFF_DIAG_TOL: f64 = 1e-12;

/// A fitted PCA basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Column means of the training data.
    pub mean: Vec<f64>,
    /// Retained components, one per row (`q` rows of width `D`), unit
    /// length, mutually orthogonal, ordered by descending eigenvalue. Each
    /// row's largest-magnitude entry is positive (earliest such entry on
    /// ties).
    pub components: Matrix,
    /// Eigenvalues paired with `components`, non-negative and descending.
    pub eigenvalues: Vec<f64>,
    /// Trace of the covariance matrix, i.e. the total variance available.
    pub total_variance: f64,
}

impl PcaModel {
    /// Number of retained components.
    pub fn q(&self) -> usize {
        self.components.n_rows()
    }

    /// Input dimension the model was fitted on.
    pub fn dim(&self) -> usize {
        self.components.n_cols()
    }
}

/// Fits a `q`-component PCA on the rows of `data`.
///
/// The covariance uses the unbiased `1/(m-1)` normalizer. Eigenvalues below
/// zero by rounding are clamped to zero. Requires `m >= 2` rows and
/// `1 <= q <= min(m, D)`.
pub fn fit_pca(data: &Matrix, q: usize) -> Result<PcaModel> {
    let m = data.n_rows();
    let d = data.n_cols();
    if m < 2 {
        return Err(Error::TooFewRows { rows: m });
    }
    let q_max = m.min(d);
    if q < 1 || q > q_max {
        return Err(Error::BadComponentCount { q, max: q_max });
    }

    let mut mean = vec![0.0; d];
    for row in data.rows() {
        for (j, &x) in row.iter().enumerate() {
            mean[j] += x;
        }
    }
    for entry in &mut mean {
        *entry /= m as f64;
    }

    // Upper triangle of C = Xc^T Xc / (m - 1), mirrored to full storage.
    let mut cov = Matrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let mut acc = 0.0;
            for row in data.rows() {
                acc += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
            let value = acc / (m - 1) as f64;
            cov.set(a, b, value);
            cov.set(b, a, value);
        }
    }
    let total_variance: f64 = (0..d).map(|i| cov.get(i, i)).sum();

    let (mut eigenvalues, vectors, order) = jacobi_eigen(&cov);
    debug_assert!(
        (eigenvalues.iter().sum::<f64>() - total_variance).abs()
            <= 1e-9 * total_variance.abs().max(1.0),
        "eigenvalue sum drifted from the covariance trace"
    );
    for value in &mut eigenvalues {
        if *value < 0.0 {
            *value = 0.0;
        }
    }

    let mut components = Matrix::zeros(q, d);
    for (rank, &src) in order.iter().take(q).enumerate() {
        let row = components.row_mut(rank);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = vectors.get(j, src);
        }
        fix_sign(row);
    }
    eigenvalues.truncate(q);

    Ok(PcaModel { mean, components, eigenvalues, total_variance })
}

/// Projects rows of `data` onto the model's components, producing an
/// `n x q` score matrix.
pub fn project(model: &PcaModel, data: &Matrix) -> Result<Matrix> {
    if data.n_cols() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: data.n_cols() });
    }
    let q = model.q();
    let mut out = Matrix::zeros(data.n_rows(), q);
    for i in 0..data.n_rows() {
        let row = data.row(i);
        for c in 0..q {
            let comp = model.components.row(c);
            let mut acc = 0.0;
            for j in 0..model.dim() {
                acc += (row[j] - model.mean[j]) * comp[j];
            }
            out.set(i, c, acc);
        }
    }
    Ok(out)
}

/// Maps score rows back to the original space: `scores * components + mean`.
pub fn reconstruct(model: &PcaModel, scores: &Matrix) -> Result<Matrix> {
    if scores.n_cols() != model.q() {
        return Err(Error::DimensionMismatch { expected: model.q(), found: scores.n_cols() });
    }
    let d = model.dim();
    let mut out = Matrix::zeros(scores.n_rows(), d);
    for i in 0..scores.n_rows() {
        let score = scores.row(i);
        let row = out.row_mut(i);
        for (j, slot) in row.iter_mut().enumerate() {
            let mut acc = model.mean[j];
            for (c, &s) in score.iter().enumerate() {
                acc += s * model.components.get(c, j);
            }
            *slot = acc;
        }
    }
    Ok(out)
}

/// Flips a component row so its largest-magnitude entry is positive; the
/// earliest entry wins magnitude ties.
fn fix_sign(row: &mut [f64]) {
    let mut best = 0;
    for (j, &x) in row.iter().enumerate() {
        if x.abs() > row[best].abs() {
            best = j;
        }
    }
    if row[best] < 0.0 {
        for x in row {
            *x = -*x;
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvector_columns, order)` where `order[rank]`
/// is the original index of the rank-th largest eigenvalue; ties keep the
/// smaller original index first. `eigenvalues` is already in ranked order.
pub(crate) fn jacobi_eigen(sym: &Matrix) -> (Vec<f64>, Matrix, Vec<usize>) {
    let d = sym.n_rows();
    debug_assert_eq!(d, sym.n_cols());
    let mut a = sym.clone();
    let mut v = Matrix::zeros(d, d);
    for i in 0..d {
        v.set(i, i, 1.0);
    }

    let norm = frobenius(sym);
    let threshold = OFF_DIAG_TOL * norm;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..d.saturating_sub(1) {
            for q in p + 1..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let raw: Vec<f64> = (0..d).map(|i| a.get(i, i)).collect();
    let mut order: Vec<usize> = (0..d).collect();
    // Stable sort: equal eigenvalues keep ascending original index.
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let ranked: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    (ranked, v, order)
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + libm::sqrt(theta * theta + 1.0))
    } else {
        -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;
    let tau = s / (1.0 + c);

    let d = a.n_rows();
    a.set(p, p, a.get(p, p) - t * apq);
    a.set(q, q, a.get(q, q) + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for i in 0..d {
        if i == p || i == q {
            continue;
        }
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        let new_ip = aip - s * (aiq + tau * aip);
        let new_iq = aiq + s * (aip - tau * aiq);
        a.set(i, p, new_ip);
        a.set(p, i, new_ip);
        a.set(i, q, new_iq);
        a.set(q, i, new_iq);
    }
    for i in 0..d {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip - s * (viq + tau * vip));
        v.set(i, q, viq + s * (vip - tau * viq));
    }
}

fn frobenius(m: &Matrix) -> f64 {
    libm::sqrt(m.as_slice().iter().map(|x| x * x).sum())
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let d = m.n_rows();
    let mut acc = 0.0;
    for p in 0..d {
        for q in 0..d {
            if p != q {
                let x = m.get(p, q);
                acc += x * x;
            }
        }
    }
    libm::sqrt(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn colinear_points_yield_diagonal_spectrum() {
        let data = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let model = fit_pca(&data, 2).unwrap();
        assert!((model.eigenvalues[0] - 2.0).abs() <= TOL);
        assert!(model.eigenvalues[1].abs() <= TOL);
        let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
        assert!((model.components.get(0, 0) - inv_sqrt2).abs() <= TOL);
        assert!((model.components.get(0, 1) - inv_sqrt2).abs() <= TOL);
        assert!((model.total_variance - 2.0).abs() <= TOL);
    }

    #[test]
    fn rank_one_data_reconstructs_exactly_from_one_component() {
        let data = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let model = fit_pca(&data, 1).unwrap();
        let scores = project(&model, &data).unwrap();
        assert!((scores.get(0, 0) + libm::sqrt(2.0)).abs() <= 1e-9);
        assert!(scores.get(1, 0).abs() <= 1e-9);
        assert!((scores.get(2, 0) - libm::sqrt(2.0)).abs() <= 1e-9);
        let back = reconstruct(&model, &scores).unwrap();
        for i in 0..data.n_rows() {
            for j in 0..data.n_cols() {
                assert!((back.get(i, j) - data.get(i, j)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn identical_rows_fall_back_to_standard_basis() {
        let data = Matrix::from_rows(&vec![vec![3.0, 4.0, 5.0]; 4]);
        let model = fit_pca(&data, 2).unwrap();
        assert_eq!(model.total_variance, 0.0);
        assert_eq!(model.eigenvalues, vec![0.0, 0.0]);
        assert_eq!(model.components.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(model.components.row(1), &[0.0, 1.0, 0.0]);
        let scores = project(&model, &data).unwrap();
        assert!(scores.as_slice().iter().all(|&x| x == 0.0));
        let back = reconstruct(&model, &scores).unwrap();
        assert_eq!(back.row(0), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn sign_convention_makes_leading_entry_positive() {
        // Points spread along (-3, 1): the dominant eigenvector's largest
        // entry would come out negative without the sign fix.
        let data = Matrix::from_rows(&[vec![0.0, 0.0], vec![-3.0, 1.0], vec![-6.0, 2.0]]);
        let model = fit_pca(&data, 1).unwrap();
        let comp = model.components.row(0);
        let inv_sqrt10 = 1.0 / libm::sqrt(10.0);
        assert!((comp[0] - 3.0 * inv_sqrt10).abs() <= TOL);
        assert!((comp[1] + inv_sqrt10).abs() <= TOL);
    }

    #[test]
    fn jacobi_matches_hand_solved_spectra() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (vals, _, _) = jacobi_eigen(&m);
        assert!((vals[0] - 3.0).abs() <= TOL);
        assert!((vals[1] - 1.0).abs() <= TOL);

        // Block diagonal: a 1x1 block holding 2 and a 2x2 block whose
        // eigenvalues are 6 +- 5.
        let m = Matrix::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 3.0, 4.0],
            vec![0.0, 4.0, 9.0],
        ]);
        let (vals, _, _) = jacobi_eigen(&m);
        assert!((vals[0] - 11.0).abs() <= 1e-10);
        assert!((vals[1] - 2.0).abs() <= 1e-10);
        assert!((vals[2] - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn equal_eigenvalues_keep_original_index_order() {
        let m = Matrix::from_rows(&[vec![5.0, 0.0], vec![0.0, 5.0]]);
        let (vals, _, order) = jacobi_eigen(&m);
        assert_eq!(vals, vec![5.0, 5.0]);
        assert_eq!(order, vec![0, 1]);
    }

    #[test]
    fn preconditions_are_enforced() {
        let one_row = Matrix::from_rows(&[vec![1.0, 2.0]]);
        assert_eq!(fit_pca(&one_row, 1), Err(Error::TooFewRows { rows: 1 }));

        let data = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(fit_pca(&data, 0), Err(Error::BadComponentCount { q: 0, max: 2 }));
        assert_eq!(fit_pca(&data, 3), Err(Error::BadComponentCount { q: 3, max: 2 }));

        let model = fit_pca(&data, 1).unwrap();
        let narrow = Matrix::from_rows(&[vec![1.0]]);
        assert!(matches!(project(&model, &narrow), Err(Error::DimensionMismatch { .. })));
        let wide_scores = Matrix::from_rows(&[vec![1.0, 2.0]]);
        assert!(matches!(reconstruct(&model, &wide_scores), Err(Error::DimensionMismatch { .. })));
    }

    mod properties {
        use super::*;
        use proptest::collection::vec as pvec;
        use proptest::prelude::*;

        fn tall_matrix() -> impl Strategy<Value = Matrix> {
            (6usize..10, 1usize..5).prop_flat_map(|(rows, cols)| {
                pvec(pvec(-50.0..50.0f64, cols..=cols), rows..=rows)
                    .prop_map(|r| Matrix::from_rows(&r))
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn full_q_round_trip_recovers_data(data in tall_matrix()) {
                let q = data.n_cols();
                let model = fit_pca(&data, q).unwrap();
                let back = reconstruct(&model, &project(&model, &data).unwrap()).unwrap();
                for i in 0..data.n_rows() {
                    for j in 0..data.n_cols() {
                        prop_assert!((back.get(i, j) - data.get(i, j)).abs() <= 1e-9);
                    }
                }
            }

            #[test]
            fn components_are_orthonormal_and_spectrum_sorted(data in tall_matrix()) {
                let q = data.n_cols();
                let model = fit_pca(&data, q).unwrap();
                for a in 0..q {
                    for b in 0..q {
                        let dot: f64 = model.components.row(a).iter()
                            .zip(model.components.row(b))
                            .map(|(x, y)| x * y)
                            .sum();
                        let expected = if a == b { 1.0 } else { 0.0 };
                        prop_assert!((dot - expected).abs() <= 1e-9);
                    }
                }
                for w in model.eigenvalues.windows(2) {
                    prop_assert!(w[0] >= w[1]);
                }
                prop_assert!(model.eigenvalues.iter().all(|&l| l >= 0.0));
                let sum: f64 = model.eigenvalues.iter().sum();
                prop_assert!((sum - model.total_variance).abs() <= 1e-9 * model.total_variance.max(1.0));
            }
        }
    }
}
