//! Cluster quality metrics and the silhouette-driven k sweep.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kmeans::{assign_labels, fit_kmeans, KMeansConfig};
use crate::matrix::{distance, Matrix};
use crate::rng::mix;

/// Score row of a sweep: one candidate k with its quality numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct KScore {
    pub k: usize,
    pub mean_silhouette: f64,
    pub inertia: f64,
}

/// A candidate k the sweep could not score, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedK {
    pub k: usize,
    pub reason: String,
}

/// Outcome of [`sweep_k`]: scores per candidate and the chosen k.
#[derive(Debug, Clone, PartialEq)]
pub struct SilhouetteReport {
    /// Scored candidates in ascending k order.
    pub per_k: Vec<KScore>,
    /// The k with the highest mean silhouette; ties go to the smaller k.
    pub best_k: usize,
    /// The mean silhouette at `best_k`.
    pub best_score: f64,
    /// Candidates that could not be scored.
    pub skipped: Vec<SkippedK>,
}

/// Exact O(n²) silhouette score.
///
/// Returns the mean and the per-point samples in input order. Points in
/// singleton clusters score 0, as do points where both cohesion and
/// separation are exactly 0 (coincident clusters). Requires the number of
/// distinct labels L to satisfy `2 <= L <= n-1`.
pub fn silhouette(data: &Matrix, labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    let n = data.n_rows();
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: labels.len(), right: n });
    }

    // Dense cluster ids in first-appearance order; labels need not be 0..L.
    let mut dense: BTreeMap<usize, usize> = BTreeMap::new();
    for &label in labels {
        let next = dense.len();
        dense.entry(label).or_insert(next);
    }
    let l = dense.len();
    if l < 2 {
        return Err(Error::InsufficientClusters { found: l });
    }
    if l + 1 > n {
        return Err(Error::DegenerateClustering { clusters: l, points: n });
    }
    let cluster: Vec<usize> = labels.iter().map(|label| dense[label]).collect();
    let mut sizes = vec![0usize; l];
    for &c in &cluster {
        sizes[c] += 1;
    }

    // dist_sum[i][c] = total distance from point i to cluster c's points.
    let mut dist_sum = vec![0.0; n * l];
    for i in 0..n {
        for j in i + 1..n {
            let d = distance(data.row(i), data.row(j));
            dist_sum[i * l + cluster[j]] += d;
            dist_sum[j * l + cluster[i]] += d;
        }
    }

    let mut samples = vec![0.0; n];
    for i in 0..n {
        let own = cluster[i];
        if sizes[own] == 1 {
            continue; // singleton convention: s = 0
        }
        let a = dist_sum[i * l + own] / (sizes[own] - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..l {
            if c == own {
                continue;
            }
            let mean_to_c = dist_sum[i * l + c] / sizes[c] as f64;
            if mean_to_c < b {
                b = mean_to_c;
            }
        }
        let denom = a.max(b);
        samples[i] = if denom == 0.0 { 0.0 } else { (b - a) / denom };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    Ok((mean, samples))
}

/// Fits k-means for every k in `[k_min, k_max]` and scores each fit by
/// mean silhouette.
///
/// Each candidate uses the derived seed `mix(base.seed, k)`. Candidates
/// with `k > n-1` are recorded as skipped, as are fits whose assignment
/// collapses below two distinct clusters. Ties on the best score resolve
/// to the smaller k.
pub fn sweep_k(data: &Matrix, k_min: usize, k_max: usize, base: &KMeansConfig) -> Result<SilhouetteReport> {
    if k_min < 2 || k_min > k_max {
        return Err(Error::BadRange { k_min, k_max });
    }
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyData);
    }

    let mut per_k = Vec::new();
    let mut skipped = Vec::new();
    for k in k_min..=k_max {
        if k + 1 > n {
            skipped.push(SkippedK { k, reason: format!("k exceeds n-1 for n = {n} points") });
            continue;
        }
        let config = KMeansConfig {
            k,
            max_iters: base.max_iters,
            n_restarts: base.n_restarts,
            seed: mix(base.seed, k as u64),
        };
        let model = fit_kmeans(data, &config)?;
        let labels = assign_labels(&model.centers, data)?;
        match silhouette(data, &labels) {
            Ok((mean, _)) => {
                per_k.push(KScore { k, mean_silhouette: mean, inertia: model.inertia });
            }
            Err(err @ (Error::InsufficientClusters { .. } | Error::DegenerateClustering { .. })) => {
                skipped.push(SkippedK { k, reason: err.to_string() });
            }
            Err(other) => return Err(other),
        }
    }

    let Some(first) = per_k.first() else {
        return Err(Error::NoFeasibleK { k_min, k_max, n });
    };
    let (mut best_k, mut best_score) = (first.k, first.mean_silhouette);
    for score in &per_k[1..] {
        if score.mean_silhouette > best_score {
            best_k = score.k;
            best_score = score.mean_silhouette;
        }
    }
    Ok(SilhouetteReport { per_k, best_k, best_score, skipped })
}

/// Adjusted Rand index between two labelings of the same points.
///
/// Computed from the pair-counting contingency table. When the correction
/// denominator is 0 (both partitions trivial), the result is 1.0 if the
/// partitions are identical and 0.0 otherwise.
pub fn adjusted_rand_index(labels_a: &[usize], labels_b: &[usize]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch { left: labels_a.len(), right: labels_b.len() });
    }
    let n = labels_a.len() as u64;

    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut row_sizes: BTreeMap<usize, u64> = BTreeMap::new();
    let mut col_sizes: BTreeMap<usize, u64> = BTreeMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *table.entry((a, b)).or_insert(0) += 1;
        *row_sizes.entry(a).or_insert(0) += 1;
        *col_sizes.entry(b).or_insert(0) += 1;
    }

    fn comb2(x: u64) -> f64 {
        (x * x.saturating_sub(1) / 2) as f64
    }

    let index: f64 = table.values().map(|&c| comb2(c)).sum();
    let row_pairs: f64 = row_sizes.values().map(|&c| comb2(c)).sum();
    let col_pairs: f64 = col_sizes.values().map(|&c| comb2(c)).sum();
    let total_pairs = comb2(n);

    // Identical partitions ⇔ every row and every column of the table has
    // exactly one non-zero cell.
    let partitions_equal =
        table.len() == row_sizes.len() && table.len() == col_sizes.len();

    if total_pairs == 0.0 {
        return Ok(if partitions_equal { 1.0 } else { 0.0 });
    }
    let expected = row_pairs * col_pairs / total_pairs;
    let max_index = 0.5 * (row_pairs + col_pairs);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(if partitions_equal { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(values: &[f64]) -> Matrix {
        Matrix::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>())
    }

    #[test]
    fn two_pair_instance_matches_hand_computation() {
        // Clusters {0,1} and {10,11}. The outer points score
        // (10.5-1)/10.5 = 19/21 and the inner points (9.5-1)/9.5 = 17/19,
        // giving a mean of 359/399.
        let data = one_d(&[0.0, 1.0, 10.0, 11.0]);
        let (mean, samples) = silhouette(&data, &[0, 0, 1, 1]).unwrap();
        assert!((samples[0] - 19.0 / 21.0).abs() <= 1e-12);
        assert!((samples[1] - 17.0 / 19.0).abs() <= 1e-12);
        assert!((samples[2] - 17.0 / 19.0).abs() <= 1e-12);
        assert!((samples[3] - 19.0 / 21.0).abs() <= 1e-12);
        assert!((mean - 359.0 / 399.0).abs() <= 1e-12);
    }

    #[test]
    fn singleton_cluster_scores_zero() {
        let data = one_d(&[0.0, 10.0, 11.0]);
        let (_, samples) = silhouette(&data, &[0, 1, 1]).unwrap();
        assert_eq!(samples[0], 0.0);
        assert!(samples[1] > 0.0);
    }

    #[test]
    fn coincident_clusters_score_zero_not_nan() {
        let data = one_d(&[1.0, 1.0, 1.0, 1.0]);
        let (mean, samples) = silhouette(&data, &[0, 0, 1, 1]).unwrap();
        assert_eq!(samples, vec![0.0; 4]);
        assert_eq!(mean, 0.0);
    }

    #[test]
    fn cluster_count_preconditions() {
        let data = one_d(&[0.0, 1.0, 2.0]);
        assert_eq!(
            silhouette(&data, &[0, 0, 0]),
            Err(Error::InsufficientClusters { found: 1 })
        );
        assert_eq!(
            silhouette(&data, &[0, 1, 2]),
            Err(Error::DegenerateClustering { clusters: 3, points: 3 })
        );
        // L = n-1 is the last legal configuration.
        assert!(silhouette(&data, &[0, 0, 1]).is_ok());
    }

    #[test]
    fn labels_need_not_be_contiguous() {
        let data = one_d(&[0.0, 1.0, 10.0, 11.0]);
        let (dense_mean, _) = silhouette(&data, &[0, 0, 1, 1]).unwrap();
        let (sparse_mean, _) = silhouette(&data, &[7, 7, 42, 42]).unwrap();
        assert_eq!(dense_mean, sparse_mean);
    }

    #[test]
    fn sweep_finds_four_planted_blobs() {
        let mut rows = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (20.0, 0.0), (0.0, 20.0), (20.0, 20.0)] {
            for i in 0..6 {
                rows.push(vec![cx + 0.1 * i as f64, cy - 0.1 * i as f64]);
            }
        }
        let data = Matrix::from_rows(&rows);
        let report = sweep_k(&data, 2, 8, &KMeansConfig::new(2, 9)).unwrap();
        assert_eq!(report.best_k, 4);
        assert!(report.skipped.is_empty());
        assert_eq!(report.per_k.len(), 7);
    }

    #[test]
    fn bit_equal_scores_resolve_to_the_smaller_k() {
        // Two sites of four identical points each: k=2 and k=3 both end in
        // the same two-cluster partition with silhouette exactly 1.0.
        let data = one_d(&[0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 5.0]);
        let report = sweep_k(&data, 2, 3, &KMeansConfig::new(2, 1)).unwrap();
        assert_eq!(report.per_k.len(), 2);
        assert_eq!(report.per_k[0].mean_silhouette, 1.0);
        assert_eq!(report.per_k[1].mean_silhouette, 1.0);
        assert_eq!(report.best_k, 2);
        assert_eq!(report.best_score, 1.0);
    }

    #[test]
    fn sweep_skips_and_errors_match_contract() {
        let data = one_d(&[0.0, 1.0]);
        // n = 2 leaves no k in 2..=4 with k <= n-1.
        assert_eq!(
            sweep_k(&data, 2, 4, &KMeansConfig::new(2, 0)),
            Err(Error::NoFeasibleK { k_min: 2, k_max: 4, n: 2 })
        );
        assert_eq!(
            sweep_k(&data, 1, 4, &KMeansConfig::new(2, 0)),
            Err(Error::BadRange { k_min: 1, k_max: 4 })
        );
        assert_eq!(
            sweep_k(&data, 5, 4, &KMeansConfig::new(2, 0)),
            Err(Error::BadRange { k_min: 5, k_max: 4 })
        );
        let empty = Matrix::zeros(0, 1);
        assert_eq!(sweep_k(&empty, 2, 4, &KMeansConfig::new(2, 0)), Err(Error::EmptyData));
    }

    #[test]
    fn sweep_reports_skipped_upper_candidates() {
        let data = one_d(&[0.0, 0.1, 5.0, 5.1]);
        let report = sweep_k(&data, 2, 6, &KMeansConfig::new(2, 3)).unwrap();
        let skipped_ks: Vec<usize> = report.skipped.iter().map(|s| s.k).collect();
        assert_eq!(skipped_ks, vec![4, 5, 6]);
        assert!(report.per_k.iter().all(|s| s.k <= 3));
    }

    #[test]
    fn ari_hand_cases() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[5, 5, 2, 2]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap(), 0.0);
        // Worked contingency example: index 2, expected 1.6, max 4.
        let ari = adjusted_rand_index(&[0, 0, 1, 1, 1], &[0, 0, 1, 1, 0]).unwrap();
        assert!((ari - 1.0 / 6.0).abs() <= 1e-12);
        assert_eq!(
            adjusted_rand_index(&[0, 1], &[0, 1, 2]),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn ari_degenerate_denominator_follows_equality_rule() {
        // Both trivial single-cluster partitions: equal, so 1.0.
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[4, 4, 4]).unwrap(), 1.0);
        // Both all-singleton partitions: equal as partitions, so 1.0.
        assert_eq!(adjusted_rand_index(&[0, 1, 2], &[2, 1, 0]).unwrap(), 1.0);
        // Single-cluster vs all-singletons: unequal, denominator 0, so 0.0.
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[0, 1, 2]).unwrap(), 0.0);
    }

    mod properties {
        use super::*;
        use proptest::collection::vec as pvec;
        use proptest::prelude::*;

        fn labeled_data() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
            (4usize..20, 2usize..4).prop_flat_map(|(n, l)| {
                (
                    pvec(pvec(-10.0..10.0f64, 2..=2), n..=n),
                    pvec(0usize..l, n..=n),
                )
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]

            #[test]
            fn samples_and_mean_stay_in_range((rows, labels) in labeled_data()) {
                let data = Matrix::from_rows(&rows);
                if let Ok((mean, samples)) = silhouette(&data, &labels) {
                    prop_assert!((-1.0..=1.0).contains(&mean));
                    for s in samples {
                        prop_assert!((-1.0..=1.0).contains(&s));
                    }
                }
            }

            #[test]
            fn silhouette_ignores_label_names((rows, labels) in labeled_data()) {
                let data = Matrix::from_rows(&rows);
                let renamed: Vec<usize> = labels.iter().map(|&c| 100 + 7 * c).collect();
                let original = silhouette(&data, &labels);
                let relabeled = silhouette(&data, &renamed);
                match (original, relabeled) {
                    (Ok((m1, s1)), Ok((m2, s2))) => {
                        prop_assert_eq!(m1, m2);
                        prop_assert_eq!(s1, s2);
                    }
                    (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
                    (a, b) => prop_assert!(false, "diverged: {a:?} vs {b:?}"),
                }
            }

            #[test]
            fn silhouette_commutes_with_row_permutation((rows, labels) in labeled_data()) {
                let data = Matrix::from_rows(&rows);
                let Ok((mean, _)) = silhouette(&data, &labels) else { return Ok(()); };
                // Reverse is a fixed, easily invertible permutation.
                let rev_rows: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
                let rev_labels: Vec<usize> = labels.iter().rev().copied().collect();
                let (rev_mean, _) = silhouette(&Matrix::from_rows(&rev_rows), &rev_labels).unwrap();
                prop_assert!((mean - rev_mean).abs() <= 1e-12);
            }

            #[test]
            fn ari_is_symmetric(
                pair in (4usize..24).prop_flat_map(|n| {
                    (pvec(0usize..4, n..=n), pvec(0usize..4, n..=n))
                })
            ) {
                let (a, b) = pair;
                let ab = adjusted_rand_index(&a, &b).unwrap();
                let ba = adjusted_rand_index(&b, &a).unwrap();
                prop_assert_eq!(ab, ba);
                prop_assert!(ab <= 1.0);
            }
        }
    }
}
