//! Seeded k-means: k-means++ initialization, Lloyd iterations, restarts.
//!
//! Every tie in the algorithm (nearest center, farthest point, best
//! restart) breaks toward the lowest index, and all randomness comes from
//! seeds derived with [`crate::rng::mix`], so a fit is a pure function of
//! its inputs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};
use crate::rng::{mix, SplitMix64};

/// Settings for one k-means fit.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    /// Number of clusters; at least 1.
    pub k: usize,
    /// Cap on Lloyd iterations per restart; at least 1.
    pub max_iters: usize,
    /// Independent restarts; the lowest-inertia run wins. At least 1.
    pub n_restarts: usize,
    /// Seed for the whole fit; restart r draws from `mix(seed, r)`.
    pub seed: u64,
}

impl KMeansConfig {
    /// Convenience constructor using the default iteration and restart
    /// caps (300 and 10).
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, max_iters: 300, n_restarts: 10, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig { detail: format!("k must be >= 1, got {}", self.k) });
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidConfig {
                detail: format!("max_iters must be >= 1, got {}", self.max_iters),
            });
        }
        if self.n_restarts < 1 {
            return Err(Error::InvalidConfig {
                detail: format!("n_restarts must be >= 1, got {}", self.n_restarts),
            });
        }
        Ok(())
    }
}

/// A fitted k-means model.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    /// Cluster centers, one per row.
    pub centers: Matrix,
    /// Within-cluster sum of squared distances under nearest-center
    /// assignment of the training data.
    pub inertia: f64,
    /// Lloyd iterations the winning restart performed.
    pub iterations: usize,
    /// Whether the winning restart reached an unchanged assignment before
    /// hitting `max_iters`.
    pub converged: bool,
}

/// Fits k-means to the rows of `data`.
pub fn fit_kmeans(data: &Matrix, config: &KMeansConfig) -> Result<KMeansModel> {
    Ok(fit_kmeans_with_trace(data, config)?.0)
}

/// Like [`fit_kmeans`], additionally returning the winning restart's
/// inertia trace: entry 0 is the inertia right after initialization, and
/// each following entry is the inertia after one (update, assign) round.
pub fn fit_kmeans_with_trace(data: &Matrix, config: &KMeansConfig) -> Result<(KMeansModel, Vec<f64>)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.n_rows() < config.k {
        return Err(Error::TooFewPoints { n: data.n_rows(), k: config.k });
    }

    let mut winner: Option<(KMeansModel, Vec<f64>)> = None;
    for restart in 0..config.n_restarts {
        let mut rng = SplitMix64::new(mix(config.seed, restart as u64));
        let run = lloyd_run(data, config.k, config.max_iters, &mut rng);
        let better = match &winner {
            // Strict: inertia ties keep the earlier restart.
            Some((best, _)) => run.0.inertia < best.inertia,
            None => true,
        };
        if better {
            winner = Some(run);
        }
    }
    Ok(winner.expect("n_restarts >= 1 guarantees a winner"))
}

/// One seeded k-means++ + Lloyd run.
fn lloyd_run(data: &Matrix, k: usize, max_iters: usize, rng: &mut SplitMix64) -> (KMeansModel, Vec<f64>) {
    let mut centers = kmeans_pp_init(data, k, rng);
    let mut labels = nearest_labels(&centers, data);
    let mut trace = vec![wss(data, &labels, &centers)];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        update_centers(data, &labels, &mut centers);
        let new_labels = nearest_labels(&centers, data);
        trace.push(wss(data, &new_labels, &centers));
        if new_labels == labels {
            converged = true;
            break;
        }
        labels = new_labels;
    }

    let inertia = *trace.last().expect("trace holds at least the initial inertia");
    (KMeansModel { centers, inertia, iterations, converged }, trace)
}

/// k-means++ seeding: first center uniform over rows, each next row drawn
/// with probability proportional to its squared distance to the nearest
/// already-chosen center. A zero total weight (all rows duplicated into
/// chosen centers) falls back to a uniform draw.
fn kmeans_pp_init(data: &Matrix, k: usize, rng: &mut SplitMix64) -> Matrix {
    let n = data.n_rows();
    let mut centers = Matrix::zeros(0, 0);
    let first = rng.next_below(n as u64) as usize;
    centers.push_row(data.row(first));

    let mut best_d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(data.row(i), centers.row(0)))
        .collect();

    for _ in 1..k {
        let total: f64 = best_d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut cumulative = 0.0;
            let mut chosen = None;
            for (i, &w) in best_d2.iter().enumerate() {
                cumulative += w;
                if cumulative > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave target >= the final cumulative sum; fall
            // back to the last row with positive weight.
            chosen.unwrap_or_else(|| {
                best_d2.iter().rposition(|&w| w > 0.0).expect("total > 0 implies a positive weight")
            })
        } else {
            rng.next_below(n as u64) as usize
        };
        centers.push_row(data.row(pick));
        let c = centers.n_rows() - 1;
        for (i, best) in best_d2.iter_mut().enumerate() {
            let d2 = squared_distance(data.row(i), centers.row(c));
            if d2 < *best {
                *best = d2;
            }
        }
    }
    centers
}

/// Nearest-center labels with ties to the lowest center index.
fn nearest_labels(centers: &Matrix, points: &Matrix) -> Vec<usize> {
    (0..points.n_rows())
        .map(|i| {
            let row = points.row(i);
            let mut best = 0;
            let mut best_d2 = squared_distance(row, centers.row(0));
            for c in 1..centers.n_rows() {
                let d2 = squared_distance(row, centers.row(c));
                if d2 < best_d2 {
                    best = c;
                    best_d2 = d2;
                }
            }
            best
        })
        .collect()
}

/// Recomputes each center as the mean of its assigned points; an emptied
/// cluster is re-seeded to the point farthest from its nearest current
/// center (ties to the lowest row index), processed in ascending cluster
/// order.
fn update_centers(data: &Matrix, labels: &[usize], centers: &mut Matrix) {
    let k = centers.n_rows();
    let d = data.n_cols();
    let mut counts = vec![0usize; k];
    let mut sums = vec![0.0; k * d];
    for (i, &label) in labels.iter().enumerate() {
        counts[label] += 1;
        let row = data.row(i);
        for (j, &x) in row.iter().enumerate() {
            sums[label * d + j] += x;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let center = centers.row_mut(c);
        for j in 0..d {
            center[j] = sums[c * d + j] / counts[c] as f64;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            continue;
        }
        let mut far_row = 0;
        let mut far_d2 = f64::NEG_INFINITY;
        for i in 0..data.n_rows() {
            let d2 = (0..k)
                .map(|other| squared_distance(data.row(i), centers.row(other)))
                .fold(f64::INFINITY, f64::min);
            if d2 > far_d2 {
                far_d2 = d2;
                far_row = i;
            }
        }
        let row = data.row(far_row).to_vec();
        centers.row_mut(c).copy_from_slice(&row);
    }
}

fn wss(data: &Matrix, labels: &[usize], centers: &Matrix) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| squared_distance(data.row(i), centers.row(label)))
        .sum()
}

/// Labels each point with its nearest center (ties to the lowest center
/// index). An empty `points` matrix yields an empty vector.
pub fn assign_labels(centers: &Matrix, points: &Matrix) -> Result<Vec<usize>> {
    debug_assert!(centers.n_rows() >= 1, "assign_labels needs at least one center");
    if !points.is_empty() && points.n_cols() != centers.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: centers.n_cols(),
            found: points.n_cols(),
        });
    }
    Ok(nearest_labels(centers, points))
}

/// Within-cluster sum of squared distances of `data` to the centers named
/// by `labels`.
pub fn inertia(data: &Matrix, labels: &[usize], centers: &Matrix) -> Result<f64> {
    if labels.len() != data.n_rows() {
        return Err(Error::LengthMismatch { left: labels.len(), right: data.n_rows() });
    }
    if !data.is_empty() && data.n_cols() != centers.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: centers.n_cols(),
            found: data.n_cols(),
        });
    }
    for &label in labels {
        if label >= centers.n_rows() {
            return Err(Error::LabelOutOfRange { label, k: centers.n_rows() });
        }
    }
    Ok(wss(data, labels, centers))
}
