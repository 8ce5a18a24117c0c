//! Self-organizing map with online training on a rectangular grid.
//!
//! Maps here are small (the pipeline uses 1×k strips with one node per
//! requested cluster), trained with the classic online rule: find the best
//! matching unit for a sample, then pull every node toward the sample with
//! a Gaussian neighborhood weight and a geometrically decaying learning
//! rate.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::calendar::MonthKey;
use crate::error::{Error, Result};
use crate::matrix::{distance, squared_distance, Matrix};
use crate::rng::SplitMix64;

/// Settings for one SOM fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SomConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Full passes over the training data.
    pub epochs: usize,
    /// Learning rate at step 0, in `(0, 1]`.
    pub lr_start: f64,
    /// Learning rate the schedule decays toward, in `(0, lr_start]`.
    pub lr_end: f64,
    /// Neighborhood radius at step 0, positive.
    pub sigma_start: f64,
    /// Neighborhood radius the schedule decays toward, in `(0, sigma_start]`.
    pub sigma_end: f64,
    pub seed: u64,
}

impl SomConfig {
    /// Default training schedule for a given grid: 200 epochs, learning
    /// rate 0.5 → 0.01, neighborhood radius `max(rows, cols)/2` → 0.5.
    pub fn for_grid(grid_rows: usize, grid_cols: usize, seed: u64) -> Self {
        Self {
            grid_rows,
            grid_cols,
            epochs: 200,
            lr_start: 0.5,
            lr_end: 0.01,
            sigma_start: grid_rows.max(grid_cols) as f64 / 2.0,
            sigma_end: 0.5,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |detail: alloc::string::String| Err(Error::InvalidConfig { detail });
        if self.grid_rows < 1 || self.grid_cols < 1 {
            return fail(format!("grid {}x{} has no nodes", self.grid_rows, self.grid_cols));
        }
        if self.epochs < 1 {
            return fail(format!("epochs must be >= 1, got {}", self.epochs));
        }
        if !(self.lr_start > 0.0 && self.lr_start <= 1.0) {
            return fail(format!("lr_start must be in (0, 1], got {}", self.lr_start));
        }
        if !(self.lr_end > 0.0 && self.lr_end <= self.lr_start) {
            return fail(format!("lr_end must be in (0, lr_start], got {}", self.lr_end));
        }
        if self.sigma_start.is_nan() || self.sigma_start <= 0.0 {
            return fail(format!("sigma_start must be positive, got {}", self.sigma_start));
        }
        if !(self.sigma_end > 0.0 && self.sigma_end <= self.sigma_start) {
            return fail(format!("sigma_end must be in (0, sigma_start], got {}", self.sigma_end));
        }
        Ok(())
    }
}

/// A trained map.
#[derive(Debug, Clone, PartialEq)]
pub struct SomModel {
    pub config: SomConfig,
    /// Node weight vectors; node index = `row * grid_cols + col`.
    pub codebook: Matrix,
    /// Grid position of each node, in node-index order.
    pub grid_coords: Vec<(usize, usize)>,
    /// BMU hit counts per node from one pass over the training data after
    /// training; sums to the number of training rows.
    pub activations: Vec<u64>,
}

impl SomModel {
    pub fn n_nodes(&self) -> usize {
        self.codebook.n_rows()
    }

    /// Feature dimension of the codebook.
    pub fn dim(&self) -> usize {
        self.codebook.n_cols()
    }
}

/// Codebook rows of the activated nodes of one month's map.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    /// One row per activated node, in increasing node-index order.
    pub centers: Matrix,
    /// Node index each center came from; strictly increasing.
    pub source_nodes: Vec<usize>,
    /// BMU hit count per center, aligned with `source_nodes`.
    pub activation: Vec<u64>,
    pub month: MonthKey,
}

impl CenterSet {
    pub fn len(&self) -> usize {
        self.source_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_nodes.is_empty()
    }
}

/// Trains a map on the rows of `data`.
///
/// All randomness comes from one `SplitMix64` stream seeded with
/// `config.seed`, consumed in this exact order:
///
/// 1. one bounded draw per node to initialize the codebook by sampling
///    training rows uniformly with replacement,
/// 2. per epoch, one Fisher-Yates shuffle of the fresh index list
///    `0..n` giving that epoch's visiting order.
///
/// For each visited row `x` at global step `i` (of `epochs * n` total),
/// with `t = i / total`:
///
/// ```text
/// alpha(t) = lr_start    * (lr_end    / lr_start)   ^ t
/// sigma(t) = sigma_start * (sigma_end / sigma_start)^ t
/// h(k)     = exp(-grid_dist(k, bmu)^2 / (2 sigma(t)^2))
/// w_k     += alpha(t) * h(k) * (x - w_k)        for every node k
/// ```
///
/// where `grid_dist` is the Euclidean distance between node positions in
/// (row, col) grid coordinates and ties for the BMU go to the lowest node
/// index. Identical `(data, config)` produce a bit-identical model.
pub fn train_som(data: &Matrix, config: &SomConfig) -> Result<SomModel> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = data.n_rows();
    let n_nodes = config.grid_rows * config.grid_cols;
    let mut rng = SplitMix64::new(config.seed);

    let mut codebook = Matrix::zeros(n_nodes, data.n_cols());
    for node in 0..n_nodes {
        let pick = rng.next_below(n as u64) as usize;
        codebook.row_mut(node).copy_from_slice(data.row(pick));
    }

    let grid_coords = grid_coordinates(config.grid_rows, config.grid_cols);
    // Squared grid distances between node pairs, indexed [bmu][node].
    let mut grid_d2 = vec![0.0; n_nodes * n_nodes];
    for b in 0..n_nodes {
        for k in 0..n_nodes {
            let dr = grid_coords[b].0 as f64 - grid_coords[k].0 as f64;
            let dc = grid_coords[b].1 as f64 - grid_coords[k].1 as f64;
            grid_d2[b * n_nodes + k] = dr * dr + dc * dc;
        }
    }

    let total_steps = (config.epochs * n) as f64;
    let lr_ratio = config.lr_end / config.lr_start;
    let sigma_ratio = config.sigma_end / config.sigma_start;
    let mut step = 0usize;
    for _ in 0..config.epochs {
        let order = rng.permutation(n);
        for &row_index in &order {
            let t = step as f64 / total_steps;
            let alpha = config.lr_start * libm::pow(lr_ratio, t);
            let sigma = config.sigma_start * libm::pow(sigma_ratio, t);
            let x = data.row(row_index);
            let bmu = nearest_node(&codebook, x);
            let denom = 2.0 * sigma * sigma;
            for k in 0..n_nodes {
                let h = libm::exp(-grid_d2[bmu * n_nodes + k] / denom);
                let factor = alpha * h;
                for (j, w) in codebook.row_mut(k).iter_mut().enumerate() {
                    *w += factor * (x[j] - *w);
                }
            }
            step += 1;
        }
    }

    let mut activations = vec![0u64; n_nodes];
    for i in 0..n {
        activations[nearest_node(&codebook, data.row(i))] += 1;
    }

    Ok(SomModel { config: config.clone(), codebook, grid_coords, activations })
}

/// Node index of the best matching unit for `x`: the codebook row at
/// minimum squared Euclidean distance, ties to the lowest index.
pub fn best_matching_unit(model: &SomModel, x: &[f64]) -> Result<usize> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: x.len() });
    }
    Ok(nearest_node(&model.codebook, x))
}

/// Mean Euclidean distance from each data row to its BMU.
pub fn quantization_error(model: &SomModel, data: &Matrix) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if data.n_cols() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: data.n_cols() });
    }
    let total: f64 = data
        .rows()
        .map(|row| distance(row, model.codebook.row(nearest_node(&model.codebook, row))))
        .sum();
    Ok(total / data.n_rows() as f64)
}

/// Collects the codebook rows of every node with a positive activation
/// count, in increasing node-index order.
pub fn extract_centers(model: &SomModel, month: MonthKey) -> Result<CenterSet> {
    let mut centers = Matrix::zeros(0, model.dim());
    let mut source_nodes = Vec::new();
    let mut activation = Vec::new();
    for (node, &hits) in model.activations.iter().enumerate() {
        if hits > 0 {
            centers.push_row(model.codebook.row(node));
            source_nodes.push(node);
            activation.push(hits);
        }
    }
    if source_nodes.is_empty() {
        return Err(Error::AllNodesEmpty);
    }
    Ok(CenterSet { centers, source_nodes, activation, month })
}

fn nearest_node(codebook: &Matrix, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d2 = squared_distance(x, codebook.row(0));
    for k in 1..codebook.n_rows() {
        let d2 = squared_distance(x, codebook.row(k));
        if d2 < best_d2 {
            best = k;
            best_d2 = d2;
        }
    }
    best
}

fn grid_coordinates(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut coords = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            coords.push((r, c));
        }
    }
    coords
}
