//! End-to-end orchestration.
//!
//! One run executes, in order: build monthly matrices, per-month MinMax +
//! SOM + center extraction, pooling of all activated centers, PCA on the
//! pooled centers, a k sweep over the projected centers with a final
//! k-means fit at the winning k, and a last pass that projects every
//! normalized series-month vector and assigns it to its nearest final
//! center. Every random draw derives from the master seed through
//! documented mixing, so a run is a pure function of (table, config).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::calendar::MonthKey;
use crate::error::{Error, Result};
use crate::evaluate::{sweep_k, SilhouetteReport};
use crate::ingest::{build_monthly_matrices, ReadingTable, FEATURE_DAYS};
use crate::kmeans::{assign_labels, fit_kmeans, KMeansConfig, KMeansModel};
use crate::matrix::Matrix;
use crate::pca::{fit_pca, project, PcaModel};
use crate::preprocess::{apply_minmax, fit_minmax, ScalerParams};
use crate::rng::mix;
use crate::som::{extract_centers, train_som, SomConfig, SomModel};

/// Stage tag for per-month SOM seeds: the SOM for the month at position
/// `i` of `config.months` trains with seed `mix(mix(seed, STAGE_SOM), i)`.
/// Positions are fixed by the config, so a month skipped for lack of data
/// never shifts another month's stream.
pub const STAGE_SOM: u64 = 1;

/// Stage tag for the clustering seeds: the sweep runs with base seed
/// `mix(seed, STAGE_KMEANS)`, and the final fit at the winning k reuses
/// the sweep's per-k seed so the reported score describes exactly the
/// returned model.
pub const STAGE_KMEANS: u64 = 2;

/// Total SOM nodes spread across the months under the default config.
pub const DEFAULT_TOTAL_SOM_CLUSTERS: usize = 88;

/// SOM training schedule, independent of grid shape.
///
/// The pipeline derives each month's grid as a 1 x k_m strip, so the
/// config template cannot fix the grid itself. A `None` starting radius
/// means "half the longer grid side", matching [`SomConfig::for_grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SomTemplate {
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub sigma_start: Option<f64>,
    pub sigma_end: f64,
}

impl Default for SomTemplate {
    fn default() -> Self {
        Self { epochs: 200, lr_start: 0.5, lr_end: 0.01, sigma_start: None, sigma_end: 0.5 }
    }
}

impl SomTemplate {
    /// Instantiates the template for a concrete grid and seed.
    pub fn to_config(&self, grid_rows: usize, grid_cols: usize, seed: u64) -> SomConfig {
        let mut config = SomConfig::for_grid(grid_rows, grid_cols, seed);
        config.epochs = self.epochs;
        config.lr_start = self.lr_start;
        config.lr_end = self.lr_end;
        if let Some(sigma_start) = self.sigma_start {
            config.sigma_start = sigma_start;
        }
        config.sigma_end = self.sigma_end;
        config
    }
}

/// K-means settings, independent of k and seed (both are chosen by the
/// pipeline itself).
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansTemplate {
    pub max_iters: usize,
    pub n_restarts: usize,
}

impl Default for KMeansTemplate {
    fn default() -> Self {
        Self { max_iters: 300, n_restarts: 10 }
    }
}

impl KMeansTemplate {
    /// Instantiates the template for a concrete k and seed.
    pub fn to_config(&self, k: usize, seed: u64) -> KMeansConfig {
        KMeansConfig { k, max_iters: self.max_iters, n_restarts: self.n_restarts, seed }
    }
}

/// Everything a run needs besides the readings.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Months to cluster; non-empty, no duplicates.
    pub months: Vec<MonthKey>,
    /// SOM node count per month; every entry in `months` needs a positive
    /// entry here (extra keys are ignored).
    pub som_clusters_per_month: BTreeMap<MonthKey, usize>,
    pub som: SomTemplate,
    /// Principal components kept when reducing the pooled centers.
    pub pca_q: usize,
    /// Inclusive sweep bounds; `2 <= k_min <= k_max`.
    pub k_min: usize,
    pub k_max: usize,
    pub kmeans: KMeansTemplate,
    /// Master seed; every stream in the run derives from it.
    pub seed: u64,
}

impl Default for PipelineConfig {
    /// January through June of 2012 and 2013, 88 SOM nodes split
    /// near-evenly across those 12 months, q = 2, sweep 2..=40, seed 0.
    fn default() -> Self {
        let months = default_months();
        let som_clusters_per_month = default_cluster_split(&months, DEFAULT_TOTAL_SOM_CLUSTERS);
        Self {
            months,
            som_clusters_per_month,
            som: SomTemplate::default(),
            pca_q: 2,
            k_min: 2,
            k_max: 40,
            kmeans: KMeansTemplate::default(),
            seed: 0,
        }
    }
}

/// The default analysis window: Jan-Jun 2012 and Jan-Jun 2013.
pub fn default_months() -> Vec<MonthKey> {
    let mut months = Vec::with_capacity(12);
    for year in [2012, 2013] {
        for month in 1..=6 {
            months.push(MonthKey::new(year, month).expect("static months are valid"));
        }
    }
    months
}

/// Splits `total` SOM nodes near-evenly over `months`: every month gets
/// `total / len`, and the first `total % len` months (in list order) get
/// one extra.
pub fn default_cluster_split(months: &[MonthKey], total: usize) -> BTreeMap<MonthKey, usize> {
    if months.is_empty() {
        return BTreeMap::new();
    }
    let base = total / months.len();
    let remainder = total % months.len();
    months
        .iter()
        .enumerate()
        .map(|(i, &month)| (month, base + usize::from(i < remainder)))
        .collect()
}

/// One labeled series-month.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub series_id: String,
    pub month: MonthKey,
    /// Final cluster label in `[0, report.best_k)`.
    pub label: usize,
}

/// Every fitted artifact of one run.
///
/// Per-month vectors (`scalers`, `som_models`) follow `config.months`
/// order, with data-free months absent. `pooled_provenance[i]` names the
/// (month, SOM node) that produced `pooled_centers` row i; that row is
/// bit-equal to the node's codebook row.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub config: PipelineConfig,
    pub scalers: Vec<(MonthKey, ScalerParams)>,
    pub som_models: Vec<(MonthKey, SomModel)>,
    pub pooled_centers: Matrix,
    pub pooled_provenance: Vec<(MonthKey, usize)>,
    pub pca: PcaModel,
    pub kmeans: KMeansModel,
    pub report: SilhouetteReport,
    /// One entry per (series, month) that survived ingestion, in month
    /// order then sorted-series order.
    pub assignments: Vec<Assignment>,
    /// Carried-over table warnings plus pipeline notes (dropped series,
    /// skipped months, never-activated nodes).
    pub warnings: Vec<String>,
}

fn validate_config(config: &PipelineConfig) -> Result<()> {
    for month in &config.months {
        match config.som_clusters_per_month.get(month) {
            Some(&k) if k >= 1 => {}
            Some(&k) => {
                return Err(Error::InvalidConfig {
                    detail: format!("som_clusters_per_month[{month}] must be >= 1, got {k}"),
                });
            }
            None => {
                return Err(Error::InvalidConfig {
                    detail: format!("som_clusters_per_month has no entry for {month}"),
                });
            }
        }
    }
    if config.pca_q < 1 {
        return Err(Error::InvalidConfig { detail: "pca_q must be >= 1".into() });
    }
    if config.k_min < 2 || config.k_min > config.k_max {
        return Err(Error::BadRange { k_min: config.k_min, k_max: config.k_max });
    }
    if config.kmeans.max_iters < 1 || config.kmeans.n_restarts < 1 {
        return Err(Error::InvalidConfig {
            detail: format!(
                "kmeans template needs max_iters >= 1 and n_restarts >= 1, got {} and {}",
                config.kmeans.max_iters, config.kmeans.n_restarts
            ),
        });
    }
    Ok(())
}

/// Stages shared by [`run_pipeline`] and [`run_sweep`]: everything up to
/// and including the PCA projection of the pooled centers.
struct Prepared {
    scalers: Vec<(MonthKey, ScalerParams)>,
    som_models: Vec<(MonthKey, SomModel)>,
    pooled_centers: Matrix,
    pooled_provenance: Vec<(MonthKey, usize)>,
    pca: PcaModel,
    projected_centers: Matrix,
    /// Per kept month: (month, series ids, normalized rows).
    normalized: Vec<(MonthKey, Vec<String>, Matrix)>,
    warnings: Vec<String>,
}

fn prepare(table: &ReadingTable, config: &PipelineConfig) -> Result<Prepared> {
    validate_config(config)?;
    let matrices = build_monthly_matrices(table, &config.months)?;

    let mut warnings = table.warnings.clone();
    let mut scalers = Vec::new();
    let mut som_models = Vec::new();
    let mut pooled_centers = Matrix::zeros(0, FEATURE_DAYS);
    let mut pooled_provenance = Vec::new();
    let mut normalized = Vec::new();

    for (position, matrix) in matrices.iter().enumerate() {
        for (series_id, reason) in &matrix.dropped {
            warnings.push(format!(
                "month {}: dropped series `{series_id}` ({reason})",
                matrix.month
            ));
        }
        if matrix.values.n_rows() == 0 {
            warnings.push(format!("month {}: no usable series; skipped", matrix.month));
            continue;
        }

        let scaler = fit_minmax(&matrix.values)?;
        let rows = apply_minmax(&matrix.values, &scaler)?;
        let nodes = config.som_clusters_per_month[&matrix.month];
        let som_seed = mix(mix(config.seed, STAGE_SOM), position as u64);
        let som_config = config.som.to_config(1, nodes, som_seed);
        let model = train_som(&rows, &som_config)?;
        let centers = extract_centers(&model, matrix.month)?;
        if centers.len() < nodes {
            warnings.push(format!(
                "month {}: {} of {nodes} nodes never became a best matching unit",
                matrix.month,
                nodes - centers.len()
            ));
        }
        for (i, &node) in centers.source_nodes.iter().enumerate() {
            pooled_centers.push_row(centers.centers.row(i));
            pooled_provenance.push((matrix.month, node));
        }

        scalers.push((matrix.month, scaler));
        som_models.push((matrix.month, model));
        normalized.push((matrix.month, matrix.series_ids.clone(), rows));
    }

    if normalized.is_empty() {
        return Err(Error::NoUsableSeries);
    }
    if pooled_centers.n_rows() < config.k_min {
        return Err(Error::TooFewCenters {
            pooled: pooled_centers.n_rows(),
            k_min: config.k_min,
        });
    }

    let pca = fit_pca(&pooled_centers, config.pca_q)?;
    let projected_centers = project(&pca, &pooled_centers)?;
    Ok(Prepared {
        scalers,
        som_models,
        pooled_centers,
        pooled_provenance,
        pca,
        projected_centers,
        normalized,
        warnings,
    })
}

/// Runs the whole pipeline over a reading table.
pub fn run_pipeline(table: &ReadingTable, config: &PipelineConfig) -> Result<PipelineResult> {
    let prepared = prepare(table, config)?;

    let sweep_seed = mix(config.seed, STAGE_KMEANS);
    let base = config.kmeans.to_config(config.k_min, sweep_seed);
    let report = sweep_k(&prepared.projected_centers, config.k_min, config.k_max, &base)?;
    // Same per-k seed the sweep used, so this reproduces the winning fit.
    let final_config = config
        .kmeans
        .to_config(report.best_k, mix(sweep_seed, report.best_k as u64));
    let kmeans = fit_kmeans(&prepared.projected_centers, &final_config)?;

    let mut assignments = Vec::new();
    for (month, series_ids, rows) in &prepared.normalized {
        let projected = project(&prepared.pca, rows)?;
        let labels = assign_labels(&kmeans.centers, &projected)?;
        for (series_id, label) in series_ids.iter().zip(labels) {
            assignments.push(Assignment { series_id: series_id.clone(), month: *month, label });
        }
    }

    Ok(PipelineResult {
        config: config.clone(),
        scalers: prepared.scalers,
        som_models: prepared.som_models,
        pooled_centers: prepared.pooled_centers,
        pooled_provenance: prepared.pooled_provenance,
        pca: prepared.pca,
        kmeans,
        report,
        assignments,
        warnings: prepared.warnings,
    })
}

/// Runs the shared stages and the k sweep, without the final fit or the
/// per-row assignment pass. Useful for choosing sweep bounds cheaply.
pub fn run_sweep(table: &ReadingTable, config: &PipelineConfig) -> Result<SilhouetteReport> {
    let prepared = prepare(table, config)?;
    let sweep_seed = mix(config.seed, STAGE_KMEANS);
    let base = config.kmeans.to_config(config.k_min, sweep_seed);
    sweep_k(&prepared.projected_centers, config.k_min, config.k_max, &base)
}
