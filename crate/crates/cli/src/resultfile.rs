//! Result-file serialization.
//!
//! A run persists as one UTF-8 JSON document carrying the config and every
//! fitted artifact. All floats are printed with 17 significant digits
//! (`{:.16e}`), which reproduces any double exactly on parse, so save
//! followed by load is value-exact and reruns are byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};
use somkm_core::calendar::MonthKey;
use somkm_core::evaluate::{KScore, SilhouetteReport, SkippedK};
use somkm_core::kmeans::KMeansModel;
use somkm_core::matrix::Matrix;
use somkm_core::pca::PcaModel;
use somkm_core::pipeline::{
    Assignment, KMeansTemplate, PipelineConfig, PipelineResult, SomTemplate,
};
use somkm_core::preprocess::ScalerParams;
use somkm_core::som::{SomConfig, SomModel};

use crate::config::parse_month;
use crate::error::{CliError, Result};

/// Version string written into and required from every result file.
pub const FORMAT_VERSION: &str = "1.0";

/// serde_json formatter that prints every f64 with 17 significant digits.
#[derive(Clone, Copy, Default)]
pub struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any value to JSON with the fixed float format.
pub fn to_fixed_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization of plain data cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub format_version: String,
    pub config: ConfigDto,
    pub scalers: Vec<ScalerEntry>,
    pub som_models: Vec<SomEntry>,
    pub pooled_centers: PooledDto,
    pub pca: PcaDto,
    pub kmeans: KMeansDto,
    pub report: ReportDto,
    pub assignments: Vec<AssignmentDto>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDto {
    pub months: Vec<String>,
    pub som_clusters_per_month: std::collections::BTreeMap<String, usize>,
    pub som: SomTemplateDto,
    pub pca_q: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub kmeans: KMeansTemplateDto,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SomTemplateDto {
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub sigma_start: Option<f64>,
    pub sigma_end: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansTemplateDto {
    pub max_iters: usize,
    pub n_restarts: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalerEntry {
    pub month: String,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SomEntry {
    pub month: String,
    pub config: SomConfigDto,
    pub codebook: Vec<Vec<f64>>,
    pub grid_coords: Vec<(usize, usize)>,
    pub activations: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SomConfigDto {
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub sigma_start: f64,
    pub sigma_end: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PooledDto {
    pub values: Vec<Vec<f64>>,
    pub provenance: Vec<ProvenanceDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceDto {
    pub month: String,
    pub node: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcaDto {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub total_variance: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansDto {
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDto {
    pub per_k: Vec<KScoreDto>,
    pub best_k: usize,
    pub best_score: f64,
    pub skipped: Vec<SkippedDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KScoreDto {
    pub k: usize,
    pub mean_silhouette: f64,
    pub inertia: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkippedDto {
    pub k: usize,
    pub reason: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDto {
    pub series_id: String,
    pub month: String,
    pub label: usize,
}

/// Row shape used by `report --format json`, mirroring the CSV columns.
#[derive(Debug, Serialize, Deserialize)]
pub struct ExportRow {
    pub series_id: String,
    pub year: i32,
    pub month: u8,
    pub label: usize,
}

fn matrix_to_rows(matrix: &Matrix) -> Vec<Vec<f64>> {
    matrix.rows().map(<[f64]>::to_vec).collect()
}

fn rows_to_matrix(rows: &[Vec<f64>], context: &str) -> Result<Matrix> {
    let Some(first) = rows.first() else {
        return Err(CliError::CorruptFile { detail: format!("{context}: empty matrix") });
    };
    let width = first.len();
    if width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(CliError::CorruptFile { detail: format!("{context}: ragged matrix rows") });
    }
    let mut matrix = Matrix::zeros(0, width);
    for row in rows {
        matrix.push_row(row);
    }
    Ok(matrix)
}

fn month_from(value: &str, context: &str) -> Result<MonthKey> {
    parse_month(value).ok_or_else(|| CliError::CorruptFile {
        detail: format!("{context}: `{value}` is not a YYYY-MM month"),
    })
}

/// Converts a run result into its file form.
pub fn result_to_file(result: &PipelineResult) -> ResultFile {
    let config = &result.config;
    ResultFile {
        format_version: FORMAT_VERSION.to_string(),
        config: ConfigDto {
            months: config.months.iter().map(ToString::to_string).collect(),
            som_clusters_per_month: config
                .som_clusters_per_month
                .iter()
                .map(|(m, &k)| (m.to_string(), k))
                .collect(),
            som: SomTemplateDto {
                epochs: config.som.epochs,
                lr_start: config.som.lr_start,
                lr_end: config.som.lr_end,
                sigma_start: config.som.sigma_start,
                sigma_end: config.som.sigma_end,
            },
            pca_q: config.pca_q,
            k_min: config.k_min,
            k_max: config.k_max,
            kmeans: KMeansTemplateDto {
                max_iters: config.kmeans.max_iters,
                n_restarts: config.kmeans.n_restarts,
            },
            seed: config.seed,
        },
        scalers: result
            .scalers
            .iter()
            .map(|(month, scaler)| ScalerEntry {
                month: month.to_string(),
                mins: scaler.mins.clone(),
                maxs: scaler.maxs.clone(),
            })
            .collect(),
        som_models: result
            .som_models
            .iter()
            .map(|(month, model)| SomEntry {
                month: month.to_string(),
                config: SomConfigDto {
                    grid_rows: model.config.grid_rows,
                    grid_cols: model.config.grid_cols,
                    epochs: model.config.epochs,
                    lr_start: model.config.lr_start,
                    lr_end: model.config.lr_end,
                    sigma_start: model.config.sigma_start,
                    sigma_end: model.config.sigma_end,
                    seed: model.config.seed,
                },
                codebook: matrix_to_rows(&model.codebook),
                grid_coords: model.grid_coords.clone(),
                activations: model.activations.clone(),
            })
            .collect(),
        pooled_centers: PooledDto {
            values: matrix_to_rows(&result.pooled_centers),
            provenance: result
                .pooled_provenance
                .iter()
                .map(|(month, node)| ProvenanceDto { month: month.to_string(), node: *node })
                .collect(),
        },
        pca: PcaDto {
            mean: result.pca.mean.clone(),
            components: matrix_to_rows(&result.pca.components),
            eigenvalues: result.pca.eigenvalues.clone(),
            total_variance: result.pca.total_variance,
        },
        kmeans: KMeansDto {
            centers: matrix_to_rows(&result.kmeans.centers),
            inertia: result.kmeans.inertia,
            iterations: result.kmeans.iterations,
            converged: result.kmeans.converged,
        },
        report: ReportDto {
            per_k: result
                .report
                .per_k
                .iter()
                .map(|s| KScoreDto { k: s.k, mean_silhouette: s.mean_silhouette, inertia: s.inertia })
                .collect(),
            best_k: result.report.best_k,
            best_score: result.report.best_score,
            skipped: result
                .report
                .skipped
                .iter()
                .map(|s| SkippedDto { k: s.k, reason: s.reason.clone() })
                .collect(),
        },
        assignments: result
            .assignments
            .iter()
            .map(|a| AssignmentDto {
                series_id: a.series_id.clone(),
                month: a.month.to_string(),
                label: a.label,
            })
            .collect(),
        warnings: result.warnings.clone(),
    }
}

/// Rebuilds a run result from its file form. The version must already
/// have been checked.
pub fn file_to_result(file: ResultFile) -> Result<PipelineResult> {
    let mut months = Vec::with_capacity(file.config.months.len());
    for m in &file.config.months {
        months.push(month_from(m, "config.months")?);
    }
    let mut som_clusters_per_month = std::collections::BTreeMap::new();
    for (m, k) in &file.config.som_clusters_per_month {
        som_clusters_per_month.insert(month_from(m, "config.som_clusters_per_month")?, *k);
    }
    let config = PipelineConfig {
        months,
        som_clusters_per_month,
        som: SomTemplate {
            epochs: file.config.som.epochs,
            lr_start: file.config.som.lr_start,
            lr_end: file.config.som.lr_end,
            sigma_start: file.config.som.sigma_start,
            sigma_end: file.config.som.sigma_end,
        },
        pca_q: file.config.pca_q,
        k_min: file.config.k_min,
        k_max: file.config.k_max,
        kmeans: KMeansTemplate {
            max_iters: file.config.kmeans.max_iters,
            n_restarts: file.config.kmeans.n_restarts,
        },
        seed: file.config.seed,
    };

    let mut scalers = Vec::with_capacity(file.scalers.len());
    for entry in file.scalers {
        if entry.mins.len() != entry.maxs.len() {
            return Err(CliError::CorruptFile {
                detail: format!("scalers[{}]: mins/maxs length mismatch", entry.month),
            });
        }
        scalers.push((
            month_from(&entry.month, "scalers")?,
            ScalerParams { mins: entry.mins, maxs: entry.maxs },
        ));
    }

    let mut som_models = Vec::with_capacity(file.som_models.len());
    for entry in file.som_models {
        let month = month_from(&entry.month, "som_models")?;
        let codebook = rows_to_matrix(&entry.codebook, "som_models codebook")?;
        som_models.push((
            month,
            SomModel {
                config: SomConfig {
                    grid_rows: entry.config.grid_rows,
                    grid_cols: entry.config.grid_cols,
                    epochs: entry.config.epochs,
                    lr_start: entry.config.lr_start,
                    lr_end: entry.config.lr_end,
                    sigma_start: entry.config.sigma_start,
                    sigma_end: entry.config.sigma_end,
                    seed: entry.config.seed,
                },
                codebook,
                grid_coords: entry.grid_coords,
                activations: entry.activations,
            },
        ));
    }

    let pooled_centers = rows_to_matrix(&file.pooled_centers.values, "pooled_centers")?;
    let mut pooled_provenance = Vec::with_capacity(file.pooled_centers.provenance.len());
    for p in &file.pooled_centers.provenance {
        pooled_provenance.push((month_from(&p.month, "pooled_centers.provenance")?, p.node));
    }

    let mut assignments = Vec::with_capacity(file.assignments.len());
    for a in file.assignments {
        assignments.push(Assignment {
            month: month_from(&a.month, "assignments")?,
            series_id: a.series_id,
            label: a.label,
        });
    }

    Ok(PipelineResult {
        config,
        scalers,
        som_models,
        pooled_centers,
        pooled_provenance,
        pca: PcaModel {
            mean: file.pca.mean,
            components: rows_to_matrix(&file.pca.components, "pca.components")?,
            eigenvalues: file.pca.eigenvalues,
            total_variance: file.pca.total_variance,
        },
        kmeans: KMeansModel {
            centers: rows_to_matrix(&file.kmeans.centers, "kmeans.centers")?,
            inertia: file.kmeans.inertia,
            iterations: file.kmeans.iterations,
            converged: file.kmeans.converged,
        },
        report: SilhouetteReport {
            per_k: file
                .report
                .per_k
                .into_iter()
                .map(|s| KScore { k: s.k, mean_silhouette: s.mean_silhouette, inertia: s.inertia })
                .collect(),
            best_k: file.report.best_k,
            best_score: file.report.best_score,
            skipped: file
                .report
                .skipped
                .into_iter()
                .map(|s| SkippedK { k: s.k, reason: s.reason })
                .collect(),
        },
        assignments,
        warnings: file.warnings,
    })
}

/// Writes a result file (JSON document plus trailing newline).
pub fn save_result(result: &PipelineResult, path: &Path) -> Result<()> {
    let mut json = to_fixed_json(&result_to_file(result));
    json.push('\n');
    std::fs::write(path, json).map_err(|e| CliError::io(path, e))
}

/// Reads a result file back, checking the format version before the
/// schema so an old file reports `VersionMismatch` rather than a schema
/// error.
pub fn load_result(path: &Path) -> Result<PipelineResult> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_result(&bytes)
}

/// [`load_result`] over in-memory bytes.
pub fn parse_result(bytes: &[u8]) -> Result<PipelineResult> {
    #[derive(Deserialize)]
    struct VersionProbe {
        format_version: String,
    }
    let probe: VersionProbe = serde_json::from_slice(bytes)
        .map_err(|e| CliError::CorruptFile { detail: e.to_string() })?;
    if probe.format_version != FORMAT_VERSION {
        return Err(CliError::VersionMismatch {
            found: probe.format_version,
            expected: FORMAT_VERSION.to_string(),
        });
    }
    let file: ResultFile = serde_json::from_slice(bytes)
        .map_err(|e| CliError::CorruptFile { detail: e.to_string() })?;
    file_to_result(file)
}

/// JSON for `sweep` stdout.
pub fn report_to_json(report: &SilhouetteReport) -> String {
    let dto = ReportDto {
        per_k: report
            .per_k
            .iter()
            .map(|s| KScoreDto { k: s.k, mean_silhouette: s.mean_silhouette, inertia: s.inertia })
            .collect(),
        best_k: report.best_k,
        best_score: report.best_score,
        skipped: report
            .skipped
            .iter()
            .map(|s| SkippedDto { k: s.k, reason: s.reason.clone() })
            .collect(),
    };
    to_fixed_json(&dto)
}

/// JSON for `report --format json` stdout: one row per assignment with
/// the same columns as the CSV export.
pub fn assignments_to_json(assignments: &[Assignment]) -> String {
    let rows: Vec<ExportRow> = assignments
        .iter()
        .map(|a| ExportRow {
            series_id: a.series_id.clone(),
            year: a.month.year,
            month: a.month.month,
            label: a.label,
        })
        .collect();
    to_fixed_json(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use somkm_core::ingest::synth_generate;
    use somkm_core::pipeline::{default_cluster_split, run_pipeline};

    fn small_result() -> PipelineResult {
        let months =
            vec![MonthKey::new(2012, 1).unwrap(), MonthKey::new(2012, 2).unwrap()];
        let table = synth_generate(6, 2, &months, 0.2, 11).unwrap();
        let config = PipelineConfig {
            months: months.clone(),
            som_clusters_per_month: default_cluster_split(&months, 6),
            som: SomTemplate { epochs: 40, ..SomTemplate::default() },
            pca_q: 2,
            k_min: 2,
            k_max: 4,
            kmeans: KMeansTemplate::default(),
            seed: 5,
        };
        run_pipeline(&table, &config).unwrap()
    }

    #[test]
    fn fixed_floats_prints_17_significant_digits() {
        assert_eq!(to_fixed_json(&0.1f64), "1.0000000000000001e-1");
        assert_eq!(to_fixed_json(&1.0f64), "1.0000000000000000e0");
        assert_eq!(to_fixed_json(&-0.0f64), "-0.0000000000000000e0");
        let reparsed: f64 = serde_json::from_str(&to_fixed_json(&(-0.0f64))).unwrap();
        assert_eq!(reparsed.to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let result = small_result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("result.json");
        save_result(&result, &path).unwrap();
        let loaded = load_result(&path).unwrap();
        assert_eq!(result, loaded);

        // Spot-check bit equality beyond PartialEq (covers signed zeros).
        for (a, b) in result
            .kmeans
            .centers
            .as_slice()
            .iter()
            .chain(result.pca.components.as_slice())
            .chain(result.pca.mean.iter())
            .zip(
                loaded
                    .kmeans
                    .centers
                    .as_slice()
                    .iter()
                    .chain(loaded.pca.components.as_slice())
                    .chain(loaded.pca.mean.iter()),
            )
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        // Saving the reloaded result reproduces the bytes.
        let path2 = dir.path().join("result2.json");
        save_result(&loaded, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn version_gate_rejects_other_versions() {
        let result = small_result();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("result.json");
        save_result(&result, &path).unwrap();

        let mut value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        value["format_version"] = serde_json::Value::String("0.0".to_string());
        let err = parse_result(serde_json::to_string(&value).unwrap().as_bytes()).unwrap_err();
        match err {
            CliError::VersionMismatch { found, expected } => {
                assert_eq!(found, "0.0");
                assert_eq!(expected, FORMAT_VERSION);
            }
            other => panic!("expected VersionMismatch, got {other}"),
        }
    }

    #[test]
    fn truncated_and_malformed_files_are_corrupt() {
        let result = small_result();
        let json = to_fixed_json(&result_to_file(&result));
        let truncated = &json.as_bytes()[..json.len() / 2];
        assert!(matches!(parse_result(truncated), Err(CliError::CorruptFile { .. })));
        assert!(matches!(parse_result(b"not json"), Err(CliError::CorruptFile { .. })));

        // Valid JSON, right version, wrong schema.
        let bad = format!(r#"{{"format_version": "{FORMAT_VERSION}", "surprise": 1}}"#);
        assert!(matches!(parse_result(bad.as_bytes()), Err(CliError::CorruptFile { .. })));
    }

    #[test]
    fn missing_version_field_is_corrupt() {
        assert!(matches!(parse_result(b"{}"), Err(CliError::CorruptFile { .. })));
    }

    #[test]
    fn report_json_is_parseable_and_ordered() {
        let result = small_result();
        let json = report_to_json(&result.report);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(value["per_k"].is_array());
        assert_eq!(value["best_k"].as_u64().unwrap() as usize, result.report.best_k);

        let rows = assignments_to_json(&result.assignments);
        let parsed: Vec<ExportRow> = serde_json::from_str(&rows).unwrap();
        assert_eq!(parsed.len(), result.assignments.len());
        assert_eq!(parsed[0].year, 2012);
    }
}
