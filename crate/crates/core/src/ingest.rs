//! Reading tables, monthly feature matrices, and the synthetic generator.
//!
//! A feature vector is one series-month: the 28 daily kWh totals of days
//! 1 through 28. Truncating to 28 days gives every month the same
//! dimension, so centers extracted from different months can later be
//! pooled into one matrix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::calendar::{MonthKey, Timestamp};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;

/// Width of every feature vector: daily totals for days 1..=28.
pub const FEATURE_DAYS: usize = 28;

/// One meter reading.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub series_id: String,
    pub timestamp: Timestamp,
    /// Consumed energy in kilowatt-hours; finite and non-negative.
    pub kwh: f64,
}

/// A sorted, de-duplicated collection of readings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingTable {
    /// Sorted by (series_id, timestamp); no duplicate pairs.
    pub rows: Vec<Reading>,
    /// Where the readings came from: a file path or `"synthetic"`.
    pub source: String,
    /// Generator ground truth, present only for synthetic data.
    pub truth_labels: Option<BTreeMap<String, usize>>,
    /// Non-fatal notes collected while assembling the table.
    pub warnings: Vec<String>,
}

impl ReadingTable {
    /// Sorts `rows` by (series_id, timestamp) and drops duplicate pairs,
    /// keeping the first occurrence in the original order and recording a
    /// warning per dropped row.
    pub fn from_readings(mut rows: Vec<Reading>, source: String) -> Self {
        rows.sort_by(|a, b| {
            (a.series_id.as_str(), a.timestamp).cmp(&(b.series_id.as_str(), b.timestamp))
        });
        let mut warnings = Vec::new();
        let mut deduped: Vec<Reading> = Vec::with_capacity(rows.len());
        for reading in rows {
            if let Some(last) = deduped.last()
                && last.series_id == reading.series_id
                && last.timestamp == reading.timestamp
            {
                warnings.push(format!(
                    "duplicate reading for series `{}` at {}; kept the first occurrence",
                    reading.series_id, reading.timestamp
                ));
                continue;
            }
            deduped.push(reading);
        }
        Self { rows: deduped, source, truth_labels: None, warnings }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// One month's feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyMatrix {
    pub month: MonthKey,
    /// Unique, lexicographically sorted; row i of `values` belongs to
    /// `series_ids[i]`.
    pub series_ids: Vec<String>,
    /// n×28 matrix; entry (i, j) is series i's total kWh on day j+1.
    pub values: Matrix,
    /// Series excluded from this month, each with the reason string
    /// `missing_day:<d>` for the first absent day.
    pub dropped: Vec<(String, String)>,
}

#[derive(Clone)]
struct DayAccumulator {
    present: [bool; 31],
    total: [f64; 31],
}

impl DayAccumulator {
    fn new() -> Self {
        Self { present: [false; 31], total: [0.0; 31] }
    }
}

/// Builds one [`MonthlyMatrix`] per requested month, in request order.
///
/// A series appears in a month's matrix iff it has at least one reading on
/// every one of the first 28 calendar days of that month; otherwise it is
/// listed in `dropped` with the first missing day. The month list must be
/// non-empty and free of duplicates.
pub fn build_monthly_matrices(table: &ReadingTable, months: &[MonthKey]) -> Result<Vec<MonthlyMatrix>> {
    if months.is_empty() {
        return Err(Error::NoRequestedMonths);
    }
    let mut requested = BTreeSet::new();
    for month in months {
        if !requested.insert(*month) {
            return Err(Error::InvalidConfig { detail: format!("duplicate month {month} in request") });
        }
    }

    let mut per_month: BTreeMap<MonthKey, BTreeMap<&str, DayAccumulator>> =
        months.iter().map(|&m| (m, BTreeMap::new())).collect();
    for reading in &table.rows {
        let key = reading.timestamp.month_key();
        if let Some(series_map) = per_month.get_mut(&key) {
            let accumulator = series_map
                .entry(reading.series_id.as_str())
                .or_insert_with(DayAccumulator::new);
            let day = (reading.timestamp.day - 1) as usize;
            accumulator.present[day] = true;
            accumulator.total[day] += reading.kwh;
        }
    }

    let mut result = Vec::with_capacity(months.len());
    for month in months {
        let series_map = &per_month[month];
        let mut series_ids = Vec::new();
        let mut values = Matrix::zeros(0, FEATURE_DAYS);
        let mut dropped = Vec::new();
        for (series_id, accumulator) in series_map {
            match (0..FEATURE_DAYS).find(|&d| !accumulator.present[d]) {
                Some(day) => {
                    dropped.push((series_id.to_string(), format!("missing_day:{}", day + 1)));
                }
                None => {
                    series_ids.push(series_id.to_string());
                    values.push_row(&accumulator.total[..FEATURE_DAYS]);
                }
            }
        }
        result.push(MonthlyMatrix { month: *month, series_ids, values, dropped });
    }
    Ok(result)
}

/// Daily-total template of one archetype.
///
/// The family is a sinusoid over a 28-day cycle on top of a per-archetype
/// level. Levels step by `5 + 10 * noise_sigma`, which keeps any two
/// archetypes at least `(1 + 10 * noise_sigma)` apart on every single day
/// (the sinusoids can cancel at most 4 of the level gap), and therefore at
/// least `10 * noise_sigma * sqrt(28)` apart as 28-day vectors, with
/// distinctness preserved even at zero noise.
pub fn synth_template(archetype: usize, n_archetypes: usize, noise_sigma: f64, day: u8) -> f64 {
    const AMPLITUDE: f64 = 2.0;
    const BASE_LEVEL: f64 = 5.0;
    let step = 2.0 * AMPLITUDE + 1.0 + 10.0 * noise_sigma;
    let level = BASE_LEVEL + archetype as f64 * step;
    let phase = 2.0 * core::f64::consts::PI * archetype as f64 / n_archetypes as f64;
    let angle = 2.0 * core::f64::consts::PI * (day - 1) as f64 / FEATURE_DAYS as f64 + phase;
    level + AMPLITUDE * libm::sin(angle)
}

/// Generates a labeled synthetic reading table.
///
/// Series `s0..s{n-1}` get archetype `index mod n_archetypes`. For every
/// calendar day of every requested month, the series' daily total is its
/// archetype template plus seeded Gaussian noise, clamped at zero, split
/// evenly into 48 half-hourly readings (00:00, 00:30, ..., 23:30). One
/// noise value is drawn per (series, month, day) in series → month →
/// day order, so equal inputs give bit-identical tables.
pub fn synth_generate(
    n_series: usize,
    n_archetypes: usize,
    months: &[MonthKey],
    noise_sigma: f64,
    seed: u64,
) -> Result<ReadingTable> {
    if n_series > 0 && (n_archetypes == 0 || n_archetypes > n_series) {
        return Err(Error::InvalidArchetypeCount { n_series, n_archetypes });
    }
    if noise_sigma.is_nan() || noise_sigma < 0.0 {
        return Err(Error::InvalidConfig {
            detail: format!("noise_sigma must be non-negative, got {noise_sigma}"),
        });
    }

    let mut rng = SplitMix64::new(seed);
    let mut rows = Vec::new();
    let mut truth: BTreeMap<String, usize> = BTreeMap::new();
    for index in 0..n_series {
        let series_id = format!("s{index}");
        let archetype = index % n_archetypes.max(1);
        truth.insert(series_id.clone(), archetype);
        for month in months {
            for day in 1..=month.days() {
                let noise = rng.next_gaussian();
                let template = synth_template(archetype, n_archetypes, noise_sigma, day);
                let daily_total = (template + noise_sigma * noise).max(0.0);
                let per_reading = daily_total / 48.0;
                for half_hour in 0..48u8 {
                    let timestamp = Timestamp::new(
                        month.year,
                        month.month,
                        day,
                        half_hour / 2,
                        30 * (half_hour % 2),
                    )
                    .expect("generated timestamps are valid by construction");
                    rows.push(Reading { series_id: series_id.clone(), timestamp, kwh: per_reading });
                }
            }
        }
    }

    let mut table = ReadingTable::from_readings(rows, "synthetic".to_string());
    table.truth_labels = Some(truth);
    Ok(table)
}
