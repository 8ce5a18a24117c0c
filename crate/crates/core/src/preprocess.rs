//! Per-column min-max scaling.
//!
//! Each month's series×day matrix is scaled into `[0, 1]` column by column
//! before SOM training, and the fitted parameters are kept so model vectors
//! can be mapped back to consumption units.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Fitted per-column minima and maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl ScalerParams {
    /// Number of columns the scaler was fitted on.
    pub fn width(&self) -> usize {
        self.mins.len()
    }

    /// True for columns whose min equals their max; such columns scale to 0
    /// and invert back to the shared value.
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.mins[j] == self.maxs[j]
    }
}

/// Fits per-column bounds. Errors with [`Error::EmptyMatrix`] when `data`
/// has no rows.
pub fn fit_minmax(data: &Matrix) -> Result<ScalerParams> {
    if data.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut mins = data.row(0).to_vec();
    let mut maxs = data.row(0).to_vec();
    for i in 1..data.n_rows() {
        for (j, &x) in data.row(i).iter().enumerate() {
            if x < mins[j] {
                mins[j] = x;
            }
            if x > maxs[j] {
                maxs[j] = x;
            }
        }
    }
    Ok(ScalerParams { mins, maxs })
}

/// Applies `(x - min) / (max - min)` per column. Degenerate columns map to
/// 0. Values outside the fitted range extrapolate beyond `[0, 1]`; nothing
/// is clamped.
pub fn apply_minmax(data: &Matrix, params: &ScalerParams) -> Result<Matrix> {
    check_width(data, params)?;
    let mut out = data.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        for (j, x) in row.iter_mut().enumerate() {
            *x = if params.mins[j] == params.maxs[j] {
                0.0
            } else {
                (*x - params.mins[j]) / (params.maxs[j] - params.mins[j])
            };
        }
    }
    Ok(out)
}

/// Exact inverse of [`apply_minmax`]: `y * (max - min) + min`, with
/// degenerate columns restored to their shared value.
pub fn invert_minmax(data: &Matrix, params: &ScalerParams) -> Result<Matrix> {
    check_width(data, params)?;
    let mut out = data.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        for (j, y) in row.iter_mut().enumerate() {
            *y = if params.mins[j] == params.maxs[j] {
                params.mins[j]
            } else {
                *y * (params.maxs[j] - params.mins[j]) + params.mins[j]
            };
        }
    }
    Ok(out)
}

fn check_width(data: &Matrix, params: &ScalerParams) -> Result<()> {
    if data.n_cols() != params.width() {
        return Err(Error::DimensionMismatch { expected: params.width(), found: data.n_cols() });
    }
    Ok(())
}
