//! Percent error along the bar, residual statistics and worst-case selection.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

/// Denominator of the percent error; fixed, whatever the beam length.
pub const BAR_LENGTH_MM: f64 = 1000.0;

/// `|predicted - real| / 1000 × 100`.
pub fn error_percent(real_mm: f64, predicted_mm: f64) -> f64 {
    ((predicted_mm - real_mm) / BAR_LENGTH_MM).abs() * 100.0
}

/// One predicted scenario.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalRow {
    pub label: String,
    pub real_mm: f64,
    pub predicted_mm: f64,
    pub error_percent: f64,
    pub clamping: String,
}

impl EvalRow {
    pub fn new(label: impl Into<String>, real_mm: f64, predicted_mm: f64, clamping: impl Into<String>) -> Self {
        EvalRow {
            label: label.into(),
            real_mm,
            predicted_mm,
            error_percent: error_percent(real_mm, predicted_mm),
            clamping: clamping.into(),
        }
    }

    /// Rebuilds a row with a stored error, which must agree with the
    /// recomputed one up to 3-decimal rounding.
    pub fn with_error(
        label: impl Into<String>,
        real_mm: f64,
        predicted_mm: f64,
        stored_error: f64,
        clamping: impl Into<String>,
    ) -> Result<Self> {
        let row = Self::new(label, real_mm, predicted_mm, clamping);
        if !((row.error_percent - stored_error).abs() <= 5e-4 + 1e-12) {
            return Err(Error::Validation(alloc::format!(
                "row `{}`: stored error {stored_error} but |{predicted_mm} - {real_mm}| gives {}",
                row.label,
                row.error_percent
            )));
        }
        Ok(row)
    }

    pub fn residual_mm(&self) -> f64 {
        self.predicted_mm - self.real_mm
    }
}

fn residuals(rows: &[EvalRow]) -> Result<Vec<f64>> {
    if rows.len() < 2 {
        return Err(Error::Contract(alloc::format!(
            "residual statistics need at least 2 rows, got {}",
            rows.len()
        )));
    }
    Ok(rows.iter().map(EvalRow::residual_mm).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population standard deviation of the signed residuals, in mm.
pub fn residual_std(rows: &[EvalRow]) -> Result<f64> {
    let r = residuals(rows)?;
    let m = mean(&r);
    Ok((r.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / r.len() as f64).sqrt())
}

/// Root-mean-square residual, in mm.
pub fn rmse(rows: &[EvalRow]) -> Result<f64> {
    let r = residuals(rows)?;
    Ok((r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt())
}

pub fn mean_residual(rows: &[EvalRow]) -> Result<f64> {
    Ok(mean(&residuals(rows)?))
}

/// The `k` rows with the largest error, descending; ties go to the smaller
/// real position first. `k` is capped at the number of rows.
pub fn worst_k(rows: &[EvalRow], k: usize) -> Vec<EvalRow> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        b.error_percent
            .total_cmp(&a.error_percent)
            .then(a.real_mm.total_cmp(&b.real_mm))
    });
    sorted.truncate(k);
    sorted
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub n: usize,
    pub residual_std_mm: f64,
    pub rmse_mm: f64,
    pub mean_residual_mm: f64,
}

pub fn summarize(rows: &[EvalRow]) -> Result<Summary> {
    Ok(Summary {
        n: rows.len(),
        residual_std_mm: residual_std(rows)?,
        rmse_mm: rmse(rows)?,
        mean_residual_mm: mean_residual(rows)?,
    })
}
