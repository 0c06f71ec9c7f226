use chrono::NaiveDate;

use super::{EmpiricsError, ObservationSeries};
use crate::stats::{self, log_diff, CrossCorrelation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Price,
    Hashrate,
    /// Exahashes per coin, halving-aware.
    HashesPerBitcoin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationBasis {
    Levels,
    LogChanges,
}

fn column_value(series: &ObservationSeries, column: Column, idx: usize) -> Result<f64, EmpiricsError> {
    let row = &series.rows()[idx];
    match column {
        Column::Price => Ok(row.price),
        Column::Hashrate => Ok(row.hashrate),
        Column::HashesPerBitcoin => series.hashes_per_bitcoin()[idx]
            .ok_or_else(|| EmpiricsError::InvalidArgument(format!("hashes per bitcoin undefined on {}", row.date))),
    }
}

/// `100 × (v_to − v_from) / v_from`.
pub fn pct_change(series: &ObservationSeries, column: Column, from: NaiveDate, to: NaiveDate) -> Result<f64, EmpiricsError> {
    let a = column_value(series, column, series.index_of(from)?)?;
    let b = column_value(series, column, series.index_of(to)?)?;
    if a == 0.0 {
        return Err(EmpiricsError::InvalidArgument(format!("value on {from} is zero")));
    }
    Ok(100.0 * (b - a) / a)
}

fn window_columns(series: &ObservationSeries, from: NaiveDate, to: NaiveDate) -> Result<(Vec<f64>, Vec<f64>), EmpiricsError> {
    let rows = series.window(from, to)?;
    if rows.len() < 3 {
        return Err(EmpiricsError::TooShort(format!("{} row(s) between {from} and {to}, need 3", rows.len())));
    }
    Ok((rows.iter().map(|o| o.price).collect(), rows.iter().map(|o| o.hashrate).collect()))
}

/// Pearson correlation of price and hash-rate levels over `[from, to]`.
pub fn correlation(series: &ObservationSeries, from: NaiveDate, to: NaiveDate) -> Result<f64, EmpiricsError> {
    let (p, h) = window_columns(series, from, to)?;
    Ok(stats::pearson(&p, &h)?)
}

/// Pearson correlation of daily log changes over `[from, to]`.
pub fn log_change_correlation(series: &ObservationSeries, from: NaiveDate, to: NaiveDate) -> Result<f64, EmpiricsError> {
    let (p, h) = window_columns(series, from, to)?;
    if h.iter().any(|&v| v <= 0.0) {
        return Err(EmpiricsError::InvalidArgument("log changes need a positive hash rate".into()));
    }
    Ok(stats::pearson(&log_diff(&p), &log_diff(&h))?)
}

/// `corr(price_t, hashrate_{t+lag})` for lags in `[-max_lag, max_lag]`.
/// A positive best lag means price leads.
pub fn cross_correlation(
    series: &ObservationSeries,
    max_lag: usize,
    on: CorrelationBasis,
) -> Result<CrossCorrelation, EmpiricsError> {
    if series.len() <= 2 * max_lag + 2 {
        return Err(EmpiricsError::TooShort(format!(
            "{} rows, need more than {} for max_lag {max_lag}",
            series.len(),
            2 * max_lag + 2
        )));
    }
    let (p, h) = (series.prices(), series.hashrates());
    let cc = match on {
        CorrelationBasis::Levels => stats::cross_correlation(&p, &h, max_lag)?,
        CorrelationBasis::LogChanges => {
            if h.iter().any(|&v| v <= 0.0) {
                return Err(EmpiricsError::InvalidArgument("log changes need a positive hash rate".into()));
            }
            stats::cross_correlation(&log_diff(&p), &log_diff(&h), max_lag)?
        }
    };
    Ok(cc)
}
