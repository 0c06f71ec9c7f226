//! Bivariate Granger F-test on daily log changes.
//!
//! For target `y` and source `x`, with `L` lags and `T` usable rows:
//!
//! ```text
//! restricted:   y_t = c + Σ a_i y_{t-i}
//! unrestricted: y_t = c + Σ a_i y_{t-i} + Σ b_i x_{t-i}
//! F = ((RSS_r − RSS_u) / L) / (RSS_u / (T − 2L − 1))
//! ```
//!
//! and the p-value is the upper tail of F(L, T − 2L − 1).

use super::{EmpiricsError, ObservationSeries};
use crate::stats::{f_sf, log_diff, ols};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    PriceToHash,
    HashToPrice,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::PriceToHash => "price->hash",
            Direction::HashToPrice => "hash->price",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrangerResult {
    pub f: f64,
    pub p: f64,
    pub df_num: usize,
    pub df_den: usize,
    pub nobs: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

/// Restricted fit this close to perfect leaves nothing for the source to
/// explain.
const PERFECT_FIT: f64 = 1e-20;

/// Granger F-test of `source` on already-stationary `target`.
pub fn granger_f_test(target: &[f64], source: &[f64], lags: usize) -> Result<GrangerResult, EmpiricsError> {
    if target.len() != source.len() {
        return Err(EmpiricsError::InvalidArgument(format!(
            "series lengths differ: {} vs {}",
            target.len(),
            source.len()
        )));
    }
    if lags == 0 {
        return Err(EmpiricsError::InvalidArgument("lags must be >= 1".into()));
    }
    let nobs = target.len().saturating_sub(lags);
    let k_u = 2 * lags + 1;
    if nobs <= k_u {
        return Err(EmpiricsError::TooShort(format!(
            "{} observations leave {nobs} rows for {k_u} regressors",
            target.len()
        )));
    }
    let k_r = lags + 1;
    let mut design_r = Vec::with_capacity(nobs * k_r);
    let mut design_u = Vec::with_capacity(nobs * k_u);
    for t in lags..target.len() {
        design_r.push(1.0);
        design_u.push(1.0);
        for i in 1..=lags {
            design_r.push(target[t - i]);
            design_u.push(target[t - i]);
        }
        for i in 1..=lags {
            design_u.push(source[t - i]);
        }
    }
    let y = &target[lags..];
    let restricted = ols(&design_r, k_r, y).ok_or(EmpiricsError::CollinearLags)?;
    let unrestricted = ols(&design_u, k_u, y).ok_or(EmpiricsError::CollinearLags)?;

    let mean = y.iter().sum::<f64>() / nobs as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let df_den = nobs - k_u;
    let (rss_r, rss_u) = (restricted.rss, unrestricted.rss);
    let gain = (rss_r - rss_u).max(0.0);
    let f = if rss_r <= PERFECT_FIT * tss.max(f64::MIN_POSITIVE) {
        0.0
    } else if rss_u == 0.0 {
        f64::INFINITY
    } else {
        (gain / lags as f64) / (rss_u / df_den as f64)
    };
    Ok(GrangerResult {
        f,
        p: f_sf(f, lags as f64, df_den as f64),
        df_num: lags,
        df_den,
        nobs,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
    })
}

/// Tests whether one column's log changes help predict the other's.
pub fn granger_test(series: &ObservationSeries, direction: Direction, lags: usize) -> Result<GrangerResult, EmpiricsError> {
    if series.len() <= 3 * lags + 10 {
        return Err(EmpiricsError::TooShort(format!(
            "{} rows, Granger test with {lags} lags needs more than {}",
            series.len(),
            3 * lags + 10
        )));
    }
    let hashes = series.hashrates();
    if hashes.iter().any(|&h| h <= 0.0) {
        return Err(EmpiricsError::InvalidArgument("log changes need a positive hash rate".into()));
    }
    let price = log_diff(&series.prices());
    let hash = log_diff(&hashes);
    match direction {
        Direction::PriceToHash => granger_f_test(&hash, &price, lags),
        Direction::HashToPrice => granger_f_test(&price, &hash, lags),
    }
}
