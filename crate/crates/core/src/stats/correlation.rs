//! Pearson correlation and lagged cross-correlation.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorrelationError {
    #[error("degenerate series: zero variance")]
    Degenerate,
    #[error("need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

fn centered_sum_squares(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss)
}

/// A sum of squares this small is rounding noise around a constant.
fn is_flat(ss: f64, v: &[f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    ss <= 16.0 * v.len() as f64 * (f64::EPSILON * scale).powi(2)
}

/// Pearson correlation of two equal-length series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(CorrelationError::TooShort { need: 2, got: x.len() });
    }
    let (mx, sxx) = centered_sum_squares(x);
    let (my, syy) = centered_sum_squares(y);
    if is_flat(sxx, x) || is_flat(syy, y) {
        return Err(CorrelationError::Degenerate);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    /// `(lag, corr(x_t, y_{t+lag}))` for lag in `-max_lag..=max_lag`.
    pub table: Vec<(i64, f64)>,
    pub best_lag: i64,
    pub best_corr: f64,
}

/// `corr(x_t, y_{t+lag})` over the overlapping window of each lag. The best
/// lag maximizes `|corr|`; ties go to the lag closest to zero. A positive
/// best lag means `x` leads `y`.
///
/// Lags whose window is degenerate are reported as NaN; if every lag is
/// degenerate the call fails.
pub fn cross_correlation(x: &[f64], y: &[f64], max_lag: usize) -> Result<CrossCorrelation, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    let need = 2 * max_lag + 3;
    if x.len() < need {
        return Err(CorrelationError::TooShort { need, got: x.len() });
    }
    let n = x.len();
    let mut table = Vec::with_capacity(2 * max_lag + 1);
    let mut best: Option<(i64, f64)> = None;
    for lag in -(max_lag as i64)..=(max_lag as i64) {
        let shift = lag.unsigned_abs() as usize;
        let (xs, ys) = if lag >= 0 {
            (&x[..n - shift], &y[shift..])
        } else {
            (&x[shift..], &y[..n - shift])
        };
        let corr = match pearson(xs, ys) {
            Ok(c) => c,
            Err(CorrelationError::Degenerate) => f64::NAN,
            Err(e) => return Err(e),
        };
        table.push((lag, corr));
        if corr.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bl, bc)) => {
                corr.abs() > bc.abs() || (corr.abs() == bc.abs() && lag.abs() < bl.abs())
            }
        };
        if better {
            best = Some((lag, corr));
        }
    }
    let (best_lag, best_corr) = best.ok_or(CorrelationError::Degenerate)?;
    Ok(CrossCorrelation {
        table,
        best_lag,
        best_corr,
    })
}

/// Period-over-period differences.
pub fn diff(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Period-over-period log changes, `ln(v[t]) − ln(v[t−1])`.
pub fn log_diff(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1].ln() - w[0].ln()).collect()
}
