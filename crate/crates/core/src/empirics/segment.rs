//! Splitting a price history into rise-and-fall episodes at the troughs of
//! smoothed log price.
//!
//! 1. Smooth `ln(price)` with a centered moving average of `smoothing_window`
//!    days (the window shrinks at the series edges).
//! 2. A day is a major peak when its smoothed value is the maximum within
//!    `min_segment` days on either side, and strictly above every earlier
//!    day in that neighbourhood (so a plateau yields one peak).
//! 3. Between each pair of consecutive major peaks the boundary is the day
//!    of minimum smoothed log price (earliest on ties).

use chrono::NaiveDate;

use super::{EmpiricsError, ObservationSeries};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub label: String,
}

/// Consecutive segments share their boundary day: each one ends on the
/// trough where the next begins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodSegmentation {
    pub boundaries: Vec<NaiveDate>,
    pub segments: Vec<Segment>,
}

/// Centered moving average; windows are truncated at the edges.
pub(crate) fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    let half_lo = (window.max(1) - 1) / 2;
    let half_hi = window.max(1) - 1 - half_lo;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_lo);
            let hi = (i + half_hi).min(n - 1);
            if lo == hi {
                values[i]
            } else {
                values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
            }
        })
        .collect()
}

/// Smoothed log prices closer than this are equal; edge windows of a flat
/// series differ only by rounding.
const LEVEL_TOL: f64 = 1e-12;

fn major_peaks(s: &[f64], radius: usize) -> Vec<usize> {
    let n = s.len();
    (0..n)
        .filter(|&i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            s[lo..i].iter().all(|&v| v < s[i] - LEVEL_TOL) && s[i + 1..=hi].iter().all(|&v| v <= s[i] + LEVEL_TOL)
        })
        .collect()
}

pub fn segment(series: &ObservationSeries, smoothing_window: usize, min_segment: usize) -> Result<PeriodSegmentation, EmpiricsError> {
    if smoothing_window == 0 || min_segment == 0 {
        return Err(EmpiricsError::InvalidArgument(
            "smoothing_window and min_segment must be >= 1".into(),
        ));
    }
    if series.len() <= 2 * min_segment {
        return Err(EmpiricsError::TooShort(format!(
            "{} rows, segmentation with min_segment {min_segment} needs more than {}",
            series.len(),
            2 * min_segment
        )));
    }
    let log_price: Vec<f64> = series.rows().iter().map(|o| o.price.ln()).collect();
    let smoothed = smooth(&log_price, smoothing_window);
    let peaks = major_peaks(&smoothed, min_segment);

    let dates = series.dates();
    let last = dates.len() - 1;
    let mut boundary_idx: Vec<usize> = peaks
        .windows(2)
        .filter_map(|w| {
            (w[0] + 1..w[1]).fold(None, |best: Option<usize>, i| match best {
                Some(b) if smoothed[b] <= smoothed[i] + LEVEL_TOL => Some(b),
                _ => Some(i),
            })
        })
        .filter(|&i| i > 0 && i < last)
        .collect();
    boundary_idx.dedup();

    let boundaries: Vec<NaiveDate> = boundary_idx.iter().map(|&i| dates[i]).collect();
    let mut edges = Vec::with_capacity(boundaries.len() + 2);
    edges.push(dates[0]);
    edges.extend(&boundaries);
    edges.push(dates[last]);
    let segments = edges
        .windows(2)
        .enumerate()
        .map(|(k, w)| Segment {
            start: w[0],
            end: w[1],
            label: format!("Period {}", k + 1),
        })
        .collect();
    Ok(PeriodSegmentation { boundaries, segments })
}
