//! Daily price and hash-rate observations and the analyses run on them.
//!
//! Input files are CSV with the header `date,price_usd,hashrate_ehs`, ISO
//! dates, one row per calendar day. Missing days are rejected or filled
//! according to a [`GapPolicy`].

mod analysis;
mod granger;
mod segment;

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use thiserror::Error;

use crate::protocol::{hashes_per_bitcoin, HashRate, TARGET_BLOCK_TIME_SECS};
use crate::stats::CorrelationError;

pub use analysis::{correlation, cross_correlation, log_change_correlation, pct_change, Column, CorrelationBasis};
pub use granger::{granger_f_test, granger_test, Direction, GrangerResult};
pub use segment::{segment, PeriodSegmentation, Segment};

pub const CSV_COLUMNS: [&str; 3] = ["date", "price_usd", "hashrate_ehs"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowProblem {
    /// 1-based line in the source file (the header is line 1), or 1-based
    /// row index for in-memory input.
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum EmpiricsError {
    #[error("{source_label}: {} invalid row(s): {}", problems.len(), join_problems(problems))]
    Ingest {
        source_label: String,
        problems: Vec<RowProblem>,
    },
    #[error("{source_label}: {message}")]
    Schema { source_label: String, message: String },
    #[error("reading {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("date {0} not present in series")]
    MissingDate(NaiveDate),
    #[error("series too short: {0}")]
    TooShort(String),
    #[error("degenerate segment: zero variance")]
    Degenerate,
    #[error("collinear lags: regression matrix is singular")]
    CollinearLags,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_problems(problems: &[RowProblem]) -> String {
    const SHOWN: usize = 10;
    let mut parts: Vec<String> = problems.iter().take(SHOWN).map(ToString::to_string).collect();
    if problems.len() > SHOWN {
        parts.push(format!("... and {} more", problems.len() - SHOWN));
    }
    parts.join("; ")
}

impl From<CorrelationError> for EmpiricsError {
    fn from(e: CorrelationError) -> Self {
        match e {
            CorrelationError::Degenerate => EmpiricsError::Degenerate,
            other => EmpiricsError::TooShort(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    #[default]
    Reject,
    /// Repeat the last observed row.
    ForwardFill,
    /// Interpolate both columns linearly in time.
    Linear,
}

impl FromStr for GapPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reject" => Ok(GapPolicy::Reject),
            "forward_fill" | "forward-fill" => Ok(GapPolicy::ForwardFill),
            "linear" => Ok(GapPolicy::Linear),
            other => Err(format!("unknown gap policy {other:?} (expected reject, forward_fill or linear)")),
        }
    }
}

impl fmt::Display for GapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapPolicy::Reject => "reject",
            GapPolicy::ForwardFill => "forward_fill",
            GapPolicy::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    /// Dollars per coin.
    pub price: f64,
    /// Exahashes per second.
    pub hashrate: f64,
}

/// Validated, gap-free daily observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    rows: Vec<Observation>,
    source: String,
    gap_policy: GapPolicy,
    gaps_filled: usize,
}

impl ObservationSeries {
    /// Validates in-memory rows; problems are reported by 1-based row index.
    pub fn from_rows(
        rows: Vec<Observation>,
        source: impl Into<String>,
        gap_policy: GapPolicy,
    ) -> Result<Self, EmpiricsError> {
        let numbered = rows.into_iter().zip(1u64..).map(|(o, i)| (i, o)).collect();
        Self::build(numbered, source.into(), gap_policy, Vec::new())
    }

    pub fn ingest_path(path: impl AsRef<Path>, gap_policy: GapPolicy) -> Result<Self, EmpiricsError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|err| EmpiricsError::Io {
            path: path.display().to_string(),
            err,
        })?;
        Self::ingest_reader(file, path.display().to_string(), gap_policy)
    }

    pub fn ingest_reader<R: Read>(
        reader: R,
        source: impl Into<String>,
        gap_policy: GapPolicy,
    ) -> Result<Self, EmpiricsError> {
        let source = source.into();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let schema_err = |message: String| EmpiricsError::Schema {
            source_label: source.clone(),
            message,
        };
        let headers = rdr
            .headers()
            .map_err(|e| schema_err(format!("unreadable header: {e}")))?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != CSV_COLUMNS {
            return Err(schema_err(format!(
                "header must be {:?}, found {:?}",
                CSV_COLUMNS.join(","),
                names.join(",")
            )));
        }

        let mut parsed = Vec::new();
        let mut problems = Vec::new();
        for record in rdr.records() {
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(0);
                    problems.push(RowProblem {
                        line,
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.iter().all(str::is_empty) {
                continue;
            }
            match parse_record(&record) {
                Ok(obs) => parsed.push((line, obs)),
                Err(message) => problems.push(RowProblem { line, message }),
            }
        }
        Self::build(parsed, source, gap_policy, problems)
    }

    fn build(
        rows: Vec<(u64, Observation)>,
        source: String,
        gap_policy: GapPolicy,
        mut problems: Vec<RowProblem>,
    ) -> Result<Self, EmpiricsError> {
        for (line, o) in &rows {
            if !(o.price.is_finite() && o.price > 0.0) {
                problems.push(RowProblem {
                    line: *line,
                    message: format!("price_usd must be > 0, got {}", o.price),
                });
            }
            if !(o.hashrate.is_finite() && o.hashrate >= 0.0) {
                problems.push(RowProblem {
                    line: *line,
                    message: format!("hashrate_ehs must be >= 0, got {}", o.hashrate),
                });
            }
        }
        for w in rows.windows(2) {
            let ((_, a), (line, b)) = (&w[0], &w[1]);
            if b.date <= a.date {
                problems.push(RowProblem {
                    line: *line,
                    message: format!("date {} does not follow {}", b.date, a.date),
                });
            } else if gap_policy == GapPolicy::Reject && (b.date - a.date).num_days() > 1 {
                problems.push(RowProblem {
                    line: *line,
                    message: format!("{} missing day(s) between {} and {}", (b.date - a.date).num_days() - 1, a.date, b.date),
                });
            }
        }
        if !problems.is_empty() {
            problems.sort_by_key(|p| p.line);
            return Err(EmpiricsError::Ingest {
                source_label: source,
                problems,
            });
        }

        let mut filled = Vec::with_capacity(rows.len());
        let mut gaps_filled = 0;
        for (_, obs) in rows {
            if let Some(prev) = filled.last().copied() {
                let prev: Observation = prev;
                let missing = (obs.date - prev.date).num_days() - 1;
                for k in 1..=missing {
                    let date = prev.date + Days::new(k as u64);
                    let fill = match gap_policy {
                        GapPolicy::ForwardFill | GapPolicy::Reject => Observation { date, ..prev },
                        GapPolicy::Linear => {
                            let w = k as f64 / (missing + 1) as f64;
                            Observation {
                                date,
                                price: prev.price + w * (obs.price - prev.price),
                                hashrate: prev.hashrate + w * (obs.hashrate - prev.hashrate),
                            }
                        }
                    };
                    filled.push(fill);
                    gaps_filled += 1;
                }
            }
            filled.push(obs);
        }
        Ok(Self {
            rows: filled,
            source,
            gap_policy,
            gaps_filled,
        })
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn gap_policy(&self) -> GapPolicy {
        self.gap_policy
    }

    pub fn gaps_filled(&self) -> usize {
        self.gaps_filled
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rows.first().map(|o| o.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.rows.last().map(|o| o.date)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.rows.iter().map(|o| o.date).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.rows.iter().map(|o| o.price).collect()
    }

    pub fn hashrates(&self) -> Vec<f64> {
        self.rows.iter().map(|o| o.hashrate).collect()
    }

    /// Row index of `date`; rows are consecutive days.
    pub fn index_of(&self, date: NaiveDate) -> Result<usize, EmpiricsError> {
        let first = self.first_date().ok_or(EmpiricsError::MissingDate(date))?;
        let offset = (date - first).num_days();
        usize::try_from(offset)
            .ok()
            .filter(|&i| i < self.rows.len())
            .ok_or(EmpiricsError::MissingDate(date))
    }

    /// Rows from `from` to `to` inclusive.
    pub fn window(&self, from: NaiveDate, to: NaiveDate) -> Result<&[Observation], EmpiricsError> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        if b < a {
            return Err(EmpiricsError::InvalidArgument(format!("window end {to} precedes start {from}")));
        }
        Ok(&self.rows[a..=b])
    }

    /// Exahashes spent per coin on each day, with the reward taken from the
    /// halving calendar. `None` where the hash rate is zero.
    pub fn hashes_per_bitcoin(&self) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|o| {
                let rate = HashRate::from_ehs(o.hashrate).ok()?;
                if o.hashrate == 0.0 {
                    return None;
                }
                hashes_per_bitcoin(rate, reward_on_date(o.date), TARGET_BLOCK_TIME_SECS).ok()
            })
            .collect()
    }
}

fn parse_record(record: &csv::StringRecord) -> Result<Observation, String> {
    if record.len() != CSV_COLUMNS.len() {
        return Err(format!("expected {} fields, found {}", CSV_COLUMNS.len(), record.len()));
    }
    let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
        .map_err(|e| format!("date {:?}: {e}", &record[0]))?;
    let num = |i: usize| -> Result<f64, String> {
        record[i]
            .parse::<f64>()
            .map_err(|_| format!("{} {:?} is not a number", CSV_COLUMNS[i], &record[i]))
    };
    Ok(Observation {
        date,
        price: num(1)?,
        hashrate: num(2)?,
    })
}

/// Dates on which the mainnet block reward halved.
pub const HALVING_DATES: [(i32, u32, u32); 4] = [(2012, 11, 28), (2016, 7, 9), (2020, 5, 11), (2024, 4, 20)];

/// Mainnet block reward in force on `date` (50 BTC halved once per
/// halving date reached).
pub fn reward_on_date(date: NaiveDate) -> f64 {
    let halvings = HALVING_DATES
        .iter()
        .filter(|&&(y, m, d)| NaiveDate::from_ymd_opt(y, m, d).is_some_and(|h| date >= h))
        .count();
    crate::protocol::IssuanceSchedule::bitcoin().epoch_reward(halvings as u64)
}
