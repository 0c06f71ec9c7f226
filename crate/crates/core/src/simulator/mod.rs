//! Forward simulation of the mining sector under an exogenous price path.
//!
//! Each period is one block interval. The hash supply for period `t + 1` is
//! computed only from the state at `t`, so a price move shows up in hashes
//! one period later. Issuance per period is the scheduled block reward and
//! never depends on hashes.

mod price_path;

use std::io::Write;

use thiserror::Error;

use crate::miner_econ::{update_hashes, MarketState, ModelParams};
use crate::protocol::{hashes_per_bitcoin, HashRate, IssuanceSchedule};
use crate::stats::{cross_correlation, diff, CorrelationError};

pub use price_path::{NormalStream, PricePathSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(
        "refusing divergent configuration: worst-case n·el = {bound} but n·el < 2 is required \
         for the hash recursion to converge (set allow_divergent to override)"
    )]
    Divergent { bound: f64 },
    #[error("lead-lag probe: {0}")]
    Probe(#[from] CorrelationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    pub schedule: IssuanceSchedule,
    pub price_path: PricePathSpec,
    /// Exahashes in period 0.
    pub initial_hashes: f64,
    pub horizon: u64,
    /// Periods per output row; 144 is one day of 10-minute blocks.
    pub aggregation: u64,
    /// Block height of period 0, which fixes where halvings fall.
    pub start_height: u64,
    pub seed: u64,
    pub allow_divergent: bool,
}

pub const DAILY_PERIODS: u64 = 144;

impl Scenario {
    pub fn new(params: ModelParams, price_path: PricePathSpec, initial_hashes: f64, horizon: u64) -> Self {
        Self {
            params,
            schedule: IssuanceSchedule::bitcoin(),
            price_path,
            initial_hashes,
            horizon,
            aggregation: DAILY_PERIODS,
            start_height: 0,
            seed: 0,
            allow_divergent: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon == 0 {
            return Err(SimError::InvalidScenario("horizon must be >= 1".into()));
        }
        if self.aggregation == 0 {
            return Err(SimError::InvalidScenario("aggregation must be >= 1".into()));
        }
        if !(self.initial_hashes.is_finite() && self.initial_hashes >= 0.0) {
            return Err(SimError::InvalidScenario(format!(
                "initial_hashes must be finite and >= 0, got {}",
                self.initial_hashes
            )));
        }
        if self.start_height.checked_add(self.horizon).is_none() {
            return Err(SimError::InvalidScenario("start_height + horizon overflows".into()));
        }
        self.price_path.validate()?;
        if !self.params.is_stable() && !self.allow_divergent {
            return Err(SimError::Divergent {
                bound: self.params.stability_bound(),
            });
        }
        Ok(())
    }
}

/// One simulated period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodRecord {
    pub state: MarketState,
    /// `None` once the block reward is zero.
    pub hashes_per_bitcoin: Option<f64>,
    /// This period's hashes were floored at zero by the update.
    pub clamped: bool,
}

/// One output row; a single period or an aggregate of consecutive periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    /// First period covered by the row.
    pub period: u64,
    /// Price in the last covered period.
    pub price: f64,
    /// Mean hashes per period.
    pub total_hashes: f64,
    pub revenue: f64,
    pub variable_cost: f64,
    pub excess_profit: f64,
    /// Coins issued over the row.
    pub reward: f64,
    /// Total hashes over the row divided by coins issued.
    pub hashes_per_bitcoin: Option<f64>,
    pub clamp_flag: bool,
}

pub const CSV_HEADER: [&str; 9] = [
    "period",
    "price",
    "total_hashes",
    "revenue",
    "variable_cost",
    "excess_profit",
    "reward",
    "hashes_per_bitcoin",
    "clamp_flag",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub records: Vec<PeriodRecord>,
    pub block_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadLag {
    /// Positive when price changes lead hash changes.
    pub best_lag: i64,
    pub correlation: f64,
}

impl SimOutput {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.state.price).collect()
    }

    pub fn total_hashes(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.state.total_hashes).collect()
    }

    pub fn final_state(&self) -> Option<&MarketState> {
        self.records.last().map(|r| &r.state)
    }

    /// Coins issued over the whole run.
    pub fn total_coins_issued(&self) -> f64 {
        self.records.iter().map(|r| r.state.reward).sum()
    }

    pub fn clamp_count(&self) -> usize {
        self.records.iter().filter(|r| r.clamped).count()
    }

    /// Periods whose block reward differs from the previous period's.
    pub fn halving_periods(&self) -> Vec<u64> {
        self.records
            .windows(2)
            .filter(|w| w[1].state.reward != w[0].state.reward)
            .map(|w| w[1].state.period)
            .collect()
    }

    /// First period from which `|EX| ≤ rel_tol · revenue` holds through the
    /// end of the run.
    pub fn convergence_period(&self, rel_tol: f64) -> Option<u64> {
        let settled = |r: &PeriodRecord| r.state.excess_profit.abs() <= rel_tol * r.state.revenue.abs();
        let mut first = None;
        for r in self.records.iter().rev() {
            if settled(r) {
                first = Some(r.state.period);
            } else {
                break;
            }
        }
        first
    }

    pub fn rows(&self, aggregation: u64) -> Vec<SimRow> {
        let k = usize::try_from(aggregation.max(1)).unwrap_or(usize::MAX);
        self.records
            .chunks(k)
            .map(|chunk| {
                if let [only] = chunk {
                    let s = &only.state;
                    return SimRow {
                        period: s.period,
                        price: s.price,
                        total_hashes: s.total_hashes,
                        revenue: s.revenue,
                        variable_cost: s.variable_cost,
                        excess_profit: s.excess_profit,
                        reward: s.reward,
                        hashes_per_bitcoin: only.hashes_per_bitcoin,
                        clamp_flag: only.clamped,
                    };
                }
                let n = chunk.len() as f64;
                let sum = |f: fn(&MarketState) -> f64| chunk.iter().map(|r| f(&r.state)).sum::<f64>();
                let hashes = sum(|s| s.total_hashes);
                let coins = sum(|s| s.reward);
                SimRow {
                    period: chunk[0].state.period,
                    price: chunk[chunk.len() - 1].state.price,
                    total_hashes: hashes / n,
                    revenue: sum(|s| s.revenue),
                    variable_cost: sum(|s| s.variable_cost),
                    excess_profit: sum(|s| s.excess_profit),
                    reward: coins,
                    hashes_per_bitcoin: (coins > 0.0).then(|| hashes / coins),
                    clamp_flag: chunk.iter().any(|r| r.clamped),
                }
            })
            .collect()
    }

    /// Writes rows as CSV in `CSV_HEADER` order. Floats use Rust's shortest
    /// round-trip formatting; an undefined hashes-per-bitcoin is empty;
    /// `clamp_flag` is 0 or 1.
    pub fn write_csv<W: Write>(&self, aggregation: u64, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", CSV_HEADER.join(","))?;
        for row in self.rows(aggregation) {
            let hpb = row.hashes_per_bitcoin.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.period,
                row.price,
                row.total_hashes,
                row.revenue,
                row.variable_cost,
                row.excess_profit,
                row.reward,
                hpb,
                u8::from(row.clamp_flag)
            )?;
        }
        Ok(())
    }
}

/// Runs the scenario forward over its horizon.
pub fn run(scenario: &Scenario) -> Result<SimOutput, SimError> {
    scenario.validate()?;
    let prices = scenario.price_path.generate(scenario.horizon, scenario.seed)?;
    let block_time = scenario.schedule.block_time();
    let mut records = Vec::with_capacity(prices.len());
    let mut hashes = scenario.initial_hashes;
    let mut clamped = false;
    for (t, price) in (0u64..).zip(prices) {
        let reward = scenario.schedule.reward_at_height(scenario.start_height + t);
        let state = MarketState::at_period(&scenario.params, t, price, reward, hashes);
        let rate = HashRate::from_hashes_per_block(hashes, block_time)
            .map_err(|e| SimError::InvalidScenario(format!("period {t}: {e}")))?;
        let hpb = hashes_per_bitcoin(rate, reward, block_time).ok();
        records.push(PeriodRecord {
            state,
            hashes_per_bitcoin: hpb,
            clamped,
        });
        let next = update_hashes(&state, &scenario.params);
        if !next.total_hashes.is_finite() {
            return Err(SimError::InvalidScenario(format!(
                "hash supply overflowed after period {t}"
            )));
        }
        hashes = next.total_hashes;
        clamped = next.clamped;
    }
    Ok(SimOutput { records, block_time })
}

/// Cross-correlates period-over-period price changes with hash changes over
/// lags in `[-max_lag, max_lag]`.
pub fn lead_lag_probe(output: &SimOutput, max_lag: usize) -> Result<LeadLag, SimError> {
    let dp = diff(&output.prices());
    let dh = diff(&output.total_hashes());
    let cc = cross_correlation(&dp, &dh, max_lag)?;
    Ok(LeadLag {
        best_lag: cc.best_lag,
        correlation: cc.best_corr,
    })
}
