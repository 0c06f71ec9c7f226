//! Scenario documents for `simulate`, written in TOML.
//!
//! ```toml
//! horizon = 5000            # periods (10-minute blocks), required
//! aggregation = 144         # periods per output row, default 144
//! start_height = 630000     # block height of period 0, default 0
//! initial_hashes = 200.0    # EH per period, or "equilibrium"
//! seed = 7                  # default 0
//! allow_divergent = false   # default false
//! probe_max_lag = 20        # lead-lag probe window, default 20
//!
//! [params]
//! n = 0.1                   # EH added per dollar of excess profit
//! n_exit = 0.05             # optional, defaults to n
//! el = 5.0                  # $ per EH: number, { step = {...} } or { series = [...] }
//! fee = 0.0                 # $ per period, same forms as el, default 0
//!
//! [schedule]                # optional, defaults shown
//! initial_reward = 50.0
//! halving_interval = 210000
//! block_time = 600.0
//!
//! [price]
//! kind = "step"             # constant | step | random_walk | bubble | replay
//! before = 160.0
//! after = 320.0
//! at = 100
//! volatility = 0.0
//! ```
//!
//! Unknown keys anywhere in the document are rejected.

use std::path::{Path, PathBuf};

use hashlag_core::empirics::{GapPolicy, ObservationSeries};
use hashlag_core::miner_econ::{equilibrium_hashes, ModelParams, ParamPath};
use hashlag_core::protocol::IssuanceSchedule;
use hashlag_core::simulator::{PricePathSpec, Scenario};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub horizon: u64,
    #[serde(default = "default_aggregation")]
    pub aggregation: u64,
    #[serde(default)]
    pub start_height: u64,
    pub initial_hashes: InitialHashes,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub allow_divergent: bool,
    #[serde(default = "default_probe_max_lag")]
    pub probe_max_lag: usize,
    pub params: ParamsDoc,
    #[serde(default)]
    pub schedule: ScheduleDoc,
    pub price: PriceDoc,
}

fn default_aggregation() -> u64 {
    hashlag_core::simulator::DAILY_PERIODS
}

fn default_probe_max_lag() -> usize {
    20
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum InitialHashes {
    Value(f64),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub n: f64,
    pub n_exit: Option<f64>,
    pub el: PathDoc,
    #[serde(default = "zero_path")]
    pub fee: PathDoc,
}

fn zero_path() -> PathDoc {
    PathDoc::Constant(0.0)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PathDoc {
    Constant(f64),
    Step { step: StepDoc },
    Series { series: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub before: f64,
    pub after: f64,
    pub at: u64,
}

impl From<PathDoc> for ParamPath {
    fn from(doc: PathDoc) -> Self {
        match doc {
            PathDoc::Constant(v) => ParamPath::Constant(v),
            PathDoc::Step { step } => ParamPath::Step {
                before: step.before,
                after: step.after,
                at: step.at,
            },
            PathDoc::Series { series } => ParamPath::Series(series),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    #[serde(default = "default_initial_reward")]
    pub initial_reward: f64,
    #[serde(default = "default_halving_interval")]
    pub halving_interval: u64,
    #[serde(default = "default_block_time")]
    pub block_time: f64,
}

fn default_initial_reward() -> f64 {
    50.0
}

fn default_halving_interval() -> u64 {
    210_000
}

fn default_block_time() -> f64 {
    600.0
}

impl Default for ScheduleDoc {
    fn default() -> Self {
        Self {
            initial_reward: default_initial_reward(),
            halving_interval: default_halving_interval(),
            block_time: default_block_time(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriceDoc {
    Constant {
        value: f64,
    },
    Step {
        before: f64,
        after: f64,
        at: u64,
        #[serde(default)]
        volatility: f64,
    },
    RandomWalk {
        initial: f64,
        #[serde(default)]
        drift: f64,
        volatility: f64,
    },
    Bubble {
        initial: f64,
        up_rate: f64,
        peak_period: u64,
        down_rate: f64,
    },
    /// Prices from a `date,price_usd,hashrate_ehs` file, one row per period.
    Replay {
        file: PathBuf,
    },
}

/// A parsed scenario plus the settings that only affect reporting.
#[derive(Debug)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub probe_max_lag: usize,
}

pub fn load(path: &Path) -> Result<LoadedScenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("reading scenario {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse(&text, base).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses a scenario document; relative replay paths resolve against `base`.
pub fn parse(text: &str, base: &Path) -> Result<LoadedScenario, CliError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| CliError::Data(format!("invalid scenario: {e}")))?;
    let data = |key: &str, e: &dyn std::fmt::Display| CliError::Data(format!("invalid scenario key `{key}`: {e}"));

    let params = match doc.params.n_exit {
        Some(n_exit) => ModelParams::with_exit(doc.params.n, n_exit, doc.params.el, doc.params.fee),
        None => ModelParams::new(doc.params.n, doc.params.el, doc.params.fee),
    }
    .map_err(|e| data("params", &e))?;

    let schedule = IssuanceSchedule::new(
        doc.schedule.initial_reward,
        doc.schedule.halving_interval,
        doc.schedule.block_time,
    )
    .map_err(|e| data("schedule", &e))?;

    let price_path = match doc.price {
        PriceDoc::Constant { value } => PricePathSpec::Constant(value),
        PriceDoc::Step {
            before,
            after,
            at,
            volatility,
        } => PricePathSpec::Step {
            before,
            after,
            at,
            volatility,
        },
        PriceDoc::RandomWalk {
            initial,
            drift,
            volatility,
        } => PricePathSpec::GeometricRandomWalk {
            initial,
            drift,
            volatility,
        },
        PriceDoc::Bubble {
            initial,
            up_rate,
            peak_period,
            down_rate,
        } => PricePathSpec::Bubble {
            initial,
            up_rate,
            peak_period,
            down_rate,
        },
        PriceDoc::Replay { file } => {
            let file = if file.is_relative() { base.join(file) } else { file };
            let series = ObservationSeries::ingest_path(&file, GapPolicy::Reject)
                .map_err(|e| data("price.file", &e))?;
            PricePathSpec::Replay(series.prices())
        }
    };
    price_path.validate().map_err(|e| data("price", &e))?;

    let initial_hashes = match doc.initial_hashes {
        InitialHashes::Value(v) => v,
        InitialHashes::Named(name) if name == "equilibrium" => {
            let p0 = price_path
                .generate(1, doc.seed)
                .map_err(|e| data("price", &e))?[0];
            let reward = schedule.reward_at_height(doc.start_height);
            equilibrium_hashes(p0, params.fee().at(0), reward, params.el().at(0))
        }
        InitialHashes::Named(other) => {
            return Err(data("initial_hashes", &format!("expected a number or \"equilibrium\", got {other:?}")));
        }
    };

    let scenario = Scenario {
        params,
        schedule,
        price_path,
        initial_hashes,
        horizon: doc.horizon,
        aggregation: doc.aggregation,
        start_height: doc.start_height,
        seed: doc.seed,
        allow_divergent: doc.allow_divergent,
    };
    Ok(LoadedScenario {
        scenario,
        probe_max_lag: doc.probe_max_lag,
    })
}
