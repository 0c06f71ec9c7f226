use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use clap::Args;
use hashlag_core::miner_econ::{equilibrium_hashes, Stability};
use hashlag_core::simulator::{self, lead_lag_probe, SimError, SimOutput};
use serde::Serialize;

use crate::error::{ensure_dir, write_atomic, CliError};
use crate::scenario;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario document (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario's periods per output row.
    #[arg(long)]
    pub aggregation: Option<u64>,
}

/// Relative tolerance on `|EX| / revenue` for the reported convergence period.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// First date written to `observations.csv`.
pub fn observation_epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date")
}

#[derive(Debug, Serialize)]
pub struct HalvingEvent {
    pub period: u64,
    pub reward_before: f64,
    pub reward_after: f64,
    pub hashes_per_bitcoin_before: Option<f64>,
    pub hashes_per_bitcoin_after: Option<f64>,
    /// `after / before`; 2 when the hash supply is unchanged across the halving.
    pub hashes_per_bitcoin_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub horizon: u64,
    pub aggregation: u64,
    pub seed: u64,
    pub start_height: u64,
    pub stability: &'static str,
    pub stability_bound: f64,
    pub initial_total_hashes: f64,
    pub final_price: f64,
    pub final_total_hashes: f64,
    pub final_excess_profit: f64,
    pub final_equilibrium_hashes: f64,
    pub convergence_tolerance: f64,
    pub convergence_period: Option<u64>,
    pub total_coins_issued: f64,
    pub clamp_events: usize,
    pub halvings: Vec<HalvingEvent>,
    pub probe_max_lag: usize,
    /// Positive when price changes lead hash changes.
    pub best_lag: Option<i64>,
    pub correlation_at_best: Option<f64>,
    pub probe_note: Option<String>,
}

fn stability_label(s: Stability) -> &'static str {
    match s {
        Stability::Frozen => "frozen",
        Stability::Monotone => "monotone",
        Stability::Oscillatory => "oscillatory",
        Stability::Divergent => "divergent",
    }
}

pub fn summarize(loaded: &scenario::LoadedScenario, out: &SimOutput) -> Summary {
    let s = &loaded.scenario;
    let last = out.final_state().expect("horizon >= 1");
    let halvings = out
        .records
        .windows(2)
        .filter(|w| w[1].state.reward != w[0].state.reward)
        .map(|w| {
            let (before, after) = (w[0].hashes_per_bitcoin, w[1].hashes_per_bitcoin);
            HalvingEvent {
                period: w[1].state.period,
                reward_before: w[0].state.reward,
                reward_after: w[1].state.reward,
                hashes_per_bitcoin_before: before,
                hashes_per_bitcoin_after: after,
                hashes_per_bitcoin_ratio: before.zip(after).map(|(b, a)| a / b),
            }
        })
        .collect();
    let (best_lag, correlation_at_best, probe_note) = match lead_lag_probe(out, loaded.probe_max_lag) {
        Ok(ll) => (Some(ll.best_lag), Some(ll.correlation), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    Summary {
        horizon: s.horizon,
        aggregation: s.aggregation,
        seed: s.seed,
        start_height: s.start_height,
        stability: stability_label(s.params.stability()),
        stability_bound: s.params.stability_bound(),
        initial_total_hashes: s.initial_hashes,
        final_price: last.price,
        final_total_hashes: last.total_hashes,
        final_excess_profit: last.excess_profit,
        final_equilibrium_hashes: equilibrium_hashes(last.price, last.fee, last.reward, last.el),
        convergence_tolerance: CONVERGENCE_TOL,
        convergence_period: out.convergence_period(CONVERGENCE_TOL),
        total_coins_issued: out.total_coins_issued(),
        clamp_events: out.clamp_count(),
        halvings,
        probe_max_lag: loaded.probe_max_lag,
        best_lag,
        correlation_at_best,
        probe_note,
    }
}

/// Aggregated rows in the `date,price_usd,hashrate_ehs` schema, one day per row.
pub fn observations_csv(out: &SimOutput, aggregation: u64) -> String {
    let mut text = String::from("date,price_usd,hashrate_ehs\n");
    for (i, row) in (0u64..).zip(out.rows(aggregation)) {
        let date = observation_epoch() + Days::new(i);
        let rate = row.total_hashes / out.block_time;
        text.push_str(&format!("{},{},{}\n", date.format("%Y-%m-%d"), row.price, rate));
    }
    text
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Divergent { .. } => CliError::Refusal(e.to_string()),
        other => CliError::Data(other.to_string()),
    }
}

pub fn execute(loaded: &scenario::LoadedScenario, out_dir: &Path) -> Result<Summary, CliError> {
    let s = &loaded.scenario;
    let out = simulator::run(s).map_err(sim_error)?;
    let summary = summarize(loaded, &out);

    let mut trajectory = Vec::new();
    out.write_csv(s.aggregation, &mut trajectory)
        .map_err(|e| CliError::Data(format!("formatting trajectory: {e}")))?;
    let mut json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Data(format!("formatting summary: {e}")))?;
    json.push('\n');

    ensure_dir(out_dir)?;
    write_atomic(&out_dir.join("trajectory.csv"), &trajectory)?;
    write_atomic(&out_dir.join("observations.csv"), observations_csv(&out, s.aggregation).as_bytes())?;
    write_atomic(&out_dir.join("summary.json"), json.as_bytes())?;
    Ok(summary)
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let mut loaded = scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        loaded.scenario.seed = seed;
    }
    if let Some(k) = args.aggregation {
        if k == 0 {
            return Err(CliError::Usage("--aggregation must be >= 1".into()));
        }
        loaded.scenario.aggregation = k;
    }
    let summary = execute(&loaded, &args.out)?;
    println!(
        "simulated {} periods ({}), final total hashes {}, written to {}",
        summary.horizon,
        summary.stability,
        summary.final_total_hashes,
        args.out.display()
    );
    if let Some(note) = &summary.probe_note {
        eprintln!("warning: {note}");
    }
    Ok(())
}
