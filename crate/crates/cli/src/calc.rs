use clap::Args;
use hashlag_core::miner_econ::{expected_revenue, MinerPosition, Usd};
use hashlag_core::protocol::{hashes_per_bitcoin, HashRate};
use hashlag_core::simulator::DAILY_PERIODS;

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct CalcArgs {
    /// Network hash rate in EH/s.
    #[arg(long, default_value_t = 204.0)]
    pub hashrate: f64,
    /// Coin price in USD.
    #[arg(long, default_value_t = 37_150.0)]
    pub price: f64,
    /// The miner's fraction of network hash rate, in [0, 1].
    #[arg(long, default_value_t = 0.01)]
    pub share: f64,
    /// Block reward in coins.
    #[arg(long, default_value_t = 6.25)]
    pub reward: f64,
    /// Seconds per block.
    #[arg(long, default_value_t = 600.0)]
    pub block_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalcReport {
    /// EH per coin.
    pub hashes_per_bitcoin: f64,
    pub revenue_per_block: f64,
    pub revenue_per_day: f64,
}

pub fn compute(args: &CalcArgs) -> Result<CalcReport, CliError> {
    let usage = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
    if !(args.price.is_finite() && args.price >= 0.0) {
        return Err(CliError::Usage(format!("--price {} must be >= 0", args.price)));
    }
    let rate = HashRate::from_ehs(args.hashrate).map_err(|e| usage(&e))?;
    let hpb = hashes_per_bitcoin(rate, args.reward, args.block_time).map_err(|e| usage(&e))?;
    let network = rate.hashes_per_block(args.block_time);
    let position = MinerPosition::from_share(args.share, network).map_err(|e| usage(&e))?;
    Ok(CalcReport {
        hashes_per_bitcoin: hpb,
        revenue_per_block: expected_revenue(&position, args.price, args.reward, 1),
        revenue_per_day: expected_revenue(&position, args.price, args.reward, DAILY_PERIODS),
    })
}

/// Shortest round-trip decimal with the integer part grouped by thousands.
pub fn grouped(x: f64) -> String {
    let text = x.abs().to_string();
    let (int, frac) = text.split_once('.').map_or((text.as_str(), None), |(i, f)| (i, Some(f)));
    let mut out = String::new();
    if x < 0.0 {
        out.push('-');
    }
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if let Some(frac) = frac {
        out.push('.');
        out.push_str(frac);
    }
    out
}

pub fn render(args: &CalcArgs, report: &CalcReport) -> String {
    let lines = [
        ("network hash rate", format!("{} EH/s", grouped(args.hashrate))),
        ("block reward", format!("{} BTC", grouped(args.reward))),
        ("hashes per bitcoin", format!("{} EH/BTC", grouped(report.hashes_per_bitcoin))),
        ("price", Usd(args.price).to_string()),
        ("hash share", format!("{}%", grouped(args.share * 100.0))),
        ("expected revenue / block", Usd(report.revenue_per_block).to_string()),
        ("expected revenue / day", Usd(report.revenue_per_day).to_string()),
    ];
    lines
        .iter()
        .map(|(label, value)| format!("{label:<26}{value}\n"))
        .collect()
}

pub fn run(args: &CalcArgs) -> Result<(), CliError> {
    let report = compute(args)?;
    print!("{}", render(args, &report));
    Ok(())
}
