//! Bitcoin mining economics and lead-lag analysis.
//!
//! * [`protocol`]: block-reward schedule and hashes-per-coin conversion.
//! * [`miner_econ`]: per-period revenue, cost, excess profit, the hash
//!   supply recursion and its zero-profit fixed point, miner calculators.
//! * [`simulator`]: runs the sector forward under an exogenous price path.
//! * [`empirics`]: ingestion and analysis of daily price / hash-rate data.
//! * [`stats`]: correlation, least squares, and the F distribution.

pub mod empirics;
pub mod miner_econ;
pub mod protocol;
pub mod simulator;
pub mod stats;
