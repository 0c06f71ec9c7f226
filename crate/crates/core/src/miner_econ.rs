//! Period economics of the mining sector.
//!
//! One period is one block interval. Revenue is the block reward valued at
//! the period's price plus fees; variable cost is total hashes times the
//! electricity cost per exahash; their difference, excess profit, moves next
//! period's hash supply:
//!
//! ```text
//! Σh[t+1] = Σh[t] + n · (reward·P[t] + fee[t] − Σh[t]·el[t])
//! ```
//!
//! With constant inputs the fixed point is `Σh* = TR / el` and the gap to it
//! shrinks by the factor `1 − n·el` every period.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("case precondition violated: {0}")]
    CasePrecondition(String),
}

fn invalid(name: &'static str, reason: impl Into<String>) -> EconError {
    EconError::InvalidParam {
        name,
        reason: reason.into(),
    }
}

/// A per-period input that may vary over time.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamPath {
    Constant(f64),
    /// `before` for periods `< at`, `after` from `at` onward.
    Step { before: f64, after: f64, at: u64 },
    /// One value per period; the last value holds beyond the end.
    Series(Vec<f64>),
}

impl ParamPath {
    pub fn at(&self, period: u64) -> f64 {
        match self {
            ParamPath::Constant(v) => *v,
            ParamPath::Step { before, after, at } => {
                if period < *at {
                    *before
                } else {
                    *after
                }
            }
            ParamPath::Series(values) => {
                let idx = usize::try_from(period).unwrap_or(usize::MAX);
                values
                    .get(idx)
                    .or_else(|| values.last())
                    .copied()
                    .unwrap_or(f64::NAN)
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            ParamPath::Constant(v) => vec![*v],
            ParamPath::Step { before, after, .. } => vec![*before, *after],
            ParamPath::Series(values) => values.clone(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values().into_iter().fold(f64::INFINITY, f64::min)
    }
}

impl From<f64> for ParamPath {
    fn from(v: f64) -> Self {
        ParamPath::Constant(v)
    }
}

/// How the hash recursion behaves for the worst-case `n·el` of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// `n·el = 0`: hashes never move.
    Frozen,
    /// `0 < n·el ≤ 1`: monotone approach to equilibrium.
    Monotone,
    /// `1 < n·el < 2`: overshooting, damped oscillation.
    Oscillatory,
    /// `n·el ≥ 2`: the gap to equilibrium grows every period.
    Divergent,
}

impl Stability {
    pub fn classify(n_el: f64) -> Self {
        if n_el == 0.0 {
            Stability::Frozen
        } else if n_el <= 1.0 {
            Stability::Monotone
        } else if n_el < 2.0 {
            Stability::Oscillatory
        } else {
            Stability::Divergent
        }
    }

    pub fn is_convergent(self) -> bool {
        self != Stability::Divergent
    }
}

/// Responsiveness, electricity cost and fee paths.
///
/// `n_entry` (EH per dollar) applies when excess profit is non-negative,
/// `n_exit` when it is negative; by default they are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    n_entry: f64,
    n_exit: f64,
    el: ParamPath,
    fee: ParamPath,
    stability: Stability,
}

impl ModelParams {
    pub fn new(n: f64, el: impl Into<ParamPath>, fee: impl Into<ParamPath>) -> Result<Self, EconError> {
        Self::with_exit(n, n, el, fee)
    }

    pub fn with_exit(
        n_entry: f64,
        n_exit: f64,
        el: impl Into<ParamPath>,
        fee: impl Into<ParamPath>,
    ) -> Result<Self, EconError> {
        let el = el.into();
        let fee = fee.into();
        for (name, n) in [("n", n_entry), ("n_exit", n_exit)] {
            if !(n.is_finite() && n >= 0.0) {
                return Err(invalid(name, format!("{n} must be finite and >= 0")));
            }
        }
        if let ParamPath::Series(v) = &el {
            if v.is_empty() {
                return Err(invalid("el", "series is empty"));
            }
        }
        if let ParamPath::Series(v) = &fee {
            if v.is_empty() {
                return Err(invalid("fee", "series is empty"));
            }
        }
        if !(el.min() > 0.0 && el.max().is_finite()) {
            return Err(invalid("el", "must be finite and > 0 in every period"));
        }
        if !(fee.min() >= 0.0 && fee.max().is_finite()) {
            return Err(invalid("fee", "must be finite and >= 0 in every period"));
        }
        let stability = Stability::classify(n_entry.max(n_exit) * el.max());
        Ok(Self {
            n_entry,
            n_exit,
            el,
            fee,
            stability,
        })
    }

    pub fn n(&self) -> f64 {
        self.n_entry
    }

    pub fn n_exit(&self) -> f64 {
        self.n_exit
    }

    pub fn el(&self) -> &ParamPath {
        &self.el
    }

    pub fn fee(&self) -> &ParamPath {
        &self.fee
    }

    /// Worst-case `n·el` over all periods and both directions.
    pub fn stability_bound(&self) -> f64 {
        self.n_entry.max(self.n_exit) * self.el.max()
    }

    pub fn stability(&self) -> Stability {
        self.stability
    }

    pub fn is_stable(&self) -> bool {
        self.stability.is_convergent()
    }

    pub fn responsiveness(&self, excess_profit: f64) -> f64 {
        if excess_profit < 0.0 {
            self.n_exit
        } else {
            self.n_entry
        }
    }
}

/// One period's sector snapshot. Money is dollars per period, hashes are
/// exahashes per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub period: u64,
    pub price: f64,
    pub reward: f64,
    pub fee: f64,
    pub el: f64,
    pub total_hashes: f64,
    pub revenue: f64,
    pub variable_cost: f64,
    pub excess_profit: f64,
}

impl MarketState {
    /// Derives revenue, cost and excess profit from the primitive inputs.
    pub fn compute(period: u64, price: f64, reward: f64, fee: f64, el: f64, total_hashes: f64) -> Self {
        let revenue = total_revenue(price, fee, reward);
        let variable_cost = total_variable_cost(total_hashes, el);
        Self {
            period,
            price,
            reward,
            fee,
            el,
            total_hashes,
            revenue,
            variable_cost,
            excess_profit: revenue - variable_cost,
        }
    }

    /// Snapshot at `period` drawing el and fee from `params`.
    pub fn at_period(params: &ModelParams, period: u64, price: f64, reward: f64, total_hashes: f64) -> Self {
        Self::compute(
            period,
            price,
            reward,
            params.fee.at(period),
            params.el.at(period),
            total_hashes,
        )
    }

    /// True when the derived columns are exactly what `compute` would produce.
    pub fn is_consistent(&self) -> bool {
        let fresh = Self::compute(self.period, self.price, self.reward, self.fee, self.el, self.total_hashes);
        fresh.revenue.to_bits() == self.revenue.to_bits()
            && fresh.variable_cost.to_bits() == self.variable_cost.to_bits()
            && fresh.excess_profit.to_bits() == self.excess_profit.to_bits()
    }
}

/// `reward × price + fee`.
pub fn total_revenue(price: f64, fee: f64, reward: f64) -> f64 {
    reward * price + fee
}

/// `total_hashes × el`.
pub fn total_variable_cost(total_hashes: f64, el: f64) -> f64 {
    total_hashes * el
}

/// Next period's hash supply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashUpdate {
    pub total_hashes: f64,
    /// The raw update was negative and was floored at zero.
    pub clamped: bool,
}

/// `Σh + n·EX`, floored at zero.
pub fn update_hashes(state: &MarketState, params: &ModelParams) -> HashUpdate {
    let n = params.responsiveness(state.excess_profit);
    let next = state.total_hashes + n * state.excess_profit;
    if next < 0.0 {
        HashUpdate {
            total_hashes: 0.0,
            clamped: true,
        }
    } else {
        HashUpdate {
            total_hashes: next,
            clamped: false,
        }
    }
}

/// Hash supply at which excess profit is zero: `(reward·price + fee) / el`.
pub fn equilibrium_hashes(price: f64, fee: f64, reward: f64, el: f64) -> f64 {
    total_revenue(price, fee, reward) / el
}

/// One miner's slice of the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinerPosition {
    pub hash_share: f64,
    pub own_hashes: f64,
}

impl MinerPosition {
    pub fn from_hashes(own_hashes: f64, network_hashes: f64) -> Result<Self, EconError> {
        if !(own_hashes.is_finite() && own_hashes >= 0.0) {
            return Err(invalid("own_hashes", format!("{own_hashes} must be >= 0")));
        }
        if !(network_hashes.is_finite() && network_hashes > 0.0) {
            return Err(invalid("network_hashes", format!("{network_hashes} must be > 0")));
        }
        if own_hashes > network_hashes {
            return Err(invalid("own_hashes", "exceeds network total"));
        }
        Ok(Self {
            hash_share: own_hashes / network_hashes,
            own_hashes,
        })
    }

    pub fn from_share(hash_share: f64, network_hashes: f64) -> Result<Self, EconError> {
        if !(0.0..=1.0).contains(&hash_share) {
            return Err(invalid("hash_share", format!("{hash_share} outside [0, 1]")));
        }
        if !(network_hashes.is_finite() && network_hashes >= 0.0) {
            return Err(invalid("network_hashes", format!("{network_hashes} must be >= 0")));
        }
        Ok(Self {
            hash_share,
            own_hashes: hash_share * network_hashes,
        })
    }
}

/// Lottery expectation of block rewards: `share × reward × price × periods`.
/// Fees are excluded.
pub fn expected_revenue(position: &MinerPosition, price: f64, reward: f64, periods: u64) -> f64 {
    position.hash_share * reward * price * periods as f64
}

/// Which strategy a 1%-style miner follows when rivals add capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    /// Invest just enough to hold hash share constant.
    DefendShare,
    /// Invest nothing; share is diluted.
    StandPat,
    /// Invest enough to raise share.
    GrowShare,
}

impl Case {
    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Case::DefendShare),
            2 => Some(Case::StandPat),
            3 => Some(Case::GrowShare),
            _ => None,
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Case::DefendShare => 1,
            Case::StandPat => 2,
            Case::GrowShare => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfitDelta {
    Value(f64),
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseOutcome {
    pub case: Case,
    pub share_before: f64,
    pub share_after: f64,
    pub revenue_delta: f64,
    pub cost_delta: f64,
    pub profit_delta: ProfitDelta,
}

/// Relative tolerance for "share held constant".
const SHARE_TOL: f64 = 1e-9;

/// Per-period deltas for one miner when rivals add `entry_hashes` and the
/// miner changes its own capacity by `own_capacity_change`.
///
/// Expected revenue is `share × (reward·price + fee)`. Unless `cost_delta` is
/// given, the miner's cost change is its capacity change times `el`; in
/// Case 3 an unspecified cost leaves the profit sign indeterminate.
pub fn evaluate_case(
    case: Case,
    state: &MarketState,
    position: &MinerPosition,
    entry_hashes: f64,
    own_capacity_change: f64,
    cost_delta: Option<f64>,
) -> Result<CaseOutcome, EconError> {
    let violated = |msg: String| Err(EconError::CasePrecondition(msg));
    if !(entry_hashes.is_finite() && entry_hashes >= 0.0) {
        return violated(format!("entry_hashes {entry_hashes} must be >= 0"));
    }
    if !own_capacity_change.is_finite() {
        return violated("own_capacity_change must be finite".into());
    }
    if state.total_hashes <= 0.0 {
        return violated("network has no hashes".into());
    }
    let share_before = position.own_hashes / state.total_hashes;
    let own_after = position.own_hashes + own_capacity_change;
    let network_after = state.total_hashes + entry_hashes + own_capacity_change;
    if own_after < 0.0 || network_after <= 0.0 {
        return violated("capacity change removes more hashes than exist".into());
    }
    let share_after = own_after / network_after;
    let period_revenue = state.revenue;

    match case {
        Case::DefendShare => {
            if entry_hashes <= 0.0 {
                return violated("case 1 requires rivals to add capacity".into());
            }
            if own_capacity_change <= 0.0 {
                return violated("case 1 requires the miner to add capacity".into());
            }
            if (share_after - share_before).abs() > SHARE_TOL * share_before {
                return violated(format!(
                    "case 1 requires constant share, got {share_before} -> {share_after}"
                ));
            }
            let cost = cost_delta.unwrap_or(own_capacity_change * state.el);
            if cost <= 0.0 {
                return violated("case 1 cost change must be positive".into());
            }
            // Share is held, so expected revenue is unchanged by construction.
            Ok(CaseOutcome {
                case,
                share_before,
                share_after: share_before,
                revenue_delta: 0.0,
                cost_delta: cost,
                profit_delta: ProfitDelta::Value(-cost),
            })
        }
        Case::StandPat => {
            if own_capacity_change != 0.0 {
                return violated("case 2 requires no own capacity change".into());
            }
            if entry_hashes <= 0.0 {
                return violated("case 2 requires rivals to add capacity".into());
            }
            if share_before <= 0.0 {
                return violated("case 2 requires a positive starting share".into());
            }
            if let Some(c) = cost_delta {
                if c != 0.0 {
                    return violated("case 2 incurs no further cost".into());
                }
            }
            let revenue_delta = (share_after - share_before) * period_revenue;
            Ok(CaseOutcome {
                case,
                share_before,
                share_after,
                revenue_delta,
                cost_delta: 0.0,
                profit_delta: ProfitDelta::Value(revenue_delta),
            })
        }
        Case::GrowShare => {
            if share_after <= share_before * (1.0 + SHARE_TOL) {
                return violated(format!(
                    "case 3 requires share to rise, got {share_before} -> {share_after}"
                ));
            }
            let revenue_delta = (share_after - share_before) * period_revenue;
            let (cost, profit) = match cost_delta {
                Some(c) => (c, ProfitDelta::Value(revenue_delta - c)),
                None => (own_capacity_change * state.el, ProfitDelta::Indeterminate),
            };
            Ok(CaseOutcome {
                case,
                share_before,
                share_after,
                revenue_delta,
                cost_delta: cost,
                profit_delta: profit,
            })
        }
    }
}

/// Dollar amount rendered to cents with thousands separators, halves
/// rounded away from zero: `Usd(2321.875)` displays as `$2,321.88`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Usd(pub f64);

impl fmt::Display for Usd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cents = (self.0 * 100.0).round();
        if !cents.is_finite() {
            return write!(f, "${}", self.0);
        }
        let sign = if cents < 0.0 { "-" } else { "" };
        let cents = cents.abs();
        let whole = (cents / 100.0).trunc();
        let frac = (cents - whole * 100.0) as u64;
        let digits = format!("{whole:.0}");
        let mut grouped = String::with_capacity(digits.len() + digits.len() / 3);
        for (i, ch) in digits.chars().enumerate() {
            if i > 0 && (digits.len() - i) % 3 == 0 {
                grouped.push(',');
            }
            grouped.push(ch);
        }
        write!(f, "{sign}${grouped}.{frac:02}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(total_hashes: f64, revenue: f64, el: f64) -> MarketState {
        // price chosen so reward·price = revenue with reward 6.25 and no fee
        MarketState::compute(0, revenue / 6.25, 6.25, 0.0, el, total_hashes)
    }

    #[test]
    fn revenue_examples() {
        assert_eq!(total_revenue(0.0, 0.0, 6.25), 0.0);
        assert_eq!(total_revenue(37_150.0, 0.0, 6.25), 232_187.5);
        assert_eq!(total_revenue(20_000.0, 500.0, 6.25), 125_500.0);
    }

    #[test]
    fn cost_examples() {
        assert_eq!(total_variable_cost(0.0, 5.0), 0.0);
        assert_eq!(total_variable_cost(100.0, 5.0), 500.0);
        assert_eq!(total_variable_cost(122_400.0, 1.0), 122_400.0);
    }

    #[test]
    fn update_examples() {
        let p = ModelParams::new(0.1, 5.0, 0.0).unwrap();
        let s = state(200.0, 1000.0, 5.0);
        assert_eq!(s.excess_profit, 0.0);
        assert_eq!(update_hashes(&s, &p).total_hashes, 200.0);

        let up = update_hashes(&state(100.0, 1000.0, 5.0), &p);
        assert_eq!(up, HashUpdate { total_hashes: 150.0, clamped: false });
        let down = update_hashes(&state(300.0, 1000.0, 5.0), &p);
        assert_eq!(down.total_hashes, 250.0);
    }

    #[test]
    fn update_clamps_at_zero() {
        let p = ModelParams::new(1.0, 5.0, 0.0).unwrap();
        let s = state(300.0, 0.0, 5.0);
        assert_eq!(update_hashes(&s, &p), HashUpdate { total_hashes: 0.0, clamped: true });
    }

    #[test]
    fn asymmetric_exit() {
        let p = ModelParams::with_exit(0.1, 0.01, 5.0, 0.0).unwrap();
        assert_eq!(update_hashes(&state(100.0, 1000.0, 5.0), &p).total_hashes, 150.0);
        assert_eq!(update_hashes(&state(300.0, 1000.0, 5.0), &p).total_hashes, 295.0);
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(equilibrium_hashes(1000.0 / 6.25, 0.0, 6.25, 5.0), 200.0);
        assert_eq!(equilibrium_hashes(0.0, 0.0, 6.25, 5.0), 0.0);
        // 232,187.5 / 122,400 = 1.896956...
        let jan_2022 = equilibrium_hashes(37_150.0, 0.0, 6.25, 1.89696);
        assert!((jan_2022 - 122_400.0).abs() < 0.5, "{jan_2022}");
    }

    #[test]
    fn equilibrium_matches_iteration() {
        let p = ModelParams::new(0.1, 5.0, 0.0).unwrap();
        let mut h = 17.0;
        for _ in 0..200 {
            h = update_hashes(&state(h, 1000.0, 5.0), &p).total_hashes;
        }
        assert!((h - 200.0).abs() < 1e-9);
    }

    #[test]
    fn one_percent_share_revenue() {
        let one_pct = MinerPosition::from_share(0.01, 1.0).unwrap();
        assert_eq!(expected_revenue(&one_pct, 37_150.0, 6.25, 1), 2_321.875);
        assert_eq!(expected_revenue(&one_pct, 37_150.0, 6.25, 144), 334_350.0);
        let none = MinerPosition::from_share(0.0, 1.0).unwrap();
        assert_eq!(expected_revenue(&none, 37_150.0, 6.25, 144), 0.0);
    }

    #[test]
    fn usd_display() {
        assert_eq!(Usd(2_321.875).to_string(), "$2,321.88");
        assert_eq!(Usd(334_350.0).to_string(), "$334,350.00");
        assert_eq!(Usd(0.0).to_string(), "$0.00");
        assert_eq!(Usd(-1_234_567.891).to_string(), "-$1,234,567.89");
        assert_eq!(Usd(999.999).to_string(), "$1,000.00");
        assert_eq!(Usd(12.0).to_string(), "$12.00");
    }

    #[test]
    fn stability_classification() {
        assert_eq!(ModelParams::new(0.0, 5.0, 0.0).unwrap().stability(), Stability::Frozen);
        assert_eq!(ModelParams::new(0.1, 5.0, 0.0).unwrap().stability(), Stability::Monotone);
        assert_eq!(ModelParams::new(0.3, 5.0, 0.0).unwrap().stability(), Stability::Oscillatory);
        let div = ModelParams::new(0.4, 5.0, 0.0).unwrap();
        assert_eq!(div.stability(), Stability::Divergent);
        assert!(!div.is_stable());
        // worst case over a time-varying electricity path
        let step = ModelParams::new(0.1, ParamPath::Step { before: 5.0, after: 25.0, at: 10 }, 0.0).unwrap();
        assert!(!step.is_stable());
        let exit = ModelParams::with_exit(0.1, 0.5, 5.0, 0.0).unwrap();
        assert_eq!(exit.stability_bound(), 2.5);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(-0.1, 5.0, 0.0).is_err());
        assert!(ModelParams::new(0.1, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.1, 5.0, -1.0).is_err());
        assert!(ModelParams::new(0.1, ParamPath::Series(vec![]), 0.0).is_err());
        assert!(ModelParams::new(0.1, ParamPath::Series(vec![1.0, -1.0]), 0.0).is_err());
    }

    #[test]
    fn param_path_lookup() {
        let s = ParamPath::Series(vec![1.0, 2.0, 3.0]);
        assert_eq!(s.at(0), 1.0);
        assert_eq!(s.at(2), 3.0);
        assert_eq!(s.at(99), 3.0);
        let st = ParamPath::Step { before: 1.0, after: 2.0, at: 5 };
        assert_eq!(st.at(4), 1.0);
        assert_eq!(st.at(5), 2.0);
    }

    fn jan_2022_state() -> (MarketState, MinerPosition) {
        let network = 122_400.0;
        let s = MarketState::compute(0, 37_150.0, 6.25, 0.0, 1.5, network);
        let pos = MinerPosition::from_share(0.01, network).unwrap();
        (s, pos)
    }

    #[test]
    fn case_1_defends_share() {
        let (s, pos) = jan_2022_state();
        // rivals add 10%, miner matches proportionally
        let entry = 0.1 * (s.total_hashes - pos.own_hashes);
        let own = 0.1 * pos.own_hashes;
        let out = evaluate_case(Case::DefendShare, &s, &pos, entry, own, None).unwrap();
        assert_eq!(out.revenue_delta, 0.0);
        assert!(out.cost_delta > 0.0);
        assert!(matches!(out.profit_delta, ProfitDelta::Value(p) if p < 0.0));
    }

    #[test]
    fn case_2_share_dilutes() {
        let (s, pos) = jan_2022_state();
        let out = evaluate_case(Case::StandPat, &s, &pos, 12_240.0, 0.0, None).unwrap();
        assert!(out.share_after < out.share_before);
        assert!(out.revenue_delta < 0.0);
        assert_eq!(out.cost_delta, 0.0);
        assert!(matches!(out.profit_delta, ProfitDelta::Value(p) if p < 0.0));
    }

    #[test]
    fn case_3_share_doubles() {
        let (s, pos) = jan_2022_state();
        // own x with (own + x) / (network + x) = 2%
        let x = (0.02 * s.total_hashes - pos.own_hashes) / 0.98;
        let out = evaluate_case(Case::GrowShare, &s, &pos, 0.0, x, None).unwrap();
        let two_pct = MinerPosition::from_share(0.02, 1.0).unwrap();
        let one_pct = MinerPosition::from_share(0.01, 1.0).unwrap();
        let oracle = expected_revenue(&two_pct, 37_150.0, 6.25, 1) - expected_revenue(&one_pct, 37_150.0, 6.25, 1);
        assert_eq!(oracle, 2_321.875);
        assert!((out.revenue_delta - oracle).abs() < 1e-6, "{}", out.revenue_delta);
        assert_eq!(out.profit_delta, ProfitDelta::Indeterminate);

        let priced = evaluate_case(Case::GrowShare, &s, &pos, 0.0, x, Some(3_000.0)).unwrap();
        assert!(matches!(priced.profit_delta, ProfitDelta::Value(p) if p < 0.0));
        let cheap = evaluate_case(Case::GrowShare, &s, &pos, 0.0, x, Some(1_000.0)).unwrap();
        assert!(matches!(cheap.profit_delta, ProfitDelta::Value(p) if p > 0.0));
    }

    #[test]
    fn case_preconditions() {
        let (s, pos) = jan_2022_state();
        let bad = |c, e, o| evaluate_case(c, &s, &pos, e, o, None).unwrap_err();
        assert!(matches!(bad(Case::DefendShare, 1000.0, 1.0), EconError::CasePrecondition(_)));
        assert!(matches!(bad(Case::StandPat, 1000.0, 5.0), EconError::CasePrecondition(_)));
        assert!(matches!(bad(Case::GrowShare, 1_000_000.0, 1.0), EconError::CasePrecondition(_)));
        assert!(matches!(bad(Case::DefendShare, 0.0, 0.0), EconError::CasePrecondition(_)));
        assert!(evaluate_case(Case::StandPat, &s, &pos, 10.0, 0.0, Some(5.0)).is_err());
        assert_eq!(Case::from_id(4), None);
        assert_eq!(Case::from_id(2).map(Case::id), Some(2));
    }

    proptest! {
        #[test]
        fn fixed_point_identity(price in 1.0f64..1e5, fee in 0.0f64..1e4, el in 0.01f64..10.0, n in 0.0f64..0.1) {
            let reward = 6.25;
            let params = ModelParams::new(n, el, fee).unwrap();
            let eq = equilibrium_hashes(price, fee, reward, el);
            let s = MarketState::at_period(&params, 0, price, reward, eq);
            let next = update_hashes(&s, &params).total_hashes;
            // one rounding in TR/el, one in Σh·el: a few ulps of the revenue scale
            let tol = 4.0 * f64::EPSILON * eq * (1.0 + n * el);
            prop_assert!((next - eq).abs() <= tol, "{next} vs {eq}");
        }

        #[test]
        fn geometric_contraction(h0 in 0.0f64..1e4, a in 0.01f64..1.99) {
            let el = 2.0;
            let n = a / el;
            let params = ModelParams::new(n, el, 0.0).unwrap();
            let eq = equilibrium_hashes(160.0, 0.0, 6.25, el);
            prop_assume!((h0 - eq).abs() > 1.0);
            let mut h = h0;
            for _ in 0..5 {
                let s = MarketState::at_period(&params, 0, 160.0, 6.25, h);
                let up = update_hashes(&s, &params);
                if up.clamped { break; }
                let next = up.total_hashes;
                let ratio = (next - eq) / (h - eq);
                prop_assert!((ratio - (1.0 - a)).abs() < 1e-9, "ratio {ratio}");
                if a < 1.0 {
                    // monotone: stays on the same side of equilibrium
                    prop_assert!((next - eq).signum() == (h - eq).signum() || next == eq);
                } else if a > 1.0 {
                    prop_assert!((next - eq).signum() != (h - eq).signum());
                }
                h = next;
                if (h - eq).abs() < 1.0 { break; }
            }
        }

        #[test]
        fn sign_coupling(h in 0.0f64..1e5, price in 1.0f64..1e5, n in 1e-4f64..0.1) {
            let params = ModelParams::new(n, 1.0, 0.0).unwrap();
            let s = MarketState::at_period(&params, 0, price, 6.25, h);
            let up = update_hashes(&s, &params);
            prop_assume!(!up.clamped);
            if s.excess_profit > 0.0 {
                prop_assert!(up.total_hashes > h);
            } else if s.excess_profit < 0.0 {
                prop_assert!(up.total_hashes < h);
            } else {
                prop_assert_eq!(up.total_hashes, h);
            }
        }

        #[test]
        fn expected_revenue_is_linear(s1 in 0.0f64..0.5, s2 in 0.0f64..0.5, p1 in 0.0f64..1e5, p2 in 0.0f64..1e5) {
            let pos = |s| MinerPosition::from_share(s, 1.0).unwrap();
            let lhs = expected_revenue(&pos(s1 + s2), p1, 6.25, 144);
            let rhs = expected_revenue(&pos(s1), p1, 6.25, 144) + expected_revenue(&pos(s2), p1, 6.25, 144);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
            let lhs = expected_revenue(&pos(s1), p1 + p2, 6.25, 144);
            let rhs = expected_revenue(&pos(s1), p1, 6.25, 144) + expected_revenue(&pos(s1), p2, 6.25, 144);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
        }

        #[test]
        fn state_is_self_consistent(price in 0.0f64..1e5, h in 0.0f64..1e6, el in 0.01f64..10.0, fee in 0.0f64..1e3) {
            let s = MarketState::compute(3, price, 6.25, fee, el, h);
            prop_assert!(s.is_consistent());
            prop_assert_eq!(s.variable_cost.to_bits(), (h * el).to_bits());
        }
    }
}
