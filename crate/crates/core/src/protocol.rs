//! Bitcoin issuance law: block-reward schedule, halvings, and the conversion
//! from network hash rate to hashes expended per coin.
//!
//! Nothing here knows about prices or costs. Rewards are plain `f64` coin
//! amounts; since every halving divides by two, each epoch's reward is an
//! exact binary fraction of the initial reward and never accumulates
//! rounding error.

use thiserror::Error;

/// One satoshi, the smallest representable coin unit.
pub const SMALLEST_UNIT: f64 = 1e-8;

/// Seconds per block targeted by difficulty retargeting.
pub const TARGET_BLOCK_TIME_SECS: f64 = 600.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid issuance schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("invalid hash rate {0} EH/s: must be finite and non-negative")]
    InvalidHashRate(f64),
    /// The block reward has reached zero, so hashes-per-coin is undefined.
    #[error("post-issuance regime: block reward is zero")]
    PostIssuance,
    #[error("invalid block reward {0}")]
    InvalidReward(f64),
}

/// Block-reward epochs and their halving boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IssuanceSchedule {
    initial_reward: f64,
    halving_interval: u64,
    block_time: f64,
}

impl IssuanceSchedule {
    pub fn new(
        initial_reward: f64,
        halving_interval: u64,
        block_time: f64,
    ) -> Result<Self, ProtocolError> {
        if !(initial_reward.is_finite() && initial_reward > 0.0) {
            return Err(ProtocolError::InvalidSchedule("initial_reward must be > 0"));
        }
        if halving_interval == 0 {
            return Err(ProtocolError::InvalidSchedule("halving_interval must be > 0"));
        }
        if !(block_time.is_finite() && block_time > 0.0) {
            return Err(ProtocolError::InvalidSchedule("block_time must be > 0"));
        }
        Ok(Self {
            initial_reward,
            halving_interval,
            block_time,
        })
    }

    /// 50 BTC initial reward, halving every 210,000 blocks, 600 s blocks.
    pub fn bitcoin() -> Self {
        Self {
            initial_reward: 50.0,
            halving_interval: 210_000,
            block_time: TARGET_BLOCK_TIME_SECS,
        }
    }

    pub fn initial_reward(&self) -> f64 {
        self.initial_reward
    }

    pub fn halving_interval(&self) -> u64 {
        self.halving_interval
    }

    pub fn block_time(&self) -> f64 {
        self.block_time
    }

    pub fn epoch(&self, height: u64) -> u64 {
        height / self.halving_interval
    }

    /// Reward for epoch `epoch`: `initial_reward / 2^epoch`, or zero once
    /// that falls below one satoshi.
    pub fn epoch_reward(&self, epoch: u64) -> f64 {
        // Past 2^-1100 the value is zero in f64 anyway.
        let e = epoch.min(1100) as i32;
        let reward = self.initial_reward * 2f64.powi(-e);
        if reward < SMALLEST_UNIT {
            0.0
        } else {
            reward
        }
    }

    pub fn reward_at_height(&self, height: u64) -> f64 {
        self.epoch_reward(self.epoch(height))
    }

    /// First height of the epoch after the one containing `height`.
    pub fn next_halving_height(&self, height: u64) -> u64 {
        (self.epoch(height) + 1) * self.halving_interval
    }
}

impl Default for IssuanceSchedule {
    fn default() -> Self {
        Self::bitcoin()
    }
}

/// Network hash rate in exahashes per second.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HashRate(f64);

impl HashRate {
    pub fn from_ehs(value: f64) -> Result<Self, ProtocolError> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(ProtocolError::InvalidHashRate(value))
        }
    }

    /// Rate implied by `hashes` exahashes spent over one block interval.
    pub fn from_hashes_per_block(hashes: f64, block_time: f64) -> Result<Self, ProtocolError> {
        Self::from_ehs(hashes / block_time)
    }

    pub fn ehs(self) -> f64 {
        self.0
    }

    /// Exahashes expended over one block interval at this rate.
    pub fn hashes_per_block(self, block_time: f64) -> f64 {
        self.0 * block_time
    }
}

/// Reward at `height` under `schedule`.
pub fn reward_at_height(schedule: &IssuanceSchedule, height: u64) -> f64 {
    schedule.reward_at_height(height)
}

/// Exahashes expended per coin issued: `rate × block_time ÷ reward`.
pub fn hashes_per_bitcoin(
    rate: HashRate,
    reward: f64,
    block_time: f64,
) -> Result<f64, ProtocolError> {
    if reward == 0.0 {
        return Err(ProtocolError::PostIssuance);
    }
    if !(reward.is_finite() && reward > 0.0) {
        return Err(ProtocolError::InvalidReward(reward));
    }
    Ok(rate.hashes_per_block(block_time) / reward)
}
