//! Exogenous price paths.
//!
//! Stochastic paths use this generator, which is part of the output
//! contract:
//!
//! * stream: `ChaCha20Rng::seed_from_u64(seed)`;
//! * uniforms: `u = rng.gen::<f64>()`, 53-bit in `[0, 1)`;
//! * normals: Box–Muller on two consecutive uniforms,
//!   `z = sqrt(-2 ln(1 − u1)) · cos(2π u2)`, one normal per pair;
//! * log-step: `ln P[t+1] = ln P[t] + drift + volatility · z[t]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub enum PricePathSpec {
    /// Observed prices, one per period.
    Replay(Vec<f64>),
    Constant(f64),
    /// Jumps from `before` to `after` at period `at`. A positive
    /// `volatility` overlays a driftless log random walk on the step.
    Step {
        before: f64,
        after: f64,
        at: u64,
        volatility: f64,
    },
    GeometricRandomWalk {
        initial: f64,
        drift: f64,
        volatility: f64,
    },
    /// Log price climbs by `up_rate` per period until `peak_period`, then
    /// falls by `down_rate` per period.
    Bubble {
        initial: f64,
        up_rate: f64,
        peak_period: u64,
        down_rate: f64,
    },
}

/// Seeded standard-normal stream.
pub struct NormalStream {
    rng: ChaCha20Rng,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1: f64 = self.rng.gen();
        let u2: f64 = self.rng.gen();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

fn positive(name: &str, v: f64) -> Result<(), SimError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SimError::InvalidScenario(format!("price.{name} must be finite and > 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<(), SimError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::InvalidScenario(format!("price.{name} must be finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), SimError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SimError::InvalidScenario(format!("price.{name} must be finite and >= 0, got {v}")))
    }
}

impl PricePathSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            PricePathSpec::Replay(prices) => {
                if prices.is_empty() {
                    return Err(SimError::InvalidScenario("price replay series is empty".into()));
                }
                for (i, p) in prices.iter().enumerate() {
                    positive(&format!("replay[{i}]"), *p)?;
                }
                Ok(())
            }
            PricePathSpec::Constant(p) => positive("value", *p),
            PricePathSpec::Step {
                before,
                after,
                volatility,
                ..
            } => {
                positive("before", *before)?;
                positive("after", *after)?;
                non_negative("volatility", *volatility)
            }
            PricePathSpec::GeometricRandomWalk {
                initial,
                drift,
                volatility,
            } => {
                positive("initial", *initial)?;
                finite("drift", *drift)?;
                non_negative("volatility", *volatility)
            }
            PricePathSpec::Bubble {
                initial,
                up_rate,
                down_rate,
                ..
            } => {
                positive("initial", *initial)?;
                finite("up_rate", *up_rate)?;
                finite("down_rate", *down_rate)
            }
        }
    }

    pub fn is_stochastic(&self) -> bool {
        match self {
            PricePathSpec::Step { volatility, .. } | PricePathSpec::GeometricRandomWalk { volatility, .. } => {
                *volatility > 0.0
            }
            _ => false,
        }
    }

    /// Prices for periods `0..horizon`.
    pub fn generate(&self, horizon: u64, seed: u64) -> Result<Vec<f64>, SimError> {
        self.validate()?;
        let len = usize::try_from(horizon)
            .map_err(|_| SimError::InvalidScenario(format!("horizon {horizon} too large")))?;
        let prices: Vec<f64> = match self {
            PricePathSpec::Replay(prices) => {
                if prices.len() < len {
                    return Err(SimError::InvalidScenario(format!(
                        "price replay has {} rows but horizon is {horizon}",
                        prices.len()
                    )));
                }
                prices[..len].to_vec()
            }
            PricePathSpec::Constant(p) => vec![*p; len],
            PricePathSpec::Step {
                before,
                after,
                at,
                volatility,
            } => {
                let base = |t: u64| if t < *at { *before } else { *after };
                if *volatility == 0.0 {
                    (0..horizon).map(base).collect()
                } else {
                    let mut normals = NormalStream::new(seed);
                    let mut walk = 0.0;
                    (0..horizon)
                        .map(|t| {
                            if t > 0 {
                                walk += volatility * normals.next_normal();
                            }
                            base(t) * walk.exp()
                        })
                        .collect()
                }
            }
            PricePathSpec::GeometricRandomWalk {
                initial,
                drift,
                volatility,
            } => {
                let mut normals = NormalStream::new(seed);
                let mut log_p = initial.ln();
                (0..horizon)
                    .map(|t| {
                        if t > 0 {
                            log_p += drift + volatility * normals.next_normal();
                        }
                        if t == 0 {
                            *initial
                        } else {
                            log_p.exp()
                        }
                    })
                    .collect()
            }
            PricePathSpec::Bubble {
                initial,
                up_rate,
                peak_period,
                down_rate,
            } => (0..horizon)
                .map(|t| {
                    let log_rise = up_rate * t.min(*peak_period) as f64;
                    let log_fall = down_rate * t.saturating_sub(*peak_period) as f64;
                    initial * (log_rise - log_fall).exp()
                })
                .collect(),
        };
        if let Some((t, p)) = prices.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p > 0.0)) {
            return Err(SimError::InvalidScenario(format!(
                "price path produced invalid price {p} at period {t}"
            )));
        }
        Ok(prices)
    }
}
