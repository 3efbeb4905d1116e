use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `TC = alpha * sigma^delta * (Q / ADV)^gamma + beta * spread`, all in
/// price units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BloombergTcParams {
    pub alpha: f64,
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
    /// Daily volatility in price units.
    pub sigma_daily: f64,
    /// Average daily volume in contracts.
    pub adv: f64,
    /// Average bid-ask spread in price units.
    pub spread: f64,
}

impl BloombergTcParams {
    /// The common square-root parameterisation.
    pub fn standard(sigma_daily: f64, adv: f64, spread: f64) -> Self {
        BloombergTcParams { alpha: 1.0 / 3.0, delta: 1.0, gamma: 0.5, beta: 0.5, sigma_daily, adv, spread }
    }
}

pub fn bloomberg_tc(quantity: f64, p: &BloombergTcParams) -> Result<f64> {
    if !(p.adv > 0.0) {
        return Err(Error::Config(format!("average daily volume must be positive, got {}", p.adv)));
    }
    Ok(p.alpha * p.sigma_daily.powf(p.delta) * (quantity / p.adv).powf(p.gamma) + p.beta * p.spread)
}
