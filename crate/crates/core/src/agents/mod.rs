//! Trader behaviours: zero-intelligence baseline and the fundamental,
//! momentum and noise traders, plus the calibrated inputs they sample from.

mod chiarella;
mod placement;
mod rates;
mod zi;

use serde::{Deserialize, Serialize};

pub use chiarella::{
    demand_to_intents, fundamental_demand, momentum_demand, noise_demand, ChiarellaParams, DemandIntents, FundamentalState,
    MomentumState,
};
pub use placement::{spread_bucket, BucketKey, EmpiricalOrderDistribution, LimitPlacement, LimitTuple, DEFAULT_BUCKET_MINUTES, SPREAD_BUCKETS};
pub use rates::RateProfile;
pub use zi::{exponential_duration, zi_price, zi_step, ZiCancelMode, ZiIntent, ZiParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraderKind {
    Fundamental,
    MomentumHf,
    MomentumLf,
    Noise,
    Zi,
}

/// Number of traders of each behaviour. Agents are indexed in the order
/// fundamental, high-frequency momentum, low-frequency momentum, noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub fundamental: u32,
    pub momentum_hf: u32,
    pub momentum_lf: u32,
    pub noise: u32,
}

impl Default for Population {
    fn default() -> Self {
        Population { fundamental: 1, momentum_hf: 1, momentum_lf: 1, noise: 1 }
    }
}

impl Population {
    pub fn kinds(&self) -> Vec<TraderKind> {
        let mut v = Vec::with_capacity(self.total() as usize);
        v.extend(std::iter::repeat_n(TraderKind::Fundamental, self.fundamental as usize));
        v.extend(std::iter::repeat_n(TraderKind::MomentumHf, self.momentum_hf as usize));
        v.extend(std::iter::repeat_n(TraderKind::MomentumLf, self.momentum_lf as usize));
        v.extend(std::iter::repeat_n(TraderKind::Noise, self.noise as usize));
        v
    }

    pub fn total(&self) -> u32 {
        self.fundamental + self.momentum_hf + self.momentum_lf + self.noise
    }
}
