//! Desk-scale synthetic markets with known parameters, used in place of
//! proprietary tick data.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{ChiarellaParams, EmpiricalOrderDistribution, LimitTuple, Population, RateProfile, DEFAULT_BUCKET_MINUTES};
use crate::calibration::ImpactModel;
use crate::error::Result;
use crate::lob::{Price, Qty, Side};
use crate::rng::DrawStream;
use crate::session::SessionCalendar;
use crate::sim::{BookLevel, FundamentalSpec, MarketModel, TraderSetup};

/// Knobs of a synthetic market. The defaults give a ten-minute session
/// that is quick to simulate and stable under large meta-orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub windows: Vec<String>,
    pub step_ms: u32,
    pub open_price: Price,
    /// Per-step limit probability at the middle of the session.
    pub limit_rate: f64,
    /// Per-step market probability at the middle of the session.
    pub market_rate: f64,
    /// Relative increase of both rates at the open and close (U shape).
    pub rate_smile: f64,
    /// Geometric decay of placement depth (ticks from the opposite best).
    pub depth_decay: f64,
    pub max_depth: Price,
    pub max_limit_volume: Qty,
    pub max_market_volume: Qty,
    /// Mean limit-order lifetime in steps.
    pub mean_duration: f64,
    pub historical_records: usize,
    pub opening_levels: usize,
    pub opening_quantity: Qty,
    pub chiarella: ChiarellaParams,
    pub population: Population,
    pub impact: ImpactModel,
    /// Fundamental volatility per step.
    pub sigma_v: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            windows: vec!["09:15-09:25".into()],
            step_ms: 20,
            open_price: 19_000,
            limit_rate: 0.3,
            market_rate: 0.08,
            rate_smile: 0.5,
            depth_decay: 0.7,
            max_depth: 10,
            max_limit_volume: 10,
            max_market_volume: 6,
            mean_duration: 300.0,
            historical_records: 20_000,
            opening_levels: 10,
            opening_quantity: 20,
            chiarella: ChiarellaParams {
                kappa: 0.03,
                beta_h: 0.5,
                gamma_h: 2.0,
                eta_h: 0.98,
                beta_l: 0.5,
                gamma_l: 5.0,
                eta_l: 0.02,
                sigma: 1.0,
            },
            population: Population::default(),
            impact: ImpactModel::new(0.005, 0.5),
            sigma_v: 0.15,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn calendar(&self) -> Result<SessionCalendar> {
        let w: Vec<&str> = self.windows.iter().map(String::as_str).collect();
        SessionCalendar::parse(&w, self.step_ms)
    }

    /// U-shaped per-step rates over the session.
    pub fn rates(&self, calendar: &SessionCalendar) -> RateProfile {
        let mut p = RateProfile::new(calendar.steps_per_minute());
        let n = calendar.minutes_per_day() as f64;
        for (i, m) in calendar.minutes().enumerate() {
            let x = (i as f64 + 0.5) / n * 2.0 - 1.0;
            let shape = 1.0 + self.rate_smile * x * x;
            p.set_per_step(m, (self.limit_rate * shape).min(1.0), (self.market_rate * shape).min(1.0));
        }
        p
    }

    /// Synthetic historical placement records, drawn deterministically.
    pub fn placement(&self, calendar: &SessionCalendar) -> Result<EmpiricalOrderDistribution> {
        let mut rng = DrawStream::from_seed(self.seed ^ 0x5EED_0001);
        let minutes: Vec<u32> = calendar.minutes().collect();
        let mut limit = Vec::with_capacity(self.historical_records);
        let mut market = Vec::with_capacity(self.historical_records / 4);
        for _ in 0..self.historical_records {
            let minute = minutes[rng.index(minutes.len())];
            let spread = 1 + geometric(&mut rng, 0.35, 7);
            let depth = 1 + geometric(&mut rng, self.depth_decay, self.max_depth - 1);
            let volume = 1 + rng.index(self.max_limit_volume as usize) as Qty;
            let duration = (rng.exponential(1.0 / self.mean_duration).ceil() as u64).max(1);
            limit.push((spread, minute, LimitTuple { depth, volume, duration }));
        }
        for _ in 0..(self.historical_records / 4).max(1) {
            let minute = minutes[rng.index(minutes.len())];
            let spread = 1 + geometric(&mut rng, 0.35, 7);
            let volume = 1 + rng.index(self.max_market_volume as usize) as Qty;
            market.push((spread, minute, volume));
        }
        EmpiricalOrderDistribution::new(calendar.open_minute(), DEFAULT_BUCKET_MINUTES, limit, market)
    }

    pub fn opening_book(&self) -> Vec<BookLevel> {
        let mut book = Vec::with_capacity(2 * self.opening_levels);
        for k in 0..self.opening_levels as Price {
            book.push(BookLevel { side: Side::Buy, price: self.open_price - 1 - k, quantity: self.opening_quantity });
            book.push(BookLevel { side: Side::Sell, price: self.open_price + 1 + k, quantity: self.opening_quantity });
        }
        book
    }

    pub fn model(&self) -> Result<MarketModel> {
        let calendar = self.calendar()?;
        let model = MarketModel {
            rates: self.rates(&calendar),
            placement: Some(Arc::new(self.placement(&calendar)?)),
            impact: self.impact,
            fundamental: FundamentalSpec { initial: None, drift: 0.0, volatility: self.sigma_v },
            traders: TraderSetup::Chiarella { params: self.chiarella, population: self.population },
            opening_book: self.opening_book(),
            calendar,
        };
        model.validate()?;
        Ok(model)
    }
}

/// Number of failures before the first success, truncated at `max`.
fn geometric(rng: &mut DrawStream, continue_p: f64, max: Price) -> Price {
    let mut k = 0;
    while k < max && rng.uniform() < continue_p {
        k += 1;
    }
    k
}
