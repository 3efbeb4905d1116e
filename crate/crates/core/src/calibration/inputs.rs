//! Direct estimates of the simulator inputs from extracted order flow.

use std::collections::BTreeMap;
use std::io::Write;

use super::impact::{aggregate_windows, fit_impact_observations, ImpactFit, ImpactModel, SignedTrade};
use crate::agents::{BucketKey, EmpiricalOrderDistribution, LimitTuple, RateProfile};
use crate::error::{Error, Result};
use crate::market_data::{HistoricalLimitOrder, HistoricalMarketOrder, Reconstruction};
use crate::session::SessionCalendar;

/// Per-minute arrival rates with their Poisson standard errors (per step).
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub profile: RateProfile,
    /// minute of day -> (alpha SE, mu SE)
    pub standard_errors: BTreeMap<u32, (f64, f64)>,
}

/// Counts arrivals per session minute over `days` days and divides by the
/// number of steps observed in that minute.
pub fn estimate_rates(
    limit_minutes: impl IntoIterator<Item = u32>,
    market_minutes: impl IntoIterator<Item = u32>,
    calendar: &SessionCalendar,
    days: u32,
) -> Result<RateEstimate> {
    if days == 0 {
        return Err(Error::Config("rate estimation needs at least one day".into()));
    }
    let mut counts: BTreeMap<u32, (f64, f64)> = calendar.minutes().map(|m| (m, (0.0, 0.0))).collect();
    for m in limit_minutes {
        if let Some(c) = counts.get_mut(&m) {
            c.0 += 1.0;
        }
    }
    for m in market_minutes {
        if let Some(c) = counts.get_mut(&m) {
            c.1 += 1.0;
        }
    }
    let steps = (calendar.steps_per_minute() * days as u64) as f64;
    let mut profile = RateProfile::new(calendar.steps_per_minute());
    let mut standard_errors = BTreeMap::new();
    for (&m, &(l, k)) in &counts {
        profile.set_per_step(m, l / steps, k / steps);
        standard_errors.insert(m, (l.sqrt() / steps, k.sqrt() / steps));
    }
    Ok(RateEstimate { profile, standard_errors })
}

/// Rates from a reconstructed day.
pub fn estimate_rates_from(rec: &Reconstruction, calendar: &SessionCalendar) -> Result<RateEstimate> {
    estimate_rates(
        rec.limit_orders.iter().map(|o| o.minute_of_day),
        rec.market_orders.iter().map(|o| o.minute_of_day),
        calendar,
        1,
    )
}

/// Number of records per (spread, time) bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyReport {
    pub bucket_minutes: u32,
    pub open_minute: u32,
    /// bucket -> (limit records, market records)
    pub buckets: BTreeMap<BucketKey, (usize, usize)>,
}

impl OccupancyReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "spread_bucket,time_bucket_start,limit_records,market_records")?;
        for (k, (l, m)) in &self.buckets {
            let start = self.open_minute + k.time_bucket as u32 * self.bucket_minutes;
            writeln!(w, "{},{:02}:{:02},{},{}", k.spread_bucket, start / 60, start % 60, l, m)?;
        }
        Ok(())
    }
}

/// Buckets historical orders by spread and time of day. Durations of zero
/// steps (orders gone within the step they arrived) count as one step.
pub fn build_distributions(
    limit: &[HistoricalLimitOrder],
    market: &[HistoricalMarketOrder],
    calendar: &SessionCalendar,
    bucket_minutes: u32,
) -> Result<(EmpiricalOrderDistribution, OccupancyReport)> {
    if limit.is_empty() && market.is_empty() {
        return Err(Error::Insufficient("no historical orders: every placement bucket is empty".into()));
    }
    let dist = EmpiricalOrderDistribution::new(
        calendar.open_minute(),
        bucket_minutes,
        limit.iter().map(|o| (o.spread, o.minute_of_day, LimitTuple { depth: o.depth, volume: o.volume, duration: o.duration.max(1) })),
        market.iter().map(|o| (o.spread, o.minute_of_day, o.volume)),
    )?;
    let report = OccupancyReport { bucket_minutes, open_minute: calendar.open_minute(), buckets: dist.limit_occupancy() };
    Ok((dist, report))
}

pub const IMPACT_WINDOW_NS: u64 = 1_000_000_000;

/// Fits the single-trade impact function on one-second windows of signed
/// trade volume against the mid change over the same window.
pub fn fit_impact(trades: &[SignedTrade], mid_before: impl FnMut(u64) -> Option<f64>) -> Result<ImpactFit> {
    fit_impact_observations(&aggregate_windows(trades, IMPACT_WINDOW_NS, mid_before))
}

pub fn fit_impact_from(rec: &Reconstruction) -> Result<ImpactFit> {
    fit_impact(&rec.signed_trades, |t| rec.mid_before(t))
}

/// The exogenous value with cumulative impact removed, and its volatility.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalProxy {
    pub values: Vec<f64>,
    /// Root-mean-square increment per grid interval (zero drift).
    pub sigma: f64,
}

/// `V_t = p_t - sum_{i<=t} sign(Q_i) f(|Q_i|)` on a common grid of prices
/// and signed excess demand.
pub fn extract_fundamental_proxy(prices: &[f64], excess_demand: &[f64], impact: &ImpactModel) -> Result<FundamentalProxy> {
    if prices.len() != excess_demand.len() {
        return Err(Error::GridMismatch(format!("{} prices against {} excess-demand values", prices.len(), excess_demand.len())));
    }
    let mut cum = 0.0;
    let values: Vec<f64> = prices
        .iter()
        .zip(excess_demand)
        .map(|(p, q)| {
            cum += impact.signed(*q);
            p - cum
        })
        .collect();
    let n = values.len().saturating_sub(1);
    let sigma = if n == 0 { 0.0 } else { (values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / n as f64).sqrt() };
    Ok(FundamentalProxy { values, sigma })
}

/// Per-second mids and signed volume of a reconstructed day, on the grid
/// of seconds between the first and last record. Returns (mids, excess demand).
pub fn per_second_grid(rec: &Reconstruction) -> (Vec<f64>, Vec<f64>) {
    let (Some(first), Some(last)) = (rec.l2.first(), rec.l2.last()) else {
        return (Vec::new(), Vec::new());
    };
    let start = first.timestamp_ns / IMPACT_WINDOW_NS + 1;
    let end = last.timestamp_ns / IMPACT_WINDOW_NS + 1;
    let mut mids = Vec::new();
    let mut q = Vec::new();
    let mut k = 0;
    let mut last_mid = None;
    for s in start..=end {
        let t = s * IMPACT_WINDOW_NS;
        let mut acc = 0.0;
        while k < rec.signed_trades.len() && rec.signed_trades[k].time_ns < t {
            if rec.signed_trades[k].time_ns >= t - IMPACT_WINDOW_NS {
                acc += rec.signed_trades[k].side.sign() as f64 * rec.signed_trades[k].quantity;
            }
            k += 1;
        }
        let mid = rec.mid_before(t).or(last_mid);
        if let Some(m) = mid {
            last_mid = Some(m);
            mids.push(m);
            q.push(acc);
        }
    }
    (mids, q)
}
