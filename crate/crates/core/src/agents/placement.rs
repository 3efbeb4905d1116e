//! Empirical order-placement distributions conditioned on spread and time
//! of day, sampled by historical resampling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::{Price, Qty, Side, Step};
use crate::rng::index_from_uniform;

/// Spread buckets are 1, 2, 3, 4 and >= 5 ticks.
pub const SPREAD_BUCKETS: u8 = 5;
pub const DEFAULT_BUCKET_MINUTES: u32 = 30;

/// A historical limit order: depth from the opposite best, volume, lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitTuple {
    pub depth: Price,
    pub volume: Qty,
    pub duration: Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BucketKey {
    pub spread_bucket: u8,
    pub time_bucket: u16,
}

pub fn spread_bucket(spread: Price) -> u8 {
    spread.clamp(1, SPREAD_BUCKETS as Price) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Resolved {
    Exact(usize),
    Spread(u8),
    Time(u16),
    Global,
}

/// Index pools over one record list with the fallback chain
/// exact bucket -> same spread any time -> any spread same time -> global.
#[derive(Debug, Clone, Default)]
struct Pools {
    exact: Vec<Vec<u32>>,
    keys: BTreeMap<BucketKey, usize>,
    by_spread: BTreeMap<u8, Vec<u32>>,
    by_time: BTreeMap<u16, Vec<u32>>,
    global: Vec<u32>,
    /// [spread_bucket - 1][time_bucket] resolution for in-range time buckets
    table: Vec<Vec<Resolved>>,
}

impl Pools {
    fn build(keys: impl Iterator<Item = BucketKey>) -> Self {
        let mut p = Pools::default();
        let mut max_time = 0u16;
        for (i, k) in keys.enumerate() {
            let i = i as u32;
            let slot = *p.keys.entry(k).or_insert_with(|| {
                p.exact.push(Vec::new());
                p.exact.len() - 1
            });
            p.exact[slot].push(i);
            p.by_spread.entry(k.spread_bucket).or_default().push(i);
            p.by_time.entry(k.time_bucket).or_default().push(i);
            p.global.push(i);
            max_time = max_time.max(k.time_bucket);
        }
        p.table = (1..=SPREAD_BUCKETS)
            .map(|s| (0..=max_time).map(|t| p.resolve(BucketKey { spread_bucket: s, time_bucket: t })).collect())
            .collect();
        p
    }

    fn resolve(&self, key: BucketKey) -> Resolved {
        if let Some(&slot) = self.keys.get(&key) {
            return Resolved::Exact(slot);
        }
        if self.by_spread.contains_key(&key.spread_bucket) {
            return Resolved::Spread(key.spread_bucket);
        }
        if self.by_time.contains_key(&key.time_bucket) {
            return Resolved::Time(key.time_bucket);
        }
        Resolved::Global
    }

    #[inline]
    fn pool(&self, key: BucketKey) -> &[u32] {
        let r = self
            .table
            .get(key.spread_bucket as usize - 1)
            .and_then(|row| row.get(key.time_bucket as usize))
            .copied()
            .unwrap_or_else(|| self.resolve(key));
        match r {
            Resolved::Exact(slot) => &self.exact[slot],
            Resolved::Spread(s) => &self.by_spread[&s],
            Resolved::Time(t) => &self.by_time[&t],
            Resolved::Global => &self.global,
        }
    }
}

/// Historical limit and market orders bucketed by (spread, time of day).
#[derive(Debug, Clone)]
pub struct EmpiricalOrderDistribution {
    open_minute: u32,
    bucket_minutes: u32,
    limit_records: Vec<(BucketKey, LimitTuple)>,
    market_records: Vec<(BucketKey, Qty)>,
    limit_pools: Pools,
    market_pools: Pools,
}

/// One sampled limit placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimitPlacement {
    pub price: Price,
    pub volume: Qty,
    pub duration: Step,
}

impl EmpiricalOrderDistribution {
    /// `limit` and `market` carry (spread in ticks, minute of day, record).
    pub fn new(
        open_minute: u32,
        bucket_minutes: u32,
        limit: impl IntoIterator<Item = (Price, u32, LimitTuple)>,
        market: impl IntoIterator<Item = (Price, u32, Qty)>,
    ) -> Result<Self> {
        if bucket_minutes == 0 {
            return Err(Error::Config("time bucket width must be positive".into()));
        }
        let key = |spread: Price, minute: u32| BucketKey {
            spread_bucket: spread_bucket(spread),
            time_bucket: (minute.saturating_sub(open_minute) / bucket_minutes) as u16,
        };
        Self::from_buckets(
            open_minute,
            bucket_minutes,
            limit.into_iter().map(|(s, m, t)| (key(s, m), t)).collect(),
            market.into_iter().map(|(s, m, q)| (key(s, m), q)).collect(),
        )
    }

    /// Records already assigned to buckets, as stored in a calibration bundle.
    pub fn from_buckets(
        open_minute: u32,
        bucket_minutes: u32,
        limit_records: Vec<(BucketKey, LimitTuple)>,
        market_records: Vec<(BucketKey, Qty)>,
    ) -> Result<Self> {
        if bucket_minutes == 0 {
            return Err(Error::Config("time bucket width must be positive".into()));
        }
        if limit_records.is_empty() || market_records.is_empty() {
            return Err(Error::Insufficient(format!(
                "placement distribution needs limit and market records (got {} limit, {} market)",
                limit_records.len(),
                market_records.len()
            )));
        }
        let limit_pools = Pools::build(limit_records.iter().map(|(k, _)| *k));
        let market_pools = Pools::build(market_records.iter().map(|(k, _)| *k));
        Ok(EmpiricalOrderDistribution { open_minute, bucket_minutes, limit_records, market_records, limit_pools, market_pools })
    }

    pub fn open_minute(&self) -> u32 {
        self.open_minute
    }

    pub fn bucket_minutes(&self) -> u32 {
        self.bucket_minutes
    }

    pub fn key(&self, spread: Price, minute_of_day: u32) -> BucketKey {
        BucketKey {
            spread_bucket: spread_bucket(spread),
            time_bucket: (minute_of_day.saturating_sub(self.open_minute) / self.bucket_minutes) as u16,
        }
    }

    pub fn limit_records(&self) -> &[(BucketKey, LimitTuple)] {
        &self.limit_records
    }

    pub fn market_records(&self) -> &[(BucketKey, Qty)] {
        &self.market_records
    }

    /// Number of limit records whose own bucket equals `key`.
    pub fn limit_occupancy(&self) -> BTreeMap<BucketKey, (usize, usize)> {
        let mut occ: BTreeMap<BucketKey, (usize, usize)> = BTreeMap::new();
        for (k, _) in &self.limit_records {
            occ.entry(*k).or_default().0 += 1;
        }
        for (k, _) in &self.market_records {
            occ.entry(*k).or_default().1 += 1;
        }
        occ
    }

    /// Draws a limit tuple uniformly from the resolved bucket using `u` in [0, 1).
    #[inline]
    pub fn sample_limit_tuple(&self, spread: Price, minute_of_day: u32, u: f64) -> LimitTuple {
        let pool = self.limit_pools.pool(self.key(spread, minute_of_day));
        self.limit_records[pool[index_from_uniform(u, pool.len())] as usize].1
    }

    #[inline]
    pub fn sample_market_volume(&self, spread: Price, minute_of_day: u32, u: f64) -> Qty {
        let pool = self.market_pools.pool(self.key(spread, minute_of_day));
        self.market_records[pool[index_from_uniform(u, pool.len())] as usize].1
    }

    /// Limit placement priced off the opposite best quote: buys at
    /// `best_ask - depth`, sells at `best_bid + depth`.
    #[inline]
    pub fn sample_placement(
        &self,
        spread: Price,
        minute_of_day: u32,
        side: Side,
        best_bid: Price,
        best_ask: Price,
        u: f64,
    ) -> LimitPlacement {
        let t = self.sample_limit_tuple(spread, minute_of_day, u);
        let price = match side {
            Side::Buy => best_ask - t.depth,
            Side::Sell => best_bid + t.depth,
        };
        LimitPlacement { price, volume: t.volume, duration: t.duration }
    }

    /// Mean market-order volume in a time bucket (all spreads).
    pub fn mean_market_volume(&self) -> f64 {
        self.market_records.iter().map(|(_, q)| *q as f64).sum::<f64>() / self.market_records.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(depth: Price, volume: Qty, duration: Step) -> LimitTuple {
        LimitTuple { depth, volume, duration }
    }

    #[test]
    fn bucket_rules() {
        assert_eq!(spread_bucket(9), 5);
        assert_eq!(spread_bucket(2), 2);
        assert_eq!(spread_bucket(0), 1);
        let d = EmpiricalOrderDistribution::new(555, 30, [(2, 570, t(1, 1, 1))], [(2, 570, 1)]).unwrap();
        // 09:30 falls in the 09:15-09:45 window
        assert_eq!(d.key(2, 570), BucketKey { spread_bucket: 2, time_bucket: 0 });
        assert_eq!(d.limit_occupancy()[&BucketKey { spread_bucket: 2, time_bucket: 0 }], (1, 1));
        assert_eq!(d.key(9, 600).spread_bucket, 5);
        assert_eq!(d.key(9, 600).time_bucket, 1);
    }

    #[test]
    fn single_tuple_always_returned_and_eq4_pricing() {
        let d = EmpiricalOrderDistribution::new(555, 30, [(1, 555, t(2, 7, 40))], [(1, 555, 3)]).unwrap();
        for i in 0..10 {
            let u = i as f64 / 10.0;
            let p = d.sample_placement(4, 900, Side::Buy, 19000, 19002, u);
            assert_eq!(p, LimitPlacement { price: 19000, volume: 7, duration: 40 });
            let s = d.sample_placement(4, 900, Side::Sell, 19000, 19002, u);
            assert_eq!(s.price, 19002);
        }
    }

    #[test]
    fn fallback_chain() {
        let limit = [(1, 555, t(1, 1, 1)), (3, 700, t(3, 3, 3))];
        let d = EmpiricalOrderDistribution::new(555, 30, limit, [(1, 555, 1)]).unwrap();
        // exact
        assert_eq!(d.sample_limit_tuple(3, 700, 0.0).depth, 3);
        // same spread, any time
        assert_eq!(d.sample_limit_tuple(1, 800, 0.99).depth, 1);
        // any spread, same time: spread 2 absent, time bucket of 700 present
        assert_eq!(d.sample_limit_tuple(2, 700, 0.5).depth, 3);
        // global
        let g: Vec<_> = (0..2).map(|i| d.sample_limit_tuple(2, 1000, i as f64 * 0.5).depth).collect();
        assert_eq!(g, vec![1, 3]);
    }

    #[test]
    fn empty_is_error() {
        let r = EmpiricalOrderDistribution::new(555, 30, std::iter::empty(), [(1, 555, 1)]);
        assert!(r.is_err());
    }
}
