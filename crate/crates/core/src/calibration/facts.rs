//! Stylized facts of a trading session and the distance between two sets.
//!
//! Historical and simulated data are both reduced to a [`MarketSeries`]
//! (mid and spread sampled at the end of every second, per-minute arrival
//! counts, and the sequence of market-order signs), so the statistics are
//! computed on exactly the same grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::Reconstruction;
use crate::session::SessionCalendar;
use crate::sim::PathRecord;

/// Shortest series, in seconds, the facts are defined for.
pub const MIN_SERIES_SECONDS: usize = 120;

fn steps_per_second(calendar: &SessionCalendar) -> Result<u64> {
    let spm = calendar.steps_per_minute();
    if !spm.is_multiple_of(60) {
        return Err(Error::Config(format!("a step of {} ms does not divide one second", calendar.step_ms())));
    }
    Ok(spm / 60)
}

/// One session reduced to one-second samples and per-minute counts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarketSeries {
    /// Mid at the end of each second, in ticks.
    pub mids: Vec<f64>,
    pub spreads: Vec<f64>,
    /// Average arrivals per trading minute over the observed days.
    pub limit_per_minute: Vec<f64>,
    pub market_per_minute: Vec<f64>,
    /// +1 for buy, -1 for sell, one entry per market order.
    pub order_signs: Vec<i8>,
}

impl MarketSeries {
    /// Samples a simulated path; it must have been recorded with series.
    pub fn from_path(path: &PathRecord, calendar: &SessionCalendar) -> Result<Self> {
        if path.spreads.len() != path.mids.len() || path.limit_arrivals.is_empty() {
            return Err(Error::Config("path was recorded without spreads and arrival counts".into()));
        }
        let sps = steps_per_second(calendar)? as usize;
        let seconds = path.mids.len() / sps;
        let mids = (0..seconds).map(|k| path.mids[(k + 1) * sps - 1]).collect();
        let spreads = (0..seconds).map(|k| path.spreads[(k + 1) * sps - 1] as f64).collect();
        let mpd = calendar.minutes_per_day() as usize;
        let fold = |counts: &[u32]| {
            let days = counts.len().div_ceil(mpd).max(1);
            let mut out = vec![0.0; mpd];
            for (i, c) in counts.iter().enumerate() {
                out[i % mpd] += *c as f64;
            }
            out.iter_mut().for_each(|x| *x /= days as f64);
            out
        };
        Ok(MarketSeries {
            mids,
            spreads,
            limit_per_minute: fold(&path.limit_arrivals),
            market_per_minute: fold(&path.market_arrivals),
            order_signs: path.order_signs.clone(),
        })
    }

    /// Samples a reconstructed historical day on the session's second grid.
    /// Seconds before the book first has a mid are dropped.
    pub fn from_reconstruction(rec: &Reconstruction, calendar: &SessionCalendar) -> Result<Self> {
        let sps = steps_per_second(calendar)?;
        let seconds = calendar.steps_per_day() / sps;
        let mut mids = Vec::with_capacity(seconds as usize);
        let mut spreads = Vec::with_capacity(seconds as usize);
        let mut i = 0;
        let mut current: Option<(f64, f64)> = None;
        for s in 0..seconds {
            let end = calendar.ns_of_day((s + 1) * sps - 1) + calendar.step_ns();
            while i < rec.l2.len() && rec.l2[i].timestamp_ns < end {
                let snap = &rec.l2[i].snapshot;
                if let (Some(m), Some(sp)) = (snap.mid, snap.spread) {
                    current = Some((m, sp as f64));
                }
                i += 1;
            }
            if let Some((m, sp)) = current {
                mids.push(m);
                spreads.push(sp);
            }
        }
        let minutes: Vec<u32> = calendar.minutes().collect();
        let count = |ms: &mut dyn Iterator<Item = u32>| {
            let mut out = vec![0.0; minutes.len()];
            for m in ms {
                if let Ok(k) = minutes.binary_search(&m) {
                    out[k] += 1.0;
                }
            }
            out
        };
        Ok(MarketSeries {
            mids,
            spreads,
            limit_per_minute: count(&mut rec.limit_orders.iter().map(|o| o.minute_of_day)),
            market_per_minute: count(&mut rec.market_orders.iter().map(|o| o.minute_of_day)),
            order_signs: rec.market_orders.iter().map(|o| o.side.sign() as i8).collect(),
        })
    }
}

/// Equal-width bins `[lo + k·width, lo + (k+1)·width)`; values outside fall
/// into the end bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub lo: f64,
    pub width: f64,
    pub bins: usize,
}

impl HistogramGrid {
    pub fn histogram(&self, values: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.bins];
        if values.is_empty() {
            return h;
        }
        for v in values {
            let k = ((v - self.lo) / self.width).floor();
            let k = if k.is_nan() || k < 0.0 { 0 } else { (k as usize).min(self.bins - 1) };
            h[k] += 1.0;
        }
        let n = values.len() as f64;
        h.iter_mut().for_each(|x| *x /= n);
        h
    }
}

/// Grids and lags shared by every fact vector that is to be compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactSettings {
    pub spread: HistogramGrid,
    pub returns_1s: HistogramGrid,
    pub abs_returns_1s: HistogramGrid,
    pub returns_60s: HistogramGrid,
    pub abs_returns_60s: HistogramGrid,
    pub lags_1s: usize,
    pub lags_60s: usize,
    pub lags_signs: usize,
}

impl Default for FactSettings {
    /// Returns in ticks; mids move in half ticks so bins are centred on them.
    fn default() -> Self {
        FactSettings {
            spread: HistogramGrid { lo: 0.5, width: 1.0, bins: 10 },
            returns_1s: HistogramGrid { lo: -5.25, width: 0.5, bins: 21 },
            abs_returns_1s: HistogramGrid { lo: -0.25, width: 0.5, bins: 11 },
            returns_60s: HistogramGrid { lo: -41.0, width: 2.0, bins: 41 },
            abs_returns_60s: HistogramGrid { lo: -1.0, width: 2.0, bins: 21 },
            lags_1s: 20,
            lags_60s: 10,
            lags_signs: 50,
        }
    }
}

/// Names of the fact components, in the order of [`FactWeights::as_array`].
pub const FACT_NAMES: [&str; 12] = [
    "limit_rate",
    "market_rate",
    "spread",
    "returns_1s",
    "abs_returns_1s",
    "returns_60s",
    "abs_returns_60s",
    "acf_returns_1s",
    "acf_abs_returns_1s",
    "acf_returns_60s",
    "acf_abs_returns_60s",
    "acf_signs",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StylizedFacts {
    pub settings: FactSettings,
    /// Arrivals per second in each trading minute.
    pub limit_rate: Vec<f64>,
    pub market_rate: Vec<f64>,
    pub spread: Vec<f64>,
    pub returns_1s: Vec<f64>,
    pub abs_returns_1s: Vec<f64>,
    pub returns_60s: Vec<f64>,
    pub abs_returns_60s: Vec<f64>,
    pub acf_returns_1s: Vec<f64>,
    pub acf_abs_returns_1s: Vec<f64>,
    pub acf_returns_60s: Vec<f64>,
    pub acf_abs_returns_60s: Vec<f64>,
    pub acf_signs: Vec<f64>,
    /// Statistics that are undefined on this data (reported as zeros).
    pub degenerate: Vec<String>,
}

/// Lagged Pearson correlation of `x[..n-k]` with `x[k..]` for `k = 1..=lags`.
/// Lags with a constant segment (or too few points) give 0. Returns `None`
/// when the whole series is constant.
pub fn autocorrelation(x: &[f64], lags: usize) -> Option<Vec<f64>> {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n.max(1) as f64;
    if n < 2 || x.iter().all(|v| (v - m).abs() == 0.0) {
        return None;
    }
    let corr = |a: &[f64], b: &[f64]| {
        let len = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / len, b.iter().sum::<f64>() / len);
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (u, v) in a.iter().zip(b) {
            sab += (u - ma) * (v - mb);
            saa += (u - ma) * (u - ma);
            sbb += (v - mb) * (v - mb);
        }
        if saa == 0.0 || sbb == 0.0 {
            0.0
        } else {
            (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
        }
    };
    Some((1..=lags).map(|k| if k + 1 < n { corr(&x[..n - k], &x[k..]) } else { 0.0 }).collect())
}

fn diffs(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn compute_stylized_facts(series: &MarketSeries, settings: &FactSettings) -> Result<StylizedFacts> {
    if series.mids.len() < MIN_SERIES_SECONDS {
        return Err(Error::Insufficient(format!(
            "{} seconds of mids; at least {MIN_SERIES_SECONDS} are needed",
            series.mids.len()
        )));
    }
    let mut degenerate = Vec::new();
    let mut acf = |name: &str, x: &[f64], lags: usize| {
        autocorrelation(x, lags).unwrap_or_else(|| {
            degenerate.push(name.to_string());
            vec![0.0; lags]
        })
    };
    let r1 = diffs(&series.mids);
    let a1: Vec<f64> = r1.iter().map(|r| r.abs()).collect();
    let minute_mids: Vec<f64> = series.mids.iter().skip(59).step_by(60).copied().collect();
    let r60 = diffs(&minute_mids);
    let a60: Vec<f64> = r60.iter().map(|r| r.abs()).collect();
    let signs: Vec<f64> = series.order_signs.iter().map(|&s| s as f64).collect();

    let acf_returns_1s = acf("acf_returns_1s", &r1, settings.lags_1s);
    let acf_abs_returns_1s = acf("acf_abs_returns_1s", &a1, settings.lags_1s);
    let acf_returns_60s = acf("acf_returns_60s", &r60, settings.lags_60s);
    let acf_abs_returns_60s = acf("acf_abs_returns_60s", &a60, settings.lags_60s);
    let acf_signs = acf("acf_signs", &signs, settings.lags_signs);
    Ok(StylizedFacts {
        settings: *settings,
        limit_rate: series.limit_per_minute.iter().map(|c| c / 60.0).collect(),
        market_rate: series.market_per_minute.iter().map(|c| c / 60.0).collect(),
        spread: settings.spread.histogram(&series.spreads),
        returns_1s: settings.returns_1s.histogram(&r1),
        abs_returns_1s: settings.abs_returns_1s.histogram(&a1),
        returns_60s: settings.returns_60s.histogram(&r60),
        abs_returns_60s: settings.abs_returns_60s.histogram(&a60),
        acf_returns_1s,
        acf_abs_returns_1s,
        acf_returns_60s,
        acf_abs_returns_60s,
        acf_signs,
        degenerate,
    })
}

/// Weights of the per-fact distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactWeights {
    pub limit_rate: f64,
    pub market_rate: f64,
    pub spread: f64,
    pub returns_1s: f64,
    pub abs_returns_1s: f64,
    pub returns_60s: f64,
    pub abs_returns_60s: f64,
    pub acf_returns_1s: f64,
    pub acf_abs_returns_1s: f64,
    pub acf_returns_60s: f64,
    pub acf_abs_returns_60s: f64,
    pub acf_signs: f64,
}

impl Default for FactWeights {
    fn default() -> Self {
        FactWeights {
            limit_rate: 0.1,
            market_rate: 0.1,
            spread: 1.0,
            returns_1s: 1.0,
            abs_returns_1s: 1.0,
            returns_60s: 0.25,
            abs_returns_60s: 0.25,
            acf_returns_1s: 1.0,
            acf_abs_returns_1s: 1.0,
            acf_returns_60s: 1.0,
            acf_abs_returns_60s: 1.0,
            acf_signs: 1.0,
        }
    }
}

impl FactWeights {
    pub fn as_array(&self) -> [f64; 12] {
        [
            self.limit_rate,
            self.market_rate,
            self.spread,
            self.returns_1s,
            self.abs_returns_1s,
            self.returns_60s,
            self.abs_returns_60s,
            self.acf_returns_1s,
            self.acf_abs_returns_1s,
            self.acf_returns_60s,
            self.acf_abs_returns_60s,
            self.acf_signs,
        ]
    }
}

/// 1-Wasserstein distance between two histograms on the same grid.
pub fn wasserstein1(a: &[f64], b: &[f64], width: f64) -> f64 {
    let (mut ca, mut cb, mut d) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ca += x;
        cb += y;
        d += (ca - cb).abs();
    }
    d * width
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Unweighted per-fact distances, in the order of [`FactWeights::as_array`].
pub fn fact_components(a: &StylizedFacts, b: &StylizedFacts) -> Result<[f64; 12]> {
    if a.settings != b.settings {
        return Err(Error::GridMismatch("fact vectors were computed with different grids or lags".into()));
    }
    if a.limit_rate.len() != b.limit_rate.len() || a.market_rate.len() != b.market_rate.len() {
        return Err(Error::GridMismatch(format!(
            "{} against {} trading minutes",
            a.limit_rate.len(),
            b.limit_rate.len()
        )));
    }
    let s = &a.settings;
    Ok([
        rmse(&a.limit_rate, &b.limit_rate),
        rmse(&a.market_rate, &b.market_rate),
        wasserstein1(&a.spread, &b.spread, s.spread.width),
        wasserstein1(&a.returns_1s, &b.returns_1s, s.returns_1s.width),
        wasserstein1(&a.abs_returns_1s, &b.abs_returns_1s, s.abs_returns_1s.width),
        wasserstein1(&a.returns_60s, &b.returns_60s, s.returns_60s.width),
        wasserstein1(&a.abs_returns_60s, &b.abs_returns_60s, s.abs_returns_60s.width),
        rmse(&a.acf_returns_1s, &b.acf_returns_1s),
        rmse(&a.acf_abs_returns_1s, &b.acf_abs_returns_1s),
        rmse(&a.acf_returns_60s, &b.acf_returns_60s),
        rmse(&a.acf_abs_returns_60s, &b.acf_abs_returns_60s),
        rmse(&a.acf_signs, &b.acf_signs),
    ])
}

/// Weighted sum of the per-fact distances.
pub fn facts_distance(a: &StylizedFacts, b: &StylizedFacts, weights: &FactWeights) -> Result<f64> {
    let c = fact_components(a, b)?;
    Ok(c.iter().zip(weights.as_array()).map(|(d, w)| d * w).sum())
}
