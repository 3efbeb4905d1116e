use serde::{Deserialize, Serialize};

use crate::agents::RateProfile;
use crate::error::{Error, Result};
use crate::lob::{Qty, Side, Step};
use crate::session::SessionCalendar;

/// Default VWAP bin: 5 s at 20 ms steps.
pub const DEFAULT_VWAP_BIN_STEPS: Step = 250;

/// A parent order to be worked over a horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaOrder {
    pub side: Side,
    pub quantity: Qty,
    pub start_step: Step,
    pub horizon: Step,
    pub strategy_id: String,
}

/// One child market order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slice {
    pub step: Step,
    pub quantity: Qty,
}

/// Child orders sorted by step. Unfilled slice quantity is dropped, never
/// carried to a later slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionSchedule {
    pub strategy_id: String,
    pub side: Side,
    pub start_step: Step,
    pub horizon: Step,
    pub slices: Vec<Slice>,
}

impl ExecutionSchedule {
    /// A schedule that never trades.
    pub fn empty(side: Side, start_step: Step, horizon: Step) -> Self {
        ExecutionSchedule { strategy_id: "none".into(), side, start_step, horizon, slices: Vec::new() }
    }

    pub fn total_quantity(&self) -> Qty {
        self.slices.iter().map(|s| s.quantity).sum()
    }

    pub fn end_step(&self) -> Step {
        self.start_step + self.horizon
    }

    /// Step of the last child order, if any.
    pub fn last_slice_step(&self) -> Option<Step> {
        self.slices.last().map(|s| s.step)
    }
}

fn check_meta(meta: &MetaOrder) -> Result<()> {
    if meta.horizon == 0 {
        return Err(Error::Config("meta-order horizon must be at least one step".into()));
    }
    Ok(())
}

/// Splits `total` into `n` integer parts as equal as possible, earlier
/// parts taking the remainder.
pub fn equal_split(total: Qty, n: usize) -> Vec<Qty> {
    let base = total / n as Qty;
    let rem = (total % n as Qty) as usize;
    (0..n).map(|i| base + Qty::from(i < rem)).collect()
}

/// Equal slices every `interval_steps` from the start of the horizon.
pub fn build_uniform_schedule(meta: &MetaOrder, interval_steps: Step) -> Result<ExecutionSchedule> {
    if interval_steps == 0 {
        return Err(Error::Config("slice interval must be positive".into()));
    }
    check_meta(meta)?;
    let n = meta.horizon.div_ceil(interval_steps) as usize;
    let slices = equal_split(meta.quantity, n)
        .into_iter()
        .enumerate()
        .filter(|(_, q)| *q > 0)
        .map(|(k, quantity)| Slice { step: meta.start_step + k as Step * interval_steps, quantity })
        .collect();
    Ok(ExecutionSchedule {
        strategy_id: meta.strategy_id.clone(),
        side: meta.side,
        start_step: meta.start_step,
        horizon: meta.horizon,
        slices,
    })
}

/// Integer allocation proportional to `weights` with largest-remainder
/// rounding (ties to the earliest index). Falls back to an equal split
/// when no weight is positive.
pub fn largest_remainder(total: Qty, weights: &[f64]) -> Vec<Qty> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().filter(|w| w.is_finite() && **w > 0.0).sum();
    if sum <= 0.0 {
        return equal_split(total, weights.len());
    }
    let exact: Vec<f64> = weights
        .iter()
        .map(|&w| if w.is_finite() && w > 0.0 { total as f64 * w / sum } else { 0.0 })
        .collect();
    let mut out: Vec<Qty> = exact.iter().map(|x| x.floor() as Qty).collect();
    // the floors never sum above `total`; hand out the shortfall by largest fraction
    let assigned: Qty = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

/// Slice quantities for one day, proportional to a per-bin volume profile.
pub fn build_vwap_slices(day_quantity: Qty, bin_weights: &[f64]) -> Vec<Qty> {
    largest_remainder(day_quantity, bin_weights)
}

/// Historical market-order intensity for each `bin_steps` bin of a day
/// that starts at `day_start` (a step index), taken from the minute in
/// which the bin begins.
pub fn vwap_bin_weights(rates: &RateProfile, calendar: &SessionCalendar, day_start: Step, bin_steps: Step) -> Vec<f64> {
    let spd = calendar.steps_per_day();
    (0..spd.div_ceil(bin_steps)).map(|b| rates.mu(calendar.minute_of_day(day_start + b * bin_steps))).collect()
}

/// Multi-day schedule: `fractions[k]` of the quantity on day `k`, each day
/// worked by the VWAP slicer on `bin_steps` bins. Day `k` covers the
/// `steps_per_day` steps starting at `start_step + k * steps_per_day`.
pub fn build_daily_schedule(
    meta: &MetaOrder,
    fractions: &[f64],
    rates: &RateProfile,
    calendar: &SessionCalendar,
    bin_steps: Step,
) -> Result<ExecutionSchedule> {
    check_meta(meta)?;
    if bin_steps == 0 {
        return Err(Error::Config("VWAP bin must be positive".into()));
    }
    if fractions.is_empty() || fractions.iter().any(|f| !(*f >= 0.0)) {
        return Err(Error::Config("daily fractions must be non-negative".into()));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("daily fractions sum to {sum}, expected 1")));
    }
    let spd = calendar.steps_per_day();
    let daily = daily_quantities(meta.quantity, fractions);
    let mut slices = Vec::new();
    for (day, &q) in daily.iter().enumerate() {
        let day_start = meta.start_step + day as Step * spd;
        let weights = vwap_bin_weights(rates, calendar, day_start, bin_steps);
        for (b, qty) in build_vwap_slices(q, &weights).into_iter().enumerate() {
            if qty > 0 {
                slices.push(Slice { step: day_start + b as Step * bin_steps, quantity: qty });
            }
        }
    }
    Ok(ExecutionSchedule {
        strategy_id: meta.strategy_id.clone(),
        side: meta.side,
        start_step: meta.start_step,
        horizon: meta.horizon.max(spd * fractions.len() as Step),
        slices,
    })
}

/// Per-day quantities for a set of daily fractions.
pub fn daily_quantities(quantity: Qty, fractions: &[f64]) -> Vec<Qty> {
    largest_remainder(quantity, fractions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(q: Qty, horizon: Step) -> MetaOrder {
        MetaOrder { side: Side::Sell, quantity: q, start_step: 100, horizon, strategy_id: "t".into() }
    }

    #[test]
    fn uniform_examples() {
        // 5 minutes at 10 s intervals with 20 ms steps
        let s = build_uniform_schedule(&meta(3000, 15_000), 500).unwrap();
        assert_eq!(s.slices.len(), 30);
        assert!(s.slices.iter().all(|x| x.quantity == 100));
        assert_eq!(s.slices[0].step, 100);
        assert_eq!(s.slices[29].step, 100 + 29 * 500);

        let one = build_uniform_schedule(&meta(1, 15_000), 500).unwrap();
        assert_eq!(one.slices, vec![Slice { step: 100, quantity: 1 }]);

        let r = build_uniform_schedule(&meta(31, 30), 10).unwrap();
        let q: Vec<_> = r.slices.iter().map(|s| s.quantity).collect();
        assert_eq!(q, vec![11, 10, 10]);

        assert!(build_uniform_schedule(&meta(31, 30), 0).is_err());
        assert!(build_uniform_schedule(&meta(0, 30), 10).unwrap().slices.is_empty());
    }

    #[test]
    fn daily_quantities_examples() {
        assert_eq!(daily_quantities(3000, &[0.7, 0.2, 0.05, 0.03, 0.02]), vec![2100, 600, 150, 90, 60]);
        assert_eq!(daily_quantities(3000, &[0.2; 5]), vec![600; 5]);
        assert_eq!(daily_quantities(3000, &[0.02, 0.03, 0.05, 0.2, 0.7]), vec![60, 90, 150, 600, 2100]);
    }

    #[test]
    fn daily_schedule_per_day_totals() {
        let cal = SessionCalendar::parse(&["09:15-09:20"], 20).unwrap();
        let rates = RateProfile::flat(&cal, 0.1, 0.05);
        let m = MetaOrder { side: Side::Buy, quantity: 3000, start_step: 0, horizon: 1, strategy_id: "A".into() };
        let s = build_daily_schedule(&m, &[0.7, 0.2, 0.05, 0.03, 0.02], &rates, &cal, 250).unwrap();
        let spd = cal.steps_per_day();
        let per_day: Vec<Qty> =
            (0..5).map(|d| s.slices.iter().filter(|x| x.step / spd == d).map(|x| x.quantity).sum()).collect();
        assert_eq!(per_day, vec![2100, 600, 150, 90, 60]);
        assert_eq!(s.total_quantity(), 3000);
        assert!(build_daily_schedule(&m, &[0.5, 0.4], &rates, &cal, 250).is_err());
    }

    #[test]
    fn vwap_examples() {
        assert_eq!(build_vwap_slices(12, &[1.0; 4]), vec![3; 4]);
        assert_eq!(build_vwap_slices(12, &[0.0, 5.0, 0.0]), vec![0, 12, 0]);
        assert_eq!(build_vwap_slices(5, &[0.0; 3]), vec![2, 2, 1]);
        assert_eq!(build_vwap_slices(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
    }
}
