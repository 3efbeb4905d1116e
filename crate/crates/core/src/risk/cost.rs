use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::execution::{ExecutionRecord, Fill};
use crate::lob::Side;

/// Execution cost of one paired run. Costs are positive when adverse,
/// for buys and sells alike; tick values and basis points of `reference_price`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    pub run_index: u64,
    pub reference_price: f64,
    pub total: f64,
    pub market_risk: f64,
    pub market_impact: f64,
    pub executed_fraction: f64,
    /// No fills: the costs are undefined and reported as zero.
    pub no_fills: bool,
}

impl CostRecord {
    pub fn to_bps(&self, ticks: f64) -> f64 {
        1e4 * ticks / self.reference_price
    }

    pub fn total_bps(&self) -> f64 {
        self.to_bps(self.total)
    }

    pub fn market_risk_bps(&self) -> f64 {
        self.to_bps(self.market_risk)
    }

    pub fn market_impact_bps(&self) -> f64 {
        self.to_bps(self.market_impact)
    }

    /// `|total - (market_risk + market_impact)| / max(1, |total|)`.
    pub fn identity_error(&self) -> f64 {
        (self.total - (self.market_risk + self.market_impact)).abs() / self.total.abs().max(1.0)
    }
}

fn side_sign(side: Side) -> f64 {
    side.sign() as f64
}

/// Volume-weighted fill price minus the reference price, signed so that
/// paying up on a buy or selling below the reference is a positive cost.
/// `None` without fills.
pub fn implementation_shortfall(fills: &[Fill], reference_price: f64, side: Side) -> Option<f64> {
    let volume: f64 = fills.iter().map(|f| f.quantity as f64).sum();
    if volume == 0.0 {
        return None;
    }
    let vwap = fills.iter().map(|f| f.price as f64 * f.quantity as f64).sum::<f64>() / volume;
    Some(side_sign(side) * (vwap - reference_price))
}

/// Splits the shortfall into market risk (baseline mid at each fill step
/// against the reference) and market impact (fill price against the
/// baseline mid). `baseline_mids[t]` is the baseline mid at the end of step `t`.
pub fn decompose(fills: &[Fill], baseline_mids: &[f64], reference_price: f64, side: Side) -> Result<Option<(f64, f64)>> {
    let volume: f64 = fills.iter().map(|f| f.quantity as f64).sum();
    if volume == 0.0 {
        return Ok(None);
    }
    let mut risk = 0.0;
    let mut impact = 0.0;
    for f in fills {
        let base = *baseline_mids.get(f.step as usize).ok_or(Error::Alignment(f.step))?;
        let v = f.quantity as f64;
        risk += base * v;
        impact += (f.price as f64 - base) * v;
    }
    let s = side_sign(side);
    Ok(Some((s * (risk / volume - reference_price), s * impact / volume)))
}

/// Cost record of a counterfactual execution against its baseline.
pub fn cost_record(run_index: u64, exec: &ExecutionRecord, baseline_mids: &[f64], reference_price: f64) -> Result<CostRecord> {
    let total = implementation_shortfall(&exec.fills, reference_price, exec.side);
    let parts = decompose(&exec.fills, baseline_mids, reference_price, exec.side)?;
    Ok(match (total, parts) {
        (Some(total), Some((market_risk, market_impact))) => CostRecord {
            run_index,
            reference_price,
            total,
            market_risk,
            market_impact,
            executed_fraction: exec.executed_fraction(),
            no_fills: false,
        },
        _ => CostRecord {
            run_index,
            reference_price,
            total: 0.0,
            market_risk: 0.0,
            market_impact: 0.0,
            executed_fraction: exec.executed_fraction(),
            no_fills: true,
        },
    })
}
