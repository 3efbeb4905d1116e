use serde::{Deserialize, Serialize};

use super::stats::{mean, ols, std_dev, std_error};
use super::{bloomberg_tc, run_indexed, run_paired, BloombergTcParams, NaturalCubicSpline};
use crate::error::{Error, Result};
use crate::execution::{build_uniform_schedule, MetaOrder};
use crate::lob::{Qty, Side, Step};
use crate::rng::SeedSet;
use crate::sim::{MarketModel, Recording};

/// Grid of execution horizons and sizes, each cell a uniform schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub horizons: Vec<Step>,
    pub sizes: Vec<Qty>,
    pub side: Side,
    pub interval_steps: Step,
    pub start_step: Step,
    /// Extra steps simulated after each horizon.
    pub tail_steps: Step,
    pub n_runs: usize,
    pub master_seed: u64,
    pub bloomberg: Option<BloombergTcParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub horizon_steps: Step,
    pub size: Qty,
    pub mean_cost_mi_bps: f64,
    pub se_cost_mi_bps: f64,
    pub std_cost_bps: f64,
    pub pct_executed: f64,
    pub n_runs: usize,
    pub extrapolated: bool,
    pub bloomberg_tc_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidityRiskSurface {
    pub master_seed: u64,
    pub cells: Vec<SurfaceCell>,
}

impl LiquidityRiskSurface {
    pub fn cells_at(&self, horizon: Step) -> Vec<&SurfaceCell> {
        let mut v: Vec<_> = self.cells.iter().filter(|c| c.horizon_steps == horizon).collect();
        v.sort_by_key(|c| c.size);
        v
    }
}

/// Replaces the mean and spread of partially executed cells by a natural
/// cubic spline along size through the fully executed cells of the same
/// horizon, and flags them.
pub fn extrapolate_cells(cells: &mut [SurfaceCell]) {
    let mut horizons: Vec<Step> = cells.iter().map(|c| c.horizon_steps).collect();
    horizons.sort_unstable();
    horizons.dedup();
    for h in horizons {
        let mut knots: Vec<(f64, f64, f64)> = cells
            .iter()
            .filter(|c| c.horizon_steps == h && c.pct_executed >= 100.0 - 1e-9)
            .map(|c| (c.size as f64, c.mean_cost_mi_bps, c.std_cost_bps))
            .collect();
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        knots.dedup_by(|a, b| a.0 == b.0);
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let mean_s = NaturalCubicSpline::new(&xs, &knots.iter().map(|k| k.1).collect::<Vec<_>>());
        let std_s = NaturalCubicSpline::new(&xs, &knots.iter().map(|k| k.2).collect::<Vec<_>>());
        for c in cells.iter_mut().filter(|c| c.horizon_steps == h && c.pct_executed < 100.0 - 1e-9) {
            c.extrapolated = true;
            if let (Some(ms), Some(ss)) = (&mean_s, &std_s) {
                c.mean_cost_mi_bps = ms.eval(c.size as f64);
                c.std_cost_bps = ss.eval(c.size as f64).max(0.0);
            }
        }
    }
}

/// Slope of log mean impact cost on log size over cells with positive cost.
pub fn fitted_exponent(cells: &[&SurfaceCell]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.mean_cost_mi_bps > 0.0 && c.size > 0)
        .map(|c| ((c.size as f64).ln(), c.mean_cost_mi_bps.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Some(ols(&x, &y).0)
}

pub fn build_surface(pool: &rayon::ThreadPool, model: &MarketModel, spec: &SurfaceSpec) -> Result<LiquidityRiskSurface> {
    if spec.horizons.is_empty() || spec.sizes.is_empty() {
        return Err(Error::Config("surface grid must be non-empty".into()));
    }
    if spec.n_runs < 2 {
        return Err(Error::Config("surface needs at least two runs per cell".into()));
    }
    let grid: Vec<(Step, Qty)> = spec.horizons.iter().flat_map(|&h| spec.sizes.iter().map(move |&q| (h, q))).collect();
    let schedules = grid
        .iter()
        .map(|&(horizon, quantity)| {
            let meta = MetaOrder { side: spec.side, quantity, start_step: spec.start_step, horizon, strategy_id: format!("h{horizon}_q{quantity}") };
            build_uniform_schedule(&meta, spec.interval_steps)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = spec.n_runs;
    // one task per (cell, run); the seed depends only on the run index
    let costs = run_indexed(pool, spec.master_seed, grid.len() * n, |task| {
        let cell = task.run_index as usize / n;
        let run = task.run_index % n as u64;
        let seeds = SeedSet::new(spec.master_seed, run);
        let (horizon, _) = grid[cell];
        let steps = spec.start_step + horizon + spec.tail_steps;
        Ok(run_paired(model, &seeds, steps, &schedules[cell], &Recording::default())?.cost)
    })?;
    let mut cells = Vec::with_capacity(grid.len());
    for (k, &(horizon, size)) in grid.iter().enumerate() {
        let cs = &costs[k * n..(k + 1) * n];
        let mi: Vec<f64> = cs.iter().map(|c| c.market_impact_bps()).collect();
        let tot: Vec<f64> = cs.iter().map(|c| c.total_bps()).collect();
        let frac: Vec<f64> = cs.iter().map(|c| c.executed_fraction).collect();
        let reference = mean(&cs.iter().map(|c| c.reference_price).collect::<Vec<_>>());
        let bloomberg_tc_bps = match &spec.bloomberg {
            Some(p) => Some(1e4 * bloomberg_tc(size as f64, p)? / reference),
            None => None,
        };
        cells.push(SurfaceCell {
            horizon_steps: horizon,
            size,
            mean_cost_mi_bps: mean(&mi),
            se_cost_mi_bps: std_error(&mi),
            std_cost_bps: std_dev(&tot),
            pct_executed: 100.0 * mean(&frac),
            n_runs: n,
            extrapolated: false,
            bloomberg_tc_bps,
        });
    }
    extrapolate_cells(&mut cells);
    Ok(LiquidityRiskSurface { master_seed: spec.master_seed, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(size: Qty, mean: f64, pct: f64) -> SurfaceCell {
        SurfaceCell {
            horizon_steps: 10,
            size,
            mean_cost_mi_bps: mean,
            se_cost_mi_bps: 0.0,
            std_cost_bps: 1.0,
            pct_executed: pct,
            n_runs: 2,
            extrapolated: false,
            bloomberg_tc_bps: None,
        }
    }

    #[test]
    fn partial_cells_are_extrapolated_and_flagged() {
        let mut cells = vec![cell(1, 1.0, 100.0), cell(2, 2.0, 100.0), cell(3, 3.0, 100.0), cell(4, 99.0, 80.0)];
        extrapolate_cells(&mut cells);
        assert!(cells[..3].iter().all(|c| !c.extrapolated));
        assert!(cells[3].extrapolated);
        assert!((cells[3].mean_cost_mi_bps - 4.0).abs() < 1e-12);
    }

    #[test]
    fn square_root_exponent() {
        let cells: Vec<_> = [1u64, 4, 16, 64].iter().map(|&q| cell(q, 3.0 * (q as f64).sqrt(), 100.0)).collect();
        let refs: Vec<_> = cells.iter().collect();
        assert!((fitted_exponent(&refs).unwrap() - 0.5).abs() < 1e-12);
    }
}
