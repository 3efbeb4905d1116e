//! Plot-ready CSV output of the risk analyses. Every file starts with a
//! `# master_seed=N` comment line so results can be traced to their seed.

use std::io::Write;

use super::{CostRecord, Frontier, ImpactCurve, LiquidityRiskSurface};
use crate::execution::ExecutionRecord;

pub const SURFACE_HEADER: &str = "horizon_steps,size,mean_cost_mi_bps,std_cost_bps,pct_executed,n_runs,extrapolated,se_cost_mi_bps,bloomberg_tc_bps";
pub const IMPACT_HEADER: &str = "strategy_id,step,mid_baseline,mid_counterfactual,impact_ticks";
pub const FRONTIER_HEADER: &str = "strategy_id,mean_cost_bps,var_cost_bps2,se_mean_bps,n_runs,on_envelope";
pub const FRONTIER_CHOICE_HEADER: &str = "lambda,strategy_id,utility";
pub const FILLS_HEADER: &str = "run_id,step,price,qty";
pub const COSTS_HEADER: &str =
    "strategy_id,run_id,reference_price,total,market_risk,market_impact,total_bps,market_risk_bps,market_impact_bps,executed_fraction,no_fills";

pub fn write_seed_line<W: Write>(w: &mut W, master_seed: u64) -> std::io::Result<()> {
    writeln!(w, "# master_seed={master_seed}")
}

pub fn write_surface<W: Write>(mut w: W, surface: &LiquidityRiskSurface) -> std::io::Result<()> {
    write_seed_line(&mut w, surface.master_seed)?;
    writeln!(w, "{SURFACE_HEADER}")?;
    for c in &surface.cells {
        let bb = c.bloomberg_tc_bps.map_or(String::new(), |v| v.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            c.horizon_steps, c.size, c.mean_cost_mi_bps, c.std_cost_bps, c.pct_executed, c.n_runs, c.extrapolated, c.se_cost_mi_bps, bb
        )?;
    }
    Ok(())
}

/// Mean curves of several strategies in one file; `step` is the absolute
/// simulation step.
pub fn write_impact_curves<W: Write>(mut w: W, master_seed: u64, curves: &[ImpactCurve]) -> std::io::Result<()> {
    write_seed_line(&mut w, master_seed)?;
    writeln!(w, "{IMPACT_HEADER}")?;
    for c in curves {
        for (i, ((b, cf), mi)) in c.baseline_mid.iter().zip(&c.counterfactual_mid).zip(&c.impact).enumerate() {
            writeln!(w, "{},{},{},{},{}", c.strategy_id, c.start_step + i as u64, b, cf, mi)?;
        }
    }
    Ok(())
}

pub fn write_frontier<W: Write>(mut w: W, master_seed: u64, frontier: &Frontier) -> std::io::Result<()> {
    write_seed_line(&mut w, master_seed)?;
    writeln!(w, "{FRONTIER_HEADER}")?;
    for (p, env) in frontier.points.iter().zip(&frontier.on_envelope) {
        writeln!(w, "{},{},{},{},{},{}", p.strategy_id, p.mean_cost_bps, p.var_cost_bps2, p.se_mean_bps, p.n_runs, env)?;
    }
    Ok(())
}

pub fn write_frontier_choices<W: Write>(mut w: W, master_seed: u64, frontier: &Frontier) -> std::io::Result<()> {
    write_seed_line(&mut w, master_seed)?;
    writeln!(w, "{FRONTIER_CHOICE_HEADER}")?;
    for &(lambda, i, u) in &frontier.choices {
        writeln!(w, "{},{},{}", lambda, frontier.points[i].strategy_id, u)?;
    }
    Ok(())
}

pub fn write_fills<W: Write>(mut w: W, master_seed: u64, runs: &[(u64, &ExecutionRecord)]) -> std::io::Result<()> {
    write_seed_line(&mut w, master_seed)?;
    writeln!(w, "{FILLS_HEADER}")?;
    for (run, rec) in runs {
        for f in &rec.fills {
            writeln!(w, "{},{},{},{}", run, f.step, f.price, f.quantity)?;
        }
    }
    Ok(())
}

pub fn write_costs<W: Write>(mut w: W, master_seed: u64, costs: &[(&str, &CostRecord)]) -> std::io::Result<()> {
    write_seed_line(&mut w, master_seed)?;
    writeln!(w, "{COSTS_HEADER}")?;
    for (id, c) in costs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            id,
            c.run_index,
            c.reference_price,
            c.total,
            c.market_risk,
            c.market_impact,
            c.total_bps(),
            c.market_risk_bps(),
            c.market_impact_bps(),
            c.executed_fraction,
            c.no_fills
        )?;
    }
    Ok(())
}
