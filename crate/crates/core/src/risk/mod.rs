//! Paired baseline/counterfactual Monte Carlo, cost decomposition and the
//! liquidity analyses built on it.

mod bloomberg;
mod cost;
mod frontier;
pub mod output;
mod spline;
pub mod stats;
mod surface;

use rayon::prelude::*;

pub use bloomberg::{bloomberg_tc, BloombergTcParams};
pub use cost::{cost_record, decompose, implementation_shortfall, CostRecord};
pub use frontier::{efficient_frontier, lower_envelope, optimal_strategy, Frontier, FrontierPoint};
pub use spline::NaturalCubicSpline;
pub use surface::{build_surface, extrapolate_cells, fitted_exponent, LiquidityRiskSurface, SurfaceCell, SurfaceSpec};

use crate::error::{Error, Result};
use crate::execution::ExecutionSchedule;
use crate::lob::Step;
use crate::rng::SeedSet;
use crate::sim::{simulate, MarketModel, PathRecord, Recording};

/// Result of one paired experiment.
#[derive(Debug, Clone)]
pub struct PairedRun {
    pub baseline: PathRecord,
    pub counterfactual: PathRecord,
    /// Flagged `no_fills` when the schedule never traded.
    pub cost: CostRecord,
}

impl PairedRun {
    /// `p_MI(t)`: counterfactual minus baseline mid at each step.
    pub fn impact_series(&self) -> Vec<f64> {
        self.counterfactual.mids.iter().zip(&self.baseline.mids).map(|(c, b)| c - b).collect()
    }
}

/// Runs the baseline (no execution) and the counterfactual (with
/// `schedule`) on identical seeds and decomposes the execution cost.
pub fn run_paired(
    model: &MarketModel,
    seeds: &SeedSet,
    steps: Step,
    schedule: &ExecutionSchedule,
    recording: &Recording,
) -> Result<PairedRun> {
    let baseline = simulate(model, seeds, steps, recording, None)?;
    let counterfactual = simulate(model, seeds, steps, recording, Some(schedule))?;
    let exec = counterfactual.execution.as_ref().expect("counterfactual carries an execution record");
    let reference = exec.reference_mid.unwrap_or_else(|| reference_mid(&baseline, schedule.start_step));
    let cost = cost_record(seeds.run_index, exec, &baseline.mids, reference)?;
    Ok(PairedRun { baseline, counterfactual, cost })
}

/// Mid at the start of `step`: the previous end-of-step mid, or the
/// opening mid for step 0.
pub fn reference_mid(path: &PathRecord, step: Step) -> f64 {
    if step == 0 {
        path.open_mid
    } else {
        path.mids[step as usize - 1]
    }
}

/// Worker pool capped at `threads` (all cores when `None`).
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Evaluates `f` for run indices `0..n_runs` in parallel; results come back
/// in run order, so reductions over them do not depend on scheduling.
pub fn run_indexed<T, F>(pool: &rayon::ThreadPool, master_seed: u64, n_runs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(SeedSet) -> Result<T> + Sync + Send,
{
    pool.install(|| (0..n_runs as u64).into_par_iter().map(|i| f(SeedSet::new(master_seed, i))).collect())
}

/// Per-run summary kept from a Monte Carlo batch.
#[derive(Debug, Clone)]
pub struct PairSummary {
    pub cost: CostRecord,
    /// Impact, baseline mid and counterfactual mid over the curve window.
    pub impact: Vec<f64>,
    pub baseline_mid: Vec<f64>,
    pub counterfactual_mid: Vec<f64>,
}

/// Mean curves across runs, from the schedule start.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactCurve {
    pub strategy_id: String,
    pub start_step: Step,
    pub baseline_mid: Vec<f64>,
    pub counterfactual_mid: Vec<f64>,
    pub impact: Vec<f64>,
}

/// Paired batch over `n_runs` seeds. The curve window runs from the
/// schedule start for `curve_len` steps (0 keeps no curves).
pub fn monte_carlo(
    pool: &rayon::ThreadPool,
    model: &MarketModel,
    schedule: &ExecutionSchedule,
    steps: Step,
    master_seed: u64,
    n_runs: usize,
    curve_len: Step,
) -> Result<Vec<PairSummary>> {
    let from = schedule.start_step as usize;
    let to = (schedule.start_step + curve_len).min(steps) as usize;
    run_indexed(pool, master_seed, n_runs, |seeds| {
        let run = run_paired(model, &seeds, steps, schedule, &Recording::default())?;
        let (impact, baseline_mid, counterfactual_mid) = if to > from {
            (
                run.impact_series()[from..to].to_vec(),
                run.baseline.mids[from..to].to_vec(),
                run.counterfactual.mids[from..to].to_vec(),
            )
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        Ok(PairSummary { cost: run.cost, impact, baseline_mid, counterfactual_mid })
    })
}

pub fn mean_impact_curve(strategy_id: &str, start_step: Step, runs: &[PairSummary]) -> ImpactCurve {
    let len = runs.first().map_or(0, |r| r.impact.len());
    let n = runs.len() as f64;
    let avg = |get: &dyn Fn(&PairSummary) -> &Vec<f64>| -> Vec<f64> {
        let mut acc = vec![0.0; len];
        for r in runs {
            for (a, v) in acc.iter_mut().zip(get(r)) {
                *a += v;
            }
        }
        acc.iter().map(|a| a / n).collect()
    };
    ImpactCurve {
        strategy_id: strategy_id.to_string(),
        start_step,
        baseline_mid: avg(&|r| &r.baseline_mid),
        counterfactual_mid: avg(&|r| &r.counterfactual_mid),
        impact: avg(&|r| &r.impact),
    }
}
