use serde::{Deserialize, Serialize};

use super::stats::{mean, variance};
use super::CostRecord;

/// Mean impact cost and total-cost variance of one strategy, in bps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub strategy_id: String,
    pub mean_cost_bps: f64,
    pub var_cost_bps2: f64,
    pub se_mean_bps: f64,
    pub n_runs: usize,
}

impl FrontierPoint {
    pub fn from_costs(strategy_id: &str, costs: &[CostRecord]) -> Self {
        let mi: Vec<f64> = costs.iter().map(CostRecord::market_impact_bps).collect();
        let tot: Vec<f64> = costs.iter().map(CostRecord::total_bps).collect();
        let n = costs.len();
        FrontierPoint {
            strategy_id: strategy_id.to_string(),
            mean_cost_bps: mean(&mi),
            var_cost_bps2: variance(&tot),
            se_mean_bps: (variance(&mi) / n as f64).sqrt(),
            n_runs: n,
        }
    }

    pub fn utility(&self, lambda_risk: f64) -> f64 {
        self.mean_cost_bps + lambda_risk * self.var_cost_bps2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
    /// (lambda, index of the utility minimiser, its utility).
    pub choices: Vec<(f64, usize, f64)>,
    /// Whether each point minimises the utility for some lambda >= 0.
    pub on_envelope: Vec<bool>,
}

/// Index of the strategy minimising `E + lambda V`; ties go to the lower index.
pub fn optimal_strategy(points: &[FrontierPoint], lambda_risk: f64) -> Option<usize> {
    (0..points.len()).min_by(|&a, &b| points[a].utility(lambda_risk).total_cmp(&points[b].utility(lambda_risk)).then(a.cmp(&b)))
}

/// Points that minimise `E + lambda V` for some `lambda >= 0` (the lower
/// envelope of the (V, E) scatter).
pub fn lower_envelope(points: &[FrontierPoint]) -> Vec<bool> {
    (0..points.len())
        .map(|i| {
            let (ei, vi) = (points[i].mean_cost_bps, points[i].var_cost_bps2);
            let mut lo = 0.0f64;
            let mut hi = f64::INFINITY;
            for (j, p) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                // (ei - ej) + lambda (vi - vj) <= 0
                let de = ei - p.mean_cost_bps;
                let dv = vi - p.var_cost_bps2;
                if dv == 0.0 {
                    if de > 0.0 {
                        return false;
                    }
                } else if dv > 0.0 {
                    hi = hi.min(-de / dv);
                } else {
                    lo = lo.max(-de / dv);
                }
            }
            lo <= hi
        })
        .collect()
}

pub fn efficient_frontier(points: Vec<FrontierPoint>, lambdas: &[f64]) -> Frontier {
    let choices = lambdas
        .iter()
        .filter_map(|&l| optimal_strategy(&points, l).map(|i| (l, i, points[i].utility(l))))
        .collect();
    let on_envelope = lower_envelope(&points);
    Frontier { points, choices, on_envelope }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(id: &str, e: f64, v: f64) -> FrontierPoint {
        FrontierPoint { strategy_id: id.into(), mean_cost_bps: e, var_cost_bps2: v, se_mean_bps: 0.0, n_runs: 1 }
    }

    #[test]
    fn single_strategy_always_optimal() {
        let f = efficient_frontier(vec![p("a", 3.0, 4.0)], &[0.0, 0.5, 10.0]);
        assert!(f.choices.iter().all(|c| c.1 == 0));
        assert_eq!(f.on_envelope, vec![true]);
    }

    #[test]
    fn lambda_zero_picks_min_mean_and_dominated_points_are_off() {
        let pts = vec![p("A", 5.0, 1.0), p("B", 3.0, 2.0), p("C", 4.0, 3.0), p("D", 4.5, 1.6)];
        assert_eq!(optimal_strategy(&pts, 0.0), Some(1));
        assert_eq!(optimal_strategy(&pts, 100.0), Some(0));
        // D lies above the chord from A to B
        assert_eq!(lower_envelope(&pts), vec![true, true, false, false]);
    }
}
