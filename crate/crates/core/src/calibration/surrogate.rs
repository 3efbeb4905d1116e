//! Surrogate-model minimisation of expensive, noisy objectives.
//!
//! A Latin-hypercube design of `10 × dim` points is evaluated first (in
//! parallel). Each further iteration fits a cubic radial-basis interpolant
//! with a linear tail to everything evaluated so far, scores a cloud of
//! candidates by a blend of the interpolant and the distance to the nearest
//! evaluated point, and evaluates the best candidate. The blend weight
//! cycles so the search alternates between exploring and refining.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::DrawStream;

/// Box constraints, one `(lo, hi)` pair per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Config("bounds need matching, non-empty lower and upper vectors".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Config("every lower bound must be finite and below its upper bound".into()));
        }
        Ok(Bounds { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| v >= a && v <= b)
    }

    fn to_space(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.lo.iter().zip(&self.hi)).map(|(u, (a, b))| (a + u * (b - a)).clamp(*a, *b)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Design,
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub phase: Phase,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSettings {
    /// Total evaluations. Zero evaluates the design only; otherwise it must
    /// be at least the design size.
    pub budget: usize,
    pub seed: u64,
    /// Candidates scored per iteration, per dimension.
    pub candidates_per_dim: usize,
    /// Weight of the interpolant (vs. distance) in the candidate score;
    /// cycled through across iterations.
    pub weight_cycle: Vec<f64>,
}

impl Default for SurrogateSettings {
    fn default() -> Self {
        SurrogateSettings { budget: 0, seed: 1, candidates_per_dim: 200, weight_cycle: vec![0.3, 0.5, 0.8, 0.95, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub log: Vec<Trial>,
    pub warnings: Vec<String>,
}

pub fn design_size(dim: usize) -> usize {
    10 * dim
}

/// Latin-hypercube sample of `n` points in the unit cube.
pub fn latin_hypercube(n: usize, dim: usize, rng: &mut DrawStream) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; n];
    for d in 0..dim {
        let mut strata: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            strata.swap(i, rng.index(i + 1));
        }
        for (p, s) in pts.iter_mut().zip(strata) {
            p[d] = (s as f64 + rng.uniform()) / n as f64;
        }
    }
    pts
}

/// Cubic radial-basis interpolant with a linear polynomial tail.
#[derive(Debug, Clone)]
pub struct RbfModel {
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// Constant then one coefficient per dimension.
    tail: Vec<f64>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl RbfModel {
    pub fn fit(points: &[Vec<f64>], values: &[f64]) -> Result<Self> {
        let n = points.len();
        let dim = points.first().map_or(0, Vec::len);
        if n < dim + 1 {
            return Err(Error::Insufficient(format!("{n} points cannot fit a surrogate in {dim} dimensions")));
        }
        let m = n + dim + 1;
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = dist(&points[i], &points[j]).powi(3);
            }
            a[(i, n)] = 1.0;
            a[(n, i)] = 1.0;
            for d in 0..dim {
                a[(i, n + 1 + d)] = points[i][d];
                a[(n + 1 + d, i)] = points[i][d];
            }
            rhs[i] = values[i];
        }
        let solve = |a: DMatrix<f64>| a.lu().solve(&rhs).filter(|s| s.iter().all(|v| v.is_finite()));
        let sol = match solve(a.clone()) {
            Some(s) => s,
            None => {
                // nearly coincident points: a small ridge keeps the system solvable
                let mut r = a;
                for i in 0..n {
                    r[(i, i)] += 1e-8;
                }
                solve(r).ok_or_else(|| Error::Degenerate("surrogate system is singular".into()))?
            }
        };
        Ok(RbfModel { centers: points.to_vec(), weights: sol.as_slice()[..n].to_vec(), tail: sol.as_slice()[n..].to_vec() })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let rbf: f64 = self.centers.iter().zip(&self.weights).map(|(c, w)| w * dist(c, x).powi(3)).sum();
        rbf + self.tail[0] + x.iter().zip(&self.tail[1..]).map(|(v, c)| v * c).sum::<f64>()
    }
}

fn normalize(v: &mut [f64]) {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = hi - lo;
    v.iter_mut().for_each(|x| *x = if span > 0.0 { (*x - lo) / span } else { 1.0 });
}

/// Minimises `f` over `bounds`. Design points are evaluated in parallel on
/// the current rayon pool; the fit/propose step is serial, so the result
/// depends only on `(f, bounds, settings)`.
pub fn minimize<F>(f: F, bounds: &Bounds, settings: &SurrogateSettings) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let dim = bounds.dim();
    let n0 = design_size(dim);
    let mut warnings = Vec::new();
    if settings.budget == 0 {
        warnings.push(format!("surrogate budget is 0: returning the best of the {n0}-point design without surrogate iterations"));
    } else if settings.budget < n0 {
        return Err(Error::Config(format!("surrogate budget {} is below the design size {n0}", settings.budget)));
    }
    if settings.weight_cycle.is_empty() || settings.weight_cycle.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::Config("surrogate weight cycle needs values in [0, 1]".into()));
    }
    let budget = settings.budget.max(n0);
    let mut rng = DrawStream::from_seed(settings.seed);
    let mut unit = latin_hypercube(n0, dim, &mut rng);
    let design: Vec<Vec<f64>> = unit.iter().map(|u| bounds.to_space(u)).collect();
    let values: Vec<f64> = design.par_iter().map(|x| f(x)).collect::<Result<_>>()?;
    let mut log: Vec<Trial> = design
        .into_iter()
        .zip(&values)
        .enumerate()
        .map(|(index, (params, &value))| Trial { index, phase: Phase::Design, params, value })
        .collect();
    let mut vals = values;

    // perturbation radius in the unit cube, adapted on success/failure streaks
    let mut radius = 0.2;
    let (mut fails, mut wins) = (0, 0);
    let n_cand = settings.candidates_per_dim * dim;
    for it in 0..budget - n0 {
        let finite: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_finite()).collect();
        let model = RbfModel::fit(&finite.iter().map(|&i| unit[i].clone()).collect::<Vec<_>>(), &finite.iter().map(|&i| vals[i]).collect::<Vec<_>>())?;
        let best_i = argmin(&vals);
        let best = unit[best_i].clone();
        let mut cands = Vec::with_capacity(n_cand);
        for k in 0..n_cand {
            let c: Vec<f64> = if k % 2 == 0 {
                best.iter().map(|b| reflect(b + radius * rng.normal())).collect()
            } else {
                (0..dim).map(|_| rng.uniform()).collect()
            };
            cands.push(c);
        }
        let mut pred: Vec<f64> = cands.iter().map(|c| model.predict(c)).collect();
        let mut near: Vec<f64> = cands.iter().map(|c| unit.iter().map(|u| dist(u, c)).fold(f64::INFINITY, f64::min)).collect();
        let min_sep = 1e-6;
        let ok: Vec<bool> = near.iter().map(|&d| d > min_sep).collect();
        normalize(&mut pred);
        normalize(&mut near);
        let w = settings.weight_cycle[it % settings.weight_cycle.len()];
        let pick = (0..cands.len())
            .filter(|&k| ok[k])
            .min_by(|&a, &b| {
                let sa = w * pred[a] + (1.0 - w) * (1.0 - near[a]);
                let sb = w * pred[b] + (1.0 - w) * (1.0 - near[b]);
                sa.total_cmp(&sb)
            })
            .unwrap_or(0);
        let u = cands.swap_remove(pick);
        let x = bounds.to_space(&u);
        let v = f(&x)?;
        if v < vals[best_i] - 1e-3 * vals[best_i].abs() {
            wins += 1;
            fails = 0;
        } else {
            fails += 1;
            wins = 0;
        }
        if fails >= dim.max(3) {
            radius = (radius / 2.0).max(0.005);
            fails = 0;
        } else if wins >= 3 {
            radius = (radius * 2.0).min(0.2);
            wins = 0;
        }
        log.push(Trial { index: log.len(), phase: Phase::Surrogate, params: x, value: v });
        unit.push(u);
        vals.push(v);
    }
    let bi = argmin(&vals);
    if !vals[bi].is_finite() {
        return Err(Error::Degenerate("objective was not finite at any evaluated point".into()));
    }
    Ok(OptimizationResult { best: log[bi].params.clone(), best_value: vals[bi], log, warnings })
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b))).unwrap_or(0)
}

/// Folds a coordinate back into [0, 1].
fn reflect(x: f64) -> f64 {
    let y = x.rem_euclid(2.0);
    if y > 1.0 { 2.0 - y } else { y }
}
