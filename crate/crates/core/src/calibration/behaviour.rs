//! Calibration of the hidden trader parameters against historical facts.

use serde::{Deserialize, Serialize};

use super::facts::{compute_stylized_facts, facts_distance, FactSettings, FactWeights, MarketSeries, StylizedFacts};
use super::surrogate::{minimize, Bounds, Phase, SurrogateSettings};
use crate::agents::ChiarellaParams;
use crate::error::{Error, Result};
use crate::lob::Step;
use crate::rng::SeedSet;
use crate::sim::{simulate, MarketModel, Recording};

/// Search box for `[kappa, beta_l, gamma_l, beta_h, gamma_h, sigma]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiarellaBounds {
    pub lo: [f64; 6],
    pub hi: [f64; 6],
}

impl Default for ChiarellaBounds {
    fn default() -> Self {
        ChiarellaBounds { lo: [0.005, 0.05, 1.0, 0.05, 0.5, 0.1], hi: [0.2, 2.0, 20.0, 2.0, 10.0, 3.0] }
    }
}

impl ChiarellaBounds {
    pub fn to_bounds(&self) -> Result<Bounds> {
        Bounds::new(self.lo.to_vec(), self.hi.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationSettings {
    pub budget: usize,
    /// Simulations averaged per parameter point; every point uses the same seeds.
    pub repeats: u64,
    pub master_seed: u64,
    /// Steps per simulation; one trading day when absent.
    pub steps: Option<Step>,
    pub weights: FactWeights,
    pub facts: FactSettings,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            budget: 0,
            repeats: 5,
            master_seed: 1,
            steps: None,
            weights: FactWeights::default(),
            facts: FactSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub trial: usize,
    pub phase: Phase,
    pub params: ChiarellaParams,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: ChiarellaParams,
    /// Minimum of the logged distances.
    pub distance: f64,
    pub log: Vec<EvaluationRecord>,
    pub warnings: Vec<String>,
    pub master_seed: u64,
    pub repeats: u64,
}

/// Facts of one simulated path of `model`.
pub fn simulated_facts(model: &MarketModel, seeds: &SeedSet, steps: Step, facts: &FactSettings) -> Result<StylizedFacts> {
    let rec = Recording { series: true, ..Default::default() };
    let path = simulate(model, seeds, steps, &rec, None)?;
    compute_stylized_facts(&MarketSeries::from_path(&path, &model.calendar)?, facts)
}

/// Distance between `target` and the model at `params`, averaged over
/// `settings.repeats` runs seeded `(master_seed, 0..repeats)`.
pub fn simulated_distance(target: &StylizedFacts, model: &MarketModel, params: &ChiarellaParams, settings: &CalibrationSettings) -> Result<f64> {
    if settings.repeats == 0 {
        return Err(Error::Config("at least one simulation per parameter point is required".into()));
    }
    let m = model.with_chiarella(*params);
    let steps = settings.steps.unwrap_or_else(|| model.calendar.steps_per_day());
    let mut total = 0.0;
    for r in 0..settings.repeats {
        let f = simulated_facts(&m, &SeedSet::new(settings.master_seed, r), steps, &settings.facts)?;
        total += facts_distance(target, &f, &settings.weights)?;
    }
    Ok(total / settings.repeats as f64)
}

/// Surrogate search over the six behavioural parameters, keeping the EWMA
/// weights of `model`'s current parameters.
pub fn calibrate_chiarella(
    target: &StylizedFacts,
    model: &MarketModel,
    bounds: &ChiarellaBounds,
    settings: &CalibrationSettings,
) -> Result<CalibrationResult> {
    let base = *model
        .chiarella_params()
        .ok_or_else(|| Error::Config("calibration needs a fundamental/momentum/noise trader model".into()))?;
    let surrogate = SurrogateSettings { budget: settings.budget, seed: settings.master_seed, ..Default::default() };
    let opt = minimize(|x| simulated_distance(target, model, &base.with_calibrated(x), settings), &bounds.to_bounds()?, &surrogate)?;
    for w in &opt.warnings {
        log::warn!("{w}");
    }
    let log = opt
        .log
        .iter()
        .map(|t| EvaluationRecord { trial: t.index, phase: t.phase, params: base.with_calibrated(&t.params), distance: t.value })
        .collect();
    Ok(CalibrationResult {
        params: base.with_calibrated(&opt.best),
        distance: opt.best_value,
        log,
        warnings: opt.warnings,
        master_seed: settings.master_seed,
        repeats: settings.repeats,
    })
}
