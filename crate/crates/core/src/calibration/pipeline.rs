//! End-to-end calibration of one reconstructed trading day.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::behaviour::{calibrate_chiarella, CalibrationResult, CalibrationSettings, ChiarellaBounds};
use super::bundle::CalibrationBundle;
use super::facts::{compute_stylized_facts, MarketSeries, StylizedFacts};
use super::impact::ImpactFit;
use super::inputs::{build_distributions, estimate_rates_from, extract_fundamental_proxy, fit_impact_from, per_second_grid, OccupancyReport, RateEstimate};
use crate::agents::{ChiarellaParams, Population, DEFAULT_BUCKET_MINUTES};
use crate::error::{Error, Result};
use crate::lob::Side;
use crate::market_data::Reconstruction;
use crate::session::SessionCalendar;
use crate::sim::{BookLevel, FundamentalSpec, MarketModel, TraderSetup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSettings {
    pub bucket_minutes: u32,
    pub population: Population,
    /// Starting point; its EWMA weights are kept fixed.
    pub chiarella: ChiarellaParams,
    pub bounds: ChiarellaBounds,
    pub calibration: CalibrationSettings,
}

impl PipelineSettings {
    pub fn new(chiarella: ChiarellaParams) -> Self {
        PipelineSettings {
            bucket_minutes: DEFAULT_BUCKET_MINUTES,
            population: Population::default(),
            chiarella,
            bounds: ChiarellaBounds::default(),
            calibration: CalibrationSettings::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub bundle: CalibrationBundle,
    pub rates: RateEstimate,
    pub occupancy: OccupancyReport,
    pub impact_fit: ImpactFit,
    pub target_facts: StylizedFacts,
    pub behaviour: CalibrationResult,
}

/// Price levels of the first two-sided book of the day.
pub fn opening_book(rec: &Reconstruction) -> Result<Vec<BookLevel>> {
    let snap = rec
        .l2
        .iter()
        .map(|r| &r.snapshot)
        .find(|s| s.is_two_sided())
        .ok_or_else(|| Error::Insufficient("the book never has quotes on both sides".into()))?;
    let mut levels: Vec<BookLevel> = snap.bids.iter().map(|&(price, quantity)| BookLevel { side: Side::Buy, price, quantity }).collect();
    levels.extend(snap.asks.iter().map(|&(price, quantity)| BookLevel { side: Side::Sell, price, quantity }));
    Ok(levels)
}

/// Estimates every model input from `rec` and calibrates the trader
/// parameters against the day's stylized facts.
pub fn calibrate_day(rec: &Reconstruction, calendar: &SessionCalendar, settings: &PipelineSettings) -> Result<PipelineOutput> {
    let rates = estimate_rates_from(rec, calendar)?;
    let (placement, occupancy) = build_distributions(&rec.limit_orders, &rec.market_orders, calendar, settings.bucket_minutes)?;
    let impact_fit = fit_impact_from(rec)?;
    let (mids, q) = per_second_grid(rec);
    let proxy = extract_fundamental_proxy(&mids, &q, &impact_fit.model)?;
    // the proxy lives on a one-second grid; the simulator needs a per-step volatility
    let sigma_step = proxy.sigma / calendar.steps_per_second().sqrt();
    let target_facts = compute_stylized_facts(&MarketSeries::from_reconstruction(rec, calendar)?, &settings.calibration.facts)?;
    let model = MarketModel {
        calendar: calendar.clone(),
        rates: rates.profile.clone(),
        placement: Some(Arc::new(placement)),
        impact: impact_fit.model,
        fundamental: FundamentalSpec { initial: None, drift: 0.0, volatility: sigma_step },
        traders: TraderSetup::Chiarella { params: settings.chiarella, population: settings.population },
        opening_book: opening_book(rec)?,
    };
    model.validate()?;
    let behaviour = calibrate_chiarella(&target_facts, &model, &settings.bounds, &settings.calibration)?;
    let bundle = CalibrationBundle {
        calendar: calendar.clone(),
        rates: rates.profile.clone(),
        placement: model.placement.clone().expect("placement set above"),
        impact: impact_fit.model,
        impact_r_squared: Some(impact_fit.loglog.map_or(impact_fit.nonlinear.1, |l| l.1)),
        fundamental: model.fundamental,
        proxy: proxy.values,
        chiarella: behaviour.params,
        distance: Some(behaviour.distance),
        evaluation_log: behaviour.log.clone(),
        population: settings.population,
        opening_book: model.opening_book,
    };
    Ok(PipelineOutput { bundle, rates, occupancy, impact_fit, target_facts, behaviour })
}
