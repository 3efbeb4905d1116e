//! Fitting model inputs from historical data.

mod behaviour;
mod bundle;
mod facts;
mod impact;
mod inputs;
mod pipeline;
mod surrogate;

pub use impact::{
    aggregate_windows, fit_impact_observations, fit_lambda_fixed_gamma, fit_nonlinear, ImpactFit, ImpactModel, ImpactObservation,
    SignedTrade, MIN_IMPACT_WINDOWS,
};
pub use behaviour::{
    calibrate_chiarella, simulated_distance, simulated_facts, CalibrationResult, CalibrationSettings, ChiarellaBounds, EvaluationRecord,
};
pub use bundle::{
    CalibrationBundle, CHIARELLA_FILE, EVALUATION_LOG_FILE, IMPACT_FILE, OPENING_BOOK_FILE, PLACEMENT_LIMIT_FILE, PLACEMENT_MARKET_FILE,
    PROXY_FILE, RATES_FILE, SESSION_FILE,
};
pub use facts::{
    autocorrelation, compute_stylized_facts, fact_components, facts_distance, rmse, wasserstein1, FactSettings, FactWeights,
    HistogramGrid, MarketSeries, StylizedFacts, FACT_NAMES, MIN_SERIES_SECONDS,
};
pub use inputs::{
    build_distributions, estimate_rates, estimate_rates_from, extract_fundamental_proxy, fit_impact, fit_impact_from,
    per_second_grid, FundamentalProxy, OccupancyReport, RateEstimate, IMPACT_WINDOW_NS,
};
pub use surrogate::{
    design_size, latin_hypercube, minimize, Bounds, OptimizationResult, Phase, RbfModel, SurrogateSettings, Trial,
};
pub use pipeline::{calibrate_day, opening_book, PipelineOutput, PipelineSettings};
