use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use liqsim::calibration::{CalibrationSettings, ChiarellaBounds, FactWeights};
use liqsim::execution::{build_daily_schedule, build_uniform_schedule, ExecutionSchedule, MetaOrder};
use liqsim::lob::{Side, Step};
use liqsim::session::SessionCalendar;
use liqsim::sim::MarketModel;
use liqsim::synthetic::SyntheticSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub session: SessionConfig,
    pub data: DataConfig,
    pub market: MarketConfig,
    pub calibration: CalibrationConfig,
    pub simulate: SimulateConfig,
    pub strategies: Vec<StrategyConfig>,
    pub impact: ImpactConfig,
    pub surface: SurfaceConfig,
    pub frontier: FrontierConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 42,
            threads: None,
            output_dir: "out".into(),
            session: SessionConfig::default(),
            data: DataConfig::default(),
            market: MarketConfig::default(),
            calibration: CalibrationConfig::default(),
            simulate: SimulateConfig::default(),
            strategies: Vec::new(),
            impact: ImpactConfig::default(),
            surface: SurfaceConfig::default(),
            frontier: FrontierConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub windows: Vec<String>,
    pub step_ms: u32,
    /// Price units per tick.
    pub tick_size: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { windows: vec!["09:15-16:30".into()], step_ms: 20, tick_size: 1.0 }
    }
}

impl SessionConfig {
    pub fn calendar(&self) -> Result<SessionCalendar> {
        let w: Vec<&str> = self.windows.iter().map(String::as_str).collect();
        Ok(SessionCalendar::parse(&w, self.step_ms)?)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub orders: Option<PathBuf>,
    pub trades: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    /// Calibration bundle directory; the synthetic market is used when absent.
    pub bundle: Option<PathBuf>,
    /// Trading windows and step length are taken from the session section.
    pub synthetic: SyntheticSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub bucket_minutes: u32,
    pub budget: usize,
    pub repeats: u64,
    /// Steps per calibration simulation; one session when absent.
    pub sim_steps: Option<Step>,
    pub bounds: ChiarellaBounds,
    pub weights: FactWeights,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let c = CalibrationSettings::default();
        CalibrationConfig {
            bucket_minutes: liqsim::agents::DEFAULT_BUCKET_MINUTES,
            budget: c.budget,
            repeats: c.repeats,
            sim_steps: c.steps,
            bounds: ChiarellaBounds::default(),
            weights: c.weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub days: u64,
    /// Strategy run as a paired experiment alongside the baseline.
    pub strategy: Option<String>,
    /// Write the mid/spread path every this many steps.
    pub sample_every: Step,
    pub event_log: bool,
    /// Write the day's order and trade streams in the ingest format.
    pub export_ticks: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { days: 1, strategy: None, sample_every: 50, event_log: false, export_ticks: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Uniform,
    DailyVwap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: StrategyKind,
    pub side: String,
    pub quantity: u64,
    /// Seconds after the first open.
    #[serde(default)]
    pub start_s: f64,
    #[serde(default)]
    pub horizon_s: f64,
    /// Uniform: seconds between child orders.
    #[serde(default = "default_interval")]
    pub interval_s: f64,
    /// Daily VWAP: share of the quantity traded on each day.
    #[serde(default)]
    pub fractions: Vec<f64>,
    /// Daily VWAP: bin length in seconds.
    #[serde(default = "default_vwap_bin")]
    pub vwap_bin_s: f64,
}

fn default_interval() -> f64 {
    10.0
}

fn default_vwap_bin() -> f64 {
    5.0
}

pub fn seconds_to_steps(seconds: f64, calendar: &SessionCalendar) -> Result<Step> {
    if !(seconds >= 0.0) || !seconds.is_finite() {
        bail!("time {seconds} s must be non-negative");
    }
    Ok((seconds * calendar.steps_per_second()).round() as Step)
}

pub fn parse_side(s: &str) -> Result<Side> {
    Side::parse(s).with_context(|| format!("unknown side `{s}`, expected buy or sell"))
}

impl StrategyConfig {
    pub fn schedule(&self, model: &MarketModel) -> Result<ExecutionSchedule> {
        let cal = &model.calendar;
        let meta = MetaOrder {
            side: parse_side(&self.side)?,
            quantity: self.quantity,
            start_step: seconds_to_steps(self.start_s, cal)?,
            horizon: seconds_to_steps(self.horizon_s, cal)?,
            strategy_id: self.id.clone(),
        };
        let s = match self.kind {
            StrategyKind::Uniform => build_uniform_schedule(&meta, seconds_to_steps(self.interval_s, cal)?.max(1))?,
            StrategyKind::DailyVwap => {
                let meta = MetaOrder { horizon: meta.horizon.max(1), ..meta };
                build_daily_schedule(&meta, &self.fractions, &model.rates, cal, seconds_to_steps(self.vwap_bin_s, cal)?.max(1))?
            }
        };
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpactConfig {
    /// Strategy ids; every configured strategy when empty.
    pub strategies: Vec<String>,
    pub n_runs: usize,
    /// Seconds simulated after the end of each horizon.
    pub tail_s: f64,
}

impl Default for ImpactConfig {
    fn default() -> Self {
        ImpactConfig { strategies: Vec::new(), n_runs: 50, tail_s: 300.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BloombergConfig {
    /// Daily volatility in price units.
    pub sigma_daily: f64,
    pub adv: f64,
    /// Bid-ask spread in price units.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub horizons_s: Vec<f64>,
    pub sizes: Vec<u64>,
    pub side: String,
    pub interval_s: f64,
    pub start_s: f64,
    pub tail_s: f64,
    pub n_runs: usize,
    pub bloomberg: Option<BloombergConfig>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            horizons_s: vec![60.0, 120.0],
            sizes: vec![100, 400],
            side: "sell".into(),
            interval_s: 1.0,
            start_s: 30.0,
            tail_s: 0.0,
            n_runs: 50,
            bloomberg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierConfig {
    pub strategies: Vec<String>,
    pub n_runs: usize,
    pub lambdas: Vec<f64>,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        FrontierConfig { strategies: Vec::new(), n_runs: 50, lambdas: vec![0.0, 0.001, 0.01, 0.1, 1.0] }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let text = std::str::from_utf8(&bytes).with_context(|| format!("config {} is not UTF-8", path.display()))?;
        let cfg: RunConfig = toml::from_str(text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.validate()?;
        Ok((cfg, bytes))
    }

    pub fn validate(&self) -> Result<()> {
        self.session.calendar()?;
        if !(self.session.tick_size > 0.0) {
            bail!("session.tick_size must be positive");
        }
        let mut ids: Vec<&str> = self.strategies.iter().map(|s| s.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            bail!("strategy ids must be unique");
        }
        Ok(())
    }

    pub fn calibration_settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            budget: self.calibration.budget,
            repeats: self.calibration.repeats,
            master_seed: self.master_seed,
            steps: self.calibration.sim_steps,
            weights: self.calibration.weights,
            ..Default::default()
        }
    }

    pub fn strategy(&self, id: &str) -> Result<&StrategyConfig> {
        self.strategies.iter().find(|s| s.id == id).with_context(|| format!("no strategy with id `{id}`"))
    }

    /// The named strategies, or all of them when `ids` is empty.
    pub fn select(&self, ids: &[String]) -> Result<Vec<&StrategyConfig>> {
        if ids.is_empty() {
            if self.strategies.is_empty() {
                bail!("no strategies configured");
            }
            return Ok(self.strategies.iter().collect());
        }
        ids.iter().map(|id| self.strategy(id)).collect()
    }
}

pub const EXAMPLE: &str = r#"# liqsim run configuration. Every key is optional; the values shown are
# the defaults unless marked "example".

master_seed = 42            # all randomness derives from this seed
# threads = 4               # worker cap (all cores when absent)
output_dir = "out"

[session]
windows = ["09:15-16:30"]   # continuous trading windows, HH:MM-HH:MM, ordered
step_ms = 20                # simulation step; must divide one minute
tick_size = 1.0             # price units per tick

[data]                      # historical tick files for `ingest` and `calibrate`
# orders = "orders.csv"     # timestamp_ns,order_id,action,side,price,qty
# trades = "trades.csv"     # timestamp_ns,price,qty

[market]
# bundle = "out/bundle"     # calibration bundle; the synthetic market below is used when absent

[market.synthetic]          # desk-scale synthetic market; its session is [session]
open_price = 19000
limit_rate = 0.3            # per-step limit-order probability at mid-session
market_rate = 0.08          # per-step market-order probability at mid-session
rate_smile = 0.5            # extra intensity at the open and close
depth_decay = 0.7
max_depth = 10
max_limit_volume = 10
max_market_volume = 6
mean_duration = 300.0       # mean limit-order lifetime in steps
historical_records = 20000
opening_levels = 10
opening_quantity = 20
sigma_v = 0.15              # fundamental volatility per step, ticks
seed = 7

[market.synthetic.chiarella]
kappa = 0.03
beta_h = 0.5
gamma_h = 2.0
eta_h = 0.98
beta_l = 0.5
gamma_l = 5.0
eta_l = 0.02
sigma = 1.0

[market.synthetic.population]
fundamental = 1
momentum_hf = 1
momentum_lf = 1
noise = 1

[market.synthetic.impact]
lambda = 0.005
gamma = 0.5

[calibration]
bucket_minutes = 30         # time-of-day bucket width for placement resampling
budget = 0                  # surrogate evaluations; 0 = design only (warns)
repeats = 5                 # simulations averaged per parameter point
# sim_steps = 30000         # steps per calibration run (one session when absent)

[calibration.bounds]        # kappa, beta_l, gamma_l, beta_h, gamma_h, sigma
lo = [0.005, 0.05, 1.0, 0.05, 0.5, 0.1]
hi = [0.2, 2.0, 20.0, 2.0, 10.0, 3.0]

[calibration.weights]
limit_rate = 0.1
market_rate = 0.1
spread = 1.0
returns_1s = 1.0
abs_returns_1s = 1.0
returns_60s = 0.25
abs_returns_60s = 0.25
acf_returns_1s = 1.0
acf_abs_returns_1s = 1.0
acf_returns_60s = 1.0
acf_abs_returns_60s = 1.0
acf_signs = 1.0

[simulate]
days = 1
# strategy = "A"            # run this strategy as a paired experiment
sample_every = 50           # steps between rows of path.csv
event_log = false
export_ticks = false        # write orders.csv/trades.csv in the ingest format

[[strategies]]              # example
id = "A"
type = "uniform"            # uniform | daily_vwap
side = "sell"
quantity = 600
start_s = 30.0
horizon_s = 120.0
interval_s = 1.0

[[strategies]]              # example
id = "B"
type = "uniform"
side = "sell"
quantity = 600
start_s = 30.0
horizon_s = 240.0
interval_s = 1.0

# [[strategies]]            # example multi-day VWAP
# id = "D"
# type = "daily_vwap"
# side = "sell"
# quantity = 10000
# fractions = [0.7, 0.2, 0.05, 0.03, 0.02]
# vwap_bin_s = 5.0

[impact]
strategies = []             # all strategies when empty
n_runs = 50
tail_s = 300.0              # simulated after each horizon

[surface]
horizons_s = [60.0, 120.0]
sizes = [100, 400]
side = "sell"
interval_s = 1.0
start_s = 30.0
tail_s = 0.0
n_runs = 50
# [surface.bloomberg]       # adds the bloomberg_tc_bps column
# sigma_daily = 432.7       # price units
# adv = 100000
# spread = 2.0              # price units

[frontier]
strategies = []
n_runs = 50
lambdas = [0.0, 0.001, 0.01, 0.1, 1.0]
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_parses_and_matches_defaults() {
        let cfg: RunConfig = toml::from_str(EXAMPLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.market.synthetic, SyntheticSpec::default());
        assert_eq!(cfg.calibration, CalibrationConfig::default());
        assert_eq!(cfg.simulate, SimulateConfig::default());
        assert_eq!(cfg.impact, ImpactConfig::default());
        assert_eq!(cfg.surface, SurfaceConfig::default());
        assert_eq!(cfg.frontier, FrontierConfig::default());
        assert_eq!(cfg.session, SessionConfig::default());
        assert_eq!(cfg.strategies.len(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("master_sed = 1").is_err());
    }
}
