//! The calibration bundle: every fitted model input, persisted as a
//! directory of CSV files that downstream commands load and validate.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::behaviour::EvaluationRecord;
use super::impact::ImpactModel;
use super::surrogate::Phase;
use crate::agents::{BucketKey, ChiarellaParams, EmpiricalOrderDistribution, LimitTuple, Population, RateProfile};
use crate::error::{Error, Result};
use crate::lob::Side;
use crate::session::{parse_hhmm, SessionCalendar, TradingWindow};
use crate::sim::{BookLevel, FundamentalSpec, MarketModel, TraderSetup};
use crate::synthetic::SyntheticSpec;

pub const SESSION_FILE: &str = "session.csv";
pub const RATES_FILE: &str = "rates.csv";
pub const PLACEMENT_LIMIT_FILE: &str = "placement_limit.csv";
pub const PLACEMENT_MARKET_FILE: &str = "placement_market.csv";
pub const IMPACT_FILE: &str = "impact.csv";
pub const PROXY_FILE: &str = "fundamental_proxy.csv";
pub const CHIARELLA_FILE: &str = "chiarella.csv";
pub const EVALUATION_LOG_FILE: &str = "evaluation_log.csv";
pub const OPENING_BOOK_FILE: &str = "opening_book.csv";

const RATES_HEADER: &str = "minute,alpha,mu";
const LIMIT_HEADER: &str = "spread_bucket,time_bucket,depth,volume,duration";
const MARKET_HEADER: &str = "spread_bucket,time_bucket,volume";
const PROXY_HEADER: &str = "index,value";
const LOG_HEADER: &str = "trial,phase,kappa,beta_l,gamma_l,beta_h,gamma_h,sigma,distance";
const BOOK_HEADER: &str = "side,price,qty";
const KV_HEADER: &str = "key,value";

#[derive(Debug, Clone)]
pub struct CalibrationBundle {
    pub calendar: SessionCalendar,
    pub rates: RateProfile,
    pub placement: Arc<EmpiricalOrderDistribution>,
    pub impact: ImpactModel,
    pub impact_r_squared: Option<f64>,
    pub fundamental: FundamentalSpec,
    /// Fundamental-value proxy the volatility was estimated from.
    pub proxy: Vec<f64>,
    pub chiarella: ChiarellaParams,
    /// Achieved fact distance, when the parameters were calibrated.
    pub distance: Option<f64>,
    pub evaluation_log: Vec<EvaluationRecord>,
    pub population: Population,
    pub opening_book: Vec<BookLevel>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn hhmm(m: u32) -> String {
    format!("{:02}:{:02}", m / 60, m % 60)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Rows of a CSV artifact after checking its header.
fn read_table(dir: &Path, name: &str, header: &str) -> Result<Vec<csv::StringRecord>> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(Error::MissingArtifact(name.into()));
    }
    let csv_err = |e: csv::Error| Error::Csv { path: path.clone(), message: e.to_string() };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(&path).map_err(csv_err)?;
    let found = rdr.headers().map_err(csv_err)?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::Schema { path: path.clone(), expected: header.into(), found });
    }
    rdr.records().collect::<std::result::Result<Vec<_>, _>>().map_err(csv_err)
}

struct Fields<'a> {
    path: PathBuf,
    row: &'a csv::StringRecord,
}

impl Fields<'_> {
    fn get<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        let raw = self.row.get(i).unwrap_or("");
        raw.parse().map_err(|_| Error::Csv { path: self.path.clone(), message: format!("invalid value `{raw}` in row {:?}", self.row) })
    }
}

fn rows<'a>(dir: &Path, name: &str, recs: &'a [csv::StringRecord]) -> impl Iterator<Item = Fields<'a>> {
    let path = dir.join(name);
    recs.iter().map(move |row| Fields { path: path.clone(), row })
}

struct KeyValues {
    name: &'static str,
    path: PathBuf,
    map: BTreeMap<String, String>,
}

impl KeyValues {
    fn load(dir: &Path, name: &'static str) -> Result<Self> {
        let map = read_table(dir, name, KV_HEADER)?.iter().map(|r| (r[0].to_string(), r.get(1).unwrap_or("").to_string())).collect();
        Ok(KeyValues { name, path: dir.join(name), map })
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.map.get(key).map(String::as_str).ok_or_else(|| Error::MissingArtifact(format!("{}: {key}", self.name)))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key)?;
        raw.parse().map_err(|_| Error::Csv { path: self.path.clone(), message: format!("invalid {key} `{raw}`") })
    }

    fn opt(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key)? {
            "" => Ok(None),
            _ => self.get(key).map(Some),
        }
    }
}

fn write_kv(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut w = create(path)?;
    let go = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{KV_HEADER}")?;
        for (k, v) in pairs {
            writeln!(w, "{k},{v}")?;
        }
        w.flush()
    };
    go(&mut w).map_err(|e| Error::io(path, e))
}

fn write_rows(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    let go = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for l in lines {
            writeln!(w, "{l}")?;
        }
        w.flush()
    };
    go(&mut w).map_err(|e| Error::io(path, e))
}

fn phase_str(p: Phase) -> &'static str {
    match p {
        Phase::Design => "design",
        Phase::Surrogate => "surrogate",
    }
}

impl CalibrationBundle {
    /// Bundle of the synthetic reference market.
    pub fn from_synthetic(spec: &SyntheticSpec) -> Result<Self> {
        let calendar = spec.calendar()?;
        Ok(CalibrationBundle {
            rates: spec.rates(&calendar),
            placement: Arc::new(spec.placement(&calendar)?),
            impact: spec.impact,
            impact_r_squared: None,
            fundamental: FundamentalSpec { initial: None, drift: 0.0, volatility: spec.sigma_v },
            proxy: Vec::new(),
            chiarella: spec.chiarella,
            distance: None,
            evaluation_log: Vec::new(),
            population: spec.population,
            opening_book: spec.opening_book(),
            calendar,
        })
    }

    pub fn to_model(&self) -> Result<MarketModel> {
        let model = MarketModel {
            calendar: self.calendar.clone(),
            rates: self.rates.clone(),
            placement: Some(self.placement.clone()),
            impact: self.impact,
            fundamental: self.fundamental,
            traders: TraderSetup::Chiarella { params: self.chiarella, population: self.population },
            opening_book: self.opening_book.clone(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let windows: Vec<String> = self.calendar.windows().iter().map(|w| w.to_string()).collect();
        write_kv(
            &dir.join(SESSION_FILE),
            &[
                ("windows", windows.join(";")),
                ("step_ms", self.calendar.step_ms().to_string()),
                ("bucket_minutes", self.placement.bucket_minutes().to_string()),
                ("open_minute", self.placement.open_minute().to_string()),
                ("fundamental", self.population.fundamental.to_string()),
                ("momentum_hf", self.population.momentum_hf.to_string()),
                ("momentum_lf", self.population.momentum_lf.to_string()),
                ("noise", self.population.noise.to_string()),
            ],
        )?;
        write_rows(
            &dir.join(RATES_FILE),
            RATES_HEADER,
            self.calendar.minutes().map(|m| format!("{},{},{}", hhmm(m), self.rates.alpha(m), self.rates.mu(m))),
        )?;
        write_rows(
            &dir.join(PLACEMENT_LIMIT_FILE),
            LIMIT_HEADER,
            self.placement
                .limit_records()
                .iter()
                .map(|(k, t)| format!("{},{},{},{},{}", k.spread_bucket, k.time_bucket, t.depth, t.volume, t.duration)),
        )?;
        write_rows(
            &dir.join(PLACEMENT_MARKET_FILE),
            MARKET_HEADER,
            self.placement.market_records().iter().map(|(k, q)| format!("{},{},{}", k.spread_bucket, k.time_bucket, q)),
        )?;
        write_kv(
            &dir.join(IMPACT_FILE),
            &[
                ("lambda_mi", self.impact.lambda.to_string()),
                ("gamma_mi", self.impact.gamma.to_string()),
                ("r_squared", fmt_opt(self.impact_r_squared)),
                ("sigma_v", self.fundamental.volatility.to_string()),
                ("drift", self.fundamental.drift.to_string()),
            ],
        )?;
        write_rows(&dir.join(PROXY_FILE), PROXY_HEADER, self.proxy.iter().enumerate().map(|(i, v)| format!("{i},{v}")))?;
        let c = &self.chiarella;
        write_kv(
            &dir.join(CHIARELLA_FILE),
            &[
                ("kappa", c.kappa.to_string()),
                ("beta_l", c.beta_l.to_string()),
                ("gamma_l", c.gamma_l.to_string()),
                ("eta_l", c.eta_l.to_string()),
                ("beta_h", c.beta_h.to_string()),
                ("gamma_h", c.gamma_h.to_string()),
                ("eta_h", c.eta_h.to_string()),
                ("sigma", c.sigma.to_string()),
                ("distance", fmt_opt(self.distance)),
            ],
        )?;
        write_rows(
            &dir.join(EVALUATION_LOG_FILE),
            LOG_HEADER,
            self.evaluation_log.iter().map(|r| {
                let v = r.params.calibrated_vector();
                format!("{},{},{},{},{},{},{},{},{}", r.trial, phase_str(r.phase), v[0], v[1], v[2], v[3], v[4], v[5], r.distance)
            }),
        )?;
        write_rows(
            &dir.join(OPENING_BOOK_FILE),
            BOOK_HEADER,
            self.opening_book.iter().map(|l| format!("{},{},{}", l.side, l.price, l.quantity)),
        )
    }

    /// Loads and validates a bundle; a missing file or key is reported by name.
    pub fn load(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::MissingArtifact(format!("calibration bundle directory {}", dir.display())));
        }
        let session = KeyValues::load(dir, SESSION_FILE)?;
        let windows = session
            .raw("windows")?
            .split(';')
            .map(|w| w.parse::<TradingWindow>())
            .collect::<Result<Vec<_>>>()?;
        let calendar = SessionCalendar::new(windows, session.get("step_ms")?)?;
        let population = Population {
            fundamental: session.get("fundamental")?,
            momentum_hf: session.get("momentum_hf")?,
            momentum_lf: session.get("momentum_lf")?,
            noise: session.get("noise")?,
        };

        let mut rates = RateProfile::new(calendar.steps_per_minute());
        let recs = read_table(dir, RATES_FILE, RATES_HEADER)?;
        for f in rows(dir, RATES_FILE, &recs) {
            let raw: String = f.get(0)?;
            let minute = parse_hhmm(&raw).ok_or_else(|| Error::Csv { path: f.path.clone(), message: format!("invalid minute `{raw}`") })?;
            rates.set_per_step(minute, f.get(1)?, f.get(2)?);
        }
        if !rates.covers(&calendar) {
            return Err(Error::Insufficient(format!("{RATES_FILE} has no non-zero rate inside the session")));
        }

        let recs = read_table(dir, PLACEMENT_LIMIT_FILE, LIMIT_HEADER)?;
        let limit = rows(dir, PLACEMENT_LIMIT_FILE, &recs)
            .map(|f| {
                Ok((
                    BucketKey { spread_bucket: f.get(0)?, time_bucket: f.get(1)? },
                    LimitTuple { depth: f.get(2)?, volume: f.get(3)?, duration: f.get(4)? },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let recs = read_table(dir, PLACEMENT_MARKET_FILE, MARKET_HEADER)?;
        let market = rows(dir, PLACEMENT_MARKET_FILE, &recs)
            .map(|f| Ok((BucketKey { spread_bucket: f.get(0)?, time_bucket: f.get(1)? }, f.get(2)?)))
            .collect::<Result<Vec<_>>>()?;
        let placement = EmpiricalOrderDistribution::from_buckets(session.get("open_minute")?, session.get("bucket_minutes")?, limit, market)?;

        let impact_kv = KeyValues::load(dir, IMPACT_FILE)?;
        let impact = ImpactModel::new(impact_kv.get("lambda_mi")?, impact_kv.get("gamma_mi")?);
        let fundamental = FundamentalSpec { initial: None, drift: impact_kv.get("drift")?, volatility: impact_kv.get("sigma_v")? };
        let recs = read_table(dir, PROXY_FILE, PROXY_HEADER)?;
        let proxy = rows(dir, PROXY_FILE, &recs).map(|f| f.get(1)).collect::<Result<Vec<f64>>>()?;

        let ch = KeyValues::load(dir, CHIARELLA_FILE)?;
        let chiarella = ChiarellaParams {
            kappa: ch.get("kappa")?,
            beta_h: ch.get("beta_h")?,
            gamma_h: ch.get("gamma_h")?,
            eta_h: ch.get("eta_h")?,
            beta_l: ch.get("beta_l")?,
            gamma_l: ch.get("gamma_l")?,
            eta_l: ch.get("eta_l")?,
            sigma: ch.get("sigma")?,
        };
        let recs = read_table(dir, EVALUATION_LOG_FILE, LOG_HEADER)?;
        let evaluation_log = rows(dir, EVALUATION_LOG_FILE, &recs)
            .map(|f| {
                let phase = match f.row.get(1) {
                    Some("design") => Phase::Design,
                    Some("surrogate") => Phase::Surrogate,
                    other => {
                        return Err(Error::Csv { path: f.path.clone(), message: format!("unknown phase {other:?}") });
                    }
                };
                let v = [f.get(2)?, f.get(3)?, f.get(4)?, f.get(5)?, f.get(6)?, f.get(7)?];
                Ok(EvaluationRecord { trial: f.get(0)?, phase, params: chiarella.with_calibrated(&v), distance: f.get(8)? })
            })
            .collect::<Result<Vec<_>>>()?;

        let recs = read_table(dir, OPENING_BOOK_FILE, BOOK_HEADER)?;
        let opening_book = rows(dir, OPENING_BOOK_FILE, &recs)
            .map(|f| {
                let raw: String = f.get(0)?;
                let side = Side::parse(&raw).ok_or_else(|| Error::Csv { path: f.path.clone(), message: format!("unknown side `{raw}`") })?;
                Ok(BookLevel { side, price: f.get(1)?, quantity: f.get(2)? })
            })
            .collect::<Result<Vec<_>>>()?;

        let bundle = CalibrationBundle {
            calendar,
            rates,
            placement: Arc::new(placement),
            impact,
            impact_r_squared: impact_kv.opt("r_squared")?,
            fundamental,
            proxy,
            chiarella,
            distance: ch.opt("distance")?,
            evaluation_log,
            population,
            opening_book,
        };
        bundle.impact.validate()?;
        bundle.to_model()?;
        Ok(bundle)
    }
}
