//! Aggregate single-trade impact `f(Q) = lambda * Q^gamma`, fitted on
//! per-window signed volume imbalance against mid-price change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::Side;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactModel {
    pub lambda: f64,
    pub gamma: f64,
}

impl ImpactModel {
    pub fn new(lambda: f64, gamma: f64) -> Self {
        ImpactModel { lambda, gamma }
    }

    /// Impact of an unsigned volume.
    #[inline]
    pub fn magnitude(&self, q: f64) -> f64 {
        if q <= 0.0 {
            0.0
        } else {
            self.lambda * q.powf(self.gamma)
        }
    }

    /// `sign(q) * f(|q|)`.
    #[inline]
    pub fn signed(&self, q: f64) -> f64 {
        if q == 0.0 {
            0.0
        } else {
            q.signum() * self.magnitude(q.abs())
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) || !(self.gamma > 0.0 && self.gamma < 1.5) {
            return Err(Error::Config(format!(
                "impact model out of range: lambda {} gamma {}",
                self.lambda, self.gamma
            )));
        }
        Ok(())
    }
}

/// One aggregation window: signed imbalance and mid change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactObservation {
    pub imbalance: f64,
    pub mid_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactFit {
    /// Preferred estimate: the log-log fit when available, otherwise the
    /// nonlinear fit.
    pub model: ImpactModel,
    pub loglog: Option<(ImpactModel, f64)>,
    pub nonlinear: (ImpactModel, f64),
    /// Windows used by the log-log fit and in total.
    pub loglog_windows: usize,
    pub windows: usize,
}

pub const MIN_IMPACT_WINDOWS: usize = 100;
const MIN_LOGLOG_WINDOWS: usize = 10;

/// A timestamped trade used for impact aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedTrade {
    pub time_ns: u64,
    pub quantity: f64,
    pub side: Side,
}

/// Aggregates trades into fixed windows. `mid_at(t)` must return the mid
/// prevailing at time `t`. Windows without trades are dropped.
pub fn aggregate_windows(
    trades: &[SignedTrade],
    window_ns: u64,
    mut mid_at: impl FnMut(u64) -> Option<f64>,
) -> Vec<ImpactObservation> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < trades.len() {
        let w = trades[i].time_ns / window_ns;
        let mut q = 0.0;
        while i < trades.len() && trades[i].time_ns / window_ns == w {
            q += trades[i].side.sign() as f64 * trades[i].quantity;
            i += 1;
        }
        let start = w * window_ns;
        if let (Some(a), Some(b)) = (mid_at(start), mid_at(start + window_ns)) {
            out.push(ImpactObservation { imbalance: q, mid_change: b - a });
        }
    }
    out
}

fn r_squared(y: &[f64], fitted: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted).map(|(v, f)| (v - f).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Least-squares `lambda` for a fixed exponent (regression through the origin).
pub fn fit_lambda_fixed_gamma(obs: &[ImpactObservation], gamma: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for o in obs {
        if o.imbalance == 0.0 {
            continue;
        }
        let x = o.imbalance.signum() * o.imbalance.abs().powf(gamma);
        num += x * o.mid_change;
        den += x * x;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn nonlinear_sse(obs: &[ImpactObservation], gamma: f64) -> (f64, f64) {
    let lambda = fit_lambda_fixed_gamma(obs, gamma);
    let m = ImpactModel::new(lambda, gamma);
    let sse = obs.iter().map(|o| (o.mid_change - m.signed(o.imbalance)).powi(2)).sum();
    (sse, lambda)
}

/// Direct nonlinear least squares: profile out `lambda`, golden-section
/// search on `gamma` in (0, 1.5) after a coarse scan.
pub fn fit_nonlinear(obs: &[ImpactObservation]) -> ImpactModel {
    let lo = 0.01;
    let hi = 1.49;
    let grid = 60;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=grid {
        let g = lo + (hi - lo) * k as f64 / grid as f64;
        let (sse, _) = nonlinear_sse(obs, g);
        if sse < best.0 {
            best = (sse, g);
        }
    }
    let step = (hi - lo) / grid as f64;
    let (mut a, mut b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (nonlinear_sse(obs, c).0, nonlinear_sse(obs, d).0);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = nonlinear_sse(obs, c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = nonlinear_sse(obs, d).0;
        }
    }
    let gamma = (a + b) / 2.0;
    ImpactModel::new(nonlinear_sse(obs, gamma).1, gamma)
}

/// Fits `f(Q) = lambda |Q|^gamma` to per-window observations.
///
/// The primary estimate is ordinary least squares on
/// `(ln|Q|, ln(sign(Q) dp))` over sign-consistent windows. All windows with
/// non-zero imbalance enter the nonlinear fallback.
pub fn fit_impact_observations(obs: &[ImpactObservation]) -> Result<ImpactFit> {
    let nonzero: Vec<ImpactObservation> = obs.iter().copied().filter(|o| o.imbalance != 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::Degenerate("all aggregation windows have zero excess demand".into()));
    }
    if nonzero.len() < MIN_IMPACT_WINDOWS {
        return Err(Error::Insufficient(format!(
            "{} windows with non-zero excess demand, need at least {MIN_IMPACT_WINDOWS}",
            nonzero.len()
        )));
    }

    let consistent: Vec<(f64, f64)> = nonzero
        .iter()
        .filter(|o| o.imbalance.signum() * o.mid_change > 0.0)
        .map(|o| (o.imbalance.abs().ln(), (o.imbalance.signum() * o.mid_change).ln()))
        .collect();

    let loglog = if consistent.len() >= MIN_LOGLOG_WINDOWS {
        let n = consistent.len() as f64;
        let mx = consistent.iter().map(|p| p.0).sum::<f64>() / n;
        let my = consistent.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = consistent.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = consistent.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let gamma = sxy / sxx;
            let intercept = my - gamma * mx;
            let ys: Vec<f64> = consistent.iter().map(|p| p.1).collect();
            let fitted: Vec<f64> = consistent.iter().map(|p| intercept + gamma * p.0).collect();
            Some((ImpactModel::new(intercept.exp(), gamma), r_squared(&ys, &fitted)))
        } else {
            None
        }
    } else {
        None
    };

    let nl = fit_nonlinear(&nonzero);
    let ys: Vec<f64> = nonzero.iter().map(|o| o.mid_change).collect();
    let fitted: Vec<f64> = nonzero.iter().map(|o| nl.signed(o.imbalance)).collect();
    let nonlinear = (nl, r_squared(&ys, &fitted));

    let model = match loglog {
        Some((m, _)) if m.gamma > 0.0 && m.gamma < 1.5 => m,
        _ => nl,
    };
    Ok(ImpactFit { model, loglog, nonlinear, loglog_windows: consistent.len(), windows: nonzero.len() })
}
