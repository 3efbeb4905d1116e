//! Zero-intelligence baseline traders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::{round_to_tick, Price, Qty, Side, Step};
use crate::rng::DrawStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZiParams {
    /// Per-step limit-order probability.
    pub alpha: f64,
    /// Per-step market-order probability.
    pub mu: f64,
    /// Per-step cancel probability; durations are exponential with mean `1 / delta`.
    pub delta: f64,
    /// Rate of the exponential depth distribution, per tick.
    pub lambda: f64,
    /// Fixed size of every ZI order.
    pub order_size: Qty,
}

impl ZiParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("alpha", self.alpha), ("mu", self.mu)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("zi {name} must be a probability, got {p}")));
            }
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!("zi delta must lie in (0, 1], got {}", self.delta)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("zi lambda must be positive, got {}", self.lambda)));
        }
        if self.order_size == 0 {
            return Err(Error::Config("zi order size must be positive".into()));
        }
        Ok(())
    }
}

/// How ZI orders leave the book when unfilled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZiCancelMode {
    /// Each limit order carries an exponential lifetime.
    #[default]
    Duration,
    /// Each resting order is cancelled with probability `delta` every step.
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZiIntent {
    Limit {
        side: Side,
        price: Price,
        quantity: Qty,
        /// Lifetime in steps, absent under per-step cancellation.
        duration: Option<Step>,
        /// Unrounded distance from the mid.
        depth: f64,
    },
    Market {
        side: Side,
        quantity: Qty,
    },
}

/// One ZI decision. The limit and market Bernoulli draws are always taken;
/// a limit intent then draws side, depth and (in duration mode) lifetime,
/// a market intent draws its side.
pub fn zi_step(mid: f64, params: &ZiParams, mode: ZiCancelMode, rng: &mut DrawStream) -> (Option<ZiIntent>, Option<ZiIntent>) {
    let want_limit = rng.bernoulli(params.alpha);
    let want_market = rng.bernoulli(params.mu);
    let limit = want_limit.then(|| {
        let side = if rng.uniform() < 0.5 { Side::Buy } else { Side::Sell };
        let depth = rng.exponential(params.lambda);
        let duration = match mode {
            ZiCancelMode::Duration => Some(exponential_duration(rng.exponential(params.delta))),
            ZiCancelMode::PerStep => None,
        };
        ZiIntent::Limit { side, price: zi_price(mid, side, depth), quantity: params.order_size, duration, depth }
    });
    let market = want_market.then(|| {
        let side = if rng.uniform() < 0.5 { Side::Buy } else { Side::Sell };
        ZiIntent::Market { side, quantity: params.order_size }
    });
    (limit, market)
}

/// `p_mid -/+ depth`, rounded to the nearest tick with ties away from the market.
#[inline]
pub fn zi_price(mid: f64, side: Side, depth: f64) -> Price {
    match side {
        Side::Buy => round_to_tick(mid - depth, side),
        Side::Sell => round_to_tick(mid + depth, side),
    }
}

/// Continuous lifetime to whole steps; at least one step.
#[inline]
pub fn exponential_duration(t: f64) -> Step {
    (t.ceil() as Step).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ZiParams {
        ZiParams { alpha: 0.0, mu: 0.0, delta: 0.1, lambda: 0.5, order_size: 1 }
    }

    #[test]
    fn no_submit_consumes_two_draws() {
        let mut a = DrawStream::from_seed(9);
        let mut b = DrawStream::from_seed(9);
        let (l, m) = zi_step(19000.0, &params(), ZiCancelMode::Duration, &mut a);
        assert!(l.is_none() && m.is_none());
        b.uniform();
        b.uniform();
        assert_eq!(a.uniform(), b.uniform());
    }

    #[test]
    fn eq1_arithmetic() {
        assert_eq!(zi_price(19000.0, Side::Buy, 3.0), 18997);
        assert_eq!(zi_price(19000.0, Side::Sell, 3.0), 19003);
        // ties go away from the market
        assert_eq!(zi_price(19000.5, Side::Buy, 1.0), 18999);
        assert_eq!(zi_price(19000.5, Side::Sell, 1.0), 19002);
        assert_eq!(zi_price(19000.0, Side::Buy, 0.4), 19000);
    }

    #[test]
    fn durations_are_positive_whole_steps() {
        assert_eq!(exponential_duration(0.0), 1);
        assert_eq!(exponential_duration(0.2), 1);
        assert_eq!(exponential_duration(3.0), 3);
        assert_eq!(exponential_duration(3.01), 4);
    }

    #[test]
    fn certain_submission() {
        let p = ZiParams { alpha: 1.0, mu: 1.0, ..params() };
        let mut r = DrawStream::from_seed(1);
        let (l, m) = zi_step(100.0, &p, ZiCancelMode::PerStep, &mut r);
        assert!(matches!(l, Some(ZiIntent::Limit { duration: None, .. })));
        assert!(matches!(m, Some(ZiIntent::Market { quantity: 1, .. })));
    }
}
