//! Fundamental, momentum and noise demand functions and the mapping from a
//! signed demand to order intents.

use serde::{Deserialize, Serialize};

use crate::calibration::ImpactModel;
use crate::error::{Error, Result};
use crate::lob::{Price, Side};

/// Behavioural parameters of the fundamental/momentum/noise traders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiarellaParams {
    /// Fundamental demand gain per tick of distortion.
    pub kappa: f64,
    pub beta_h: f64,
    pub gamma_h: f64,
    pub eta_h: f64,
    pub beta_l: f64,
    pub gamma_l: f64,
    pub eta_l: f64,
    /// Noise demand scale.
    pub sigma: f64,
}

impl ChiarellaParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("kappa", self.kappa),
            ("beta_h", self.beta_h),
            ("gamma_h", self.gamma_h),
            ("beta_l", self.beta_l),
            ("gamma_l", self.gamma_l),
            ("sigma", self.sigma),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("eta_h", self.eta_h), ("eta_l", self.eta_l)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// Names of the calibrated parameters, in vector order.
    pub const CALIBRATED: [&'static str; 6] = ["kappa", "beta_l", "gamma_l", "beta_h", "gamma_h", "sigma"];

    pub fn calibrated_vector(&self) -> [f64; 6] {
        [self.kappa, self.beta_l, self.gamma_l, self.beta_h, self.gamma_h, self.sigma]
    }

    /// Replaces the calibrated parameters, keeping the EWMA weights.
    pub fn with_calibrated(&self, v: &[f64]) -> Self {
        ChiarellaParams {
            kappa: v[0],
            beta_l: v[1],
            gamma_l: v[2],
            beta_h: v[3],
            gamma_h: v[4],
            sigma: v[5],
            ..*self
        }
    }
}

/// Exogenous fundamental value `V` and the reflexive adjustment `X`
/// accumulated from traded excess demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalState {
    pub value: f64,
    pub reflexive: f64,
    /// Drift per step.
    pub drift: f64,
    /// Volatility per step.
    pub volatility: f64,
}

impl FundamentalState {
    pub fn new(value: f64, drift: f64, volatility: f64) -> Self {
        FundamentalState { value, reflexive: 0.0, drift, volatility }
    }

    /// `V + X`.
    #[inline]
    pub fn reflexive_value(&self) -> f64 {
        self.value + self.reflexive
    }

    /// Random-walk step `V += g + sigma * w` for a standard normal draw `w`.
    #[inline]
    pub fn update_fundamental(&mut self, w: f64) -> f64 {
        self.value += self.drift + self.volatility * w;
        self.value
    }

    /// `X += sign(Q) f(|Q|)` for signed excess demand `Q`.
    #[inline]
    pub fn update_reflexive(&mut self, excess_demand: f64, impact: &ImpactModel) -> f64 {
        self.reflexive += impact.signed(excess_demand);
        self.reflexive
    }
}

/// Fundamental demand. The branch conditions compare the exogenous value
/// `V` with the quotes; the demand itself uses the reflexive value `V + X`.
#[inline]
pub fn fundamental_demand(state: &FundamentalState, best_bid: Price, best_ask: Price, kappa: f64) -> f64 {
    let v = state.value;
    if v > best_ask as f64 {
        kappa * (state.reflexive_value() - best_ask as f64)
    } else if v < best_bid as f64 {
        kappa * (state.reflexive_value() - best_bid as f64)
    } else {
        0.0
    }
}

/// EWMA of mid-price changes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentumState {
    pub signal: f64,
}

impl MomentumState {
    #[inline]
    pub fn update(&mut self, previous_mid: f64, mid: f64, eta: f64) -> f64 {
        self.signal = (1.0 - eta) * self.signal + eta * (mid - previous_mid);
        self.signal
    }

    #[inline]
    pub fn demand(&self, beta: f64, gamma: f64) -> f64 {
        momentum_demand(self.signal, beta, gamma)
    }
}

#[inline]
pub fn momentum_demand(signal: f64, beta: f64, gamma: f64) -> f64 {
    if signal == 0.0 {
        0.0
    } else {
        beta * (gamma * signal).tanh()
    }
}

/// `sigma * z` for a standard normal draw `z`.
#[inline]
pub fn noise_demand(sigma: f64, z: f64) -> f64 {
    sigma * z
}

/// Which order types a demand triggers this step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DemandIntents {
    pub limit: Option<Side>,
    pub market: Option<Side>,
}

/// Maps a signed demand to intents: side from the sign, limit with
/// probability `clamp(alpha |D|, 0, 1)` and market with probability
/// `clamp(mu |D|, 0, 1)`. `u_limit`/`u_market` are the two uniform draws,
/// consumed whether or not `D` is zero.
#[inline]
pub fn demand_to_intents(demand: f64, alpha: f64, mu: f64, u_limit: f64, u_market: f64) -> DemandIntents {
    if demand == 0.0 || !demand.is_finite() {
        return DemandIntents::default();
    }
    let side = if demand > 0.0 { Side::Buy } else { Side::Sell };
    let mag = demand.abs();
    let p_limit = (alpha * mag).clamp(0.0, 1.0);
    let p_market = (mu * mag).clamp(0.0, 1.0);
    DemandIntents {
        limit: (u_limit < p_limit).then_some(side),
        market: (u_market < p_market).then_some(side),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_inside_spread_is_zero() {
        let s = FundamentalState::new(19001.0, 0.0, 0.0);
        assert_eq!(fundamental_demand(&s, 19000, 19002, 0.011), 0.0);
    }

    #[test]
    fn fundamental_above_ask() {
        let s = FundamentalState::new(19010.0, 0.0, 0.0);
        let d = fundamental_demand(&s, 18998, 19000, 0.011);
        assert!((d - 0.11).abs() < 1e-12);
    }

    #[test]
    fn fundamental_condition_on_exogenous_value_uses_reflexive_value() {
        let mut s = FundamentalState::new(19010.0, 0.0, 0.0);
        s.reflexive = -20.0;
        // V above the ask, V + X below the bid
        let d = fundamental_demand(&s, 18998, 19000, 0.011);
        assert!((d - 0.011 * (18990.0 - 19000.0)).abs() < 1e-12);
        assert!(d < 0.0);
    }

    #[test]
    fn reflexive_update() {
        let m = ImpactModel::new(0.561, 0.5);
        let mut s = FundamentalState::new(0.0, 0.0, 0.0);
        s.update_reflexive(0.0, &m);
        assert_eq!(s.reflexive, 0.0);
        s.update_reflexive(100.0, &m);
        assert!((s.reflexive - 5.61).abs() < 1e-12);
        s.update_reflexive(-100.0, &m);
        assert!(s.reflexive.abs() < 1e-12);
        assert_eq!(s.reflexive_value(), s.value + s.reflexive);
    }

    #[test]
    fn constant_fundamental_without_noise() {
        let mut s = FundamentalState::new(100.0, 0.0, 0.0);
        for _ in 0..10 {
            s.update_fundamental(1.3);
        }
        assert_eq!(s.value, 100.0);
    }

    #[test]
    fn momentum_examples() {
        let mut m = MomentumState::default();
        assert_eq!(m.demand(1.0, 1.0), 0.0);
        m.update(19000.0, 19002.0, 0.98);
        assert!((m.signal - 1.96).abs() < 1e-12);
        let beta = 0.53;
        let gamma = 2.0;
        assert!((m.demand(beta, gamma) - beta * (1.96f64 * gamma).tanh()).abs() < 1e-15);
        // saturation
        assert!((momentum_demand(1e6, 0.7, 1e3) - 0.7).abs() < 1e-12);
        // unit weight: signal is the last change
        let mut u = MomentumState { signal: 5.0 };
        u.update(10.0, 7.0, 1.0);
        assert_eq!(u.signal, -3.0);
    }

    #[test]
    fn momentum_decays_geometrically_on_flat_mid() {
        let mut m = MomentumState { signal: 4.0 };
        let eta = 0.25;
        for k in 1..=10 {
            m.update(100.0, 100.0, eta);
            assert!((m.signal - 4.0 * (1.0 - eta).powi(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn intents_follow_demand_sign_and_clamp() {
        assert_eq!(demand_to_intents(0.0, 1.0, 1.0, 0.0, 0.0), DemandIntents::default());
        let i = demand_to_intents(5.0, 0.3, 0.0, 0.999, 0.0);
        assert_eq!(i.limit, Some(Side::Buy));
        assert_eq!(i.market, None);
        let i = demand_to_intents(-0.5, 1.0, 1.0, 0.1, 0.1);
        assert_eq!(i, DemandIntents { limit: Some(Side::Sell), market: Some(Side::Sell) });
    }

    #[test]
    fn noise_zero_scale() {
        assert_eq!(noise_demand(0.0, 2.5), 0.0);
    }
}
