use serde::{Deserialize, Serialize};

use crate::session::SessionCalendar;

/// Per-minute arrival intensities, stored as per-step probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    steps_per_minute: u64,
    /// minute of day -> (alpha, mu) per step
    per_step: Vec<(f64, f64)>,
}

impl RateProfile {
    pub fn new(steps_per_minute: u64) -> Self {
        RateProfile { steps_per_minute, per_step: vec![(0.0, 0.0); 24 * 60] }
    }

    /// Builds a profile from per-minute arrival counts.
    pub fn from_counts(steps_per_minute: u64, counts: impl IntoIterator<Item = (u32, f64, f64)>) -> Self {
        let mut p = Self::new(steps_per_minute);
        for (minute, limits, markets) in counts {
            p.set_counts(minute, limits, markets);
        }
        p
    }

    /// Flat profile over a session with per-step probabilities.
    pub fn flat(calendar: &SessionCalendar, alpha: f64, mu: f64) -> Self {
        let mut p = Self::new(calendar.steps_per_minute());
        for m in calendar.minutes() {
            p.per_step[m as usize] = (alpha, mu);
        }
        p
    }

    pub fn set_counts(&mut self, minute: u32, limit_count: f64, market_count: f64) {
        let spm = self.steps_per_minute as f64;
        self.per_step[minute as usize] = (limit_count / spm, market_count / spm);
    }

    pub fn set_per_step(&mut self, minute: u32, alpha: f64, mu: f64) {
        self.per_step[minute as usize] = (alpha, mu);
    }

    pub fn steps_per_minute(&self) -> u64 {
        self.steps_per_minute
    }

    /// Limit-order probability per step at a minute of day.
    #[inline]
    pub fn alpha(&self, minute: u32) -> f64 {
        self.per_step[minute as usize].0
    }

    /// Market-order probability per step at a minute of day.
    #[inline]
    pub fn mu(&self, minute: u32) -> f64 {
        self.per_step[minute as usize].1
    }

    /// Minutes with any non-zero rate, with their per-step rates.
    pub fn entries(&self) -> impl Iterator<Item = (u32, f64, f64)> + '_ {
        self.per_step
            .iter()
            .enumerate()
            .filter(|(_, (a, m))| *a > 0.0 || *m > 0.0)
            .map(|(i, (a, m))| (i as u32, *a, *m))
    }

    pub fn covers(&self, calendar: &SessionCalendar) -> bool {
        calendar.minutes().any(|m| self.alpha(m) > 0.0 || self.mu(m) > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_step_is_count_over_steps_per_minute() {
        let p = RateProfile::from_counts(3000, [(555, 3000.0, 0.0)]);
        assert_eq!(p.alpha(555), 1.0);
        assert_eq!(p.mu(555), 0.0);
        assert_eq!(p.alpha(556), 0.0);
    }
}
