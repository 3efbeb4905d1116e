//! Trading-session clock: maps global simulation steps to days and
//! time-of-day across one or more continuous trading windows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lob::Step;

pub const NS_PER_MS: u64 = 1_000_000;
pub const NS_PER_MINUTE: u64 = 60_000 * NS_PER_MS;

/// A continuous trading window `[start, end)` in minutes since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingWindow {
    pub start_minute: u32,
    pub end_minute: u32,
}

/// Minute of day of an `HH:MM` string.
pub fn parse_hhmm(s: &str) -> Option<u32> {
    let (h, m) = s.trim().split_once(':')?;
    let h: u32 = h.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    (h < 24 && m < 60).then_some(h * 60 + m)
}

impl FromStr for TradingWindow {
    type Err = Error;

    /// Parses `HH:MM-HH:MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("invalid trading window `{s}`, expected HH:MM-HH:MM"));
        let (a, b) = s.split_once('-').ok_or_else(bad)?;
        let start_minute = parse_hhmm(a).ok_or_else(bad)?;
        let end_minute = parse_hhmm(b).ok_or_else(bad)?;
        if end_minute <= start_minute {
            return Err(bad());
        }
        Ok(TradingWindow { start_minute, end_minute })
    }
}

impl fmt::Display for TradingWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02}:{:02}-{:02}:{:02}",
            self.start_minute / 60,
            self.start_minute % 60,
            self.end_minute / 60,
            self.end_minute % 60
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCalendar {
    windows: Vec<TradingWindow>,
    step_ms: u32,
}

impl SessionCalendar {
    pub fn new(windows: Vec<TradingWindow>, step_ms: u32) -> Result<Self> {
        if step_ms == 0 || 60_000 % step_ms != 0 {
            return Err(Error::Config(format!("step length {step_ms} ms must be positive and divide one minute")));
        }
        if windows.is_empty() {
            return Err(Error::Config("at least one trading window is required".into()));
        }
        for w in windows.windows(2) {
            if w[1].start_minute < w[0].end_minute {
                return Err(Error::Config(format!("trading windows {} and {} overlap or are unordered", w[0], w[1])));
            }
        }
        Ok(SessionCalendar { windows, step_ms })
    }

    /// Single window, e.g. `SessionCalendar::parse(&["09:15-16:30"], 20)`.
    pub fn parse(windows: &[&str], step_ms: u32) -> Result<Self> {
        let w = windows.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?;
        Self::new(w, step_ms)
    }

    pub fn windows(&self) -> &[TradingWindow] {
        &self.windows
    }

    pub fn step_ms(&self) -> u32 {
        self.step_ms
    }

    pub fn step_ns(&self) -> u64 {
        self.step_ms as u64 * NS_PER_MS
    }

    pub fn steps_per_minute(&self) -> u64 {
        60_000 / self.step_ms as u64
    }

    pub fn steps_per_second(&self) -> f64 {
        1000.0 / self.step_ms as f64
    }

    pub fn minutes_per_day(&self) -> u64 {
        self.windows.iter().map(|w| (w.end_minute - w.start_minute) as u64).sum()
    }

    pub fn steps_per_day(&self) -> u64 {
        self.minutes_per_day() * self.steps_per_minute()
    }

    pub fn open_minute(&self) -> u32 {
        self.windows[0].start_minute
    }

    /// All trading minutes of a day, in order.
    pub fn minutes(&self) -> impl Iterator<Item = u32> + '_ {
        self.windows.iter().flat_map(|w| w.start_minute..w.end_minute)
    }

    pub fn day_of(&self, step: Step) -> u64 {
        step / self.steps_per_day()
    }

    /// Minute of the trading session (0-based, across windows) for a step.
    pub fn session_minute(&self, step: Step) -> u64 {
        (step % self.steps_per_day()) / self.steps_per_minute()
    }

    /// Wall-clock minute of day for a step.
    pub fn minute_of_day(&self, step: Step) -> u32 {
        let mut m = self.session_minute(step) as u32;
        for w in &self.windows {
            let len = w.end_minute - w.start_minute;
            if m < len {
                return w.start_minute + m;
            }
            m -= len;
        }
        unreachable!("session minute beyond the last window")
    }

    /// Nanoseconds since midnight at the start of `step`.
    pub fn ns_of_day(&self, step: Step) -> u64 {
        let in_minute = step % self.steps_per_minute();
        self.minute_of_day(step) as u64 * NS_PER_MINUTE + in_minute * self.step_ns()
    }

    /// Step within the day containing a wall-clock time, if it falls in a window.
    pub fn step_of_ns(&self, ns_of_day: u64) -> Option<Step> {
        let minute = (ns_of_day / NS_PER_MINUTE) as u32;
        let mut offset = 0u64;
        for w in &self.windows {
            if minute >= w.start_minute && minute < w.end_minute {
                let from_open = ns_of_day - w.start_minute as u64 * NS_PER_MINUTE;
                return Some(offset * self.steps_per_minute() + from_open / self.step_ns());
            }
            offset += (w.end_minute - w.start_minute) as u64;
        }
        None
    }

    /// Like [`step_of_ns`](Self::step_of_ns), but times in a break map to
    /// the next window's open and times after the close to the end of day.
    pub fn clamped_step_of_ns(&self, ns_of_day: u64) -> Step {
        let mut offset = 0u64;
        for w in &self.windows {
            let open = w.start_minute as u64 * NS_PER_MINUTE;
            let close = w.end_minute as u64 * NS_PER_MINUTE;
            if ns_of_day < close {
                let from_open = ns_of_day.saturating_sub(open);
                return offset * self.steps_per_minute() + from_open / self.step_ns();
            }
            offset += (w.end_minute - w.start_minute) as u64;
        }
        self.steps_per_day()
    }
}
