use super::order::{Price, Qty, Step};

pub const L2_DEPTH: usize = 10;

/// Top-of-book view: up to ten aggregated levels per side.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Snapshot {
    pub step: Step,
    /// Best first (descending prices).
    pub bids: Vec<(Price, Qty)>,
    /// Best first (ascending prices).
    pub asks: Vec<(Price, Qty)>,
    pub best_bid: Option<Price>,
    pub best_ask: Option<Price>,
    /// Mid price in ticks; carried from the last two-sided book when a side is empty.
    pub mid: Option<f64>,
    pub spread: Option<Price>,
    /// Set when `mid`/`spread` were carried rather than observed.
    pub carried: bool,
}

impl L2Snapshot {
    pub fn is_two_sided(&self) -> bool {
        self.best_bid.is_some() && self.best_ask.is_some()
    }
}

/// Last valid top-of-book values, used when one side of the book is empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TopOfBook {
    pub best_bid: Option<Price>,
    pub best_ask: Option<Price>,
    pub mid: Option<f64>,
    pub spread: Option<Price>,
}
