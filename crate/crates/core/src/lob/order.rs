use std::fmt;

use serde::{Deserialize, Serialize};

/// Price in integer ticks.
pub type Price = i64;
/// Quantity in contracts.
pub type Qty = u64;
pub type OrderId = u64;
pub type AgentId = u32;
/// Simulation step index.
pub type Step = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    /// +1 for buys, -1 for sells.
    pub fn sign(self) -> i64 {
        match self {
            Side::Buy => 1,
            Side::Sell => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "B",
            Side::Sell => "S",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s.trim() {
            "B" | "b" | "Buy" | "buy" | "BUY" => Some(Side::Buy),
            "S" | "s" | "Sell" | "sell" | "SELL" => Some(Side::Sell),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderKind {
    Limit,
    Market,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub order_id: OrderId,
    pub agent_id: AgentId,
    pub side: Side,
    pub kind: OrderKind,
    /// Absent for market orders.
    pub price: Option<Price>,
    pub quantity: Qty,
    pub remaining: Qty,
    pub submit_step: Step,
    /// Step at which an unfilled limit order leaves the book.
    pub expiry_step: Option<Step>,
}

impl Order {
    pub fn limit(
        order_id: OrderId,
        agent_id: AgentId,
        side: Side,
        price: Price,
        quantity: Qty,
        submit_step: Step,
        expiry_step: Option<Step>,
    ) -> Self {
        Order {
            order_id,
            agent_id,
            side,
            kind: OrderKind::Limit,
            price: Some(price),
            quantity,
            remaining: quantity,
            submit_step,
            expiry_step,
        }
    }

    pub fn market(order_id: OrderId, agent_id: AgentId, side: Side, quantity: Qty, submit_step: Step) -> Self {
        Order {
            order_id,
            agent_id,
            side,
            kind: OrderKind::Market,
            price: None,
            quantity,
            remaining: quantity,
            submit_step,
            expiry_step: None,
        }
    }
}

/// A match between an incoming (taker) order and a resting (maker) order.
/// Always priced at the maker's limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trade {
    pub price: Price,
    pub quantity: Qty,
    pub aggressor_side: Side,
    pub maker_order_id: OrderId,
    pub taker_order_id: OrderId,
    pub maker_agent_id: AgentId,
    pub taker_agent_id: AgentId,
    pub step: Step,
}

/// Rounds a fractional price to the nearest tick; exact half-ticks go
/// away from the market (down for buys, up for sells).
#[inline]
pub fn round_to_tick(x: f64, side: Side) -> Price {
    match side {
        Side::Buy => (x - 0.5).ceil() as Price,
        Side::Sell => (x + 0.5).floor() as Price,
    }
}
