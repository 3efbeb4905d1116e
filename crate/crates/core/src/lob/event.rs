use std::io::Write;

use super::order::{AgentId, OrderId, Price, Qty, Side, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    DuplicateId,
    NonPositiveQuantity,
    InvalidPrice,
    InvalidExpiry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Order accepted by the engine (before matching).
    New,
    /// Residual of a limit order placed at the tail of its level.
    Queued,
    TakerFill,
    MakerFill,
    /// Cancelled on request.
    Cancel,
    /// Removed because its lifetime ran out.
    Expire,
    /// Unfilled remainder of a market order.
    MarketCancel,
    /// Quantity decrease in place, time priority kept.
    Amend,
    /// Price change or quantity increase: removed and resubmitted.
    AmendRequeue,
    Reject(RejectReason),
    /// Cancel/amend referencing an order that is not resting.
    Stale,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::New => "new",
            EventKind::Queued => "queued",
            EventKind::TakerFill => "fill_taker",
            EventKind::MakerFill => "fill_maker",
            EventKind::Cancel => "cancel",
            EventKind::Expire => "expire",
            EventKind::MarketCancel => "market_cancel",
            EventKind::Amend => "amend",
            EventKind::AmendRequeue => "amend_requeue",
            EventKind::Reject(RejectReason::DuplicateId) => "reject_duplicate",
            EventKind::Reject(RejectReason::NonPositiveQuantity) => "reject_quantity",
            EventKind::Reject(RejectReason::InvalidPrice) => "reject_price",
            EventKind::Reject(RejectReason::InvalidExpiry) => "reject_expiry",
            EventKind::Stale => "stale",
        }
    }
}

/// One engine event. `qty` is the quantity affected by the event
/// (filled, cancelled, queued) or the new open quantity for amends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub step: Step,
    pub kind: EventKind,
    pub order_id: OrderId,
    pub agent_id: AgentId,
    pub side: Side,
    pub price: Option<Price>,
    pub qty: Qty,
}

pub const EVENT_LOG_HEADER: &str = "step,event_type,order_id,agent_id,side,price,qty";

/// Writes events as `step,event_type,order_id,agent_id,side,price,qty`.
pub fn write_event_log<W: Write>(mut w: W, events: &[Event]) -> std::io::Result<()> {
    writeln!(w, "{EVENT_LOG_HEADER}")?;
    for e in events {
        match e.price {
            Some(p) => writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.step,
                e.kind.as_str(),
                e.order_id,
                e.agent_id,
                e.side,
                p,
                e.qty
            )?,
            None => writeln!(
                w,
                "{},{},{},{},{},,{}",
                e.step,
                e.kind.as_str(),
                e.order_id,
                e.agent_id,
                e.side,
                e.qty
            )?,
        }
    }
    Ok(())
}
