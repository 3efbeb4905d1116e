use std::collections::HashMap;

use super::ticks::{TickAction, TickOperation, TradeTick};
use crate::lob::{Event, EventKind, OrderId, Price, Qty, Side};
use crate::session::SessionCalendar;

/// Operations and trades in the historical input format.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TickExport {
    pub ops: Vec<TickOperation>,
    pub trades: Vec<TradeTick>,
}

/// Converts one simulated day of engine events into an orders stream and a
/// trades stream, as an exchange feed would publish them.
///
/// Each submission, cancel or expiry gets its own timestamp: the start of
/// its step plus a sequence number within the step. Everything a
/// submission causes shares that timestamp, in feed order: maker fills
/// appear as amends (or cancels when the maker is exhausted), the taker's
/// fills as trades, and any resting residual as a new order. Orders that
/// trade on arrival therefore never show up as new orders, only as trades.
pub fn export_ticks(events: &[Event], calendar: &SessionCalendar, day: u64) -> TickExport {
    let mut out = TickExport::default();
    let mut resting: HashMap<OrderId, (Side, Price, Qty)> = HashMap::new();
    let mut current_step = u64::MAX;
    let mut seq = 0u64;
    let mut ts = 0u64;
    let mut requeued: Option<(OrderId, usize)> = None;
    for e in events.iter().filter(|e| calendar.day_of(e.step) == day) {
        if e.step != current_step {
            current_step = e.step;
            seq = 0;
        }
        let leader = matches!(
            e.kind,
            EventKind::New | EventKind::Cancel | EventKind::Expire | EventKind::Amend | EventKind::AmendRequeue | EventKind::Stale
        ) || matches!(e.kind, EventKind::Reject(_));
        if leader {
            requeued = None;
            ts = calendar.ns_of_day(e.step) + seq;
            seq += 1;
        }
        let op = |action, side, price, quantity| TickOperation { timestamp_ns: ts, order_id: e.order_id, action, side, price, quantity };
        match e.kind {
            EventKind::TakerFill => out.trades.push(TradeTick { timestamp_ns: ts, price: e.price.unwrap_or(0), quantity: e.qty }),
            EventKind::MakerFill => {
                if let Some(r) = resting.get_mut(&e.order_id) {
                    r.2 -= e.qty.min(r.2);
                    let (side, price, left) = *r;
                    if left == 0 {
                        resting.remove(&e.order_id);
                        out.ops.push(op(TickAction::Cancel, side, price, 0));
                    } else {
                        out.ops.push(op(TickAction::Amend, side, price, left));
                    }
                }
            }
            EventKind::Queued => {
                let price = e.price.unwrap_or(0);
                resting.insert(e.order_id, (e.side, price, e.qty));
                match requeued.take() {
                    Some((id, idx)) if id == e.order_id => {
                        // an amended order re-entering the book keeps its id
                        out.ops.remove(idx);
                        out.ops.push(op(TickAction::Amend, e.side, price, e.qty));
                    }
                    _ => out.ops.push(op(TickAction::New, e.side, price, e.qty)),
                }
            }
            EventKind::Cancel | EventKind::Expire => {
                if let Some((side, price, left)) = resting.remove(&e.order_id) {
                    out.ops.push(op(TickAction::Cancel, side, price, left));
                }
            }
            EventKind::Amend => {
                if let Some(r) = resting.get_mut(&e.order_id) {
                    r.2 = e.qty;
                    let (side, price, left) = *r;
                    out.ops.push(op(TickAction::Amend, side, price, left));
                }
            }
            EventKind::AmendRequeue => {
                // shown as a cancel unless the order rests again at the same timestamp
                if let Some((side, price, left)) = resting.remove(&e.order_id) {
                    requeued = Some((e.order_id, out.ops.len()));
                    out.ops.push(op(TickAction::Cancel, side, price, left));
                }
            }
            EventKind::New | EventKind::MarketCancel | EventKind::Reject(_) | EventKind::Stale => {}
        }
    }
    out
}
