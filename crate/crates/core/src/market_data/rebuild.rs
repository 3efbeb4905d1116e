use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ticks::{TickAction, TickOperation, TradeTick};
use crate::calibration::SignedTrade;
use crate::error::{Error, Result};
use crate::lob::{L2Snapshot, Order, OrderBook, OrderId, Price, Qty, Side, Step, TopOfBook, L2_DEPTH};
use crate::session::{SessionCalendar, NS_PER_MINUTE};

/// Agent id given to orders replayed from historical data.
const REPLAY_AGENT: u32 = 0;

/// L2 state after all operations carrying one timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Record {
    pub timestamp_ns: u64,
    pub snapshot: L2Snapshot,
}

/// A limit order annotated at submission. `depth` is measured from the
/// opposite best quote (buys below the ask, sells above the bid).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoricalLimitOrder {
    pub submit_ns: u64,
    pub order_id: OrderId,
    pub side: Side,
    pub depth: Price,
    pub volume: Qty,
    /// Steps between submission and cancellation or full fill.
    pub duration: Step,
    pub spread: Price,
    pub minute_of_day: u32,
    /// Still resting at the end of the data; the duration runs to the last operation.
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoricalMarketOrder {
    pub time_ns: u64,
    pub side: Side,
    pub volume: Qty,
    pub spread: Price,
    pub minute_of_day: u32,
}

/// Everything extracted from one day of operations and trades.
#[derive(Debug, Clone, Default)]
pub struct Reconstruction {
    pub l2: Vec<L2Record>,
    pub limit_orders: Vec<HistoricalLimitOrder>,
    pub market_orders: Vec<HistoricalMarketOrder>,
    /// Every trade with its inferred aggressor side.
    pub signed_trades: Vec<SignedTrade>,
    /// Limit orders submitted before the book had quotes on both sides,
    /// which cannot be annotated with a depth.
    pub unannotated: usize,
}

impl Reconstruction {
    /// Mid prevailing just before `t`: the last snapshot strictly earlier.
    pub fn mid_before(&self, t: u64) -> Option<f64> {
        let i = self.l2.partition_point(|r| r.timestamp_ns < t);
        if i == 0 {
            None
        } else {
            self.l2[i - 1].snapshot.mid
        }
    }
}

struct Live {
    submit_ns: u64,
    submit_step: Step,
    side: Side,
    depth: Option<Price>,
    volume: Qty,
    spread: Price,
    minute: u32,
}

/// Aggressor side from the trade price against the prevailing mid; a
/// trade at the mid follows the last mid move, defaulting to a buy.
pub fn infer_aggressor(price: Price, mid: Option<f64>, last_move: Option<Side>) -> Side {
    match mid {
        Some(m) if (price as f64) > m => Side::Buy,
        Some(m) if (price as f64) < m => Side::Sell,
        _ => last_move.unwrap_or(Side::Buy),
    }
}

fn minute_of(ns: u64) -> u32 {
    (ns / NS_PER_MINUTE) as u32
}

/// Replays operations through the matching engine to rebuild the book,
/// annotates each limit order and infers market orders from the trades.
///
/// Trades sharing a timestamp (and inferred side) form one market order.
/// Operations that reference unknown orders, or reuse an id, make the
/// stream inconsistent; all offending ids are reported together.
pub fn rebuild_book(ops: &[TickOperation], trades: &[TradeTick], calendar: &SessionCalendar) -> Result<Reconstruction> {
    let mut book = OrderBook::new();
    let mut out = Reconstruction::default();
    let mut live: HashMap<OrderId, Live> = HashMap::new();
    let mut seen: HashSet<OrderId> = HashSet::new();
    let mut offending: BTreeSet<OrderId> = BTreeSet::new();
    let mut top = TopOfBook::default();
    let mut last_move: Option<Side> = None;
    let mut scratch = Vec::new();

    let finish = |out: &mut Reconstruction, id: OrderId, l: Live, end_step: Step, censored: bool| match l.depth {
        Some(depth) => out.limit_orders.push(HistoricalLimitOrder {
            submit_ns: l.submit_ns,
            order_id: id,
            side: l.side,
            depth,
            volume: l.volume,
            duration: end_step.saturating_sub(l.submit_step),
            spread: l.spread,
            minute_of_day: l.minute,
            censored,
        }),
        None => out.unannotated += 1,
    };

    let (mut i, mut j) = (0, 0);
    while i < ops.len() || j < trades.len() {
        let t = match (ops.get(i), trades.get(j)) {
            (Some(o), Some(tr)) => o.timestamp_ns.min(tr.timestamp_ns),
            (Some(o), None) => o.timestamp_ns,
            (None, Some(tr)) => tr.timestamp_ns,
            (None, None) => unreachable!(),
        };
        let step = calendar.clamped_step_of_ns(t);

        // trades see the book as it stood before this timestamp
        let mut group: Option<HistoricalMarketOrder> = None;
        while j < trades.len() && trades[j].timestamp_ns == t {
            let tr = trades[j];
            let side = infer_aggressor(tr.price, top.mid, last_move);
            out.signed_trades.push(SignedTrade { time_ns: t, quantity: tr.quantity as f64, side });
            match group.as_mut() {
                Some(g) if g.side == side => g.volume += tr.quantity,
                _ => {
                    if let Some(g) = group.take() {
                        out.market_orders.push(g);
                    }
                    group = Some(HistoricalMarketOrder {
                        time_ns: t,
                        side,
                        volume: tr.quantity,
                        spread: top.spread.unwrap_or(1),
                        minute_of_day: minute_of(t),
                    });
                }
            }
            j += 1;
        }
        out.market_orders.extend(group);

        let had_ops = i < ops.len() && ops[i].timestamp_ns == t;
        while i < ops.len() && ops[i].timestamp_ns == t {
            let op = ops[i];
            i += 1;
            match op.action {
                TickAction::New => {
                    if !seen.insert(op.order_id) {
                        offending.insert(op.order_id);
                        continue;
                    }
                    let depth = match (op.side, top.best_bid, top.best_ask) {
                        (Side::Buy, _, Some(a)) if top.mid.is_some() => Some(a - op.price),
                        (Side::Sell, Some(b), _) if top.mid.is_some() => Some(op.price - b),
                        _ => None,
                    };
                    scratch.clear();
                    let order = Order::limit(op.order_id, REPLAY_AGENT, op.side, op.price, op.quantity, step, None);
                    book.submit_into(order, &mut scratch);
                    let l = Live {
                        submit_ns: t,
                        submit_step: step,
                        side: op.side,
                        depth,
                        volume: op.quantity,
                        spread: top.spread.unwrap_or(1),
                        minute: minute_of(t),
                    };
                    if book.is_resting(op.order_id) {
                        live.insert(op.order_id, l);
                    } else {
                        finish(&mut out, op.order_id, l, step, false);
                    }
                }
                TickAction::Amend | TickAction::Cancel => {
                    if !book.is_resting(op.order_id) {
                        offending.insert(op.order_id);
                        continue;
                    }
                    if op.action == TickAction::Cancel {
                        book.cancel(op.order_id, step);
                    } else {
                        book.amend(op.order_id, op.quantity, op.price, step);
                    }
                    if !book.is_resting(op.order_id) {
                        if let Some(l) = live.remove(&op.order_id) {
                            finish(&mut out, op.order_id, l, step, false);
                        }
                    }
                }
            }
        }

        if had_ops {
            let prev_mid = top.mid;
            let snapshot = book.l2_snapshot(step);
            top = TopOfBook { best_bid: snapshot.best_bid, best_ask: snapshot.best_ask, mid: snapshot.mid, spread: snapshot.spread };
            if !snapshot.is_two_sided() {
                // keep the carried quotes for depth measurement
                let (carried, _) = book.observe_top();
                top = carried;
            }
            if let (Some(a), Some(b)) = (prev_mid, top.mid) {
                if b > a {
                    last_move = Some(Side::Buy);
                } else if b < a {
                    last_move = Some(Side::Sell);
                }
            }
            out.l2.push(L2Record { timestamp_ns: t, snapshot });
        }
    }

    if !offending.is_empty() {
        return Err(Error::InconsistentOps(offending.into_iter().collect()));
    }
    let end_step = ops.last().map_or(0, |o| calendar.clamped_step_of_ns(o.timestamp_ns));
    let mut rest: Vec<_> = live.into_iter().collect();
    rest.sort_by_key(|(id, l)| (l.submit_ns, *id));
    for (id, l) in rest {
        finish(&mut out, id, l, end_step, true);
    }
    out.limit_orders.sort_by_key(|o| (o.submit_ns, o.order_id));
    Ok(out)
}

/// `ts_ns,bid_px_1..10,bid_qty_1..10,ask_px_1..10,ask_qty_1..10`; missing
/// levels are left empty.
pub fn write_l2_csv<W: Write>(mut w: W, rows: &[L2Record]) -> std::io::Result<()> {
    let mut header = vec!["ts_ns".to_string()];
    for prefix in ["bid_px", "bid_qty", "ask_px", "ask_qty"] {
        header.extend((1..=L2_DEPTH).map(|k| format!("{prefix}_{k}")));
    }
    writeln!(w, "{}", header.join(","))?;
    let cell = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let mut fields = vec![r.timestamp_ns.to_string()];
        for levels in [&r.snapshot.bids, &r.snapshot.asks] {
            fields.extend((0..L2_DEPTH).map(|k| cell(levels.get(k).map(|l| l.0.to_string()))));
            fields.extend((0..L2_DEPTH).map(|k| cell(levels.get(k).map(|l| l.1.to_string()))));
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub const LIMIT_ORDERS_HEADER: &str = "submit_ns,order_id,side,depth,volume,duration,spread,minute_of_day,censored";
pub const MARKET_ORDERS_HEADER: &str = "time_ns,side,volume,spread,minute_of_day";

pub fn write_limit_orders<W: Write>(mut w: W, orders: &[HistoricalLimitOrder]) -> std::io::Result<()> {
    writeln!(w, "{LIMIT_ORDERS_HEADER}")?;
    for o in orders {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            o.submit_ns, o.order_id, o.side, o.depth, o.volume, o.duration, o.spread, o.minute_of_day, o.censored
        )?;
    }
    Ok(())
}

pub fn write_market_orders<W: Write>(mut w: W, orders: &[HistoricalMarketOrder]) -> std::io::Result<()> {
    writeln!(w, "{MARKET_ORDERS_HEADER}")?;
    for o in orders {
        writeln!(w, "{},{},{},{},{}", o.time_ns, o.side, o.volume, o.spread, o.minute_of_day)?;
    }
    Ok(())
}
