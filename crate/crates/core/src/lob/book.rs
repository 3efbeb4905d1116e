use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};

use super::event::{Event, EventKind, RejectReason};
use super::order::{AgentId, Order, OrderId, OrderKind, Price, Qty, Side, Step, Trade};
use super::snapshot::{L2Snapshot, TopOfBook, L2_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestingOrder {
    pub order_id: OrderId,
    pub agent_id: AgentId,
    pub quantity: Qty,
    pub remaining: Qty,
    pub submit_step: Step,
    pub expiry_step: Option<Step>,
}

#[derive(Debug, Clone, Default)]
struct Level {
    orders: VecDeque<RestingOrder>,
    volume: Qty,
}

/// One side of the book: price levels, each a FIFO queue.
#[derive(Debug, Clone)]
pub struct BookSide {
    side: Side,
    levels: BTreeMap<Price, Level>,
}

impl BookSide {
    fn new(side: Side) -> Self {
        BookSide { side, levels: BTreeMap::new() }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn best(&self) -> Option<Price> {
        match self.side {
            Side::Buy => self.levels.keys().next_back().copied(),
            Side::Sell => self.levels.keys().next().copied(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Levels best-first as (price, aggregate volume).
    pub fn levels(&self) -> Box<dyn Iterator<Item = (Price, Qty)> + '_> {
        match self.side {
            Side::Buy => Box::new(self.levels.iter().rev().map(|(p, l)| (*p, l.volume))),
            Side::Sell => Box::new(self.levels.iter().map(|(p, l)| (*p, l.volume))),
        }
    }

    /// Resting orders best-first, FIFO within a level.
    pub fn orders(&self) -> Box<dyn Iterator<Item = (Price, &RestingOrder)> + '_> {
        match self.side {
            Side::Buy => Box::new(
                self.levels
                    .iter()
                    .rev()
                    .flat_map(|(p, l)| l.orders.iter().map(move |o| (*p, o))),
            ),
            Side::Sell => Box::new(
                self.levels
                    .iter()
                    .flat_map(|(p, l)| l.orders.iter().map(move |o| (*p, o))),
            ),
        }
    }

    pub fn volume_at(&self, price: Price) -> Qty {
        self.levels.get(&price).map_or(0, |l| l.volume)
    }

    fn push(&mut self, price: Price, order: RestingOrder) {
        let level = self.levels.entry(price).or_default();
        level.volume += order.remaining;
        level.orders.push_back(order);
    }

    fn remove(&mut self, price: Price, order_id: OrderId) -> Option<RestingOrder> {
        let level = self.levels.get_mut(&price)?;
        let pos = level.orders.iter().position(|o| o.order_id == order_id)?;
        let order = level.orders.remove(pos)?;
        level.volume -= order.remaining;
        if level.orders.is_empty() {
            self.levels.remove(&price);
        }
        Some(order)
    }

    fn get_mut(&mut self, price: Price, order_id: OrderId) -> Option<(&mut RestingOrder, &mut Qty)> {
        let level = self.levels.get_mut(&price)?;
        let Level { orders, volume } = level;
        let order = orders.iter_mut().find(|o| o.order_id == order_id)?;
        Some((order, volume))
    }

    fn get(&self, price: Price, order_id: OrderId) -> Option<&RestingOrder> {
        self.levels.get(&price)?.orders.iter().find(|o| o.order_id == order_id)
    }
}

/// Outcome of a submission.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubmitOutcome {
    pub trades: Vec<Trade>,
    /// Quantity left resting on the book (limit orders only).
    pub queued: Option<Qty>,
    /// Unfilled market-order quantity that was cancelled.
    pub cancelled: Qty,
    pub rejected: Option<RejectReason>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubmitStatus {
    Accepted { filled: Qty, queued: Qty, cancelled: Qty },
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancelOutcome {
    Cancelled { remaining: Qty },
    Stale,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AmendOutcome {
    /// Quantity reduced in place.
    Reduced,
    /// Order left the book and re-entered at the new terms.
    Requeued(SubmitOutcome),
    /// Amend to zero removes the order.
    Cancelled,
    Stale,
    Rejected(RejectReason),
}

/// Price-time priority continuous double auction.
///
/// Limit orders match while they cross the opposite best; trades are
/// priced at the resting order. Market orders sweep the opposite side
/// and never rest.
#[derive(Debug, Clone)]
pub struct OrderBook {
    bids: BookSide,
    asks: BookSide,
    index: HashMap<OrderId, (Side, Price)>,
    seen: HashSet<OrderId>,
    expiries: BinaryHeap<Reverse<(Step, OrderId)>>,
    last_top: TopOfBook,
    events: Option<Vec<Event>>,
}

impl Default for OrderBook {
    fn default() -> Self {
        Self::new()
    }
}

impl OrderBook {
    pub fn new() -> Self {
        OrderBook {
            bids: BookSide::new(Side::Buy),
            asks: BookSide::new(Side::Sell),
            index: HashMap::new(),
            seen: HashSet::new(),
            expiries: BinaryHeap::new(),
            last_top: TopOfBook::default(),
            events: None,
        }
    }

    /// Enables event recording; drain with [`OrderBook::take_events`].
    pub fn with_event_log(mut self) -> Self {
        self.events = Some(Vec::new());
        self
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        match self.events.as_mut() {
            Some(ev) => std::mem::take(ev),
            None => Vec::new(),
        }
    }

    pub fn bids(&self) -> &BookSide {
        &self.bids
    }

    pub fn asks(&self) -> &BookSide {
        &self.asks
    }

    pub fn side(&self, side: Side) -> &BookSide {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut BookSide {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }

    pub fn best_bid(&self) -> Option<Price> {
        self.bids.best()
    }

    pub fn best_ask(&self) -> Option<Price> {
        self.asks.best()
    }

    pub fn resting_count(&self) -> usize {
        self.index.len()
    }

    pub fn is_resting(&self, order_id: OrderId) -> bool {
        self.index.contains_key(&order_id)
    }

    pub fn resting_order(&self, order_id: OrderId) -> Option<(Side, Price, &RestingOrder)> {
        let (side, price) = *self.index.get(&order_id)?;
        self.side(side).get(price, order_id).map(|o| (side, price, o))
    }

    /// Ids of all resting orders in deterministic (side, priority) order.
    pub fn resting_ids(&self) -> Vec<OrderId> {
        self.bids
            .orders()
            .chain(self.asks.orders())
            .map(|(_, o)| o.order_id)
            .collect()
    }

    fn emit(&mut self, step: Step, kind: EventKind, order_id: OrderId, agent_id: AgentId, side: Side, price: Option<Price>, qty: Qty) {
        if let Some(ev) = self.events.as_mut() {
            ev.push(Event { step, kind, order_id, agent_id, side, price, qty });
        }
    }

    fn validate(&self, order: &Order) -> Result<(), RejectReason> {
        if self.seen.contains(&order.order_id) {
            return Err(RejectReason::DuplicateId);
        }
        if order.quantity == 0 || order.remaining == 0 || order.remaining > order.quantity {
            return Err(RejectReason::NonPositiveQuantity);
        }
        match (order.kind, order.price) {
            (OrderKind::Limit, Some(p)) if p > 0 => {}
            (OrderKind::Market, None) => {}
            _ => return Err(RejectReason::InvalidPrice),
        }
        if let Some(exp) = order.expiry_step {
            if exp <= order.submit_step {
                return Err(RejectReason::InvalidExpiry);
            }
        }
        Ok(())
    }

    /// Submits an order of either kind, appending any trades to `trades`.
    pub fn submit_into(&mut self, order: Order, trades: &mut Vec<Trade>) -> SubmitStatus {
        if let Err(reason) = self.validate(&order) {
            self.emit(order.submit_step, EventKind::Reject(reason), order.order_id, order.agent_id, order.side, order.price, order.quantity);
            return SubmitStatus::Rejected(reason);
        }
        self.seen.insert(order.order_id);
        self.emit(order.submit_step, EventKind::New, order.order_id, order.agent_id, order.side, order.price, order.quantity);
        self.execute(order, trades)
    }

    /// Matching and queueing for an already validated order.
    fn execute(&mut self, mut order: Order, trades: &mut Vec<Trade>) -> SubmitStatus {
        let start = order.remaining;
        self.match_incoming(&mut order, trades);
        let filled = start - order.remaining;
        match order.kind {
            OrderKind::Market => {
                let cancelled = order.remaining;
                if cancelled > 0 {
                    self.emit(order.submit_step, EventKind::MarketCancel, order.order_id, order.agent_id, order.side, None, cancelled);
                }
                SubmitStatus::Accepted { filled, queued: 0, cancelled }
            }
            OrderKind::Limit => {
                let queued = order.remaining;
                if queued > 0 {
                    let price = order.price.expect("limit order has a price");
                    self.emit(order.submit_step, EventKind::Queued, order.order_id, order.agent_id, order.side, Some(price), queued);
                    self.index.insert(order.order_id, (order.side, price));
                    if let Some(exp) = order.expiry_step {
                        self.expiries.push(Reverse((exp, order.order_id)));
                    }
                    self.side_mut(order.side).push(
                        price,
                        RestingOrder {
                            order_id: order.order_id,
                            agent_id: order.agent_id,
                            quantity: order.quantity,
                            remaining: order.remaining,
                            submit_step: order.submit_step,
                            expiry_step: order.expiry_step,
                        },
                    );
                }
                SubmitStatus::Accepted { filled, queued, cancelled: 0 }
            }
        }
    }

    fn match_incoming(&mut self, order: &mut Order, trades: &mut Vec<Trade>) {
        let limit = order.price;
        let step = order.submit_step;
        let record = self.events.is_some();
        let mut fills: Vec<Event> = Vec::new();
        let opposite = match order.side {
            Side::Buy => &mut self.asks,
            Side::Sell => &mut self.bids,
        };
        while order.remaining > 0 {
            let mut entry = match order.side {
                Side::Buy => match opposite.levels.first_entry() {
                    Some(e) => e,
                    None => break,
                },
                Side::Sell => match opposite.levels.last_entry() {
                    Some(e) => e,
                    None => break,
                },
            };
            let level_price = *entry.key();
            let crosses = match (order.side, limit) {
                (_, None) => true,
                (Side::Buy, Some(l)) => l >= level_price,
                (Side::Sell, Some(l)) => l <= level_price,
            };
            if !crosses {
                break;
            }
            let level = entry.get_mut();
            while order.remaining > 0 {
                let Some(maker) = level.orders.front_mut() else { break };
                let qty = order.remaining.min(maker.remaining);
                maker.remaining -= qty;
                level.volume -= qty;
                order.remaining -= qty;
                trades.push(Trade {
                    price: level_price,
                    quantity: qty,
                    aggressor_side: order.side,
                    maker_order_id: maker.order_id,
                    taker_order_id: order.order_id,
                    maker_agent_id: maker.agent_id,
                    taker_agent_id: order.agent_id,
                    step,
                });
                if record {
                    fills.push(Event {
                        step,
                        kind: EventKind::TakerFill,
                        order_id: order.order_id,
                        agent_id: order.agent_id,
                        side: order.side,
                        price: Some(level_price),
                        qty,
                    });
                    fills.push(Event {
                        step,
                        kind: EventKind::MakerFill,
                        order_id: maker.order_id,
                        agent_id: maker.agent_id,
                        side: order.side.opposite(),
                        price: Some(level_price),
                        qty,
                    });
                }
                if maker.remaining == 0 {
                    let id = maker.order_id;
                    level.orders.pop_front();
                    self.index.remove(&id);
                }
            }
            if level.orders.is_empty() {
                entry.remove();
            }
        }
        if let Some(ev) = self.events.as_mut() {
            ev.extend(fills);
        }
    }

    pub fn submit_limit(&mut self, order: Order) -> SubmitOutcome {
        debug_assert_eq!(order.kind, OrderKind::Limit);
        self.submit(order)
    }

    pub fn submit_market(&mut self, order: Order) -> SubmitOutcome {
        debug_assert_eq!(order.kind, OrderKind::Market);
        self.submit(order)
    }

    pub fn submit(&mut self, order: Order) -> SubmitOutcome {
        let mut trades = Vec::new();
        match self.submit_into(order, &mut trades) {
            SubmitStatus::Accepted { queued, cancelled, .. } => SubmitOutcome {
                trades,
                queued: (queued > 0).then_some(queued),
                cancelled,
                rejected: None,
            },
            SubmitStatus::Rejected(r) => SubmitOutcome { trades, queued: None, cancelled: 0, rejected: Some(r) },
        }
    }

    fn remove_resting(&mut self, order_id: OrderId) -> Option<(Side, Price, RestingOrder)> {
        let (side, price) = self.index.remove(&order_id)?;
        let order = self
            .side_mut(side)
            .remove(price, order_id)
            .expect("index and book out of sync");
        Some((side, price, order))
    }

    pub fn cancel(&mut self, order_id: OrderId, step: Step) -> CancelOutcome {
        match self.remove_resting(order_id) {
            Some((side, price, o)) => {
                self.emit(step, EventKind::Cancel, order_id, o.agent_id, side, Some(price), o.remaining);
                CancelOutcome::Cancelled { remaining: o.remaining }
            }
            None => {
                self.emit(step, EventKind::Stale, order_id, 0, Side::Buy, None, 0);
                CancelOutcome::Stale
            }
        }
    }

    /// Changes the open quantity and/or price of a resting order.
    ///
    /// A pure quantity decrease keeps the order's queue position. A price
    /// change or a quantity increase removes the order and resubmits it,
    /// so it may match and it joins the tail of its new level.
    pub fn amend(&mut self, order_id: OrderId, new_quantity: Qty, new_price: Price, step: Step) -> AmendOutcome {
        let Some(&(side, price)) = self.index.get(&order_id) else {
            self.emit(step, EventKind::Stale, order_id, 0, Side::Buy, Some(new_price), new_quantity);
            return AmendOutcome::Stale;
        };
        if new_quantity == 0 {
            self.cancel(order_id, step);
            return AmendOutcome::Cancelled;
        }
        if new_price <= 0 {
            let agent = self.side(side).get(price, order_id).map_or(0, |o| o.agent_id);
            self.emit(step, EventKind::Reject(RejectReason::InvalidPrice), order_id, agent, side, Some(new_price), new_quantity);
            return AmendOutcome::Rejected(RejectReason::InvalidPrice);
        }
        if new_price == price {
            let (order, volume) = self.side_mut(side).get_mut(price, order_id).expect("indexed order present");
            if new_quantity <= order.remaining {
                let delta = order.remaining - new_quantity;
                order.remaining = new_quantity;
                order.quantity -= delta;
                *volume -= delta;
                let agent = order.agent_id;
                self.emit(step, EventKind::Amend, order_id, agent, side, Some(price), new_quantity);
                return AmendOutcome::Reduced;
            }
        }
        let (_, _, old) = self.remove_resting(order_id).expect("indexed order present");
        self.emit(step, EventKind::AmendRequeue, order_id, old.agent_id, side, Some(new_price), new_quantity);
        let filled_before = old.quantity - old.remaining;
        let order = Order {
            order_id,
            agent_id: old.agent_id,
            side,
            kind: OrderKind::Limit,
            price: Some(new_price),
            quantity: filled_before + new_quantity,
            remaining: new_quantity,
            submit_step: step,
            expiry_step: old.expiry_step.filter(|&e| e > step),
        };
        let mut trades = Vec::new();
        let status = self.execute(order, &mut trades);
        let SubmitStatus::Accepted { queued, cancelled, .. } = status else {
            unreachable!("limit requeue cannot be rejected")
        };
        AmendOutcome::Requeued(SubmitOutcome { trades, queued: (queued > 0).then_some(queued), cancelled, rejected: None })
    }

    /// Removes every resting order whose expiry step is `<= step`.
    /// Returns the removed order ids in removal order.
    pub fn expire_orders(&mut self, step: Step) -> Vec<OrderId> {
        let mut removed = Vec::new();
        while let Some(&Reverse((exp, id))) = self.expiries.peek() {
            if exp > step {
                break;
            }
            self.expiries.pop();
            let current = self.resting_order(id).and_then(|(_, _, o)| o.expiry_step);
            if current != Some(exp) {
                continue;
            }
            if let Some((side, price, o)) = self.remove_resting(id) {
                self.emit(step, EventKind::Expire, id, o.agent_id, side, Some(price), o.remaining);
                removed.push(id);
            }
        }
        removed
    }

    /// Current top of book without the carried fallback.
    pub fn top(&self) -> TopOfBook {
        let best_bid = self.bids.best();
        let best_ask = self.asks.best();
        match (best_bid, best_ask) {
            (Some(b), Some(a)) => TopOfBook {
                best_bid,
                best_ask,
                mid: Some((b + a) as f64 / 2.0),
                spread: Some(a - b),
            },
            _ => TopOfBook { best_bid, best_ask, mid: None, spread: None },
        }
    }

    /// Top of book, falling back to the last two-sided values for missing
    /// fields. Updates the carried state. The flag is true when carried.
    pub fn observe_top(&mut self) -> (TopOfBook, bool) {
        let now = self.top();
        if now.mid.is_some() {
            self.last_top = now;
            (now, false)
        } else {
            let carried = TopOfBook {
                best_bid: now.best_bid.or(self.last_top.best_bid),
                best_ask: now.best_ask.or(self.last_top.best_ask),
                mid: self.last_top.mid,
                spread: self.last_top.spread,
            };
            (carried, true)
        }
    }

    pub fn l2_snapshot(&mut self, step: Step) -> L2Snapshot {
        let bids: Vec<_> = self.bids.levels().take(L2_DEPTH).collect();
        let asks: Vec<_> = self.asks.levels().take(L2_DEPTH).collect();
        let (top, carried) = self.observe_top();
        L2Snapshot {
            step,
            bids,
            asks,
            best_bid: self.bids.best(),
            best_ask: self.asks.best(),
            mid: top.mid,
            spread: top.spread,
            carried,
        }
    }

    /// Check of the structural invariants; used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        if let (Some(b), Some(a)) = (self.best_bid(), self.best_ask()) {
            if a <= b {
                return Err(format!("crossed book: bid {b} ask {a}"));
            }
        }
        let mut count = 0;
        for side in [&self.bids, &self.asks] {
            for (price, level) in &side.levels {
                if level.orders.is_empty() {
                    return Err(format!("empty level retained at {price}"));
                }
                let vol: Qty = level.orders.iter().map(|o| o.remaining).sum();
                if vol != level.volume {
                    return Err(format!("level volume mismatch at {price}"));
                }
                for o in &level.orders {
                    if o.remaining == 0 || o.remaining > o.quantity {
                        return Err(format!("bad remaining on order {}", o.order_id));
                    }
                    if self.index.get(&o.order_id) != Some(&(side.side, *price)) {
                        return Err(format!("index mismatch for order {}", o.order_id));
                    }
                    count += 1;
                }
            }
        }
        if count != self.index.len() {
            return Err("index holds orders not on the book".into());
        }
        Ok(())
    }
}
