//! Brute-force reference matcher: linear scans over a flat order list.
//! Shares nothing with the engine beyond the order/trade value types.

use std::collections::HashSet;

use liqsim::lob::{Order, OrderId, OrderKind, Price, Qty, Side};
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveResting {
    pub id: OrderId,
    pub side: Side,
    pub price: Price,
    pub remaining: Qty,
    pub seq: u64,
}

/// (price, qty, maker, taker)
pub type NaiveTrade = (Price, Qty, OrderId, OrderId);

#[derive(Debug, Default)]
pub struct NaiveBook {
    pub resting: Vec<NaiveResting>,
    seq: u64,
    seen: HashSet<OrderId>,
}

impl NaiveBook {
    fn best_match(&self, side: Side, limit: Option<Price>) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, r) in self.resting.iter().enumerate() {
            if r.side == side {
                continue;
            }
            let crosses = match (side, limit) {
                (_, None) => true,
                (Side::Buy, Some(l)) => r.price <= l,
                (Side::Sell, Some(l)) => r.price >= l,
            };
            if !crosses {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(j) => {
                    let b = &self.resting[j];
                    let better_price = match side {
                        Side::Buy => r.price < b.price,
                        Side::Sell => r.price > b.price,
                    };
                    if better_price || (r.price == b.price && r.seq < b.seq) {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        best
    }

    fn run(&mut self, id: OrderId, side: Side, limit: Option<Price>, mut qty: Qty, out: &mut Vec<NaiveTrade>) {
        while qty > 0 {
            let Some(i) = self.best_match(side, limit) else { break };
            let fill = qty.min(self.resting[i].remaining);
            out.push((self.resting[i].price, fill, self.resting[i].id, id));
            qty -= fill;
            self.resting[i].remaining -= fill;
            if self.resting[i].remaining == 0 {
                self.resting.remove(i);
            }
        }
        if qty > 0 {
            if let Some(price) = limit {
                self.seq += 1;
                self.resting.push(NaiveResting { id, side, price, remaining: qty, seq: self.seq });
            }
        }
    }

    pub fn submit(&mut self, order: &Order, out: &mut Vec<NaiveTrade>) -> bool {
        let valid_price = match order.kind {
            OrderKind::Limit => order.price.is_some_and(|p| p > 0),
            OrderKind::Market => order.price.is_none(),
        };
        if self.seen.contains(&order.order_id) || order.quantity == 0 || !valid_price {
            return false;
        }
        self.seen.insert(order.order_id);
        self.run(order.order_id, order.side, order.price, order.quantity, out);
        true
    }

    pub fn cancel(&mut self, id: OrderId) -> bool {
        match self.resting.iter().position(|r| r.id == id) {
            Some(i) => {
                self.resting.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn amend(&mut self, id: OrderId, qty: Qty, price: Price, out: &mut Vec<NaiveTrade>) {
        let Some(i) = self.resting.iter().position(|r| r.id == id) else { return };
        if qty == 0 {
            self.resting.remove(i);
            return;
        }
        if price == self.resting[i].price && qty <= self.resting[i].remaining {
            self.resting[i].remaining = qty;
            return;
        }
        let side = self.resting[i].side;
        self.resting.remove(i);
        self.run(id, side, Some(price), qty, out);
    }

    /// Resting orders sorted by (side, priority) for comparison.
    pub fn sorted(&self) -> Vec<(Side, Price, OrderId, Qty)> {
        let mut v: Vec<_> = self.resting.iter().map(|r| (r.side, r.price, r.seq, r.id, r.remaining)).collect();
        v.sort_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| match a.0 {
                Side::Buy => b.1.cmp(&a.1),
                Side::Sell => a.1.cmp(&b.1),
            })
            .then(a.2.cmp(&b.2))
        });
        v.into_iter().map(|(s, p, _, id, q)| (s, p, id, q)).collect()
    }
}

#[derive(Debug, Clone)]
pub enum Op {
    Submit(Order),
    Cancel(OrderId),
    Amend(OrderId, Qty, Price),
}

/// Random mixed stream of submissions, cancels and amends around `mid`.
pub fn random_stream<R: Rng>(rng: &mut R, n: usize, mid: Price) -> Vec<Op> {
    let mut ops = Vec::with_capacity(n);
    let mut next_id: OrderId = 1;
    for step in 0..n as u64 {
        let roll: f64 = rng.random();
        let side = if rng.random_bool(0.5) { Side::Buy } else { Side::Sell };
        if roll < 0.55 || next_id < 3 {
            let price = mid + rng.random_range(-6..=6);
            let mut qty = rng.random_range(1..=10);
            if rng.random_bool(0.01) {
                qty = 0;
            }
            let id = if rng.random_bool(0.01) && next_id > 1 { rng.random_range(1..next_id) } else { next_id };
            let mut o = Order::limit(id, rng.random_range(0..5), side, price, qty, step, None);
            o.remaining = qty;
            ops.push(Op::Submit(o));
        } else if roll < 0.70 {
            let qty = rng.random_range(1..=15);
            ops.push(Op::Submit(Order::market(next_id, rng.random_range(0..5), side, qty, step)));
        } else if roll < 0.85 {
            ops.push(Op::Cancel(rng.random_range(1..next_id)));
        } else {
            let id = rng.random_range(1..next_id);
            let qty = rng.random_range(0..=12);
            let price = mid + rng.random_range(-6..=6);
            ops.push(Op::Amend(id, qty, price));
        }
        next_id += 1;
    }
    ops
}
