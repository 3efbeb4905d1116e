#![allow(dead_code)]

pub mod naive_matcher;

use liqsim::lob::{AmendOutcome, OrderBook, Side, Price, OrderId, Qty};
use naive_matcher::{NaiveBook, NaiveTrade, Op};

/// Resting orders as (side, price, id, remaining), in priority order.
pub type BookState = Vec<(Side, Price, OrderId, Qty)>;

/// Runs `ops` through both the engine and the naive matcher and returns
/// (engine trades, naive trades, engine book, naive book) for comparison.
pub fn run_both(ops: &[Op]) -> (Vec<NaiveTrade>, Vec<NaiveTrade>, BookState, BookState) {
    let mut book = OrderBook::new();
    let mut naive = NaiveBook::default();
    let mut got = Vec::new();
    let mut want = Vec::new();
    for (step, op) in ops.iter().enumerate() {
        match op {
            Op::Submit(o) => {
                let out = book.submit(o.clone());
                got.extend(out.trades.iter().map(|t| (t.price, t.quantity, t.maker_order_id, t.taker_order_id)));
                naive.submit(o, &mut want);
            }
            Op::Cancel(id) => {
                book.cancel(*id, step as u64);
                naive.cancel(*id);
            }
            Op::Amend(id, q, p) => {
                if let AmendOutcome::Requeued(out) = book.amend(*id, *q, *p, step as u64) {
                    got.extend(out.trades.iter().map(|t| (t.price, t.quantity, t.maker_order_id, t.taker_order_id)));
                }
                naive.amend(*id, *q, *p, &mut want);
            }
        }
        book.check_invariants().expect("engine invariants");
    }
    let engine_state: Vec<_> = book
        .bids()
        .orders()
        .map(|(p, o)| (Side::Buy, p, o.order_id, o.remaining))
        .chain(book.asks().orders().map(|(p, o)| (Side::Sell, p, o.order_id, o.remaining)))
        .collect();
    (got, want, engine_state, naive.sorted())
}
