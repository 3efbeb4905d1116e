//! Simulated days pushed through the tick export and back through the
//! reconstruction.

mod common;

use std::collections::BTreeMap;

use common::naive_matcher::NaiveBook;
use liqsim::agents::{RateProfile, ZiCancelMode, ZiParams};
use liqsim::calibration::estimate_rates_from;
use liqsim::lob::{Order, Price, Qty, Side};
use liqsim::market_data::{
    export_ticks, parse_ticks, parse_trades, rebuild_book, write_ticks, write_trades, Reconstruction, TickAction, TickExport,
};
use liqsim::rng::SeedSet;
use liqsim::session::SessionCalendar;
use liqsim::sim::{simulate, MarketModel, PathRecord, Recording};
use liqsim::synthetic::SyntheticSpec;

fn recording() -> Recording {
    Recording { events: true, series: true, trades: true, ..Default::default() }
}

fn chiarella_day() -> (MarketModel, PathRecord) {
    let model = SyntheticSpec::default().model().unwrap();
    let steps = model.calendar.steps_per_day();
    let path = simulate(&model, &SeedSet::new(17, 0), steps, &recording(), None).unwrap();
    (model, path)
}

fn rebuild(ticks: &TickExport, cal: &SessionCalendar) -> Reconstruction {
    rebuild_book(&ticks.ops, &ticks.trades, cal).unwrap()
}

#[test]
fn exported_files_read_back_identically() {
    let (model, path) = chiarella_day();
    let ticks = export_ticks(&path.events, &model.calendar, 0);
    assert!(ticks.ops.len() > 1000 && ticks.trades.len() > 100);
    let mut buf = Vec::new();
    write_ticks(&mut buf, &ticks.ops).unwrap();
    let ops = parse_ticks(buf.as_slice(), "orders.csv".as_ref()).unwrap();
    assert_eq!(ops.skipped(), 0);
    assert_eq!(ops.records, ticks.ops);
    let mut buf = Vec::new();
    write_trades(&mut buf, &ticks.trades).unwrap();
    let trades = parse_trades(buf.as_slice(), "trades.csv".as_ref()).unwrap();
    assert_eq!(trades.records, ticks.trades);
}

#[test]
fn recovered_arrivals_equal_the_generated_ones() {
    let (model, path) = chiarella_day();
    let ticks = export_ticks(&path.events, &model.calendar, 0);
    let rec = rebuild(&ticks, &model.calendar);
    let limits: u32 = path.limit_arrivals.iter().sum();
    let markets: u32 = path.market_arrivals.iter().sum();
    // the opening book is replayed as ordinary resting orders
    let opening = model.opening_book.len();
    assert_eq!(rec.limit_orders.len() + rec.unannotated, limits as usize + opening);
    assert_eq!(rec.market_orders.len(), markets as usize);
    let traded: Qty = ticks.trades.iter().map(|t| t.quantity).sum();
    assert_eq!(rec.market_orders.iter().map(|m| m.volume).sum::<Qty>(), traded);
    let simulated: Qty = path.trades.iter().map(|t| t.quantity).sum();
    assert_eq!(traded, simulated);
}

type Levels = Vec<(Price, Qty)>;

/// Top-ten aggregate of a naive book: (bids best first, asks best first).
fn naive_levels(book: &NaiveBook) -> (Levels, Levels) {
    let mut bids: BTreeMap<Price, Qty> = BTreeMap::new();
    let mut asks: BTreeMap<Price, Qty> = BTreeMap::new();
    for r in &book.resting {
        let side = if r.side == Side::Buy { &mut bids } else { &mut asks };
        *side.entry(r.price).or_default() += r.remaining;
    }
    (bids.into_iter().rev().take(10).collect(), asks.into_iter().take(10).collect())
}

#[test]
fn l2_series_matches_a_naive_replay() {
    let (model, path) = chiarella_day();
    let ticks = export_ticks(&path.events, &model.calendar, 0);
    let rec = rebuild(&ticks, &model.calendar);
    let mut naive = NaiveBook::default();
    let mut trades = Vec::new();
    let mut snaps = rec.l2.iter();
    let mut i = 0;
    while i < ticks.ops.len() {
        let t = ticks.ops[i].timestamp_ns;
        while i < ticks.ops.len() && ticks.ops[i].timestamp_ns == t {
            let op = ticks.ops[i];
            match op.action {
                TickAction::New => {
                    naive.submit(&Order::limit(op.order_id, 0, op.side, op.price, op.quantity, 0, None), &mut trades);
                }
                TickAction::Cancel => {
                    naive.cancel(op.order_id);
                }
                TickAction::Amend => naive.amend(op.order_id, op.quantity, op.price, &mut trades),
            }
            i += 1;
        }
        let snap = snaps.next().expect("one snapshot per operation timestamp");
        assert_eq!(snap.timestamp_ns, t);
        let (bids, asks) = naive_levels(&naive);
        assert_eq!(snap.snapshot.bids, bids, "bids at {t}");
        assert_eq!(snap.snapshot.asks, asks, "asks at {t}");
    }
    assert!(snaps.next().is_none());
    // exported operations never cross: the replay produces no trades of its own
    assert!(trades.is_empty());
}

#[test]
fn rate_profile_is_recovered_within_three_standard_errors() {
    let cal = SessionCalendar::parse(&["09:15-09:25"], 20).unwrap();
    let params = ZiParams { alpha: 0.3, mu: 0.06, delta: 0.01, lambda: 0.5, order_size: 1 };
    let mut model = MarketModel::zi(cal.clone(), params, 1, ZiCancelMode::Duration, SyntheticSpec::default().opening_book());
    let mut truth = RateProfile::new(cal.steps_per_minute());
    for (k, m) in cal.minutes().enumerate() {
        truth.set_per_step(m, 0.2 + 0.03 * k as f64, 0.04 + 0.006 * k as f64);
    }
    model.rates = truth.clone();
    let path = simulate(&model, &SeedSet::new(23, 0), cal.steps_per_day(), &recording(), None).unwrap();
    let rec = rebuild(&export_ticks(&path.events, &cal, 0), &cal);
    let est = estimate_rates_from(&rec, &cal).unwrap();
    for m in cal.minutes() {
        let (se_a, se_m) = est.standard_errors[&m];
        let (a, mu) = (est.profile.alpha(m), est.profile.mu(m));
        assert!((a - truth.alpha(m)).abs() < 3.0 * se_a, "minute {m}: alpha {a} vs {} ± {se_a}", truth.alpha(m));
        assert!((mu - truth.mu(m)).abs() < 3.0 * se_m, "minute {m}: mu {mu} vs {} ± {se_m}", truth.mu(m));
    }
}
