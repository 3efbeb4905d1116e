//! Continuous double auction with price-time priority and L2 market data.

mod book;
mod event;
mod order;
mod snapshot;

pub use book::{AmendOutcome, BookSide, CancelOutcome, OrderBook, RestingOrder, SubmitOutcome, SubmitStatus};
pub use event::{write_event_log, Event, EventKind, RejectReason, EVENT_LOG_HEADER};
pub use order::{round_to_tick, AgentId, Order, OrderId, OrderKind, Price, Qty, Side, Step, Trade};
pub use snapshot::{L2Snapshot, TopOfBook, L2_DEPTH};
