//! Historical tick data: parsing, order-book reconstruction, extraction of
//! limit and market order records, and export of simulated days in the
//! same format.

mod export;
mod rebuild;
mod ticks;

pub use export::{export_ticks, TickExport};
pub use rebuild::{
    infer_aggressor, rebuild_book, write_l2_csv, write_limit_orders, write_market_orders, HistoricalLimitOrder, HistoricalMarketOrder,
    L2Record, Reconstruction, LIMIT_ORDERS_HEADER, MARKET_ORDERS_HEADER,
};
pub use ticks::{
    parse_tick_file, parse_ticks, parse_trade_file, parse_trades, write_ticks, write_trades, Parsed, RowError, TickAction, TickOperation,
    TradeTick, ORDERS_HEADER, TRADES_HEADER,
};
