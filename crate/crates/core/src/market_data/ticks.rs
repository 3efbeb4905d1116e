use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lob::{OrderId, Price, Qty, Side};

pub const ORDERS_HEADER: &str = "timestamp_ns,order_id,action,side,price,qty";
pub const TRADES_HEADER: &str = "timestamp_ns,price,qty";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TickAction {
    New,
    Amend,
    Cancel,
}

impl TickAction {
    pub fn as_str(self) -> &'static str {
        match self {
            TickAction::New => "NEW",
            TickAction::Amend => "AMEND",
            TickAction::Cancel => "CANCEL",
        }
    }

    pub fn parse(s: &str) -> Option<TickAction> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NEW" | "N" | "ADD" => Some(TickAction::New),
            "AMEND" | "A" | "MODIFY" => Some(TickAction::Amend),
            "CANCEL" | "C" | "DELETE" => Some(TickAction::Cancel),
            _ => None,
        }
    }
}

impl fmt::Display for TickAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One order-book operation. For amends `price`/`quantity` are the new
/// terms; for cancels they are informational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickOperation {
    pub timestamp_ns: u64,
    pub order_id: OrderId,
    pub action: TickAction,
    pub side: Side,
    pub price: Price,
    pub quantity: Qty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradeTick {
    pub timestamp_ns: u64,
    pub price: Price,
    pub quantity: Qty,
}

/// A data row that was skipped, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

/// Parsed records plus the rows that were skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
}

impl<T> Parsed<T> {
    pub fn skipped(&self) -> usize {
        self.errors.len()
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads rows after checking the header; `parse_row` turns the fields of
/// one row into a record or a reason to skip it.
fn read_rows<T, R: Read>(
    reader: R,
    path: &Path,
    header: &str,
    mut parse_row: impl FnMut(&csv::StringRecord) -> std::result::Result<T, String>,
    timestamp: impl Fn(&T) -> u64,
) -> Result<Parsed<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = rdr.records();
    let found = match rows.next() {
        Some(Ok(r)) => r.iter().collect::<Vec<_>>().join(","),
        Some(Err(e)) => return Err(Error::Csv { path: path.into(), message: e.to_string() }),
        None => String::new(),
    };
    if found != header {
        return Err(Error::Schema { path: path.into(), expected: header.into(), found });
    }
    let expected_fields = header.split(',').count();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut last_ts = 0u64;
    for row in rows {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError { line, message: e.to_string() });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != expected_fields {
            errors.push(RowError { line, message: format!("expected {expected_fields} fields, found {}", row.len()) });
            continue;
        }
        match parse_row(&row) {
            Ok(rec) => {
                let ts = timestamp(&rec);
                if ts < last_ts {
                    errors.push(RowError { line, message: format!("timestamp {ts} precedes {last_ts}") });
                    continue;
                }
                last_ts = ts;
                records.push(rec);
            }
            Err(message) => errors.push(RowError { line, message }),
        }
    }
    Ok(Parsed { records, errors })
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, name: &str) -> std::result::Result<T, String> {
    row[i].parse().map_err(|_| format!("invalid {name} `{}`", &row[i]))
}

fn parse_op(row: &csv::StringRecord) -> std::result::Result<TickOperation, String> {
    let timestamp_ns = field(row, 0, "timestamp")?;
    let order_id = field(row, 1, "order id")?;
    let action = TickAction::parse(&row[2]).ok_or_else(|| format!("unknown action `{}`", &row[2]))?;
    let side = Side::parse(&row[3]).ok_or_else(|| format!("unknown side `{}`", &row[3]))?;
    let price: Price = field(row, 4, "price")?;
    let quantity: i64 = field(row, 5, "quantity")?;
    if quantity < 0 || (quantity == 0 && action == TickAction::New) {
        return Err(format!("non-positive quantity {quantity}"));
    }
    if price <= 0 && action != TickAction::Cancel {
        return Err(format!("non-positive price {price}"));
    }
    Ok(TickOperation { timestamp_ns, order_id, action, side, price, quantity: quantity as Qty })
}

fn parse_trade(row: &csv::StringRecord) -> std::result::Result<TradeTick, String> {
    let timestamp_ns = field(row, 0, "timestamp")?;
    let price: Price = field(row, 1, "price")?;
    let quantity: i64 = field(row, 2, "quantity")?;
    if quantity <= 0 {
        return Err(format!("non-positive quantity {quantity}"));
    }
    if price <= 0 {
        return Err(format!("non-positive price {price}"));
    }
    Ok(TradeTick { timestamp_ns, price, quantity: quantity as Qty })
}

/// Parses an orders file (`timestamp_ns,order_id,action,side,price,qty`).
/// Malformed rows and rows whose timestamp goes backwards are skipped and
/// reported; a wrong header is fatal.
pub fn parse_tick_file(path: &Path) -> Result<Parsed<TickOperation>> {
    parse_ticks(open(path)?, path)
}

pub fn parse_ticks<R: Read>(reader: R, path: &Path) -> Result<Parsed<TickOperation>> {
    read_rows(reader, path, ORDERS_HEADER, parse_op, |o| o.timestamp_ns)
}

/// Parses a trades file (`timestamp_ns,price,qty`).
pub fn parse_trade_file(path: &Path) -> Result<Parsed<TradeTick>> {
    parse_trades(open(path)?, path)
}

pub fn parse_trades<R: Read>(reader: R, path: &Path) -> Result<Parsed<TradeTick>> {
    read_rows(reader, path, TRADES_HEADER, parse_trade, |t| t.timestamp_ns)
}

pub fn write_ticks<W: Write>(mut w: W, ops: &[TickOperation]) -> std::io::Result<()> {
    writeln!(w, "{ORDERS_HEADER}")?;
    for o in ops {
        writeln!(w, "{},{},{},{},{},{}", o.timestamp_ns, o.order_id, o.action, o.side, o.price, o.quantity)?;
    }
    Ok(())
}

pub fn write_trades<W: Write>(mut w: W, trades: &[TradeTick]) -> std::io::Result<()> {
    writeln!(w, "{TRADES_HEADER}")?;
    for t in trades {
        writeln!(w, "{},{},{}", t.timestamp_ns, t.price, t.quantity)?;
    }
    Ok(())
}
