use serde::{Deserialize, Serialize};

use super::schedule::ExecutionSchedule;
use crate::lob::{AgentId, Order, OrderBook, OrderId, Price, Qty, Side, Step, SubmitStatus, Trade};

/// Agent id reserved for the execution agent.
pub const EXECUTION_AGENT_ID: AgentId = AgentId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub step: Step,
    pub price: Price,
    pub quantity: Qty,
}

/// Fills and unexecuted residual of one meta-order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub strategy_id: String,
    pub side: Side,
    pub target: Qty,
    pub fills: Vec<Fill>,
    pub residual: Qty,
    /// Mid price observed when the meta-order starts.
    pub reference_mid: Option<f64>,
}

impl ExecutionRecord {
    pub fn new(schedule: &ExecutionSchedule) -> Self {
        ExecutionRecord {
            strategy_id: schedule.strategy_id.clone(),
            side: schedule.side,
            target: schedule.total_quantity(),
            fills: Vec::new(),
            residual: 0,
            reference_mid: None,
        }
    }

    pub fn executed(&self) -> Qty {
        self.fills.iter().map(|f| f.quantity).sum()
    }

    /// Executed share of the scheduled quantity; 1 for an empty schedule.
    pub fn executed_fraction(&self) -> f64 {
        if self.target == 0 {
            1.0
        } else {
            self.executed() as f64 / self.target as f64
        }
    }

    pub fn vwap(&self) -> Option<f64> {
        let q = self.executed();
        (q > 0).then(|| self.fills.iter().map(|f| f.price as f64 * f.quantity as f64).sum::<f64>() / q as f64)
    }
}

/// Submits each due slice as a market order and logs its fills. Whatever
/// a slice cannot fill is added to the residual.
#[derive(Debug, Clone)]
pub struct ExecutionAgent<'a> {
    schedule: &'a ExecutionSchedule,
    next: usize,
    record: ExecutionRecord,
}

impl<'a> ExecutionAgent<'a> {
    pub fn new(schedule: &'a ExecutionSchedule) -> Self {
        ExecutionAgent { schedule, next: 0, record: ExecutionRecord::new(schedule) }
    }

    /// Acts at `step`. `prev_mid` is the mid at the end of the previous
    /// step, used as the reference price when the meta-order starts.
    pub fn act(&mut self, step: Step, prev_mid: Option<f64>, book: &mut OrderBook, next_order_id: &mut OrderId, trades: &mut Vec<Trade>) {
        if step >= self.schedule.start_step && self.record.reference_mid.is_none() {
            self.record.reference_mid = prev_mid;
        }
        while let Some(slice) = self.schedule.slices.get(self.next) {
            if slice.step > step {
                break;
            }
            self.next += 1;
            let id = *next_order_id;
            *next_order_id += 1;
            let first = trades.len();
            let order = Order::market(id, EXECUTION_AGENT_ID, self.schedule.side, slice.quantity, step);
            match book.submit_into(order, trades) {
                SubmitStatus::Accepted { cancelled, .. } => {
                    self.record.residual += cancelled;
                    for t in &trades[first..] {
                        self.record.fills.push(Fill { step, price: t.price, quantity: t.quantity });
                    }
                }
                SubmitStatus::Rejected(_) => self.record.residual += slice.quantity,
            }
        }
    }

    pub fn record(&self) -> &ExecutionRecord {
        &self.record
    }

    pub fn into_record(self) -> ExecutionRecord {
        self.record
    }
}
