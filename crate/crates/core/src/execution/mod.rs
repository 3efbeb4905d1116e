//! Meta-order scheduling and the execution agent.

mod agent;
mod schedule;

pub use agent::{ExecutionAgent, ExecutionRecord, Fill, EXECUTION_AGENT_ID};
pub use schedule::{
    build_daily_schedule, build_uniform_schedule, build_vwap_slices, daily_quantities, equal_split, largest_remainder, vwap_bin_weights,
    ExecutionSchedule, MetaOrder, Slice, DEFAULT_VWAP_BIN_STEPS,
};
