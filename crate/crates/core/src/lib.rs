pub mod agents;
pub mod calibration;
pub mod error;
pub mod execution;
pub mod lob;
pub mod market_data;
pub mod risk;
pub mod rng;
pub mod session;
pub mod sim;
pub mod synthetic;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
