//! Simulation and optimization of multi-tier LiFi attocell super cells with
//! multi-hop optical backhaul.

pub mod bbo;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod power;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod scheduler;
pub mod topology;

pub use config::SystemConfig;
pub use error::{Error, Result};
