//! Outage analysis and Monte Carlo simulation of LR-FHSS direct-to-satellite
//! uplinks, with and without device-to-device cooperation.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod mcsim;
pub mod netcode;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod specfun;

pub use error::{Error, Result};
pub use report::{LossBreakdown, OutageReport};
pub use scenario::{D2dSettings, Population, Scenario};
