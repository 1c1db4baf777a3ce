pub mod adapt;
pub mod channel;
pub mod config;
pub mod error;
pub mod netsim;
pub mod phy;
pub mod reproduce;
pub mod rng;
pub mod tissue;
pub mod wavefield;

pub use error::{Error, Result};
