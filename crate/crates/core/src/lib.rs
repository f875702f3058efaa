//! Multi-access DCSK link simulator with cooperative relaying over Nakagami-m
//! fading, and the matching exact and closed-form BER analysis.

pub mod analytic;
pub mod channel;
pub mod chaos;
pub mod cli;
pub mod error;
pub mod modem;
pub mod montecarlo;
pub mod rng;
pub mod spreading;
pub mod system;

pub use error::{Error, Result};
