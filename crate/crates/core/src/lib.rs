//! Simulation and analytical models for 2-step (grant-free) random access
//! where active devices follow their preamble with a data packet, carried
//! either in orthogonal TDMA blocks or as CDMA-spread signals separated by
//! multiuser detection.

pub mod access;
pub mod analytics;
pub mod config;
pub mod detection;
pub mod error;
pub mod harness;
pub mod phy;
pub mod sequences;
pub mod special;

pub use config::{Activity, Detector, Mode, Rounding, SystemConfig};
pub use error::{Error, Result};
