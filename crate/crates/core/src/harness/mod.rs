//! Monte Carlo engines and the figure scenario presets.
//!
//! Every trial owns a random stream derived from the master seed and its
//! trial index, trials are folded in fixed-size chunks, and chunk results are
//! merged in index order. Results are therefore identical for any worker
//! count.

pub mod abstract_sim;
pub mod curves;
pub mod detect_sim;
pub mod parallel;
pub mod phy_sim;
pub mod scenarios;
pub mod stats;

pub use abstract_sim::{run_abstract, simulate_slot, SlotResult, ThroughputEstimate};
pub use curves::{CurveSet, Provenance, RunManifest, Series};
pub use detect_sim::{run_detection_curve, DetectionTest};
pub use phy_sim::{run_phy, PhyEstimate, PhyOptions, PreambleKnowledge};
pub use scenarios::{ber_point, run_scenario, throughput_point, Preset};
