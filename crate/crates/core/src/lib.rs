//! Two-timescale software-defined resource allocation for small-cell
//! networks with an in-band wireless fronthaul.
//!
//! A central controller estimates the network state distribution from
//! per-BS reports, solves a convex program whose optimum is a coarse
//! correlated equilibrium (CCE) of the pessimistic rate game, and sends
//! sampled state-to-action mapping rules back to the base stations. Each BS
//! then schedules its users slot by slot with a drift-plus-penalty
//! water-filling rule restricted to the recommended sub-carriers.
//!
//! Module map:
//!
//! - [`channel`]: path loss, quantized block fading.
//! - [`fronthaul`]: upload/download time cost and overhead quantization.
//! - [`game`]: state/action spaces, rate and utility tables.
//! - [`equilibrium`]: the controller's program, CCE verification, epsilon bound.
//! - [`controller`]: report aggregation, re-solve policy, mapping rules.
//! - [`scheduler`]: per-slot water-filling, queues, empirical estimators.
//! - [`sim`]: the slot/frame loop and metrics.
//! - [`experiment`]: config files, sweeps, CSV output.

pub mod channel;
pub mod controller;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod fronthaul;
pub mod game;
pub mod par;
pub mod scheduler;
pub mod sim;

pub use error::{Error, Result};
