//! Simulation-based transit network design.
//!
//! The crate is organised around three layers:
//!
//! * [`network`] / [`paths`] — a multilayer transit graph (origin/destination,
//!   station and line nodes) with static and time-dependent shortest-path
//!   queries over it.
//! * [`sim`] — a discrete-event loading of passengers and vehicles on that
//!   graph, with FIFO boarding and hard vehicle capacities, producing
//!   per-passenger generalized-cost records.
//! * [`equilibrium`] / [`design`] — day-to-day solvers (cross-entropy
//!   learning and the method of successive averages) that drive the simulated
//!   flows towards dynamic user equilibrium, and a derivative-free pattern
//!   search over line frequencies on top of them.
//!
//! [`scenario`] and [`report`] hold the text scenario format and the CSV
//! report writers used by the command-line frontend.

pub mod cost;
pub mod design;
pub mod equilibrium;
pub mod error;
pub mod network;
pub mod paths;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod time;

pub use cost::{generalized_cost, schedule_penalty, CostComponents, CostParams};
pub use error::{Error, Result};
pub use network::{
    Arc, ArcKind, FrequencyVector, LineSpec, Mode, Node, NodeKind, TransitNetwork,
};
pub use paths::{k_shortest_paths, time_dependent_shortest_path, LinkTimeTable, TransitPath};
pub use scenario::{parse_scenario, Problem, Scenario};
pub use sim::{simulate, AssignmentState, LineNodeLog, PassengerRecord, SimOutput};
pub use time::{Horizon, TimeMs};
