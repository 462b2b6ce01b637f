//! Simulation and analysis of pulse-coupled oscillator networks under a
//! stochastic binary vertex-triggering resetting rule.
//!
//! * [`graph`]: simple digraphs, generators, roots and BFS depth layers.
//! * [`feasible`]: feasible subgraphs as bit masks, their probabilities,
//!   and synchronization strings.
//! * [`engine`]: the hybrid flow/jump simulator.
//! * [`analysis`]: the Lyapunov function, synchronization checks, window
//!   jump counts and the sync-time tail bound.
//! * [`stringcheck`]: deterministic replay of a synchronization string.
//! * [`montecarlo`]: seeded batch campaigns.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod feasible;
pub mod graph;
pub mod montecarlo;
pub mod rng;
pub mod stringcheck;

pub use analysis::{is_sync, lyapunov_v, partial_depth, tail_bound, BoundReport};
pub use engine::{
    simulate, HybridArc, InitialPhases, JumpEvent, PhaseVector, SimConfig, StopConditions, TiePolicy,
    TriggerModel, UpdateRule,
};
pub use error::{Error, Result};
pub use feasible::{GraphSequence, TriggerMask};
pub use graph::{generate, DepthPartition, Digraph, GraphKind};
