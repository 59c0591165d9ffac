//! Execution engine for guarded-rule algorithms on fixed node sets.
//!
//! An [`Algorithm`] describes per-node state, guards, and actions; the engine
//! owns everything else: which node evaluates when ([`Scheduler`]), how stale
//! the values it reads may be ([`ReadModel`]), move/round accounting, trace
//! capture, and termination detection. Two runners are provided:
//!
//! * [`run`] / [`run_from`] — deterministic single-threaded simulation. All
//!   scheduling and staleness choices are drawn from a seeded RNG, so a run is
//!   reproducible from `(algorithm, init, config)` alone.
//! * [`concurrent::run_concurrent`] — true multi-threaded execution in which
//!   staleness arises from real interleaving rather than simulation. Nodes
//!   publish to lock-free slots; readers see each slot's writes in order,
//!   which is exactly the monotonic-read guarantee the simulated
//!   [`ReadModel::Amr`] models.
//!
//! The engine never inspects the meaning of node states. It does enforce the
//! mechanical contract every algorithm must honour: actions only write nodes
//! the mover can observe, a fired rule changes something, and two nodes
//! selected in the same synchronous step never write overlapping locations.

mod algorithm;
mod config;
mod sim;
mod trace;

pub mod concurrent;

pub use algorithm::{Algorithm, GlobalState, MoveEffect, NodeId, RuleId, View, ViewEntry};
pub use config::{EngineError, InitMode, ReadModel, ReadRadius, RunConfig, Scheduler, Verdict};
pub use sim::{replay, run, run_from};
pub use trace::{count_rounds, MoveRecord, Trace};
