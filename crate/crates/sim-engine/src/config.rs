//! Run configuration: schedulers, read models, init modes, verdicts, errors.

use thiserror::Error;

/// Who gets to evaluate guards at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduler {
    /// One node per step, chosen uniformly at random; reads are fresh.
    Central,
    /// A random non-empty subset per step, all evaluating the same pre-state;
    /// reads are fresh.
    Distributed,
    /// Every node every step, all evaluating the same pre-state; reads are
    /// fresh. One step is exactly one round.
    Synchronous,
    /// One node per step, chosen uniformly at random; reads are sampled from
    /// publication history according to the read model.
    Async,
}

impl Scheduler {
    /// `true` for the schedulers whose reads are always fresh.
    pub fn is_fresh_only(self) -> bool {
        !matches!(self, Scheduler::Async)
    }
}

impl std::fmt::Display for Scheduler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheduler::Central => "central",
            Scheduler::Distributed => "distributed",
            Scheduler::Synchronous => "synchronous",
            Scheduler::Async => "async",
        })
    }
}

/// How stale the values a node reads may be. A node always sees its own state
/// current; the model constrains reads of *other* nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadModel {
    /// Every read returns the latest published value.
    Fresh,
    /// Arbitrarily old values: each read independently samples any retained
    /// version, with no ordering between successive reads.
    Aa,
    /// Monotonic reads: successive reads by the same reader of the same
    /// publisher never go backward in the publisher's write order.
    Amr,
}

impl std::fmt::Display for ReadModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReadModel::Fresh => "fresh",
            ReadModel::Aa => "aa",
            ReadModel::Amr => "amr",
        })
    }
}

/// How far a node's guard and action look. Purely declarative: the engine
/// uses it to validate [`Algorithm::observed`](crate::Algorithm::observed)
/// sets in debug assertions and tooling reports it, but views are always
/// built from `observed` directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadRadius {
    /// Reads confined to the distance-`x` neighbourhood.
    Bounded(usize),
    /// Reads may touch every node (used by algorithms with global tiebreaks).
    Global,
}

impl std::fmt::Display for ReadRadius {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadRadius::Bounded(x) => write!(f, "{x}"),
            ReadRadius::Global => f.write_str("global"),
        }
    }
}

/// How the initial global state is produced.
///
/// `Canonical` is the algorithm's designated start (the one its guarantees
/// are stated from, e.g. "all out" or "all distances infinite"). `Named`
/// selects an algorithm-specific alternative by label. `Random` draws each
/// node's state from the algorithm's state domain. `Explicit` supplies the
/// full state vector; algorithms validate it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitMode<S> {
    Canonical,
    Named(String),
    Random(u64),
    Explicit(Vec<S>),
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No guard holds anywhere under fresh reads: the run is silent.
    Silent,
    /// The move cap was reached first.
    Capped,
}

/// Everything a run needs besides the algorithm and the initial state.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scheduler: Scheduler,
    pub model: ReadModel,
    /// Retained history depth: a read can lag at most this many writes behind.
    pub stale_max: usize,
    /// Seed for every random choice the run makes.
    pub seed: u64,
    /// Hard stop: a run that fires this many moves is reported [`Verdict::Capped`].
    pub move_cap: u64,
}

impl RunConfig {
    /// A fresh-read configuration for the given scheduler.
    pub fn fresh(scheduler: Scheduler, seed: u64, move_cap: u64) -> Self {
        RunConfig { scheduler, model: ReadModel::Fresh, stale_max: 0, seed, move_cap }
    }

    /// An async configuration reading under `model` with the given history depth.
    pub fn stale(model: ReadModel, stale_max: usize, seed: u64, move_cap: u64) -> Self {
        RunConfig { scheduler: Scheduler::Async, model, stale_max, seed, move_cap }
    }

    /// Checks scheduler/model compatibility: the synchronous, central, and
    /// distributed schedulers are defined over fresh reads only, while the
    /// async scheduler exists precisely to exercise stale ones.
    pub fn validate(&self) -> Result<(), EngineError> {
        match (self.scheduler, self.model) {
            (Scheduler::Async, ReadModel::Fresh) => Err(EngineError::IncompatibleConfig(
                "async scheduler requires a stale read model (amr or aa); use stale-max 0 under amr for fresh-equivalent reads".into(),
            )),
            (Scheduler::Async, _) => Ok(()),
            (_, ReadModel::Fresh) => Ok(()),
            (s, m) => Err(EngineError::IncompatibleConfig(format!(
                "{s} scheduler reads fresh values only (got model {m})"
            ))),
        }
    }
}

/// Engine-level failures.
#[derive(Debug, Error)]
pub enum EngineError {
    /// The algorithm rejected the requested initial state.
    #[error("initial state rejected: {0}")]
    InitRejected(String),
    /// Scheduler and read model cannot be combined.
    #[error("incompatible configuration: {0}")]
    IncompatibleConfig(String),
    /// An algorithm broke the mechanical rules the engine enforces.
    #[error("contract violation at node {node}: {detail}")]
    ContractViolation { node: usize, detail: String },
    /// The concurrent runner was asked to execute an algorithm it cannot.
    #[error("concurrent execution unsupported: {0}")]
    ConcurrentUnsupported(String),
}
