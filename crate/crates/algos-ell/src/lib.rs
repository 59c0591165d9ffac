//! Eventually lattice-linear self-stabilizing algorithms over node sets.
//!
//! Every algorithm here runs in two phases. A *corrective* phase repairs
//! feasibility: it is not lattice-linear, but it only ever pushes the system
//! towards a feasible state (a valid dominating set, vertex cover,
//! independent set, proper colouring, …) and gets there within one round of
//! guard evaluations (for the colouring it takes at most one move per edge
//! endpoint). A *descending* phase then walks from the feasible state to an
//! irreducible one, and that phase is lattice-linear: at every step the set
//! of nodes that must move is uniquely determined, so the runs from a fixed
//! feasible state form a lattice and stale (monotonically refreshed) reads
//! cannot drive the system off it.
//!
//! The split shows up in each algorithm as one *corrective* rule (enter the
//! set / bump a conflicted colour) and one *descending* rule guarded by an
//! `impedensable` predicate: the node is locally reducible and wins an id
//! tiebreak against every other reducible node that could invalidate its
//! reasoning. The tiebreak is what makes simultaneous or stale-informed
//! moves harmless.
//!
//! The algorithms:
//!
//! * [`sdmds_ell_spec`] — service-demand minimal dominating set: each node
//!   has a demand set and a service set; a node is dominated when every
//!   demand is provided by some `IN` neighbour (or it is `IN` itself).
//! * [`mvc_ell_spec`] — minimal vertex cover.
//! * [`mis_ell_spec`] — maximal independent set.
//! * [`gc_ell_spec`] — irreducible graph colouring (its tiebreak is global,
//!   so its declared read radius is [`ReadRadius::Global`]).
//! * [`twods_ell_spec`] — 2-minimal dominating set, where even swapping two
//!   set members for one outsider must be impossible; its exchange rule
//!   atomically writes three nodes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{EngineError, GlobalState, InitMode, NodeId, ReadRadius};

mod gc;
mod mis;
mod mvc;
mod sdmds;
mod twods;

pub use gc::{gc_ell_spec, GcEll};
pub use mis::{mis_ell_spec, MisEll};
pub use mvc::{mvc_ell_spec, MvcEll};
pub use sdmds::{sdmds_ell_spec, SdmdsEll, SdmdsInput};
pub use twods::{twods_ell_spec, TwoDsEll};

/// Errors for the symbol-table inputs consumed by [`SdmdsInput`].
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("node {node} listed more than once")]
    Duplicate { node: NodeId },
    #[error("node {node} out of range: the graph has {n} nodes")]
    OutOfRange { node: NodeId, n: usize },
    #[error("{what} covers {got} nodes, the graph has {n}")]
    WrongLength { what: &'static str, got: usize, n: usize },
}

/// Whether a node currently belongs to the set being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Membership {
    In,
    Out,
}

impl Membership {
    pub fn is_in(self) -> bool {
        self == Membership::In
    }
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Membership::In => "IN",
            Membership::Out => "OUT",
        })
    }
}

/// The nodes that are `In` under `state`, ascending.
pub fn in_set(state: &GlobalState<Membership>) -> Vec<NodeId> {
    (0..state.n()).filter(|&i| state[i].is_in()).collect()
}

/// Initial states for the `{IN, OUT}` algorithms. Self-stabilization makes
/// every assignment a legal start: `Canonical` is all-`Out`, `Named`
/// supports `"all-in"` and `"all-out"`, `Random` flips a fair coin per node,
/// and `Explicit` accepts any assignment of the right length.
pub fn membership_init(
    n: usize,
    mode: &InitMode<Membership>,
) -> Result<GlobalState<Membership>, EngineError> {
    use Membership::{In, Out};
    let states = match mode {
        InitMode::Canonical => vec![Out; n],
        InitMode::Named(name) => match name.as_str() {
            "all-in" => vec![In; n],
            "all-out" => vec![Out; n],
            other => {
                return Err(EngineError::InitRejected(format!(
                    "unknown named init {other:?}; have \"all-in\", \"all-out\""
                )))
            }
        },
        InitMode::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n).map(|_| if rng.gen_bool(0.5) { In } else { Out }).collect()
        }
        InitMode::Explicit(states) => {
            if states.len() != n {
                return Err(EngineError::InitRejected(format!(
                    "explicit init has {} states, the graph has {n} nodes",
                    states.len()
                )));
            }
            states.clone()
        }
    };
    Ok(GlobalState::new(states))
}

/// Observed sets for a bounded read radius: `Adj^r_i` per node.
fn bounded_observed(g: &graph_core::Graph, r: usize) -> Vec<Vec<NodeId>> {
    (0..g.n()).map(|i| g.adj_within(i, r)).collect()
}

/// Observed set for a global read radius: everyone but the node itself.
fn global_observed(n: usize, i: NodeId) -> Vec<NodeId> {
    (0..n).filter(|&j| j != i).collect()
}

/// Radius helper shared by the binary-set algorithms.
fn radius(r: usize) -> ReadRadius {
    ReadRadius::Bounded(r)
}
