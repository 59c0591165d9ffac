//! The algorithm abstraction: per-node state, guarded rules, local views.

use crate::config::{EngineError, InitMode, ReadModel, ReadRadius};

/// Nodes are identified by dense indices `0..n`. The index doubles as the
/// node's unique id wherever an algorithm breaks ties by id.
pub type NodeId = usize;

/// Index into an algorithm's rule list (see [`Algorithm::rules`]).
pub type RuleId = usize;

/// A complete assignment of states to nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct GlobalState<S> {
    pub states: Vec<S>,
}

impl<S> GlobalState<S> {
    pub fn new(states: Vec<S>) -> Self {
        GlobalState { states }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }
}

impl<S> std::ops::Index<NodeId> for GlobalState<S> {
    type Output = S;
    fn index(&self, i: NodeId) -> &S {
        &self.states[i]
    }
}

impl<S> std::ops::IndexMut<NodeId> for GlobalState<S> {
    fn index_mut(&mut self, i: NodeId) -> &mut S {
        &mut self.states[i]
    }
}

/// One observed node inside a [`View`].
#[derive(Debug, Clone)]
pub struct ViewEntry<S> {
    pub node: NodeId,
    pub state: S,
    /// How many of the node's writes the reader is behind: 0 is the latest
    /// published value, 1 the one before it, and so on.
    pub lag: u64,
}

/// What a node sees when it evaluates its guards: its own state (always
/// current) plus a possibly stale snapshot of every node it observes.
///
/// Guards and actions read other nodes exclusively through [`View::get`];
/// asking for a node outside the observed set is a programming error in the
/// algorithm and panics, which keeps "reads within the declared radius"
/// structurally true rather than merely asserted.
#[derive(Debug, Clone)]
pub struct View<S> {
    me: NodeId,
    own: S,
    /// Sorted by node id for binary-search lookup.
    entries: Vec<ViewEntry<S>>,
}

impl<S: Clone> View<S> {
    /// Builds a view from an explicit entry list. Entries need not be sorted.
    pub fn new(me: NodeId, own: S, mut entries: Vec<ViewEntry<S>>) -> Self {
        entries.sort_by_key(|e| e.node);
        debug_assert!(entries.windows(2).all(|w| w[0].node < w[1].node));
        debug_assert!(entries.iter().all(|e| e.node != me));
        View { me, own, entries }
    }

    /// A fully fresh view of `state` for node `me` observing `observed`.
    pub fn fresh(me: NodeId, state: &GlobalState<S>, observed: &[NodeId]) -> Self {
        let entries = observed
            .iter()
            .map(|&j| ViewEntry { node: j, state: state[j].clone(), lag: 0 })
            .collect();
        View::new(me, state[me].clone(), entries)
    }

    /// The evaluating node's id.
    pub fn me(&self) -> NodeId {
        self.me
    }

    /// The evaluating node's own (always current) state.
    pub fn own(&self) -> &S {
        &self.own
    }

    /// The snapshot of node `j`. Panics if `j` is not observed by this view's
    /// owner — that would be a read outside the algorithm's declared radius.
    pub fn get(&self, j: NodeId) -> &S {
        match self.entries.binary_search_by_key(&j, |e| e.node) {
            Ok(k) => &self.entries[k].state,
            Err(_) => panic!(
                "node {} read node {}, which is outside its observed set",
                self.me, j
            ),
        }
    }

    /// All observed entries, sorted by node id.
    pub fn entries(&self) -> &[ViewEntry<S>] {
        &self.entries
    }

    /// `(node, lag)` for every observed node whose snapshot is stale.
    pub fn stale_reads(&self) -> Vec<(NodeId, u64)> {
        self.entries
            .iter()
            .filter(|e| e.lag > 0)
            .map(|e| (e.node, e.lag))
            .collect()
    }
}

/// The write set a fired rule produces: new states for one or more nodes.
///
/// Most rules write only the mover (`MoveEffect::own`); algorithms whose
/// rules atomically rewrite a neighbourhood list every affected node. Every
/// target must lie in the mover's observed set (or be the mover itself), and
/// at least one write must change a state.
#[derive(Debug, Clone)]
pub struct MoveEffect<S> {
    pub writes: Vec<(NodeId, S)>,
}

impl<S> MoveEffect<S> {
    /// An effect that rewrites only the mover's own state.
    pub fn own(me: NodeId, state: S) -> Self {
        MoveEffect { writes: vec![(me, state)] }
    }

    /// An effect over an explicit write set.
    pub fn multi(writes: Vec<(NodeId, S)>) -> Self {
        MoveEffect { writes }
    }
}

/// A guarded-rule algorithm over a fixed set of nodes.
///
/// Node state is opaque to the engine. Each node repeatedly evaluates its
/// guards against a [`View`]; [`Algorithm::guard`] returns the first enabled
/// rule (in the order of [`Algorithm::rules`]) or `None` when the node is
/// content, and [`Algorithm::action`] produces the corresponding write set.
/// Rule selection must be a pure function of the view, and the action must be
/// a pure function of the view and rule — the engine replays traces to check
/// exactly that.
pub trait Algorithm: Send + Sync {
    type State: Clone + Eq + std::hash::Hash + std::fmt::Debug + serde::Serialize + Send + Sync;

    /// Short machine-friendly name (used in traces and stats).
    fn name(&self) -> &str;

    /// Number of nodes.
    fn n_nodes(&self) -> usize;

    /// Human-readable rule names; a [`RuleId`] indexes this slice.
    fn rules(&self) -> &[&str];

    /// The nodes whose published state node `i` may consult, excluding `i`
    /// itself. Views are built from exactly this set.
    fn observed(&self, i: NodeId) -> Vec<NodeId>;

    /// Declared read radius (see [`ReadRadius`]).
    fn read_radius(&self) -> ReadRadius;

    /// The weakest read model under which the algorithm claims convergence:
    /// [`ReadModel::Aa`] tolerates arbitrarily stale reads, [`ReadModel::Amr`]
    /// requires monotonic reads, [`ReadModel::Fresh`] claims nothing beyond
    /// synchronized execution.
    fn claimed_model(&self) -> ReadModel;

    /// Whether any rule writes nodes other than the mover.
    fn complex_actions(&self) -> bool {
        false
    }

    /// Produces an initial global state for the given mode. Algorithms whose
    /// guarantees only hold from their canonical start reject other modes
    /// with [`EngineError::InitRejected`].
    fn init(&self, mode: &InitMode<Self::State>) -> Result<GlobalState<Self::State>, EngineError>;

    /// First enabled rule for node `i` under `view`, or `None`.
    fn guard(&self, i: NodeId, view: &View<Self::State>) -> Option<RuleId>;

    /// Write set for firing `rule` at node `i` under `view`. Only called with
    /// the rule that `guard` returned for an identical view.
    fn action(&self, i: NodeId, rule: RuleId, view: &View<Self::State>) -> MoveEffect<Self::State>;

    /// Distance of node `i`'s state from its contribution to an optimal
    /// terminal state, if the algorithm defines one. `Some(0)` everywhere
    /// must coincide with a satisfied node set.
    fn state_value(&self, i: NodeId, state: &GlobalState<Self::State>) -> Option<u64>;

    /// Global rank: total remaining distance from optimality. Defaults to the
    /// sum of per-node state values; `None` if any node declines to report.
    fn rank(&self, state: &GlobalState<Self::State>) -> Option<u64> {
        let mut sum = 0u64;
        for i in 0..self.n_nodes() {
            sum += self.state_value(i, state)?;
        }
        Some(sum)
    }

    /// Whether `state` is an acceptable terminal state (feasible and, where
    /// the algorithm promises it, irreducible/optimal).
    fn optimal(&self, state: &GlobalState<Self::State>) -> bool;
}
