//! Minimal dominating set, in two guises.
//!
//! [`MdsFll`] is the direct form: a node is *removable* when every node in
//! its closed neighbourhood stays dominated without it, *addable* when its
//! whole closed neighbourhood is out, and it toggles its membership once it
//! is the highest-id unsatisfied node within distance 3. One rule, one bit
//! of state, at most one move per node — but the guard reads out to
//! distance 5, because judging a distance-3 node's satisfaction needs that
//! node's distance-2 surroundings.
//!
//! The tiebreak window must span distance 3, not 2: a toggle shifts
//! domination facts one hop and unsatisfiedness two hops, so two movers
//! three hops apart can both be top of their distance-2 windows yet race
//! for the same slack. Concretely, an entering node can hand a distance-2
//! bystander a second dominator, newly making it removable; whichever of
//! the bystander and a distance-3 rival fires first then decides the
//! supremum. Distance 3 puts each mover inside the other's window, so the
//! id order serializes them.
//!
//! [`MdsD1`] restates the same algorithm so no guard looks past direct
//! neighbours. Each node caches what the wider guard needs: its lowest- and
//! highest-id dominators (`ldom`/`hdom`, from which a neighbour can tell
//! whether it is anyone's sole dominator), an `uflag` publishing its own
//! unsatisfiedness, `hud1`, the highest-id flagged node it can see, and
//! `hud2`, the highest flag its neighbours can see — reaching the full
//! distance-3 window through two cache layers. Five repair rules keep the
//! caches honest; the toggle fires on the cached facts alone. Stale caches
//! are harmless for the same reason stale reads are: a toggle justified by
//! old information is a move the lattice already allowed, so the run
//! converges to the same supremum as [`MdsFll`] from the same membership
//! start.

use graph_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use algos_ell::membership_init;
use algos_ell::Membership::{self, In, Out};

use crate::{bounded_observed, radius};

/// `In`, or some neighbour is.
fn dominated(g: &Graph, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
    st(i) == In || g.adj(i).iter().any(|&j| st(j) == In)
}

/// Every node in `i`'s closed neighbourhood is dominated even without `i`:
/// it is `In` itself, or some node other than `i` dominates it.
fn removable(g: &Graph, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
    st(i) == In
        && std::iter::once(i).chain(g.adj(i).iter().copied()).all(|j| {
            (j != i && st(j) == In) || g.adj(j).iter().any(|&k| k != i && st(k) == In)
        })
}

/// A dominating set no member of which can be dropped.
fn minimal_dominating(g: &Graph, state: &GlobalState<Membership>) -> bool {
    let st = |j: NodeId| state[j];
    (0..g.n()).all(|i| dominated(g, i, &st))
        && (0..g.n()).filter(|&i| state[i] == In).all(|i| !removable(g, i, &st))
}

/// The direct distance-5 algorithm; see the module docs.
pub struct MdsFll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
    adj3: Vec<Vec<NodeId>>,
}

/// Builds the minimal dominating set algorithm.
pub fn mds_fll_spec(g: Graph) -> MdsFll {
    // The tiebreak judges unsatisfiedness across Adj³, and unsatisfiedness
    // itself reads two hops: distance 5 in total.
    let observed = bounded_observed(&g, 5);
    let adj3 = bounded_observed(&g, 3);
    MdsFll { g, observed, adj3 }
}

impl MdsFll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    fn addable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == Out && self.g.adj(i).iter().all(|&j| st(j) == Out)
    }

    fn unsatisfied(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        removable(&self.g, i, st) || self.addable(i, st)
    }

    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.unsatisfied(i, st)
            && self.adj3[i].iter().all(|&j| j < i || !self.unsatisfied(j, st))
    }

    /// Every node is `In` or has an `In` neighbour.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        let st = |j: NodeId| state[j];
        (0..self.g.n()).all(|i| dominated(&self.g, i, &st))
    }
}

impl Algorithm for MdsFll {
    type State = Membership;

    fn name(&self) -> &str {
        "mds-fll"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["toggle"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        self.observed[i].clone()
    }

    fn read_radius(&self) -> ReadRadius {
        radius(5)
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    fn init(&self, mode: &InitMode<Membership>) -> Result<GlobalState<Membership>, EngineError> {
        membership_init(self.n_nodes(), mode)
    }

    fn guard(&self, i: NodeId, view: &View<Membership>) -> Option<RuleId> {
        let st = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        self.impedensable(i, &st).then_some(0)
    }

    fn action(&self, i: NodeId, _rule: RuleId, view: &View<Membership>) -> MoveEffect<Membership> {
        MoveEffect::own(i, if *view.own() == In { Out } else { In })
    }

    fn state_value(&self, i: NodeId, state: &GlobalState<Membership>) -> Option<u64> {
        let st = |j: NodeId| state[j];
        Some(u64::from(self.unsatisfied(i, &st)))
    }

    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        minimal_dominating(&self.g, state)
    }
}

/// Per-node state of the distance-1 restatement: the membership bit plus
/// four caches of non-local facts. `ldom`/`hdom` are the lowest- and
/// highest-id `In` nodes of the closed neighbourhood (`None` when nobody
/// dominates the node), `uflag` publishes the node's own unsatisfiedness,
/// and `hud1` is the highest-id node in the closed neighbourhood whose
/// `uflag` is raised. When the caches are honest, `ldom ≤ hdom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct MdsD1State {
    pub st: Membership,
    pub ldom: Option<NodeId>,
    pub hdom: Option<NodeId>,
    pub uflag: bool,
    pub hud1: Option<NodeId>,
    pub hud2: Option<NodeId>,
}

impl MdsD1State {
    /// A state with the given membership and all caches empty.
    pub fn quiet(st: Membership) -> Self {
        MdsD1State { st, ldom: None, hdom: None, uflag: false, hud1: None, hud2: None }
    }
}

/// The distance-1 restatement; see the module docs.
pub struct MdsD1 {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
}

/// Builds the distance-1 minimal dominating set algorithm.
pub fn mds_d1_spec(g: Graph) -> MdsD1 {
    let observed = bounded_observed(&g, 1);
    MdsD1 { g, observed }
}

impl MdsD1 {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    /// Closed neighbourhood, `i` included.
    fn closed(&self, i: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::once(i).chain(self.g.adj(i).iter().copied())
    }

    fn hdom_actual(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> Option<NodeId> {
        self.closed(i).filter(|&x| s(x).st == In).max()
    }

    fn ldom_actual(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> Option<NodeId> {
        self.closed(i).filter(|&x| s(x).st == In).min()
    }

    /// Removability judged from the neighbours' dominator caches: everyone
    /// in the closed neighbourhood is `In` themselves or records a dominator
    /// other than `i`. `i`'s own entry works out too: its caches list its
    /// own dominators, so a recorded dominator other than `i` is exactly
    /// what keeps `i` dominated after leaving.
    fn removable_d(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).st == In
            && self.closed(i).all(|j| {
                let other_dom = |d: Option<NodeId>| d.is_some() && d != Some(i);
                (j != i && s(j).st == In) || other_dom(s(j).ldom) || other_dom(s(j).hdom)
            })
    }

    fn addable_d(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).st == Out && self.g.adj(i).iter().all(|&j| s(j).st == Out)
    }

    fn unsatisfied_d(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        self.removable_d(i, s) || self.addable_d(i, s)
    }

    fn hud1_actual(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> Option<NodeId> {
        self.closed(i).filter(|&x| s(x).uflag).max()
    }

    /// The second cache layer: the highest `hud1` in the closed
    /// neighbourhood, i.e. the highest raised flag within two hops — which
    /// is what lets a neighbour's `hud2` witness the full distance-3
    /// tiebreak window.
    fn hud2_actual(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> Option<NodeId> {
        self.closed(i).filter_map(|x| s(x).hud1).max()
    }

    pub fn hdom_outdated(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).hdom != self.hdom_actual(i, s)
    }

    pub fn ldom_outdated(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).ldom != self.ldom_actual(i, s)
    }

    pub fn uflag_outdated(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).uflag != self.unsatisfied_d(i, s)
    }

    pub fn hud1_outdated(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).hud1 != self.hud1_actual(i, s)
    }

    pub fn hud2_outdated(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).hud2 != self.hud2_actual(i, s)
    }

    /// The toggle guard, read entirely off raised flags: `i`'s own flag is
    /// up, no neighbour with a higher id has its flag up, and no neighbour
    /// records a flagged node above `i` — at either cache depth, covering
    /// the whole distance-3 window. A neighbour's `hud1` or `hud2` may name
    /// `i` itself — that is `i`'s own flag reflected back, not a rival.
    fn unsatisfied_impedensable(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        s(i).uflag
            && self.g.adj(i).iter().all(|&j| {
                (!s(j).uflag || j < i)
                    && s(j).hud1.map_or(true, |h| h <= i)
                    && s(j).hud2.map_or(true, |h| h <= i)
            })
    }

    /// Any cache stale, or the toggle enabled.
    pub fn impedensable_d(&self, i: NodeId, s: &impl Fn(NodeId) -> MdsD1State) -> bool {
        self.hdom_outdated(i, s)
            || self.ldom_outdated(i, s)
            || self.uflag_outdated(i, s)
            || self.hud1_outdated(i, s)
            || self.hud2_outdated(i, s)
            || self.unsatisfied_impedensable(i, s)
    }
}

impl Algorithm for MdsD1 {
    type State = MdsD1State;

    fn name(&self) -> &str {
        "mds-d1"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["fix-hdom", "fix-ldom", "fix-uflag", "fix-hud1", "fix-hud2", "toggle"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        self.observed[i].clone()
    }

    fn read_radius(&self) -> ReadRadius {
        radius(1)
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    /// `Canonical` is all-out with empty caches; `Named` accepts `"all-in"`
    /// and `"all-out"` (caches empty); `Random` scrambles everything,
    /// caches included — self-stabilization owes convergence from arbitrary
    /// cache garbage, not just arbitrary membership.
    fn init(&self, mode: &InitMode<MdsD1State>) -> Result<GlobalState<MdsD1State>, EngineError> {
        let n = self.n_nodes();
        let states = match mode {
            InitMode::Canonical => vec![MdsD1State::quiet(Out); n],
            InitMode::Named(name) => match name.as_str() {
                "all-in" => vec![MdsD1State::quiet(In); n],
                "all-out" => vec![MdsD1State::quiet(Out); n],
                other => {
                    return Err(EngineError::InitRejected(format!(
                        "unknown named init {other:?}; have \"all-in\", \"all-out\""
                    )))
                }
            },
            InitMode::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let node_or_none = |rng: &mut ChaCha8Rng| {
                    rng.gen_bool(0.5).then(|| rng.gen_range(0..n))
                };
                (0..n)
                    .map(|_| MdsD1State {
                        st: if rng.gen_bool(0.5) { In } else { Out },
                        ldom: node_or_none(&mut rng),
                        hdom: node_or_none(&mut rng),
                        uflag: rng.gen_bool(0.5),
                        hud1: node_or_none(&mut rng),
                        hud2: node_or_none(&mut rng),
                    })
                    .collect()
            }
            InitMode::Explicit(states) => {
                if states.len() != n {
                    return Err(EngineError::InitRejected(format!(
                        "explicit init has {} states, the graph has {n} nodes",
                        states.len()
                    )));
                }
                if let Some(bad) = states
                    .iter()
                    .flat_map(|s| [s.ldom, s.hdom, s.hud1, s.hud2])
                    .flatten()
                    .find(|&x| x >= n)
                {
                    return Err(EngineError::InitRejected(format!(
                        "cached node id {bad} out of range: the graph has {n} nodes"
                    )));
                }
                states.clone()
            }
        };
        Ok(GlobalState::new(states))
    }

    fn guard(&self, i: NodeId, view: &View<MdsD1State>) -> Option<RuleId> {
        let s = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        if self.hdom_outdated(i, &s) {
            Some(0)
        } else if self.ldom_outdated(i, &s) {
            Some(1)
        } else if self.uflag_outdated(i, &s) {
            Some(2)
        } else if self.hud1_outdated(i, &s) {
            Some(3)
        } else if self.hud2_outdated(i, &s) {
            Some(4)
        } else if self.unsatisfied_impedensable(i, &s) {
            Some(5)
        } else {
            None
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<MdsD1State>) -> MoveEffect<MdsD1State> {
        let s = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        let mut next = *view.own();
        match rule {
            0 => next.hdom = self.hdom_actual(i, &s),
            1 => next.ldom = self.ldom_actual(i, &s),
            2 => next.uflag = self.unsatisfied_d(i, &s),
            3 => next.hud1 = self.hud1_actual(i, &s),
            4 => next.hud2 = self.hud2_actual(i, &s),
            _ => {
                // The toggle settles the node, so its flag comes down in the
                // same move; neighbours never see a toggled node still
                // claiming to be unsatisfied.
                next.st = if next.st == In { Out } else { In };
                next.uflag = false;
            }
        }
        MoveEffect::own(i, next)
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<MdsD1State>) -> Option<u64> {
        None
    }

    fn optimal(&self, state: &GlobalState<MdsD1State>) -> bool {
        let membership = GlobalState::new(state.states.iter().map(|s| s.st).collect());
        minimal_dominating(&self.g, &membership)
    }
}
