//! Minimal vertex cover.
//!
//! Feasibility is edge coverage: every edge has an `In` endpoint, stated
//! per node as "`In`, or all neighbours `In`". The corrective rule enters
//! an `Out` node that sees an uncovered incident edge. The descending rule
//! removes an `In` node that is *removable* — all its neighbours are `In`,
//! so every incident edge stays covered without it — and that beats every
//! removable neighbour on id. Two adjacent removable nodes therefore never
//! leave together, which is exactly what keeps the shared edge covered.

use graph_core::Graph;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::Membership::{self, In, Out};
use crate::{bounded_observed, membership_init, radius};

/// The algorithm; see the module docs.
pub struct MvcEll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
}

/// Builds the minimal vertex cover algorithm.
pub fn mvc_ell_spec(g: Graph) -> MvcEll {
    // The tiebreak reads neighbours' removability, which reads their
    // neighbours: distance 2.
    let observed = bounded_observed(&g, 2);
    MvcEll { g, observed }
}

impl MvcEll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    fn removable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.g.adj(i).iter().all(|&j| st(j) == In)
    }

    fn addable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == Out && self.g.adj(i).iter().any(|&j| st(j) == Out)
    }

    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == In
            && self.removable(i, st)
            && self.g.adj(i).iter().all(|&j| j < i || !self.removable(j, st))
    }

    /// Every edge has an `In` endpoint.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        self.g.edges().iter().all(|&(u, v)| state[u].is_in() || state[v].is_in())
    }
}

impl Algorithm for MvcEll {
    type State = Membership;

    fn name(&self) -> &str {
        "mvc-ell"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["enter", "leave"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        self.observed[i].clone()
    }

    fn read_radius(&self) -> ReadRadius {
        radius(2)
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    fn init(&self, mode: &InitMode<Membership>) -> Result<GlobalState<Membership>, EngineError> {
        membership_init(self.n_nodes(), mode)
    }

    fn guard(&self, i: NodeId, view: &View<Membership>) -> Option<RuleId> {
        let st = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        if self.addable(i, &st) {
            Some(0)
        } else if self.impedensable(i, &st) {
            Some(1)
        } else {
            None
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, _view: &View<Membership>) -> MoveEffect<Membership> {
        MoveEffect::own(i, if rule == 0 { In } else { Out })
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<Membership>) -> Option<u64> {
        None
    }

    /// A vertex cover from which no single node can be dropped: every `In`
    /// node has an `Out` neighbour (so removing it would uncover that edge),
    /// and isolated nodes are `Out`.
    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        self.feasible(state)
            && (0..state.n()).filter(|&i| state[i].is_in()).all(|i| {
                self.g.adj(i).iter().any(|&j| !state[j].is_in())
            })
    }
}
