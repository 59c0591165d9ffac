//! Maximal independent set.
//!
//! The dual of the cover algorithms: the computed set must grow, not
//! shrink, to become irreducible. Feasibility is independence (no two
//! adjacent `In` nodes), so the corrective rule *removes* an `In` node that
//! sees an `In` neighbour. The descending rule — the lattice-linear one —
//! adds an `Out` node that is *addable* (all neighbours `Out`) and beats
//! every addable neighbour on id, so two adjacent addable nodes never
//! enter together and independence survives any interleaving.

use graph_core::Graph;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::Membership::{self, In, Out};
use crate::{bounded_observed, membership_init, radius};

/// The algorithm; see the module docs.
pub struct MisEll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
}

/// Builds the maximal independent set algorithm.
pub fn mis_ell_spec(g: Graph) -> MisEll {
    // The tiebreak reads neighbours' addability, which reads their
    // neighbours: distance 2.
    let observed = bounded_observed(&g, 2);
    MisEll { g, observed }
}

impl MisEll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    fn addable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.g.adj(i).iter().all(|&j| st(j) == Out)
    }

    fn removable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == In && self.g.adj(i).iter().any(|&j| st(j) == In)
    }

    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == Out
            && self.addable(i, st)
            && self.g.adj(i).iter().all(|&j| j < i || !self.addable(j, st))
    }

    /// No two adjacent nodes are both `In`.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        self.g.edges().iter().all(|&(u, v)| !(state[u].is_in() && state[v].is_in()))
    }
}

impl Algorithm for MisEll {
    type State = Membership;

    fn name(&self) -> &str {
        "mis-ell"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["leave", "enter"]
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
        if self.removable(i, &st) {
            Some(0)
        } else if self.impedensable(i, &st) {
            Some(1)
        } else {
            None
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, _view: &View<Membership>) -> MoveEffect<Membership> {
        MoveEffect::own(i, if rule == 0 { Out } else { In })
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<Membership>) -> Option<u64> {
        None
    }

    /// Independent and maximal: every `Out` node has an `In` neighbour.
    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        self.feasible(state)
            && (0..state.n()).filter(|&i| !state[i].is_in()).all(|i| {
                self.g.adj(i).iter().any(|&j| state[j].is_in())
            })
    }
}
