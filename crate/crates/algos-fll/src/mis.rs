//! Maximal independent set, the dual of the vertex-cover construction.
//!
//! A member with a member neighbour has to go; an outsider whose whole
//! neighbourhood is out can come in. The hazard mirrors the cover case: a
//! node leaving the set can free a neighbour to enter, and that entry must
//! not wait its turn behind the ID order or the leaver's exit was pointless.
//! So the leaver pulls a jointly-addable set of freed neighbours into the
//! set within the same atomic move, and the tiebreak spans distance 3 so
//! that two such compound moves never touch the same edge.

use graph_core::Graph;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use algos_ell::membership_init;
use algos_ell::Membership::{self, In, Out};

use crate::{bounded_observed, radius};

/// The algorithm; see the module docs.
pub struct MisFll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
    adj3: Vec<Vec<NodeId>>,
}

/// Builds the maximal independent set algorithm.
pub fn mis_fll_spec(g: Graph) -> MisFll {
    // The tiebreak judges unsatisfiedness across Adj³, and unsatisfiedness
    // reads direct neighbours: distance 4 in total.
    let observed = bounded_observed(&g, 4);
    let adj3 = bounded_observed(&g, 3);
    MisFll { g, observed, adj3 }
}

impl MisFll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    /// In the set next to another member: independence is broken at `i`.
    fn removable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == In && self.g.adj(i).iter().any(|&j| st(j) == In)
    }

    /// Out of the set with nobody adjacent in it.
    fn addable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == Out && self.g.adj(i).iter().all(|&j| st(j) == Out)
    }

    fn unsatisfied(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.removable(i, st) || self.addable(i, st)
    }

    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.unsatisfied(i, st)
            && self.adj3[i].iter().all(|&j| j < i || !self.unsatisfied(j, st))
    }

    /// Would `j` be clear to enter once `i` has left? `j`'s own read of the
    /// world, with `i` counted as out.
    fn addable_after(&self, j: NodeId, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(j) == Out && self.g.adj(j).iter().all(|&k| k == i || st(k) == Out)
    }

    /// No edge joins two members.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        self.g.edges().iter().all(|&(u, v)| state[u] == Out || state[v] == Out)
    }
}

impl Algorithm for MisFll {
    type State = Membership;

    fn name(&self) -> &str {
        "mis-fll"
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
        radius(4)
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    fn complex_actions(&self) -> bool {
        true
    }

    fn init(&self, mode: &InitMode<Membership>) -> Result<GlobalState<Membership>, EngineError> {
        membership_init(self.n_nodes(), mode)
    }

    fn guard(&self, i: NodeId, view: &View<Membership>) -> Option<RuleId> {
        let st = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        if !self.impedensable(i, &st) {
            None
        } else if self.removable(i, &st) {
            Some(0)
        } else {
            Some(1)
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<Membership>) -> MoveEffect<Membership> {
        if rule == 1 {
            return MoveEffect::own(i, In);
        }
        let st = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        // Each candidate is judged clear-to-enter with everyone else staying
        // put, so two adjacent candidates each count on the other remaining
        // out — pulling both would put an edge inside the set. The pulls
        // taken are a jointly-addable subset: highest id first, skipping
        // anyone adjacent to a node already pulled. A skipped candidate is
        // left satisfied too, because the pulled neighbour's entry ends its
        // eligibility.
        let mut writes = vec![(i, Out)];
        let mut pulled: Vec<NodeId> = Vec::new();
        for &j in self.g.adj(i).iter().rev() {
            if self.addable_after(j, i, &st)
                && !self.g.adj(j).iter().any(|k| pulled.contains(k))
            {
                pulled.push(j);
                writes.push((j, In));
            }
        }
        MoveEffect::multi(writes)
    }

    fn state_value(&self, i: NodeId, state: &GlobalState<Membership>) -> Option<u64> {
        let st = |j: NodeId| state[j];
        Some(u64::from(self.unsatisfied(i, &st)))
    }

    /// Independent and unextendable.
    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        let st = |j: NodeId| state[j];
        (0..state.n()).all(|i| !self.unsatisfied(i, &st))
    }
}
