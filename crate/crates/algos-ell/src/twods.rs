//! 2-minimal dominating set.
//!
//! A dominating set that is minimal *and* admits no 1-for-2 exchange:
//! there must be no outsider `i` and members `j, k` such that swapping
//! `{j, k}` out and `i` in leaves everything dominated. Reaching that
//! stronger optimum takes three phases — enter while undominated, shed
//! removable members, then perform the exchanges — and the exchange is a
//! single *complex* move: the winning node atomically writes all three
//! states, which is what the simulation's multi-write effects model. (A
//! single-writer version would need extra handshake variables and loses
//! clean self-stabilization, so it stays out of scope.)
//!
//! An exchange candidate must first see its whole distance-2 neighbourhood
//! quiet (nobody addable or removable), so exchanges never race the earlier
//! phases; the id tiebreak then spans distance 4, which covers any two
//! exchanges whose write sets could touch.

use graph_core::Graph;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::Membership::{self, In, Out};
use crate::{bounded_observed, membership_init, radius};

/// The algorithm; see the module docs.
pub struct TwoDsEll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
    adj2: Vec<Vec<NodeId>>,
    adj4: Vec<Vec<NodeId>>,
}

/// Builds the 2-minimal dominating set algorithm.
pub fn twods_ell_spec(g: Graph) -> TwoDsEll {
    // The tiebreak reads whether distance-4 neighbours are unsatisfied, and
    // their exchange checks read 4 hops beyond them.
    let observed = bounded_observed(&g, 8);
    let adj2 = bounded_observed(&g, 2);
    let adj4 = bounded_observed(&g, 4);
    TwoDsEll { g, observed, adj2, adj4 }
}

impl TwoDsEll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    fn addable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == Out && self.g.adj(i).iter().all(|&j| st(j) == Out)
    }

    /// Everyone in `N[i]` stays dominated if `i` leaves.
    fn removable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == In
            && std::iter::once(i).chain(self.g.adj(i).iter().copied()).all(|j| {
                (j != i && st(j) == In)
                    || self.g.adj(j).iter().any(|&k| k != i && st(k) == In)
            })
    }

    /// Whether swapping `j, k` out and `i` in keeps everyone whose cover the
    /// swap touches — `j`, `k`, and their neighbours — dominated.
    fn swap_valid(
        &self,
        i: NodeId,
        j: NodeId,
        k: NodeId,
        st: &impl Fn(NodeId) -> Membership,
    ) -> bool {
        let member = |x: NodeId| x == i || (st(x) == In && x != j && x != k);
        let touched = self.g.adj(j).iter().chain(self.g.adj(k)).copied().chain([j, k]);
        let mut touched: Vec<NodeId> = touched.collect();
        touched.sort_unstable();
        touched.dedup();
        touched
            .into_iter()
            .all(|q| member(q) || self.g.adj(q).iter().any(|&r| member(r)))
    }

    /// The exchange candidate pair, if any: `i` is `Out`, its distance-2
    /// neighbourhood is past the earlier phases, and some pair of `In`
    /// nodes within distance 2 can be traded for `i`. Scanning in ascending
    /// pair order makes the choice a pure function of the view.
    fn two_addable(
        &self,
        i: NodeId,
        st: &impl Fn(NodeId) -> Membership,
    ) -> Option<(NodeId, NodeId)> {
        if st(i) != Out {
            return None;
        }
        let quiet = std::iter::once(i)
            .chain(self.adj2[i].iter().copied())
            .all(|x| !self.addable(x, st) && !self.removable(x, st));
        if !quiet {
            return None;
        }
        let members: Vec<NodeId> =
            self.adj2[i].iter().copied().filter(|&j| st(j) == In).collect();
        for (a, &j) in members.iter().enumerate() {
            for &k in &members[a + 1..] {
                if self.swap_valid(i, j, k, st) {
                    return Some((j, k));
                }
            }
        }
        None
    }

    fn unsatisfied(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.removable(i, st) || self.two_addable(i, st).is_some()
    }

    /// Unsatisfied and the highest-id unsatisfied node within distance 4.
    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        self.unsatisfied(i, st)
            && self.adj4[i].iter().all(|&j| !self.unsatisfied(j, st) || i > j)
    }

    fn dominated_under(&self, member: &impl Fn(NodeId) -> bool) -> bool {
        (0..self.g.n()).all(|q| member(q) || self.g.adj(q).iter().any(|&r| member(r)))
    }

    /// The feasibility predicate: the `In` set dominates every node.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        self.dominated_under(&|j| state[j].is_in())
    }
}

impl Algorithm for TwoDsEll {
    type State = Membership;

    fn name(&self) -> &str {
        "2ds-ell"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["enter", "shrink"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        self.observed[i].clone()
    }

    fn read_radius(&self) -> ReadRadius {
        radius(8)
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
        if self.addable(i, &st) {
            Some(0)
        } else if self.impedensable(i, &st) {
            Some(1)
        } else {
            None
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<Membership>) -> MoveEffect<Membership> {
        let st = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        if rule == 0 {
            return MoveEffect::own(i, In);
        }
        if st(i) == In {
            // Impedensable through removability: leave.
            MoveEffect::own(i, Out)
        } else {
            // Impedensable through an exchange: trade the pair for `i`.
            let (j, k) = self.two_addable(i, &st).expect("guard checked the exchange");
            MoveEffect::multi(vec![(i, In), (j, Out), (k, Out)])
        }
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<Membership>) -> Option<u64> {
        None
    }

    /// Dominating, minimal, and exchange-free: no outsider can replace two
    /// adjacent members.
    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        let member = |j: NodeId| state[j].is_in();
        if !self.dominated_under(&member) {
            return false;
        }
        let minimal = (0..state.n())
            .filter(|&i| member(i))
            .all(|i| !self.dominated_under(&|j| j != i && member(j)));
        if !minimal {
            return false;
        }
        (0..state.n()).filter(|&i| !member(i)).all(|i| {
            let in_adj: Vec<NodeId> =
                self.g.adj(i).iter().copied().filter(|&j| member(j)).collect();
            in_adj.iter().enumerate().all(|(a, &j)| {
                in_adj[a + 1..].iter().all(|&k| {
                    !self.dominated_under(&|q| q == i || (member(q) && q != j && q != k))
                })
            })
        })
    }
}
