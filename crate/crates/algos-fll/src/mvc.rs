//! Minimal vertex cover, in a complex-action and a simple-action form.
//!
//! [`MvcFll`] settles the colouring-style tiebreak's blind spot for cover
//! problems — a node entering the cover can make a neighbour redundant, and
//! someone has to take the redundant one out *before* it blocks the next
//! mover — by widening the tiebreak to distance 3 and letting the entering
//! node force a jointly-removable set of its freshly-redundant neighbours
//! out in the same atomic move.
//!
//! [`MvcFllSimple`] buys the same convergence with moves that write only
//! the mover's own state. An entering node raises an `addable` flag instead
//! of kicking; a neighbour the entry made redundant sees the flag and walks
//! out on its own, inheriting the enterer's priority over the ID order
//! (its exit guard ignores the tiebreak), while everyone within distance 4
//! of the flag holds still until no flagged node has a redundant neighbour
//! left.

use graph_core::Graph;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use algos_ell::membership_init;
use algos_ell::Membership::{self, In, Out};

use crate::{bounded_observed, radius};

/// In the cover with every neighbour covered too: dropping `i` keeps all
/// its edges covered.
fn removable(g: &Graph, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
    st(i) == In && g.adj(i).iter().all(|&j| st(j) == In)
}

/// Out of the cover with an uncovered incident edge.
fn addable(g: &Graph, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
    st(i) == Out && g.adj(i).iter().any(|&j| st(j) == Out)
}

fn unsatisfied(g: &Graph, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
    removable(g, i, st) || addable(g, i, st)
}

/// Every edge covered, no member redundant.
fn minimal_cover(g: &Graph, state: &GlobalState<Membership>) -> bool {
    let st = |j: NodeId| state[j];
    g.edges().iter().all(|&(u, v)| state[u] == In || state[v] == In)
        && (0..g.n()).all(|i| !removable(g, i, &st))
}

/// The complex-action algorithm; see the module docs.
pub struct MvcFll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
    adj3: Vec<Vec<NodeId>>,
}

/// Builds the complex-action minimal vertex cover algorithm.
pub fn mvc_fll_spec(g: Graph) -> MvcFll {
    // The tiebreak judges unsatisfiedness across Adj³, and unsatisfiedness
    // reads direct neighbours: distance 4 in total.
    let observed = bounded_observed(&g, 4);
    let adj3 = bounded_observed(&g, 3);
    MvcFll { g, observed, adj3 }
}

impl MvcFll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        unsatisfied(&self.g, i, st)
            && self.adj3[i].iter().all(|&j| j < i || !unsatisfied(&self.g, j, st))
    }

    /// Would `j` be redundant once `i` has entered? `j`'s own read of the
    /// world, with `i` counted as in.
    fn removable_after(&self, j: NodeId, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(j) == In && self.g.adj(j).iter().all(|&k| k == i || st(k) == In)
    }

    /// Every edge has an endpoint in the cover.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        self.g.edges().iter().all(|&(u, v)| state[u] == In || state[v] == In)
    }
}

impl Algorithm for MvcFll {
    type State = Membership;

    fn name(&self) -> &str {
        "mvc-fll"
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
        } else if addable(&self.g, i, &st) {
            Some(0)
        } else {
            Some(1)
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<Membership>) -> MoveEffect<Membership> {
        if rule == 1 {
            return MoveEffect::own(i, Out);
        }
        let st = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        // Each candidate is judged removable with everyone else staying put,
        // so two adjacent candidates each count on the other remaining in —
        // kicking both would uncover the edge between them. The kicks taken
        // are a jointly-removable subset: highest id first, skipping anyone
        // adjacent to a victim already chosen. A skipped candidate is left
        // satisfied too, because the kicked neighbour's exit ends its
        // redundancy.
        let mut writes = vec![(i, In)];
        let mut kicked: Vec<NodeId> = Vec::new();
        for &j in self.g.adj(i).iter().rev() {
            if self.removable_after(j, i, &st)
                && !self.g.adj(j).iter().any(|k| kicked.contains(k))
            {
                kicked.push(j);
                writes.push((j, Out));
            }
        }
        MoveEffect::multi(writes)
    }

    fn state_value(&self, i: NodeId, state: &GlobalState<Membership>) -> Option<u64> {
        let st = |j: NodeId| state[j];
        Some(u64::from(unsatisfied(&self.g, i, &st)))
    }

    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        minimal_cover(&self.g, state)
    }
}

/// Per-node state of the simple-action form: the membership bit plus the
/// flag an entering node raises. The flag is what lets the neighbours a
/// move made redundant walk out on their own; it carries no information
/// once no neighbour is redundant, so stale `true` flags are harmless and
/// may outlive the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct MvcSimpleState {
    pub st: Membership,
    pub addable: bool,
}

impl MvcSimpleState {
    pub fn new(st: Membership) -> Self {
        MvcSimpleState { st, addable: false }
    }
}

/// The simple-action algorithm; see the module docs.
pub struct MvcFllSimple {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
    adj4: Vec<Vec<NodeId>>,
    adj3: Vec<Vec<NodeId>>,
}

/// Builds the simple-action minimal vertex cover algorithm.
pub fn mvc_fll_simple_spec(g: Graph) -> MvcFllSimple {
    // The hold-still guard scans flags at distance 4, the flagged node's
    // neighbours at 5, and their redundancy reads one more hop: 6.
    let observed = bounded_observed(&g, 6);
    let adj4 = bounded_observed(&g, 4);
    let adj3 = bounded_observed(&g, 3);
    MvcFllSimple { g, observed, adj4, adj3 }
}

impl MvcFllSimple {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    /// Somebody within distance 4 has entered and still has a redundant
    /// neighbour: their exit is owed first, so `i` holds still.
    fn else_pointed(&self, i: NodeId, s: &impl Fn(NodeId) -> MvcSimpleState) -> bool {
        let st = |j: NodeId| s(j).st;
        self.adj4[i].iter().any(|&j| {
            s(j).addable && self.g.adj(j).iter().any(|&k| removable(&self.g, k, &st))
        })
    }

    fn impedensable(&self, i: NodeId, s: &impl Fn(NodeId) -> MvcSimpleState) -> bool {
        let st = |j: NodeId| s(j).st;
        let owed_exit =
            removable(&self.g, i, &st) && self.g.adj(i).iter().any(|&j| s(j).addable);
        owed_exit
            || (!self.else_pointed(i, s)
                && unsatisfied(&self.g, i, &st)
                && self.adj3[i].iter().all(|&j| j < i || !unsatisfied(&self.g, j, &st)))
    }
}

impl Algorithm for MvcFllSimple {
    type State = MvcSimpleState;

    fn name(&self) -> &str {
        "mvc-fll-simple"
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
        radius(6)
    }

    /// The flagged-exit guard has no tiebreak to hide behind: it trusts the
    /// mover's removability as read. A stale view can show a neighbour
    /// still in the cover after it left, and the resulting phantom exit
    /// lands the run on a different (still minimal) endpoint than the fresh
    /// supremum. The flag buys single-writer actions, not stale reads.
    fn claimed_model(&self) -> ReadModel {
        ReadModel::Fresh
    }

    /// `Canonical` is all-out; `"all-in"`/`"all-out"` and `Random` set
    /// memberships with lowered flags; `Explicit` takes full states.
    fn init(
        &self,
        mode: &InitMode<MvcSimpleState>,
    ) -> Result<GlobalState<MvcSimpleState>, EngineError> {
        let lift = |m: GlobalState<Membership>| {
            GlobalState::new(m.states.into_iter().map(MvcSimpleState::new).collect())
        };
        match mode {
            InitMode::Canonical => Ok(lift(membership_init(self.n_nodes(), &InitMode::Canonical)?)),
            InitMode::Named(name) => {
                Ok(lift(membership_init(self.n_nodes(), &InitMode::Named(name.clone()))?))
            }
            InitMode::Random(seed) => {
                Ok(lift(membership_init(self.n_nodes(), &InitMode::Random(*seed))?))
            }
            InitMode::Explicit(states) => {
                if states.len() != self.n_nodes() {
                    return Err(EngineError::InitRejected(format!(
                        "explicit init has {} states, the graph has {} nodes",
                        states.len(),
                        self.n_nodes()
                    )));
                }
                Ok(GlobalState::new(states.clone()))
            }
        }
    }

    fn guard(&self, i: NodeId, view: &View<MvcSimpleState>) -> Option<RuleId> {
        let s = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        if !self.impedensable(i, &s) {
            None
        } else if view.own().st == Out {
            Some(0)
        } else {
            Some(1)
        }
    }

    fn action(
        &self,
        i: NodeId,
        rule: RuleId,
        _view: &View<MvcSimpleState>,
    ) -> MoveEffect<MvcSimpleState> {
        let next = if rule == 0 {
            MvcSimpleState { st: In, addable: true }
        } else {
            MvcSimpleState { st: Out, addable: false }
        };
        MoveEffect::own(i, next)
    }

    /// The mover counts its degree plus one; a settled node counts its
    /// unsatisfied neighbours, so pending exits around it keep it nonzero.
    fn state_value(&self, i: NodeId, state: &GlobalState<MvcSimpleState>) -> Option<u64> {
        let st = |j: NodeId| state[j].st;
        Some(if unsatisfied(&self.g, i, &st) {
            self.g.deg(i) as u64 + 1
        } else {
            self.g.adj(i).iter().filter(|&&j| unsatisfied(&self.g, j, &st)).count() as u64
        })
    }

    /// Minimality of the membership projection; leftover raised flags do
    /// not count against silence.
    fn optimal(&self, state: &GlobalState<MvcSimpleState>) -> bool {
        let membership = GlobalState::new(state.states.iter().map(|s| s.st).collect());
        minimal_cover(&self.g, &membership)
    }
}

#[cfg(test)]
mod tests {
    use sim_engine::{run, RunConfig, Scheduler, Verdict};

    use super::*;

    fn path4() -> Graph {
        Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    fn fresh_cfgs() -> Vec<RunConfig> {
        let mut cfgs = Vec::new();
        for seed in 0..4 {
            cfgs.push(RunConfig::fresh(Scheduler::Central, seed, 1000));
            cfgs.push(RunConfig::fresh(Scheduler::Distributed, seed, 1000));
        }
        cfgs.push(RunConfig::fresh(Scheduler::Synchronous, 0, 1000));
        cfgs
    }

    #[test]
    fn bare_path_covers_with_its_middle_nodes() {
        let alg = mvc_fll_spec(path4());
        for cfg in fresh_cfgs() {
            let trace = run(&alg, &InitMode::Canonical, &cfg).unwrap();
            assert_eq!(trace.verdict, Verdict::Silent);
            assert_eq!(trace.final_state.states, vec![Out, In, In, Out]);
            assert!(alg.optimal(&trace.final_state));
        }
    }

    /// From all-out, node 3 is the first mover and ends up out again: node
    /// 2's entry makes it redundant and kicks it in the same move.
    #[test]
    fn entry_kicks_the_neighbour_it_made_redundant() {
        let alg = mvc_fll_spec(path4());
        let cfg = RunConfig::fresh(Scheduler::Central, 0, 1000);
        let trace = run(&alg, &InitMode::Canonical, &cfg).unwrap();
        let kick = trace
            .records
            .iter()
            .find(|r| r.node == 2 && r.rule == "enter")
            .expect("node 2 must enter");
        assert!(kick.new.contains(&(2, In)));
        assert!(kick.new.contains(&(3, Out)));
    }

    #[test]
    fn endpoints_cover_redundancy_both_ways() {
        let alg = mvc_fll_spec(path4());
        // An uncovered middle edge: node 3 enters and forces node 4 out.
        for cfg in fresh_cfgs() {
            let init = InitMode::Explicit(vec![In, Out, Out, In]);
            let trace = run(&alg, &init, &cfg).unwrap();
            assert_eq!(trace.verdict, Verdict::Silent);
            assert_eq!(trace.final_state.states, vec![In, Out, In, Out]);
        }
        // A minimal cover holds still.
        let cfg = RunConfig::fresh(Scheduler::Central, 5, 1000);
        let trace = run(&alg, &InitMode::Explicit(vec![Out, In, Out, In]), &cfg).unwrap();
        assert_eq!(trace.moves, 0);
    }

    /// The walkthrough behind the flag design: on a path labelled
    /// ⟨0, 3, 2, 1⟩ with only node 0 in the cover, node 3 enters, node 0
    /// must leave before node 2 may act, and node 1 never moves.
    #[test]
    fn flagged_exit_outranks_the_id_order() {
        let g = Graph::from_edges(4, &[(0, 3), (3, 2), (2, 1)]).unwrap();
        let alg = mvc_fll_simple_spec(g);
        let init = vec![
            MvcSimpleState::new(In),
            MvcSimpleState::new(Out),
            MvcSimpleState::new(Out),
            MvcSimpleState::new(Out),
        ];
        for cfg in fresh_cfgs() {
            let trace = run(&alg, &InitMode::Explicit(init.clone()), &cfg).unwrap();
            assert_eq!(trace.verdict, Verdict::Silent);
            let order: Vec<NodeId> = trace.records.iter().map(|r| r.node).collect();
            assert_eq!(order, vec![3, 0, 2]);
            let st: Vec<Membership> = trace.final_state.states.iter().map(|s| s.st).collect();
            assert_eq!(st, vec![Out, Out, In, In]);
            assert!(alg.optimal(&trace.final_state));
        }
    }

    #[test]
    fn minimal_cover_keeps_the_simple_form_silent() {
        let alg = mvc_fll_simple_spec(path4());
        let cfg = RunConfig::fresh(Scheduler::Central, 3, 1000);
        let init = vec![
            MvcSimpleState::new(Out),
            MvcSimpleState::new(In),
            MvcSimpleState::new(In),
            MvcSimpleState::new(Out),
        ];
        let trace = run(&alg, &InitMode::Explicit(init), &cfg).unwrap();
        assert_eq!(trace.verdict, Verdict::Silent);
        assert_eq!(trace.moves, 0);
    }

    #[test]
    fn both_forms_agree_from_the_same_start() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let complex = mvc_fll_spec(g.clone());
        let simple = mvc_fll_simple_spec(g);
        let cfg = RunConfig::fresh(Scheduler::Central, 11, 1000);
        let c = run(&complex, &InitMode::Named("all-in".into()), &cfg).unwrap();
        let s = run(&simple, &InitMode::Named("all-in".into()), &cfg).unwrap();
        let c_in: Vec<NodeId> = algos_ell::in_set(&c.final_state);
        let s_in: Vec<NodeId> = (0..5).filter(|&i| s.final_state[i].st == In).collect();
        assert_eq!(c_in, s_in);
    }
}
