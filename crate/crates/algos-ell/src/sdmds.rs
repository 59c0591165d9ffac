//! Service-demand minimal dominating set.
//!
//! Each node `i` carries two fixed symbol sets: the demands `D_i` it needs
//! met and the services `S_i` it can provide. A node is *dominated* when it
//! is `In` itself or every demand `d ∈ D_i` is provided by some `In`
//! neighbour with `d` in its service set. The goal state is a dominated
//! graph whose `In` set is minimal: no single member can leave without
//! undominating someone. When every node shares one demand/service symbol
//! the problem collapses to the classic minimal dominating set.
//!
//! The corrective rule is unconditional: an undominated `Out` node enters.
//! The descending rule lets an `In` node leave only when it is *removable*
//! (the set minus the node still dominates everything, assuming the set
//! currently does) and it wins the co-server tiebreak: for every demand `d`
//! of a neighbour `j` that `i` can serve, every other `In` node that also
//! serves `d` to `j` either has a lower id or is not removable itself. Two
//! removable co-servers of the same demand therefore never leave together —
//! whichever loses the tiebreak waits until the winner is out and its own
//! removability has been re-established — so the served node stays
//! dominated through any interleaving.

use std::collections::BTreeSet;

use graph_core::Graph;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::Membership::{self, In, Out};
use crate::{bounded_observed, membership_init, radius, InputError};

/// A graph plus per-node demand and service symbol sets.
#[derive(Debug, Clone)]
pub struct SdmdsInput {
    pub graph: Graph,
    pub demands: Vec<BTreeSet<u32>>,
    pub services: Vec<BTreeSet<u32>>,
}

impl SdmdsInput {
    /// Bundles a graph with demand and service tables (one set of each per
    /// node).
    pub fn new(
        graph: Graph,
        demands: Vec<BTreeSet<u32>>,
        services: Vec<BTreeSet<u32>>,
    ) -> Result<Self, InputError> {
        if demands.len() != graph.n() {
            return Err(InputError::WrongLength {
                what: "demand table",
                got: demands.len(),
                n: graph.n(),
            });
        }
        if services.len() != graph.n() {
            return Err(InputError::WrongLength {
                what: "service table",
                got: services.len(),
                n: graph.n(),
            });
        }
        Ok(SdmdsInput { graph, demands, services })
    }

    /// Every node demands and serves the single symbol `0`, which makes the
    /// algorithm behave as plain minimal dominating set.
    pub fn uniform(graph: Graph) -> Self {
        let one: BTreeSet<u32> = [0].into();
        let n = graph.n();
        SdmdsInput { graph, demands: vec![one.clone(); n], services: vec![one; n] }
    }

    /// Parses a demand/service table. One node per line:
    ///
    /// ```text
    /// # comment
    /// 0: D=1,2 S=3
    /// 1: D=3 S=1,2
    /// 2: D= S=
    /// ```
    ///
    /// `D=`/`S=` may be empty or omitted (empty set); nodes not listed get
    /// empty sets for both.
    pub fn parse(graph: Graph, text: &str) -> Result<Self, InputError> {
        let n = graph.n();
        let mut demands = vec![BTreeSet::new(); n];
        let mut services = vec![BTreeSet::new(); n];
        let mut seen = vec![false; n];
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (head, rest) = content.split_once(':').ok_or_else(|| InputError::Malformed {
                line,
                reason: "expected `<node>: D=... S=...`".into(),
            })?;
            let node: NodeId = head.trim().parse().map_err(|_| InputError::Malformed {
                line,
                reason: format!("bad node index {:?}", head.trim()),
            })?;
            if node >= n {
                return Err(InputError::OutOfRange { node, n });
            }
            if seen[node] {
                return Err(InputError::Duplicate { node });
            }
            seen[node] = true;
            for part in rest.split_whitespace() {
                let (set, list) = match part.split_once('=') {
                    Some(("D", list)) => (&mut demands[node], list),
                    Some(("S", list)) => (&mut services[node], list),
                    _ => {
                        return Err(InputError::Malformed {
                            line,
                            reason: format!("expected `D=...` or `S=...`, got {part:?}"),
                        })
                    }
                };
                for sym in list.split(',').filter(|s| !s.is_empty()) {
                    let sym: u32 = sym.trim().parse().map_err(|_| InputError::Malformed {
                        line,
                        reason: format!("bad symbol {sym:?}"),
                    })?;
                    set.insert(sym);
                }
            }
        }
        SdmdsInput::new(graph, demands, services)
    }
}

/// The algorithm; see the module docs.
pub struct SdmdsEll {
    input: SdmdsInput,
    observed: Vec<Vec<NodeId>>,
}

/// Builds the service-demand minimal dominating set algorithm.
pub fn sdmds_ell_spec(input: SdmdsInput) -> SdmdsEll {
    // Guards read removability of co-servers: a co-server sits within
    // distance 2, and its removability reads its neighbours' dominators,
    // two hops further out.
    let observed = bounded_observed(&input.graph, 4);
    SdmdsEll { input, observed }
}

impl SdmdsEll {
    pub fn input(&self) -> &SdmdsInput {
        &self.input
    }

    fn serves(&self, provider: NodeId, d: u32) -> bool {
        self.input.services[provider].contains(&d)
    }

    /// `i` is `Out` and has a demand no `In` neighbour serves.
    fn addable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == Out
            && self.input.demands[i].iter().any(|&d| {
                self.input.graph.adj(i).iter().all(|&j| !self.serves(j, d) || st(j) == Out)
            })
    }

    /// The `In` set minus `i` still dominates everything it dominated: `i`'s
    /// own demands are served by `In` neighbours, and every `Out` neighbour
    /// relying on `i` for a demand has a second `In` server for it. An `In`
    /// neighbour needs no servers — membership dominates it by itself.
    fn removable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        let g = &self.input.graph;
        self.input.demands[i]
            .iter()
            .all(|&d| g.adj(i).iter().any(|&j| self.serves(j, d) && st(j) == In))
            && g.adj(i).iter().all(|&j| {
                st(j) == In
                    || self.input.demands[j].iter().all(|&d| {
                        !self.serves(i, d)
                            || g.adj(j).iter().any(|&k| k != i && self.serves(k, d) && st(k) == In)
                    })
            })
    }

    /// The `In` nodes currently able to dominate `j`: neighbours serving one
    /// of its demands, plus `j` itself when it is `In`.
    fn dominators_of(&self, j: NodeId, st: &impl Fn(NodeId) -> Membership) -> Vec<NodeId> {
        let mut doms: Vec<NodeId> = self
            .input
            .graph
            .adj(j)
            .iter()
            .copied()
            .filter(|&k| st(k) == In && self.input.demands[j].iter().any(|&d| self.serves(k, d)))
            .collect();
        if st(j) == In {
            doms.push(j);
        }
        doms
    }

    /// Removable, and no higher-id removable co-server: for each demand of a
    /// neighbour that `i` serves, every other `In` server of that demand has
    /// a lower id or is stuck.
    fn impedensable(&self, i: NodeId, st: &impl Fn(NodeId) -> Membership) -> bool {
        st(i) == In
            && self.removable(i, st)
            && self.input.graph.adj(i).iter().all(|&j| {
                self.input.demands[j].iter().all(|&d| {
                    !self.serves(i, d)
                        || self.dominators_of(j, st).iter().all(|&k| {
                            k == i
                                || !(self.serves(k, d) && st(k) == In)
                                || k < i
                                || !self.removable(k, st)
                        })
                })
            })
    }

    /// Whether every node is dominated under `member`.
    fn dominated_under(&self, member: &impl Fn(NodeId) -> bool) -> bool {
        (0..self.input.graph.n()).all(|i| {
            member(i)
                || self.input.demands[i].iter().all(|&d| {
                    self.input.graph.adj(i).iter().any(|&j| self.serves(j, d) && member(j))
                })
        })
    }

    /// The feasibility predicate: the `In` set dominates every node.
    pub fn feasible(&self, state: &GlobalState<Membership>) -> bool {
        self.dominated_under(&|j| state[j].is_in())
    }
}

impl Algorithm for SdmdsEll {
    type State = Membership;

    fn name(&self) -> &str {
        "sdmds-ell"
    }

    fn n_nodes(&self) -> usize {
        self.input.graph.n()
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

    /// Dominating and minimal: no single `In` node can be dropped.
    fn optimal(&self, state: &GlobalState<Membership>) -> bool {
        let member = |j: NodeId| state[j].is_in();
        self.dominated_under(&member)
            && (0..state.n()).filter(|&i| member(i)).all(|i| {
                !self.dominated_under(&|j| j != i && member(j))
            })
    }
}
