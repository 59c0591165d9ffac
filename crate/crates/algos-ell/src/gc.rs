//! Irreducible graph colouring.
//!
//! Colours are positive integers. Feasibility is properness (no adjacent
//! equal colours); the goal adds irreducibility: no node can switch to a
//! smaller colour its neighbours have left free. The corrective rule bumps
//! a conflicted node's colour by `id + 1` — the per-node offsets are
//! distinct, so two nodes escaping the *same* conflict land on different
//! colours (ids here are node indices, so the offset adds one to keep node
//! 0 moving too). The descending rule lets a node take the least free
//! colour below its own, guarded by a tiebreak over *all* nodes: nobody
//! anywhere is conflicted, and every other subtractable node has a lower
//! id. That global quantifier is what the declared
//! [`ReadRadius::Global`] reflects; it serialises reductions completely,
//! one node at a time.

use graph_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::global_observed;

/// Colours above this are rejected at init: they leave no headroom for
/// conflict bumps within any realistic run.
const COLOUR_CEILING: u64 = 1 << 32;

/// The algorithm; see the module docs.
pub struct GcEll {
    g: Graph,
}

/// Builds the irreducible colouring algorithm.
pub fn gc_ell_spec(g: Graph) -> GcEll {
    GcEll { g }
}

impl GcEll {
    pub fn graph(&self) -> &Graph {
        &self.g
    }

    fn conflicted(&self, i: NodeId, colour: &impl Fn(NodeId) -> u64) -> bool {
        self.g.adj(i).iter().any(|&j| colour(j) == colour(i))
    }

    /// The smallest colour (≥ 1) none of `i`'s neighbours holds.
    fn min_free(&self, i: NodeId, colour: &impl Fn(NodeId) -> u64) -> u64 {
        let mut taken: Vec<u64> = self.g.adj(i).iter().map(|&j| colour(j)).collect();
        taken.sort_unstable();
        taken.dedup();
        let mut c = 1;
        for t in taken {
            if t == c {
                c += 1;
            } else if t > c {
                break;
            }
        }
        c
    }

    fn subtractable(&self, i: NodeId, colour: &impl Fn(NodeId) -> u64) -> bool {
        self.min_free(i, colour) < colour(i)
    }

    /// Unconflicted and subtractable, with the global all-clear: no node is
    /// conflicted anywhere, and every other subtractable node has a lower
    /// id.
    fn impedensable(&self, i: NodeId, colour: &impl Fn(NodeId) -> u64) -> bool {
        !self.conflicted(i, colour)
            && self.subtractable(i, colour)
            && (0..self.g.n()).filter(|&j| j != i).all(|j| {
                !self.conflicted(j, colour) && (j < i || !self.subtractable(j, colour))
            })
    }

    /// Properness: no edge joins equal colours.
    pub fn feasible(&self, state: &GlobalState<u64>) -> bool {
        self.g.edges().iter().all(|&(u, v)| state[u] != state[v])
    }
}

impl Algorithm for GcEll {
    type State = u64;

    fn name(&self) -> &str {
        "gc-ell"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["recolour", "reduce"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        global_observed(self.g.n(), i)
    }

    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Global
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    fn init(&self, mode: &InitMode<u64>) -> Result<GlobalState<u64>, EngineError> {
        let n = self.g.n();
        let states = match mode {
            InitMode::Canonical => vec![1; n],
            InitMode::Named(name) => {
                return Err(EngineError::InitRejected(format!(
                    "no named inits (got {name:?}); colourings start canonical, random, or explicit"
                )))
            }
            InitMode::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let top = (2 * n as u64).max(2);
                (0..n).map(|_| rng.gen_range(1..=top)).collect()
            }
            InitMode::Explicit(states) => {
                if states.len() != n {
                    return Err(EngineError::InitRejected(format!(
                        "explicit init has {} states, the graph has {n} nodes",
                        states.len()
                    )));
                }
                if let Some(&bad) = states.iter().find(|&&c| c == 0 || c > COLOUR_CEILING) {
                    return Err(EngineError::InitRejected(format!(
                        "colour {bad} out of range [1, {COLOUR_CEILING}]"
                    )));
                }
                states.clone()
            }
        };
        Ok(GlobalState::new(states))
    }

    fn guard(&self, i: NodeId, view: &View<u64>) -> Option<RuleId> {
        let colour = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        if self.conflicted(i, &colour) {
            Some(0)
        } else if self.impedensable(i, &colour) {
            Some(1)
        } else {
            None
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<u64>) -> MoveEffect<u64> {
        let colour = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        let next = if rule == 0 {
            colour(i).saturating_add(i as u64 + 1)
        } else {
            self.min_free(i, &colour)
        };
        MoveEffect::own(i, next)
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<u64>) -> Option<u64> {
        None
    }

    /// Proper, and no node has a free colour below its own.
    fn optimal(&self, state: &GlobalState<u64>) -> bool {
        let colour = |j: NodeId| state[j];
        self.feasible(state) && (0..state.n()).all(|i| !self.subtractable(i, &colour))
    }
}

#[cfg(test)]
mod tests {
    use sim_engine::{run, RunConfig, Scheduler, Verdict};

    use super::*;

    #[test]
    fn conflicted_pair_settles_on_the_two_lowest_colours() {
        let alg = gc_ell_spec(Graph::from_edges(2, &[(0, 1)]).unwrap());
        for scheduler in [Scheduler::Central, Scheduler::Synchronous] {
            for seed in 0..6 {
                let cfg = RunConfig::fresh(scheduler, seed, 1000);
                let trace = run(&alg, &InitMode::Explicit(vec![1, 1]), &cfg).unwrap();
                assert_eq!(trace.verdict, Verdict::Silent);
                let mut colours = trace.final_state.states.clone();
                colours.sort_unstable();
                assert_eq!(colours, vec![1, 2]);
                assert!(alg.optimal(&trace.final_state));
            }
        }
    }

    #[test]
    fn optimal_colouring_never_moves() {
        let alg = gc_ell_spec(Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        let cfg = RunConfig::fresh(Scheduler::Central, 9, 1000);
        let trace = run(&alg, &InitMode::Explicit(vec![1, 2, 1]), &cfg).unwrap();
        assert_eq!(trace.verdict, Verdict::Silent);
        assert_eq!(trace.moves, 0);
        assert_eq!(trace.final_state.states, vec![1, 2, 1]);
    }

    #[test]
    fn zero_colours_are_rejected() {
        let alg = gc_ell_spec(Graph::from_edges(2, &[(0, 1)]).unwrap());
        assert!(alg.init(&InitMode::Explicit(vec![0, 1])).is_err());
        assert!(alg.init(&InitMode::Explicit(vec![1])).is_err());
    }
}
