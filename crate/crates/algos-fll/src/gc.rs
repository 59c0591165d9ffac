//! Irreducible graph colouring with a local tiebreak.
//!
//! Same problem as `algos_ell::gc_ell_spec` — colours are positive
//! integers, the goal is a proper colouring no node of which can switch to
//! a smaller free colour — but the repair is one rule instead of two, and
//! the coordination is local instead of global. A node is *unsatisfied*
//! when it is conflicted with a neighbour or a smaller colour sits free; it
//! moves once every unsatisfied direct neighbour has a lower id, and the
//! move always lands on the least colour its neighbours leave free. A
//! node's colour can rise at most once, on its first move; after that every
//! move strictly lowers it, which caps a run at `n + 2m` moves.

use graph_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::{bounded_observed, radius};

/// Colours above this are rejected at init: they leave no headroom for
/// whatever the first move lands on within any realistic run.
const COLOUR_CEILING: u64 = 1 << 32;

/// The algorithm; see the module docs.
pub struct GcFll {
    g: Graph,
    observed: Vec<Vec<NodeId>>,
}

/// Builds the locally-coordinated irreducible colouring algorithm.
pub fn gc_fll_spec(g: Graph) -> GcFll {
    // Judging a direct neighbour's unsatisfiedness reads that neighbour's
    // neighbours: distance 2.
    let observed = bounded_observed(&g, 2);
    GcFll { g, observed }
}

impl GcFll {
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

    fn unsatisfied(&self, i: NodeId, colour: &impl Fn(NodeId) -> u64) -> bool {
        self.conflicted(i, colour) || self.min_free(i, colour) < colour(i)
    }

    fn impedensable(&self, i: NodeId, colour: &impl Fn(NodeId) -> u64) -> bool {
        self.unsatisfied(i, colour)
            && self.g.adj(i).iter().all(|&j| j < i || !self.unsatisfied(j, colour))
    }

    /// Properness: no edge joins equal colours.
    pub fn feasible(&self, state: &GlobalState<u64>) -> bool {
        self.g.edges().iter().all(|&(u, v)| state[u] != state[v])
    }
}

impl Algorithm for GcFll {
    type State = u64;

    fn name(&self) -> &str {
        "gc-fll"
    }

    fn n_nodes(&self) -> usize {
        self.g.n()
    }

    fn rules(&self) -> &[&str] {
        &["recolour"]
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
        self.impedensable(i, &colour).then_some(0)
    }

    fn action(&self, i: NodeId, _rule: RuleId, view: &View<u64>) -> MoveEffect<u64> {
        let colour = |j: NodeId| if j == i { *view.own() } else { *view.get(j) };
        MoveEffect::own(i, self.min_free(i, &colour))
    }

    /// A conflicted node sits above every colour it could land on
    /// (`deg + 2` exceeds its post-move colour, which is at most `deg + 1`);
    /// a satisfied one counts its colour.
    fn state_value(&self, i: NodeId, state: &GlobalState<u64>) -> Option<u64> {
        let colour = |j: NodeId| state[j];
        Some(if self.conflicted(i, &colour) {
            self.g.deg(i) as u64 + 2
        } else {
            state[i]
        })
    }

    /// Proper, and no node has a free colour below its own.
    fn optimal(&self, state: &GlobalState<u64>) -> bool {
        let colour = |j: NodeId| state[j];
        self.feasible(state)
            && (0..state.n()).all(|i| self.min_free(i, &colour) >= colour(i))
    }
}
