//! Self-stabilising multiplication over a binary tree of partial products.
//!
//! The multiplier `n` (|n| a power of two) is spread over the leaves of a
//! complete binary tree, one bit per leaf, so the tree has `2|n| − 1` nodes
//! in heap layout (children of `i` are `2i+1`, `2i+2`). Each node settles to
//! the product of the multiplicand `m` with the slice of `n` its subtree
//! covers:
//!
//! * a leaf holds its bit of `n`;
//! * a node whose children are leaves (observed child shift 0) holds
//!   `(left·m) · 2 + right·m` and shift 1;
//! * any higher node holds `left · 2^shift + right` with shift twice its
//!   child's shift.
//!
//! Every node has the single rule "settle": recompute the target from the
//! children and move iff the current state differs. Settling propagates from
//! the leaves up, so once a node's subtree is final, one more move makes the
//! node final and nothing re-enables it. Stale reads can only show a child's
//! older published value, which makes the parent recompute a stale target it
//! will correct on a later (monotonic) read — hence the AMR claim. Under
//! arbitrarily old reads a parent can bounce between an old and a new target
//! forever, so no AA claim is made.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::bits::{ArithError, BitString};

/// Per-node state: the shift used to combine the children and the partial
/// product of the subtree's slice of `n` with `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct MulNode {
    pub shift: usize,
    pub ans: BitString,
}

/// The tree algorithm; see the module docs.
pub struct StandardMul {
    n: BitString,
    m: BitString,
    n_nodes: usize,
    fixpoint: Vec<MulNode>,
}

/// Builds the multiplication tree for `n × m`. Requires `|n|` to be a power
/// of two (pad `n` on the left if needed); `m` may have any length.
pub fn mul_standard_spec(n: &BitString, m: &BitString) -> Result<StandardMul, ArithError> {
    if n.is_empty() {
        return Err(ArithError::Empty);
    }
    if !n.len().is_power_of_two() {
        return Err(ArithError::BadLength(format!(
            "multiplier has {} bits, need a power of two",
            n.len()
        )));
    }
    let mut alg = StandardMul {
        n: n.clone(),
        m: m.clone(),
        n_nodes: 2 * n.len() - 1,
        fixpoint: Vec::new(),
    };
    let mut fix: Vec<Option<MulNode>> = vec![None; alg.n_nodes];
    for i in (0..alg.n_nodes).rev() {
        let t = if alg.is_leaf(i) {
            alg.target(i, None, None)
        } else {
            alg.target(i, fix[2 * i + 1].as_ref(), fix[2 * i + 2].as_ref())
        };
        fix[i] = Some(t);
    }
    alg.fixpoint = fix.into_iter().map(Option::unwrap).collect();
    Ok(alg)
}

impl StandardMul {
    fn is_leaf(&self, i: NodeId) -> bool {
        i >= self.n.len() - 1
    }

    /// The state node `i` should hold given its children's (possibly stale)
    /// states. Total for arbitrary child states; equals the node's final
    /// value once the children are final.
    fn target(&self, i: NodeId, left: Option<&MulNode>, right: Option<&MulNode>) -> MulNode {
        if self.n_nodes == 1 {
            // Degenerate single-bit multiplier: the lone node holds n[0]·m.
            let ans = if self.n.bits()[0] == 1 { self.m.canon() } else { BitString::zero() };
            return MulNode { shift: 0, ans };
        }
        if self.is_leaf(i) {
            let bit = self.n.bits()[i - (self.n.len() - 1)];
            let ans = if bit == 1 { BitString::one() } else { BitString::zero() };
            return MulNode { shift: 0, ans };
        }
        let (l, r) = (left.unwrap(), right.unwrap());
        if l.shift == 0 {
            // Children are leaves: fold in the multiplicand.
            let ans = l.ans.mul(&self.m).lshift(1).add(&r.ans.mul(&self.m));
            MulNode { shift: 1, ans }
        } else {
            let shift = l.shift.saturating_mul(2);
            let ans = l.ans.lshift(shift).add(&r.ans);
            MulNode { shift, ans }
        }
    }

    fn view_target(&self, i: NodeId, view: &View<MulNode>) -> MulNode {
        if self.is_leaf(i) {
            self.target(i, None, None)
        } else {
            self.target(i, Some(view.get(2 * i + 1)), Some(view.get(2 * i + 2)))
        }
    }

    /// The silent state the tree settles to.
    pub fn fixpoint_state(&self) -> GlobalState<MulNode> {
        GlobalState::new(self.fixpoint.clone())
    }

    /// The product `n × m` (the root's final answer), canonical.
    pub fn product(&self) -> BitString {
        self.fixpoint[0].ans.clone()
    }
}

impl Algorithm for StandardMul {
    type State = MulNode;

    fn name(&self) -> &str {
        "mul-standard"
    }

    fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn rules(&self) -> &[&str] {
        &["settle"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        if self.is_leaf(i) { Vec::new() } else { vec![2 * i + 1, 2 * i + 2] }
    }

    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(1)
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    fn init(&self, mode: &InitMode<MulNode>) -> Result<GlobalState<MulNode>, EngineError> {
        match mode {
            InitMode::Canonical => Ok(GlobalState::new(vec![
                MulNode { shift: 0, ans: BitString::zero() };
                self.n_nodes
            ])),
            InitMode::Named(name) if name == "fixpoint" => Ok(self.fixpoint_state()),
            InitMode::Named(other) => {
                Err(EngineError::InitRejected(format!("unknown named init {other:?}")))
            }
            InitMode::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let states = (0..self.n_nodes)
                    .map(|_| {
                        let shift = rng.gen_range(0..=self.n.len());
                        let len = rng.gen_range(0..=self.n.len() + self.m.len());
                        let bits = (0..len).map(|_| rng.gen_range(0..=1u8)).collect();
                        MulNode { shift, ans: BitString::from_bits(bits) }
                    })
                    .collect();
                Ok(GlobalState::new(states))
            }
            InitMode::Explicit(states) => {
                if states.len() != self.n_nodes {
                    return Err(EngineError::InitRejected(format!(
                        "expected {} node states, got {}",
                        self.n_nodes,
                        states.len()
                    )));
                }
                let shift_cap = 4 * self.n.len();
                let len_cap = 4 * (self.n.len() + self.m.len());
                for (i, s) in states.iter().enumerate() {
                    if s.shift > shift_cap || s.ans.len() > len_cap {
                        return Err(EngineError::InitRejected(format!(
                            "node {i} state out of bounds (shift {} > {shift_cap} or |ans| {} > {len_cap})",
                            s.shift,
                            s.ans.len()
                        )));
                    }
                }
                Ok(GlobalState::new(states.clone()))
            }
        }
    }

    fn guard(&self, i: NodeId, view: &View<MulNode>) -> Option<RuleId> {
        (*view.own() != self.view_target(i, view)).then_some(0)
    }

    fn action(&self, i: NodeId, _rule: RuleId, view: &View<MulNode>) -> MoveEffect<MulNode> {
        MoveEffect::own(i, self.view_target(i, view))
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<MulNode>) -> Option<u64> {
        None
    }

    fn optimal(&self, state: &GlobalState<MulNode>) -> bool {
        state.states == self.fixpoint
    }
}
