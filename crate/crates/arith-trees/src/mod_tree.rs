//! Self-stabilising modulo over a binary tree of chunk residues.
//!
//! The input `n` is cut into `2|n|/|m|` chunks of `|m|/2` bits, one per leaf
//! of a complete binary tree (`4|n|/|m| − 1` nodes in heap layout). Each
//! node settles to the residue of its subtree's slice of `n`, using
//!
//! ```text
//! ans = (left · 2^shift + right) mod m
//! ```
//!
//! where `shift` is the bit width of the right subtree's slice. Rather than
//! shipping `2^shift` around as a big number, every node also settles a
//! `pow = 2^shift mod m` field: it is `1` at the leaves, the constant
//! `2^(|m|/2) mod m` one level up, and the square (mod m) of a child's `pow`
//! above that — so all three per-node variables stay below the modulus and
//! fit machine words.
//!
//! Each field (`shift`, then `pow`, then `ans`) has its own rule, checked in
//! that order. All writes are self-writes; settling sweeps leaf-to-root and
//! tolerates monotonic stale reads the same way the other trees do.
//!
//! Chunking requires `|m| ≥ 2` and both `|m|` and the padded `|n|` to be
//! powers of two; the constructor left-pads `n` with zeros to the smallest
//! valid length (single-bit moduli are served by the chain algorithm).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::bits::{ArithError, BitString};

/// Per-node state: the combining shift, `2^shift mod m`, and the subtree's
/// residue. `pow` and `ans` stay below the modulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct ModTreeNode {
    pub shift: usize,
    pub pow: u64,
    pub ans: u64,
}

/// The tree algorithm; see the module docs.
pub struct TreeMod {
    n: BitString,
    m: u64,
    /// Leaf chunk width, `|m|/2`.
    chunk: usize,
    /// `2^chunk mod m`, the `pow` value one level above the leaves.
    base_pow: u64,
    n_leaves: usize,
    n_nodes: usize,
    fixpoint: Vec<ModTreeNode>,
}

/// Builds the residue tree for `n mod m`, left-padding `n` to the smallest
/// power-of-two length that is a multiple of `|m|`.
pub fn mod_tree_spec(n: &BitString, m: &BitString) -> Result<TreeMod, ArithError> {
    if m.is_zero() {
        return Err(ArithError::ZeroModulus);
    }
    let m_canon = m.canon();
    if m_canon.len() > 64 {
        return Err(ArithError::ModulusTooLarge { bits: m_canon.len(), limit: 64 });
    }
    if m_canon.len() < 2 || !m_canon.len().is_power_of_two() {
        return Err(ArithError::BadLength(format!(
            "modulus has {} bits, need a power of two of at least 2",
            m_canon.len()
        )));
    }
    let m_bits = m_canon.len();
    let m_val = m_canon.value().unwrap() as u64;
    let padded_len = n.len().next_power_of_two().max(m_bits);
    let padded = n.pad_to(padded_len);
    let chunk = m_bits / 2;
    let n_leaves = padded_len / chunk;
    let n_nodes = 2 * n_leaves - 1;
    let base_pow = ((1u128 << chunk) % u128::from(m_val)) as u64;

    let mut alg = TreeMod {
        n: padded,
        m: m_val,
        chunk,
        base_pow,
        n_leaves,
        n_nodes,
        fixpoint: Vec::new(),
    };
    let mut fix: Vec<Option<ModTreeNode>> = vec![None; n_nodes];
    for i in (0..n_nodes).rev() {
        let t = if alg.is_leaf(i) {
            ModTreeNode { shift: 0, pow: 1 % m_val, ans: alg.leaf_value(i) }
        } else {
            let l = fix[2 * i + 1].as_ref().unwrap();
            let r = fix[2 * i + 2].as_ref().unwrap();
            let shift = alg.shift_target(l.shift);
            let mut node = ModTreeNode { shift, pow: 0, ans: 0 };
            node.pow = alg.pow_target(&node, l);
            node.ans = alg.ans_target(&node, l, r);
            node
        };
        fix[i] = Some(t);
    }
    alg.fixpoint = fix.into_iter().map(Option::unwrap).collect();
    Ok(alg)
}

impl TreeMod {
    fn is_leaf(&self, i: NodeId) -> bool {
        i >= self.n_leaves - 1
    }

    /// The residue of leaf `i`'s chunk of the input. Chunks are `|m|/2` bits,
    /// so their raw value is already below the modulus.
    fn leaf_value(&self, i: NodeId) -> u64 {
        let idx = i - (self.n_leaves - 1);
        let mut v = 0u64;
        for &b in &self.n.bits()[idx * self.chunk..(idx + 1) * self.chunk] {
            v = (v << 1) | u64::from(b);
        }
        v % self.m
    }

    fn shift_target(&self, left_shift: usize) -> usize {
        if left_shift == 0 { self.chunk } else { left_shift.saturating_mul(2) }
    }

    /// Target `pow` given the node's own shift: `2^shift mod m`, computed by
    /// the ladder (1 at shift 0, the precomputed constant at chunk width,
    /// the square of a child's `pow` above that).
    fn pow_target(&self, own: &ModTreeNode, left: &ModTreeNode) -> u64 {
        if own.shift == 0 {
            1 % self.m
        } else if own.shift == self.chunk {
            self.base_pow
        } else {
            ((u128::from(left.pow) * u128::from(left.pow)) % u128::from(self.m)) as u64
        }
    }

    fn ans_target(&self, own: &ModTreeNode, left: &ModTreeNode, right: &ModTreeNode) -> u64 {
        ((u128::from(left.ans) * u128::from(own.pow) + u128::from(right.ans))
            % u128::from(self.m)) as u64
    }

    /// The silent state.
    pub fn fixpoint_state(&self) -> GlobalState<ModTreeNode> {
        GlobalState::new(self.fixpoint.clone())
    }

    /// `n mod m` (the root's final residue).
    pub fn residue(&self) -> u64 {
        self.fixpoint[0].ans
    }
}

impl Algorithm for TreeMod {
    type State = ModTreeNode;

    fn name(&self) -> &str {
        "mod-tree"
    }

    fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn rules(&self) -> &[&str] {
        &["shift", "pow", "ans"]
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

    fn init(&self, mode: &InitMode<ModTreeNode>) -> Result<GlobalState<ModTreeNode>, EngineError> {
        match mode {
            InitMode::Canonical => Ok(GlobalState::new(vec![
                ModTreeNode { shift: 0, pow: 0, ans: 0 };
                self.n_nodes
            ])),
            InitMode::Named(name) if name == "fixpoint" => Ok(self.fixpoint_state()),
            InitMode::Named(other) => {
                Err(EngineError::InitRejected(format!("unknown named init {other:?}")))
            }
            InitMode::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let states = (0..self.n_nodes)
                    .map(|_| ModTreeNode {
                        shift: rng.gen_range(0..=self.n.len()),
                        pow: rng.gen_range(0..self.m),
                        ans: rng.gen_range(0..self.m),
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
                for (i, s) in states.iter().enumerate() {
                    if s.pow >= self.m || s.ans >= self.m || s.shift > 2 * self.n.len() {
                        return Err(EngineError::InitRejected(format!(
                            "node {i} state out of bounds for modulus {}",
                            self.m
                        )));
                    }
                }
                Ok(GlobalState::new(states.clone()))
            }
        }
    }

    fn guard(&self, i: NodeId, view: &View<ModTreeNode>) -> Option<RuleId> {
        let own = view.own();
        if self.is_leaf(i) {
            let target = ModTreeNode { shift: 0, pow: 1 % self.m, ans: self.leaf_value(i) };
            if own.shift != target.shift {
                return Some(0);
            }
            if own.pow != target.pow {
                return Some(1);
            }
            return (own.ans != target.ans).then_some(2);
        }
        let l = view.get(2 * i + 1);
        if own.shift != self.shift_target(l.shift) {
            return Some(0);
        }
        if own.pow != self.pow_target(own, l) {
            return Some(1);
        }
        (own.ans != self.ans_target(own, l, view.get(2 * i + 2))).then_some(2)
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<ModTreeNode>) -> MoveEffect<ModTreeNode> {
        let own = view.own();
        let mut next = own.clone();
        if self.is_leaf(i) {
            match rule {
                0 => next.shift = 0,
                1 => next.pow = 1 % self.m,
                _ => next.ans = self.leaf_value(i),
            }
        } else {
            let l = view.get(2 * i + 1);
            match rule {
                0 => next.shift = self.shift_target(l.shift),
                1 => next.pow = self.pow_target(own, l),
                _ => next.ans = self.ans_target(own, l, view.get(2 * i + 2)),
            }
        }
        MoveEffect::own(i, next)
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<ModTreeNode>) -> Option<u64> {
        None
    }

    fn optimal(&self, state: &GlobalState<ModTreeNode>) -> bool {
        state.states == self.fixpoint
    }
}
