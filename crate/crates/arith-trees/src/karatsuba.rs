//! Self-stabilising Karatsuba multiplication over a ternary tree.
//!
//! A node multiplying s-bit operands `n = a·2^h + b`, `m = c·2^h + d`
//! (h = s/2) delegates three half-size products to its children — `a·c`,
//! `b·d`, and the truncated-sum product `sa·sc` where `sa`/`sc` are the low
//! h bits of `a+b` and `c+d` — and recombines them with the classical
//! identity `ad + bc = (a+b)(c+d) − ac − bd`, reconstructing the full sum
//! product from the truncated one with the two carry bits it can recompute
//! locally:
//!
//! ```text
//! (a+b)(c+d) = sa·sc + ca·sc·2^h + cc·sa·2^h + ca·cc·2^2h
//! ```
//!
//! Keeping the children's operands at exactly h bits is what lets the whole
//! tree be sized statically: every subproblem at depth k has `s/2^k`-bit
//! operands, so the tree is a complete ternary heap (children of `i` are
//! `3i+1` = high product, `3i+2` = low product, `3i+3` = truncated-sum
//! product) with `(3^(k+1) − 1)/2` nodes for `|n| = 2^k` leaves of single-bit
//! products.
//!
//! Operands have to reach the children somehow, and the two [`OperandFlow`]
//! forms differ exactly there:
//!
//! * **Push**: a node rewrites any child whose operand slice disagrees with
//!   its own (a multi-node write). A child holds off settling until its
//!   operands agree with what its parent would push, so a push and a settle
//!   never target the same node in one synchronous step. Because the push
//!   rewrites the child's whole state with the *observed* shift/answer, a
//!   stale observation would roll the child back; the form therefore claims
//!   fresh reads only.
//! * **Pull**: a node derives its own operands from its parent's published
//!   state (the root from the inputs) and every write is a self-write. This
//!   form tolerates monotonic stale reads and is the one the concurrent
//!   runner accepts.
//!
//! Both forms share the settle rule and the same silent state: the unique
//! fixpoint where every node holds its operand slices and their product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::bits::{ArithError, BitString};

/// How operand slices travel from the root to the leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandFlow {
    /// Parents write their children's operand fields (multi-node writes;
    /// fresh reads only).
    Push,
    /// Each node derives its operands from its parent (self-writes only;
    /// tolerates monotonic stale reads).
    Pull,
}

/// Per-node state: the node's operand slices, the combining shift, and the
/// partial product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize)]
pub struct KaratsubaNode {
    pub n: BitString,
    pub m: BitString,
    pub shift: usize,
    pub ans: BitString,
}

/// The ternary multiplication tree; see the module docs.
pub struct KaratsubaMul {
    n: BitString,
    m: BitString,
    flow: OperandFlow,
    n_nodes: usize,
    fixpoint: Vec<KaratsubaNode>,
}

/// Builds the Karatsuba tree for `n × m`. Requires `|n| = |m|`, a power of
/// two (pad the shorter operand on the left if needed).
pub fn mul_karatsuba_spec(
    n: &BitString,
    m: &BitString,
    flow: OperandFlow,
) -> Result<KaratsubaMul, ArithError> {
    if n.is_empty() || m.is_empty() {
        return Err(ArithError::Empty);
    }
    if n.len() != m.len() || !n.len().is_power_of_two() {
        return Err(ArithError::BadLength(format!(
            "operands have {} and {} bits, need equal powers of two",
            n.len(),
            m.len()
        )));
    }
    let mut n_nodes = 1;
    let mut level = 1;
    let mut size = n.len();
    while size > 1 {
        level *= 3;
        n_nodes += level;
        size /= 2;
    }
    let mut alg =
        KaratsubaMul { n: n.clone(), m: m.clone(), flow, n_nodes, fixpoint: Vec::new() };

    // Operand slices flow top-down, products bottom-up.
    let mut ops = vec![(BitString::zero(), BitString::zero()); n_nodes];
    ops[0] = (n.clone(), m.clone());
    for i in 0..n_nodes {
        if alg.is_internal(i) {
            for r in 0..3 {
                ops[3 * i + 1 + r] = child_operands(&ops[i].0, &ops[i].1, r);
            }
        }
    }
    let mut fix: Vec<Option<KaratsubaNode>> = vec![None; n_nodes];
    for i in (0..n_nodes).rev() {
        let (on, om) = ops[i].clone();
        let seed = KaratsubaNode { n: on, m: om, shift: 0, ans: BitString::zero() };
        let (shift, ans) = if alg.is_internal(i) {
            alg.settle_from(
                &seed,
                Some((
                    fix[3 * i + 1].as_ref().unwrap(),
                    fix[3 * i + 2].as_ref().unwrap(),
                    fix[3 * i + 3].as_ref().unwrap(),
                )),
            )
        } else {
            alg.settle_from(&seed, None)
        };
        fix[i] = Some(KaratsubaNode { shift, ans, ..seed });
    }
    alg.fixpoint = fix.into_iter().map(Option::unwrap).collect();
    Ok(alg)
}

/// The operand slice a child in the given role (0 = high, 1 = low,
/// 2 = truncated sum) derives from its parent's operands. Total for operands
/// of any length; exact halves once lengths are the intended powers of two.
fn child_operands(pn: &BitString, pm: &BitString, role: usize) -> (BitString, BitString) {
    let hn = pn.len() / 2;
    let hm = pm.len() / 2;
    match role {
        0 => (pn.high_above(hn), pm.high_above(hm)),
        1 => (pn.low_bits(hn), pm.low_bits(hm)),
        _ => (
            pn.high_above(hn).add(&pn.low_bits(hn)).low_bits(hn),
            pm.high_above(hm).add(&pm.low_bits(hm)).low_bits(hm),
        ),
    }
}

impl KaratsubaMul {
    fn is_internal(&self, i: NodeId) -> bool {
        3 * i + 1 < self.n_nodes
    }

    /// The operands node `i` should hold given its parent's state (`None`
    /// for the root, whose operands are the inputs).
    fn derived_ops(&self, i: NodeId, parent: Option<&KaratsubaNode>) -> (BitString, BitString) {
        match parent {
            None => (self.n.clone(), self.m.clone()),
            Some(p) => child_operands(&p.n, &p.m, (i - 1) % 3),
        }
    }

    /// Target shift and answer for a node holding `own` operands, given its
    /// children's states (`None` for leaves).
    fn settle_from(
        &self,
        own: &KaratsubaNode,
        children: Option<(&KaratsubaNode, &KaratsubaNode, &KaratsubaNode)>,
    ) -> (usize, BitString) {
        let Some((ac, bd, ss)) = children else {
            return (0, own.n.mul(&own.m));
        };
        let h = if ac.shift == 0 { 1 } else { ac.shift.saturating_mul(2) };

        let a = own.n.high_above(h);
        let b = own.n.low_bits(h);
        let c = own.m.high_above(h);
        let d = own.m.low_bits(h);
        let sum_n = a.add(&b);
        let ca = sum_n.len() > h; // carry out of the h-bit truncated sum
        let sa = sum_n.low_bits(h);
        let sum_m = c.add(&d);
        let cc = sum_m.len() > h;
        let sc = sum_m.low_bits(h);

        let mut rc = ss.ans.canon();
        if ca {
            rc = rc.add(&sc.lshift(h));
        }
        if cc {
            rc = rc.add(&sa.lshift(h));
        }
        if ca && cc {
            rc = rc.add(&BitString::one().lshift(2 * h));
        }
        let mid = rc.saturating_sub(&ac.ans).saturating_sub(&bd.ans);
        let ans = ac.ans.lshift(2 * h).add(&mid.lshift(h)).add(&bd.ans);
        (h, ans)
    }

    fn settle_target(&self, i: NodeId, view: &View<KaratsubaNode>) -> (usize, BitString) {
        if self.is_internal(i) {
            self.settle_from(
                view.own(),
                Some((view.get(3 * i + 1), view.get(3 * i + 2), view.get(3 * i + 3))),
            )
        } else {
            self.settle_from(view.own(), None)
        }
    }

    /// Whether node `i`'s operands already agree with their source.
    fn ops_pinned(&self, i: NodeId, view: &View<KaratsubaNode>) -> bool {
        let parent = (i > 0).then(|| view.get((i - 1) / 3));
        let (tn, tm) = self.derived_ops(i, parent);
        let own = view.own();
        own.n == tn && own.m == tm
    }

    /// The silent state both forms settle to.
    pub fn fixpoint_state(&self) -> GlobalState<KaratsubaNode> {
        GlobalState::new(self.fixpoint.clone())
    }

    /// The product `n × m` (the root's final answer), canonical.
    pub fn product(&self) -> BitString {
        self.fixpoint[0].ans.clone()
    }
}

impl Algorithm for KaratsubaMul {
    type State = KaratsubaNode;

    fn name(&self) -> &str {
        match self.flow {
            OperandFlow::Push => "mul-karatsuba",
            OperandFlow::Pull => "mul-karatsuba-pull",
        }
    }

    fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn rules(&self) -> &[&str] {
        match self.flow {
            OperandFlow::Push => &["operands", "distribute", "settle"],
            OperandFlow::Pull => &["operands", "settle"],
        }
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        let mut obs = Vec::new();
        if i > 0 {
            obs.push((i - 1) / 3);
        }
        if self.is_internal(i) {
            obs.extend([3 * i + 1, 3 * i + 2, 3 * i + 3]);
        }
        obs
    }

    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(1)
    }

    fn claimed_model(&self) -> ReadModel {
        match self.flow {
            OperandFlow::Push => ReadModel::Fresh,
            OperandFlow::Pull => ReadModel::Amr,
        }
    }

    fn complex_actions(&self) -> bool {
        self.flow == OperandFlow::Push
    }

    fn init(&self, mode: &InitMode<KaratsubaNode>) -> Result<GlobalState<KaratsubaNode>, EngineError> {
        let blank = KaratsubaNode {
            n: BitString::zero(),
            m: BitString::zero(),
            shift: 0,
            ans: BitString::zero(),
        };
        match mode {
            InitMode::Canonical => Ok(GlobalState::new(vec![blank; self.n_nodes])),
            InitMode::Named(name) if name == "fixpoint" => Ok(self.fixpoint_state()),
            InitMode::Named(other) => {
                Err(EngineError::InitRejected(format!("unknown named init {other:?}")))
            }
            InitMode::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let len = self.n.len();
                fn rand_bits(rng: &mut ChaCha8Rng, cap: usize) -> BitString {
                    let l = rng.gen_range(0..=cap);
                    BitString::from_bits((0..l).map(|_| rng.gen_range(0..=1u8)).collect())
                }
                let states = (0..self.n_nodes)
                    .map(|_| KaratsubaNode {
                        n: rand_bits(&mut rng, len),
                        m: rand_bits(&mut rng, len),
                        shift: rng.gen_range(0..=len),
                        ans: rand_bits(&mut rng, 2 * len),
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
                let len = self.n.len();
                for (i, s) in states.iter().enumerate() {
                    if s.n.len() > 2 * len
                        || s.m.len() > 2 * len
                        || s.shift > 4 * len
                        || s.ans.len() > 8 * len
                    {
                        return Err(EngineError::InitRejected(format!(
                            "node {i} state out of bounds for {len}-bit operands"
                        )));
                    }
                }
                Ok(GlobalState::new(states.clone()))
            }
        }
    }

    fn guard(&self, i: NodeId, view: &View<KaratsubaNode>) -> Option<RuleId> {
        let own = view.own();
        match self.flow {
            OperandFlow::Push => {
                if i == 0 && (own.n != self.n || own.m != self.m) {
                    return Some(0);
                }
                if self.is_internal(i) {
                    for r in 0..3 {
                        let (cn, cm) = child_operands(&own.n, &own.m, r);
                        let cs = view.get(3 * i + 1 + r);
                        if cs.n != cn || cs.m != cm {
                            return Some(1);
                        }
                    }
                }
                if self.ops_pinned(i, view) {
                    let (shift, ans) = self.settle_target(i, view);
                    if own.shift != shift || own.ans != ans {
                        return Some(2);
                    }
                }
                None
            }
            OperandFlow::Pull => {
                let parent = (i > 0).then(|| view.get((i - 1) / 3));
                let (tn, tm) = self.derived_ops(i, parent);
                if own.n != tn || own.m != tm {
                    return Some(0);
                }
                let (shift, ans) = self.settle_target(i, view);
                if own.shift != shift || own.ans != ans {
                    return Some(1);
                }
                None
            }
        }
    }

    fn action(&self, i: NodeId, rule: RuleId, view: &View<KaratsubaNode>) -> MoveEffect<KaratsubaNode> {
        let own = view.own();
        match (self.flow, rule) {
            // Root re-pins its operands to the inputs; shift/ans untouched.
            (OperandFlow::Push, 0) => MoveEffect::own(
                i,
                KaratsubaNode { n: self.n.clone(), m: self.m.clone(), ..own.clone() },
            ),
            // Rewrite exactly the children whose operand slices disagree,
            // carrying their observed shift/ans through unchanged.
            (OperandFlow::Push, 1) => {
                let mut writes = Vec::new();
                for r in 0..3 {
                    let c = 3 * i + 1 + r;
                    let (cn, cm) = child_operands(&own.n, &own.m, r);
                    let cs = view.get(c);
                    if cs.n != cn || cs.m != cm {
                        writes.push((c, KaratsubaNode { n: cn, m: cm, ..cs.clone() }));
                    }
                }
                MoveEffect::multi(writes)
            }
            (OperandFlow::Pull, 0) => {
                let parent = (i > 0).then(|| view.get((i - 1) / 3));
                let (tn, tm) = self.derived_ops(i, parent);
                MoveEffect::own(i, KaratsubaNode { n: tn, m: tm, ..own.clone() })
            }
            // Settle (last rule of either form).
            _ => {
                let (shift, ans) = self.settle_target(i, view);
                MoveEffect::own(i, KaratsubaNode { shift, ans, ..own.clone() })
            }
        }
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<KaratsubaNode>) -> Option<u64> {
        None
    }

    fn optimal(&self, state: &GlobalState<KaratsubaNode>) -> bool {
        state.states == self.fixpoint
    }
}
