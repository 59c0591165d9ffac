//! Self-stabilising modulo over a chain: one node per bit of `n`.
//!
//! Node `i` settles to the residue of the prefix `n[0..=i]` modulo `m`. The
//! prefix residue obeys `r_i = (2·r_{i-1} + n[i]) mod m`, i.e. one step of
//! the divisibility automaton (see [`crate::build_mod_dfa`]), so each node
//! has a single rule: recompute its residue from its left neighbour and its
//! own bit of the input. Settling sweeps left to right; the last node ends
//! up holding `n mod m`.
//!
//! The two [`LinearMode`]s compute the same transition — [`LinearMode::Dfa`]
//! looks it up in a materialised table (moduli under 2^16), while
//! [`LinearMode::LongDivision`] computes `(2r + b) mod m` directly and takes
//! any modulus fitting in a `u64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim_engine::{
    Algorithm, EngineError, GlobalState, InitMode, MoveEffect, NodeId, ReadModel, ReadRadius,
    RuleId, View,
};

use crate::bits::{ArithError, BitString};
use crate::mod_dfa::{build_mod_dfa, ModDfa};

/// How each node computes the residue transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearMode {
    /// Table lookup in the divisibility automaton (modulus < 2^16).
    Dfa,
    /// Direct `(2r + b) mod m` arithmetic (any modulus fitting a `u64`).
    LongDivision,
}

/// The chain algorithm; node states are residues in `0..m`.
pub struct LinearMod {
    n: BitString,
    m: u64,
    mode: LinearMode,
    dfa: Option<ModDfa>,
    fixpoint: Vec<u64>,
}

/// Builds the residue chain for `n mod m`.
pub fn mod_linear_spec(
    n: &BitString,
    m: &BitString,
    mode: LinearMode,
) -> Result<LinearMod, ArithError> {
    if n.is_empty() {
        return Err(ArithError::Empty);
    }
    if m.is_zero() {
        return Err(ArithError::ZeroModulus);
    }
    let m_canon = m.canon();
    if m_canon.len() > 64 {
        return Err(ArithError::ModulusTooLarge { bits: m_canon.len(), limit: 64 });
    }
    let m_val = m_canon.value().unwrap() as u64;
    let dfa = match mode {
        LinearMode::Dfa => Some(build_mod_dfa(m_val)?),
        LinearMode::LongDivision => None,
    };
    let mut alg = LinearMod { n: n.clone(), m: m_val, mode, dfa, fixpoint: Vec::new() };
    let mut r = 0u64;
    for &b in n.bits() {
        r = alg.step(r, b);
        alg.fixpoint.push(r);
    }
    Ok(alg)
}

impl LinearMod {
    fn step(&self, prev: u64, bit: u8) -> u64 {
        match &self.dfa {
            Some(dfa) => u64::from(dfa.step(prev as u32, bit)),
            None => ((2 * u128::from(prev) + u128::from(bit)) % u128::from(self.m)) as u64,
        }
    }

    fn target(&self, i: NodeId, view: &View<u64>) -> u64 {
        let prev = if i == 0 { 0 } else { *view.get(i - 1) };
        self.step(prev, self.n.bits()[i])
    }

    /// The silent state: running prefix residues.
    pub fn fixpoint_state(&self) -> GlobalState<u64> {
        GlobalState::new(self.fixpoint.clone())
    }

    /// `n mod m` (the last node's final residue).
    pub fn residue(&self) -> u64 {
        *self.fixpoint.last().unwrap()
    }
}

impl Algorithm for LinearMod {
    type State = u64;

    fn name(&self) -> &str {
        match self.mode {
            LinearMode::Dfa => "mod-linear-dfa",
            LinearMode::LongDivision => "mod-linear-ld",
        }
    }

    fn n_nodes(&self) -> usize {
        self.n.len()
    }

    fn rules(&self) -> &[&str] {
        &["settle"]
    }

    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        if i == 0 { Vec::new() } else { vec![i - 1] }
    }

    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(1)
    }

    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }

    fn init(&self, mode: &InitMode<u64>) -> Result<GlobalState<u64>, EngineError> {
        match mode {
            InitMode::Canonical => Ok(GlobalState::new(vec![0; self.n.len()])),
            InitMode::Named(name) if name == "fixpoint" => Ok(self.fixpoint_state()),
            InitMode::Named(other) => {
                Err(EngineError::InitRejected(format!("unknown named init {other:?}")))
            }
            InitMode::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(GlobalState::new(
                    (0..self.n.len()).map(|_| rng.gen_range(0..self.m)).collect(),
                ))
            }
            InitMode::Explicit(states) => {
                if states.len() != self.n.len() {
                    return Err(EngineError::InitRejected(format!(
                        "expected {} node states, got {}",
                        self.n.len(),
                        states.len()
                    )));
                }
                if let Some((i, &r)) = states.iter().enumerate().find(|&(_, &r)| r >= self.m) {
                    return Err(EngineError::InitRejected(format!(
                        "node {i} residue {r} is not below the modulus {}",
                        self.m
                    )));
                }
                Ok(GlobalState::new(states.clone()))
            }
        }
    }

    fn guard(&self, i: NodeId, view: &View<u64>) -> Option<RuleId> {
        (*view.own() != self.target(i, view)).then_some(0)
    }

    fn action(&self, i: NodeId, _rule: RuleId, view: &View<u64>) -> MoveEffect<u64> {
        MoveEffect::own(i, self.target(i, view))
    }

    fn state_value(&self, _i: NodeId, _state: &GlobalState<u64>) -> Option<u64> {
        None
    }

    fn optimal(&self, state: &GlobalState<u64>) -> bool {
        state.states == self.fixpoint
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sim_engine::{run, RunConfig, Scheduler, Verdict};

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn twenty_seven_mod_three_both_modes() {
        for mode in [LinearMode::Dfa, LinearMode::LongDivision] {
            let alg = mod_linear_spec(&bs("11011"), &bs("11"), mode).unwrap();
            assert_eq!(alg.residue(), 0);
            let cfg = RunConfig::fresh(Scheduler::Central, 5, 10_000);
            let trace = run(&alg, &InitMode::Canonical, &cfg).unwrap();
            assert_eq!(trace.verdict, Verdict::Silent);
            assert_eq!(*trace.final_state.states.last().unwrap(), 0);
            assert!(alg.optimal(&trace.final_state));
        }
    }

    #[test]
    fn n_equal_to_m_gives_zero() {
        let alg = mod_linear_spec(&bs("11011"), &bs("11011"), LinearMode::LongDivision).unwrap();
        assert_eq!(alg.residue(), 0);
    }

    #[test]
    fn modulus_one_sends_everything_to_zero() {
        let alg = mod_linear_spec(&bs("10110"), &bs("1"), LinearMode::Dfa).unwrap();
        assert_eq!(alg.fixpoint_state().states, vec![0; 5]);
    }

    #[test]
    fn mode_limits() {
        // 2^16 needs the long-division mode; the table mode rejects it.
        let big = BitString::from_value(1 << 16);
        assert!(mod_linear_spec(&bs("101"), &big, LinearMode::Dfa).is_err());
        let alg = mod_linear_spec(&bs("101"), &big, LinearMode::LongDivision).unwrap();
        assert_eq!(alg.residue(), 5);
        assert!(matches!(
            mod_linear_spec(&bs("1"), &BitString::zero(), LinearMode::Dfa),
            Err(ArithError::ZeroModulus)
        ));
    }
}
