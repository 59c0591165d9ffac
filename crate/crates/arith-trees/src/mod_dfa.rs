//! A divisibility automaton over the binary alphabet.
//!
//! State `q_k` means "the bits consumed so far are congruent to `k` mod `m`".
//! Reading bit `b` appends it at the least significant end, i.e. maps the
//! value `k` to `2k + b`, so the transition function is
//! `delta(q_k, b) = (2k + b) mod m`. Feeding a numeral in most-significant-
//! first order therefore ends in the state carrying its residue, and `q_0` is
//! the accepting state of the divisibility language.

use crate::bits::{ArithError, BitString};

/// Largest modulus for which the transition table is materialised.
pub const DFA_MODULUS_LIMIT: u64 = 1 << 16;

/// Table-driven residue automaton for a fixed modulus `m`.
#[derive(Debug, Clone)]
pub struct ModDfa {
    m: u64,
    /// `table[k][b]` = next state after reading bit `b` in state `q_k`.
    table: Vec<[u32; 2]>,
}

impl ModDfa {
    /// The modulus this automaton tracks residues for.
    pub fn modulus(&self) -> u64 {
        self.m
    }

    /// Number of states (= `m`).
    pub fn n_states(&self) -> usize {
        self.table.len()
    }

    /// One transition.
    pub fn step(&self, state: u32, bit: u8) -> u32 {
        self.table[state as usize][bit as usize]
    }

    /// Runs the automaton over a whole bit string from state `q_0`.
    pub fn run(&self, n: &BitString) -> u32 {
        let mut q = 0u32;
        for &b in n.bits() {
            q = self.step(q, b);
        }
        q
    }

    /// True if the string's value is divisible by the modulus.
    pub fn accepts(&self, n: &BitString) -> bool {
        self.run(n) == 0
    }
}

/// Builds the residue automaton for modulus `m`.
///
/// The table has one row per residue, so `m` is capped at
/// [`DFA_MODULUS_LIMIT`]; larger moduli should use long division instead.
pub fn build_mod_dfa(m: u64) -> Result<ModDfa, ArithError> {
    if m == 0 {
        return Err(ArithError::ZeroModulus);
    }
    if m >= DFA_MODULUS_LIMIT {
        return Err(ArithError::ModulusTooLarge {
            bits: 64 - m.leading_zeros() as usize,
            limit: 16,
        });
    }
    let table = (0..m)
        .map(|k| [((2 * k) % m) as u32, ((2 * k + 1) % m) as u32])
        .collect();
    Ok(ModDfa { m, table })
}
