//! Self-stabilising arithmetic over node arrays.
//!
//! Multiplication and modulo, decomposed into trees (and one chain) of
//! single-writer nodes that settle leaf-to-root: each node owns a small
//! state and repeatedly recomputes it from what it reads of its neighbours,
//! so the array converges to the answer from any initial state and keeps
//! converging when reads are stale, as long as successive reads of the same
//! node never go backward. All four algorithms run on the same execution
//! engine as the graph algorithms in the companion crates.
//!
//! * [`mul_standard_spec`] — schoolbook combine over a binary tree, one leaf
//!   per multiplier bit.
//! * [`mul_karatsuba_spec`] — three-way splits over a ternary tree, with
//!   carry book-keeping that keeps every subproblem at a power-of-two width;
//!   two operand-flow forms (see [`OperandFlow`]).
//! * [`mod_linear_spec`] — prefix residues along a chain, via a divisibility
//!   automaton table or direct long-division arithmetic.
//! * [`mod_tree_spec`] — chunk residues over a binary tree with a settled
//!   `2^shift mod m` ladder.
//!
//! The plain-function counterparts ([`division_modulo`], [`build_mod_dfa`],
//! [`BitString`] arithmetic) double as oracles for the node arrays.

mod bits;
mod karatsuba;
mod mod_dfa;
mod mod_linear;
mod mod_tree;
mod mul_standard;

pub use bits::{division_modulo, ArithError, BitString};
pub use karatsuba::{mul_karatsuba_spec, KaratsubaMul, KaratsubaNode, OperandFlow};
pub use mod_dfa::{build_mod_dfa, ModDfa, DFA_MODULUS_LIMIT};
pub use mod_linear::{mod_linear_spec, LinearMod, LinearMode};
pub use mod_tree::{mod_tree_spec, ModTreeNode, TreeMod};
pub use mul_standard::{mul_standard_spec, MulNode, StandardMul};
