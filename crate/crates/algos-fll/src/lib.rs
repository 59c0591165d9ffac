//! Fully lattice-linear algorithms over node sets.
//!
//! Where the eventually lattice-linear algorithms (the `algos-ell` crate)
//! bolt a corrective phase onto a lattice-linear descent, the algorithms
//! here induce lattices that cover the *entire* reachable state space: from
//! any initial state, the silent state is already determined, and every
//! scheduler — sequential, batched, or asynchronous with stale monotonic
//! reads — walks the same lattice to the same supremum. The price is a
//! stronger guard: a node moves only when it beats every other unsatisfied
//! node in a neighbourhood wide enough that its reasoning cannot be
//! invalidated, and some algorithms need *complex actions* that rewrite a
//! neighbour's state in the same atomic move.
//!
//! The algorithms:
//!
//! * [`mds_fll_spec`] — minimal dominating set via a single toggle rule;
//!   the unsatisfied-node tiebreak spans `Adj³`.
//! * [`mds_d1_spec`] — the same algorithm restated so every guard reads
//!   only direct neighbours: five bookkeeping fields per node cache the
//!   distance-2..5 facts, and six rules keep them honest.
//! * [`gc_fll_spec`] — graph colouring with one rule: an impedensable node
//!   takes the least free colour, whether it is escaping a conflict or
//!   shrinking a reducible colour.
//! * [`mvc_fll_spec`] / [`mis_fll_spec`] — minimal vertex cover and maximal
//!   independent set. A plain id tiebreak provably cannot work here (a path
//!   of four nodes cycles); entering the cover must atomically force the
//!   neighbours it makes removable out, so these use complex actions.
//! * [`mvc_fll_simple_spec`] — the vertex cover algorithm re-expressed with
//!   simple actions: an `addable` flag published by a fresh entrant hands
//!   its neighbours priority to leave before anyone else moves.
//! * [`vc_2approx_spec`] / [`vc_2approx_dist_spec`] — the classic pick-an-
//!   uncovered-edge 2-approximation for vertex cover, run concurrently. Not
//!   self-stabilizing: both insist on the all-out, nothing-done start. The
//!   distributed form replaces the atomic pair entry with a `point` field
//!   and lets a pointed node decline when its edges are already covered.

use sim_engine::{NodeId, ReadRadius};

mod gc;
mod mds;
mod mis;
mod mvc;
mod vc2a;

pub use algos_ell::{in_set, Membership};
pub use gc::{gc_fll_spec, GcFll};
pub use mds::{mds_d1_spec, mds_fll_spec, MdsD1, MdsD1State, MdsFll};
pub use mis::{mis_fll_spec, MisFll};
pub use mvc::{mvc_fll_simple_spec, mvc_fll_spec, MvcFll, MvcFllSimple, MvcSimpleState};
pub use vc2a::{vc_2approx_dist_spec, vc_2approx_spec, Vc2a, Vc2aDist, Vc2aState};

/// Observed sets for a bounded read radius: `Adj^r_i` per node.
fn bounded_observed(g: &graph_core::Graph, r: usize) -> Vec<Vec<NodeId>> {
    (0..g.n()).map(|i| g.adj_within(i, r)).collect()
}

/// Radius helper shared by the algorithms here.
fn radius(r: usize) -> ReadRadius {
    ReadRadius::Bounded(r)
}
