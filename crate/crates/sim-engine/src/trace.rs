//! Run traces: per-move records, round accounting, JSON-lines rendering.

use std::io::Write;
use std::time::Duration;

use crate::algorithm::{GlobalState, NodeId};
use crate::config::{ReadModel, Scheduler, Verdict};

/// One fired rule. `old` and `new` cover exactly the nodes the move wrote,
/// so a trace can be replayed (and audited) without any other context.
#[derive(Debug, Clone)]
pub struct MoveRecord<S> {
    /// Index into the trace's evaluation-step log at which the rule fired.
    pub step: u64,
    /// The node that evaluated the guard.
    pub node: NodeId,
    /// Name of the fired rule.
    pub rule: String,
    /// `(publisher, lag)` for every read that was stale; fresh reads are
    /// implicit. A lag of `k` means the value was `k` writes behind.
    pub reads: Vec<(NodeId, u64)>,
    /// Written nodes' states before the move.
    pub old: Vec<(NodeId, S)>,
    /// Written nodes' states after the move.
    pub new: Vec<(NodeId, S)>,
}

impl<S: serde::Serialize> MoveRecord<S> {
    /// The record as one JSON object (the unit of the JSON-lines format).
    pub fn to_json(&self) -> serde_json::Value {
        let map = |pairs: &[(NodeId, S)]| -> serde_json::Value {
            pairs
                .iter()
                .map(|(j, s)| (j.to_string(), serde_json::to_value(s).expect("state serializes")))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let reads: serde_json::Map<_, _> = self
            .reads
            .iter()
            .map(|(j, lag)| (j.to_string(), serde_json::Value::from(*lag)))
            .collect();
        serde_json::json!({
            "step": self.step,
            "node": self.node,
            "rule": self.rule,
            "reads": serde_json::Value::from(reads),
            "old": map(&self.old),
            "new": map(&self.new),
        })
    }
}

/// Everything one run produced. Besides the move records, the trace keeps the
/// full evaluation-step log (which nodes evaluated guards at each step), from
/// which round counts are derived and re-derivable.
#[derive(Debug, Clone)]
pub struct Trace<S> {
    pub algorithm: String,
    pub scheduler: Scheduler,
    pub model: ReadModel,
    pub stale_max: usize,
    pub seed: u64,
    pub initial: GlobalState<S>,
    pub final_state: GlobalState<S>,
    pub records: Vec<MoveRecord<S>>,
    /// Nodes that evaluated their guards at each step, in step order.
    pub evals: Vec<Vec<NodeId>>,
    pub verdict: Verdict,
    pub moves: u64,
    /// Completed rounds when the run stopped (see [`count_rounds`]).
    pub rounds: u64,
    pub wall: Duration,
}

impl<S> Trace<S> {
    /// Number of moves fired strictly after the `k`-th round completed
    /// (0 if fewer than `k` rounds completed before the run stopped).
    ///
    /// This is the measurable form of "converges within `k` rounds plus `b`
    /// moves": the moves after round `k` must number at most `b`.
    pub fn moves_after_rounds(&self, k: u64) -> u64 {
        match round_completion_step(&self.evals, self.initial.n(), k) {
            Some(t) => self.records.iter().filter(|r| r.step > t).count() as u64,
            None => 0,
        }
    }

    /// Nodes that moved at least once.
    pub fn movers(&self) -> std::collections::BTreeSet<NodeId> {
        self.records.iter().map(|r| r.node).collect()
    }
}

impl<S: serde::Serialize> Trace<S> {
    /// Writes the move records as JSON lines, one object per fired rule.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for rec in &self.records {
            serde_json::to_writer(&mut out, &rec.to_json())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Recounts completed rounds from an evaluation-step log: a round is a
/// minimal segment of steps in which every node evaluated its guards at
/// least once, and rounds partition the log greedily from the front. The
/// trailing partial segment (if any) is not counted.
pub fn count_rounds(evals: &[Vec<NodeId>], n: usize) -> u64 {
    let mut rounds = 0;
    let mut seen = vec![false; n];
    let mut missing = n;
    for step in evals {
        for &i in step {
            if !seen[i] {
                seen[i] = true;
                missing -= 1;
            }
        }
        if missing == 0 {
            rounds += 1;
            seen.iter_mut().for_each(|b| *b = false);
            missing = n;
        }
    }
    rounds
}

/// Step index at which the `k`-th round completes, if it does.
fn round_completion_step(evals: &[Vec<NodeId>], n: usize, k: u64) -> Option<u64> {
    if k == 0 {
        return None;
    }
    let mut rounds = 0;
    let mut seen = vec![false; n];
    let mut missing = n;
    for (t, step) in evals.iter().enumerate() {
        for &i in step {
            if !seen[i] {
                seen[i] = true;
                missing -= 1;
            }
        }
        if missing == 0 {
            rounds += 1;
            if rounds == k {
                return Some(t as u64);
            }
            seen.iter_mut().for_each(|b| *b = false);
            missing = n;
        }
    }
    None
}
