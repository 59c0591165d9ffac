//! True-concurrency runner: nodes multiplexed over worker threads.
//!
//! Unlike the simulator, nothing here is scheduled or sampled — each node is
//! owned by one worker thread, publishes its state to a lock-free
//! epoch-managed slot, and reads neighbours' slots as they happen to be at
//! that instant. Per-location coherence makes successive reads of any one
//! slot monotonic in its write order, so the staleness a reader experiences
//! is exactly the monotonic-read model; algorithms must therefore claim at
//! least [`ReadModel::Amr`] to run here. Rules that write other nodes are
//! rejected outright: the single-writer-per-slot discipline is what keeps the
//! data structure lock-free.
//!
//! Two modes are provided for comparison:
//!
//! * [`ConcurrencyMode::FreeRunning`] — event-driven: a node is re-evaluated
//!   only when something it observes changed. Quiescence is detected with a
//!   global outstanding-work counter.
//! * [`ConcurrencyMode::Lockstep`] — barrier-synchronized full sweeps: every
//!   worker evaluates its whole partition each sweep, and the run ends after
//!   a sweep in which nobody fired (nothing was published during such a
//!   sweep, so every guard was evaluated against the final state).

use std::sync::atomic::{fence, AtomicBool, AtomicU64, Ordering};
use std::sync::Barrier;
use std::time::{Duration, Instant};

use crossbeam::epoch::{self, Atomic, Owned};
use crossbeam::queue::SegQueue;

use crate::algorithm::{Algorithm, GlobalState, NodeId, View, ViewEntry};
use crate::config::{EngineError, InitMode, ReadModel, Verdict};

/// How worker threads coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcurrencyMode {
    /// Event-driven, no barriers; nodes re-evaluate only when marked dirty.
    FreeRunning,
    /// Barrier-synchronized full sweeps.
    Lockstep,
}

impl std::fmt::Display for ConcurrencyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConcurrencyMode::FreeRunning => "free-running",
            ConcurrencyMode::Lockstep => "lockstep",
        })
    }
}

/// What a concurrent run reports. There is no trace: interleaving is real,
/// so per-move read lags are not observable.
#[derive(Debug, Clone)]
pub struct ConcurrentReport<S> {
    pub final_state: GlobalState<S>,
    pub verdict: Verdict,
    pub moves: u64,
    /// Guard evaluations performed (all workers combined).
    pub evals: u64,
    pub threads: usize,
    pub wall: Duration,
}

/// Initializes the algorithm and runs it to quiescence on `threads` worker
/// threads (default: available parallelism, capped by node count).
pub fn run_concurrent<A: Algorithm>(
    alg: &A,
    init: &InitMode<A::State>,
    mode: ConcurrencyMode,
    threads: Option<usize>,
    move_cap: u64,
) -> Result<ConcurrentReport<A::State>, EngineError> {
    if alg.complex_actions() {
        return Err(EngineError::ConcurrentUnsupported(format!(
            "{} has rules that write other nodes; concurrent slots have a single writer",
            alg.name()
        )));
    }
    if alg.claimed_model() == ReadModel::Fresh {
        return Err(EngineError::ConcurrentUnsupported(format!(
            "{} requires fresh reads, which true concurrency cannot provide",
            alg.name()
        )));
    }
    let s0 = alg.init(init)?;
    let n = alg.n_nodes();
    let threads = threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
        .clamp(1, n.max(1));

    let observed: Vec<Vec<NodeId>> = (0..n).map(|i| alg.observed(i)).collect();
    let mut observers: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (i, obs) in observed.iter().enumerate() {
        for &j in obs {
            observers[j].push(i);
        }
    }
    let slots: Vec<Atomic<A::State>> =
        s0.states.iter().map(|s| Atomic::new(s.clone())).collect();

    let shared = Shared {
        alg,
        observed: &observed,
        observers: &observers,
        slots: &slots,
        moves: AtomicU64::new(0),
        evals: AtomicU64::new(0),
        capped: AtomicBool::new(false),
        move_cap,
    };

    let started = Instant::now();
    match mode {
        ConcurrencyMode::FreeRunning => run_free(&shared, n, threads),
        ConcurrencyMode::Lockstep => run_lockstep(&shared, n, threads),
    }
    let wall = started.elapsed();

    let verdict =
        if shared.capped.load(Ordering::SeqCst) { Verdict::Capped } else { Verdict::Silent };
    let moves = shared.moves.load(Ordering::SeqCst);
    let evals = shared.evals.load(Ordering::SeqCst);
    drop(shared);

    // Workers are done; collect final states and reclaim the slots.
    let final_states: Vec<A::State> = slots
        .into_iter()
        .map(|slot| {
            let owned = unsafe { slot.into_owned() };
            (*owned).clone()
        })
        .collect();
    Ok(ConcurrentReport {
        final_state: GlobalState::new(final_states),
        verdict,
        moves,
        evals,
        threads,
        wall,
    })
}

struct Shared<'a, A: Algorithm> {
    alg: &'a A,
    observed: &'a [Vec<NodeId>],
    observers: &'a [Vec<NodeId>],
    slots: &'a [Atomic<A::State>],
    moves: AtomicU64,
    evals: AtomicU64,
    capped: AtomicBool,
    move_cap: u64,
}

impl<A: Algorithm> Shared<'_, A> {
    /// Evaluates node `j` against the slots as they are now; publishes and
    /// returns `true` if a rule fired.
    fn eval_fire(&self, j: NodeId) -> bool {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let guard = epoch::pin();
        let own = unsafe { self.slots[j].load(Ordering::Acquire, &guard).deref() }.clone();
        let entries = self.observed[j]
            .iter()
            .map(|&k| ViewEntry {
                node: k,
                state: unsafe { self.slots[k].load(Ordering::Acquire, &guard).deref() }.clone(),
                lag: 0,
            })
            .collect();
        let view = View::new(j, own, entries);
        let Some(rule) = self.alg.guard(j, &view) else { return false };
        let effect = self.alg.action(j, rule, &view);
        debug_assert!(
            effect.writes.len() == 1 && effect.writes[0].0 == j,
            "concurrent rules write only the mover"
        );
        let (_, new_state) = effect.writes.into_iter().next().expect("non-empty effect");
        let old = self.slots[j].swap(Owned::new(new_state), Ordering::AcqRel, &guard);
        unsafe { guard.defer_destroy(old) };
        if self.moves.fetch_add(1, Ordering::SeqCst) + 1 >= self.move_cap {
            self.capped.store(true, Ordering::SeqCst);
        }
        true
    }
}

/// Event-driven execution. A dirty mark on node `j` is a promise that `j`
/// will be re-evaluated after the mark; the `work` counter counts marks not
/// yet fully processed, so `work == 0` means no evaluation is owed, running,
/// or about to be scheduled — quiescence.
fn run_free<A: Algorithm>(shared: &Shared<'_, A>, n: usize, threads: usize) {
    let queues: Vec<SegQueue<NodeId>> = (0..threads).map(|_| SegQueue::new()).collect();
    let in_queue: Vec<AtomicBool> = (0..n).map(|_| AtomicBool::new(false)).collect();
    let work = AtomicU64::new(0);

    let mark_dirty = |j: NodeId| {
        if !in_queue[j].swap(true, Ordering::SeqCst) {
            work.fetch_add(1, Ordering::SeqCst);
            queues[j % threads].push(j);
        }
    };
    for j in 0..n {
        mark_dirty(j);
    }

    std::thread::scope(|scope| {
        for t in 0..threads {
            let queues = &queues;
            let in_queue = &in_queue;
            let work = &work;
            scope.spawn(move || loop {
                if shared.capped.load(Ordering::SeqCst) {
                    break;
                }
                match queues[t].pop() {
                    Some(j) => {
                        // Clear the mark before reading inputs: a publish
                        // that lands after this point re-marks j, a publish
                        // that landed before it is visible to the reads
                        // below (both sides fence).
                        in_queue[j].store(false, Ordering::SeqCst);
                        fence(Ordering::SeqCst);
                        if shared.eval_fire(j) {
                            fence(Ordering::SeqCst);
                            for &o in &shared.observers[j] {
                                if !in_queue[o].swap(true, Ordering::SeqCst) {
                                    work.fetch_add(1, Ordering::SeqCst);
                                    queues[o % threads].push(o);
                                }
                            }
                            // The mover's own guard may still hold.
                            if !in_queue[j].swap(true, Ordering::SeqCst) {
                                work.fetch_add(1, Ordering::SeqCst);
                                queues[t].push(j);
                            }
                        }
                        work.fetch_sub(1, Ordering::SeqCst);
                    }
                    None => {
                        if work.load(Ordering::SeqCst) == 0 {
                            break;
                        }
                        std::thread::yield_now();
                    }
                }
            });
        }
    });
}

/// Barrier-synchronized full sweeps. Publishes are immediate (slots are the
/// only state), so within a sweep a reader may see a same-sweep write; the
/// termination rule is unaffected because a fire-free sweep publishes
/// nothing.
fn run_lockstep<A: Algorithm>(shared: &Shared<'_, A>, n: usize, threads: usize) {
    let barrier = Barrier::new(threads);
    let fired_this_sweep = AtomicU64::new(0);
    let stop = AtomicBool::new(false);

    std::thread::scope(|scope| {
        for t in 0..threads {
            let barrier = &barrier;
            let fired_this_sweep = &fired_this_sweep;
            let stop = &stop;
            scope.spawn(move || loop {
                let mut fired = 0u64;
                let mut j = t;
                while j < n {
                    if shared.eval_fire(j) {
                        fired += 1;
                    }
                    j += threads;
                }
                fired_this_sweep.fetch_add(fired, Ordering::SeqCst);
                if barrier.wait().is_leader() {
                    let total = fired_this_sweep.swap(0, Ordering::SeqCst);
                    if total == 0 || shared.capped.load(Ordering::SeqCst) {
                        stop.store(true, Ordering::SeqCst);
                    }
                }
                barrier.wait();
                if stop.load(Ordering::SeqCst) {
                    break;
                }
            });
        }
    });
}
