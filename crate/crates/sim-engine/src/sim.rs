//! Deterministic single-threaded simulation.
//!
//! One seeded RNG drives every choice the run makes: which nodes evaluate,
//! and (under the async scheduler) how stale each read is. Repeating a run
//! with the same algorithm, initial state, and [`RunConfig`] reproduces it
//! bit for bit.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithm::{Algorithm, GlobalState, NodeId, RuleId, View, ViewEntry};
use crate::config::{EngineError, InitMode, ReadModel, RunConfig, Scheduler, Verdict};
use crate::trace::{count_rounds, MoveRecord, Trace};

/// Budget (in guard evaluations) for one attempt to certify that no
/// admissible stale view enables any rule. Exceeding it is not an error; the
/// run simply keeps going until the step valve closes it.
const CERT_BUDGET: usize = 20_000;

/// Safety valve on evaluation steps for runs that can neither fire moves nor
/// certify silence (only reachable when running an algorithm beyond its
/// claimed read model).
fn step_cap(n: usize, move_cap: u64) -> u64 {
    1_000_000u64.max(move_cap.saturating_mul(n as u64).saturating_mul(64))
}

/// Initializes the algorithm with `init` and runs it under `cfg`.
pub fn run<A: Algorithm + ?Sized>(
    alg: &A,
    init: &InitMode<A::State>,
    cfg: &RunConfig,
) -> Result<Trace<A::State>, EngineError> {
    let s0 = alg.init(init)?;
    run_from(alg, s0, cfg)
}

/// Runs the algorithm from an explicit initial state under `cfg`.
pub fn run_from<A: Algorithm + ?Sized>(
    alg: &A,
    s0: GlobalState<A::State>,
    cfg: &RunConfig,
) -> Result<Trace<A::State>, EngineError> {
    cfg.validate()?;
    let n = alg.n_nodes();
    if s0.n() != n {
        return Err(EngineError::InitRejected(format!(
            "state has {} nodes, algorithm has {n}",
            s0.n()
        )));
    }
    let started = Instant::now();
    let mut runner = Runner::new(alg, s0.clone(), cfg.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records: Vec<MoveRecord<A::State>> = Vec::new();
    let mut evals: Vec<Vec<NodeId>> = Vec::new();
    let mut moves = 0u64;
    let steps_max = step_cap(n, cfg.move_cap);

    let verdict = loop {
        if runner.enabled_fresh.is_empty() && runner.silence_certified() {
            break Verdict::Silent;
        }
        if moves >= cfg.move_cap || evals.len() as u64 >= steps_max {
            break Verdict::Capped;
        }
        let step = evals.len() as u64;
        match cfg.scheduler {
            Scheduler::Central | Scheduler::Async => {
                let i = rng.gen_range(0..n);
                evals.push(vec![i]);
                let view = runner.view(i, &mut rng);
                if let Some(rule) = alg.guard(i, &view) {
                    let rec = runner.fire(i, rule, &view, step)?;
                    records.push(rec);
                    moves += 1;
                }
            }
            Scheduler::Synchronous | Scheduler::Distributed => {
                let chosen: Vec<NodeId> = if cfg.scheduler == Scheduler::Synchronous {
                    (0..n).collect()
                } else {
                    let mut sub: Vec<NodeId> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                    if sub.is_empty() {
                        sub.push(rng.gen_range(0..n));
                    }
                    sub
                };
                evals.push(chosen.clone());
                // Everyone picked evaluates the same pre-state.
                let fired: Vec<(NodeId, RuleId, View<A::State>)> = chosen
                    .iter()
                    .filter_map(|&i| {
                        let view = View::fresh(i, &runner.state, &runner.observed[i]);
                        alg.guard(i, &view).map(|rule| (i, rule, view))
                    })
                    .collect();
                for rec in runner.fire_batch(&fired, step)? {
                    records.push(rec);
                    moves += 1;
                }
            }
        }
    };

    let rounds = count_rounds(&evals, n);
    Ok(Trace {
        algorithm: alg.name().to_string(),
        scheduler: cfg.scheduler,
        model: cfg.model,
        stale_max: cfg.stale_max,
        seed: cfg.seed,
        initial: s0,
        final_state: runner.state,
        records,
        evals,
        verdict,
        moves,
        rounds,
        wall: started.elapsed(),
    })
}

/// Re-executes a trace against the algorithm, checking that every recorded
/// move is reproduced exactly: same fired rule, same write set, same final
/// state. This is what makes guard/action purity checkable.
pub fn replay<A: Algorithm + ?Sized>(alg: &A, trace: &Trace<A::State>) -> Result<(), EngineError> {
    let n = alg.n_nodes();
    let observed: Vec<Vec<NodeId>> = (0..n).map(|i| alg.observed(i)).collect();
    // Full publication histories (every version of every node).
    let mut hist: Vec<Vec<A::State>> =
        trace.initial.states.iter().map(|s| vec![s.clone()]).collect();
    let mut state = trace.initial.clone();
    let violation = |node: usize, detail: String| EngineError::ContractViolation { node, detail };

    let mut k = 0;
    while k < trace.records.len() {
        // Records sharing a step were evaluated against the same pre-state.
        let step = trace.records[k].step;
        let mut batch = k;
        while batch < trace.records.len() && trace.records[batch].step == step {
            batch += 1;
        }
        let group = &trace.records[k..batch];
        let mut effects: Vec<Vec<(NodeId, A::State)>> = Vec::with_capacity(group.len());
        for rec in group {
            let i = rec.node;
            let lags: HashMap<NodeId, u64> = rec.reads.iter().copied().collect();
            let entries = observed[i]
                .iter()
                .map(|&j| {
                    let lag = lags.get(&j).copied().unwrap_or(0) as usize;
                    let len = hist[j].len();
                    if lag >= len {
                        return Err(violation(i, format!("recorded lag {lag} exceeds history of node {j}")));
                    }
                    Ok(ViewEntry { node: j, state: hist[j][len - 1 - lag].clone(), lag: lag as u64 })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let view = View::new(i, state[i].clone(), entries);
            let rule = alg
                .guard(i, &view)
                .ok_or_else(|| violation(i, "replay found the guard disabled".into()))?;
            if alg.rules()[rule] != rec.rule {
                return Err(violation(i, format!("replay fired '{}', trace has '{}'", alg.rules()[rule], rec.rule)));
            }
            let effect = alg.action(i, rule, &view);
            let got: HashMap<NodeId, &A::State> = effect.writes.iter().map(|(j, s)| (*j, s)).collect();
            let want: HashMap<NodeId, &A::State> = rec.new.iter().map(|(j, s)| (*j, s)).collect();
            if got != want {
                return Err(violation(i, "replay produced a different write set".into()));
            }
            for (j, s) in &rec.old {
                if state[*j] != *s {
                    return Err(violation(i, format!("recorded pre-state of node {j} does not match")));
                }
            }
            effects.push(effect.writes);
        }
        for writes in effects {
            for (j, s) in writes {
                state[j] = s.clone();
                hist[j].push(s);
            }
        }
        k = batch;
    }
    if state != trace.final_state {
        return Err(violation(0, "replayed final state differs from trace".into()));
    }
    Ok(())
}

/// Mutable run state shared by the scheduler arms.
struct Runner<'a, A: Algorithm + ?Sized> {
    alg: &'a A,
    n: usize,
    cfg: RunConfig,
    state: GlobalState<A::State>,
    /// Retained versions per node, newest at the back; length ≤ stale_max+1.
    hist: Vec<VecDeque<A::State>>,
    /// Latest published version index per node (the initial state is version 0).
    version: Vec<u64>,
    /// observed[i] — sorted nodes whose state node i may read.
    observed: Vec<Vec<NodeId>>,
    /// observers[j] — nodes whose observed set contains j.
    observers: Vec<Vec<NodeId>>,
    /// Monotonic-read floors, aligned with `observed[i]`.
    amr_floor: Vec<Vec<u64>>,
    /// links[j] — co-write floors, aligned with `hist[j]`. A view that holds
    /// version v of node j must hold every listed partner at or above the
    /// listed version; the floors accumulate over j's multi-writes so that
    /// holding a later version also honours the links of earlier ones.
    links: Vec<VecDeque<Vec<(NodeId, u64)>>>,
    /// Whether any multi-write has happened; all link vectors are empty
    /// until one does, and sampling skips the closure entirely.
    links_live: bool,
    /// Nodes whose guard holds under fresh reads.
    enabled_fresh: BTreeSet<NodeId>,
    /// Whether the run's read model is within the algorithm's claim, in which
    /// case fresh-silence implies real silence.
    within_claim: bool,
}

impl<'a, A: Algorithm + ?Sized> Runner<'a, A> {
    fn new(alg: &'a A, s0: GlobalState<A::State>, cfg: RunConfig) -> Result<Self, EngineError> {
        let n = alg.n_nodes();
        let mut observed = Vec::with_capacity(n);
        let mut observers = vec![Vec::new(); n];
        for i in 0..n {
            let mut obs = alg.observed(i);
            obs.sort_unstable();
            obs.dedup();
            if obs.iter().any(|&j| j >= n || j == i) {
                return Err(EngineError::ContractViolation {
                    node: i,
                    detail: "observed set contains self or an out-of-range node".into(),
                });
            }
            for &j in &obs {
                observers[j].push(i);
            }
            observed.push(obs);
        }
        let hist = s0.states.iter().map(|s| VecDeque::from([s.clone()])).collect();
        let amr_floor = observed.iter().map(|o| vec![0u64; o.len()]).collect();
        let within_claim = match cfg.model {
            ReadModel::Fresh => true,
            ReadModel::Amr => matches!(alg.claimed_model(), ReadModel::Amr | ReadModel::Aa),
            ReadModel::Aa => matches!(alg.claimed_model(), ReadModel::Aa),
        };
        let mut runner = Runner {
            alg,
            n,
            cfg,
            state: s0,
            hist,
            version: vec![0; n],
            observed,
            observers,
            amr_floor,
            links: (0..n).map(|_| VecDeque::from([Vec::new()])).collect(),
            links_live: false,
            enabled_fresh: BTreeSet::new(),
            within_claim,
        };
        for i in 0..n {
            runner.refresh_enabled(i);
        }
        Ok(runner)
    }

    fn refresh_enabled(&mut self, i: NodeId) {
        let view = View::fresh(i, &self.state, &self.observed[i]);
        if self.alg.guard(i, &view).is_some() {
            self.enabled_fresh.insert(i);
        } else {
            self.enabled_fresh.remove(&i);
        }
    }

    /// The view node `i` evaluates this step: fresh for the synchronized
    /// schedulers, sampled from publication history for the async one.
    ///
    /// Sampling is per publisher, then repaired so that no view straddles a
    /// multi-write: a rule that writes several registers publishes them as
    /// one transition, and a reader may lag behind the whole move but never
    /// hold one of its registers post-move and another pre-move. The
    /// reader's own register counts — a node whose current state carries a
    /// co-write sees its partners at or after that move.
    fn view(&mut self, i: NodeId, rng: &mut ChaCha8Rng) -> View<A::State> {
        if self.cfg.model == ReadModel::Fresh {
            return View::fresh(i, &self.state, &self.observed[i]);
        }
        let mut vers = Vec::with_capacity(self.observed[i].len());
        for (k, &j) in self.observed[i].iter().enumerate() {
            let latest = self.version[j];
            let len = self.hist[j].len() as u64;
            let oldest = latest + 1 - len;
            vers.push(match self.cfg.model {
                ReadModel::Fresh => latest,
                ReadModel::Aa => rng.gen_range(oldest..=latest),
                ReadModel::Amr => rng.gen_range(self.amr_floor[i][k].max(oldest)..=latest),
            });
        }
        self.close_atomic(i, &mut vers);
        if self.cfg.model == ReadModel::Amr {
            self.amr_floor[i].copy_from_slice(&vers);
        }
        let entries = self.observed[i]
            .iter()
            .zip(&vers)
            .map(|(&j, &ver)| {
                let latest = self.version[j];
                let oldest = latest + 1 - self.hist[j].len() as u64;
                ViewEntry {
                    node: j,
                    state: self.hist[j][(ver - oldest) as usize].clone(),
                    lag: latest - ver,
                }
            })
            .collect();
        View::new(i, self.state[i].clone(), entries)
    }

    /// Raises sampled versions until every co-write link of every held
    /// version — the reader's own fresh register included — is satisfied.
    /// Links only ever push a choice toward the latest version, so the loop
    /// terminates; links naming nodes outside the reader's observed set are
    /// vacuous for it.
    fn close_atomic(&self, i: NodeId, vers: &mut [u64]) {
        if !self.links_live {
            return;
        }
        let obs = &self.observed[i];
        loop {
            let mut demands = self.links[i].back().cloned().unwrap_or_default();
            for (&j, &ver) in obs.iter().zip(vers.iter()) {
                let oldest = self.version[j] + 1 - self.hist[j].len() as u64;
                demands.extend_from_slice(&self.links[j][(ver - oldest) as usize]);
            }
            let mut raised = false;
            for (q, floor) in demands {
                if let Ok(k) = obs.binary_search(&q) {
                    if vers[k] < floor {
                        vers[k] = floor;
                        raised = true;
                    }
                }
            }
            if !raised {
                return;
            }
        }
    }

    /// Fires one rule: contract checks, state/history update, move record.
    fn fire(
        &mut self,
        i: NodeId,
        rule: RuleId,
        view: &View<A::State>,
        step: u64,
    ) -> Result<MoveRecord<A::State>, EngineError> {
        let effect = self.alg.action(i, rule, view);
        self.check_effect(i, &effect.writes)?;
        // A multi-write transports facts its enabling view certified (a kick
        // says "I saw your other neighbours covered"), so its links carry the
        // view's version floors: whoever sees any register of the move also
        // sees everything the mover saw.
        let read_floors: Vec<(NodeId, u64)> = if effect.writes.len() > 1 {
            view.entries()
                .iter()
                .map(|e| (e.node, self.version[e.node] - e.lag))
                .collect()
        } else {
            Vec::new()
        };
        let old: Vec<(NodeId, A::State)> =
            effect.writes.iter().map(|(j, _)| (*j, self.state[*j].clone())).collect();
        self.apply(&effect.writes, &read_floors);
        Ok(MoveRecord {
            step,
            node: i,
            rule: self.alg.rules()[rule].to_string(),
            reads: view.stale_reads(),
            old,
            new: effect.writes,
        })
    }

    /// Fires every rule of a synchronous/distributed step. All effects were
    /// evaluated against the same pre-state; their write sets must be
    /// pairwise disjoint.
    fn fire_batch(
        &mut self,
        fired: &[(NodeId, RuleId, View<A::State>)],
        step: u64,
    ) -> Result<Vec<MoveRecord<A::State>>, EngineError> {
        let mut effects = Vec::with_capacity(fired.len());
        let mut targets: HashMap<NodeId, NodeId> = HashMap::new();
        for (i, rule, view) in fired {
            let effect = self.alg.action(*i, *rule, view);
            self.check_effect(*i, &effect.writes)?;
            for (j, _) in &effect.writes {
                if let Some(other) = targets.insert(*j, *i) {
                    return Err(EngineError::ContractViolation {
                        node: *i,
                        detail: format!(
                            "simultaneous moves of nodes {other} and {i} both write node {j}"
                        ),
                    });
                }
            }
            effects.push((*i, *rule, view, effect.writes));
        }
        let mut records = Vec::with_capacity(effects.len());
        for (i, rule, view, writes) in effects {
            let old: Vec<(NodeId, A::State)> =
                writes.iter().map(|(j, _)| (*j, self.state[*j].clone())).collect();
            // Batch steps run under fresh reads only; no link is ever sampled.
            self.apply(&writes, &[]);
            records.push(MoveRecord {
                step,
                node: i,
                rule: self.alg.rules()[rule].to_string(),
                reads: view.stale_reads(),
                old,
                new: writes,
            });
        }
        Ok(records)
    }

    /// Mechanical per-effect contract: targets are the mover or observed by
    /// it, no duplicate targets, and at least one write changes a state.
    fn check_effect(&self, i: NodeId, writes: &[(NodeId, A::State)]) -> Result<(), EngineError> {
        if writes.is_empty() {
            return Err(EngineError::ContractViolation {
                node: i,
                detail: "fired rule produced an empty write set".into(),
            });
        }
        let mut seen = BTreeSet::new();
        for (j, _) in writes {
            if !seen.insert(*j) {
                return Err(EngineError::ContractViolation {
                    node: i,
                    detail: format!("effect writes node {j} twice"),
                });
            }
            if *j != i && self.observed[i].binary_search(j).is_err() {
                return Err(EngineError::ContractViolation {
                    node: i,
                    detail: format!("effect writes node {j}, outside the mover's observed set"),
                });
            }
        }
        if writes.iter().all(|(j, s)| self.state[*j] == *s) {
            return Err(EngineError::ContractViolation {
                node: i,
                detail: "fired rule changes nothing".into(),
            });
        }
        Ok(())
    }

    fn apply(&mut self, writes: &[(NodeId, A::State)], read_floors: &[(NodeId, u64)]) {
        let cap = self.cfg.stale_max + 1;
        // A multi-write leaves a link on each written register naming every
        // co-written partner's post-move version plus the floors of the view
        // that enabled it; `close_atomic` honours the links when sampling, so
        // the move stays atomic — and carries its justification — in every
        // view.
        let direct: Vec<(NodeId, u64)> = if writes.len() > 1 {
            self.links_live = true;
            writes
                .iter()
                .map(|(j, _)| (*j, self.version[*j] + 1))
                .chain(read_floors.iter().copied())
                .collect()
        } else {
            Vec::new()
        };
        for (j, s) in writes {
            self.state[*j] = s.clone();
            self.version[*j] += 1;
            self.hist[*j].push_back(s.clone());
            let mut cum = self.links[*j].back().cloned().unwrap_or_default();
            for &(q, floor) in &direct {
                if q != *j {
                    match cum.iter_mut().find(|(p, _)| *p == q) {
                        Some(entry) => entry.1 = entry.1.max(floor),
                        None => cum.push((q, floor)),
                    }
                }
            }
            self.links[*j].push_back(cum);
            while self.hist[*j].len() > cap {
                self.hist[*j].pop_front();
                self.links[*j].pop_front();
            }
        }
        // Only nodes that read a written node (or were written) can change
        // fresh-enabledness.
        let mut affected = BTreeSet::new();
        for (j, _) in writes {
            affected.insert(*j);
            affected.extend(self.observers[*j].iter().copied());
        }
        for i in affected {
            self.refresh_enabled(i);
        }
    }

    /// Whether quiescence under fresh reads already implies real silence.
    ///
    /// Within the algorithm's claimed read model this is a theorem (stale
    /// views are dominated by the current state, so a disabled fresh guard
    /// stays disabled). Beyond the claim, silence is certified by direct
    /// enumeration of admissible stale views; if the enumeration exceeds its
    /// budget the run keeps going and eventually reports capped.
    fn silence_certified(&self) -> bool {
        if self.within_claim {
            return true;
        }
        let mut budget = CERT_BUDGET;
        (0..self.n).all(|i| self.node_certainly_silent(i, &mut budget))
    }

    /// Exhaustively checks that no admissible sampling of node `i`'s view
    /// enables a rule. `false` means "fires or unknown".
    fn node_certainly_silent(&self, i: NodeId, budget: &mut usize) -> bool {
        let obs = &self.observed[i];
        // Candidate versions per observed slot.
        let cands: Vec<Vec<u64>> = obs
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let latest = self.version[j];
                let len = self.hist[j].len() as u64;
                let oldest = latest + 1 - len;
                let floor = match self.cfg.model {
                    ReadModel::Amr => self.amr_floor[i][k].max(oldest),
                    _ => oldest,
                };
                (floor..=latest).collect()
            })
            .collect();
        // Mixed-radix odometer over the candidate lists.
        let mut pick = vec![0usize; cands.len()];
        loop {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let vers: Vec<u64> = pick.iter().zip(&cands).map(|(&p, c)| c[p]).collect();
            // The sampler repairs any straddling choice upward, so only
            // combinations stable under the closure are deliverable; the
            // others reappear in the enumeration as their own closures.
            let deliverable = !self.links_live || {
                let mut closed = vers.clone();
                self.close_atomic(i, &mut closed);
                closed == vers
            };
            if deliverable {
                let entries = obs
                    .iter()
                    .zip(&vers)
                    .map(|(&j, &ver)| {
                        let latest = self.version[j];
                        let oldest = latest + 1 - self.hist[j].len() as u64;
                        ViewEntry {
                            node: j,
                            state: self.hist[j][(ver - oldest) as usize].clone(),
                            lag: latest - ver,
                        }
                    })
                    .collect();
                let view = View::new(i, self.state[i].clone(), entries);
                if self.alg.guard(i, &view).is_some() {
                    return false;
                }
            }
            // Advance the odometer.
            let mut k = 0;
            loop {
                if k == pick.len() {
                    return true;
                }
                pick[k] += 1;
                if pick[k] < cands[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }
}
