//! Engine behaviour tests against two miniature algorithms: maximum
//! propagation, which ascends a lattice and therefore tolerates arbitrarily
//! stale reads, and a deliberately non-monotone gadget that livelocks under
//! them.

use proptest::prelude::*;
use sim_engine::concurrent::{run_concurrent, ConcurrencyMode};
use sim_engine::*;

/// Maximum propagation: each node adopts the largest value it can see.
struct MaxProp {
    adj: Vec<Vec<usize>>,
    claimed: ReadModel,
}

impl MaxProp {
    fn path(n: usize) -> Self {
        let adj = (0..n)
            .map(|i| {
                let mut a = Vec::new();
                if i > 0 {
                    a.push(i - 1);
                }
                if i + 1 < n {
                    a.push(i + 1);
                }
                a
            })
            .collect();
        MaxProp { adj, claimed: ReadModel::Aa }
    }

    fn complete(n: usize) -> Self {
        let adj = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        MaxProp { adj, claimed: ReadModel::Aa }
    }
}

impl Algorithm for MaxProp {
    type State = u32;

    fn name(&self) -> &str {
        "max-prop"
    }
    fn n_nodes(&self) -> usize {
        self.adj.len()
    }
    fn rules(&self) -> &[&str] {
        &["adopt"]
    }
    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        self.adj[i].clone()
    }
    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(1)
    }
    fn claimed_model(&self) -> ReadModel {
        self.claimed
    }
    fn init(&self, mode: &InitMode<u32>) -> Result<GlobalState<u32>, EngineError> {
        match mode {
            InitMode::Canonical => Ok(GlobalState::new((0..self.n_nodes() as u32).collect())),
            InitMode::Explicit(v) if v.len() == self.n_nodes() => Ok(GlobalState::new(v.clone())),
            InitMode::Explicit(_) => Err(EngineError::InitRejected("wrong length".into())),
            InitMode::Random(seed) => Ok(GlobalState::new(
                (0..self.n_nodes()).map(|i| ((seed.wrapping_mul(2654435761).wrapping_add(i as u64 * 40503)) % 97) as u32).collect(),
            )),
            InitMode::Named(name) => Err(EngineError::InitRejected(format!("unknown init '{name}'"))),
        }
    }
    fn guard(&self, _i: NodeId, view: &View<u32>) -> Option<RuleId> {
        view.entries().iter().any(|e| e.state > *view.own()).then_some(0)
    }
    fn action(&self, i: NodeId, _rule: RuleId, view: &View<u32>) -> MoveEffect<u32> {
        let best = view.entries().iter().map(|e| e.state).max().unwrap().max(*view.own());
        MoveEffect::own(i, best)
    }
    fn state_value(&self, i: NodeId, state: &GlobalState<u32>) -> Option<u64> {
        let mx = *state.states.iter().max().unwrap();
        Some(u64::from(mx - state[i]))
    }
    fn optimal(&self, state: &GlobalState<u32>) -> bool {
        state.states.windows(2).all(|w| w[0] == w[1])
    }
}

/// Two nodes that each increment (mod 4) whenever they see the other equal to
/// themselves. Converges instantly under fresh reads; livelocks under stale
/// ones, because each keeps "seeing" the other's superseded value.
struct Flipper;

impl Algorithm for Flipper {
    type State = u32;

    fn name(&self) -> &str {
        "flipper"
    }
    fn n_nodes(&self) -> usize {
        2
    }
    fn rules(&self) -> &[&str] {
        &["bump"]
    }
    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        vec![1 - i]
    }
    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(1)
    }
    fn claimed_model(&self) -> ReadModel {
        ReadModel::Fresh
    }
    fn init(&self, mode: &InitMode<u32>) -> Result<GlobalState<u32>, EngineError> {
        match mode {
            InitMode::Canonical => Ok(GlobalState::new(vec![0, 0])),
            InitMode::Explicit(v) if v.len() == 2 => Ok(GlobalState::new(v.clone())),
            _ => Err(EngineError::InitRejected("flipper starts from two equal values".into())),
        }
    }
    fn guard(&self, i: NodeId, view: &View<u32>) -> Option<RuleId> {
        (view.get(1 - i) == view.own()).then_some(0)
    }
    fn action(&self, i: NodeId, _rule: RuleId, view: &View<u32>) -> MoveEffect<u32> {
        MoveEffect::own(i, (view.own() + 1) % 4)
    }
    fn state_value(&self, _i: NodeId, _state: &GlobalState<u32>) -> Option<u64> {
        None
    }
    fn optimal(&self, state: &GlobalState<u32>) -> bool {
        state[0] != state[1]
    }
}

/// Guard that always fires but whose action changes nothing.
struct Stuck;

impl Algorithm for Stuck {
    type State = u8;

    fn name(&self) -> &str {
        "stuck"
    }
    fn n_nodes(&self) -> usize {
        1
    }
    fn rules(&self) -> &[&str] {
        &["noop"]
    }
    fn observed(&self, _i: NodeId) -> Vec<NodeId> {
        Vec::new()
    }
    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(0)
    }
    fn claimed_model(&self) -> ReadModel {
        ReadModel::Fresh
    }
    fn init(&self, _mode: &InitMode<u8>) -> Result<GlobalState<u8>, EngineError> {
        Ok(GlobalState::new(vec![7]))
    }
    fn guard(&self, _i: NodeId, _view: &View<u8>) -> Option<RuleId> {
        Some(0)
    }
    fn action(&self, i: NodeId, _rule: RuleId, view: &View<u8>) -> MoveEffect<u8> {
        MoveEffect::own(i, *view.own())
    }
    fn state_value(&self, _i: NodeId, _state: &GlobalState<u8>) -> Option<u64> {
        None
    }
    fn optimal(&self, _state: &GlobalState<u8>) -> bool {
        false
    }
}

/// A kicking rule that writes two registers in one move, plus poison rules
/// that fire exactly when some view straddles that move: the kicked node
/// seeing the kicker pre-kick, the kicker seeing its victim pre-kick, or a
/// bystander watching both registers disagree. Node 0 drives an epoch
/// counter and mirrors it onto node 1 atomically; node 2 only watches.
struct Entangled;

impl Algorithm for Entangled {
    type State = u64;

    fn name(&self) -> &str {
        "entangled"
    }
    fn n_nodes(&self) -> usize {
        3
    }
    fn rules(&self) -> &[&str] {
        &["kick", "poison"]
    }
    fn observed(&self, i: NodeId) -> Vec<NodeId> {
        match i {
            0 => vec![1],
            1 => vec![0],
            _ => vec![0, 1],
        }
    }
    fn read_radius(&self) -> ReadRadius {
        ReadRadius::Bounded(1)
    }
    fn claimed_model(&self) -> ReadModel {
        ReadModel::Amr
    }
    fn complex_actions(&self) -> bool {
        true
    }
    fn init(&self, mode: &InitMode<u64>) -> Result<GlobalState<u64>, EngineError> {
        match mode {
            InitMode::Canonical => Ok(GlobalState::new(vec![0, 0, 0])),
            _ => Err(EngineError::InitRejected("entangled starts at epoch zero".into())),
        }
    }
    fn guard(&self, i: NodeId, view: &View<u64>) -> Option<RuleId> {
        match i {
            0 => {
                if *view.get(1) != *view.own() {
                    Some(1)
                } else {
                    (*view.own() < 8).then_some(0)
                }
            }
            1 => (*view.get(0) < *view.own()).then_some(1),
            _ => (*view.get(0) != *view.get(1)).then_some(1),
        }
    }
    fn action(&self, i: NodeId, rule: RuleId, view: &View<u64>) -> MoveEffect<u64> {
        if rule == 0 {
            let next = *view.own() + 1;
            MoveEffect::multi(vec![(0, next), (1, next)])
        } else {
            MoveEffect::own(i, *view.own() + 100)
        }
    }
    fn state_value(&self, _i: NodeId, _state: &GlobalState<u64>) -> Option<u64> {
        None
    }
    fn optimal(&self, state: &GlobalState<u64>) -> bool {
        state[0] == state[1]
    }
}

fn all_equal_to_max(trace: &Trace<u32>) {
    let mx = *trace.initial.states.iter().max().unwrap();
    assert_eq!(trace.verdict, Verdict::Silent);
    assert!(trace.final_state.states.iter().all(|&v| v == mx), "final {:?}", trace.final_state);
}

#[test]
fn central_converges_to_global_max() {
    let alg = MaxProp::complete(3);
    let init = InitMode::Explicit(vec![1, 2, 3]);
    let cfg = RunConfig::fresh(Scheduler::Central, 11, 1000);
    let trace = run(&alg, &init, &cfg).unwrap();
    all_equal_to_max(&trace);
    assert_eq!(trace.final_state.states, vec![3, 3, 3]);
    assert!(trace.moves <= 2, "each non-max node adopts once on K3");
    replay(&alg, &trace).unwrap();
}

#[test]
fn initially_silent_run_is_empty() {
    let alg = MaxProp::path(5);
    let init = InitMode::Explicit(vec![4; 5]);
    let cfg = RunConfig::fresh(Scheduler::Central, 0, 100);
    let trace = run(&alg, &init, &cfg).unwrap();
    assert_eq!(trace.verdict, Verdict::Silent);
    assert_eq!(trace.moves, 0);
    assert_eq!(trace.rounds, 0);
    assert!(trace.records.is_empty());
}

#[test]
fn synchronous_steps_are_rounds() {
    let alg = MaxProp::path(6);
    let init = InitMode::Explicit(vec![5, 0, 0, 0, 0, 0]);
    let cfg = RunConfig::fresh(Scheduler::Synchronous, 3, 1000);
    let trace = run(&alg, &init, &cfg).unwrap();
    all_equal_to_max(&trace);
    assert_eq!(trace.rounds, trace.evals.len() as u64);
    // The value travels one hop per sweep down the path.
    assert_eq!(trace.rounds, 5);
    // Every move belongs to some completed round under the synchronous scheduler.
    assert_eq!(trace.moves_after_rounds(trace.rounds), 0);
    replay(&alg, &trace).unwrap();
}

#[test]
fn distributed_converges() {
    let alg = MaxProp::path(7);
    let init = InitMode::Random(99);
    let cfg = RunConfig::fresh(Scheduler::Distributed, 5, 10_000);
    let trace = run(&alg, &init, &cfg).unwrap();
    all_equal_to_max(&trace);
    replay(&alg, &trace).unwrap();
}

#[test]
fn async_amr_and_aa_converge() {
    let alg = MaxProp::path(6);
    for (model, seed) in [(ReadModel::Amr, 1), (ReadModel::Aa, 2), (ReadModel::Amr, 3), (ReadModel::Aa, 4)] {
        let init = InitMode::Random(seed);
        let cfg = RunConfig::stale(model, 2, seed * 1000 + 17, 100_000);
        let trace = run(&alg, &init, &cfg).unwrap();
        all_equal_to_max(&trace);
        replay(&alg, &trace).unwrap();
    }
}

#[test]
fn same_seed_reproduces_the_run() {
    let alg = MaxProp::path(8);
    let init = InitMode::Random(7);
    let cfg = RunConfig::stale(ReadModel::Aa, 2, 42, 100_000);
    let a = run(&alg, &init, &cfg).unwrap();
    let b = run(&alg, &init, &cfg).unwrap();
    assert_eq!(a.evals, b.evals);
    assert_eq!(a.final_state, b.final_state);
    assert_eq!(a.moves, b.moves);
    assert_eq!(
        a.records.iter().map(|r| (r.step, r.node)).collect::<Vec<_>>(),
        b.records.iter().map(|r| (r.step, r.node)).collect::<Vec<_>>()
    );
}

#[test]
fn stale_max_zero_reads_are_fresh() {
    let alg = MaxProp::path(5);
    let init = InitMode::Random(3);
    let cfg = RunConfig::stale(ReadModel::Amr, 0, 9, 100_000);
    let trace = run(&alg, &init, &cfg).unwrap();
    all_equal_to_max(&trace);
    assert!(trace.records.iter().all(|r| r.reads.is_empty()), "no stale read possible");
}

#[test]
fn move_cap_reports_capped() {
    let alg = MaxProp::path(6);
    let init = InitMode::Explicit(vec![5, 0, 0, 0, 0, 0]);
    let cfg = RunConfig::fresh(Scheduler::Synchronous, 0, 2);
    let trace = run(&alg, &init, &cfg).unwrap();
    assert_eq!(trace.verdict, Verdict::Capped);
    assert!(trace.moves >= 2);
}

#[test]
fn unchanged_effect_is_a_contract_violation() {
    let cfg = RunConfig::fresh(Scheduler::Central, 0, 10);
    let err = run(&Stuck, &InitMode::Canonical, &cfg).unwrap_err();
    assert!(matches!(err, EngineError::ContractViolation { node: 0, .. }), "{err}");
}

#[test]
fn scheduler_model_compatibility_is_enforced() {
    let alg = MaxProp::path(3);
    let bad = RunConfig {
        scheduler: Scheduler::Central,
        model: ReadModel::Aa,
        stale_max: 1,
        seed: 0,
        move_cap: 10,
    };
    assert!(matches!(run(&alg, &InitMode::Canonical, &bad), Err(EngineError::IncompatibleConfig(_))));
    let bad = RunConfig {
        scheduler: Scheduler::Async,
        model: ReadModel::Fresh,
        stale_max: 0,
        seed: 0,
        move_cap: 10,
    };
    assert!(matches!(run(&alg, &InitMode::Canonical, &bad), Err(EngineError::IncompatibleConfig(_))));
}

#[test]
fn flipper_silences_under_fresh_reads_but_caps_under_stale() {
    let cfg = RunConfig::fresh(Scheduler::Central, 1, 50);
    let trace = run(&Flipper, &InitMode::Canonical, &cfg).unwrap();
    assert_eq!(trace.verdict, Verdict::Silent);
    assert_eq!(trace.moves, 1, "one bump breaks the tie for good");

    let cfg = RunConfig::stale(ReadModel::Aa, 1, 1, 50);
    let trace = run(&Flipper, &InitMode::Canonical, &cfg).unwrap();
    assert_eq!(trace.verdict, Verdict::Capped, "stale reads re-enable the bump forever");
    assert!(trace.moves >= 50);
}

#[test]
fn multi_writes_stay_atomic_in_every_view() {
    for model in [ReadModel::Amr, ReadModel::Aa] {
        for stale in 1..=3 {
            for seed in 0..12 {
                let cfg = RunConfig::stale(model, stale, seed, 1_000);
                let trace = run(&Entangled, &InitMode::Canonical, &cfg).unwrap();
                let tag = format!("{model:?} depth {stale} seed {seed}");
                assert_eq!(trace.verdict, Verdict::Silent, "{tag}");
                assert!(
                    trace.records.iter().all(|r| r.rule == "kick"),
                    "{tag}: a view straddled a kick: {:?}",
                    trace.records.iter().find(|r| r.rule != "kick")
                );
                assert_eq!(trace.moves, 8, "{tag}: each epoch advances exactly once");
                assert_eq!(trace.final_state.states, vec![8, 8, 0], "{tag}");
                replay(&Entangled, &trace).unwrap();
            }
        }
    }
}

#[test]
fn json_lines_cover_every_move() {
    let alg = MaxProp::path(5);
    let init = InitMode::Random(21);
    let cfg = RunConfig::stale(ReadModel::Aa, 2, 5, 100_000);
    let trace = run(&alg, &init, &cfg).unwrap();
    let mut buf = Vec::new();
    trace.write_json_lines(&mut buf).unwrap();
    let lines: Vec<serde_json::Value> = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len() as u64, trace.moves);
    for (line, rec) in lines.iter().zip(&trace.records) {
        assert_eq!(line["node"], rec.node);
        assert_eq!(line["rule"], "adopt");
        assert!(line["new"].is_object());
    }
}

#[test]
fn concurrent_modes_converge_and_match() {
    let alg = MaxProp::path(40);
    let init = InitMode::Random(13);
    for mode in [ConcurrencyMode::FreeRunning, ConcurrencyMode::Lockstep] {
        let report = run_concurrent(&alg, &init, mode, Some(4), 1_000_000).unwrap();
        assert_eq!(report.verdict, Verdict::Silent, "{mode}");
        assert!(alg.optimal(&report.final_state), "{mode}: {:?}", report.final_state);
        assert!(report.evals >= 40, "every node evaluates at least once");
    }
}

#[test]
fn concurrent_rejects_fresh_only_algorithms() {
    let err = run_concurrent(&Flipper, &InitMode::Canonical, ConcurrencyMode::FreeRunning, Some(2), 100)
        .unwrap_err();
    assert!(matches!(err, EngineError::ConcurrentUnsupported(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Any staleness, any schedule: maximum propagation still silences on the
    /// all-max state, and its trace replays exactly.
    #[test]
    fn max_prop_converges_under_any_model(
        n in 2usize..8,
        seed in 0u64..1_000,
        stale in 0usize..3,
        aa in proptest::bool::ANY,
    ) {
        let alg = MaxProp::path(n);
        let model = if aa { ReadModel::Aa } else { ReadModel::Amr };
        let cfg = RunConfig::stale(model, stale, seed, 1_000_000);
        let trace = run(&alg, &InitMode::Random(seed), &cfg).unwrap();
        prop_assert_eq!(trace.verdict, Verdict::Silent);
        let mx = *trace.initial.states.iter().max().unwrap();
        prop_assert!(trace.final_state.states.iter().all(|&v| v == mx));
        replay(&alg, &trace).unwrap();
    }
}
