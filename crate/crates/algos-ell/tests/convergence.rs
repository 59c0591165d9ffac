//! Cross-scheduler convergence checks for the two-phase algorithms.
//!
//! Every test drives full runs through the engine and checks the endpoint
//! against the algorithm's own optimality predicate (which the unit tests pin
//! against hand-worked instances) plus, where the complexity analysis gives
//! one, the move budget. The phase-structure tests replay each trace and
//! check the shape the two-phase design promises under fresh reads: the
//! feasibility predicate holds by the end of the first round, stays true from
//! the moment it first holds, and from then on only the descending rules fire,
//! touching each node at most once.

use algos_ell::Membership::{self, In, Out};
use algos_ell::{
    gc_ell_spec, in_set, mis_ell_spec, mvc_ell_spec, sdmds_ell_spec, twods_ell_spec, SdmdsInput,
};
use graph_core::{generate_gnm, Graph};
use sim_engine::{
    run, Algorithm, GlobalState, InitMode, NodeId, ReadModel, RunConfig, Scheduler, Trace, Verdict,
};

const CAP: u64 = 50_000;

/// One configuration per fresh scheduler, over a few seeds each.
fn fresh_cfgs() -> Vec<RunConfig> {
    let mut cfgs = Vec::new();
    for seed in 0..4 {
        cfgs.push(RunConfig::fresh(Scheduler::Central, seed, CAP));
    }
    for seed in 0..3 {
        cfgs.push(RunConfig::fresh(Scheduler::Distributed, seed, CAP));
    }
    for seed in 0..2 {
        cfgs.push(RunConfig::fresh(Scheduler::Synchronous, seed, CAP));
    }
    cfgs
}

/// Async configurations under monotonic stale reads.
fn amr_cfgs() -> Vec<RunConfig> {
    (0..6)
        .flat_map(|seed| {
            [1, 2].map(|depth| RunConfig::stale(ReadModel::Amr, depth, seed, CAP))
        })
        .collect()
}

/// The initialization corpus: both uniform states, a few seeded coins.
fn membership_corpus(n: usize) -> Vec<InitMode<Membership>> {
    let mut inits = vec![
        InitMode::Named("all-in".into()),
        InitMode::Named("all-out".into()),
    ];
    inits.extend((0..4).map(InitMode::Random));
    inits
        .into_iter()
        .chain(std::iter::once(InitMode::Explicit(vec![Out; n])))
        .collect()
}

/// Every membership state on `n` nodes.
fn all_membership_inits(n: usize) -> Vec<InitMode<Membership>> {
    (0..1u32 << n)
        .map(|mask| {
            InitMode::Explicit(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { In } else { Out })
                    .collect(),
            )
        })
        .collect()
}

/// Connected graphs on up to four nodes, one per isomorphism class.
fn small_graphs() -> Vec<Graph> {
    let g = |n, edges: &[(usize, usize)]| Graph::from_edges(n, edges).unwrap();
    vec![
        g(1, &[]),
        g(2, &[(0, 1)]),
        g(3, &[(0, 1), (1, 2)]),
        g(3, &[(0, 1), (1, 2), (0, 2)]),
        g(4, &[(0, 1), (1, 2), (2, 3)]),
        g(4, &[(0, 1), (0, 2), (0, 3)]),
        g(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
        g(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]),
        g(4, &[(0, 1), (1, 2), (0, 2), (0, 3), (1, 3)]),
        g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    ]
}

/// Checks the two-phase shape of a fresh-read trace: feasibility is stable
/// once reached and only `descending` rules fire from then on. Records
/// sharing a step fired from a single batch pre-state, so the trace is
/// replayed batch by batch.
///
/// With `no_revisit` each node's membership may change at most once after
/// feasibility — true of the one-directional descents, but not of exchange
/// moves, which can re-enter a node; those instead shrink the membership
/// count with every firing batch, which is checked in place of it.
fn check_phase_structure(
    trace: &Trace<Membership>,
    feasible: impl Fn(&GlobalState<Membership>) -> bool,
    descending: &[&str],
    no_revisit: bool,
) {
    let label = format!(
        "{} n={} under {} (seed {})",
        trace.algorithm,
        trace.initial.n(),
        trace.scheduler,
        trace.seed
    );
    let in_count = |s: &GlobalState<Membership>| s.states.iter().filter(|m| m.is_in()).count();
    let mut cur = trace.initial.clone();
    let mut reached = false;
    let mut touched = vec![0usize; trace.initial.n()];
    let mut at = 0;
    while at < trace.records.len() {
        let step = trace.records[at].step;
        let end = at + trace.records[at..].iter().take_while(|r| r.step == step).count();
        reached = reached || feasible(&cur);
        let before = in_count(&cur);
        for rec in &trace.records[at..end] {
            if reached {
                assert!(
                    descending.contains(&rec.rule.as_str()),
                    "only descending rules may fire once feasible, saw {} in {label}",
                    rec.rule
                );
            }
            for (j, s) in &rec.new {
                if reached && no_revisit {
                    touched[*j] += 1;
                    assert!(
                        touched[*j] <= 1,
                        "node {j} changed twice after feasibility in {label}"
                    );
                }
                cur[*j] = *s;
            }
        }
        if reached {
            assert!(feasible(&cur), "feasibility must be stable once reached in {label}");
            if !no_revisit {
                assert!(
                    in_count(&cur) < before,
                    "a descending batch must shrink the membership in {label}"
                );
            }
        }
        at = end;
    }
}

/// State at the end of the first completed round (the final state if the run
/// went silent earlier).
fn state_after_one_round(trace: &Trace<Membership>) -> GlobalState<Membership> {
    let within = (trace.moves - trace.moves_after_rounds(1)) as usize;
    let mut cur = trace.initial.clone();
    for rec in &trace.records[..within] {
        for (j, s) in &rec.new {
            cur[*j] = *s;
        }
    }
    cur
}

fn silent(trace: &Trace<Membership>) -> &Trace<Membership> {
    assert_eq!(trace.verdict, Verdict::Silent, "run hit its move cap");
    trace
}

// ---------------------------------------------------------------------------
// Service-demand domination
// ---------------------------------------------------------------------------

#[test]
fn lone_node_silences_within_two_moves() {
    let alg = sdmds_ell_spec(SdmdsInput::uniform(Graph::from_edges(1, &[]).unwrap()));
    for init in all_membership_inits(1) {
        for cfg in fresh_cfgs() {
            let trace = run(&alg, &init, &cfg).unwrap();
            silent(&trace);
            assert!(trace.moves <= 2);
            assert_eq!(trace.final_state[0], In);
        }
    }
}

#[test]
fn uniform_demands_reduce_to_plain_domination() {
    // With one shared symbol, serving a demand is just having a member in the
    // closed neighbourhood, so the endpoint must be a minimal dominating set.
    let minimal_dominating = |g: &Graph, state: &GlobalState<Membership>| {
        let dominated = |except: Option<NodeId>| {
            (0..g.n()).all(|q| {
                let member =
                    |x: NodeId| state[x].is_in() && Some(x) != except;
                member(q) || g.adj(q).iter().any(|&r| member(r))
            })
        };
        dominated(None) && (0..g.n()).filter(|&i| state[i].is_in()).all(|i| !dominated(Some(i)))
    };
    for g in small_graphs() {
        let alg = sdmds_ell_spec(SdmdsInput::uniform(g.clone()));
        for init in all_membership_inits(g.n()) {
            for cfg in [
                RunConfig::fresh(Scheduler::Central, 1, CAP),
                RunConfig::fresh(Scheduler::Synchronous, 0, CAP),
            ] {
                let trace = run(&alg, &init, &cfg).unwrap();
                silent(&trace);
                assert!(
                    minimal_dominating(&g, &trace.final_state),
                    "non-minimal endpoint {:?} on n={}",
                    in_set(&trace.final_state),
                    g.n()
                );
                assert!(alg.optimal(&trace.final_state));
            }
        }
    }
}

#[test]
fn sdmds_meets_its_round_plus_n_budget() {
    let g = generate_gnm(8, 12, 2).unwrap();
    let alg = sdmds_ell_spec(SdmdsInput::uniform(g));
    for init in membership_corpus(8) {
        for cfg in fresh_cfgs().into_iter().chain(amr_cfgs()) {
            let trace = run(&alg, &init, &cfg).unwrap();
            silent(&trace);
            assert!(alg.optimal(&trace.final_state));
            assert!(
                trace.moves_after_rounds(1) <= 8,
                "{} moves after the first round under {} (seed {})",
                trace.moves_after_rounds(1),
                cfg.scheduler,
                cfg.seed
            );
        }
    }
}

#[test]
fn split_demands_converge_to_a_minimal_server_set() {
    // Star whose centre serves the leaves' demands while every leaf can serve
    // the centre's. Members need no servers of their own, so the silent
    // states are exactly {centre} and {all leaves}.
    let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let input = SdmdsInput::new(
        g,
        vec![
            [9].into(),
            [1].into(),
            [2].into(),
            [3].into(),
        ],
        vec![
            [1, 2, 3].into(),
            [9].into(),
            [9].into(),
            [9].into(),
        ],
    )
    .unwrap();
    let alg = sdmds_ell_spec(input);
    for init in all_membership_inits(4) {
        for cfg in fresh_cfgs().into_iter().chain(amr_cfgs()) {
            let trace = run(&alg, &init, &cfg).unwrap();
            silent(&trace);
            let set = in_set(&trace.final_state);
            assert!(
                set == vec![0] || set == vec![1, 2, 3],
                "unexpected endpoint {set:?}"
            );
            assert!(alg.optimal(&trace.final_state));
        }
    }
}

// ---------------------------------------------------------------------------
// Vertex cover
// ---------------------------------------------------------------------------

#[test]
fn covering_pair_keeps_exactly_one_node() {
    let alg = mvc_ell_spec(Graph::from_edges(2, &[(0, 1)]).unwrap());
    let init = InitMode::Explicit(vec![Out, Out]);
    for cfg in fresh_cfgs() {
        let trace = run(&alg, &init, &cfg).unwrap();
        silent(&trace);
        assert_eq!(in_set(&trace.final_state).len(), 1);
        assert!(alg.optimal(&trace.final_state));
    }
}

#[test]
fn four_path_reaches_a_minimal_cover_from_a_skewed_start() {
    // The path 0 - 3 - 2 - 1 with only node 0 in the cover: two edges are
    // uncovered, and every endpoint must be a minimal cover of the path.
    let g = Graph::from_edges(4, &[(0, 3), (3, 2), (2, 1)]).unwrap();
    let alg = mvc_ell_spec(g.clone());
    let init = InitMode::Explicit(vec![In, Out, Out, Out]);
    for cfg in fresh_cfgs().into_iter().chain(amr_cfgs()) {
        let trace = run(&alg, &init, &cfg).unwrap();
        silent(&trace);
        let cover = in_set(&trace.final_state);
        for &(a, b) in g.edges() {
            assert!(
                trace.final_state[a].is_in() || trace.final_state[b].is_in(),
                "edge ({a},{b}) uncovered by {cover:?}"
            );
        }
        assert!(alg.optimal(&trace.final_state), "{cover:?} is not minimal");
    }
}

// ---------------------------------------------------------------------------
// Independent set
// ---------------------------------------------------------------------------

#[test]
fn clashing_pair_keeps_exactly_one_node() {
    let alg = mis_ell_spec(Graph::from_edges(2, &[(0, 1)]).unwrap());
    let init = InitMode::Explicit(vec![In, In]);
    for cfg in fresh_cfgs() {
        let trace = run(&alg, &init, &cfg).unwrap();
        silent(&trace);
        assert_eq!(in_set(&trace.final_state).len(), 1);
    }
}

#[test]
fn edgeless_graph_admits_everyone() {
    let alg = mis_ell_spec(Graph::from_edges(3, &[]).unwrap());
    for cfg in fresh_cfgs() {
        let trace = run(&alg, &InitMode::Named("all-out".into()), &cfg).unwrap();
        silent(&trace);
        assert_eq!(in_set(&trace.final_state), vec![0, 1, 2]);
    }
}

#[test]
fn mis_meets_its_round_plus_n_budget_under_fresh_reads() {
    let g = generate_gnm(10, 20, 4).unwrap();
    let alg = mis_ell_spec(g.clone());
    for init in membership_corpus(10) {
        for cfg in fresh_cfgs() {
            let trace = run(&alg, &init, &cfg).unwrap();
            silent(&trace);
            assert!(alg.optimal(&trace.final_state));
            assert!(trace.moves_after_rounds(1) <= 10);
        }
        // Stale monotonic reads keep convergence and the endpoint quality;
        // the round-based budget is stated for the fresh transition system.
        for cfg in amr_cfgs() {
            let trace = run(&alg, &init, &cfg).unwrap();
            silent(&trace);
            assert!(alg.optimal(&trace.final_state));
        }
    }
}

// ---------------------------------------------------------------------------
// Colouring
// ---------------------------------------------------------------------------

#[test]
fn conflicted_pair_lands_on_the_first_two_colours() {
    let alg = gc_ell_spec(Graph::from_edges(2, &[(0, 1)]).unwrap());
    let init = InitMode::Explicit(vec![1u64, 1]);
    for cfg in fresh_cfgs() {
        let trace = run(&alg, &init, &cfg).unwrap();
        assert_eq!(trace.verdict, Verdict::Silent);
        let mut colours = trace.final_state.states.clone();
        colours.sort_unstable();
        assert_eq!(colours, vec![1, 2]);
    }
}

#[test]
fn gc_meets_its_move_budget() {
    let g = generate_gnm(8, 16, 6).unwrap();
    let budget = (g.n() + 4 * g.m()) as u64;
    let alg = gc_ell_spec(g);
    let inits: Vec<InitMode<u64>> = std::iter::once(InitMode::Canonical)
        .chain((0..5).map(InitMode::Random))
        .collect();
    for init in inits {
        for cfg in fresh_cfgs().into_iter().chain(amr_cfgs()) {
            let trace = run(&alg, &init, &cfg).unwrap();
            assert_eq!(trace.verdict, Verdict::Silent);
            assert!(
                trace.moves <= budget,
                "{} moves exceeds n+4m = {budget} under {} (seed {})",
                trace.moves,
                cfg.scheduler,
                cfg.seed
            );
            assert!(alg.optimal(&trace.final_state));
        }
    }
}

#[test]
fn colours_descend_monotonically_once_proper() {
    let g = generate_gnm(8, 16, 6).unwrap();
    let alg = gc_ell_spec(g.clone());
    for init in [InitMode::Canonical, InitMode::Random(3), InitMode::Random(8)] {
        for cfg in fresh_cfgs() {
            let trace = run(&alg, &init, &cfg).unwrap();
            let mut cur = trace.initial.clone();
            let mut proper = false;
            let mut at = 0;
            while at < trace.records.len() {
                let step = trace.records[at].step;
                let end =
                    at + trace.records[at..].iter().take_while(|r| r.step == step).count();
                proper = proper || alg.feasible(&cur);
                for rec in &trace.records[at..end] {
                    for (j, s) in &rec.new {
                        if proper {
                            assert_eq!(rec.rule, "reduce");
                            assert!(*s < cur[*j], "colour rose after properness");
                        }
                        cur[*j] = *s;
                    }
                }
                if proper {
                    assert!(alg.feasible(&cur), "properness must be stable");
                }
                at = end;
            }
        }
    }
}

#[test]
fn preset_small_colourings_silence_optimally() {
    for g in small_graphs() {
        let alg = gc_ell_spec(g.clone());
        let n = g.n();
        // Exhaust colourings over {1, 2} and sample wider-domain ones.
        let inits: Vec<InitMode<u64>> = (0..1u32 << n)
            .map(|mask| {
                InitMode::Explicit(
                    (0..n).map(|i| 1 + u64::from(mask >> i & 1)).collect(),
                )
            })
            .chain((0..3).map(InitMode::Random))
            .collect();
        for init in inits {
            for cfg in [
                RunConfig::fresh(Scheduler::Central, 1, CAP),
                RunConfig::fresh(Scheduler::Synchronous, 0, CAP),
            ] {
                let trace = run(&alg, &init, &cfg).unwrap();
                assert_eq!(trace.verdict, Verdict::Silent);
                assert!(alg.optimal(&trace.final_state));
                assert!(alg.feasible(&trace.final_state));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Two-minimal domination
// ---------------------------------------------------------------------------

#[test]
fn twods_meets_its_round_plus_2n_budget() {
    let g = generate_gnm(8, 10, 9).unwrap();
    let alg = twods_ell_spec(g);
    for init in membership_corpus(8) {
        for cfg in fresh_cfgs().into_iter().chain(amr_cfgs()) {
            let trace = run(&alg, &init, &cfg).unwrap();
            silent(&trace);
            assert!(alg.optimal(&trace.final_state));
            assert!(
                trace.moves_after_rounds(1) <= 16,
                "{} moves after the first round under {} (seed {})",
                trace.moves_after_rounds(1),
                cfg.scheduler,
                cfg.seed
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Shared structure
// ---------------------------------------------------------------------------

#[test]
fn exhaustive_small_starts_end_optimal() {
    for g in small_graphs() {
        let n = g.n();
        let algs: Vec<Box<dyn Algorithm<State = Membership>>> = vec![
            Box::new(sdmds_ell_spec(SdmdsInput::uniform(g.clone()))),
            Box::new(mvc_ell_spec(g.clone())),
            Box::new(mis_ell_spec(g.clone())),
            Box::new(twods_ell_spec(g.clone())),
        ];
        for alg in &algs {
            for init in all_membership_inits(n) {
                for cfg in [
                    RunConfig::fresh(Scheduler::Central, 0, CAP),
                    RunConfig::fresh(Scheduler::Central, 7, CAP),
                    RunConfig::fresh(Scheduler::Synchronous, 0, CAP),
                ] {
                    let trace = run(alg.as_ref(), &init, &cfg).unwrap();
                    silent(&trace);
                    assert!(
                        alg.optimal(&trace.final_state),
                        "{} stalled sub-optimally on n={n} at {:?}",
                        alg.name(),
                        trace.final_state.states
                    );
                }
            }
        }
    }
}

#[test]
fn feasibility_arrives_within_one_fresh_round() {
    let named = generate_gnm(8, 12, 2).unwrap();
    for g in small_graphs().into_iter().chain([named]) {
        let n = g.n();
        let cases: Vec<(Box<dyn Algorithm<State = Membership>>, Box<dyn Fn(&GlobalState<Membership>) -> bool>)> = {
            let sdmds = sdmds_ell_spec(SdmdsInput::uniform(g.clone()));
            let mvc = mvc_ell_spec(g.clone());
            let mis = mis_ell_spec(g.clone());
            let twods = twods_ell_spec(g.clone());
            vec![
                (
                    Box::new(sdmds_ell_spec(SdmdsInput::uniform(g.clone()))),
                    Box::new(move |s: &GlobalState<Membership>| sdmds.feasible(s)),
                ),
                (
                    Box::new(mvc_ell_spec(g.clone())),
                    Box::new(move |s: &GlobalState<Membership>| mvc.feasible(s)),
                ),
                (
                    Box::new(mis_ell_spec(g.clone())),
                    Box::new(move |s: &GlobalState<Membership>| mis.feasible(s)),
                ),
                (
                    Box::new(twods_ell_spec(g.clone())),
                    Box::new(move |s: &GlobalState<Membership>| twods.feasible(s)),
                ),
            ]
        };
        for (alg, feasible) in &cases {
            for init in membership_corpus(n) {
                for cfg in fresh_cfgs() {
                    let trace = run(alg.as_ref(), &init, &cfg).unwrap();
                    silent(&trace);
                    assert!(
                        feasible(&state_after_one_round(&trace)),
                        "{} infeasible after round 1 under {} (seed {})",
                        alg.name(),
                        cfg.scheduler,
                        cfg.seed
                    );
                }
            }
        }
    }
}

#[test]
fn descending_phase_stays_feasible_and_one_directional() {
    type Probe = Box<dyn Fn(&GlobalState<Membership>) -> bool>;
    type Case = (Box<dyn Algorithm<State = Membership>>, Probe, &'static [&'static str], bool);
    let instances: Vec<Case> = {
        let mut v: Vec<Case> = Vec::new();
        for g in small_graphs().into_iter().chain([
            generate_gnm(8, 12, 2).unwrap(),
            generate_gnm(10, 20, 4).unwrap(),
            generate_gnm(8, 10, 9).unwrap(),
        ]) {
            let sdmds = sdmds_ell_spec(SdmdsInput::uniform(g.clone()));
            let probe = sdmds_ell_spec(SdmdsInput::uniform(g.clone()));
            v.push((
                Box::new(sdmds),
                Box::new(move |s: &GlobalState<Membership>| probe.feasible(s)),
                &["leave"],
                true,
            ));
            let mvc = mvc_ell_spec(g.clone());
            let probe = mvc_ell_spec(g.clone());
            v.push((
                Box::new(mvc),
                Box::new(move |s: &GlobalState<Membership>| probe.feasible(s)),
                &["leave"],
                true,
            ));
            let mis = mis_ell_spec(g.clone());
            let probe = mis_ell_spec(g.clone());
            v.push((
                Box::new(mis),
                Box::new(move |s: &GlobalState<Membership>| probe.feasible(s)),
                &["enter"],
                true,
            ));
            let twods = twods_ell_spec(g.clone());
            let probe = twods_ell_spec(g.clone());
            v.push((
                Box::new(twods),
                Box::new(move |s: &GlobalState<Membership>| probe.feasible(s)),
                &["shrink"],
                false,
            ));
        }
        v
    };
    for (alg, feasible, descending, no_revisit) in &instances {
        for init in membership_corpus(alg.n_nodes()) {
            for cfg in fresh_cfgs() {
                let trace = run(alg.as_ref(), &init, &cfg).unwrap();
                silent(&trace);
                check_phase_structure(&trace, feasible, descending, *no_revisit);
            }
        }
    }
}

#[test]
fn stale_monotonic_runs_still_end_optimal() {
    let instances: Vec<Box<dyn Algorithm<State = Membership>>> = vec![
        Box::new(sdmds_ell_spec(SdmdsInput::uniform(generate_gnm(8, 12, 2).unwrap()))),
        Box::new(mvc_ell_spec(generate_gnm(10, 20, 4).unwrap())),
        Box::new(mis_ell_spec(generate_gnm(10, 20, 4).unwrap())),
        Box::new(twods_ell_spec(generate_gnm(8, 10, 9).unwrap())),
    ];
    for alg in &instances {
        for init in membership_corpus(alg.n_nodes()) {
            for cfg in amr_cfgs() {
                let trace = run(alg.as_ref(), &init, &cfg).unwrap();
                silent(&trace);
                assert!(
                    alg.optimal(&trace.final_state),
                    "{} ended sub-optimal under stale reads (seed {})",
                    alg.name(),
                    cfg.seed
                );
            }
        }
    }
}
