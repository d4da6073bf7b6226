//! Acceptance suite: one test per criterion, each printing a verdict line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use godunf::goal_driven::{
    self, extract_goal_configurations, gd_prefix, gd_unfold, post_delta, putative_gd_prefix,
    DeltaMap, GdOptions, Strategy,
};
use godunf::net::{Marking, SafeNet, TransId};
use godunf::occurrence::Configuration;
use godunf::oracle;
use godunf::reduction::{ExactOracleReducer, FlowReducer, NullReducer, Reducer, UgCache};
use godunf::unfolder::{complete_prefix, ErvOrder};
use godunf::format;

fn exact() -> ExactOracleReducer {
    ExactOracleReducer {
        state_bound: ORACLE_BOUND,
    }
}

/// Criterion 1: on the two-branch fixture, `minimal-configs` with the oracle
/// reducer reports exactly the two configuration classes, both minimal, in
/// under a second.
#[test]
fn criterion_1_fixture_reproduction() {
    let started = Instant::now();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_godunf"))
        .args([
            "minimal-configs",
            concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig2.net"),
            "--goal",
            "p3,p4",
            "--goal-mode",
            "subset",
            "--reducer",
            "oracle",
            "--strategy",
            "always",
        ])
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    assert!(output.status.success(), "exit: {:?}", output.status);
    let stdout = String::from_utf8(output.stdout).unwrap();
    let configs: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("config:"))
        .collect();
    assert_eq!(
        configs,
        vec!["config: a c b [minimal]", "config: a' b' c b [minimal]"]
    );
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 1: PASS - both minimal classes reported in {elapsed:?}");
}

/// Criterion 2: with the null reducer the goal-driven prefix is event-for-
/// event identical to the complete prefix, on the fixture and 100 seeded
/// random safe nets, within 60 seconds.
#[test]
fn criterion_2_null_reducer_degeneration() {
    let started = Instant::now();
    let (fig2, fig2_goal) = fig2();
    let mut nets: Vec<(SafeNet, godunf::net::Goal)> = vec![(fig2, fig2_goal)];
    for net in safe_suite(suite_seed(), 100) {
        let place = net.places().next().unwrap();
        let goal =
            godunf::net::Goal::new(&net, [place], godunf::net::GoalMode::Subset).unwrap();
        nets.push((net, goal));
    }
    for (net, goal) in &nets {
        let (complete, cstats) = complete_prefix(net);
        let (gd, gstats) = gd_prefix(net, goal, &NullReducer, Strategy::Always).unwrap();
        assert_eq!(event_shape(&complete), event_shape(&gd));
        // Byte-level agreement of the documents, delta section included
        // (it is empty under the null reducer).
        let cdoc = format::prefix_document(&complete, &cstats).to_json();
        let gdoc = format::prefix_document(&gd, &gstats).to_json();
        assert_eq!(cdoc, gdoc);
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 2: PASS - exact equality on {} nets in {elapsed:?}",
        nets.len()
    );
}

/// Criterion 3: on the same 100 nets, the marks of cut-off-free
/// configurations equal the brute-force reachable set.
#[test]
fn criterion_3_complete_prefix_completeness() {
    let nets = safe_suite(suite_seed(), 100);
    for net in &nets {
        let (prefix, _) = complete_prefix(net);
        let realized = cutoff_free_marks(&prefix);
        let reachable: BTreeSet<Marking> =
            oracle::reachable_markings(net, net.initial_marking(), 10_000)
                .unwrap()
                .into_iter()
                .collect();
        assert_eq!(realized, reachable);
    }
    println!(
        "criterion 3: PASS - completeness verified on {} nets",
        nets.len()
    );
}

/// Criterion 4: every oracle minimal configuration is a configuration of the
/// depth-bounded goal-driven unfolding, for the flow and oracle reducers, on
/// 50 seeded nets with random subset goals.
#[test]
fn criterion_4_unfolding_preserves_minimal_configurations() {
    let suite = goal_suite(suite_seed(), 50);
    let mut checked = 0usize;
    for (net, goal) in &suite {
        let sequences =
            oracle::minimal_sequences(net, net.initial_marking(), goal, ORACLE_BOUND).unwrap();
        let depth = sequences.iter().map(Vec::len).max().unwrap_or(0) as u32;
        for reducer in [&FlowReducer as &dyn Reducer, &exact()] {
            let gd = gd_unfold(net, goal, reducer, Strategy::Always, depth).unwrap();
            for seq in &sequences {
                assert!(
                    gd.find_configuration(seq).unwrap().is_some(),
                    "minimal sequence lost from the goal-driven unfolding"
                );
                checked += 1;
            }
        }
    }
    println!(
        "criterion 4: PASS - {} minimal configurations contained, {} nets",
        checked,
        suite.len()
    );
}

/// Criterion 5: for every prefix-plus-extension of every oracle minimal
/// configuration, the converged goal-driven prefix has a configuration with
/// the same marking enabling an event with the same label. Within 5 minutes.
#[test]
fn criterion_5_prefix_preserves_minimal_extensions() {
    let started = Instant::now();
    let suite = goal_suite(suite_seed(), 50);
    let opts = GdOptions::default();
    let mut checked = 0usize;
    for (net, goal) in &suite {
        let sequences =
            oracle::minimal_sequences(net, net.initial_marking(), goal, ORACLE_BOUND).unwrap();
        for reducer in [&FlowReducer as &dyn Reducer, &exact()] {
            let (prefix, _) = gd_prefix(net, goal, reducer, Strategy::Always).unwrap();
            let witnesses = goal_driven::prefix_mark_extensions(&prefix, &opts).unwrap();
            // Enumerate all sub-configurations C of each minimal
            // configuration with a single-event extension inside it.
            let mut scratch = godunf::occurrence::Prefix::new(net.share());
            for seq in &sequences {
                let conf = scratch.seq_to_configuration(seq).unwrap();
                let events: Vec<_> = conf.events().iter().copied().collect();
                let n = events.len();
                for mask in 0..(1u32 << n) {
                    let subset: BTreeSet<_> = (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| events[i])
                        .collect();
                    let Ok(sub) = Configuration::new(&scratch, subset) else {
                        continue;
                    };
                    let mark = scratch.mark(&sub);
                    for &f in &events {
                        if sub.contains(f) {
                            continue;
                        }
                        let past_in: bool =
                            scratch.event(f).past().all(|p| sub.contains(p));
                        if !past_in {
                            continue;
                        }
                        let label = scratch.event(f).transition;
                        let ok = witnesses
                            .get(&mark)
                            .is_some_and(|labels| labels.contains(&label));
                        assert!(
                            ok,
                            "no witness for marking {:?} with label {}",
                            net.marking_names(&mark),
                            net.transition_name(label)
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "criterion 5: PASS - {} extension obligations witnessed in {elapsed:?}",
        checked
    );
}

/// Criterion 6: no reducer ever declares useless a transition that occurs in
/// some minimal sequence, from every reachable marking of every test net.
#[test]
fn criterion_6_reducer_soundness() {
    let mut suite = goal_suite(suite_seed(), 50);
    suite.push(fig2());
    let triv = triv();
    let triv_goal = godunf::net::Goal::new(
        &triv,
        [triv.place("p1").unwrap()],
        godunf::net::GoalMode::Subset,
    )
    .unwrap();
    suite.push((triv, triv_goal));

    let exact = exact();
    let mut checked = 0usize;
    for (net, goal) in &suite {
        let markings = oracle::reachable_markings(net, net.initial_marking(), 10_000).unwrap();
        for m in &markings {
            let useful = oracle::useful_transitions(net, m, goal, ORACLE_BOUND).unwrap();
            for reducer in [&NullReducer as &dyn Reducer, &FlowReducer, &exact] {
                let useless = reducer.useless_trs(net, m, goal).unwrap();
                let overlap: Vec<&TransId> = useless.intersection(&useful).collect();
                assert!(
                    overlap.is_empty(),
                    "reducer declared useful transitions useless: {overlap:?}"
                );
                checked += 1;
            }
        }
    }
    println!(
        "criterion 6: PASS - {} (marking, reducer) soundness checks",
        checked
    );
}

/// Criterion 7: Δ shrinks pointwise per fixpoint iteration and the loop
/// converges within the iteration cap.
#[test]
fn criterion_7_fixpoint_behaviour() {
    let mut suite = goal_suite(suite_seed(), 15);
    suite.push(fig2());
    let opts = GdOptions::default();
    let order_cache = |net: &SafeNet| ErvOrder::new(net);
    let exact = exact();
    let mut total_iterations = 0usize;
    for (net, goal) in &suite {
        for reducer in [&FlowReducer as &dyn Reducer, &exact] {
            let order = order_cache(net);
            let cache = UgCache::new(reducer);
            let mut delta = DeltaMap::new();
            let mut iterations = 0usize;
            loop {
                iterations += 1;
                assert!(iterations <= opts.iteration_cap, "fixpoint diverged");
                let prefix = putative_gd_prefix(
                    net,
                    goal,
                    &mut delta,
                    &cache,
                    Strategy::Always,
                    &order,
                    &opts,
                )
                .unwrap();
                let (refined, changed) = post_delta(
                    &delta,
                    &prefix,
                    &cache,
                    Strategy::Always,
                    &order,
                    &opts,
                    goal,
                )
                .unwrap();
                for (key, value) in &refined {
                    if let Some(old) = delta.get(key) {
                        assert!(value.is_subset(old), "Δ grew at a condition");
                    }
                }
                if !changed {
                    break;
                }
                delta = refined;
            }
            total_iterations += iterations;
        }
    }
    println!(
        "criterion 7: PASS - monotone convergence, {} iterations over {} runs",
        total_iterations,
        suite.len() * 2
    );
}

/// Criterion 8: on the fixture with the oracle reducer, the converged
/// goal-driven prefix must have strictly fewer non-cut-off events than the
/// complete prefix.
///
/// This criterion cannot hold as stated: under any total adequate order both
/// prefixes carry at most one non-cut-off event per reachable marking, the
/// complete prefix realises every reachable marking of the fixture that any
/// local configuration can reach (four of them), and the goal-driven prefix
/// preserves all minimal configurations, whose causal pasts realise the same
/// four markings. Both counts are therefore forced to 4. The size reduction
/// shows up in total events and conditions instead (6 < 7 and 10 < 11 on the
/// derived goldens), which the test prints before asserting the criterion as
/// written.
#[test]
fn criterion_8_size_reduction_direction() {
    let (net, goal) = fig2();
    let (complete, cstats) = complete_prefix(&net);
    let (gd, gstats) = gd_prefix(&net, &goal, &exact(), Strategy::Always).unwrap();
    // Derived goldens from the first verified run.
    assert_eq!(complete.event_count(), 7);
    assert_eq!(cstats.conditions, 11);
    assert_eq!(gd.event_count(), 6);
    assert_eq!(gstats.conditions, 10);
    assert!(gd.event_count() < complete.event_count());
    assert!(gstats.conditions < cstats.conditions);
    println!(
        "criterion 8: events {} < {}, conditions {} < {}, non-cutoff {} vs {}",
        gd.event_count(),
        complete.event_count(),
        gstats.conditions,
        cstats.conditions,
        gstats.non_cutoff_events,
        cstats.non_cutoff_events,
    );
    assert!(
        gstats.non_cutoff_events < cstats.non_cutoff_events,
        "criterion 8 as stated cannot hold: both prefixes keep one non-cut-off \
         event per realised marking under a total adequate order ({} vs {})",
        gstats.non_cutoff_events,
        cstats.non_cutoff_events,
    );
    println!("criterion 8: PASS");
}

/// Criterion 9: the published benchmark models are external artifacts and out
/// of scope; criteria 1-8 substitute for them.
#[test]
fn criterion_9_external_benchmarks_substituted() {
    println!(
        "criterion 9: SKIP - external benchmark models are out of scope; \
         substituted by criteria 1-8"
    );
}

/// Cross-check kept alongside the acceptance suite: the goal-driven prefix's
/// reported minimal configurations equal the oracle's classes on the random
/// goal suite.
#[test]
fn extraction_agrees_with_the_oracle_classes() {
    let suite = goal_suite(suite_seed() ^ 0xabcd, 25);
    let opts = GdOptions::default();
    for (net, goal) in &suite {
        let (prefix, _) = gd_prefix(net, goal, &exact(), Strategy::Always).unwrap();
        let configs = extract_goal_configurations(&prefix, goal, &opts).unwrap();
        let reported: BTreeSet<Vec<TransId>> = configs
            .iter()
            .filter(|c| c.minimal)
            .map(|c| c.linearization.clone())
            .collect();
        let classes = oracle::minimal_configurations(net, goal, ORACLE_BOUND).unwrap();
        // Each oracle class must be reported through exactly one of its
        // linearizations, and nothing else may be flagged minimal.
        let mut covered = 0usize;
        for class in &classes {
            let hits = reported
                .iter()
                .filter(|l| class.sequences.contains(*l))
                .count();
            assert_eq!(hits, 1, "class reported {hits} times");
            covered += hits;
        }
        assert_eq!(covered, reported.len(), "extra minimal configurations");
    }
    println!("extraction agrees with the oracle on {} nets", suite.len());
}
