//! Shared helpers for the integration suites: a deterministic RNG, a random
//! safe-net generator, and fixture loading.
//!
//! All randomized suites derive from a fixed seed so runs are reproducible;
//! set GODUNF_TEST_SEED to explore a different universe.

#![allow(dead_code)]

use std::collections::BTreeSet;

use godunf::net::{Goal, GoalMode, Marking, Net, SafeNet, SafetyReport, TransId};
use godunf::occurrence::{CondId, Configuration, EventId, Prefix};
use godunf::oracle;

pub const DEFAULT_SEED: u64 = 0x5eed_0001;
pub const ORACLE_BOUND: usize = 200_000;

pub fn suite_seed() -> u64 {
    std::env::var("GODUNF_TEST_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// SplitMix64: tiny, seedable, stable across platforms and releases.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    /// `k` distinct samples from `0..n`.
    pub fn distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// A random net with at most 8 places and 10 transitions; not necessarily
/// safe.
pub fn random_net(rng: &mut Rng) -> Net {
    let n_places = rng.range(3, 8);
    let n_trans = rng.range(2, 10);
    let places: Vec<String> = (0..n_places).map(|i| format!("p{i}")).collect();
    let mut transitions = Vec::new();
    for i in 0..n_trans {
        let n_pre = rng.range(1, 2.min(n_places));
        let pre: Vec<String> = rng
            .distinct(n_places, n_pre)
            .into_iter()
            .map(|p| format!("p{p}"))
            .collect();
        let n_post = rng.below(3).min(n_places);
        let post: Vec<String> = rng
            .distinct(n_places, n_post)
            .into_iter()
            .map(|p| format!("p{p}"))
            .collect();
        transitions.push((format!("t{i}"), pre, post));
    }
    let n_init = rng.range(1, 3.min(n_places));
    let initial: Vec<String> = rng
        .distinct(n_places, n_init)
        .into_iter()
        .map(|p| format!("p{p}"))
        .collect();
    Net::new(places, transitions, initial).expect("generator emits well-formed nets")
}

/// `count` seeded random nets verified 1-safe, each with at least a few
/// reachable markings so the prefixes are non-degenerate.
pub fn safe_suite(seed: u64, count: usize) -> Vec<SafeNet> {
    let mut rng = Rng::new(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let net = random_net(&mut rng);
        if let SafetyReport::Safe { reachable } = net.check_safe(2_000) {
            if reachable >= 4 {
                out.push(net.assume_safe());
            }
        }
    }
    out
}

/// `count` seeded random safe nets paired with a subset-mode goal that is
/// reachable but not already satisfied initially, filtered so the sequence
/// oracle stays within budget from every reachable marking (the suites
/// quantify over all of them).
pub fn goal_suite(seed: u64, count: usize) -> Vec<(SafeNet, Goal)> {
    let mut rng = Rng::new(seed ^ 0x60a1);
    let mut out = Vec::new();
    'outer: while out.len() < count {
        let net = random_net(&mut rng);
        let SafetyReport::Safe { reachable } = net.check_safe(2_000) else {
            continue;
        };
        if !(4..=64).contains(&reachable) {
            continue;
        }
        let safe = net.assume_safe();
        let markings = oracle::reachable_markings(&safe, safe.initial_marking(), 2_000)
            .expect("within bound");
        // Prefer deep goals: sample among the last markings in BFS order.
        let lo = markings.len().saturating_sub(8);
        let target = &markings[rng.range(lo, markings.len() - 1)];
        let places: Vec<_> = target.iter().collect();
        if places.is_empty() {
            continue;
        }
        let k = rng.range(1, places.len());
        let goal_places: Vec<_> = rng
            .distinct(places.len(), k)
            .into_iter()
            .map(|i| places[i])
            .collect();
        let Ok(goal) = Goal::new(&safe, goal_places, GoalMode::Subset) else {
            continue;
        };
        if goal.holds(safe.initial_marking()) {
            continue;
        }
        // Oracle feasibility probe from every reachable marking; the goal
        // must take at least two steps from the initial marking so the
        // suites exercise inheritance along causality.
        match oracle::minimal_sequences(&safe, safe.initial_marking(), &goal, 30_000) {
            Ok(sequences)
                if !sequences.is_empty() && sequences.iter().any(|s| s.len() >= 2) => {}
            _ => continue,
        }
        for m in &markings {
            if oracle::minimal_sequences(&safe, m, &goal, 30_000).is_err() {
                continue 'outer;
            }
        }
        out.push((safe, goal));
    }
    out
}

pub fn fig2() -> (SafeNet, Goal) {
    let doc = godunf::format::parse_net(include_str!("../../fixtures/fig2.net")).unwrap();
    let goal = doc.goal.clone().unwrap();
    (doc.net.into_safe(10_000).unwrap(), goal)
}

pub fn triv() -> SafeNet {
    let doc = godunf::format::parse_net(include_str!("../../fixtures/triv.net")).unwrap();
    doc.net.into_safe(10_000).unwrap()
}

pub fn trans(net: &Net, name: &str) -> TransId {
    net.transition(name).unwrap()
}

pub fn seq(net: &Net, names: &[&str]) -> Vec<TransId> {
    names.iter().map(|n| trans(net, n)).collect()
}

/// Event fingerprint for event-for-event prefix comparison.
pub fn event_shape(prefix: &Prefix) -> Vec<(TransId, Vec<CondId>, bool)> {
    prefix
        .events()
        .map(|e| {
            let ev = prefix.event(e);
            (ev.transition, ev.preset.clone(), ev.cutoff)
        })
        .collect()
}

/// Marks of all cut-off-free configurations of a prefix, by exhaustive
/// enumeration.
pub fn cutoff_free_marks(prefix: &Prefix) -> BTreeSet<Marking> {
    let mut seen: std::collections::HashSet<BTreeSet<EventId>> = std::collections::HashSet::new();
    let mut marks = BTreeSet::new();
    let mut stack = vec![Configuration::empty()];
    seen.insert(BTreeSet::new());
    while let Some(conf) = stack.pop() {
        marks.insert(prefix.mark(&conf));
        for (t, preset) in prefix.extensions_of(&conf) {
            let Some(e) = prefix.lookup_event(&preset, t) else {
                continue;
            };
            if prefix.event(e).cutoff {
                continue;
            }
            let mut next = conf.events().clone();
            if next.insert(e) && seen.insert(next.clone()) {
                stack.push(Configuration::new(prefix, next).unwrap());
            }
        }
    }
    marks
}
