//! Goal-driven unfolding and the goal-driven finite prefix.
//!
//! The semantic object is the goal-driven unfolding: the maximal prefix of the
//! full unfolding in which no event fires a transition declared useless after
//! one of its causal predecessors ([`gd_unfold`] builds it up to a depth
//! bound). The finite artifact is the converged goal-driven prefix
//! ([`gd_prefix`]): a fixpoint loop that repeatedly builds a putative prefix
//! under a per-condition map Δ of ignored transitions, then re-validates Δ a
//! posteriori ([`post_delta`]), intersecting each entry with a
//! condition-level useless set computed over alternating configurations and
//! propagating allowances from cut-off events to their representatives. Δ
//! only shrinks pointwise, which forces convergence.
//!
//! Cut-offs need this care: two events with equal local markings have the
//! same future in the full unfolding but not necessarily in the goal-driven
//! one, so transitions allowed after a cut-off must be re-allowed after the
//! event it was cut off against.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::net::{Goal, Marking, SafeNet, TransId};
use crate::occurrence::{CondId, CondKey, Configuration, EventId, Prefix};
use crate::oracle::{self, OracleError};
use crate::reduction::{Reducer, UgCache};
use crate::unfolder::{
    local_key, run_engine, AdequateOrder, BuildError, BuildHooks, EngineConfig, ErvOrder, OrderKey,
    PrefixStats,
};

/// When the reduction procedure is invoked: after each event, only for the
/// first `n` inserted events, or only for events up to a causal depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Always,
    FirstN(usize),
    LevelAtMost(u32),
}

impl Strategy {
    /// Membership of an event in the set E′ triggering explicit reductions,
    /// decided from its insertion index and causal depth.
    pub fn applies(&self, event_index: usize, depth: u32) -> bool {
        match *self {
            Strategy::Always => true,
            Strategy::FirstN(n) => event_index < n,
            Strategy::LevelAtMost(k) => depth <= k,
        }
    }
}

/// Per-condition map Δ of transitions to ignore, keyed by the canonical
/// structural identity of conditions so entries survive prefix rebuilds
/// across fixpoint iterations.
pub type DeltaMap = BTreeMap<CondKey, BTreeSet<TransId>>;

/// Alternating configurations associated with a base configuration.
pub type AltSet = BTreeSet<Configuration>;

#[derive(Debug, Clone)]
pub struct GdOptions {
    /// Hard cap on the size of one alternating-configuration set; exceeding
    /// it is an error, never a silent truncation.
    pub alt_cap: usize,
    /// Guard against a diverging fixpoint loop. Termination is guaranteed;
    /// the cap only catches implementation bugs.
    pub iteration_cap: usize,
    /// Cap on configuration enumeration during extraction.
    pub config_cap: usize,
    /// Also shift alternating configurations onto the order-larger event of
    /// an equal-marking pair, not only the smaller one.
    pub widened_alt: bool,
}

impl Default for GdOptions {
    fn default() -> Self {
        GdOptions {
            alt_cap: 10_000,
            iteration_cap: 1_000,
            config_cap: 1_000_000,
            widened_alt: false,
        }
    }
}

/// The set `alt(C)` of alternating configurations: the least set containing
/// `C` that, for every event pair with equal local markings ordered
/// `⌈e′⌉ ◁ ⌈e⌉`, contains `⌈e′⌉ ∪ C′` whenever some member `C′` produces a
/// condition of `cut(⌈e′⌉)` and the union is conflict-free. Computed over the
/// current prefix only.
pub fn alt_configurations(
    prefix: &Prefix,
    base: &Configuration,
    order: &dyn AdequateOrder,
    opts: &GdOptions,
) -> Result<AltSet, BuildError> {
    // Shift targets: the ◁-smaller side of each equal-marking event pair
    // (both sides when widened).
    let mut groups: BTreeMap<Marking, Vec<EventId>> = BTreeMap::new();
    for e in prefix.events() {
        groups
            .entry(prefix.event(e).local_mark.clone())
            .or_default()
            .push(e);
    }
    let mut shift_targets: Vec<EventId> = Vec::new();
    for group in groups.values() {
        if group.len() < 2 {
            continue;
        }
        let keys: Vec<OrderKey> = group.iter().map(|&e| local_key(order, prefix, e)).collect();
        for i in 0..group.len() {
            for j in 0..group.len() {
                if i != j && keys[j] < keys[i] {
                    shift_targets.push(group[j]);
                    if opts.widened_alt {
                        shift_targets.push(group[i]);
                    }
                }
            }
        }
    }
    shift_targets.sort_unstable();
    shift_targets.dedup();
    let target_data: Vec<(Configuration, BTreeSet<CondId>)> = shift_targets
        .into_iter()
        .map(|e| {
            let local = Configuration::local(prefix, e);
            let cut: BTreeSet<CondId> = prefix.cut(&local).into_iter().collect();
            (local, cut)
        })
        .collect();

    let mut result = AltSet::new();
    result.insert(base.clone());
    let mut worklist: VecDeque<Configuration> = VecDeque::new();
    worklist.push_back(base.clone());
    while let Some(member) = worklist.pop_front() {
        let produced: BTreeSet<CondId> = member
            .events()
            .iter()
            .flat_map(|&e| prefix.event(e).postset.iter().copied())
            .collect();
        for (local, cut) in &target_data {
            if cut.intersection(&produced).next().is_none() {
                continue;
            }
            if !union_conflict_free(prefix, local, &member) {
                continue;
            }
            let union = local.union(&member);
            if result.insert(union.clone()) {
                if result.len() > opts.alt_cap {
                    return Err(BuildError::AltCapExceeded { cap: opts.alt_cap });
                }
                worklist.push_back(union);
            }
        }
    }
    Ok(result)
}

fn union_conflict_free(prefix: &Prefix, a: &Configuration, b: &Configuration) -> bool {
    a.events()
        .iter()
        .filter(|e| !b.contains(**e))
        .all(|&x| b.events().iter().all(|&y| !prefix.in_conflict(x, y)))
}

/// Transitions to ignore in the future of `e`: the union over its causal
/// predecessors, refined through the reduction procedure when the strategy
/// puts `e` in E′. Recomputed recursively over a built prefix.
pub fn useless_of_event(
    prefix: &Prefix,
    e: EventId,
    cache: &UgCache,
    strategy: Strategy,
    goal: &Goal,
) -> Result<BTreeSet<TransId>, BuildError> {
    let mut memo: BTreeMap<EventId, BTreeSet<TransId>> = BTreeMap::new();
    useless_of_event_memo(prefix, e, cache, strategy, goal, &mut memo)
}

fn useless_of_event_memo(
    prefix: &Prefix,
    e: EventId,
    cache: &UgCache,
    strategy: Strategy,
    goal: &Goal,
    memo: &mut BTreeMap<EventId, BTreeSet<TransId>>,
) -> Result<BTreeSet<TransId>, BuildError> {
    if let Some(hit) = memo.get(&e) {
        return Ok(hit.clone());
    }
    let ev = prefix.event(e);
    // Useless is monotone along causality, so the union over all causal
    // predecessors equals the union over the direct ones.
    let parents: BTreeSet<EventId> = ev
        .preset
        .iter()
        .filter_map(|&c| prefix.condition(c).parent)
        .collect();
    let mut inherited = BTreeSet::new();
    for parent in parents {
        inherited.extend(useless_of_event_memo(prefix, parent, cache, strategy, goal, memo)?);
    }
    let value = if strategy.applies(e.0 as usize, ev.depth) {
        cache.ug(prefix.net(), &ev.local_mark, &inherited, goal)?
    } else {
        inherited
    };
    memo.insert(e, value.clone());
    Ok(value)
}

/// The condition-level useless set `Useless(c, Δ, P)` for a non-initial
/// condition, defined through its producing event: the union of Δ over the
/// event's preset if the event is outside E′, otherwise the intersection,
/// over all alternating configurations of the event's causal past, of the
/// reduction from their markings. Initial conditions keep their seeded entry.
#[allow(clippy::too_many_arguments)]
pub fn useless_of_condition(
    prefix: &Prefix,
    c: CondId,
    delta: &DeltaMap,
    cache: &UgCache,
    strategy: Strategy,
    order: &dyn AdequateOrder,
    opts: &GdOptions,
    goal: &Goal,
) -> Result<BTreeSet<TransId>, BuildError> {
    match prefix.condition(c).parent {
        None => Ok(delta
            .get(prefix.condition(c).key())
            .cloned()
            .unwrap_or_default()),
        Some(e) => event_useless_value(
            prefix,
            e,
            &|c2| {
                delta
                    .get(prefix.condition(c2).key())
                    .cloned()
                    .expect("preset conditions are keyed in Δ")
            },
            cache,
            strategy,
            order,
            opts,
            goal,
        ),
    }
}

/// Core of [`useless_of_condition`]: the value is a function of the producing
/// event and identical for all its postset conditions.
#[allow(clippy::too_many_arguments)]
fn event_useless_value(
    prefix: &Prefix,
    e: EventId,
    delta_of: &dyn Fn(CondId) -> BTreeSet<TransId>,
    cache: &UgCache,
    strategy: Strategy,
    order: &dyn AdequateOrder,
    opts: &GdOptions,
    goal: &Goal,
) -> Result<BTreeSet<TransId>, BuildError> {
    let ev = prefix.event(e);
    let mut inherited = BTreeSet::new();
    for &c in &ev.preset {
        inherited.extend(delta_of(c));
    }
    if !strategy.applies(e.0 as usize, ev.depth) {
        return Ok(inherited);
    }
    let local = Configuration::local(prefix, e);
    let alts = alt_configurations(prefix, &local, order, opts)?;
    let mut result: Option<BTreeSet<TransId>> = None;
    for alt in &alts {
        let mark = prefix.mark(alt);
        let useless = cache.ug(prefix.net(), &mark, &inherited, goal)?;
        result = Some(match result {
            None => useless,
            Some(acc) => acc.intersection(&useless).copied().collect(),
        });
    }
    Ok(result.expect("alt sets contain their base"))
}

struct PutativeHooks<'a> {
    delta: &'a mut DeltaMap,
    cache: &'a UgCache<'a>,
    strategy: Strategy,
    order: &'a dyn AdequateOrder,
    opts: &'a GdOptions,
    goal: &'a Goal,
}

impl BuildHooks for PutativeHooks<'_> {
    fn admit(&mut self, prefix: &Prefix, preset: &[CondId], t: TransId) -> Result<bool, BuildError> {
        Ok(!preset.iter().any(|&c| prefix.delta_of(c).contains(&t)))
    }

    fn after_insert(&mut self, prefix: &mut Prefix, e: EventId) -> Result<(), BuildError> {
        // Entries already in Δ are reused untouched; only fresh conditions
        // are assigned the condition-level useless set, which is shared by
        // all postset conditions of the event.
        let children = prefix.event(e).postset.clone();
        let any_missing = children
            .iter()
            .any(|&c| !self.delta.contains_key(prefix.condition(c).key()));
        let computed = if any_missing {
            Some(event_useless_value(
                prefix,
                e,
                &|c| prefix.delta_of(c).clone(),
                self.cache,
                self.strategy,
                self.order,
                self.opts,
                self.goal,
            )?)
        } else {
            None
        };
        for c in children {
            let key = prefix.condition(c).key().clone();
            let entry = match self.delta.get(&key) {
                Some(entry) => entry.clone(),
                None => {
                    let value = computed.clone().expect("computed when entries are missing");
                    self.delta.insert(key, value.clone());
                    value
                }
            };
            prefix.set_delta(c, entry);
        }
        Ok(())
    }
}

/// One putative goal-driven prefix: the insertion loop restricted to
/// extensions whose transition is absent from Δ over their preset, extending
/// Δ in place with entries for fresh conditions.
pub fn putative_gd_prefix(
    net: &SafeNet,
    goal: &Goal,
    delta: &mut DeltaMap,
    cache: &UgCache,
    strategy: Strategy,
    order: &dyn AdequateOrder,
    opts: &GdOptions,
) -> Result<Prefix, BuildError> {
    // Δ is defined on the initial conditions first: ⟨⊥, p⟩ ↦ ∅. Entries can
    // only shrink afterwards, so they stay empty across iterations.
    let probe = Prefix::new(net.share());
    for &c in probe.initial_conditions() {
        delta.entry(probe.condition(c).key().clone()).or_default();
    }
    let hooks = PutativeHooks {
        delta,
        cache,
        strategy,
        order,
        opts,
        goal,
    };
    run_engine(
        net,
        order,
        EngineConfig {
            detect_cutoffs: true,
            depth_bound: None,
        },
        hooks,
    )
}

/// Recomputes Δ a posteriori over a finished putative prefix: every produced
/// condition's entry is intersected with its recomputed useless set, and for
/// every event with a non-cut-off partner of equal local marking the
/// partner's cut entries are intersected with the place-matched entries of
/// the event's cut. Returns the refined map and whether anything shrank.
pub fn post_delta(
    delta: &DeltaMap,
    prefix: &Prefix,
    cache: &UgCache,
    strategy: Strategy,
    order: &dyn AdequateOrder,
    opts: &GdOptions,
    goal: &Goal,
) -> Result<(DeltaMap, bool), BuildError> {
    let mut delta2 = delta.clone();
    let mut changed = false;
    let old_lookup = |c: CondId| -> BTreeSet<TransId> {
        delta
            .get(prefix.condition(c).key())
            .cloned()
            .expect("putative build keyed every condition")
    };
    // Events were inserted following the order, so index order is ◁ order.
    for e in prefix.events() {
        if !prefix.event(e).postset.is_empty() {
            let useless =
                event_useless_value(prefix, e, &old_lookup, cache, strategy, order, opts, goal)?;
            for &c in &prefix.event(e).postset {
                let entry = delta2
                    .get_mut(prefix.condition(c).key())
                    .expect("keyed in Δ");
                let refined: BTreeSet<TransId> = entry.intersection(&useless).copied().collect();
                if refined.len() != entry.len() {
                    changed = true;
                    *entry = refined;
                }
            }
        }
        // Cut-off handling: allow after the representative whatever is
        // allowed after e, pairing cut conditions by place (cuts of safe
        // nets have one condition per place).
        let partner = prefix
            .events_with_mark(&prefix.event(e).local_mark.clone())
            .iter()
            .copied()
            .find(|&other| !prefix.event(other).cutoff && other != e);
        if let Some(partner) = partner {
            let cut_e = prefix.cut(&Configuration::local(prefix, e));
            let cut_p = prefix.cut(&Configuration::local(prefix, partner));
            let by_place: BTreeMap<_, _> = cut_e
                .iter()
                .map(|&c| (prefix.condition(c).place, c))
                .collect();
            for &cp in &cut_p {
                let Some(&ce) = by_place.get(&prefix.condition(cp).place) else {
                    continue;
                };
                let from = delta2
                    .get(prefix.condition(ce).key())
                    .cloned()
                    .expect("keyed in Δ");
                let entry = delta2
                    .get_mut(prefix.condition(cp).key())
                    .expect("keyed in Δ");
                let refined: BTreeSet<TransId> = entry.intersection(&from).copied().collect();
                if refined.len() != entry.len() {
                    changed = true;
                    *entry = refined;
                }
            }
        }
    }
    Ok((delta2, changed))
}

/// The converged goal-driven prefix under the production order and default
/// options.
pub fn gd_prefix(
    net: &SafeNet,
    goal: &Goal,
    reducer: &dyn Reducer,
    strategy: Strategy,
) -> Result<(Prefix, PrefixStats), BuildError> {
    gd_prefix_with(
        net,
        goal,
        reducer,
        strategy,
        &ErvOrder::new(net),
        &GdOptions::default(),
    )
}

/// The fixpoint loop: build a putative prefix from Δ, re-validate Δ, repeat
/// until nothing shrinks. Stats count fixpoint iterations and underlying
/// reducer invocations across all of them (results are memoized per
/// `(marking, ignored)` pair and shared between iterations).
pub fn gd_prefix_with(
    net: &SafeNet,
    goal: &Goal,
    reducer: &dyn Reducer,
    strategy: Strategy,
    order: &dyn AdequateOrder,
    opts: &GdOptions,
) -> Result<(Prefix, PrefixStats), BuildError> {
    let cache = UgCache::new(reducer);
    let mut delta = DeltaMap::new();
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > opts.iteration_cap {
            return Err(BuildError::IterationCapExceeded {
                cap: opts.iteration_cap,
            });
        }
        let prefix = putative_gd_prefix(net, goal, &mut delta, &cache, strategy, order, opts)?;
        let (refined, changed) = post_delta(&delta, &prefix, &cache, strategy, order, opts, goal)?;
        debug_assert!(
            refined
                .iter()
                .all(|(k, v)| delta.get(k).is_none_or(|old| v.is_subset(old))),
            "Δ must shrink pointwise"
        );
        if !changed {
            let stats = PrefixStats::of_prefix(&prefix, cache.calls(), iterations);
            return Ok((prefix, stats));
        }
        delta = refined;
    }
}

struct UnfoldHooks<'a> {
    /// Useless set per inserted event, indexed by event id.
    useless: Vec<BTreeSet<TransId>>,
    cache: &'a UgCache<'a>,
    strategy: Strategy,
    goal: &'a Goal,
}

impl BuildHooks for UnfoldHooks<'_> {
    fn admit(&mut self, prefix: &Prefix, preset: &[CondId], t: TransId) -> Result<bool, BuildError> {
        let blocked = preset
            .iter()
            .filter_map(|&c| prefix.condition(c).parent)
            .any(|parent| self.useless[parent.0 as usize].contains(&t));
        Ok(!blocked)
    }

    fn after_insert(&mut self, prefix: &mut Prefix, e: EventId) -> Result<(), BuildError> {
        let ev = prefix.event(e);
        let mut inherited = BTreeSet::new();
        for &c in &ev.preset {
            if let Some(parent) = prefix.condition(c).parent {
                inherited.extend(self.useless[parent.0 as usize].iter().copied());
            }
        }
        let value = if self.strategy.applies(e.0 as usize, ev.depth) {
            self.cache
                .ug(prefix.net(), &ev.local_mark, &inherited, self.goal)?
        } else {
            inherited
        };
        debug_assert_eq!(self.useless.len(), e.0 as usize);
        self.useless.push(value);
        Ok(())
    }
}

/// The goal-driven unfolding up to `depth_bound`: the maximal prefix of the
/// full unfolding with no event firing a transition declared useless after
/// one of its causal predecessors. No cut-offs are computed; this is the
/// semantic object used by the preservation tests.
pub fn gd_unfold(
    net: &SafeNet,
    goal: &Goal,
    reducer: &dyn Reducer,
    strategy: Strategy,
    depth_bound: u32,
) -> Result<Prefix, BuildError> {
    let cache = UgCache::new(reducer);
    let hooks = UnfoldHooks {
        useless: Vec::new(),
        cache: &cache,
        strategy,
        goal,
    };
    run_engine(
        net,
        &ErvOrder::new(net),
        EngineConfig {
            detect_cutoffs: false,
            depth_bound: Some(depth_bound),
        },
        hooks,
    )
}

/// One goal-reaching configuration recovered from a converged prefix, with
/// its oracle minimality verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalConfiguration {
    /// Canonical linearization of the configuration.
    pub linearization: Vec<TransId>,
    pub minimal: bool,
    /// Permutation witnessing non-minimality, when there is one.
    pub witness: Option<Vec<TransId>>,
}

/// Recovers the goal-reaching configurations identifiable from a converged
/// goal-driven prefix and classifies each as minimal or not.
///
/// A configuration of the net is grown step by step; a step firing `t` from a
/// configuration with marking `M` is taken only when some configuration of
/// the prefix with marking `M` enables a prefix event labelled `t`. Chains
/// revisiting a marking are pruned: such a configuration has a cycling
/// linearization, so it extends to no minimal configuration. Every minimal
/// configuration passes both filters; non-minimal goal configurations may
/// pass too and are reported with a negative verdict, not suppressed.
pub fn extract_goal_configurations(
    prefix: &Prefix,
    goal: &Goal,
    opts: &GdOptions,
) -> Result<Vec<GoalConfiguration>, BuildError> {
    let witnesses = prefix_mark_extensions(prefix, opts)?;
    let mut scratch = Prefix::new(prefix.share_net());
    let mut recorded: Vec<Configuration> = Vec::new();
    let mut visited: HashSet<Configuration> = HashSet::new();
    let start = Configuration::empty();
    visited.insert(start.clone());
    let mut path_marks = vec![scratch.mark(&start)];
    let mut budget = opts.config_cap;
    walk_goal_configs(
        &mut scratch,
        &witnesses,
        goal,
        &mut visited,
        &mut recorded,
        &mut budget,
        opts.config_cap,
        start,
        &mut path_marks,
    )?;

    let mut out: Vec<GoalConfiguration> = Vec::new();
    for conf in recorded {
        let linearization = canonical_linearization(&scratch, &conf);
        let verdict = oracle::is_minimal(scratch.net(), &linearization, goal).map_err(
            |e| match e {
                OracleError::BoundExceeded { bound } => BuildError::ConfigCapExceeded { cap: bound },
                other => unreachable!("extracted configurations replay: {other}"),
            },
        )?;
        out.push(GoalConfiguration {
            linearization,
            minimal: verdict.minimal,
            witness: verdict.witness,
        });
    }
    out.sort_by(|a, b| {
        (a.linearization.len(), &a.linearization).cmp(&(b.linearization.len(), &b.linearization))
    });
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk_goal_configs(
    scratch: &mut Prefix,
    witnesses: &BTreeMap<Marking, BTreeSet<TransId>>,
    goal: &Goal,
    visited: &mut HashSet<Configuration>,
    recorded: &mut Vec<Configuration>,
    budget: &mut usize,
    cap: usize,
    conf: Configuration,
    path_marks: &mut Vec<Marking>,
) -> Result<(), BuildError> {
    if *budget == 0 {
        return Err(BuildError::ConfigCapExceeded { cap });
    }
    *budget -= 1;
    let mark = scratch.mark(&conf);
    if goal.holds(&mark) {
        recorded.push(conf);
        return Ok(());
    }
    let allowed: Vec<TransId> = match witnesses.get(&mark) {
        Some(set) => set.iter().copied().collect(),
        None => return Ok(()),
    };
    for t in allowed {
        let cut = scratch.cut(&conf);
        let by_place: BTreeMap<_, _> = cut
            .iter()
            .map(|&c| (scratch.condition(c).place, c))
            .collect();
        let preset: Option<Vec<CondId>> = scratch
            .net()
            .pre(t)
            .iter()
            .map(|p| by_place.get(p).copied())
            .collect();
        let Some(preset) = preset else { continue };
        let event = match scratch.lookup_event(&preset, t) {
            Some(e) => e,
            None => scratch.add_event(preset, t),
        };
        let mut events = conf.events().clone();
        events.insert(event);
        let next: Configuration = events.into_iter().collect();
        let next_mark = scratch.mark(&next);
        if path_marks.contains(&next_mark) || !visited.insert(next.clone()) {
            continue;
        }
        path_marks.push(next_mark);
        let r = walk_goal_configs(
            scratch, witnesses, goal, visited, recorded, budget, cap, next, path_marks,
        );
        path_marks.pop();
        r?;
    }
    Ok(())
}

/// For each marking realised by some configuration of the prefix, the labels
/// of prefix events enabled at such a configuration's cut. Enumerates the
/// prefix's configurations exhaustively; they are finite because nothing in
/// the prefix extends beyond cut-offs.
pub fn prefix_mark_extensions(
    prefix: &Prefix,
    opts: &GdOptions,
) -> Result<BTreeMap<Marking, BTreeSet<TransId>>, BuildError> {
    let mut out: BTreeMap<Marking, BTreeSet<TransId>> = BTreeMap::new();
    let mut seen: HashSet<Configuration> = HashSet::new();
    let mut stack = vec![Configuration::empty()];
    seen.insert(Configuration::empty());
    while let Some(conf) = stack.pop() {
        if seen.len() > opts.config_cap {
            return Err(BuildError::ConfigCapExceeded {
                cap: opts.config_cap,
            });
        }
        let entry = out.entry(prefix.mark(&conf)).or_default();
        for (t, preset) in prefix.extensions_of(&conf) {
            let Some(e) = prefix.lookup_event(&preset, t) else {
                continue;
            };
            entry.insert(t);
            let mut events = conf.events().clone();
            events.insert(e);
            let next: Configuration = events.into_iter().collect();
            if seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    Ok(out)
}

/// Deterministic feasible linearization: repeatedly fires the enabled event
/// with the least transition (ties by event index).
fn canonical_linearization(prefix: &Prefix, conf: &Configuration) -> Vec<TransId> {
    let mut remaining: BTreeSet<EventId> = conf.events().clone();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let next = remaining
            .iter()
            .copied()
            .filter(|&e| prefix.event(e).past().all(|p| !remaining.contains(&p)))
            .min_by_key(|&e| (prefix.event(e).transition, e))
            .expect("configurations are causally closed");
        remaining.remove(&next);
        out.push(prefix.event(next).transition);
    }
    out
}



#[cfg(test)]
mod widened_alt_tests {
    use super::*;
    use crate::reduction::ExactOracleReducer;
    use crate::testutil::{fig2_goal, fig2_net};
    use crate::unfolder::{complete_prefix_with, WeightedOrder};

    #[test]
    fn widened_alt_contains_the_definitional_set() {
        let net = fig2_net().into_safe(10_000).unwrap();
        let order = WeightedOrder::new(&net, vec![1, 10, 1, 1, 1]);
        let (prefix, _) = complete_prefix_with(&net, &order);
        let narrow_opts = GdOptions::default();
        let wide_opts = GdOptions {
            widened_alt: true,
            ..GdOptions::default()
        };
        for e in prefix.events() {
            let base = Configuration::local(&prefix, e);
            let narrow = alt_configurations(&prefix, &base, &order, &narrow_opts).unwrap();
            let wide = alt_configurations(&prefix, &base, &order, &wide_opts).unwrap();
            assert!(narrow.is_subset(&wide));
        }
    }

    #[test]
    fn widened_alt_converges_to_the_same_extractable_classes_on_fig2() {
        let net = fig2_net().into_safe(10_000).unwrap();
        let goal = fig2_goal(&net);
        let order = WeightedOrder::new(&net, vec![1, 10, 1, 1, 1]);
        let exact = ExactOracleReducer::default();
        let wide_opts = GdOptions {
            widened_alt: true,
            ..GdOptions::default()
        };
        let (prefix, _) =
            gd_prefix_with(&net, &goal, &exact, Strategy::Always, &order, &wide_opts).unwrap();
        let configs = extract_goal_configurations(&prefix, &goal, &wide_opts).unwrap();
        assert_eq!(configs.iter().filter(|g| g.minimal).count(), 2);
    }
}
