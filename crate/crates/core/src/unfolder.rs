//! Finite complete prefix construction: a total adequate order on finite
//! configurations, incremental possible-extensions search, and the event
//! insertion loop shared with the goal-driven builds.
//!
//! The production order compares configurations by size, then Parikh vectors
//! of their transition images lexicographically under the canonical
//! transition order, then Foata normal forms level by level with events keyed
//! structurally. Keys are unique per node of a prefix, so the order is total:
//! `Equal` only for identical configurations.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use thiserror::Error;

use crate::bits::BitVec;
use crate::net::{PlaceId, SafeNet, TransId};
use crate::occurrence::{CondId, Configuration, EventId, EventKey, Prefix};
use crate::reduction::ReduceError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("alternating-configuration cap of {cap} exceeded")]
    AltCapExceeded { cap: usize },
    #[error("fixpoint iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: usize },
    #[error("configuration enumeration cap of {cap} exceeded")]
    ConfigCapExceeded { cap: usize },
}

/// Counters describing one prefix construction. The size of a prefix is its
/// number of non-cut-off events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixStats {
    pub non_cutoff_events: usize,
    pub cutoff_events: usize,
    pub conditions: usize,
    pub reducer_calls: usize,
    pub iterations: usize,
}

impl PrefixStats {
    pub(crate) fn of_prefix(prefix: &Prefix, reducer_calls: usize, iterations: usize) -> Self {
        let cutoff_events = prefix.cutoff_count();
        PrefixStats {
            non_cutoff_events: prefix.event_count() - cutoff_events,
            cutoff_events,
            conditions: prefix.condition_count(),
            reducer_calls,
            iterations,
        }
    }
}

/// Totally ordered key materialising an adequate order on configurations.
/// `primary` is an order-specific numeric prefix (empty for the production
/// order); ties fall through to size, Parikh vector and Foata normal form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OrderKey {
    primary: Vec<u64>,
    size: usize,
    parikh: Vec<u32>,
    foata: Vec<Vec<EventKey>>,
}

/// An adequate order on the finite configurations of one prefix: a strict
/// total order refining set inclusion and preserved by finite extensions,
/// materialised as a sort key. `candidate` names an event not yet inserted,
/// counted as part of the configuration.
pub trait AdequateOrder: Sync {
    fn key(
        &self,
        prefix: &Prefix,
        events: &BTreeSet<EventId>,
        candidate: Option<(TransId, &[CondId])>,
    ) -> OrderKey;
}

/// The production total order: size, then Parikh, then Foata normal forms.
#[derive(Debug, Clone, Default)]
pub struct ErvOrder {
    /// Rank of each transition; the canonical declaration order.
    transition_rank: Vec<u32>,
}

impl ErvOrder {
    pub fn new(net: &crate::net::Net) -> Self {
        ErvOrder {
            transition_rank: (0..net.transition_count() as u32).collect(),
        }
    }

    fn base_key(
        &self,
        prefix: &Prefix,
        events: &BTreeSet<EventId>,
        candidate: Option<(TransId, &[CondId])>,
    ) -> OrderKey {
        let mut size = events.len();
        let mut parikh = vec![0u32; prefix.net().transition_count()];
        let mut levels: Vec<Vec<EventKey>> = Vec::new();
        {
            let mut push = |depth: u32, key: EventKey, t: TransId| {
                parikh[self.transition_rank[t.0 as usize] as usize] += 1;
                let level = depth as usize - 1;
                if levels.len() <= level {
                    levels.resize(level + 1, Vec::new());
                }
                levels[level].push(key);
            };
            for &e in events {
                let ev = prefix.event(e);
                push(ev.depth, ev.key().clone(), ev.transition);
            }
            if let Some((t, preset)) = candidate {
                size += 1;
                push(prefix.depth_for(preset), prefix.event_key_for(preset, t), t);
            }
        }
        for level in &mut levels {
            level.sort();
        }
        OrderKey {
            primary: Vec::new(),
            size,
            parikh,
            foata: levels,
        }
    }
}

impl AdequateOrder for ErvOrder {
    fn key(
        &self,
        prefix: &Prefix,
        events: &BTreeSet<EventId>,
        candidate: Option<(TransId, &[CondId])>,
    ) -> OrderKey {
        self.base_key(prefix, events, candidate)
    }
}

/// An adequate order ranking configurations by total transition weight first
/// (weights must be positive, so the order still refines inclusion), falling
/// back to the production order on ties. Lets tests realise orderings the
/// size-first order cannot, such as preferring a two-event configuration over
/// a heavy single event.
#[derive(Debug, Clone)]
pub struct WeightedOrder {
    weights: Vec<u64>,
    fallback: ErvOrder,
}

impl WeightedOrder {
    pub fn new(net: &crate::net::Net, weights: Vec<u64>) -> Self {
        assert_eq!(weights.len(), net.transition_count());
        assert!(weights.iter().all(|&w| w > 0), "weights must be positive");
        WeightedOrder {
            weights,
            fallback: ErvOrder::new(net),
        }
    }
}

impl AdequateOrder for WeightedOrder {
    fn key(
        &self,
        prefix: &Prefix,
        events: &BTreeSet<EventId>,
        candidate: Option<(TransId, &[CondId])>,
    ) -> OrderKey {
        let mut weight: u64 = events
            .iter()
            .map(|&e| self.weights[prefix.event(e).transition.0 as usize])
            .sum();
        if let Some((t, _)) = candidate {
            weight += self.weights[t.0 as usize];
        }
        let mut key = self.fallback.base_key(prefix, events, candidate);
        key.primary = vec![weight];
        key
    }
}

/// Three-way comparison of two configurations under an adequate order.
pub fn compare(
    order: &dyn AdequateOrder,
    prefix: &Prefix,
    c1: &Configuration,
    c2: &Configuration,
) -> std::cmp::Ordering {
    order
        .key(prefix, c1.events(), None)
        .cmp(&order.key(prefix, c2.events(), None))
}

/// Order key of the local configuration ⌈e⌉.
pub fn local_key(order: &dyn AdequateOrder, prefix: &Prefix, e: EventId) -> OrderKey {
    let local = Configuration::local(prefix, e);
    order.key(prefix, local.events(), None)
}

/// All extensions `⟨C′, t⟩` with `C′ ∩ dirty ≠ ∅` and `C′` a co-set labelled
/// `pre(t)`, excluding events already present. With `respect_cutoffs`,
/// conditions produced by cut-off events never join a preset.
pub fn possible_extensions(
    prefix: &Prefix,
    dirty: &[CondId],
    respect_cutoffs: bool,
) -> Vec<(TransId, Vec<CondId>)> {
    let net = prefix.net();
    let blocked = |c: CondId| -> bool {
        respect_cutoffs
            && prefix
                .condition(c)
                .parent
                .is_some_and(|e| prefix.event(e).cutoff)
    };
    let mut seen: HashSet<(TransId, Vec<CondId>)> = HashSet::new();
    let mut out = Vec::new();
    for &anchor in dirty {
        if blocked(anchor) {
            continue;
        }
        let anchor_place = prefix.condition(anchor).place;
        for &t in net.consumers_of(anchor_place) {
            let rest: Vec<PlaceId> = net
                .pre(t)
                .iter()
                .copied()
                .filter(|&p| p != anchor_place)
                .collect();
            // Backtracking co-set search anchored at the dirty condition; the
            // mask keeps only conditions concurrent with everything chosen.
            let mut chosen = vec![anchor];
            search_cosets(
                prefix,
                &rest,
                0,
                &mut chosen,
                prefix.co_row(anchor),
                &blocked,
                &mut |preset| {
                    let mut sorted = preset.to_vec();
                    sorted.sort_unstable();
                    if prefix.lookup_event(&sorted, t).is_none() && seen.insert((t, sorted.clone()))
                    {
                        out.push((t, sorted));
                    }
                },
            );
        }
    }
    out.sort();
    out
}

fn search_cosets(
    prefix: &Prefix,
    places: &[PlaceId],
    at: usize,
    chosen: &mut Vec<CondId>,
    mask: &BitVec,
    blocked: &dyn Fn(CondId) -> bool,
    emit: &mut dyn FnMut(&[CondId]),
) {
    if at == places.len() {
        emit(chosen);
        return;
    }
    for &c in prefix.conditions_with_place(places[at]) {
        if !mask.get(c.0 as usize) || blocked(c) {
            continue;
        }
        let mut next_mask = mask.clone();
        next_mask.and_assign(prefix.co_row(c));
        chosen.push(c);
        search_cosets(prefix, places, at + 1, chosen, &next_mask, blocked, emit);
        chosen.pop();
    }
}

/// Build-time callbacks distinguishing the complete, putative goal-driven and
/// goal-driven-unfolding constructions.
pub(crate) trait BuildHooks {
    /// Whether a candidate extension may enter the queue.
    fn admit(&mut self, prefix: &Prefix, preset: &[CondId], t: TransId)
        -> Result<bool, BuildError>;

    /// Invoked after each insertion, before extensions of the new postset are
    /// generated.
    fn after_insert(&mut self, prefix: &mut Prefix, e: EventId) -> Result<(), BuildError>;
}

pub(crate) struct NoHooks;

impl BuildHooks for NoHooks {
    fn admit(&mut self, _: &Prefix, _: &[CondId], _: TransId) -> Result<bool, BuildError> {
        Ok(true)
    }

    fn after_insert(&mut self, _: &mut Prefix, _: EventId) -> Result<(), BuildError> {
        Ok(())
    }
}

#[derive(PartialEq, Eq)]
struct Pending {
    key: OrderKey,
    seq: u64,
    trans: TransId,
    preset: Vec<CondId>,
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.key, self.seq).cmp(&(&other.key, other.seq))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct EngineConfig {
    pub detect_cutoffs: bool,
    pub depth_bound: Option<u32>,
}

/// The shared insertion loop: repeatedly inserts the ◁-minimal admitted
/// extension, flags cut-offs against previously inserted events with equal
/// local marking, and never extends beyond cut-offs.
pub(crate) fn run_engine<H: BuildHooks>(
    net: &SafeNet,
    order: &dyn AdequateOrder,
    config: EngineConfig,
    mut hooks: H,
) -> Result<Prefix, BuildError> {
    let mut prefix = Prefix::new(net.share());
    let mut queue: BinaryHeap<Reverse<Pending>> = BinaryHeap::new();
    let mut seq = 0u64;

    let push_batch = |prefix: &Prefix,
                      queue: &mut BinaryHeap<Reverse<Pending>>,
                      seq: &mut u64,
                      dirty: &[CondId],
                      hooks: &mut H|
     -> Result<(), BuildError> {
        for (t, preset) in possible_extensions(prefix, dirty, config.detect_cutoffs) {
            if let Some(bound) = config.depth_bound {
                if prefix.depth_for(&preset) > bound {
                    continue;
                }
            }
            if !hooks.admit(prefix, &preset, t)? {
                continue;
            }
            // Rank by the candidate's local configuration ⌈e⌉.
            let mut members = BTreeSet::new();
            for &c in &preset {
                if let Some(parent) = prefix.condition(c).parent {
                    members.extend(prefix.event(parent).past());
                    members.insert(parent);
                }
            }
            let key = order.key(prefix, &members, Some((t, &preset)));
            queue.push(Reverse(Pending {
                key,
                seq: *seq,
                trans: t,
                preset,
            }));
            *seq += 1;
        }
        Ok(())
    };

    let initial: Vec<CondId> = prefix.initial_conditions().to_vec();
    push_batch(&prefix, &mut queue, &mut seq, &initial, &mut hooks)?;

    while let Some(Reverse(pending)) = queue.pop() {
        if prefix.lookup_event(&pending.preset, pending.trans).is_some() {
            continue;
        }
        let e = prefix.add_event(pending.preset, pending.trans);
        let is_cutoff = config.detect_cutoffs
            && prefix
                .events_with_mark(&prefix.event(e).local_mark.clone())
                .iter()
                .any(|&other| other != e);
        if is_cutoff {
            prefix.set_cutoff(e);
        }
        hooks.after_insert(&mut prefix, e)?;
        if !is_cutoff {
            let dirty = prefix.event(e).postset.clone();
            push_batch(&prefix, &mut queue, &mut seq, &dirty, &mut hooks)?;
        }
    }
    Ok(prefix)
}

/// Classical finite complete prefix under the production order.
pub fn complete_prefix(net: &SafeNet) -> (Prefix, PrefixStats) {
    complete_prefix_with(net, &ErvOrder::new(net))
}

/// Classical finite complete prefix under a chosen adequate order.
pub fn complete_prefix_with(net: &SafeNet, order: &dyn AdequateOrder) -> (Prefix, PrefixStats) {
    let prefix = run_engine(
        net,
        order,
        EngineConfig {
            detect_cutoffs: true,
            depth_bound: None,
        },
        NoHooks,
    )
    .expect("complete prefix construction is infallible");
    let stats = PrefixStats::of_prefix(&prefix, 0, 1);
    (prefix, stats)
}

/// Depth-bounded unfolding with no cut-off detection; a finite window onto
/// the full (generally infinite) unfolding, used by the semantic tests.
pub fn bounded_unfolding(net: &SafeNet, depth_bound: u32) -> Prefix {
    run_engine(
        net,
        &ErvOrder::new(net),
        EngineConfig {
            detect_cutoffs: false,
            depth_bound: Some(depth_bound),
        },
        NoHooks,
    )
    .expect("bounded unfolding construction is infallible")
}
