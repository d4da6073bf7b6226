//! Occurrence nets and branching processes: conditions, events, causality,
//! conflict, concurrency, configurations, cuts and their markings.
//!
//! A [`Prefix`] is a branching process of a net under construction: it has a
//! single writer while it grows and is immutable (and freely shareable)
//! afterwards. Conditions and events carry dense indices in creation order;
//! creation order is deterministic given the net's canonical identifier
//! order, so two runs produce identical prefixes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::bits::BitVec;
use crate::net::{Marking, Net, PlaceId, TransId};

/// Condition index within one prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CondId(pub u32);

/// Event index within one prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OccurrenceError {
    #[error("configuration is not causally closed: missing predecessor of event {0:?}")]
    NotCausallyClosed(EventId),
    #[error("configuration has conflicting events {0:?} and {1:?}")]
    HasConflict(EventId, EventId),
    #[error("sequence is not fireable at position {at}: no token combination for `{transition}`")]
    NotFireable { at: usize, transition: String },
}

/// Canonical structural identity of a condition: its place plus the identity
/// of its producing event (none for initial conditions). Stable across
/// independently built prefixes of the same net.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CondKey(Arc<CondKeyNode>);

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct CondKeyNode {
    place: PlaceId,
    parent: Option<EventKey>,
}

impl CondKey {
    fn initial(place: PlaceId) -> Self {
        CondKey(Arc::new(CondKeyNode { place, parent: None }))
    }

    fn produced(place: PlaceId, parent: EventKey) -> Self {
        CondKey(Arc::new(CondKeyNode {
            place,
            parent: Some(parent),
        }))
    }

    pub fn place(&self) -> PlaceId {
        self.0.place
    }

    pub fn is_initial(&self) -> bool {
        self.0.parent.is_none()
    }
}

/// Canonical structural identity of an event: its transition plus the sorted
/// keys of its preset conditions. Within one prefix, keys identify nodes
/// uniquely; across prefix rebuilds they give a stable notion of "the same"
/// condition or event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventKey(Arc<EventKeyNode>);

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct EventKeyNode {
    transition: TransId,
    preset: Vec<CondKey>,
}

impl EventKey {
    pub fn transition(&self) -> TransId {
        self.0.transition
    }
}

/// A condition of an occurrence net; `parent` is the unique producing event,
/// or none for conditions of the initial cut.
#[derive(Debug, Clone)]
pub struct Condition {
    pub place: PlaceId,
    pub parent: Option<EventId>,
    key: CondKey,
}

impl Condition {
    pub fn key(&self) -> &CondKey {
        &self.key
    }
}

/// An event of an occurrence net.
#[derive(Debug, Clone)]
pub struct Event {
    pub transition: TransId,
    /// Sorted condition indices.
    pub preset: Vec<CondId>,
    pub postset: Vec<CondId>,
    pub cutoff: bool,
    /// Causal depth: 1 for events consuming only initial conditions.
    pub depth: u32,
    /// Mark(⌈e⌉), cached at insertion.
    pub local_mark: Marking,
    /// Strict causal predecessors (⌈e⌉ ∖ {e}).
    past: BitVec,
    key: EventKey,
}

impl Event {
    pub fn key(&self) -> &EventKey {
        &self.key
    }

    /// Strict causal predecessors of the event.
    pub fn past(&self) -> impl Iterator<Item = EventId> + '_ {
        self.past.iter_ones().map(|i| EventId(i as u32))
    }

    pub fn local_size(&self) -> usize {
        self.past.count_ones() + 1
    }
}

/// A causally closed, conflict-free event set, identified by its event
/// indices within one prefix.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    events: BTreeSet<EventId>,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration::default()
    }

    /// Validates causal closure and conflict-freeness.
    pub fn new(
        prefix: &Prefix,
        events: BTreeSet<EventId>,
    ) -> Result<Configuration, OccurrenceError> {
        for &e in &events {
            for pred in prefix.event(e).past() {
                if !events.contains(&pred) {
                    return Err(OccurrenceError::NotCausallyClosed(e));
                }
            }
        }
        let list: Vec<EventId> = events.iter().copied().collect();
        for (i, &e1) in list.iter().enumerate() {
            for &e2 in &list[i + 1..] {
                if prefix.in_conflict(e1, e2) {
                    return Err(OccurrenceError::HasConflict(e1, e2));
                }
            }
        }
        Ok(Configuration { events })
    }

    /// The local configuration ⌈e⌉.
    pub fn local(prefix: &Prefix, e: EventId) -> Configuration {
        let mut events: BTreeSet<EventId> = prefix.event(e).past().collect();
        events.insert(e);
        Configuration { events }
    }

    pub fn events(&self) -> &BTreeSet<EventId> {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, e: EventId) -> bool {
        self.events.contains(&e)
    }

    /// Union of two configurations; valid only if the result is conflict-free
    /// (the caller checks).
    pub fn union(&self, other: &Configuration) -> Configuration {
        Configuration {
            events: self.events.union(&other.events).copied().collect(),
        }
    }
}

impl FromIterator<EventId> for Configuration {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> Self {
        Configuration {
            events: iter.into_iter().collect(),
        }
    }
}

/// A branching process of a safe net.
#[derive(Debug, Clone)]
pub struct Prefix {
    net: Arc<Net>,
    conditions: Vec<Condition>,
    events: Vec<Event>,
    initial: Vec<CondId>,
    /// Symmetric concurrency matrix over conditions; co(c, c) is false.
    co: Vec<BitVec>,
    by_place: Vec<Vec<CondId>>,
    /// Events grouped by Mark(⌈e⌉), in insertion order.
    mark_events: HashMap<Marking, Vec<EventId>>,
    dedup: HashMap<(Vec<CondId>, TransId), EventId>,
    /// Per-condition set of ignored transitions (Δ); empty unless the prefix
    /// was built goal-driven.
    delta: Vec<BTreeSet<TransId>>,
}

impl Prefix {
    /// Fresh prefix holding one condition per initially marked place.
    pub fn new(net: Arc<Net>) -> Prefix {
        let mut prefix = Prefix {
            by_place: vec![Vec::new(); net.place_count()],
            net,
            conditions: Vec::new(),
            events: Vec::new(),
            initial: Vec::new(),
            co: Vec::new(),
            mark_events: HashMap::new(),
            dedup: HashMap::new(),
            delta: Vec::new(),
        };
        for p in prefix.net.initial_marking().clone().iter() {
            let id = prefix.push_condition(Condition {
                place: p,
                parent: None,
                key: CondKey::initial(p),
            });
            // Initial conditions are pairwise concurrent.
            for other in prefix.initial.clone() {
                prefix.set_co(id, other);
            }
            prefix.initial.push(id);
        }
        prefix
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn share_net(&self) -> Arc<Net> {
        Arc::clone(&self.net)
    }

    pub fn condition_count(&self) -> usize {
        self.conditions.len()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn condition(&self, c: CondId) -> &Condition {
        &self.conditions[c.0 as usize]
    }

    pub fn event(&self, e: EventId) -> &Event {
        &self.events[e.0 as usize]
    }

    pub fn conditions(&self) -> impl Iterator<Item = CondId> {
        (0..self.conditions.len()).map(|i| CondId(i as u32))
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len()).map(|i| EventId(i as u32))
    }

    pub fn initial_conditions(&self) -> &[CondId] {
        &self.initial
    }

    pub fn conditions_with_place(&self, p: PlaceId) -> &[CondId] {
        &self.by_place[p.0 as usize]
    }

    /// Events with a given local-configuration marking, in insertion order.
    pub fn events_with_mark(&self, m: &Marking) -> &[EventId] {
        self.mark_events.get(m).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cutoff_count(&self) -> usize {
        self.events.iter().filter(|e| e.cutoff).count()
    }

    pub fn delta_of(&self, c: CondId) -> &BTreeSet<TransId> {
        &self.delta[c.0 as usize]
    }

    pub(crate) fn set_delta(&mut self, c: CondId, ignored: BTreeSet<TransId>) {
        self.delta[c.0 as usize] = ignored;
    }

    pub fn lookup_event(&self, preset: &[CondId], t: TransId) -> Option<EventId> {
        let mut sorted = preset.to_vec();
        sorted.sort_unstable();
        self.dedup.get(&(sorted, t)).copied()
    }

    fn push_condition(&mut self, cond: Condition) -> CondId {
        let id = CondId(self.conditions.len() as u32);
        self.by_place[cond.place.0 as usize].push(id);
        self.conditions.push(cond);
        self.delta.push(BTreeSet::new());
        for row in &mut self.co {
            row.grow(self.conditions.len());
        }
        self.co.push(BitVec::with_len(self.conditions.len()));
        id
    }

    fn set_co(&mut self, a: CondId, b: CondId) {
        self.co[a.0 as usize].set(b.0 as usize, true);
        self.co[b.0 as usize].set(a.0 as usize, true);
    }

    /// Concurrency between conditions: neither causally related nor in
    /// conflict. `co(c, c)` is false.
    pub fn co(&self, a: CondId, b: CondId) -> bool {
        self.co[a.0 as usize].get(b.0 as usize)
    }

    pub(crate) fn co_row(&self, c: CondId) -> &BitVec {
        &self.co[c.0 as usize]
    }

    /// Structural key a fresh event with this preset and transition would get.
    pub fn event_key_for(&self, preset: &[CondId], t: TransId) -> EventKey {
        let mut keys: Vec<CondKey> = preset
            .iter()
            .map(|&c| self.condition(c).key.clone())
            .collect();
        keys.sort();
        EventKey(Arc::new(EventKeyNode {
            transition: t,
            preset: keys,
        }))
    }

    /// Causal depth a fresh event with this preset would get.
    pub fn depth_for(&self, preset: &[CondId]) -> u32 {
        1 + preset
            .iter()
            .filter_map(|&c| self.condition(c).parent)
            .map(|e| self.event(e).depth)
            .max()
            .unwrap_or(0)
    }

    /// Strict causal past a fresh event with this preset would get.
    fn past_for(&self, preset: &[CondId]) -> BitVec {
        let mut past = BitVec::with_len(self.events.len());
        for &c in preset {
            if let Some(parent) = self.condition(c).parent {
                past.or_assign(&self.events[parent.0 as usize].past);
                past.set(parent.0 as usize, true);
            }
        }
        past
    }

    /// Inserts the event `⟨preset, t⟩` and creates one condition per place of
    /// `post(t)`. The preset must be a co-set whose places are exactly
    /// `pre(t)`; both are checked in debug builds.
    pub fn add_event(&mut self, preset: Vec<CondId>, t: TransId) -> EventId {
        let mut preset = preset;
        preset.sort_unstable();
        debug_assert!(self.lookup_event(&preset, t).is_none(), "duplicate event");
        debug_assert!({
            let places: BTreeSet<PlaceId> =
                preset.iter().map(|&c| self.condition(c).place).collect();
            places == *self.net.pre(t) && places.len() == preset.len()
        });
        debug_assert!(preset
            .iter()
            .all(|&c1| preset.iter().all(|&c2| c1 == c2 || self.co(c1, c2))));

        let key = self.event_key_for(&preset, t);
        let depth = self.depth_for(&preset);
        let past = self.past_for(&preset);

        // Mark(⌈e⌉): marking before e among ⌈e⌉'s runs, then fire t.
        let pre_config: Configuration = past.iter_ones().map(|i| EventId(i as u32)).collect();
        let pre_mark = self.mark_of_events(&pre_config.events);
        let local_mark = self
            .net
            .fire(&pre_mark, t)
            .expect("preset co-set must enable its transition");

        let id = EventId(self.events.len() as u32);
        let net = Arc::clone(&self.net);

        // Concurrency row shared by all postset conditions: an existing
        // condition is concurrent with a fresh one iff it is concurrent with
        // every preset condition.
        let mut base = match preset.first() {
            Some(&c) => self.co[c.0 as usize].clone(),
            None => BitVec::new(),
        };
        for &c in &preset[1..] {
            base.and_assign(&self.co[c.0 as usize]);
        }

        let mut postset = Vec::new();
        for &p in net.post(t) {
            let cid = self.push_condition(Condition {
                place: p,
                parent: Some(id),
                key: CondKey::produced(p, key.clone()),
            });
            for other in base.iter_ones() {
                self.set_co(cid, CondId(other as u32));
            }
            for &sibling in &postset {
                self.set_co(cid, sibling);
            }
            postset.push(cid);
        }

        self.dedup.insert((preset.clone(), t), id);
        self.mark_events
            .entry(local_mark.clone())
            .or_default()
            .push(id);
        self.events.push(Event {
            transition: t,
            preset,
            postset,
            cutoff: false,
            depth,
            local_mark,
            past,
            key,
        });
        id
    }

    pub(crate) fn set_cutoff(&mut self, e: EventId) {
        self.events[e.0 as usize].cutoff = true;
    }

    /// `e1 ≤ e2 or e2 ≤ e1`.
    pub fn causally_related(&self, e1: EventId, e2: EventId) -> bool {
        e1 == e2
            || self.events[e1.0 as usize].past.get(e2.0 as usize)
            || self.events[e2.0 as usize].past.get(e1.0 as usize)
    }

    /// Conflict between events: distinct, not causally related, and some
    /// preset pair is not concurrent (which covers shared preconditions and
    /// inherited conflicts).
    pub fn in_conflict(&self, e1: EventId, e2: EventId) -> bool {
        if self.causally_related(e1, e2) {
            return false;
        }
        let p1 = &self.events[e1.0 as usize].preset;
        let p2 = &self.events[e2.0 as usize].preset;
        p1.iter()
            .any(|&c1| p2.iter().any(|&c2| c1 == c2 || !self.co(c1, c2)))
    }

    /// The cut of a configuration: `(C0 ∪ C°) ∖ •C`, sorted.
    pub fn cut(&self, conf: &Configuration) -> Vec<CondId> {
        let mut marked: BTreeSet<CondId> = self.initial.iter().copied().collect();
        for &e in conf.events() {
            marked.extend(self.events[e.0 as usize].postset.iter().copied());
        }
        for &e in conf.events() {
            for c in &self.events[e.0 as usize].preset {
                marked.remove(c);
            }
        }
        marked.into_iter().collect()
    }

    /// `Mark(C)`: the h-image of the cut.
    pub fn mark(&self, conf: &Configuration) -> Marking {
        self.mark_of_events(conf.events())
    }

    fn mark_of_events(&self, events: &BTreeSet<EventId>) -> Marking {
        let mut marked: BTreeSet<CondId> = self.initial.iter().copied().collect();
        for &e in events {
            marked.extend(self.events[e.0 as usize].postset.iter().copied());
        }
        for &e in events {
            for c in &self.events[e.0 as usize].preset {
                marked.remove(c);
            }
        }
        marked.iter().map(|&c| self.condition(c).place).collect()
    }

    /// All single-event extensions of a configuration: pairs `(t, preset)`
    /// with the preset inside the cut. Cuts of safe nets map injectively onto
    /// markings, so there is at most one extension per transition.
    pub fn extensions_of(&self, conf: &Configuration) -> Vec<(TransId, Vec<CondId>)> {
        let cut = self.cut(conf);
        let mut by_place: BTreeMap<PlaceId, CondId> = BTreeMap::new();
        for &c in &cut {
            by_place.insert(self.condition(c).place, c);
        }
        let mut out = Vec::new();
        for t in self.net.transitions() {
            let preset: Option<Vec<CondId>> = self
                .net
                .pre(t)
                .iter()
                .map(|p| by_place.get(p).copied())
                .collect();
            if let Some(preset) = preset {
                out.push((t, preset));
            }
        }
        out
    }

    /// Replays a firing sequence into the prefix, creating events on demand,
    /// and returns its configuration `K(σ)`.
    pub fn seq_to_configuration(
        &mut self,
        seq: &[TransId],
    ) -> Result<Configuration, OccurrenceError> {
        self.replay(seq, true)
            .map(|conf| conf.expect("growing replay always yields a configuration"))
    }

    /// Replays a firing sequence without growing the prefix; `None` if some
    /// step has no counterpart event.
    pub fn find_configuration(
        &self,
        seq: &[TransId],
    ) -> Result<Option<Configuration>, OccurrenceError> {
        let mut cut = self.initial_cut();
        let mut events = BTreeSet::new();
        for (at, &t) in seq.iter().enumerate() {
            let preset = self.preset_in_cut(&cut, t, at)?;
            let Some(event) = self.lookup_event(&preset, t) else {
                return Ok(None);
            };
            self.advance_cut(&mut cut, event);
            events.insert(event);
        }
        Ok(Some(Configuration { events }))
    }

    fn replay(&mut self, seq: &[TransId], grow: bool) -> Result<Option<Configuration>, OccurrenceError> {
        let mut cut = self.initial_cut();
        let mut events = BTreeSet::new();
        for (at, &t) in seq.iter().enumerate() {
            let preset = self.preset_in_cut(&cut, t, at)?;
            let event = match self.lookup_event(&preset, t) {
                Some(e) => e,
                None if grow => self.add_event(preset, t),
                None => return Ok(None),
            };
            self.advance_cut(&mut cut, event);
            events.insert(event);
        }
        Ok(Some(Configuration { events }))
    }

    fn initial_cut(&self) -> BTreeMap<PlaceId, CondId> {
        self.initial
            .iter()
            .map(|&c| (self.condition(c).place, c))
            .collect()
    }

    /// The unique co-set of the cut labelled `pre(t)`; cuts of safe nets map
    /// injectively onto markings, so per-place lookup suffices.
    fn preset_in_cut(
        &self,
        cut: &BTreeMap<PlaceId, CondId>,
        t: TransId,
        at: usize,
    ) -> Result<Vec<CondId>, OccurrenceError> {
        self.net
            .pre(t)
            .iter()
            .map(|p| {
                cut.get(p).copied().ok_or_else(|| OccurrenceError::NotFireable {
                    at,
                    transition: self.net.transition_name(t).to_string(),
                })
            })
            .collect()
    }

    fn advance_cut(&self, cut: &mut BTreeMap<PlaceId, CondId>, event: EventId) {
        for c in self.event(event).preset.clone() {
            cut.remove(&self.condition(c).place);
        }
        for c in self.event(event).postset.clone() {
            cut.insert(self.condition(c).place, c);
        }
    }

    /// Structural sanity of the occurrence net; used by tests after builds.
    pub fn check_invariants(&self) -> Result<(), String> {
        for e in self.events() {
            let ev = self.event(e);
            // Acyclicity plus past consistency: recompute the strict past.
            let recomputed = self.past_for(&ev.preset);
            if recomputed != ev.past {
                return Err(format!("event {e:?} has an inconsistent causal past"));
            }
            if ev.past.get(e.0 as usize) {
                return Err(format!("event {e:?} precedes itself"));
            }
            // Freedom from self-conflict: presets are co-sets.
            for &c1 in &ev.preset {
                for &c2 in &ev.preset {
                    if c1 != c2 && !self.co(c1, c2) {
                        return Err(format!("event {e:?} has a non-concurrent preset"));
                    }
                }
            }
        }
        for c in self.conditions() {
            let cond = self.condition(c);
            if cond.parent.is_none() != self.initial.contains(&c) {
                return Err(format!("condition {c:?} confuses initial and produced"));
            }
        }
        // Concurrency matrix against a from-scratch recomputation.
        for a in self.conditions() {
            for b in self.conditions() {
                if self.co(a, b) != self.co_recomputed(a, b) {
                    return Err(format!("co({a:?}, {b:?}) disagrees with recomputation"));
                }
            }
        }
        Ok(())
    }

    fn cond_le(&self, a: CondId, b: CondId) -> bool {
        if a == b {
            return true;
        }
        // a < b iff a is consumed by some event of ⌈parent(b)⌉: any path of
        // arcs out of a condition starts with a consuming event.
        let Some(parent) = self.condition(b).parent else {
            return false;
        };
        let mut ancestors: BTreeSet<EventId> = self.event(parent).past().collect();
        ancestors.insert(parent);
        ancestors.iter().any(|&e| self.event(e).preset.contains(&a))
    }

    fn co_recomputed(&self, a: CondId, b: CondId) -> bool {
        if a == b || self.cond_le(a, b) || self.cond_le(b, a) {
            return false;
        }
        let anc = |c: CondId| -> BTreeSet<EventId> {
            match self.condition(c).parent {
                None => BTreeSet::new(),
                Some(parent) => {
                    let mut s: BTreeSet<EventId> = self.event(parent).past().collect();
                    s.insert(parent);
                    s
                }
            }
        };
        for &u in &anc(a) {
            for &v in &anc(b) {
                if u != v {
                    let pu = &self.event(u).preset;
                    let pv = &self.event(v).preset;
                    if pu.iter().any(|c| pv.contains(c)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
