//! Safe Petri nets: places, transitions, flow relation, markings, goals,
//! firing semantics and an exhaustive 1-safety check.
//!
//! All constructions downstream assume 1-safety, so [`Net::check_safe`] must
//! certify a net (or the caller must explicitly assume it) before a [`SafeNet`]
//! handle is available to the unfolding engines.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use thiserror::Error;

/// Place index in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub u32);

/// Transition index in declaration order. Declaration order is the canonical
/// order used for all downstream tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransId(pub u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate place identifier `{0}`")]
    DuplicatePlace(String),
    #[error("duplicate transition identifier `{0}`")]
    DuplicateTransition(String),
    #[error("unknown place identifier `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition identifier `{0}`")]
    UnknownTransition(String),
    #[error("transition `{0}` has an empty preset")]
    EmptyPreset(String),
    #[error("transition `{transition}` is not enabled (missing place `{place}`)")]
    NotEnabled { transition: String, place: String },
    #[error("goal has no places")]
    EmptyGoal,
    #[error("net is not 1-safe: witness {witness:?}")]
    Unsafe { witness: Vec<String> },
    #[error("safety check exceeded the bound of {bound} markings")]
    SafetyBoundExceeded { bound: usize },
}

/// A set-marking of a safe net.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(BTreeSet<PlaceId>);

impl Marking {
    pub fn new(places: impl IntoIterator<Item = PlaceId>) -> Self {
        Marking(places.into_iter().collect())
    }

    pub fn contains(&self, p: PlaceId) -> bool {
        self.0.contains(&p)
    }

    pub fn is_superset(&self, other: &Marking) -> bool {
        self.0.is_superset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_set(&self) -> &BTreeSet<PlaceId> {
        &self.0
    }
}

impl FromIterator<PlaceId> for Marking {
    fn from_iter<I: IntoIterator<Item = PlaceId>>(iter: I) -> Self {
        Marking(iter.into_iter().collect())
    }
}

/// How a goal is matched against a marking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalMode {
    /// The marking must equal the goal places exactly.
    Exact,
    /// The goal places must all be marked, possibly among others.
    Subset,
}

impl fmt::Display for GoalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalMode::Exact => write!(f, "exact"),
            GoalMode::Subset => write!(f, "subset"),
        }
    }
}

/// A reachability goal: a non-empty place set plus its interpretation mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    places: BTreeSet<PlaceId>,
    mode: GoalMode,
}

impl Goal {
    pub fn new(
        net: &Net,
        places: impl IntoIterator<Item = PlaceId>,
        mode: GoalMode,
    ) -> Result<Self, NetError> {
        let places: BTreeSet<PlaceId> = places.into_iter().collect();
        if places.is_empty() {
            return Err(NetError::EmptyGoal);
        }
        for &p in &places {
            if p.0 as usize >= net.places.len() {
                return Err(NetError::UnknownPlace(format!("#{}", p.0)));
            }
        }
        Ok(Goal { places, mode })
    }

    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.places
    }

    pub fn mode(&self) -> GoalMode {
        self.mode
    }

    /// True iff the marking satisfies the goal under its mode.
    pub fn holds(&self, m: &Marking) -> bool {
        match self.mode {
            GoalMode::Exact => *m.as_set() == self.places,
            GoalMode::Subset => m.as_set().is_superset(&self.places),
        }
    }
}

/// Outcome of the exhaustive 1-safety check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafetyReport {
    /// Every reachable firing satisfies the safety property.
    Safe { reachable: usize },
    /// A firing sequence after which some fired transition would put a second
    /// token on a place.
    Unsafe { witness: Vec<TransId> },
    /// Exploration stopped before exhausting the state space.
    BoundExceeded,
}

/// A finite safe Petri net.
///
/// Places and transitions are identified by unique strings; their declaration
/// order fixes [`PlaceId`]/[`TransId`] numbering and thereby every canonical
/// order used downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    places: Vec<String>,
    transitions: Vec<String>,
    pre: Vec<BTreeSet<PlaceId>>,
    post: Vec<BTreeSet<PlaceId>>,
    initial: Marking,
    place_lookup: HashMap<String, PlaceId>,
    trans_lookup: HashMap<String, TransId>,
    /// Transitions consuming each place.
    consumers: Vec<Vec<TransId>>,
    /// Transitions producing each place.
    producers: Vec<Vec<TransId>>,
}

impl Net {
    /// Builds and validates a net. A transition with an empty preset is
    /// rejected: it would be enabled forever and break finiteness of causal
    /// pasts.
    pub fn new(
        places: Vec<String>,
        transitions: Vec<(String, Vec<String>, Vec<String>)>,
        initial: Vec<String>,
    ) -> Result<Net, NetError> {
        let mut place_lookup = HashMap::new();
        for (i, p) in places.iter().enumerate() {
            if place_lookup.insert(p.clone(), PlaceId(i as u32)).is_some() {
                return Err(NetError::DuplicatePlace(p.clone()));
            }
        }
        let mut trans_lookup = HashMap::new();
        let mut names = Vec::with_capacity(transitions.len());
        let mut pre = Vec::with_capacity(transitions.len());
        let mut post = Vec::with_capacity(transitions.len());
        for (i, (name, pre_names, post_names)) in transitions.iter().enumerate() {
            if trans_lookup.insert(name.clone(), TransId(i as u32)).is_some() {
                return Err(NetError::DuplicateTransition(name.clone()));
            }
            let resolve = |ns: &[String]| -> Result<BTreeSet<PlaceId>, NetError> {
                ns.iter()
                    .map(|n| {
                        place_lookup
                            .get(n)
                            .copied()
                            .ok_or_else(|| NetError::UnknownPlace(n.clone()))
                    })
                    .collect()
            };
            let pre_set = resolve(pre_names)?;
            if pre_set.is_empty() {
                return Err(NetError::EmptyPreset(name.clone()));
            }
            pre.push(pre_set);
            post.push(resolve(post_names)?);
            names.push(name.clone());
        }
        let initial = initial
            .iter()
            .map(|n| {
                place_lookup
                    .get(n)
                    .copied()
                    .ok_or_else(|| NetError::UnknownPlace(n.clone()))
            })
            .collect::<Result<Marking, _>>()?;
        let mut consumers = vec![Vec::new(); places.len()];
        let mut producers = vec![Vec::new(); places.len()];
        for t in 0..names.len() {
            for &p in &pre[t] {
                consumers[p.0 as usize].push(TransId(t as u32));
            }
            for &p in &post[t] {
                producers[p.0 as usize].push(TransId(t as u32));
            }
        }
        Ok(Net {
            places,
            transitions: names,
            pre,
            post,
            initial,
            place_lookup,
            trans_lookup,
            consumers,
            producers,
        })
    }

    /// Convenience constructor for `&str` literals.
    pub fn build(
        places: &[&str],
        transitions: &[(&str, &[&str], &[&str])],
        initial: &[&str],
    ) -> Result<Net, NetError> {
        Net::new(
            places.iter().map(|s| s.to_string()).collect(),
            transitions
                .iter()
                .map(|(n, pre, post)| {
                    (
                        n.to_string(),
                        pre.iter().map(|s| s.to_string()).collect(),
                        post.iter().map(|s| s.to_string()).collect(),
                    )
                })
                .collect(),
            initial.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0 as usize]
    }

    pub fn transition_name(&self, t: TransId) -> &str {
        &self.transitions[t.0 as usize]
    }

    pub fn place(&self, name: &str) -> Result<PlaceId, NetError> {
        self.place_lookup
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownPlace(name.to_string()))
    }

    pub fn transition(&self, name: &str) -> Result<TransId, NetError> {
        self.trans_lookup
            .get(name)
            .copied()
            .ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    pub fn places(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len()).map(|i| PlaceId(i as u32))
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransId> {
        (0..self.transitions.len()).map(|i| TransId(i as u32))
    }

    pub fn pre(&self, t: TransId) -> &BTreeSet<PlaceId> {
        &self.pre[t.0 as usize]
    }

    pub fn post(&self, t: TransId) -> &BTreeSet<PlaceId> {
        &self.post[t.0 as usize]
    }

    pub fn consumers_of(&self, p: PlaceId) -> &[TransId] {
        &self.consumers[p.0 as usize]
    }

    pub fn producers_of(&self, p: PlaceId) -> &[TransId] {
        &self.producers[p.0 as usize]
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    /// True iff `pre(t) ⊆ m`.
    pub fn is_enabled(&self, m: &Marking, t: TransId) -> bool {
        self.pre[t.0 as usize].iter().all(|&p| m.contains(p))
    }

    pub fn enabled_transitions<'a>(&'a self, m: &'a Marking) -> impl Iterator<Item = TransId> + 'a {
        self.transitions().filter(move |&t| self.is_enabled(m, t))
    }

    /// Fires `t` at `m`, yielding `(m ∖ pre(t)) ∪ post(t)`.
    pub fn fire(&self, m: &Marking, t: TransId) -> Result<Marking, NetError> {
        for &p in self.pre(t) {
            if !m.contains(p) {
                return Err(NetError::NotEnabled {
                    transition: self.transition_name(t).to_string(),
                    place: self.place_name(p).to_string(),
                });
            }
        }
        let mut set = m.as_set().clone();
        for &p in self.pre(t) {
            set.remove(&p);
        }
        for &p in self.post(t) {
            set.insert(p);
        }
        Ok(Marking(set))
    }

    /// Exhaustively explores reachable markings up to `state_bound` and checks
    /// the 1-safety property on every firing. Firing `t` at `M` is a violation
    /// exactly when some place of `M` outside `pre(t)` is re-produced, i.e.
    /// `M ∩ (post(t) ∖ pre(t)) ≠ ∅`.
    pub fn check_safe(&self, state_bound: usize) -> SafetyReport {
        let mut parent: HashMap<Marking, Option<(Marking, TransId)>> = HashMap::new();
        let mut queue = VecDeque::new();
        parent.insert(self.initial.clone(), None);
        queue.push_back(self.initial.clone());
        let mut explored = 0usize;
        while let Some(m) = queue.pop_front() {
            explored += 1;
            for t in self.enabled_transitions(&m) {
                let violation = self
                    .post(t)
                    .iter()
                    .any(|&p| !self.pre(t).contains(&p) && m.contains(p));
                if violation {
                    let mut witness = vec![t];
                    let mut cur = m.clone();
                    while let Some(Some((prev, step))) = parent.get(&cur) {
                        witness.push(*step);
                        cur = prev.clone();
                    }
                    witness.reverse();
                    return SafetyReport::Unsafe { witness };
                }
                let next = self.fire(&m, t).expect("enabled transition fires");
                if !parent.contains_key(&next) {
                    if parent.len() >= state_bound {
                        return SafetyReport::BoundExceeded;
                    }
                    parent.insert(next.clone(), Some((m.clone(), t)));
                    queue.push_back(next);
                }
            }
        }
        SafetyReport::Safe { reachable: explored }
    }

    /// Verifies 1-safety and wraps the net on success.
    pub fn into_safe(self, state_bound: usize) -> Result<SafeNet, NetError> {
        match self.check_safe(state_bound) {
            SafetyReport::Safe { .. } => Ok(SafeNet(Arc::new(self))),
            SafetyReport::Unsafe { witness } => Err(NetError::Unsafe {
                witness: witness
                    .iter()
                    .map(|&t| self.transition_name(t).to_string())
                    .collect(),
            }),
            SafetyReport::BoundExceeded => Err(NetError::SafetyBoundExceeded { bound: state_bound }),
        }
    }

    /// Declares the net safe without checking.
    pub fn assume_safe(self) -> SafeNet {
        SafeNet(Arc::new(self))
    }

    /// Deletes the given transitions and their arcs; places and the initial
    /// marking are unchanged. Remaining transitions keep their declaration
    /// order (and are renumbered densely).
    pub fn restrict(&self, removed: &BTreeSet<TransId>) -> Result<Net, NetError> {
        for &t in removed {
            if t.0 as usize >= self.transitions.len() {
                return Err(NetError::UnknownTransition(format!("#{}", t.0)));
            }
        }
        let transitions = self
            .transitions()
            .filter(|t| !removed.contains(t))
            .map(|t| {
                (
                    self.transition_name(t).to_string(),
                    self.pre(t).iter().map(|&p| self.place_name(p).to_string()).collect(),
                    self.post(t).iter().map(|&p| self.place_name(p).to_string()).collect(),
                )
            })
            .collect();
        Net::new(
            self.places.clone(),
            transitions,
            self.initial.iter().map(|p| self.place_name(p).to_string()).collect(),
        )
    }

    /// Parses a marking from place names.
    pub fn marking(&self, names: &[&str]) -> Result<Marking, NetError> {
        names.iter().map(|n| self.place(n)).collect()
    }

    pub fn marking_names(&self, m: &Marking) -> Vec<String> {
        m.iter().map(|p| self.place_name(p).to_string()).collect()
    }
}

/// A net whose 1-safety has been verified (or explicitly assumed).
///
/// Immutable and cheap to clone; every unfolding construction takes one.
#[derive(Debug, Clone)]
pub struct SafeNet(Arc<Net>);

impl SafeNet {
    pub fn net(&self) -> &Net {
        &self.0
    }

    pub fn share(&self) -> Arc<Net> {
        Arc::clone(&self.0)
    }

    /// Restriction never adds behaviour, so it preserves 1-safety.
    pub fn restrict_safe(&self, removed: &BTreeSet<TransId>) -> Result<SafeNet, NetError> {
        Ok(SafeNet(Arc::new(self.0.restrict(removed)?)))
    }
}

impl Deref for SafeNet {
    type Target = Net;

    fn deref(&self) -> &Net {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{fig2_goal, fig2_net, triv_net};

    #[test]
    fn validation_rejects_bad_nets() {
        let err = Net::build(&["p0"], &[("t", &[], &["p0"])], &["p0"]).unwrap_err();
        assert!(matches!(err, NetError::EmptyPreset(_)));
        let err = Net::build(&["p0", "p0"], &[], &["p0"]).unwrap_err();
        assert!(matches!(err, NetError::DuplicatePlace(_)));
        let err = Net::build(&["p0"], &[("t", &["q"], &[])], &["p0"]).unwrap_err();
        assert!(matches!(err, NetError::UnknownPlace(_)));
        let err = Net::build(
            &["p0"],
            &[("t", &["p0"], &[]), ("t", &["p0"], &[])],
            &["p0"],
        )
        .unwrap_err();
        assert!(matches!(err, NetError::DuplicateTransition(_)));
    }

    #[test]
    fn enabled_and_fire_on_triv() {
        let net = triv_net();
        let t = net.transition("t").unwrap();
        let m0 = net.initial_marking().clone();
        assert!(net.is_enabled(&m0, t));
        let m1 = net.fire(&m0, t).unwrap();
        assert_eq!(m1, net.marking(&["p1"]).unwrap());
        assert!(!net.is_enabled(&m1, t));
        assert!(matches!(net.fire(&m1, t), Err(NetError::NotEnabled { .. })));
    }

    #[test]
    fn enabled_and_fire_on_fig2() {
        let net = fig2_net();
        let a = net.transition("a").unwrap();
        let c = net.transition("c").unwrap();
        let m0 = net.initial_marking().clone();
        let p1p2 = net.marking(&["p1", "p2"]).unwrap();
        let p1p3 = net.marking(&["p1", "p3"]).unwrap();
        assert!(!net.is_enabled(&p1p3, c));
        assert!(net.is_enabled(&p1p2, c));
        assert_eq!(net.fire(&m0, a).unwrap(), p1p2);
        // p2 is a side condition of c: consumed and reproduced.
        assert_eq!(net.fire(&p1p2, c).unwrap(), net.marking(&["p4", "p2"]).unwrap());
    }

    #[test]
    fn check_safe_explores_exhaustively() {
        assert_eq!(triv_net().check_safe(100), SafetyReport::Safe { reachable: 2 });
        assert_eq!(fig2_net().check_safe(100), SafetyReport::Safe { reachable: 5 });
        assert_eq!(fig2_net().check_safe(3), SafetyReport::BoundExceeded);
    }

    #[test]
    fn check_safe_catches_double_token() {
        // t keeps p0 marked and refills p1; the second firing collides on p1.
        let net = Net::build(&["p0", "p1"], &[("t", &["p0"], &["p0", "p1"])], &["p0"]).unwrap();
        match net.check_safe(100) {
            SafetyReport::Unsafe { witness } => {
                let t = net.transition("t").unwrap();
                assert_eq!(witness, vec![t, t]);
            }
            other => panic!("expected Unsafe, got {other:?}"),
        }
    }

    #[test]
    fn goal_modes() {
        let net = fig2_net();
        let exact = Goal::new(&net, net.marking(&["p1"]).unwrap().iter(), GoalMode::Exact).unwrap();
        assert!(exact.holds(&net.marking(&["p1"]).unwrap()));
        assert!(!exact.holds(&net.marking(&["p1", "p3"]).unwrap()));
        let goal = fig2_goal(&net);
        assert!(goal.holds(&net.marking(&["p4", "p3"]).unwrap()));
        assert!(!goal.holds(&net.marking(&["p1", "p3"]).unwrap()));
        assert!(Goal::new(&net, [], GoalMode::Subset).is_err());
    }

    #[test]
    fn exact_goal_implies_subset_goal() {
        let net = fig2_net();
        for m in [
            net.marking(&["p1", "p2"]).unwrap(),
            net.marking(&["p4", "p3"]).unwrap(),
        ] {
            let exact = Goal::new(&net, m.iter(), GoalMode::Exact).unwrap();
            let subset = Goal::new(&net, m.iter(), GoalMode::Subset).unwrap();
            assert!(exact.holds(&m));
            assert!(subset.holds(&m));
        }
    }

    #[test]
    fn restrict_removes_transitions_and_arcs() {
        let net = fig2_net();
        let identity = net.restrict(&BTreeSet::new()).unwrap();
        assert_eq!(identity, net);
        let removed: BTreeSet<TransId> =
            [net.transition("a").unwrap(), net.transition("a'").unwrap()].into();
        let reduced = net.restrict(&removed).unwrap();
        assert_eq!(reduced.transition_count(), 3);
        assert!(reduced.transition("a").is_err());
        assert_eq!(reduced.place_count(), net.place_count());
        assert_eq!(reduced.initial_marking(), net.initial_marking());
        let b = reduced.transition("b").unwrap();
        assert_eq!(
            reduced.pre(b).iter().map(|&p| reduced.place_name(p)).collect::<Vec<_>>(),
            vec!["p2"]
        );
        assert!(net.restrict(&[TransId(99)].into()).is_err());
    }
}
