//! Brute-force reference semantics: replay, reachability, cycling detection,
//! minimal firing sequences, minimal configurations and useful transitions.
//!
//! Everything here is ground truth for the property suites, so the code
//! favours obviousness over speed. Sequences are enumerated by depth-first
//! search pruned at repeated markings (a minimal sequence never revisits a
//! marking, so nothing is lost), then filtered by the permutation-based
//! minimality check.
//!
//! The permutation check exploits that in a 1-safe run the marking after
//! firing a multiset of occurrences is independent of the order, so feasible
//! permutations of a sequence correspond to paths through the lattice of
//! feasible prefix multisets. That keeps the "all permutations" quantifier
//! tractable for the desk-scale sequences the test nets produce.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::net::{Goal, GoalMode, Marking, Net, TransId};
use crate::occurrence::Prefix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("sequence is not fireable at position {at}")]
    Infeasible { at: usize },
    #[error("sequence does not reach the goal")]
    GoalNotReached,
    #[error("enumeration exceeded the bound of {bound} steps")]
    BoundExceeded { bound: usize },
}

/// Minimality verdict for one goal-reaching sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceVerdict {
    pub sequence: Vec<TransId>,
    pub minimal: bool,
    /// A feasible permutation witnessing non-minimality: it either visits a
    /// marking twice or (subset goals) marks the goal strictly before its end.
    pub witness: Option<Vec<TransId>>,
}

/// Markings visited by `seq` from `from`, including the start marking.
pub fn replay(net: &Net, from: &Marking, seq: &[TransId]) -> Result<Vec<Marking>, OracleError> {
    let mut markings = vec![from.clone()];
    for (at, &t) in seq.iter().enumerate() {
        let next = net
            .fire(markings.last().unwrap(), t)
            .map_err(|_| OracleError::Infeasible { at })?;
        markings.push(next);
    }
    Ok(markings)
}

/// Breadth-first reachability set from `from`, in visit order.
pub fn reachable_markings(
    net: &Net,
    from: &Marking,
    bound: usize,
) -> Result<Vec<Marking>, OracleError> {
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(from.clone());
    order.push(from.clone());
    queue.push_back(from.clone());
    while let Some(m) = queue.pop_front() {
        for t in net.enabled_transitions(&m) {
            let next = net.fire(&m, t).expect("enabled");
            if seen.insert(next.clone()) {
                if seen.len() > bound {
                    return Err(OracleError::BoundExceeded { bound });
                }
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

/// True iff the sequence, fired from the initial marking, visits the same
/// marking twice.
pub fn is_cycling(net: &Net, seq: &[TransId]) -> Result<bool, OracleError> {
    is_cycling_from(net, net.initial_marking(), seq)
}

pub fn is_cycling_from(net: &Net, from: &Marking, seq: &[TransId]) -> Result<bool, OracleError> {
    let markings = replay(net, from, seq)?;
    let mut seen = HashSet::new();
    Ok(!markings.into_iter().all(|m| seen.insert(m)))
}

/// Decides minimality of a goal-reaching sequence fired from the initial
/// marking. See [`is_minimal_from`].
pub fn is_minimal(net: &Net, seq: &[TransId], goal: &Goal) -> Result<SequenceVerdict, OracleError> {
    is_minimal_from(net, net.initial_marking(), seq, goal)
}

/// Decides minimality from an arbitrary start marking: no feasible permutation
/// of the sequence may be cycling, and for subset goals no feasible
/// permutation may mark the goal strictly before its end.
pub fn is_minimal_from(
    net: &Net,
    from: &Marking,
    seq: &[TransId],
    goal: &Goal,
) -> Result<SequenceVerdict, OracleError> {
    let markings = replay(net, from, seq)?;
    if !goal.holds(markings.last().unwrap()) {
        return Err(OracleError::GoalNotReached);
    }
    let witness = permutation_witness(net, from, seq, goal);
    Ok(SequenceVerdict {
        sequence: seq.to_vec(),
        minimal: witness.is_none(),
        witness,
    })
}

/// Occurrence-count vector of a sequence, indexed by transition.
fn parikh(net: &Net, seq: &[TransId]) -> Vec<u32> {
    let mut v = vec![0u32; net.transition_count()];
    for &t in seq {
        v[t.0 as usize] += 1;
    }
    v
}

/// Lattice of feasible prefix multisets of a fixed occurrence multiset.
/// Since the net is safe, each feasible multiset determines its marking.
struct PrefixLattice {
    total: Vec<u32>,
    states: HashMap<Vec<u32>, Marking>,
    /// Predecessor pointers for witness reconstruction: state -> (pred, t).
    pred: HashMap<Vec<u32>, (Vec<u32>, TransId)>,
    completable: HashMap<Vec<u32>, bool>,
}

impl PrefixLattice {
    fn build(net: &Net, from: &Marking, seq: &[TransId]) -> PrefixLattice {
        let total = parikh(net, seq);
        let mut lat = PrefixLattice {
            total,
            states: HashMap::new(),
            pred: HashMap::new(),
            completable: HashMap::new(),
        };
        let zero = vec![0u32; net.transition_count()];
        lat.states.insert(zero.clone(), from.clone());
        let mut stack = vec![zero];
        while let Some(state) = stack.pop() {
            let marking = lat.states[&state].clone();
            for t in net.transitions() {
                let ti = t.0 as usize;
                if state[ti] < lat.total[ti] && net.is_enabled(&marking, t) {
                    let mut next = state.clone();
                    next[ti] += 1;
                    if !lat.states.contains_key(&next) {
                        let m2 = net.fire(&marking, t).expect("enabled");
                        lat.states.insert(next.clone(), m2);
                        lat.pred.insert(next.clone(), (state.clone(), t));
                        stack.push(next);
                    }
                }
            }
        }
        lat
    }

    fn is_total(&self, state: &[u32]) -> bool {
        state == self.total.as_slice()
    }

    /// Can the state be extended to the full multiset through feasible states?
    fn completable(&mut self, net: &Net, state: &Vec<u32>) -> bool {
        if let Some(&c) = self.completable.get(state) {
            return c;
        }
        let result = if self.is_total(state) {
            true
        } else {
            let marking = self.states[state].clone();
            let mut ok = false;
            for t in net.transitions() {
                let ti = t.0 as usize;
                if state[ti] < self.total[ti] && net.is_enabled(&marking, t) {
                    let mut next = state.clone();
                    next[ti] += 1;
                    if self.completable(net, &next) {
                        ok = true;
                        break;
                    }
                }
            }
            ok
        };
        self.completable.insert(state.clone(), result);
        result
    }

    /// A concrete firing order from the empty prefix to `state`.
    fn path_to(&self, state: &[u32]) -> Vec<TransId> {
        let mut out = Vec::new();
        let mut cur = state.to_vec();
        while let Some((prev, t)) = self.pred.get(&cur) {
            out.push(*t);
            cur = prev.clone();
        }
        out.reverse();
        out
    }

    /// A feasible order of `to ∖ from` starting at `from`, staying below `to`.
    fn path_between(&self, net: &Net, from: &[u32], to: &[u32]) -> Option<Vec<TransId>> {
        if from == to {
            return Some(Vec::new());
        }
        let marking = self.states.get(from)?.clone();
        for t in net.transitions() {
            let ti = t.0 as usize;
            if from[ti] < to[ti] && net.is_enabled(&marking, t) {
                let mut next = from.to_vec();
                next[ti] += 1;
                if self.states.contains_key(&next) {
                    if let Some(mut rest) = self.path_between(net, &next, to) {
                        let mut path = vec![t];
                        path.append(&mut rest);
                        return Some(path);
                    }
                }
            }
        }
        None
    }
}

/// Searches for a feasible permutation of `seq` that disqualifies it from
/// being minimal; returns that permutation if one exists.
fn permutation_witness(
    net: &Net,
    from: &Marking,
    seq: &[TransId],
    goal: &Goal,
) -> Option<Vec<TransId>> {
    let mut lat = PrefixLattice::build(net, from, seq);
    let states: Vec<Vec<u32>> = lat.states.keys().cloned().collect();

    // Cycling permutation: two nested prefix multisets with equal markings,
    // connected through feasible states and completable to the full multiset.
    let mut by_marking: BTreeMap<Marking, Vec<&Vec<u32>>> = BTreeMap::new();
    for s in &states {
        by_marking.entry(lat.states[s].clone()).or_default().push(s);
    }
    for group in by_marking.values() {
        for &a in group {
            for &b in group {
                if a != b
                    && a.iter().zip(b).all(|(x, y)| x <= y)
                    && lat.completable(net, b)
                {
                    if let Some(mid) = lat.path_between(net, a, b) {
                        let mut witness = lat.path_to(a);
                        witness.extend(mid);
                        witness.extend(lat.path_between(net, b, &lat.total.clone())?);
                        return Some(witness);
                    }
                }
            }
        }
    }

    // Subset goals additionally forbid marking the goal strictly early.
    if goal.mode() == GoalMode::Subset {
        for s in &states {
            if !lat.is_total(s) && goal.holds(&lat.states[s]) && lat.completable(net, s) {
                let mut witness = lat.path_to(s);
                witness.extend(lat.path_between(net, s, &lat.total.clone())?);
                return Some(witness);
            }
        }
    }
    None
}

/// All minimal firing sequences from `m` to the goal.
///
/// The search walks firing sequences depth-first, pruning any branch that
/// revisits a marking along its own run and stopping at goal-satisfying
/// markings; survivors are filtered through [`is_minimal_from`]. `bound`
/// limits the number of search steps.
pub fn minimal_sequences(
    net: &Net,
    m: &Marking,
    goal: &Goal,
    bound: usize,
) -> Result<BTreeSet<Vec<TransId>>, OracleError> {
    let mut candidates = BTreeSet::new();
    let mut budget = bound;
    let mut path = Vec::new();
    let mut visited = vec![m.clone()];
    collect_candidates(net, goal, &mut path, &mut visited, &mut candidates, &mut budget)?;
    let mut out = BTreeSet::new();
    for seq in candidates {
        if is_minimal_from(net, m, &seq, goal)?.minimal {
            out.insert(seq);
        }
    }
    Ok(out)
}

fn collect_candidates(
    net: &Net,
    goal: &Goal,
    path: &mut Vec<TransId>,
    visited: &mut Vec<Marking>,
    out: &mut BTreeSet<Vec<TransId>>,
    budget: &mut usize,
) -> Result<(), OracleError> {
    if *budget == 0 {
        return Err(OracleError::BoundExceeded { bound: 0 });
    }
    *budget -= 1;
    let current = visited.last().unwrap().clone();
    if goal.holds(&current) {
        // No extension of a goal-satisfying run can be minimal: it either
        // revisits the goal marking (exact) or marks the goal early (subset).
        out.insert(path.clone());
        return Ok(());
    }
    for t in net.enabled_transitions(&current) {
        let next = net.fire(&current, t).expect("enabled");
        if visited.contains(&next) {
            continue;
        }
        path.push(t);
        visited.push(next);
        let r = collect_candidates(net, goal, path, visited, out, budget);
        visited.pop();
        path.pop();
        r?;
    }
    Ok(())
}

/// Union of the transitions occurring in some minimal sequence from `m`.
pub fn useful_transitions(
    net: &Net,
    m: &Marking,
    goal: &Goal,
    bound: usize,
) -> Result<BTreeSet<TransId>, OracleError> {
    Ok(minimal_sequences(net, m, goal, bound)?
        .into_iter()
        .flatten()
        .collect())
}

/// One equivalence class of minimal sequences inducing the same configuration
/// of the unfolding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalClass {
    /// All minimal sequences of the class, sorted.
    pub sequences: BTreeSet<Vec<TransId>>,
}

impl MinimalClass {
    /// Lexicographically least member, used as the canonical representative.
    pub fn representative(&self) -> &Vec<TransId> {
        self.sequences.iter().next().expect("classes are non-empty")
    }
}

/// Minimal sequences from the initial marking, grouped into configuration
/// classes, sorted by representative.
pub fn minimal_configurations(
    net: &Net,
    goal: &Goal,
    bound: usize,
) -> Result<Vec<MinimalClass>, OracleError> {
    let sequences = minimal_sequences(net, net.initial_marking(), goal, bound)?;
    let shared = Arc::new(net.clone());
    let mut builder = Prefix::new(shared);
    let mut groups: BTreeMap<Vec<u32>, MinimalClass> = BTreeMap::new();
    for seq in sequences {
        let conf = builder
            .seq_to_configuration(&seq)
            .expect("minimal sequences replay");
        let key: Vec<u32> = conf.events().iter().map(|e| e.0).collect();
        groups
            .entry(key)
            .or_insert_with(|| MinimalClass {
                sequences: BTreeSet::new(),
            })
            .sequences
            .insert(seq);
    }
    let mut classes: Vec<MinimalClass> = groups.into_values().collect();
    classes.sort_by(|a, b| a.representative().cmp(b.representative()));
    Ok(classes)
}
