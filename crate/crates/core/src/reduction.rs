//! Goal-oriented model reduction: pluggable procedures that return transitions
//! occurring in no minimal firing sequence from a marking to the goal.
//!
//! Three implementations honour that contract: [`NullReducer`] (returns
//! nothing), [`FlowReducer`] (a static forward/backward flow analysis, subset
//! goals only) and [`ExactOracleReducer`] (the maximal sound answer, computed
//! by sequence enumeration at desk scale). [`useless_from`] is the
//! accumulating form used by the goal-driven constructions: it restricts the
//! net by the already-ignored set, reduces from the given marking and returns
//! the union with that set.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Mutex;

use thiserror::Error;

use crate::net::{Goal, GoalMode, Marking, Net, PlaceId, TransId};
use crate::oracle::{self, OracleError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("flow reduction requires a subset-mode goal")]
    ExactGoalUnsupported,
    #[error("oracle reduction exceeded its bound of {bound} steps")]
    BoundExceeded { bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducerKind {
    Null,
    Flow,
    ExactOracle,
}

/// A reduction procedure. Contract: every returned transition occurs in no
/// minimal firing sequence of `⟨P,T,F,m⟩` to the goal.
pub trait Reducer: Sync {
    fn useless_trs(
        &self,
        net: &Net,
        m: &Marking,
        goal: &Goal,
    ) -> Result<BTreeSet<TransId>, ReduceError>;

    fn kind(&self) -> ReducerKind;
}

/// The trivially sound instance: nothing is ever useless.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullReducer;

impl Reducer for NullReducer {
    fn useless_trs(
        &self,
        _net: &Net,
        _m: &Marking,
        _goal: &Goal,
    ) -> Result<BTreeSet<TransId>, ReduceError> {
        Ok(BTreeSet::new())
    }

    fn kind(&self) -> ReducerKind {
        ReducerKind::Null
    }
}

/// Static reduction for subset goals: keeps transitions that are forward
/// fireable from `m` (token-flow fixpoint) and backward connected to a goal
/// place in the flow graph; everything else cannot occur in a minimal
/// sequence. Refuses exact goals, where consuming-only transitions can matter.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlowReducer;

impl Reducer for FlowReducer {
    fn useless_trs(
        &self,
        net: &Net,
        m: &Marking,
        goal: &Goal,
    ) -> Result<BTreeSet<TransId>, ReduceError> {
        if goal.mode() != GoalMode::Subset {
            return Err(ReduceError::ExactGoalUnsupported);
        }

        // Forward over-approximation: places ever markable from m.
        let mut reach: BTreeSet<PlaceId> = m.iter().collect();
        let mut fireable: BTreeSet<TransId> = BTreeSet::new();
        loop {
            let mut changed = false;
            for t in net.transitions() {
                if !fireable.contains(&t) && net.pre(t).iter().all(|p| reach.contains(p)) {
                    fireable.insert(t);
                    for &p in net.post(t) {
                        reach.insert(p);
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // Backward slice: places from which a goal place is reachable in the
        // flow graph, and transitions producing into them.
        let mut back_places: BTreeSet<PlaceId> = goal.places().clone();
        let mut queue: VecDeque<PlaceId> = back_places.iter().copied().collect();
        let mut connected: BTreeSet<TransId> = BTreeSet::new();
        while let Some(p) = queue.pop_front() {
            for &t in net.producers_of(p) {
                if connected.insert(t) {
                    for &q in net.pre(t) {
                        if back_places.insert(q) {
                            queue.push_back(q);
                        }
                    }
                }
            }
        }

        Ok(net
            .transitions()
            .filter(|t| !(fireable.contains(t) && connected.contains(t)))
            .collect())
    }

    fn kind(&self) -> ReducerKind {
        ReducerKind::Flow
    }
}

/// The maximal sound reduction: complements the union of transitions over all
/// minimal sequences, enumerated by the oracle. Desk scale only.
#[derive(Debug, Clone, Copy)]
pub struct ExactOracleReducer {
    pub state_bound: usize,
}

impl Default for ExactOracleReducer {
    fn default() -> Self {
        ExactOracleReducer {
            state_bound: 1_000_000,
        }
    }
}

impl Reducer for ExactOracleReducer {
    fn useless_trs(
        &self,
        net: &Net,
        m: &Marking,
        goal: &Goal,
    ) -> Result<BTreeSet<TransId>, ReduceError> {
        let useful = oracle::useful_transitions(net, m, goal, self.state_bound).map_err(|e| {
            match e {
                OracleError::BoundExceeded { bound } => ReduceError::BoundExceeded { bound },
                other => unreachable!("reachable enumeration cannot fail with {other}"),
            }
        })?;
        Ok(net.transitions().filter(|t| !useful.contains(t)).collect())
    }

    fn kind(&self) -> ReducerKind {
        ReducerKind::ExactOracle
    }
}

/// `Ug(M, I)`: restricts the net by the already-ignored transitions, runs the
/// reducer from `m`, and returns the result united with `ignored`.
pub fn useless_from(
    reducer: &dyn Reducer,
    net: &Net,
    m: &Marking,
    ignored: &BTreeSet<TransId>,
    goal: &Goal,
) -> Result<BTreeSet<TransId>, ReduceError> {
    if reducer.kind() == ReducerKind::Null {
        return Ok(ignored.clone());
    }
    let restricted = net
        .restrict(ignored)
        .expect("ignored transitions come from the same net");
    let mut out = ignored.clone();
    for t in reducer.useless_trs(&restricted, m, goal)? {
        // Map the restricted net's ids back through the shared names.
        let original = net
            .transition(restricted.transition_name(t))
            .expect("restriction preserves names");
        out.insert(original);
    }
    Ok(out)
}

/// Memoizing wrapper around [`useless_from`] for one prefix build. A
/// reduction result is a function of `(marking, ignored)` alone, so the cache
/// is shared across fixpoint iterations; `calls` counts the underlying
/// reducer invocations (cache misses). The null reducer is short-circuited
/// and never counted.
pub struct UgCache<'r> {
    reducer: &'r dyn Reducer,
    state: Mutex<CacheState>,
}

#[derive(Default)]
struct CacheState {
    memo: HashMap<(Marking, BTreeSet<TransId>), BTreeSet<TransId>>,
    calls: usize,
}

impl<'r> UgCache<'r> {
    pub fn new(reducer: &'r dyn Reducer) -> Self {
        UgCache {
            reducer,
            state: Mutex::new(CacheState::default()),
        }
    }

    pub fn reducer(&self) -> &dyn Reducer {
        self.reducer
    }

    pub fn ug(
        &self,
        net: &Net,
        m: &Marking,
        ignored: &BTreeSet<TransId>,
        goal: &Goal,
    ) -> Result<BTreeSet<TransId>, ReduceError> {
        if self.reducer.kind() == ReducerKind::Null {
            return Ok(ignored.clone());
        }
        {
            let state = self.state.lock().unwrap();
            if let Some(hit) = state.memo.get(&(m.clone(), ignored.clone())) {
                return Ok(hit.clone());
            }
        }
        let result = useless_from(self.reducer, net, m, ignored, goal)?;
        let mut state = self.state.lock().unwrap();
        state.calls += 1;
        state
            .memo
            .insert((m.clone(), ignored.clone()), result.clone());
        Ok(result)
    }

    pub fn calls(&self) -> usize {
        self.state.lock().unwrap().calls
    }
}
