//! Shared fixtures for unit tests.

use crate::net::{Goal, GoalMode, Net};

/// Two places joined by a single transition.
pub(crate) fn triv_net() -> Net {
    Net::build(&["p0", "p1"], &[("t", &["p0"], &["p1"])], &["p0"]).unwrap()
}

/// Five-place net with two branches into a shared `b`/`b'` cycle and a
/// side-conditioned `c`. Reachable markings: {p0}, {p1,p2}, {p1,p3},
/// {p4,p2}, {p4,p3}.
pub(crate) fn fig2_net() -> Net {
    Net::build(
        &["p0", "p1", "p2", "p3", "p4"],
        &[
            ("a", &["p0"], &["p1", "p2"]),
            ("a'", &["p0"], &["p1", "p3"]),
            ("b", &["p2"], &["p3"]),
            ("b'", &["p3"], &["p2"]),
            ("c", &["p1", "p2"], &["p4", "p2"]),
        ],
        &["p0"],
    )
    .unwrap()
}

pub(crate) fn fig2_goal(net: &Net) -> Goal {
    Goal::new(
        net,
        [net.place("p3").unwrap(), net.place("p4").unwrap()],
        GoalMode::Subset,
    )
    .unwrap()
}
