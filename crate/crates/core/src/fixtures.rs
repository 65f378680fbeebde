//! Small models shared by unit tests.

use std::collections::BTreeSet;

use crate::label::Label;
use crate::lts::{lts_from_triples, Lts};
use crate::model::ControlProblem;

pub fn e_one() -> Lts {
    lts_from_triples(
        "E_I",
        4,
        &[(0, "a", 1), (0, "b", 2), (1, "b", 1), (2, "d", 3)],
    )
    .unwrap()
}

pub fn e_two() -> Lts {
    lts_from_triples(
        "E_II",
        3,
        &[(0, "a", 1), (0, "c", 2), (0, "d", 0), (2, "d", 1)],
    )
    .unwrap()
}

pub fn set(labels: &[&str]) -> BTreeSet<Label> {
    labels.iter().map(|l| l.parse().unwrap()).collect()
}

/// `E_I || E_II` with everything controllable and reach `{d}`.
pub fn worked_example() -> ControlProblem {
    ControlProblem::new(
        vec![e_one(), e_two()],
        &set(&["a", "b", "c", "d"]),
        &set(&["d"]),
        &BTreeSet::new(),
    )
    .unwrap()
}
