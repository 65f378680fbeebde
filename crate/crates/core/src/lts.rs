//! Deterministic labeled transition systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::label::Label;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtsError {
    #[error("state {0} out of range")]
    StateOutOfRange(StateId),
    #[error("nondeterministic transitions on `{label}` from state {state}")]
    Nondeterministic { state: StateId, label: Label },
    #[error("label `{0}` used on a transition but not in the alphabet")]
    LabelNotInAlphabet(Label),
}

/// A finite, deterministic LTS with dense state ids.
///
/// Transitions of each state are kept sorted by label. States listed in
/// `error_states` are the distinguished `ERROR` states: absorbing deadlocks
/// whose presence in a composite state makes the whole composite an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    name: String,
    state_names: Vec<String>,
    alphabet: BTreeSet<Label>,
    transitions: Vec<Vec<(Label, StateId)>>,
    initial: StateId,
    error_states: BTreeSet<StateId>,
}

impl Lts {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn alphabet(&self) -> &BTreeSet<Label> {
        &self.alphabet
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn transitions(&self, s: StateId) -> &[(Label, StateId)] {
        &self.transitions[s]
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    pub fn is_error(&self, s: StateId) -> bool {
        self.error_states.contains(&s)
    }

    pub fn error_states(&self) -> &BTreeSet<StateId> {
        &self.error_states
    }

    pub fn successor(&self, s: StateId, label: &Label) -> Option<StateId> {
        self.transitions[s]
            .binary_search_by(|(l, _)| l.cmp(label))
            .ok()
            .map(|i| self.transitions[s][i].1)
    }

    /// All `(source, label, target)` triples in source then label order.
    pub fn iter_transitions(&self) -> impl Iterator<Item = (StateId, &Label, StateId)> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |(l, t)| (s, l, *t)))
    }

    /// True iff a run from the initial state consumes the whole trace.
    pub fn accepts_trace(&self, trace: &[Label]) -> bool {
        let mut s = self.initial;
        for l in trace {
            match self.successor(s, l) {
                Some(t) => s = t,
                None => return false,
            }
        }
        true
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape(&self.name));
        let _ = writeln!(out, "  rankdir=LR;");
        for s in 0..self.num_states() {
            let shape = if self.is_error(s) { "box" } else { "circle" };
            let _ = writeln!(
                out,
                "  {s} [label=\"{}\", shape={shape}{}];",
                escape(&self.state_names[s]),
                if s == self.initial {
                    ", style=bold"
                } else {
                    ""
                }
            );
        }
        for (s, l, t) in self.iter_transitions() {
            let _ = writeln!(out, "  {s} -> {t} [label=\"{l}\"];");
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Incremental constructor for [`Lts`]; validates determinism and closure.
#[derive(Debug, Clone, Default)]
pub struct LtsBuilder {
    name: String,
    state_names: Vec<String>,
    alphabet: BTreeSet<Label>,
    transitions: Vec<BTreeMap<Label, StateId>>,
    initial: StateId,
    error_states: BTreeSet<StateId>,
    pending_error: Option<LtsError>,
}

impl LtsBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.state_names.push(name.into());
        self.transitions.push(BTreeMap::new());
        self.transitions.len() - 1
    }

    /// Adds `n` states named by their ids.
    pub fn with_states(mut self, n: usize) -> Self {
        for _ in 0..n {
            let id = self.transitions.len();
            self.add_state(format!("{id}"));
        }
        self
    }

    pub fn add_error_state(&mut self, name: impl Into<String>) -> StateId {
        let s = self.add_state(name);
        self.error_states.insert(s);
        s
    }

    pub fn mark_error(&mut self, s: StateId) {
        self.error_states.insert(s);
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = s;
    }

    pub fn extend_alphabet(&mut self, labels: impl IntoIterator<Item = Label>) {
        self.alphabet.extend(labels);
    }

    /// Adds a transition and its label to the alphabet. Duplicate identical
    /// transitions are merged; conflicting ones are reported by [`build`](Self::build).
    pub fn add_transition(&mut self, from: StateId, label: Label, to: StateId) {
        if from >= self.transitions.len() || to >= self.transitions.len() {
            self.pending_error
                .get_or_insert(LtsError::StateOutOfRange(from.max(to)));
            return;
        }
        self.alphabet.insert(label.clone());
        match self.transitions[from].get(&label) {
            Some(&prev) if prev != to => {
                self.pending_error
                    .get_or_insert(LtsError::Nondeterministic { state: from, label });
            }
            _ => {
                self.transitions[from].insert(label, to);
            }
        }
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn build(self) -> Result<Lts, LtsError> {
        if let Some(e) = self.pending_error {
            return Err(e);
        }
        if self.transitions.is_empty() || self.initial >= self.transitions.len() {
            return Err(LtsError::StateOutOfRange(self.initial));
        }
        if let Some(&e) = self
            .error_states
            .iter()
            .find(|&&e| e >= self.transitions.len())
        {
            return Err(LtsError::StateOutOfRange(e));
        }
        let transitions = self
            .transitions
            .into_iter()
            .map(|m| m.into_iter().collect::<Vec<_>>())
            .collect::<Vec<_>>();
        for ts in &transitions {
            if let Some((l, _)) = ts.iter().find(|(l, _)| !self.alphabet.contains(l)) {
                return Err(LtsError::LabelNotInAlphabet(l.clone()));
            }
        }
        Ok(Lts {
            name: self.name,
            state_names: self.state_names,
            alphabet: self.alphabet,
            transitions,
            initial: self.initial,
            error_states: self.error_states,
        })
    }
}

/// Shorthand used in tests and examples: builds an LTS from `(from, label, to)`
/// triples over states `0..n` with initial state 0.
pub fn lts_from_triples(
    name: &str,
    n: usize,
    triples: &[(StateId, &str, StateId)],
) -> Result<Lts, LtsError> {
    let mut b = LtsBuilder::new(name).with_states(n);
    for &(f, l, t) in triples {
        let label = l.parse::<Label>().unwrap_or_else(|_| Label::simple(l));
        b.add_transition(f, label, t);
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> Label {
        s.parse().unwrap()
    }

    fn e_one() -> Lts {
        lts_from_triples(
            "E_I",
            4,
            &[(0, "a", 1), (0, "b", 2), (1, "b", 1), (2, "d", 3)],
        )
        .unwrap()
    }

    #[test]
    fn traces_of_e_one() {
        let e = e_one();
        assert!(e.accepts_trace(&[l("b"), l("d")]));
        assert!(e.accepts_trace(&[]));
        assert!(!e.accepts_trace(&[l("d")]));
        assert!(e.accepts_trace(&[l("a"), l("b"), l("b")]));
    }

    #[test]
    fn rejects_nondeterminism() {
        let err = lts_from_triples("X", 3, &[(0, "a", 1), (0, "a", 2)]).unwrap_err();
        assert!(matches!(err, LtsError::Nondeterministic { state: 0, .. }));
        // identical duplicates are fine
        assert!(lts_from_triples("X", 2, &[(0, "a", 1), (0, "a", 1)]).is_ok());
    }

    #[test]
    fn rejects_dangling_target() {
        assert!(lts_from_triples("X", 1, &[(0, "a", 3)]).is_err());
    }

    #[test]
    fn transitions_sorted_by_label() {
        let e = lts_from_triples("X", 2, &[(0, "z", 1), (0, "a", 1), (0, "m", 0)]).unwrap();
        let labels: Vec<_> = e
            .transitions(0)
            .iter()
            .map(|(l, _)| l.to_string())
            .collect();
        assert_eq!(labels, ["a", "m", "z"]);
    }
}
