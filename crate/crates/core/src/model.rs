//! Parallel composition evaluated on demand, and control problems over it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::label::{Label, LabelId, LabelSet};
use crate::lts::Lts;

/// One state per component; the state of the (never materialized) product.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositeState(Box<[u32]>);

impl CompositeState {
    pub fn new(states: Vec<u32>) -> Self {
        Self(states.into_boxed_slice())
    }

    pub fn states(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, component: usize) -> usize {
        self.0[component] as usize
    }
}

impl fmt::Display for CompositeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateClass {
    Controllable,
    Uncontrollable,
    Mixed,
    Deadlock,
}

impl StateClass {
    /// Mixed states are resolved by the environment, like uncontrollable ones.
    pub fn is_uncontrollable_like(self) -> bool {
        matches!(self, StateClass::Uncontrollable | StateClass::Mixed)
    }
}

#[derive(Debug, Clone)]
struct Component {
    transitions: Vec<Vec<(LabelId, u32)>>,
    error: Vec<bool>,
}

impl Component {
    #[inline]
    fn successor(&self, s: u32, l: LabelId) -> Option<u32> {
        let ts = &self.transitions[s as usize];
        ts.binary_search_by(|(x, _)| x.cmp(&l))
            .ok()
            .map(|i| ts[i].1)
    }
}

/// A list of components compiled against their shared alphabet.
#[derive(Debug, Clone)]
pub struct Model {
    components: Vec<Lts>,
    labels: Vec<Label>,
    label_ids: HashMap<Label, LabelId>,
    compiled: Vec<Component>,
    participants: Vec<Vec<usize>>,
}

impl Model {
    pub fn new(components: Vec<Lts>) -> Self {
        let alphabet: BTreeSet<Label> = components
            .iter()
            .flat_map(|c| c.alphabet().iter().cloned())
            .collect();
        let labels: Vec<Label> = alphabet.into_iter().collect();
        let label_ids: HashMap<Label, LabelId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), LabelId(i as u32)))
            .collect();
        let mut participants = vec![Vec::new(); labels.len()];
        let mut compiled = Vec::with_capacity(components.len());
        for (ci, c) in components.iter().enumerate() {
            for l in c.alphabet() {
                participants[label_ids[l].index()].push(ci);
            }
            let transitions = (0..c.num_states())
                .map(|s| {
                    c.transitions(s)
                        .iter()
                        .map(|(l, t)| (label_ids[l], *t as u32))
                        .collect()
                })
                .collect();
            let error = (0..c.num_states()).map(|s| c.is_error(s)).collect();
            compiled.push(Component { transitions, error });
        }
        Self {
            components,
            labels,
            label_ids,
            compiled,
            participants,
        }
    }

    pub fn components(&self) -> &[Lts] {
        &self.components
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, id: LabelId) -> &Label {
        &self.labels[id.index()]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_id(&self, label: &Label) -> Option<LabelId> {
        self.label_ids.get(label).copied()
    }

    /// Components whose alphabet contains the label, in component order.
    pub fn participants(&self, id: LabelId) -> &[usize] {
        &self.participants[id.index()]
    }

    pub fn initial_state(&self) -> CompositeState {
        CompositeState::new(self.components.iter().map(|c| c.initial() as u32).collect())
    }

    pub fn is_valid(&self, cs: &CompositeState) -> bool {
        cs.len() == self.components.len()
            && cs
                .states()
                .iter()
                .zip(&self.components)
                .all(|(&s, c)| (s as usize) < c.num_states())
    }

    /// True if some component sits in its `ERROR` state.
    pub fn is_error(&self, cs: &CompositeState) -> bool {
        cs.states()
            .iter()
            .zip(&self.compiled)
            .any(|(&s, c)| c.error[s as usize])
    }

    #[inline]
    pub(crate) fn local_transitions(&self, component: usize, state: u32) -> &[(LabelId, u32)] {
        &self.compiled[component].transitions[state as usize]
    }

    #[inline]
    pub(crate) fn local_is_error(&self, component: usize, state: u32) -> bool {
        self.compiled[component].error[state as usize]
    }

    pub(crate) fn local_successor(&self, component: usize, state: u32, l: LabelId) -> Option<u32> {
        self.compiled[component].successor(state, l)
    }

    /// Labels enabled at `cs` together with their successors, in label order.
    ///
    /// A label is enabled iff every component whose alphabet contains it can
    /// take it at its current state; only those components move. A composite
    /// state containing an `ERROR` component state enables nothing.
    pub fn enabled(&self, cs: &CompositeState) -> Vec<(LabelId, CompositeState)> {
        let mut out = Vec::new();
        if self.is_error(cs) {
            return out;
        }
        let states = cs.states();
        for (ci, comp) in self.compiled.iter().enumerate() {
            'labels: for &(l, t) in &comp.transitions[states[ci] as usize] {
                let parts = &self.participants[l.index()];
                if parts[0] != ci {
                    continue;
                }
                let mut next = states.to_vec();
                next[ci] = t;
                for &p in &parts[1..] {
                    match self.compiled[p].successor(states[p], l) {
                        Some(tp) => next[p] = tp,
                        None => continue 'labels,
                    }
                }
                out.push((l, CompositeState::new(next)));
            }
        }
        out.sort_by_key(|(l, _)| *l);
        out
    }

    /// Parses `s0,s1,...` where each entry is a state id or a state name of
    /// the corresponding component.
    pub fn parse_composite(&self, text: &str) -> Option<CompositeState> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != self.components.len() {
            return None;
        }
        let mut states = Vec::with_capacity(parts.len());
        for (p, c) in parts.iter().zip(&self.components) {
            let id = match p.parse::<usize>() {
                Ok(id) if id < c.num_states() => id,
                _ => (0..c.num_states()).find(|&s| c.state_name(s) == *p)?,
            };
            states.push(id as u32);
        }
        Some(CompositeState::new(states))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error("a control problem needs at least one component")]
    NoComponents,
    #[error("the reach set must not be empty")]
    EmptyReach,
    #[error("label `{0}` is not in the alphabet of any component")]
    UnknownLabel(Label),
    #[error("label `{0}` is both a reach and an avoid label")]
    ReachAvoidOverlap(Label),
}

/// Components plus the controllable, reach (co-safety) and avoid (safety)
/// label sets.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    model: Model,
    controllable: LabelSet,
    reach: LabelSet,
    avoid: LabelSet,
}

impl ControlProblem {
    pub fn new(
        components: Vec<Lts>,
        controllable: &BTreeSet<Label>,
        reach: &BTreeSet<Label>,
        avoid: &BTreeSet<Label>,
    ) -> Result<Self, ProblemError> {
        if components.is_empty() {
            return Err(ProblemError::NoComponents);
        }
        if reach.is_empty() {
            return Err(ProblemError::EmptyReach);
        }
        if let Some(l) = reach.intersection(avoid).next() {
            return Err(ProblemError::ReachAvoidOverlap(l.clone()));
        }
        let model = Model::new(components);
        let to_set = |labels: &BTreeSet<Label>| -> Result<LabelSet, ProblemError> {
            let mut set = LabelSet::empty(model.num_labels());
            for l in labels {
                let id = model
                    .label_id(l)
                    .ok_or_else(|| ProblemError::UnknownLabel(l.clone()))?;
                set.insert(id);
            }
            Ok(set)
        };
        let controllable = to_set(controllable)?;
        let reach = to_set(reach)?;
        let avoid = to_set(avoid)?;
        Ok(Self {
            model,
            controllable,
            reach,
            avoid,
        })
    }

    /// Same components with a different controllable set.
    pub fn with_controllable(&self, controllable: LabelSet) -> Self {
        Self {
            controllable,
            ..self.clone()
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn controllable(&self) -> &LabelSet {
        &self.controllable
    }

    pub fn reach(&self) -> &LabelSet {
        &self.reach
    }

    pub fn avoid(&self) -> &LabelSet {
        &self.avoid
    }

    #[inline]
    pub fn is_controllable(&self, l: LabelId) -> bool {
        self.controllable.contains(l)
    }

    #[inline]
    pub fn is_reach(&self, l: LabelId) -> bool {
        self.reach.contains(l)
    }

    /// A step violates safety if its label is an avoid label or it enters
    /// a composite state containing an `ERROR` component state.
    #[inline]
    pub fn is_violation(&self, l: LabelId, target: &CompositeState) -> bool {
        self.avoid.contains(l) || self.model.is_error(target)
    }

    /// A non-violating step on a reach label discharges the co-safety goal.
    #[inline]
    pub fn is_discharge(&self, l: LabelId, target: &CompositeState) -> bool {
        self.reach.contains(l) && !self.is_violation(l, target)
    }

    pub fn initial_state(&self) -> CompositeState {
        self.model.initial_state()
    }

    pub fn enabled(&self, cs: &CompositeState) -> Vec<(LabelId, CompositeState)> {
        self.model.enabled(cs)
    }

    pub fn classify(&self, cs: &CompositeState) -> StateClass {
        classify_enabled(self, &self.model.enabled(cs))
    }
}

pub(crate) fn classify_enabled(
    problem: &ControlProblem,
    enabled: &[(LabelId, CompositeState)],
) -> StateClass {
    let controllable = enabled
        .iter()
        .filter(|(l, _)| problem.is_controllable(*l))
        .count();
    match (controllable, enabled.len() - controllable) {
        (0, 0) => StateClass::Deadlock,
        (_, 0) => StateClass::Controllable,
        (0, _) => StateClass::Uncontrollable,
        _ => StateClass::Mixed,
    }
}
