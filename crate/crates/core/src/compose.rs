//! Explicit reachable product, built by breadth-first search.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::label::LabelId;
use crate::lts::{Lts, LtsBuilder};
use crate::model::{CompositeState, Model};

pub const DEFAULT_STATE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("state-space too large: more than {cap} reachable states")]
pub struct CapExceeded {
    pub cap: usize,
}

/// The reachable part of the product, states numbered in BFS discovery order
/// from the initial composite state.
#[derive(Debug, Clone)]
pub struct ExplicitProduct {
    pub states: Vec<CompositeState>,
    pub successors: Vec<Vec<(LabelId, usize)>>,
    index: HashMap<CompositeState, usize>,
}

impl ExplicitProduct {
    pub fn build(model: &Model, cap: usize) -> Result<Self, CapExceeded> {
        Self::build_from(model, model.initial_state(), cap)
    }

    pub fn build_from(
        model: &Model,
        root: CompositeState,
        cap: usize,
    ) -> Result<Self, CapExceeded> {
        let mut states = vec![root.clone()];
        let mut index = HashMap::from([(root, 0usize)]);
        let mut successors = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let mut succ = Vec::new();
            for (l, next) in model.enabled(&states[i]) {
                let j = match index.get(&next) {
                    Some(&j) => j,
                    None => {
                        if states.len() >= cap {
                            return Err(CapExceeded { cap });
                        }
                        let j = states.len();
                        index.insert(next.clone(), j);
                        states.push(next);
                        queue.push_back(j);
                        j
                    }
                };
                succ.push((l, j));
            }
            debug_assert_eq!(successors.len(), i);
            successors.push(succ);
        }
        Ok(Self {
            states,
            successors,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, cs: &CompositeState) -> Option<usize> {
        self.index.get(cs).copied()
    }

    pub fn num_transitions(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn to_lts(&self, model: &Model) -> Lts {
        let mut b = LtsBuilder::new(
            model
                .components()
                .iter()
                .map(|c| c.name())
                .collect::<Vec<_>>()
                .join("||"),
        );
        b.extend_alphabet(model.labels().iter().cloned());
        for cs in &self.states {
            let name = cs
                .states()
                .iter()
                .zip(model.components())
                .map(|(&s, c)| c.state_name(s as usize))
                .collect::<Vec<_>>()
                .join(",");
            let s = b.add_state(format!("<{name}>"));
            if model.is_error(cs) {
                b.mark_error(s);
            }
        }
        for (s, succ) in self.successors.iter().enumerate() {
            for &(l, t) in succ {
                b.add_transition(s, model.label(l).clone(), t);
            }
        }
        b.build()
            .expect("product of deterministic components is deterministic")
    }
}

/// Explicit reachable product of all components as a single LTS.
pub fn compose_full(model: &Model, cap: usize) -> Result<Lts, CapExceeded> {
    Ok(ExplicitProduct::build(model, cap)?.to_lts(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label;
    use crate::lts::lts_from_triples;

    fn e_one() -> Lts {
        lts_from_triples(
            "E_I",
            4,
            &[(0, "a", 1), (0, "b", 2), (1, "b", 1), (2, "d", 3)],
        )
        .unwrap()
    }

    fn e_two() -> Lts {
        lts_from_triples(
            "E_II",
            3,
            &[(0, "a", 1), (0, "c", 2), (0, "d", 0), (2, "d", 1)],
        )
        .unwrap()
    }

    #[test]
    fn product_of_worked_example() {
        let model = Model::new(vec![e_one(), e_two()]);
        let lts = compose_full(&model, DEFAULT_STATE_CAP).unwrap();
        let init: Vec<String> = lts
            .transitions(0)
            .iter()
            .map(|(l, _)| l.to_string())
            .collect();
        assert_eq!(init, ["a", "b", "c"]);
        // <s2,t0> -d-> <s3,t0> exists: t0 carries a d self-loop
        assert_eq!(lts.num_states(), 8);
        assert!(lts.accepts_trace(&[Label::simple("b"), Label::simple("c"), Label::simple("d")]));
        assert!(lts.accepts_trace(&[Label::simple("b"), Label::simple("d")]));
        assert!(!lts.accepts_trace(&[Label::simple("a"), Label::simple("d")]));
    }

    #[test]
    fn single_component_is_isomorphic() {
        let model = Model::new(vec![e_one()]);
        let lts = compose_full(&model, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(lts.num_states(), 4);
        assert_eq!(lts.num_transitions(), 4);
        assert_eq!(lts.alphabet(), e_one().alphabet());
    }

    #[test]
    fn cap_is_enforced() {
        let model = Model::new(vec![e_one(), e_two()]);
        assert_eq!(compose_full(&model, 3).unwrap_err(), CapExceeded { cap: 3 });
    }
}
