//! Explicit-state baseline: the game solved on the full product, and a
//! closed-loop checker for controllers.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::compose::{CapExceeded, ExplicitProduct};
use crate::label::{Label, LabelId};
use crate::lts::{Lts, StateId};
use crate::model::{classify_enabled, CompositeState, ControlProblem, StateClass};

/// Winning region of the product game.
#[derive(Debug, Clone)]
pub struct GameSolution {
    pub product: ExplicitProduct,
    pub winning: Vec<bool>,
    /// For controllable winning states, an action that discharges or leads
    /// to a state won strictly earlier.
    pub witness: Vec<Option<LabelId>>,
}

impl GameSolution {
    pub fn initial_winning(&self) -> bool {
        self.winning[0]
    }

    pub fn num_winning(&self) -> usize {
        self.winning.iter().filter(|&&w| w).count()
    }
}

fn classes(problem: &ControlProblem, product: &ExplicitProduct) -> Vec<StateClass> {
    product
        .successors
        .iter()
        .map(|succ| {
            let en: Vec<(LabelId, CompositeState)> = succ
                .iter()
                .map(|&(l, j)| (l, product.states[j].clone()))
                .collect();
            classify_enabled(problem, &en)
        })
        .collect()
}

/// Whether the edges that matter at a state of class `class` are the
/// uncontrollable ones (and all of them must be good) or all of them
/// (one good edge suffices).
fn counts(problem: &ControlProblem, class: StateClass, l: LabelId) -> bool {
    class == StateClass::Controllable || !problem.is_controllable(l)
}

/// Applies the one-step winning rule to every state given a candidate set.
pub fn one_step(
    problem: &ControlProblem,
    product: &ExplicitProduct,
    winning: &[bool],
) -> Vec<bool> {
    let classes = classes(problem, product);
    (0..product.len())
        .map(|i| {
            let class = classes[i];
            let good = |&(l, j): &(LabelId, usize)| {
                !problem.is_violation(l, &product.states[j]) && (problem.is_reach(l) || winning[j])
            };
            let relevant = product.successors[i]
                .iter()
                .filter(|(l, _)| counts(problem, class, *l));
            match class {
                StateClass::Deadlock => false,
                StateClass::Controllable => relevant.clone().any(good),
                _ => relevant.clone().all(good),
            }
        })
        .collect()
}

/// Least fixpoint of the one-step rule over the reachable product.
pub fn solve_monolithic(problem: &ControlProblem, cap: usize) -> Result<GameSolution, CapExceeded> {
    let product = ExplicitProduct::build(problem.model(), cap)?;
    let n = product.len();
    let classes = classes(problem, &product);
    let mut winning = vec![false; n];
    let mut witness = vec![None; n];
    // pending[i]: relevant successors still to be won (uncontrollable-like).
    let mut pending = vec![0usize; n];
    let mut blocked = vec![false; n];
    let mut preds: Vec<Vec<(usize, LabelId)>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();
    for i in 0..n {
        let class = classes[i];
        for &(l, j) in &product.successors[i] {
            if !counts(problem, class, l) {
                continue;
            }
            let violation = problem.is_violation(l, &product.states[j]);
            match class {
                StateClass::Controllable => {
                    if !violation && problem.is_reach(l) && !winning[i] {
                        winning[i] = true;
                        witness[i] = Some(l);
                        queue.push_back(i);
                    } else if !violation && !problem.is_reach(l) {
                        preds[j].push((i, l));
                    }
                }
                StateClass::Deadlock => {}
                _ => {
                    if violation {
                        blocked[i] = true;
                    } else if !problem.is_reach(l) {
                        pending[i] += 1;
                        preds[j].push((i, l));
                    }
                }
            }
        }
        if classes[i].is_uncontrollable_like() && !blocked[i] && pending[i] == 0 {
            winning[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(j) = queue.pop_front() {
        for &(i, l) in &preds[j] {
            if winning[i] {
                continue;
            }
            if classes[i] == StateClass::Controllable {
                winning[i] = true;
                witness[i] = Some(l);
                queue.push_back(i);
            } else if !blocked[i] {
                pending[i] -= 1;
                if pending[i] == 0 {
                    winning[i] = true;
                    queue.push_back(i);
                }
            }
        }
    }
    Ok(GameSolution {
        product,
        winning,
        witness,
    })
}

impl GameSolution {
    /// Controller read off the winning region: the witness at controllable
    /// states, every uncontrollable transition elsewhere. Witnesses and
    /// uncontrollable successors were won strictly earlier, so only
    /// discharges close cycles. `None` if the initial state is losing.
    pub fn controller(&self, problem: &ControlProblem) -> Option<crate::engine::Controller> {
        if !self.initial_winning() {
            return None;
        }
        let model = problem.model();
        let product = &self.product;
        let classes = classes(problem, product);
        let kept = |i: usize| -> Vec<(LabelId, usize)> {
            match classes[i] {
                StateClass::Controllable => {
                    let w = self.witness[i].expect("controllable winners have witnesses");
                    product.successors[i]
                        .iter()
                        .copied()
                        .filter(|&(l, _)| l == w)
                        .collect()
                }
                _ => product.successors[i]
                    .iter()
                    .copied()
                    .filter(|&(l, _)| !problem.is_controllable(l))
                    .collect(),
            }
        };
        let mut included = vec![false; product.len()];
        let mut queue = VecDeque::from([0usize]);
        included[0] = true;
        while let Some(i) = queue.pop_front() {
            for (l, j) in kept(i) {
                if !problem.is_reach(l) && !included[j] {
                    included[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let mut b = crate::lts::LtsBuilder::new("controller");
        b.extend_alphabet(model.labels().iter().cloned());
        let mut number: HashMap<usize, usize> = HashMap::new();
        let mut terminal: HashMap<usize, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut order = VecDeque::from([0usize]);
        number.insert(0, b.add_state(product.states[0].to_string()));
        states.push(product.states[0].clone());
        while let Some(i) = order.pop_front() {
            for (l, j) in kept(i) {
                let to = if included[j] {
                    *number.entry(j).or_insert_with(|| {
                        order.push_back(j);
                        states.push(product.states[j].clone());
                        b.add_state(product.states[j].to_string())
                    })
                } else {
                    *terminal.entry(j).or_insert_with(|| {
                        states.push(product.states[j].clone());
                        b.add_state(product.states[j].to_string())
                    })
                };
                b.add_transition(number[&i], model.label(l).clone(), to);
            }
        }
        Some(crate::engine::Controller {
            lts: b.build().expect("controller is deterministic"),
            states,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// An avoid label, or a step into `ERROR`, before any discharge.
    Safety,
    /// A closed-loop state with no way to continue before discharging.
    Deadlock,
    /// A closed-loop cycle that never discharges.
    Cycle,
    /// The controller disables an uncontrollable label the plant offers.
    BlocksUncontrollable,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Safety => "safety violation",
            ViolationKind::Deadlock => "deadlock before discharge",
            ViolationKind::Cycle => "cycle without discharge",
            ViolationKind::BlocksUncontrollable => "uncontrollable action disabled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Labels from the initial closed-loop state to the violation.
    pub trace: Vec<Label>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t: Vec<String> = self.trace.iter().map(Label::to_string).collect();
        write!(f, "{}: trace [{}]", self.kind, t.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    /// Closed-loop states visited before discharge.
    pub closed_loop_states: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("controller label `{0}` is not in the plant alphabet")]
    AlphabetMismatch(Label),
}

/// Model-checks the plant under `controller`, up to the first discharge.
///
/// The controller synchronizes on the whole plant alphabet: a label it has
/// no transition for is disabled.
pub fn verify_controller(
    problem: &ControlProblem,
    controller: &Lts,
) -> Result<VerificationReport, VerifyError> {
    let model = problem.model();
    let mut ctrl: Vec<HashMap<LabelId, StateId>> = Vec::with_capacity(controller.num_states());
    for s in 0..controller.num_states() {
        let mut m = HashMap::new();
        for (l, t) in controller.transitions(s) {
            let id = model
                .label_id(l)
                .ok_or_else(|| VerifyError::AlphabetMismatch(l.clone()))?;
            m.insert(id, *t);
        }
        ctrl.push(m);
    }
    if let Some(l) = controller
        .alphabet()
        .iter()
        .find(|l| model.label_id(l).is_none())
    {
        return Err(VerifyError::AlphabetMismatch(l.clone()));
    }

    type Key = (CompositeState, StateId);
    let root: Key = (problem.initial_state(), controller.initial());
    let mut index: HashMap<Key, usize> = HashMap::from([(root.clone(), 0)]);
    let mut keys = vec![root];
    let mut parent: Vec<Option<(usize, LabelId)>> = vec![None];
    let mut succ: Vec<Vec<(usize, LabelId)>> = Vec::new();
    let mut violations = Vec::new();
    let trace_to = |parent: &[Option<(usize, LabelId)>], mut i: usize| {
        let mut t = Vec::new();
        while let Some((p, l)) = parent[i] {
            t.push(model.label(l).clone());
            i = p;
        }
        t.reverse();
        t
    };
    let mut i = 0;
    while i < keys.len() {
        let (cs, q) = keys[i].clone();
        let mut out = Vec::new();
        let mut moved = false;
        for (l, next) in problem.enabled(&cs) {
            let Some(&q2) = ctrl[q].get(&l) else {
                if !problem.is_controllable(l) {
                    let mut trace = trace_to(&parent, i);
                    trace.push(model.label(l).clone());
                    violations.push(Violation {
                        kind: ViolationKind::BlocksUncontrollable,
                        trace,
                    });
                }
                continue;
            };
            moved = true;
            if problem.is_violation(l, &next) {
                let mut trace = trace_to(&parent, i);
                trace.push(model.label(l).clone());
                violations.push(Violation {
                    kind: ViolationKind::Safety,
                    trace,
                });
                continue;
            }
            if problem.is_reach(l) {
                continue;
            }
            let key = (next, q2);
            let j = match index.get(&key) {
                Some(&j) => j,
                None => {
                    let j = keys.len();
                    index.insert(key.clone(), j);
                    keys.push(key);
                    parent.push(Some((i, l)));
                    j
                }
            };
            out.push((j, l));
        }
        if !moved {
            violations.push(Violation {
                kind: ViolationKind::Deadlock,
                trace: trace_to(&parent, i),
            });
        }
        succ.push(out);
        i += 1;
    }

    if let Some(cycle) = find_cycle(&succ) {
        let (entry, labels) = cycle;
        let mut trace = trace_to(&parent, entry);
        trace.extend(labels.into_iter().map(|l| model.label(l).clone()));
        violations.push(Violation {
            kind: ViolationKind::Cycle,
            trace,
        });
    }
    Ok(VerificationReport {
        closed_loop_states: keys.len(),
        violations,
    })
}

/// Finds some cycle; returns its first node and the labels around it.
fn find_cycle(succ: &[Vec<(usize, LabelId)>]) -> Option<(usize, Vec<LabelId>)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let n = succ.len();
    let mut color = vec![Color::White; n];
    for start in 0..n {
        if color[start] != Color::White {
            continue;
        }
        // stack of (node, next edge index); path labels parallel to it
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        let mut labels: Vec<LabelId> = Vec::new();
        color[start] = Color::Grey;
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k < succ[v].len() {
                let (w, l) = succ[v][*k];
                *k += 1;
                match color[w] {
                    Color::White => {
                        color[w] = Color::Grey;
                        stack.push((w, 0));
                        labels.push(l);
                    }
                    Color::Grey => {
                        let pos = stack.iter().position(|&(x, _)| x == w).unwrap();
                        let mut cyc: Vec<LabelId> = labels[pos..].to_vec();
                        cyc.push(l);
                        return Some((w, cyc));
                    }
                    Color::Black => {}
                }
            } else {
                color[v] = Color::Black;
                stack.pop();
                labels.pop();
            }
        }
    }
    None
}
