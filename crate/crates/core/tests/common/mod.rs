//! Random control problems and brute-force reference answers.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use dcs_core::compose::ExplicitProduct;
use dcs_core::{CompositeState, ControlProblem, Label, LtsBuilder};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITE_SIZE: u64 = 500;

/// A problem with at most 4 components of at most 6 states each (plus an
/// optional ERROR state) over at most 8 labels drawn from a shared pool.
pub fn random_problem(seed: u64) -> ControlProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Label> = (0..rng.gen_range(3..=8))
        .map(|i| format!("l{i}").parse().unwrap())
        .collect();
    let n = rng.gen_range(1..=4);
    // Each label is owned by one or two components.
    let mut alphabets: Vec<Vec<Label>> = vec![Vec::new(); n];
    for l in &pool {
        let owners = if n > 1 && rng.gen_bool(0.4) { 2 } else { 1 };
        for c in rand::seq::index::sample(&mut rng, n, owners) {
            alphabets[c].push(l.clone());
        }
    }
    for a in alphabets.iter_mut().filter(|a| a.is_empty()) {
        a.push(pool.choose(&mut rng).unwrap().clone());
    }
    let mut components = Vec::with_capacity(n);
    let mut union = BTreeSet::new();
    for (c, alphabet) in alphabets.into_iter().enumerate() {
        let states = rng.gen_range(1..=6);
        let mut b = LtsBuilder::new(format!("P{c}")).with_states(states);
        let error = rng.gen_bool(0.25).then(|| b.add_error_state("ERROR"));
        let density = rng.gen_range(0.3..0.8);
        // A spine `s -> s+1` keeps every state locally reachable.
        for s in 0..states {
            let spine = rng.gen_range(0..alphabet.len());
            for (k, l) in alphabet.iter().enumerate() {
                if k != spine && !rng.gen_bool(density) {
                    continue;
                }
                let t = match error {
                    Some(e) if rng.gen_bool(0.1) => e,
                    _ if k == spine => (s + 1) % states,
                    _ => rng.gen_range(0..states),
                };
                b.add_transition(s, l.clone(), t);
            }
        }
        b.extend_alphabet(alphabet.iter().cloned());
        union.extend(alphabet);
        components.push(b.build().unwrap());
    }
    let union: Vec<Label> = union.into_iter().collect();
    let controllable: BTreeSet<Label> = union
        .iter()
        .filter(|_| rng.gen_bool(0.6))
        .cloned()
        .collect();
    let mut shuffled = union.clone();
    shuffled.shuffle(&mut rng);
    let r = 1;
    let reach: BTreeSet<Label> = shuffled[..r].iter().cloned().collect();
    let avoid: BTreeSet<Label> = shuffled[r..]
        .iter()
        .filter(|_| rng.gen_bool(0.2))
        .cloned()
        .collect();
    ControlProblem::new(components, &controllable, &reach, &avoid).unwrap()
}

pub fn product(problem: &ControlProblem) -> ExplicitProduct {
    ExplicitProduct::build(problem.model(), 1 << 20).unwrap()
}

/// Fewest steps from each state to a discharge, moving only through
/// non-violating, non-discharging steps. `None` if no discharge is reachable.
pub fn true_distances(problem: &ControlProblem, p: &ExplicitProduct) -> Vec<Option<u32>> {
    let n = p.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for (i, succ) in p.successors.iter().enumerate() {
        for &(l, j) in succ {
            let t = &p.states[j];
            if problem.is_discharge(l, t) {
                if dist[i].is_none() {
                    dist[i] = Some(1);
                    queue.push_back(i);
                }
            } else if !problem.is_violation(l, t) {
                preds[j].push(i);
            }
        }
    }
    while let Some(j) = queue.pop_front() {
        let d = dist[j].unwrap();
        for &i in &preds[j] {
            if dist[i].is_none() {
                dist[i] = Some(d + 1);
                queue.push_back(i);
            }
        }
    }
    dist
}

/// Length of the shortest witnessing trace after taking `label` from `from`,
/// counting that step.
pub fn true_action_distance(
    problem: &ControlProblem,
    p: &ExplicitProduct,
    dist: &[Option<u32>],
    from: usize,
    label: dcs_core::LabelId,
) -> Option<u32> {
    let &(_, j) = p.successors[from].iter().find(|(l, _)| *l == label)?;
    let t = &p.states[j];
    if problem.is_discharge(label, t) {
        Some(1)
    } else if problem.is_violation(label, t) {
        None
    } else {
        dist[j].map(|d| d + 1)
    }
}

/// A random walk from the initial state ending at the first discharge or
/// violation, or after `max_len` steps, or where nothing is enabled.
pub fn random_trace(
    problem: &ControlProblem,
    p: &ExplicitProduct,
    rng: &mut ChaCha8Rng,
    max_len: usize,
) -> Vec<(CompositeState, dcs_core::LabelId, CompositeState)> {
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < max_len {
        let Some(&(l, j)) = p.successors[i].choose(rng) else {
            break;
        };
        let t = &p.states[j];
        out.push((p.states[i].clone(), l, t.clone()));
        if problem.is_reach(l) || problem.is_violation(l, t) {
            break;
        }
        i = j;
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn index(p: &ExplicitProduct) -> HashMap<CompositeState, usize> {
    p.states
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect()
}
