//! Abstracting composition, abstracting path graph and the distance ranking
//! that guides exploration.
//!
//! The abstraction works on the disjoint union of component states rather
//! than on their product. Starting from the component states of a composite
//! state, it repeatedly fires every relaxed transition available from the
//! current frontier: a private label fires from any frontier state that
//! enables it, a shared label fires for every pair of frontier states of two
//! distinct participants that both enable it. The iteration at which a state
//! first enters the frontier is its generation.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::fmt::{self, Write as _};

use crate::label::LabelId;
use crate::model::{CompositeState, ControlProblem};

/// A state of one component, i.e. a vertex of the path graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub component: usize,
    pub state: u32,
}

impl VertexRef {
    pub fn new(component: usize, state: u32) -> Self {
        Self { component, state }
    }
}

/// An edge of the abstracting path graph.
///
/// `violating` is set when the synchronization instance that produced the
/// edge is unsafe: its label is an avoid label or one of the moving
/// components enters `ERROR`. The same `(source, label, target)` may occur
/// once with each flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AbsEdge {
    pub source: VertexRef,
    pub label: LabelId,
    pub target: VertexRef,
    pub violating: bool,
    /// Iteration (1-based) in which the edge was first fired.
    pub fired_at: u32,
}

/// Distance estimate: a step count or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimate {
    Finite(u32),
    Infinite,
}

impl Estimate {
    pub fn is_finite(self) -> bool {
        matches!(self, Estimate::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Estimate::Finite(v) => Some(v),
            Estimate::Infinite => None,
        }
    }

    fn plus(self, w: u32) -> Estimate {
        match self {
            Estimate::Finite(v) => Estimate::Finite(v.saturating_add(w)),
            Estimate::Infinite => Estimate::Infinite,
        }
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimate::Finite(v) => write!(f, "{v}"),
            Estimate::Infinite => f.write_str("inf"),
        }
    }
}

/// Dense numbering of all component states.
#[derive(Debug, Clone)]
struct Vertices {
    offsets: Vec<usize>,
}

impl Vertices {
    fn new(problem: &ControlProblem) -> Self {
        let mut offsets = vec![0];
        for c in problem.model().components() {
            offsets.push(offsets.last().unwrap() + c.num_states());
        }
        Self { offsets }
    }

    fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn index(&self, v: VertexRef) -> usize {
        self.offsets[v.component] + v.state as usize
    }

    fn vertex(&self, i: usize) -> VertexRef {
        let c = self.offsets.partition_point(|&o| o <= i) - 1;
        VertexRef::new(c, (i - self.offsets[c]) as u32)
    }
}

/// Output of [`build_abstraction`].
#[derive(Debug, Clone)]
pub struct AbstractionResult {
    vertices: Vertices,
    root: CompositeState,
    errors: BTreeSet<VertexRef>,
    edges: Vec<AbsEdge>,
    goals: Vec<usize>,
    goal_flags: Vec<bool>,
    generations: Vec<Option<u32>>,
    frontiers: Vec<Vec<VertexRef>>,
    step_labels: Vec<BTreeSet<LabelId>>,
}

impl AbstractionResult {
    pub fn root(&self) -> &CompositeState {
        &self.root
    }

    /// States that never fired a transition: the root states and the
    /// targets of non-goal edges that are deadlocked or `ERROR`.
    pub fn errors(&self) -> &BTreeSet<VertexRef> {
        &self.errors
    }

    pub fn edges(&self) -> &[AbsEdge] {
        &self.edges
    }

    /// Indices into [`edges`](Self::edges) of non-violating reach edges.
    pub fn goals(&self) -> &[usize] {
        &self.goals
    }

    pub fn is_goal(&self, edge: usize) -> bool {
        self.goal_flags[edge]
    }

    pub fn generation(&self, v: VertexRef) -> Option<u32> {
        self.generations[self.vertices.index(v)]
    }

    /// All vertices with a generation, in vertex order.
    pub fn generations(&self) -> impl Iterator<Item = (VertexRef, u32)> + '_ {
        self.generations
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.map(|g| (self.vertices.vertex(i), g)))
    }

    /// The sequence of frontier sets `q0 ⊆ q1 ⊆ ...`, each sorted.
    pub fn frontiers(&self) -> &[Vec<VertexRef>] {
        &self.frontiers
    }

    /// Labels of the relaxed steps available from each frontier set that
    /// has a successor, i.e. `step_labels()[i]` labels the step `q_i -> q_{i+1}`.
    pub fn step_labels(&self) -> &[BTreeSet<LabelId>] {
        &self.step_labels
    }

    /// Edge weight: the generations skipped by the edge, at least 1.
    ///
    /// The target's generation is capped by the iteration the edge fired in,
    /// which only matters for goal and violating edges whose target enters
    /// the frontier later through another edge.
    pub fn weight(&self, edge: usize) -> u32 {
        let e = &self.edges[edge];
        let src = self
            .generation(e.source)
            .expect("edge sources have generations");
        let dst = self
            .generation(e.target)
            .expect("edge targets have generations");
        edge_weight(src, dst.min(e.fired_at))
    }

    /// The path graph in DOT form: vertices `component:state` with their
    /// generation, violating edges dashed, goal edges bold.
    pub fn to_dot(&self, problem: &ControlProblem) -> String {
        let model = problem.model();
        let name = |v: VertexRef| {
            let c = &model.components()[v.component];
            format!("{}:{}", c.name(), c.state_name(v.state as usize))
        };
        let mut out = String::from("digraph abstraction {\n  rankdir=LR;\n");
        for (v, g) in self.generations() {
            let n = name(v);
            let shape = if self.errors.contains(&v) {
                "box"
            } else {
                "ellipse"
            };
            let _ = writeln!(out, "  \"{n}\" [label=\"{n}\\ngen {g}\", shape={shape}];");
        }
        for (i, e) in self.edges.iter().enumerate() {
            let style = if e.violating {
                ", style=dashed"
            } else if self.goal_flags[i] {
                ", style=bold"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{} ({})\"{style}];",
                name(e.source),
                name(e.target),
                model.label(e.label),
                self.weight(i)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// `max(1, gen(target) - gen(source))`.
pub fn edge_weight(source_gen: u32, target_gen: u32) -> u32 {
    target_gen.saturating_sub(source_gen).max(1)
}

struct Builder<'a> {
    problem: &'a ControlProblem,
    vertices: Vertices,
    generations: Vec<Option<u32>>,
    in_frontier: Vec<bool>,
    frontier_order: Vec<VertexRef>,
    /// Per label, per participant slot: frontier states offering the label.
    offers: Vec<Vec<Vec<u32>>>,
    pending: Vec<(VertexRef, LabelId, VertexRef, bool)>,
    seen: HashSet<(VertexRef, LabelId, VertexRef, bool)>,
    edges: Vec<AbsEdge>,
    fired: Vec<bool>,
    touched: Vec<bool>,
}

impl Builder<'_> {
    fn enter(&mut self, v: VertexRef, generation: u32) {
        let i = self.vertices.index(v);
        if self.in_frontier[i] {
            return;
        }
        self.in_frontier[i] = true;
        self.generations[i] = Some(generation);
        self.frontier_order.push(v);
        let model = self.problem.model();
        for &(l, t) in model.local_transitions(v.component, v.state) {
            let parts = model.participants(l);
            let target = VertexRef::new(v.component, t);
            let own_bad = self.problem.avoid().contains(l) || model.local_is_error(v.component, t);
            if parts.len() == 1 {
                self.pending.push((v, l, target, own_bad));
                continue;
            }
            let slot = parts.iter().position(|&p| p == v.component).unwrap();
            for (other_slot, &oc) in parts.iter().enumerate() {
                if other_slot == slot {
                    continue;
                }
                for &u in &self.offers[l.index()][other_slot] {
                    let ut = model
                        .local_successor(oc, u, l)
                        .expect("offers enable their label");
                    let u = VertexRef::new(oc, u);
                    let u_target = VertexRef::new(oc, ut);
                    let bad = own_bad || model.local_is_error(oc, ut);
                    self.pending.push((v, l, target, bad));
                    self.pending.push((v, l, u_target, bad));
                    self.pending.push((u, l, u_target, bad));
                    self.pending.push((u, l, target, bad));
                }
            }
            self.offers[l.index()][slot].push(v.state);
        }
    }
}

/// Builds the abstracting composition rooted at `cs` together with its
/// abstracting path graph.
pub fn build_abstraction(problem: &ControlProblem, cs: &CompositeState) -> AbstractionResult {
    let model = problem.model();
    let vertices = Vertices::new(problem);
    let n = vertices.len();
    let offers = (0..model.num_labels())
        .map(|l| vec![Vec::new(); model.participants(LabelId(l as u32)).len()])
        .collect();
    let mut b = Builder {
        problem,
        vertices: vertices.clone(),
        generations: vec![None; n],
        in_frontier: vec![false; n],
        frontier_order: Vec::new(),
        offers,
        pending: Vec::new(),
        seen: HashSet::new(),
        edges: Vec::new(),
        fired: vec![false; n],
        touched: vec![false; n],
    };
    for (c, &s) in cs.states().iter().enumerate() {
        b.enter(VertexRef::new(c, s), 0);
    }
    let mut frontiers = vec![sorted(&b.frontier_order)];
    let mut step_labels: Vec<BTreeSet<LabelId>> = Vec::new();
    let mut available: BTreeSet<LabelId> = BTreeSet::new();
    let mut goal_flags = Vec::new();
    let mut g = 0u32;
    while !b.pending.is_empty() {
        g += 1;
        let ready = std::mem::take(&mut b.pending);
        available.extend(ready.iter().map(|r| r.1));
        step_labels.push(available.clone());
        for (s, l, t, bad) in ready {
            if !b.seen.insert((s, l, t, bad)) {
                continue;
            }
            let si = vertices.index(s);
            let ti = vertices.index(t);
            b.fired[si] = true;
            b.edges.push(AbsEdge {
                source: s,
                label: l,
                target: t,
                violating: bad,
                fired_at: g,
            });
            let goal = problem.is_reach(l) && !bad;
            goal_flags.push(goal);
            if b.generations[ti].is_none() {
                b.generations[ti] = Some(g);
            }
            if !problem.is_reach(l) {
                b.touched[ti] = true;
            }
            if !goal && !bad {
                b.enter(t, g);
            }
        }
        let grown = sorted(&b.frontier_order);
        if grown.len() > frontiers.last().unwrap().len() {
            frontiers.push(grown);
        }
    }
    let mut errors = BTreeSet::new();
    for i in 0..n {
        let root = b.in_frontier[i] && b.generations[i] == Some(0);
        if (root || b.touched[i]) && !b.fired[i] {
            errors.insert(vertices.vertex(i));
        }
    }
    // A final step only repeats labels already seen: the closing self-loop.
    while step_labels.len() > frontiers.len() {
        step_labels.pop();
    }
    let goals = goal_flags
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i))
        .collect();
    AbstractionResult {
        vertices,
        root: cs.clone(),
        errors,
        edges: b.edges,
        goals,
        goal_flags,
        generations: b.generations,
        frontiers,
        step_labels,
    }
}

fn sorted(v: &[VertexRef]) -> Vec<VertexRef> {
    let mut v = v.to_vec();
    v.sort();
    v
}

/// Estimated distance from each vertex to a goal edge.
#[derive(Debug, Clone)]
pub struct Distances {
    vertices: Vertices,
    dist: Vec<Estimate>,
}

impl Distances {
    pub fn get(&self, v: VertexRef) -> Estimate {
        self.dist[self.vertices.index(v)]
    }
}

/// Shortest distances to a goal over the path graph, by Dijkstra from a
/// virtual goal vertex along reversed edges. A goal edge costs its weight;
/// any other safe edge costs its weight plus the distance of its target.
/// Violating edges are ignored, so vertices that can only violate are at
/// infinite distance.
pub fn backpropagate(result: &AbstractionResult) -> Distances {
    let vertices = result.vertices.clone();
    let n = vertices.len();
    let mut dist = vec![Estimate::Infinite; n];
    let mut reverse: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
    let mut heap = BinaryHeap::new();
    for (i, e) in result.edges.iter().enumerate() {
        if e.violating {
            continue;
        }
        let s = vertices.index(e.source);
        let w = result.weight(i);
        if result.goal_flags[i] {
            if Estimate::Finite(w) < dist[s] {
                dist[s] = Estimate::Finite(w);
                heap.push(Reverse((w, s)));
            }
        } else {
            reverse[vertices.index(e.target)].push((s, w));
        }
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if Estimate::Finite(d) > dist[v] {
            continue;
        }
        for &(u, w) in &reverse[v] {
            let nd = d.saturating_add(w);
            if Estimate::Finite(nd) < dist[u] {
                dist[u] = Estimate::Finite(nd);
                heap.push(Reverse((nd, u)));
            }
        }
    }
    Distances { vertices, dist }
}

/// An enabled action with its estimate and real successor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedAction {
    pub label: LabelId,
    pub estimate: Estimate,
    pub target: CompositeState,
}

/// Enabled actions of a composite state, best first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionRanking {
    pub actions: Vec<RankedAction>,
}

impl ActionRanking {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn estimate_of(&self, l: LabelId) -> Option<Estimate> {
        self.actions
            .iter()
            .find(|a| a.label == l)
            .map(|a| a.estimate)
    }
}

/// Ranks the actions enabled at `cs` from an already built abstraction.
///
/// An unsafe step is at infinite distance and a discharging one at 1.
/// Otherwise the estimate of `l` is the best of: a safe `l` edge leaving a
/// root vertex plus the distance of its target, and one step plus the
/// distance of a root vertex of a component that `l` leaves in place.
pub fn rank_with(
    problem: &ControlProblem,
    result: &AbstractionResult,
    dist: &Distances,
) -> ActionRanking {
    let cs = result.root();
    let model = problem.model();
    let mut from_graph = vec![Estimate::Infinite; model.num_labels()];
    for (i, e) in result.edges.iter().enumerate() {
        if e.violating || result.generation(e.source) != Some(0) {
            continue;
        }
        if e.source.state != cs.states()[e.source.component] {
            continue;
        }
        let w = result.weight(i);
        let est = if result.goal_flags[i] {
            Estimate::Finite(w)
        } else {
            dist.get(e.target).plus(w)
        };
        let slot = &mut from_graph[e.label.index()];
        *slot = (*slot).min(est);
    }
    let root_dist: Vec<Estimate> = cs
        .states()
        .iter()
        .enumerate()
        .map(|(c, &s)| dist.get(VertexRef::new(c, s)))
        .collect();
    let mut actions: Vec<RankedAction> = problem
        .enabled(cs)
        .into_iter()
        .map(|(l, target)| {
            let estimate = if problem.is_violation(l, &target) {
                Estimate::Infinite
            } else if problem.is_reach(l) {
                Estimate::Finite(1)
            } else {
                let parts = model.participants(l);
                let idle = root_dist
                    .iter()
                    .enumerate()
                    .filter(|(c, _)| !parts.contains(c))
                    .map(|(_, d)| d.plus(1))
                    .min()
                    .unwrap_or(Estimate::Infinite);
                from_graph[l.index()].min(idle)
            };
            RankedAction {
                label: l,
                estimate,
                target,
            }
        })
        .collect();
    actions.sort_by_key(|a| (a.estimate, a.label));
    ActionRanking { actions }
}

/// Builds the abstraction at `cs`, back-propagates and ranks its actions.
pub fn rank_actions(problem: &ControlProblem, cs: &CompositeState) -> ActionRanking {
    let result = build_abstraction(problem, cs);
    let dist = backpropagate(&result);
    rank_with(problem, &result, &dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{e_one, set, worked_example};
    use crate::label::Label;
    use crate::lts::lts_from_triples;
    use crate::model::ControlProblem;
    use std::collections::BTreeSet;

    fn lid(p: &ControlProblem, s: &str) -> LabelId {
        p.model().label_id(&s.parse::<Label>().unwrap()).unwrap()
    }

    fn names(p: &ControlProblem, ls: &BTreeSet<LabelId>) -> Vec<String> {
        ls.iter().map(|l| p.model().label(*l).to_string()).collect()
    }

    const S: usize = 0;
    const T: usize = 1;

    fn v(c: usize, s: u32) -> VertexRef {
        VertexRef::new(c, s)
    }

    #[test]
    fn single_component_sequence() {
        let p = ControlProblem::new(vec![e_one()], &set(&["a"]), &set(&["d"]), &BTreeSet::new())
            .unwrap();
        let r = build_abstraction(&p, &p.initial_state());
        let fr: Vec<Vec<u32>> = r
            .frontiers()
            .iter()
            .map(|f| f.iter().map(|x| x.state).collect())
            .collect();
        // reach edges do not extend the frontier, so s3 only shows up as a goal target
        assert_eq!(fr, [vec![0], vec![0, 1, 2]]);
        let steps: Vec<Vec<String>> = r.step_labels().iter().map(|s| names(&p, s)).collect();
        assert_eq!(steps, [vec!["a", "b"], vec!["a", "b", "d"]]);
    }

    #[test]
    fn single_component_sequence_without_goals() {
        let p = ControlProblem::new(vec![e_one()], &set(&["a"]), &set(&["a"]), &BTreeSet::new())
            .unwrap();
        let r = build_abstraction(&p, &p.initial_state());
        let last: Vec<u32> = r
            .frontiers()
            .last()
            .unwrap()
            .iter()
            .map(|x| x.state)
            .collect();
        assert_eq!(last, [0, 2, 3]);
        let p = ControlProblem::new(
            vec![e_one(), lts_from_triples("G", 2, &[(0, "g", 1)]).unwrap()],
            &set(&["a"]),
            &set(&["g"]),
            &BTreeSet::new(),
        )
        .unwrap();
        let r = build_abstraction(&p, &p.initial_state());
        let fr: Vec<Vec<u32>> = r
            .frontiers()
            .iter()
            .map(|f| {
                f.iter()
                    .filter(|x| x.component == 0)
                    .map(|x| x.state)
                    .collect()
            })
            .collect();
        assert_eq!(fr, [vec![0], vec![0, 1, 2], vec![0, 1, 2, 3]]);
        let steps: Vec<Vec<String>> = r
            .step_labels()
            .iter()
            .map(|s| names(&p, s).into_iter().filter(|l| l != "g").collect())
            .collect();
        assert_eq!(steps, [vec!["a", "b"], vec!["a", "b", "d"]]);
    }

    #[test]
    fn composed_sequence_blocks_unsynchronized_d() {
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let steps: Vec<Vec<String>> = r.step_labels().iter().map(|s| names(&p, s)).collect();
        assert_eq!(steps[0], ["a", "b", "c"]);
        assert_eq!(steps[1], ["a", "b", "c", "d"]);
    }

    #[test]
    fn worked_example_generations() {
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let g = |c, s| r.generation(v(c, s));
        assert_eq!((g(S, 0), g(T, 0)), (Some(0), Some(0)));
        for (c, s) in [(S, 1), (S, 2), (T, 1), (T, 2)] {
            assert_eq!(g(c, s), Some(1), "{c}:{s}");
        }
        assert_eq!(g(S, 3), Some(2));
    }

    #[test]
    fn inter_component_edges() {
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let (a, d) = (lid(&p, "a"), lid(&p, "d"));
        let has = |s, l, t| {
            r.edges()
                .iter()
                .any(|e| e.source == s && e.label == l && e.target == t)
        };
        assert!(has(v(T, 0), a, v(S, 1)));
        assert!(has(v(S, 0), a, v(T, 1)));
        assert!(has(v(T, 0), d, v(S, 3)));
        assert!(has(v(S, 2), d, v(T, 1)));
        assert!(!has(v(S, 0), d, v(S, 3)));
    }

    #[test]
    fn weights() {
        assert_eq!(edge_weight(0, 2), 2);
        assert_eq!(edge_weight(1, 2), 1);
        assert_eq!(edge_weight(0, 0), 1);
        assert_eq!(edge_weight(2, 0), 1);
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let d = lid(&p, "d");
        let w = |s, t| {
            let i = r
                .edges()
                .iter()
                .position(|e| e.source == s && e.label == d && e.target == t)
                .unwrap();
            r.weight(i)
        };
        assert_eq!(w(v(T, 0), v(S, 3)), 2);
        assert_eq!(w(v(S, 2), v(S, 3)), 1);
        assert_eq!(w(v(T, 0), v(T, 0)), 1);
    }

    #[test]
    fn worked_example_distances() {
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let dist = backpropagate(&r);
        let d = |c, s| dist.get(v(c, s));
        assert_eq!(d(S, 2), Estimate::Finite(1));
        assert_eq!(d(T, 2), Estimate::Finite(1));
        assert_eq!(d(S, 0), Estimate::Finite(2));
        assert_eq!(d(T, 0), Estimate::Finite(1));
        assert_eq!(d(S, 1), Estimate::Infinite);
        assert_eq!(d(T, 1), Estimate::Infinite);
    }

    #[test]
    fn errors_lose_firing_sources() {
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let sources: BTreeSet<VertexRef> = r.edges().iter().map(|e| e.source).collect();
        assert!(r.errors().is_disjoint(&sources));
        assert!(r.errors().contains(&v(T, 1)));
        for e in r.edges() {
            assert!(r.generation(e.source).is_some() && r.generation(e.target).is_some());
        }
    }

    #[test]
    fn worked_example_ranking() {
        let p = worked_example();
        let rank = rank_actions(&p, &p.initial_state());
        let got: Vec<(String, Estimate)> = rank
            .actions
            .iter()
            .map(|a| (p.model().label(a.label).to_string(), a.estimate))
            .collect();
        assert_eq!(
            got,
            [
                ("b".to_string(), Estimate::Finite(2)),
                ("c".to_string(), Estimate::Finite(2)),
                ("a".to_string(), Estimate::Infinite),
            ]
        );
    }

    #[test]
    fn single_goal_edge() {
        let lts = lts_from_triples("G", 2, &[(0, "g", 1)]).unwrap();
        let p =
            ControlProblem::new(vec![lts], &set(&["g"]), &set(&["g"]), &BTreeSet::new()).unwrap();
        let r = build_abstraction(&p, &p.initial_state());
        assert_eq!(backpropagate(&r).get(v(0, 0)), Estimate::Finite(1));
        let rank = rank_actions(&p, &p.initial_state());
        assert_eq!(rank.actions[0].estimate, Estimate::Finite(1));
    }

    #[test]
    fn everything_avoided() {
        let lts = lts_from_triples("A", 3, &[(0, "x", 1), (1, "y", 2), (2, "x", 0)]).unwrap();
        let g = lts_from_triples("G", 2, &[(0, "g", 1)]).unwrap();
        let p = ControlProblem::new(vec![lts, g], &set(&["x"]), &set(&["g"]), &set(&["x", "y"]))
            .unwrap();
        let r = build_abstraction(&p, &p.initial_state());
        let dist = backpropagate(&r);
        assert_eq!(dist.get(v(0, 0)), Estimate::Infinite);
        assert_eq!(dist.get(v(0, 1)), Estimate::Infinite);
        assert_eq!(r.generation(v(0, 2)), None);
    }

    #[test]
    fn dot_export_names_vertices() {
        let p = worked_example();
        let r = build_abstraction(&p, &p.initial_state());
        let dot = r.to_dot(&p);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("\"E_I:0\" [label=\"E_I:0\\ngen 0\""));
        assert!(dot.contains("\"E_II:0\" -> \"E_I:3\" [label=\"d (2)\""));
    }

    #[test]
    fn transfer_line_prefers_feeding_the_line() {
        let ast = crate::fsp::parse(&crate::bench::generate_transfer_line(2, 1, 1)).unwrap();
        let p = crate::fsp::elaborate(&ast, &Default::default())
            .unwrap()
            .problem;
        let rank = rank_actions(&p, &p.initial_state());
        let first = &rank.actions[0];
        assert_eq!(p.model().label(first.label).to_string(), "get.0");
        assert!(first.estimate.is_finite());
        assert!(rank.actions[1..]
            .iter()
            .all(|a| a.estimate > first.estimate));
    }
}
