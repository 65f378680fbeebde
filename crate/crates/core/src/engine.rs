//! On-the-fly best-first AND/OR exploration of the composition.
//!
//! Nodes are composite states. Controllable nodes need one successful
//! successor; uncontrollable and mixed nodes need all their uncontrollable
//! successors to succeed. The open queue is ordered by the heuristic estimate
//! of each node's best unexplored action, ties popping the most recent entry.
//! When a node is marked, the mark propagates to its parents until it reaches
//! a parent that still has unexplored actions and could overturn it; such a
//! parent is put back in the queue.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::abstraction::{rank_actions, ActionRanking, Estimate};
use crate::label::LabelId;
use crate::lts::{Lts, LtsBuilder};
use crate::model::{CompositeState, ControlProblem, StateClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Open,
    Goal,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum EdgeTarget {
    /// Safe reach step; the target is not explored.
    Discharge(CompositeState),
    Violation,
    Child(usize),
}

#[derive(Debug, Clone)]
struct Edge {
    label: LabelId,
    target: EdgeTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Good,
    Bad,
    Pending,
}

#[derive(Debug, Clone)]
struct Node {
    state: CompositeState,
    class: StateClass,
    ranking: ActionRanking,
    /// Indices into `ranking.actions`, in expansion order.
    order: Vec<usize>,
    cursor: usize,
    status: Status,
    parents: Vec<usize>,
    edges: Vec<Edge>,
    witness: Option<usize>,
    goal_time: u64,
    queued: Option<u64>,
}

impl Node {
    fn has_unexplored(&self) -> bool {
        self.cursor < self.order.len()
    }

    fn best_remaining(&self) -> Estimate {
        self.order[self.cursor..]
            .iter()
            .map(|&i| self.ranking.actions[i].estimate)
            .min()
            .unwrap_or(Estimate::Infinite)
    }

    fn is_controllable(&self) -> bool {
        self.class == StateClass::Controllable
    }
}

/// Caps on a synthesis run.
#[derive(Debug, Clone, Default)]
pub struct SynthesisOptions {
    pub max_expansions: Option<u64>,
    pub timeout: Option<Duration>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisStats {
    /// Distinct composite states expanded at least once.
    pub expanded: u64,
    pub abstractions_built: u64,
    pub peak_open: u64,
    pub wall_ms: u64,
    /// `controller`, `none`, or the cap that stopped the run.
    pub verdict: String,
}

impl SynthesisStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error("expansion limit of {limit} reached")]
    ExpansionLimit { limit: u64, stats: SynthesisStats },
    #[error("timeout after {}s", limit.as_secs_f64())]
    Timeout {
        limit: Duration,
        stats: SynthesisStats,
    },
}

impl SynthesisError {
    pub fn stats(&self) -> &SynthesisStats {
        match self {
            SynthesisError::ExpansionLimit { stats, .. }
            | SynthesisError::Timeout { stats, .. } => stats,
        }
    }
}

/// A controller as an LTS over the composition alphabet; `states[i]` is the
/// composite state controller state `i` stands for.
#[derive(Debug, Clone)]
pub struct Controller {
    pub lts: Lts,
    pub states: Vec<CompositeState>,
}

#[derive(Debug, Clone)]
pub enum Synthesis {
    Controller(Controller),
    NoController,
}

impl Synthesis {
    pub fn controller(&self) -> Option<&Controller> {
        match self {
            Synthesis::Controller(c) => Some(c),
            Synthesis::NoController => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisRun {
    pub result: Synthesis,
    pub stats: SynthesisStats,
}

/// Exploration state of one synthesis run.
pub struct Exploration<'a> {
    problem: &'a ControlProblem,
    nodes: Vec<Node>,
    index: HashMap<CompositeState, usize>,
    queue: BinaryHeap<(Reverse<Estimate>, u64, usize)>,
    seq: u64,
    clock: u64,
    expanded: u64,
    abstractions: u64,
    peak_open: u64,
}

impl<'a> Exploration<'a> {
    pub fn new(problem: &'a ControlProblem) -> Self {
        let mut ex = Exploration {
            problem,
            nodes: Vec::new(),
            index: HashMap::new(),
            queue: BinaryHeap::new(),
            seq: 0,
            clock: 0,
            expanded: 0,
            abstractions: 0,
            peak_open: 0,
        };
        let root = ex.node_for(problem.initial_state());
        ex.settle_new(root);
        ex
    }

    pub fn root_status(&self) -> Status {
        self.nodes[0].status
    }

    pub fn status_of(&self, cs: &CompositeState) -> Option<Status> {
        self.index.get(cs).map(|&n| self.nodes[n].status)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn node_for(&mut self, cs: CompositeState) -> usize {
        if let Some(&n) = self.index.get(&cs) {
            return n;
        }
        let ranking = if self.problem.model().is_error(&cs) {
            ActionRanking::default()
        } else {
            self.abstractions += 1;
            rank_actions(self.problem, &cs)
        };
        let class = crate::model::classify_enabled(
            self.problem,
            &ranking
                .actions
                .iter()
                .map(|a| (a.label, a.target.clone()))
                .collect::<Vec<_>>(),
        );
        let mut order: Vec<usize> = (0..ranking.actions.len())
            .filter(|&i| {
                class == StateClass::Controllable
                    || !self.problem.is_controllable(ranking.actions[i].label)
            })
            .collect();
        if class.is_uncontrollable_like() {
            order.reverse();
        }
        let n = self.nodes.len();
        self.nodes.push(Node {
            state: cs.clone(),
            class,
            ranking,
            order,
            cursor: 0,
            status: Status::Open,
            parents: Vec::new(),
            edges: Vec::new(),
            witness: None,
            goal_time: 0,
            queued: None,
        });
        self.index.insert(cs, n);
        n
    }

    /// Marks a freshly created node that is decided on sight, or queues it.
    fn settle_new(&mut self, n: usize) {
        if self.nodes[n].class == StateClass::Deadlock {
            self.mark(n, Status::Error, None);
        } else {
            self.enqueue(n);
        }
    }

    fn enqueue(&mut self, n: usize) {
        let node = &self.nodes[n];
        if node.status != Status::Open || !node.has_unexplored() {
            return;
        }
        let est = node.best_remaining();
        self.seq += 1;
        self.nodes[n].queued = Some(self.seq);
        self.queue.push((Reverse(est), self.seq, n));
        self.peak_open = self.peak_open.max(self.queue.len() as u64);
    }

    fn pop(&mut self) -> Option<usize> {
        while let Some((_, seq, n)) = self.queue.pop() {
            let node = &self.nodes[n];
            if node.queued == Some(seq) && node.status == Status::Open && node.has_unexplored() {
                self.nodes[n].queued = None;
                return Some(n);
            }
        }
        None
    }

    fn outcome(&self, e: &Edge) -> Outcome {
        match &e.target {
            EdgeTarget::Discharge(_) => Outcome::Good,
            EdgeTarget::Violation => Outcome::Bad,
            EdgeTarget::Child(c) => match self.nodes[*c].status {
                Status::Goal => Outcome::Good,
                Status::Error => Outcome::Bad,
                Status::Open => Outcome::Pending,
            },
        }
    }

    /// Applies the marking rules to an open node, returning its new status
    /// and, for controllable goals, the witnessing edge.
    fn evaluate(&self, n: usize) -> (Status, Option<usize>) {
        let node = &self.nodes[n];
        let outcomes: Vec<Outcome> = node.edges.iter().map(|e| self.outcome(e)).collect();
        if node.is_controllable() {
            if let Some(w) = outcomes.iter().position(|&o| o == Outcome::Good) {
                return (Status::Goal, Some(w));
            }
            if !node.has_unexplored() && outcomes.iter().all(|&o| o == Outcome::Bad) {
                return (Status::Error, None);
            }
        } else {
            if outcomes.contains(&Outcome::Bad) {
                return (Status::Error, None);
            }
            if !node.has_unexplored() && outcomes.iter().all(|&o| o == Outcome::Good) {
                return (Status::Goal, None);
            }
        }
        (Status::Open, None)
    }

    fn mark(&mut self, n: usize, status: Status, witness: Option<usize>) {
        let mut work = VecDeque::new();
        self.set_status(n, status, witness);
        work.push_back(n);
        while let Some(m) = work.pop_front() {
            let parents = self.nodes[m].parents.clone();
            let changed = self.nodes[m].status;
            for p in parents {
                if self.nodes[p].status != Status::Open {
                    continue;
                }
                match self.evaluate(p) {
                    (Status::Open, _) => {
                        let interrupts = match changed {
                            Status::Error => self.nodes[p].is_controllable(),
                            _ => !self.nodes[p].is_controllable(),
                        };
                        if interrupts && self.nodes[p].queued.is_none() {
                            self.enqueue(p);
                        }
                    }
                    (s, w) => {
                        self.set_status(p, s, w);
                        work.push_back(p);
                    }
                }
            }
        }
    }

    fn set_status(&mut self, n: usize, status: Status, witness: Option<usize>) {
        self.clock += 1;
        let node = &mut self.nodes[n];
        debug_assert_eq!(node.status, Status::Open);
        node.status = status;
        node.witness = witness;
        node.goal_time = self.clock;
        node.queued = None;
    }

    /// Expands the next action of node `n`.
    fn expand(&mut self, n: usize) {
        let node = &mut self.nodes[n];
        if node.cursor == 0 {
            self.expanded += 1;
        }
        let action = node.ranking.actions[node.order[node.cursor]].clone();
        node.cursor += 1;
        let mut fresh = None;
        let target = if self.problem.is_violation(action.label, &action.target) {
            EdgeTarget::Violation
        } else if self.problem.is_reach(action.label) {
            EdgeTarget::Discharge(action.target.clone())
        } else {
            let existed = self.index.contains_key(&action.target);
            let child = self.node_for(action.target.clone());
            self.nodes[child].parents.push(n);
            if !existed {
                fresh = Some(child);
            }
            EdgeTarget::Child(child)
        };
        self.nodes[n].edges.push(Edge {
            label: action.label,
            target,
        });
        // Settled only now: its marking may propagate back to `n`, which must
        // already see the edge.
        if let Some(child) = fresh {
            self.settle_new(child);
        }
        if self.nodes[n].status != Status::Open {
            return;
        }
        match self.evaluate(n) {
            (Status::Open, _) => self.requeue_with_child(n),
            (s, w) => self.mark(n, s, w),
        }
    }

    /// Puts `n` back in the queue, then moves its newest child (if queued)
    /// in front of it so equal estimates dive deeper first.
    fn requeue_with_child(&mut self, n: usize) {
        self.enqueue(n);
        if let Some(EdgeTarget::Child(c)) = self.nodes[n].edges.last().map(|e| e.target.clone()) {
            if self.nodes[c].queued.is_some() {
                self.enqueue(c);
            }
        }
    }

    /// Runs until the initial state is marked or the queue is exhausted.
    pub fn run(&mut self, options: &SynthesisOptions) -> Result<(), SynthesisError> {
        let start = Instant::now();
        while self.root_status() == Status::Open {
            if let Some(limit) = options.max_expansions {
                if self.expanded >= limit {
                    return Err(SynthesisError::ExpansionLimit {
                        limit,
                        stats: self.stats(start, "expansion-limit"),
                    });
                }
            }
            if let Some(limit) = options.timeout {
                if start.elapsed() > limit {
                    return Err(SynthesisError::Timeout {
                        limit,
                        stats: self.stats(start, "timeout"),
                    });
                }
            }
            match self.pop() {
                Some(n) => self.expand(n),
                None => {
                    // What is left open can only wait on itself: no strategy
                    // from these states forces a discharge.
                    for i in 0..self.nodes.len() {
                        if self.nodes[i].status == Status::Open {
                            self.set_status(i, Status::Error, None);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn stats(&self, start: Instant, verdict: &str) -> SynthesisStats {
        SynthesisStats {
            expanded: self.expanded,
            abstractions_built: self.abstractions,
            peak_open: self.peak_open,
            wall_ms: start.elapsed().as_millis() as u64,
            verdict: verdict.to_string(),
        }
    }

    /// Edges of `n` kept in the controller: the witness at controllable
    /// nodes, every uncontrollable edge elsewhere; in label order.
    fn controller_edges(&self, n: usize) -> Vec<&Edge> {
        let node = &self.nodes[n];
        let mut edges: Vec<&Edge> = if node.is_controllable() {
            node.witness.map(|w| &node.edges[w]).into_iter().collect()
        } else {
            node.edges.iter().collect()
        };
        edges.sort_by_key(|e| e.label);
        edges
    }

    /// Controller over the goal-marked nodes reachable from the root.
    ///
    /// Following kept edges strictly decreases the time at which nodes were
    /// marked, so the only cycles are those closed by discharges.
    pub fn extract_controller(&self) -> Controller {
        assert_eq!(self.root_status(), Status::Goal, "root must be goal-marked");
        let mut included = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        included[0] = true;
        while let Some(n) = queue.pop_front() {
            for e in self.controller_edges(n) {
                if let EdgeTarget::Child(c) = e.target {
                    assert_eq!(
                        self.nodes[c].status,
                        Status::Goal,
                        "controller edge into a node that is not goal-marked"
                    );
                    assert!(self.nodes[c].goal_time < self.nodes[n].goal_time);
                    if !included[c] {
                        included[c] = true;
                        queue.push_back(c);
                    }
                }
            }
        }

        let model = self.problem.model();
        let mut builder = LtsBuilder::new("controller");
        builder.extend_alphabet(model.labels().iter().cloned());
        let mut states: Vec<CompositeState> = Vec::new();
        let mut number: HashMap<usize, usize> = HashMap::new();
        let mut terminals: HashMap<CompositeState, usize> = HashMap::new();
        let mut order = VecDeque::new();
        let name = |cs: &CompositeState| composite_name(self.problem, cs);
        let add = |cs: &CompositeState, b: &mut LtsBuilder, states: &mut Vec<CompositeState>| {
            states.push(cs.clone());
            b.add_state(name(cs))
        };
        number.insert(0, add(&self.nodes[0].state, &mut builder, &mut states));
        order.push_back(0usize);
        while let Some(n) = order.pop_front() {
            let from = number[&n];
            for e in self.controller_edges(n) {
                let node_target = match &e.target {
                    EdgeTarget::Child(c) => Some(*c),
                    EdgeTarget::Discharge(cs) => {
                        self.index.get(cs).copied().filter(|&c| included[c])
                    }
                    EdgeTarget::Violation => unreachable!("goal nodes keep no violating edge"),
                };
                let to = match (node_target, &e.target) {
                    (Some(c), _) => *number.entry(c).or_insert_with(|| {
                        order.push_back(c);
                        add(&self.nodes[c].state, &mut builder, &mut states)
                    }),
                    (None, EdgeTarget::Discharge(cs)) => *terminals
                        .entry(cs.clone())
                        .or_insert_with(|| add(cs, &mut builder, &mut states)),
                    _ => unreachable!(),
                };
                builder.add_transition(from, model.label(e.label).clone(), to);
            }
        }
        Controller {
            lts: builder.build().expect("controller is deterministic"),
            states,
        }
    }
}

fn composite_name(problem: &ControlProblem, cs: &CompositeState) -> String {
    let parts: Vec<&str> = cs
        .states()
        .iter()
        .zip(problem.model().components())
        .map(|(&s, c)| c.state_name(s as usize))
        .collect();
    format!("<{}>", parts.join(","))
}

/// Synthesizes a controller that forces a reach label while avoiding
/// violations, or reports that none exists.
pub fn synthesize(
    problem: &ControlProblem,
    options: &SynthesisOptions,
) -> Result<SynthesisRun, SynthesisError> {
    let start = Instant::now();
    let mut ex = Exploration::new(problem);
    ex.run(options)?;
    let result = match ex.root_status() {
        Status::Goal => Synthesis::Controller(ex.extract_controller()),
        _ => Synthesis::NoController,
    };
    let verdict = match result {
        Synthesis::Controller(_) => "controller",
        Synthesis::NoController => "none",
    };
    let stats = ex.stats(start, verdict);
    log::info!(
        "synthesis: {verdict}, {} expanded, {} abstractions",
        stats.expanded,
        stats.abstractions_built
    );
    Ok(SynthesisRun { result, stats })
}
