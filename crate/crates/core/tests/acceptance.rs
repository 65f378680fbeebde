//! Acceptance criteria 1-7, one PASS/FAIL line each.
//!
//! Lines are written straight to stdout so they show up without
//! `--nocapture`.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use dcs_core::abstraction::{build_abstraction, rank_actions, Estimate, VertexRef};
use dcs_core::aut::write_aut;
use dcs_core::bench::{self, Engine, TlConfig, Verdict};
use dcs_core::engine::{synthesize, SynthesisOptions};
use dcs_core::lts::lts_from_triples;
use dcs_core::oracle::{solve_monolithic, verify_controller};
use dcs_core::{ControlProblem, Label, LabelId, Lts};

use common::{product, random_problem, random_trace, rng, true_action_distance, true_distances};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn labels(names: &[&str]) -> BTreeSet<Label> {
    names.iter().map(|l| l.parse().unwrap()).collect()
}

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

/// A two-state component whose label `g` is the only reach label, so no
/// edge of the other components is a goal edge and every state enters the
/// frontier.
fn goal_elsewhere() -> Lts {
    lts_from_triples("G", 2, &[(0, "g", 1)]).unwrap()
}

fn names(p: &ControlProblem, set: &BTreeSet<LabelId>) -> Vec<String> {
    set.iter()
        .map(|&l| p.model().label(l).to_string())
        .filter(|l| l != "g")
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn frontier_states(sets: &[Vec<VertexRef>], component: usize) -> Vec<Vec<u32>> {
    sets.iter()
        .map(|f| {
            f.iter()
                .filter(|v| v.component == component)
                .map(|v| v.state)
                .collect()
        })
        .collect()
}

fn worked_example() -> Check {
    let start = Instant::now();
    let none = BTreeSet::new();

    let single = ControlProblem::new(
        vec![e_one(), goal_elsewhere()],
        &labels(&["a", "b", "d", "g"]),
        &labels(&["g"]),
        &none,
    )
    .unwrap();
    let r = build_abstraction(&single, &single.initial_state());
    let sets = frontier_states(r.frontiers(), 0);
    ensure(sets == [vec![0], vec![0, 1, 2], vec![0, 1, 2, 3]], || {
        format!("E_I sets {sets:?}")
    })?;
    let steps: Vec<_> = r.step_labels().iter().map(|s| names(&single, s)).collect();
    ensure(steps == [vec!["a", "b"], vec!["a", "b", "d"]], || {
        format!("E_I steps {steps:?}")
    })?;

    let both = ControlProblem::new(
        vec![e_one(), e_two(), goal_elsewhere()],
        &labels(&["a", "b", "c", "d", "g"]),
        &labels(&["g"]),
        &none,
    )
    .unwrap();
    let r = build_abstraction(&both, &both.initial_state());
    let joint: Vec<Vec<(usize, u32)>> = r
        .frontiers()
        .iter()
        .map(|f| {
            f.iter()
                .filter(|v| v.component < 2)
                .map(|v| (v.component, v.state))
                .collect()
        })
        .collect();
    let expected = vec![
        vec![(0, 0), (1, 0)],
        vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)],
        vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2)],
    ];
    ensure(joint == expected, || format!("composed sets {joint:?}"))?;

    let problem = ControlProblem::new(
        vec![e_one(), e_two()],
        &labels(&["a", "b", "c", "d"]),
        &labels(&["d"]),
        &none,
    )
    .unwrap();
    let root = problem.initial_state();
    let r = build_abstraction(&problem, &root);
    let steps: Vec<_> = r.step_labels().iter().map(|s| names(&problem, s)).collect();
    ensure(
        steps.len() >= 2 && steps[0] == ["a", "b", "c"] && steps[1] == ["a", "b", "c", "d"],
        || format!("composed steps {steps:?}"),
    )?;

    let gen = |c, s| r.generation(VertexRef::new(c, s));
    let gens = [
        gen(0, 0),
        gen(1, 0),
        gen(0, 1),
        gen(0, 2),
        gen(1, 1),
        gen(1, 2),
        gen(0, 3),
    ];
    let want = [0, 0, 1, 1, 1, 1, 2].map(Some);
    ensure(gens == want, || format!("generations {gens:?}"))?;

    let ranking = rank_actions(&problem, &root);
    let est = |l: &str| {
        let id = problem.model().label_id(&l.parse().unwrap()).unwrap();
        ranking.estimate_of(id)
    };
    let got = (est("a"), est("b"), est("c"), est("d"));
    let want = (
        Some(Estimate::Infinite),
        Some(Estimate::Finite(2)),
        Some(Estimate::Finite(2)),
        None,
    );
    ensure(got == want, || format!("ranking {got:?}"))?;

    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!(
        "sets, steps, generations and b:2 c:2 a:inf in {took:?}"
    ))
}

fn admissibility() -> Check {
    let start = Instant::now();
    let mut states = 0usize;
    let mut checked = 0usize;
    let mut violations = Vec::new();
    for seed in 0..common::SUITE_SIZE {
        let problem = random_problem(seed);
        let p = product(&problem);
        let dist = true_distances(&problem, &p);
        for (i, cs) in p.states.iter().enumerate() {
            states += 1;
            for a in &rank_actions(&problem, cs).actions {
                checked += 1;
                let truth = true_action_distance(&problem, &p, &dist, i, a.label);
                let ok = match (a.estimate, truth) {
                    (Estimate::Finite(e), Some(t)) => e <= t,
                    (Estimate::Finite(_), None) => true,
                    (Estimate::Infinite, t) => t.is_none(),
                };
                if !ok {
                    violations.push(format!(
                        "seed {seed} at {cs}: {:?} vs {truth:?}",
                        a.estimate
                    ));
                }
            }
        }
    }
    let took = start.elapsed();
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!(
        "{} problems, {states} states, {checked} estimates, 0 violations in {took:?}",
        common::SUITE_SIZE
    ))
}

fn size_bound() -> Check {
    let mut abstractions = 0usize;
    for seed in 0..common::SUITE_SIZE {
        let problem = random_problem(seed);
        let total: usize = problem
            .model()
            .components()
            .iter()
            .map(|c| c.num_states())
            .sum();
        for cs in &product(&problem).states {
            abstractions += 1;
            let growth = build_abstraction(&problem, cs).frontiers().len() - 1;
            ensure(growth <= total, || {
                format!("seed {seed} at {cs}: {growth} growth steps > {total}")
            })?;
        }
    }
    Ok(format!("{abstractions} abstractions, 0 violations"))
}

fn trace_containment() -> Check {
    let mut traces = 0usize;
    for seed in 0..common::SUITE_SIZE {
        let problem = random_problem(seed);
        let p = product(&problem);
        let a = build_abstraction(&problem, &problem.initial_state());
        let edges: HashSet<_> = a
            .edges()
            .iter()
            .map(|e| (e.source, e.label, e.target))
            .collect();
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..100 {
            traces += 1;
            for (from, l, to) in random_trace(&problem, &p, &mut r, 40) {
                for &c in problem.model().participants(l) {
                    let e = (
                        VertexRef::new(c, from.get(c) as u32),
                        l,
                        VertexRef::new(c, to.get(c) as u32),
                    );
                    ensure(edges.contains(&e), || {
                        format!("seed {seed}: step {from} -> {to} has no edge {e:?}")
                    })?;
                }
            }
        }
    }
    Ok(format!("{traces} traces replayed, 0 violations"))
}

fn agreement() -> Check {
    let mut controllers = 0;
    for seed in 0..common::SUITE_SIZE {
        let problem = random_problem(seed);
        let oracle = solve_monolithic(&problem, 1 << 20).unwrap();
        let run = synthesize(&problem, &SynthesisOptions::default()).unwrap();
        let found = run.result.controller();
        ensure(found.is_some() == oracle.initial_winning(), || {
            format!(
                "seed {seed}: engine {} but oracle {}",
                found.is_some(),
                oracle.initial_winning()
            )
        })?;
        if let Some(c) = found {
            controllers += 1;
            let report = verify_controller(&problem, &c.lts).unwrap();
            ensure(report.accepted(), || {
                format!("seed {seed}: rejected: {:?}", report.violations)
            })?;
        }
    }
    Ok(format!(
        "{} problems, {controllers} controllers verified, 0 disagreements",
        common::SUITE_SIZE
    ))
}

fn transfer_line_regression() -> Check {
    let start = Instant::now();
    let problem = bench::transfer_line_problem(2, 1, 1).map_err(|e| e.to_string())?;
    let run = synthesize(&problem, &SynthesisOptions::default()).unwrap();
    let c = run.result.controller().ok_or("no controller")?;
    let report = verify_controller(&problem, &c.lts).unwrap();
    ensure(report.accepted(), || {
        format!("rejected: {:?}", report.violations)
    })?;
    let expected = "des (0, 8, 7)\n\
                    (0,\"get.0\",1)\n(1,\"put.1\",2)\n(2,\"get.1\",3)\n(3,\"put.2\",4)\n\
                    (4,\"get.2\",5)\n(5,\"accept\",0)\n(5,\"ret.1\",6)\n(6,\"reject\",2)\n";
    let aut = write_aut(&c.lts);
    ensure(aut == expected, || format!("controller was\n{aut}"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(1), || format!("took {took:?}"))?;
    Ok(format!(
        "7 states, get.0 put.1 get.1 put.2 get.2 then accept / ret.1 reject, in {took:?}"
    ))
}

fn small_scale_table() -> Check {
    let start = Instant::now();
    let mut slowest = Duration::ZERO;
    let mut largest = (0, 0);
    for mut config in TlConfig::small_grid(Engine::Dcs) {
        config.timeout = Duration::from_secs(30);
        config.exact_limit = 0;
        let row_start = Instant::now();
        let row = bench::run_config(&config).map_err(|e| e.to_string())?;
        let took = row_start.elapsed();
        let tag = format!("({},{},{})", row.m, row.w, row.c);
        ensure(row.verdict == Verdict::Controller, || {
            format!("{tag}: verdict {}", row.verdict)
        })?;
        ensure(took <= Duration::from_secs(30), || {
            format!("{tag}: took {took:?}")
        })?;
        slowest = slowest.max(took);
        if (row.m, row.w, row.c) == (6, 3, 3) {
            ensure(row.expanded < 100_000, || {
                format!("{tag}: expanded {}", row.expanded)
            })?;
            largest = (row.expanded, row.product_bound as u64);
        }
    }
    let total = start.elapsed();
    ensure(total <= Duration::from_secs(600), || {
        format!("grid took {total:?}")
    })?;
    Ok(format!(
        "27/27 verified controllers, slowest row {slowest:?}, grid {total:?}, \
         (6,3,3) expanded {} of a {}-state product bound",
        largest.0, largest.1
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 7] = [
        ("worked-example fidelity", worked_example),
        ("admissibility", admissibility),
        ("abstraction size bound", size_bound),
        ("trace containment", trace_containment),
        ("engine/oracle agreement", agreement),
        ("transfer line regression", transfer_line_regression),
        ("small-scale table", small_scale_table),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let line = match &outcome {
            Ok(detail) => format!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => format!("criterion {}: FAIL {name}: {why}", i + 1),
        };
        writeln!(std::io::stdout().lock(), "{line}").unwrap();
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
