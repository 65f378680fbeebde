//! Transfer Line benchmark: instance generation and batch runs.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::compose::{CapExceeded, ExplicitProduct};
use crate::engine::{synthesize, Controller, SynthesisError, SynthesisOptions};
use crate::fsp::{self, Bindings, FspError};
use crate::model::ControlProblem;
use crate::oracle::{solve_monolithic, verify_controller};

/// The Transfer Line plant over free constants `M`, `W` and `C`.
pub const TRANSFER_LINE_MODEL: &str = "\
Machine(Id=0) = Working[0],
  Working[w:0..W] =
    (when (w < W) get[Id]   -> Working[w+1] |
     when (w > 0) put[Id+1] -> Working[w-1] ).

TU = Idle,
  Idle    = (get[M] -> Testing ),
  Testing = (ret[1] -> reject -> Idle |
             accept -> Idle)
            +{ret[0..M]}.

Buffer(Id=0) = At[0],
  At[c:0..C] = (
    when (c > 0) get[Id] -> At[c-1] |
    when (c = 0) get[Id] -> ERROR   |
    when (c < C) put[Id] -> At[c+1] |
    when (c = C) put[Id] -> ERROR   |
    when (c < C) ret[Id] -> At[c+1] |
    when (c = C) ret[Id] -> ERROR   ).

||Plant = (forall [m:0..M-1] (
    Machine(m) || Buffer(m+1)) || TU).
";

/// FSP text of the `(m, w, c)` instance: the constants, the plant and the
/// control problem (only `get` is controllable; testing must finish).
pub fn generate_transfer_line(m: u32, w: u32, c: u32) -> String {
    format!(
        "const M = {m}\nconst W = {w}\nconst C = {c}\n\n{TRANSFER_LINE_MODEL}\n\
         controllable {{get[0..M]}}\nreach {{accept, reject}}\navoid {{}}\ntarget Plant\n"
    )
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);
/// Reachable-state cap standing in for a memory limit.
pub const DEFAULT_STATE_LIMIT: usize = 5_000_000;
/// Largest product for which the exact reachable count is computed.
pub const DEFAULT_EXACT_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Dcs,
    Monolithic,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Dcs => "dcs",
            Engine::Monolithic => "monolithic",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dcs" => Ok(Engine::Dcs),
            "monolithic" => Ok(Engine::Monolithic),
            other => Err(format!(
                "unknown engine `{other}` (expected dcs or monolithic)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TlConfig {
    pub m: u32,
    pub w: u32,
    pub c: u32,
    pub engine: Engine,
    pub timeout: Duration,
    pub state_limit: usize,
    pub exact_limit: usize,
}

impl TlConfig {
    pub fn new(m: u32, w: u32, c: u32, engine: Engine) -> Self {
        TlConfig {
            m,
            w,
            c,
            engine,
            timeout: DEFAULT_TIMEOUT,
            state_limit: DEFAULT_STATE_LIMIT,
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }

    /// The 27 small-scale configurations, `M` outermost.
    pub fn small_grid(engine: Engine) -> Vec<TlConfig> {
        let mut out = Vec::new();
        for m in 4..=6 {
            for w in 1..=3 {
                for c in 1..=3 {
                    out.push(TlConfig::new(m, w, c, engine));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.m == 0 || self.w == 0 || self.c == 0 {
            return Err(BenchError::Parameters(self.m, self.w, self.c));
        }
        if self.timeout.is_zero() || self.state_limit == 0 {
            return Err(BenchError::Caps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Controller,
    None,
    Timeout,
    OutOfMemory,
    /// A controller was produced but the verifier rejected it.
    Rejected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Controller => "controller",
            Verdict::None => "none",
            Verdict::Timeout => "timeout",
            Verdict::OutOfMemory => "out-of-memory",
            Verdict::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "W")]
    pub w: u32,
    #[serde(rename = "C")]
    pub c: u32,
    pub engine: Engine,
    pub verdict: Verdict,
    pub wall_ms: u64,
    pub expanded: u64,
    pub controller_states: Option<u64>,
    pub product_bound: f64,
    pub product_exact: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("parameters must be positive, got M={0}, W={1}, C={2}")]
    Parameters(u32, u32, u32),
    #[error("caps must be positive")]
    Caps,
    #[error(transparent)]
    Fsp(#[from] FspError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Elaborates the `(m, w, c)` instance.
pub fn transfer_line_problem(m: u32, w: u32, c: u32) -> Result<ControlProblem, FspError> {
    let ast = fsp::parse(&generate_transfer_line(m, w, c))?;
    Ok(fsp::elaborate(&ast, &Bindings::new())?.problem)
}

/// Product of the component state counts.
pub fn product_bound(problem: &ControlProblem) -> f64 {
    problem
        .model()
        .components()
        .iter()
        .map(|c| c.num_states() as f64)
        .product()
}

/// Runs one configuration. Caps and verifier rejections become verdicts.
pub fn run_config(config: &TlConfig) -> Result<BenchRow, BenchError> {
    config.validate()?;
    let problem = transfer_line_problem(config.m, config.w, config.c)?;
    let product_exact = ExplicitProduct::build(problem.model(), config.exact_limit)
        .ok()
        .map(|p| p.len() as u64);
    let mut row = BenchRow {
        m: config.m,
        w: config.w,
        c: config.c,
        engine: config.engine,
        verdict: Verdict::None,
        wall_ms: 0,
        expanded: 0,
        controller_states: None,
        product_bound: product_bound(&problem),
        product_exact,
    };
    let controller = match config.engine {
        Engine::Dcs => run_dcs(&problem, config, &mut row),
        Engine::Monolithic => run_monolithic(&problem, config, &mut row),
    };
    if let Some(ctrl) = controller {
        row.controller_states = Some(ctrl.lts.num_states() as u64);
        row.verdict = match verify_controller(&problem, &ctrl.lts) {
            Ok(report) if report.accepted() => Verdict::Controller,
            Ok(report) => {
                log::error!(
                    "({},{},{}) {}: controller rejected: {:?}",
                    config.m,
                    config.w,
                    config.c,
                    config.engine,
                    report.violations
                );
                Verdict::Rejected
            }
            Err(e) => {
                log::error!(
                    "({},{},{}) {}: {e}",
                    config.m,
                    config.w,
                    config.c,
                    config.engine
                );
                Verdict::Rejected
            }
        };
    }
    log::info!(
        "({},{},{}) {}: {} in {} ms",
        config.m,
        config.w,
        config.c,
        config.engine,
        row.verdict,
        row.wall_ms
    );
    Ok(row)
}

fn run_dcs(problem: &ControlProblem, config: &TlConfig, row: &mut BenchRow) -> Option<Controller> {
    let options = SynthesisOptions {
        max_expansions: Some(config.state_limit as u64),
        timeout: Some(config.timeout),
    };
    match synthesize(problem, &options) {
        Ok(run) => {
            row.wall_ms = run.stats.wall_ms;
            row.expanded = run.stats.expanded;
            run.result.controller().cloned()
        }
        Err(e) => {
            row.wall_ms = e.stats().wall_ms;
            row.expanded = e.stats().expanded;
            row.verdict = match e {
                SynthesisError::Timeout { .. } => Verdict::Timeout,
                SynthesisError::ExpansionLimit { .. } => Verdict::OutOfMemory,
            };
            None
        }
    }
}

/// The fixpoint cannot be interrupted, so the timeout is judged afterwards.
fn run_monolithic(
    problem: &ControlProblem,
    config: &TlConfig,
    row: &mut BenchRow,
) -> Option<Controller> {
    let start = Instant::now();
    let result = solve_monolithic(problem, config.state_limit);
    let elapsed = start.elapsed();
    row.wall_ms = elapsed.as_millis() as u64;
    match result {
        Err(CapExceeded { cap }) => {
            row.expanded = cap as u64;
            row.verdict = Verdict::OutOfMemory;
            None
        }
        Ok(_) if elapsed > config.timeout => {
            row.verdict = Verdict::Timeout;
            None
        }
        Ok(solution) => {
            row.expanded = solution.product.len() as u64;
            solution.controller(problem)
        }
    }
}

/// Runs every configuration in order; per-row failures never stop the batch.
pub fn run_bench(configs: &[TlConfig]) -> Result<Vec<BenchRow>, BenchError> {
    configs.iter().map(run_config).collect()
}

pub fn write_csv<W: io::Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<BenchRow>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<BenchRow>, _>>()?;
    Ok(rows)
}
