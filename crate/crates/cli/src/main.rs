use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use dcs_core::abstraction::build_abstraction;
use dcs_core::aut::{read_aut, write_aut};
use dcs_core::bench::{self, Engine, TlConfig, Verdict};
use dcs_core::compose::{compose_full, DEFAULT_STATE_CAP};
use dcs_core::engine::{synthesize, Synthesis, SynthesisOptions};
use dcs_core::fsp::{self, Bindings, Elaborated};
use dcs_core::oracle::{solve_monolithic, verify_controller};
use dcs_core::{Error, Lts};

const EXIT_NEGATIVE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "dcs", version, about = "Directed controller synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Input {
    /// FSP model with a problem directive block.
    file: PathBuf,
    /// Constant override, e.g. `--param M=2`.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    params: Vec<(String, i64)>,
}

#[derive(clap::Args)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Aut)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Aut,
    Dot,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineChoice {
    Dcs,
    Monolithic,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a controller with the directed engine.
    Synth {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        #[arg(long, value_name = "N")]
        max_expansions: Option<u64>,
        #[arg(long, value_name = "N")]
        timeout_s: Option<u64>,
        /// Also write the stats line to this file.
        #[arg(long, value_name = "FILE")]
        stats: Option<PathBuf>,
    },
    /// Solve the game on the explicit product.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "N", default_value_t = DEFAULT_STATE_CAP)]
        max_states: usize,
        #[arg(long, value_name = "FILE")]
        stats: Option<PathBuf>,
    },
    /// Check a controller in .aut form against the problem.
    Verify {
        #[command(flatten)]
        input: Input,
        controller: PathBuf,
    },
    /// Build the explicit product.
    Compose {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
        #[arg(long, value_name = "N", default_value_t = DEFAULT_STATE_CAP)]
        max_states: usize,
    },
    /// Run Transfer Line configurations and emit CSV.
    Bench {
        /// `M,W,C` triple; defaults to the 27-configuration small grid.
        #[arg(long = "config", value_name = "M,W,C", value_parser = parse_triple)]
        configs: Vec<(u32, u32, u32)>,
        #[arg(long, value_enum, default_value_t = EngineChoice::Dcs)]
        engine: EngineChoice,
        #[arg(long, value_name = "N", default_value_t = bench::DEFAULT_TIMEOUT.as_secs())]
        timeout_s: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// DOT of the abstracting path graph rooted at a composite state.
    Graph {
        #[command(flatten)]
        input: Input,
        /// Comma-separated component states (ids or names); defaults to the initial state.
        #[arg(long, value_name = "s0,s1,...")]
        at: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_param(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v = v
        .trim()
        .parse()
        .map_err(|_| format!("`{v}` is not an integer"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_triple(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected M,W,C, got `{s}`"))?;
    match parts[..] {
        [m, w, c] => Ok((m, w, c)),
        _ => Err(format!("expected M,W,C, got `{s}`")),
    }
}

enum Failure {
    Error(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DCS_LOG", "off"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error[E-USAGE]: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.code() == "E-CAP" {
                EXIT_CAP
            } else {
                EXIT_USAGE
            })
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Synth {
            input,
            output,
            max_expansions,
            timeout_s,
            stats,
        } => synth(&input, &output, max_expansions, timeout_s, stats.as_deref()),
        Command::Oracle {
            input,
            max_states,
            stats,
        } => oracle(&input, max_states, stats.as_deref()),
        Command::Verify { input, controller } => verify(&input, &controller),
        Command::Compose {
            input,
            output,
            max_states,
        } => {
            let el = load(&input)?;
            let lts = compose_full(el.problem.model(), max_states).map_err(Error::from)?;
            emit(&output, &render(&lts, output.format))?;
            Ok(0)
        }
        Command::Bench {
            configs,
            engine,
            timeout_s,
            output,
        } => run_bench(configs, engine, timeout_s, output.as_deref()),
        Command::Graph { input, at, output } => {
            let el = load(&input)?;
            let model = el.problem.model();
            let root = match &at {
                None => model.initial_state(),
                Some(text) => model.parse_composite(text).ok_or_else(|| {
                    Failure::Usage(format!(
                        "`{text}` does not name one state for each of the {} components",
                        model.num_components()
                    ))
                })?,
            };
            let dot = build_abstraction(&el.problem, &root).to_dot(&el.problem);
            write_out(output.as_deref(), &dot)?;
            Ok(0)
        }
    }
}

fn load(input: &Input) -> Result<Elaborated, Error> {
    let text = read(&input.file)?;
    let ast = fsp::parse(&text)?;
    let bindings: Bindings = input.params.iter().cloned().collect();
    Ok(fsp::elaborate(&ast, &bindings)?)
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p.display().to_string(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn emit(output: &Output, text: &str) -> Result<(), Error> {
    write_out(output.output.as_deref(), text)
}

fn emit_stats(line: &str, file: Option<&Path>) -> Result<(), Error> {
    eprintln!("{line}");
    match file {
        Some(p) => write_out(Some(p), &format!("{line}\n")),
        None => Ok(()),
    }
}

fn render(lts: &Lts, format: Format) -> String {
    match format {
        Format::Aut => write_aut(lts),
        Format::Dot => lts.to_dot(),
        Format::Json => {
            let transitions: Vec<_> = lts
                .iter_transitions()
                .map(|(s, l, t)| json!([s, l.to_string(), t]))
                .collect();
            let states: Vec<_> = (0..lts.num_states()).map(|s| lts.state_name(s)).collect();
            let value = json!({
                "name": lts.name(),
                "initial": lts.initial(),
                "states": states,
                "transitions": transitions,
            });
            format!("{value}\n")
        }
    }
}

fn synth(
    input: &Input,
    output: &Output,
    max_expansions: Option<u64>,
    timeout_s: Option<u64>,
    stats: Option<&Path>,
) -> Outcome {
    let el = load(input)?;
    let options = SynthesisOptions {
        max_expansions,
        timeout: timeout_s.map(Duration::from_secs),
    };
    match synthesize(&el.problem, &options) {
        Ok(run) => {
            emit_stats(&run.stats.to_json(), stats)?;
            match run.result {
                Synthesis::Controller(c) => {
                    emit(output, &render(&c.lts, output.format))?;
                    Ok(0)
                }
                Synthesis::NoController => {
                    eprintln!("no controller exists");
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Err(e) => {
            emit_stats(&e.stats().to_json(), stats)?;
            Err(Error::from(e).into())
        }
    }
}

fn oracle(input: &Input, max_states: usize, stats: Option<&Path>) -> Outcome {
    let el = load(input)?;
    let start = Instant::now();
    let solution = solve_monolithic(&el.problem, max_states).map_err(Error::from)?;
    let verdict = if solution.initial_winning() {
        "controller"
    } else {
        "none"
    };
    let line = json!({
        "product_states": solution.product.len(),
        "winning": solution.num_winning(),
        "wall_ms": start.elapsed().as_millis() as u64,
        "verdict": verdict,
    });
    emit_stats(&line.to_string(), stats)?;
    println!("verdict: {verdict}");
    println!(
        "winning states: {} of {}",
        solution.num_winning(),
        solution.product.len()
    );
    Ok(if solution.initial_winning() {
        0
    } else {
        EXIT_NEGATIVE
    })
}

fn verify(input: &Input, controller: &Path) -> Outcome {
    let el = load(input)?;
    let ctrl = read_aut("controller", &read(controller)?).map_err(Error::from)?;
    let report = verify_controller(&el.problem, &ctrl).map_err(Error::from)?;
    println!("closed-loop states: {}", report.closed_loop_states);
    for v in &report.violations {
        println!("violation: {v}");
    }
    if report.accepted() {
        println!("accepted");
        Ok(0)
    } else {
        println!("rejected: {} violation(s)", report.violations.len());
        Ok(EXIT_NEGATIVE)
    }
}

fn run_bench(
    configs: Vec<(u32, u32, u32)>,
    engine: EngineChoice,
    timeout_s: u64,
    output: Option<&Path>,
) -> Outcome {
    if timeout_s == 0 {
        return Err(Failure::Usage("--timeout-s must be positive".into()));
    }
    let engines: &[Engine] = match engine {
        EngineChoice::Dcs => &[Engine::Dcs],
        EngineChoice::Monolithic => &[Engine::Monolithic],
        EngineChoice::Both => &[Engine::Dcs, Engine::Monolithic],
    };
    let triples = if configs.is_empty() {
        TlConfig::small_grid(Engine::Dcs)
            .iter()
            .map(|c| (c.m, c.w, c.c))
            .collect()
    } else {
        configs
    };
    let mut plan = Vec::new();
    for (m, w, c) in triples {
        for &e in engines {
            let mut cfg = TlConfig::new(m, w, c, e);
            cfg.timeout = Duration::from_secs(timeout_s);
            plan.push(cfg);
        }
    }
    let rows = bench::run_bench(&plan).map_err(Error::from)?;
    let mut buf = Vec::new();
    bench::write_csv(&rows, &mut buf).map_err(Error::from)?;
    write_out(output, &String::from_utf8_lossy(&buf))?;
    let rejected = rows
        .iter()
        .filter(|r| r.verdict == Verdict::Rejected)
        .count();
    if rejected > 0 {
        eprintln!("{rejected} row(s) failed verification");
        return Ok(EXIT_NEGATIVE);
    }
    Ok(0)
}
