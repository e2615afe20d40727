//! `mms`: solve, verify and explore maximin-share allocation instances.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mms_core::extremal::{best_ratio, build_submodular_counterexample, build_xos_counterexample};
use mms_core::generate::{generate, GenKind};
use mms_core::mms::{mms_additive_lb, mms_exact};
use mms_core::solver::{solve, Algorithm};
use mms_core::verify::{verify, MmsSource};
use mms_core::xos::mms_partition_xos;
use mms_core::{Allocation, Instance, Value};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "mms", version, about = "Approximate maximin-share allocation of indivisible goods")]
struct Cli {
    /// Seed for generated instances (bench uses seed, seed+1, ...).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Target fraction of the maximin share, e.g. 3/4.
    #[arg(long, global = true)]
    alpha: Option<Value>,
    /// Write the main result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an allocation.
    Solve {
        #[arg(long, value_parser = parse_alg)]
        alg: Algorithm,
        #[arg(long)]
        input: PathBuf,
        /// Check the allocation against exact shares and print the report.
        #[arg(long)]
        verify: bool,
    },
    /// Maximin share of one agent.
    Mms(MmsArgs),
    /// Check an allocation against exact or supplied shares.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        /// JSON array of shares, one per agent, instead of exact ones.
        #[arg(long)]
        shares: Option<PathBuf>,
    },
    /// Generate a random instance.
    Gen {
        #[arg(long, value_parser = parse_kind)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Upper-bound instances.
    Extremal {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Also search all allocations for the best achievable ratio.
        #[arg(long)]
        check: bool,
    },
    /// Run solvers on generated instances and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct MmsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    agent: usize,
    #[arg(long)]
    parts: Option<usize>,
    #[arg(long, conflicts_with = "lb")]
    exact: bool,
    /// Certified lower bound for additive agents with precision eps.
    #[arg(long)]
    lb: Option<Value>,
    /// Bundles each worth 1/8 of the share, for an XOS agent.
    #[arg(long, conflicts_with_all = ["lb", "exact"])]
    xos_partition: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON file: {"runs": [{"algorithm", "generator", "n", "m", "trials"}]}.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_alg, requires_all = ["kind", "n", "m"])]
    alg: Option<Algorithm>,
    #[arg(long, value_parser = parse_kind)]
    kind: Option<GenKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Submodular,
    Xos,
}

#[derive(Deserialize)]
struct BenchConfig {
    #[serde(default)]
    runs: Vec<BenchRun>,
}

#[derive(Deserialize)]
struct BenchRun {
    algorithm: String,
    generator: String,
    n: usize,
    m: usize,
    #[serde(default = "one")]
    trials: usize,
}

fn one() -> usize {
    1
}

fn parse_alg(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: mms_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<GenKind, String> {
    s.parse().map_err(|e: mms_core::Error| e.to_string())
}

/// Outcome of a command that ran to completion.
enum Status {
    Pass,
    GuaranteeFail,
}

fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Instance::from_json(&text)?)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn report(inst: &Instance, alloc: &Allocation, alpha: &Value, source: &MmsSource) -> Result<Status> {
    let r = verify(inst, alloc, alpha, source)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(if r.pass { Status::Pass } else { Status::GuaranteeFail })
}

fn run(cli: Cli) -> Result<Status> {
    let out = cli.output.as_deref();
    match cli.command {
        Command::Solve { alg, input, verify } => {
            let inst = read_instance(&input)?;
            let solved = solve(&inst, alg)?;
            let alpha = cli.alpha.unwrap_or_else(|| alg.alpha());
            if verify {
                if let Some(p) = out {
                    emit(Some(p), &solved.allocation.to_json())?;
                }
                return report(&inst, &solved.allocation, &alpha, &MmsSource::Exact);
            }
            emit(out, &solved.allocation.to_json())?;
        }
        Command::Mms(a) => {
            let inst = read_instance(&a.input)?;
            let Some(v) = inst.valuations.get(a.agent) else {
                bail!(mms_core::Error::Input(format!("no agent {} in an instance with {} agents", a.agent, inst.n)));
            };
            let parts = a.parts.unwrap_or(inst.n);
            let text = if a.xos_partition {
                let bundles = mms_partition_xos(v, parts)?;
                let values: Vec<Value> = bundles.iter().map(|b| v.value(b.items())).collect();
                json!({ "bundles": bundles, "values": values })
            } else if let Some(eps) = &a.lb {
                let values = v
                    .additive_values()
                    .ok_or_else(|| mms_core::Error::Unsupported("--lb needs an additive agent".into()))?;
                let r = mms_additive_lb(&values, parts, eps)?;
                json!({ "value": r.value, "witness": r.witness, "exact": false })
            } else {
                let r = mms_exact(v, parts, &inst.items())?;
                json!({ "value": r.value, "witness": r.witness, "exact": true })
            };
            emit(out, &serde_json::to_string(&text)?)?;
        }
        Command::Verify { input, allocation, shares } => {
            let inst = read_instance(&input)?;
            let text = fs::read_to_string(&allocation).with_context(|| format!("reading {}", allocation.display()))?;
            let alloc = Allocation::from_json(&text)?;
            let source = match shares {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    MmsSource::Provided(serde_json::from_str::<Vec<Value>>(&text).map_err(mms_core::Error::from)?)
                }
                None => MmsSource::Exact,
            };
            let alpha = cli.alpha.unwrap_or_else(Value::one);
            return report(&inst, &alloc, &alpha, &source);
        }
        Command::Gen { kind, n, m } => {
            emit(out, &generate(kind, n, m, cli.seed)?.to_json())?;
        }
        Command::Extremal { family, n, check } => {
            let inst = match family {
                Family::Submodular => build_submodular_counterexample(n)?,
                Family::Xos => build_xos_counterexample(n)?,
            };
            if check {
                let r = best_ratio(&inst)?;
                println!("{}", serde_json::to_string_pretty(&r)?);
            }
            emit(out, &inst.to_json())?;
        }
        Command::Bench(b) => {
            let runs = bench_runs(&b)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(BENCH_HEADER)?;
            let mut seed = cli.seed;
            for r in &runs {
                for _ in 0..r.trials {
                    w.write_record(bench_row(r, seed))?;
                    seed += 1;
                }
            }
            let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
            let text = String::from_utf8(bytes)?;
            emit(out, text.trim_end())?;
        }
    }
    Ok(Status::Pass)
}

const BENCH_HEADER: [&str; 10] = ["seed", "n", "m", "algorithm", "generator", "min_ratio", "pass", "steps", "wall_ms", "error"];

struct Run {
    alg: Algorithm,
    kind: GenKind,
    n: usize,
    m: usize,
    trials: usize,
}

fn bench_runs(b: &BenchArgs) -> Result<Vec<Run>> {
    let mut runs = Vec::new();
    if let Some(p) = &b.config {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let cfg: BenchConfig = serde_json::from_str(&text).map_err(mms_core::Error::from)?;
        for r in cfg.runs {
            runs.push(Run { alg: r.algorithm.parse()?, kind: r.generator.parse()?, n: r.n, m: r.m, trials: r.trials });
        }
    }
    if let (Some(alg), Some(kind), Some(n), Some(m)) = (b.alg, b.kind, b.n, b.m) {
        runs.push(Run { alg, kind, n, m, trials: b.trials });
    }
    Ok(runs)
}

/// One CSV row; failures are recorded in the row rather than aborting.
fn bench_row(r: &Run, seed: u64) -> Vec<String> {
    let t = Instant::now();
    let outcome = generate(r.kind, r.n, r.m, seed).and_then(|inst| {
        let solved = solve(&inst, r.alg)?;
        let report = verify(&inst, &solved.allocation, &r.alg.alpha(), &MmsSource::Exact)?;
        Ok((report, solved.steps))
    });
    let ms = format!("{:.3}", t.elapsed().as_secs_f64() * 1000.0);
    let mut row = vec![seed.to_string(), r.n.to_string(), r.m.to_string(), r.alg.to_string(), r.kind.to_string()];
    match outcome {
        Ok((report, steps)) => {
            row.extend([report.min_ratio.to_string(), report.pass.to_string(), steps.to_string(), ms, String::new()])
        }
        Err(e) => row.extend([String::new(), "false".into(), String::new(), ms, e.to_string()]),
    }
    row
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use mms_core::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::Guarantee(_) | E::Infeasible(_) | E::EstimateTooHigh { .. }) => 1,
        Some(E::Capacity(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::GuaranteeFail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
