use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jitshop_cli::commands::{
    self, bench, crosscheck, lift_doc, reduce_ksum, render_bench, render_result, Algorithm,
    BenchSpec, CrosscheckSpec, ReduceKind,
};
use jitshop_cli::format::{
    instance_to_string, read_instance_doc, read_schedule, schedule_to_string, InstanceDoc,
};
use jitshop_cli::{exit_code, gantt, generate, GeneratorSpec};
use jitshop_core::{verify_schedule, KSumInstance, Verification};

/// Exact solvers for just-in-time flow-shop scheduling.
#[derive(Parser)]
#[command(name = "jitshop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the optimal JIT set and its schedule.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "xp")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the witness schedule as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a Gantt chart of the witness.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check a schedule file against an instance. Exits 1 if infeasible.
    Verify { instance: PathBuf, schedule: PathBuf },
    /// Generate a random instance.
    Generate(GenerateArgs),
    /// Build a scheduling instance from kSUM data or lift a two-machine one.
    Reduce(ReduceArgs),
    /// Compare all solvers against the exhaustive oracle on random instances
    /// and check the kSUM constructions. Exits 1 if any case fails.
    Crosscheck(CrosscheckArgs),
    /// Time a solver on instances of growing size.
    Bench {
        #[arg(long, value_enum, default_value = "xp")]
        algorithm: Algorithm,
        /// Comma-separated job counts.
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 40])]
        n: Vec<usize>,
        /// #d for xp and oracle, k for the fpt solvers.
        #[arg(long, default_value_t = 2)]
        param: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the rows as JSON instead of a table on stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a schedule file as an SVG Gantt chart.
    Gantt {
        instance: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 2)]
    machines: usize,
    #[arg(long)]
    jobs: usize,
    #[arg(long)]
    distinct_dues: usize,
    #[arg(long)]
    distinct_p1: Option<usize>,
    #[arg(long)]
    distinct_weights: Option<usize>,
    /// Inclusive range as LO:HI.
    #[arg(long, value_parser = parse_range, default_value = "1:10")]
    p_range: (i64, i64),
    #[arg(long, value_parser = parse_range, default_value = "1:100")]
    d_range: (i64, i64),
    #[arg(long, value_parser = parse_range, default_value = "1:10")]
    w_range: (i64, i64),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(value_enum)]
    kind: ReduceKind,
    /// kSUM values, comma separated.
    #[arg(long, value_delimiter = ',')]
    values: Vec<i64>,
    #[arg(long)]
    k: Option<usize>,
    /// kSUM target B.
    #[arg(long)]
    target: Option<i64>,
    /// For ksum-f3, require only that all generated numbers are positive.
    #[arg(long)]
    relaxed: bool,
    /// Two-machine instance file for f2-f3.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// First seed of the corpus.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_jobs: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3])]
    machines: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    max_proc: i64,
    #[arg(long, default_value_t = 12)]
    max_value: i64,
    /// Largest kSUM size in the reduction sweep, 0 to skip it.
    #[arg(long, default_value_t = 3)]
    ksum_max_h: usize,
    #[arg(long, default_value_t = 4)]
    ksum_max_value: i64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    Ok((lo, hi))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            instance,
            algorithm,
            workers,
            out,
            svg,
        } => {
            let inst = read_instance_doc(&instance)?.instance;
            let res = commands::solve(&inst, algorithm, workers)?;
            print!("{}", render_result(&inst, algorithm, &res)?);
            if let Some(path) = out {
                emit(Some(&path), &schedule_to_string(&res.witness))?;
            }
            if let Some(path) = svg {
                emit(Some(&path), &gantt::render_svg(&inst, &res.witness)?)?;
            }
        }
        Command::Verify { instance, schedule } => {
            let inst = read_instance_doc(&instance)?.instance;
            let sched = read_schedule(&schedule)?;
            match verify_schedule(&inst, &sched)? {
                Verification::Feasible => println!("feasible, value {}", sched.value(&inst)?),
                Verification::Infeasible(v) => {
                    println!("infeasible: {v}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Generate(a) => {
            let spec = GeneratorSpec {
                machines: a.machines,
                jobs: a.jobs,
                distinct_dues: a.distinct_dues,
                distinct_p1: a.distinct_p1,
                distinct_weights: a.distinct_weights,
                p_range: a.p_range,
                d_range: a.d_range,
                w_range: a.w_range,
                seed: a.seed,
            };
            let inst = generate(&spec)?;
            emit(a.out.as_deref(), &instance_to_string(&InstanceDoc::from(inst)))?;
        }
        Command::Reduce(a) => {
            let doc = if a.kind == ReduceKind::F2F3 {
                let Some(input) = &a.input else {
                    bail!("f2-f3 needs --input");
                };
                lift_doc(&read_instance_doc(input)?)?
            } else {
                let (Some(k), Some(target)) = (a.k, a.target) else {
                    bail!("ksum reductions need --values, --k and --target");
                };
                let ks = KSumInstance {
                    values: a.values,
                    k,
                    target,
                };
                let red = reduce_ksum(a.kind, &ks, a.relaxed)?;
                eprintln!("threshold {} (T = {})", red.threshold, red.big_t);
                InstanceDoc {
                    instance: red.instance,
                    provenance: Some(red.provenance),
                }
            };
            emit(a.out.as_deref(), &instance_to_string(&doc))?;
        }
        Command::Crosscheck(a) => {
            let spec = CrosscheckSpec {
                seeds: a.seeds,
                first_seed: a.seed,
                max_jobs: a.max_jobs,
                machines: a.machines,
                max_proc: a.max_proc,
                max_value: a.max_value,
                ksum_max_h: a.ksum_max_h,
                ksum_max_value: a.ksum_max_value,
                workers: a.workers,
            };
            let report = crosscheck(&spec)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(a.out.as_deref(), &text)?;
            eprintln!("{} passed, {} failed", report.passed, report.failed);
            if !report.all_pass() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench {
            algorithm,
            n,
            param,
            seed,
            workers,
            out,
        } => {
            let rows = bench(&BenchSpec {
                algorithm,
                ns: n,
                param,
                seed,
                workers,
            })?;
            match out {
                Some(path) => emit(Some(&path), &serde_json::to_string_pretty(&rows)?)?,
                None => print!("{}", render_bench(&rows)),
            }
        }
        Command::Gantt {
            instance,
            schedule,
            svg,
        } => {
            let inst = read_instance_doc(&instance)?.instance;
            let sched = read_schedule(&schedule)?;
            emit(Some(&svg), &gantt::render_svg(&inst, &sched)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
