use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmhm_core::benchgen::{gen_p1, gen_p2, gen_p3, Benchmark, P2Options, Workload};
use mmhm_core::engine::{EngineConfig, GateConfig, PolicyParams};
use mmhm_core::harness::{
    compare, first_disagreement, format_table, render_svg, run_method, summarize, write_csv,
    Method, RunError, RunOptions, RunRecord,
};
use mmhm_core::{EngineError, SimplicialComplex};

#[derive(Parser)]
#[command(
    name = "mmhm",
    version,
    about = "Dynamic GF(2) homology with Morse compression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a workload through one method
    Run {
        benchmark: Benchmark,
        #[arg(long, default_value = "mmhm")]
        method: Method,
        #[command(flatten)]
        common: Common,
        /// Write the final complex in the text format
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
    /// Replay the same workload through several methods
    Compare {
        benchmark: Benchmark,
        #[arg(required = true)]
        methods: Vec<Method>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the event log of a workload
    Gen {
        benchmark: Benchmark,
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Also write the initial complex in the text format
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
}

#[derive(Args)]
struct WorkloadArgs {
    /// Number of update events
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// P3 port count
    #[arg(long, default_value_t = 3)]
    ports: usize,
    /// P3 subdivision level of the octahedral shell
    #[arg(long, default_value_t = 3)]
    subdiv: usize,
    /// P2 cube resolution
    #[arg(long, default_value_t = 2)]
    grid: usize,
    /// P2 number of tetrahedra eligible for refinement
    #[arg(long, default_value_t = 1)]
    region: usize,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Periodic recompression interval m
    #[arg(long, default_value_t = 32)]
    recompress_every: u64,
    /// Locality threshold tau
    #[arg(long, default_value_t = 0.30)]
    tau: f64,
    /// Comma list of beta0, beta2, beta1-genus0, or "none"; defaults per benchmark
    #[arg(long)]
    gates: Option<GateConfig>,
    /// Check every engine answer against the oracle while running
    #[arg(long)]
    paranoid: bool,
    /// Check every step against the oracle after the timed run
    #[arg(long)]
    verify: bool,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Mismatch(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Mismatch(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let msg = e.to_string();
        match e {
            RunError::Mismatch { .. } => Failure::Mismatch(msg),
            RunError::Oracle(_) | RunError::TooFewMethods => Failure::Usage(msg),
            RunError::Method { source, .. } => match source {
                EngineError::Inconsistent { .. } => Failure::Mismatch(msg),
                EngineError::Oracle(_) | EngineError::Policy(_) => Failure::Usage(msg),
                EngineError::Complex(_) | EngineError::Morse(_) | EngineError::Matrix(_) => {
                    Failure::Internal(msg)
                }
            },
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn build_workload(b: Benchmark, a: &WorkloadArgs) -> Result<Workload, Failure> {
    let w = match b {
        Benchmark::P1 => gen_p1(a.steps),
        Benchmark::P2 => gen_p2(
            a.steps,
            a.seed,
            P2Options {
                grid: a.grid,
                region: a.region,
            },
        ),
        Benchmark::P3 => gen_p3(a.ports, a.subdiv, a.steps, a.seed),
    };
    w.map_err(|e| Failure::Usage(e.to_string()))
}

fn options(b: Benchmark, c: &Common) -> Result<RunOptions, Failure> {
    let policy =
        PolicyParams::new(c.recompress_every, c.tau).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(RunOptions {
        engine: EngineConfig {
            policy,
            gates: c.gates.unwrap_or_else(|| b.default_gates()),
            paranoid: c.paranoid,
            ..EngineConfig::default()
        },
        verify: c.verify,
    })
}

fn write_outputs(c: &Common, runs: &[Vec<RunRecord>], title: &str) -> Result<(), Failure> {
    if let Some(path) = &c.csv {
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = BufWriter::new(f);
        let all: Vec<RunRecord> = runs.iter().flatten().cloned().collect();
        write_csv(&mut w, &all).map_err(|e| io_err(path, e))?;
    }
    if let Some(path) = &c.svg {
        std::fs::write(path, render_svg(runs, title)).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

fn write_complex(path: &Path, k: &SimplicialComplex) -> Result<(), Failure> {
    std::fs::write(path, k.to_text()).map_err(|e| io_err(path, e))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Run {
            benchmark,
            method,
            common,
            dump,
        } => {
            let w = build_workload(benchmark, &common.workload)?;
            let opts = options(benchmark, &common)?;
            let records = run_method(method, &w, &opts)?;
            let runs = [records];
            write_outputs(&common, &runs, &format!("{benchmark} {}", method.label()))?;
            if let Some(path) = &dump {
                let mut k = w.initial.clone();
                for e in &w.events {
                    k.apply_event(e)
                        .map_err(|e| Failure::Internal(e.to_string()))?;
                }
                write_complex(path, &k)?;
            }
            let last = runs[0].last().map(|r| r.betti()).unwrap_or_default();
            let _ = write!(out, "{}", format_table(&[summarize(&runs[0])]));
            let _ = writeln!(out, "final betti {last}");
            if opts.verify {
                let _ = writeln!(out, "verified {} steps against the oracle", w.steps() + 1);
            }
        }
        Command::Compare {
            benchmark,
            methods,
            common,
        } => {
            let w = build_workload(benchmark, &common.workload)?;
            let opts = options(benchmark, &common)?;
            let runs = compare(&methods, &w, &opts)?;
            write_outputs(&common, &runs, &format!("{benchmark} compare"))?;
            let summaries: Vec<_> = runs.iter().map(|r| summarize(r)).collect();
            let _ = write!(out, "{}", format_table(&summaries));
            if let Some((step, row)) = first_disagreement(&runs) {
                let detail: Vec<String> = row.iter().map(|(m, b)| format!("{m}={b}")).collect();
                return Err(Failure::Mismatch(format!(
                    "methods disagree at step {step}: {}",
                    detail.join(" ")
                )));
            }
            let _ = writeln!(out, "betti traces agree across {} methods", runs.len());
        }
        Command::Gen {
            benchmark,
            workload,
            dump,
        } => {
            let w = build_workload(benchmark, &workload)?;
            if let Some(path) = &dump {
                write_complex(path, &w.initial)?;
            }
            let _ = write!(out, "{}", w.to_log());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
