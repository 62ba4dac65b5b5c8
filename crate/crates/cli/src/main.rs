use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pbxor::bench::{run_scaling, ChargePlacement, ScalingConfig, TotalCharge};
use pbxor::cdcl::{check_model, SolveResult, Solver, SolverConfig};
use pbxor::logging::ProofLogger;
use pbxor::proof_io::{read_cnf, read_opb, Formula, ProofReader};
use pbxor::verifier::{verify_observed, StepEffect, Verdict, VerifyOptions};
use pbxor::xor::Step2Mode;

#[derive(Parser)]
#[command(
    name = "pbxor",
    version,
    about = "Pseudo-Boolean proof checking and XOR-aware SAT solving"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a PBP proof against an OPB or DIMACS formula.
    Verify(VerifyArgs),
    /// Solve a DIMACS (or clausal OPB) formula, optionally writing a proof.
    Solve(SolveArgs),
    /// Check a model in `v` line format against a formula.
    CheckModel { formula: PathBuf, model: PathBuf },
    /// Benchmark families.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct VerifyArgs {
    formula: PathBuf,
    proof: PathBuf,
    /// Print checker counters.
    #[arg(long)]
    stats: bool,
    /// Echo the effect of the first N steps.
    #[arg(long, value_name = "N")]
    trace: Option<usize>,
    /// Fail unless the proof ends in a verified contradiction.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    /// Give up after this many seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Unsat,
}

#[derive(Args)]
struct SolveArgs {
    input: PathBuf,
    /// Write a PBP proof here.
    #[arg(long)]
    proof: Option<PathBuf>,
    /// Plain CDCL, without parity reasoning.
    #[arg(long)]
    no_xor: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    conflict_budget: Option<u64>,
    /// Seconds before giving up.
    #[arg(long)]
    timeout: Option<f64>,
    /// Largest parity arity to detect.
    #[arg(long, default_value_t = pbxor::xor::DEFAULT_K_MAX)]
    k_max: usize,
    /// Derive the brute-force translation lines with explicit cutting planes.
    #[arg(long)]
    explicit_step2: bool,
    /// Check every proof line while writing it (slow).
    #[arg(long)]
    self_check: bool,
    /// Print solver counters as comment lines.
    #[arg(long)]
    stats: bool,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Proof-size scaling on Tseitin formulas over random regular graphs.
    Tseitin(TseitinArgs),
}

#[derive(Args)]
struct TseitinArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    nodes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    degree: usize,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Per-instance budget in seconds, for solving and for verifying.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long)]
    threads: Option<usize>,
    /// Spread charges randomly instead of on a single node.
    #[arg(long)]
    random_charges: bool,
    /// Even total charge.
    #[arg(long)]
    even: bool,
    #[arg(long)]
    no_xor: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::Solve(args) => solve(args),
        Command::CheckModel { formula, model } => {
            let f = read_formula(&formula)?;
            let model = read_model(&model)?;
            match check_model(&f, &model) {
                None => {
                    println!("s MODEL OK");
                    Ok(ExitCode::SUCCESS)
                }
                Some(id) => {
                    println!("s MODEL FALSIFIES constraint {id}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Bench(BenchCommand::Tseitin(args)) => bench(args),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

/// OPB unless the extension or the first non-comment line says DIMACS.
fn read_formula(path: &Path) -> Result<Formula> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let dimacs = match ext.as_str() {
        "cnf" | "dimacs" => true,
        "opb" => false,
        _ => {
            let mut text = String::new();
            open(path)?.read_to_string(&mut text)?;
            let first = text
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty() && !l.starts_with('*') && !l.starts_with('c'));
            first.is_some_and(|l| l.starts_with("p cnf"))
        }
    };
    let f = if dimacs {
        read_cnf(open(path)?)
    } else {
        read_opb(open(path)?)
    };
    f.with_context(|| format!("reading {}", path.display()))
}

fn read_model(path: &Path) -> Result<Vec<bool>> {
    let mut model = Vec::new();
    for line in open(path)?.lines() {
        let line = line?;
        let Some(rest) = line.trim().strip_prefix('v') else {
            continue;
        };
        for tok in rest.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .with_context(|| format!("bad literal `{tok}`"))?;
            if lit == 0 {
                continue;
            }
            let idx = lit.unsigned_abs() as usize;
            if model.len() < idx {
                model.resize(idx, false);
            }
            model[idx - 1] = lit > 0;
        }
    }
    Ok(model)
}

fn deadline(seconds: Option<f64>) -> Option<Instant> {
    seconds.map(|s| Instant::now() + Duration::from_secs_f64(s))
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.formula)?;
    let reader = ProofReader::new(open(&args.proof)?);
    let start = Instant::now();
    let trace = args.trace.unwrap_or(0);
    let report = verify_observed(
        &formula,
        reader,
        VerifyOptions {
            deadline: deadline(args.timeout),
        },
        |index, step, effect| {
            if index <= trace {
                let what = match effect {
                    StepEffect::Header => "header".to_string(),
                    StepEffect::Loaded { count } => format!("loaded {count} constraints"),
                    StepEffect::Added { id } => format!("added id {id}"),
                    StepEffect::Deleted { count } => format!("deleted {count}"),
                    StepEffect::Concluded { id } => format!("concluded from id {id}"),
                };
                println!("c step {index} {}: {what}", step.keyword());
            }
        },
    );
    if args.stats {
        let s = report.stats;
        println!("c steps {}", s.steps);
        println!("c rup checks {}", s.rup_checks);
        println!("c redundancy checks {}", s.red_checks);
        println!("c pol operations {}", s.pol_operations);
        println!("c propagations {}", s.propagations);
        println!("c peak constraints {}", s.peak_constraints);
        println!("c time {:.3}s", start.elapsed().as_secs_f64());
    }
    let ok = match &report.verdict {
        Verdict::VerifiedUnsat => {
            println!("s VERIFIED UNSATISFIABLE");
            true
        }
        Verdict::AllStepsValid => {
            println!("s VALID (no contradiction derived)");
            args.expect.is_none()
        }
        Verdict::Rejected { step, line, reason } => {
            println!("s REJECTED at step {step} (line {line}): {reason}");
            false
        }
    };
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let config = SolverConfig {
        seed: args.seed,
        use_xor: !args.no_xor,
        k_max: args.k_max,
        step2: if args.explicit_step2 {
            Step2Mode::Explicit
        } else {
            Step2Mode::Rup
        },
        conflict_budget: args.conflict_budget,
        deadline: deadline(args.timeout),
        ..Default::default()
    };
    let mut logger = match &args.proof {
        Some(p) => {
            let out = Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ));
            Some(if args.self_check {
                ProofLogger::with_shadow(out, &formula)?
            } else {
                ProofLogger::new(out, &formula)?
            })
        }
        None => None,
    };
    let mut solver = Solver::new(&formula, config, logger.as_mut())?;
    let result = solver.solve()?;
    let stats = solver.stats();
    drop(solver);
    if let Some(l) = logger.as_mut() {
        l.flush()?;
    }
    let out = io::stdout();
    let mut out = out.lock();
    if args.stats {
        writeln!(out, "c xors {}", stats.xors)?;
        writeln!(out, "c decisions {}", stats.decisions)?;
        writeln!(out, "c conflicts {}", stats.conflicts)?;
        writeln!(out, "c propagations {}", stats.propagations)?;
        writeln!(out, "c xor propagations {}", stats.xor_propagations)?;
        writeln!(out, "c xor conflicts {}", stats.xor_conflicts)?;
        writeln!(out, "c restarts {}", stats.restarts)?;
        writeln!(out, "c learned {} deleted {}", stats.learned, stats.deleted)?;
    }
    let code = match result {
        SolveResult::Sat(model) => {
            writeln!(out, "s SATISFIABLE")?;
            let lits: Vec<String> = model
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    if b {
                        format!("{}", i + 1)
                    } else {
                        format!("-{}", i + 1)
                    }
                })
                .collect();
            for chunk in lits.chunks(20) {
                writeln!(out, "v {}", chunk.join(" "))?;
            }
            writeln!(out, "v 0")?;
            10
        }
        SolveResult::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            20
        }
        SolveResult::Unknown(limit) => {
            writeln!(out, "c stopped: {limit:?}")?;
            writeln!(out, "s UNKNOWN")?;
            0
        }
    };
    Ok(ExitCode::from(code))
}

fn bench(args: TseitinArgs) -> Result<ExitCode> {
    if args.timeout <= 0.0 {
        bail!("timeout must be positive");
    }
    let config = ScalingConfig {
        nodes: args.nodes,
        degree: args.degree,
        seeds: args.seeds,
        total: if args.even {
            TotalCharge::Even
        } else {
            TotalCharge::Odd
        },
        placement: if args.random_charges {
            ChargePlacement::Random
        } else {
            ChargePlacement::Single
        },
        timeout: Duration::from_secs_f64(args.timeout),
        out_dir: Some(args.out.clone()),
        threads: args.threads,
        use_xor: !args.no_xor,
    };
    let report = run_scaling(&config)?;
    report.write_csv(io::stdout().lock())?;
    println!("{}", report.summary());
    eprintln!("wrote {}", args.out.join("report.csv").display());
    Ok(ExitCode::SUCCESS)
}
