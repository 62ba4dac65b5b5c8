//! Tseitin formulas over random regular graphs and a proof-size scaling
//! runner.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cdcl::{self, Limit, SolveResult, SolverConfig};
use crate::logging::ProofLogger;
use crate::pb::{Lit, PBConstraint, Var};
use crate::proof_io::{write_cnf, Formula, ProofReader};
use crate::verifier::{self, Verdict, VerifyOptions};

/// Attempts at drawing a loop-free pairing before giving up.
const MAX_PAIRING_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no {d}-regular graph on {n} nodes: {reason}")]
    Infeasible {
        n: usize,
        d: usize,
        reason: &'static str,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TotalCharge {
    Odd,
    Even,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChargePlacement {
    /// Node 0 carries the whole charge, every other node is 0.
    #[default]
    Single,
    /// Uniform random bits, with the last node fixing the total.
    Random,
}

#[derive(Clone, Debug)]
pub struct TseitinInstance {
    pub nodes: usize,
    pub degree: usize,
    /// Edge `i` is variable `x<i+1>`.
    pub edges: Vec<(usize, usize)>,
    pub charges: Vec<bool>,
    pub clauses: Vec<Vec<Lit>>,
    pub cnf: Formula,
}

impl TseitinInstance {
    pub fn num_vars(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn dimacs(&self) -> String {
        let mut out = Vec::new();
        write_cnf(&mut out, self.num_vars(), &self.clauses).expect("writing to memory");
        String::from_utf8(out).expect("ascii")
    }

    /// Incident edge variables of `node`, in edge order.
    pub fn incident(&self, node: usize) -> Vec<Var> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == node || b == node)
            .map(|(i, _)| Var::input(i as u32 + 1))
            .collect()
    }
}

/// Random `d`-regular multigraph on `n` nodes, drawn from the pairing model
/// with self-loops rejected, and its parity constraints as CNF.
pub fn gen_tseitin(
    n: usize,
    d: usize,
    seed: u64,
    total: TotalCharge,
    placement: ChargePlacement,
) -> Result<TseitinInstance, BenchError> {
    let infeasible = |reason| BenchError::Infeasible { n, d, reason };
    if d == 0 {
        return Err(infeasible("degree must be positive"));
    }
    if n < 2 {
        return Err(infeasible("need at least two nodes"));
    }
    if (n * d) % 2 == 1 {
        return Err(infeasible("n*d is odd"));
    }
    if d >= usize::BITS as usize - 1 {
        return Err(infeasible("degree too large to encode"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let edges = (0..MAX_PAIRING_ATTEMPTS)
        .find_map(|_| {
            points.shuffle(&mut rng);
            let pairs: Vec<(usize, usize)> = points
                .chunks(2)
                .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
                .collect();
            pairs.iter().all(|(a, b)| a != b).then_some(pairs)
        })
        .ok_or_else(|| infeasible("pairing kept producing self-loops"))?;

    let odd = total == TotalCharge::Odd;
    let mut charges = vec![false; n];
    match placement {
        ChargePlacement::Single => charges[0] = odd,
        ChargePlacement::Random => {
            for c in charges.iter_mut().take(n - 1) {
                *c = rng.gen();
            }
            let parity = charges.iter().filter(|&&c| c).count() % 2 == 1;
            charges[n - 1] = parity != odd;
        }
    }

    let mut incident = vec![Vec::with_capacity(d); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        let v = Var::input(i as u32 + 1);
        incident[a].push(v);
        incident[b].push(v);
    }
    let mut clauses = Vec::with_capacity(n << (d - 1));
    for (vars, &charge) in incident.iter().zip(&charges) {
        // forbid every assignment whose parity differs from the charge
        for mask in 0u64..1 << d {
            if (mask.count_ones() % 2 == 1) == charge {
                continue;
            }
            clauses.push(
                vars.iter()
                    .enumerate()
                    .map(|(j, v)| v.lit(mask >> j & 1 == 0))
                    .collect::<Vec<_>>(),
            );
        }
    }
    let cnf = Formula::new(
        edges.len() as u32,
        clauses
            .iter()
            .map(|c| PBConstraint::clause(c.iter().copied()))
            .collect(),
    );
    Ok(TseitinInstance {
        nodes: n,
        degree: d,
        edges,
        charges,
        clauses,
        cnf,
    })
}

#[derive(Clone, Debug)]
pub struct ScalingConfig {
    pub nodes: Vec<usize>,
    pub degree: usize,
    pub seeds: Vec<u64>,
    pub total: TotalCharge,
    pub placement: ChargePlacement,
    /// Budget for solving and, separately, for verifying one instance.
    pub timeout: Duration,
    /// Where `.cnf`, `.pbp` and `report.csv` go; proofs stay in memory
    /// without it.
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub use_xor: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            nodes: vec![10, 20, 40],
            degree: 5,
            seeds: vec![1],
            total: TotalCharge::Odd,
            placement: ChargePlacement::Single,
            timeout: Duration::from_secs(60),
            out_dir: None,
            threads: None,
            use_xor: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowVerdict {
    VerifiedUnsat,
    Sat,
    /// The verifier accepted every step but found no contradiction.
    Incomplete,
    Rejected(String),
    Timeout,
    Error(String),
}

impl RowVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            RowVerdict::VerifiedUnsat => "verified-unsat",
            RowVerdict::Sat => "sat",
            RowVerdict::Incomplete => "incomplete",
            RowVerdict::Rejected(_) => "rejected",
            RowVerdict::Timeout => "timeout",
            RowVerdict::Error(_) => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingRow {
    pub nodes: usize,
    pub degree: usize,
    pub seed: u64,
    pub vars: u32,
    pub clauses: usize,
    pub cnf_bytes: u64,
    pub proof_bytes: u64,
    pub solve_ms: u128,
    pub verify_ms: u128,
    pub verdict: RowVerdict,
}

impl ScalingRow {
    pub fn name(&self) -> String {
        format!("tseitin-n{}-d{}-s{}", self.nodes, self.degree, self.seed)
    }
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of log(proof bytes) against log(cnf bytes)
    /// over verified rows.
    pub slope: Option<f64>,
}

impl ScalingReport {
    pub fn write_csv(&self, w: impl Write) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "instance",
            "nodes",
            "degree",
            "seed",
            "vars",
            "clauses",
            "cnf_bytes",
            "proof_bytes",
            "solve_ms",
            "verify_ms",
            "verdict",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.name(),
                r.nodes.to_string(),
                r.degree.to_string(),
                r.seed.to_string(),
                r.vars.to_string(),
                r.clauses.to_string(),
                r.cnf_bytes.to_string(),
                r.proof_bytes.to_string(),
                r.solve_ms.to_string(),
                r.verify_ms.to_string(),
                r.verdict.label().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let verified = self
            .rows
            .iter()
            .filter(|r| r.verdict == RowVerdict::VerifiedUnsat)
            .count();
        let slope = self
            .slope
            .map_or_else(|| "n/a".to_string(), |s| format!("{s:.3}"));
        format!(
            "instances={} verified={} slope={}",
            self.rows.len(),
            verified,
            slope
        )
    }
}

/// Slope of the least-squares line through `points`, if the x values are
/// not all equal.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}

/// In-memory proof sink that can be read back after the logger is gone.
#[derive(Clone, Default)]
struct SharedBuf(Arc<Mutex<Vec<u8>>>);

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().expect("buffer lock").extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Generates, solves with proof logging, and verifies one instance.
pub fn run_instance(config: &ScalingConfig, nodes: usize, seed: u64) -> ScalingRow {
    let mut row = ScalingRow {
        nodes,
        degree: config.degree,
        seed,
        vars: 0,
        clauses: 0,
        cnf_bytes: 0,
        proof_bytes: 0,
        solve_ms: 0,
        verify_ms: 0,
        verdict: RowVerdict::Error(String::new()),
    };
    if let Err(e) = run_into(config, &mut row) {
        row.verdict = RowVerdict::Error(e.to_string());
    }
    row
}

fn run_into(
    config: &ScalingConfig,
    row: &mut ScalingRow,
) -> Result<(), Box<dyn std::error::Error>> {
    let inst = gen_tseitin(
        row.nodes,
        row.degree,
        row.seed,
        config.total,
        config.placement,
    )?;
    let dimacs = inst.dimacs();
    row.vars = inst.num_vars();
    row.clauses = inst.clauses.len();
    row.cnf_bytes = dimacs.len() as u64;

    let name = row.name();
    let proof_path = config
        .out_dir
        .as_ref()
        .map(|d| d.join(format!("{name}.pbp")));
    if let Some(dir) = &config.out_dir {
        fs::write(dir.join(format!("{name}.cnf")), &dimacs)?;
    }
    let memory = SharedBuf::default();
    let sink: Box<dyn Write + Send> = match &proof_path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(memory.clone()),
    };

    let start = Instant::now();
    let mut logger = ProofLogger::new(sink, &inst.cnf)?;
    let solver_config = SolverConfig {
        seed: row.seed,
        use_xor: config.use_xor,
        deadline: Some(start + config.timeout),
        ..Default::default()
    };
    let (result, _) = cdcl::solve(&inst.cnf, solver_config, Some(&mut logger))?;
    logger.flush()?;
    row.proof_bytes = logger.bytes_written();
    drop(logger);
    row.solve_ms = start.elapsed().as_millis();
    match result {
        SolveResult::Unsat => {}
        SolveResult::Sat(_) => {
            row.verdict = RowVerdict::Sat;
            return Ok(());
        }
        SolveResult::Unknown(Limit::Time) | SolveResult::Unknown(Limit::Conflicts) => {
            row.verdict = RowVerdict::Timeout;
            return Ok(());
        }
    }

    let start = Instant::now();
    let options = VerifyOptions {
        deadline: Some(start + config.timeout),
    };
    let report = match &proof_path {
        Some(p) => verifier::verify(
            &inst.cnf,
            ProofReader::new(BufReader::new(File::open(p)?)),
            options,
        ),
        None => {
            let bytes = memory.0.lock().expect("buffer lock").clone();
            verifier::verify(&inst.cnf, ProofReader::new(bytes.as_slice()), options)
        }
    };
    row.verify_ms = start.elapsed().as_millis();
    row.verdict = match report.verdict {
        Verdict::VerifiedUnsat => RowVerdict::VerifiedUnsat,
        Verdict::AllStepsValid => RowVerdict::Incomplete,
        Verdict::Rejected { reason, .. } if reason.contains("time limit") => RowVerdict::Timeout,
        Verdict::Rejected { step, reason, .. } => {
            RowVerdict::Rejected(format!("step {step}: {reason}"))
        }
    };
    Ok(())
}

/// Runs every `(nodes, seed)` pair on a worker pool. Rows come back in
/// input order; with an output directory the report is also written there.
pub fn run_scaling(config: &ScalingConfig) -> Result<ScalingReport, BenchError> {
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
    }
    let jobs: Vec<(usize, u64)> = config
        .nodes
        .iter()
        .flat_map(|&n| config.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let rows: Vec<ScalingRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, s)| run_instance(config, n, s))
            .collect()
    });

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.verdict == RowVerdict::VerifiedUnsat)
        .map(|r| ((r.cnf_bytes as f64).ln(), (r.proof_bytes as f64).ln()))
        .collect();
    let report = ScalingReport {
        rows,
        slope: least_squares_slope(&points),
    };
    if let Some(dir) = &config.out_dir {
        report.write_csv(File::create(dir.join("report.csv"))?)?;
        fs::write(dir.join("summary.txt"), report.summary() + "\n")?;
    }
    Ok(report)
}
