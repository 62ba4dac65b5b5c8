//! The eight acceptance checks. Each prints one PASS/FAIL line.

mod common;

use std::time::{Duration, Instant};

use common::oracles::{
    corrupt_fixtures, corruption_suite, cutting_planes_soundness, gauss_oracle, golden_transcript,
    redundancy_soundness, reification_acceptance, xor_encoding_oracle, Tally,
};
use pbxor::bench::{least_squares_slope, run_instance, RowVerdict, ScalingConfig, ScalingRow};
use rayon::prelude::*;
use std::sync::OnceLock;

const TSEITIN_INSTANCES: usize = 200;
const TSEITIN_BUDGET: Duration = Duration::from_secs(60);
const SLOPE_TARGET: f64 = 1.0;
const SLOPE_TOLERANCE: f64 = 0.25;
const SANITY_NODES: usize = 50;
const SANITY_LIMIT_BYTES: u64 = 1 << 20;

fn report(n: u32, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {n} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn tally_line(t: &Tally) -> String {
    match t.examples.first() {
        None => format!("{} trials, {} violations", t.trials, t.violations),
        Some(e) => format!(
            "{} trials, {} violations, first: {e}",
            t.trials, t.violations
        ),
    }
}

/// Even node counts from 10 to 100, cycled over 200 seeds.
fn tseitin_rows() -> &'static Vec<ScalingRow> {
    static ROWS: OnceLock<Vec<ScalingRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let config = ScalingConfig {
            degree: 5,
            timeout: TSEITIN_BUDGET,
            ..Default::default()
        };
        let sizes: Vec<usize> = (10..=100).step_by(2).collect();
        (0..TSEITIN_INSTANCES)
            .into_par_iter()
            .map(|i| run_instance(&config, sizes[i % sizes.len()], i as u64))
            .collect()
    })
}

#[test]
fn criterion_1_golden_transcript() {
    let result = golden_transcript();
    let pass = matches!(result, Ok(t) if t < Duration::from_secs(1));
    let detail = match &result {
        Ok(t) => format!(
            "ids 9..37 match the listing, {:.2} ms",
            t.as_secs_f64() * 1e3
        ),
        Err(e) => e.clone(),
    };
    report(1, "golden transcript", pass, detail);
    assert!(pass);
}

#[test]
fn criterion_2_tseitin_round_trip() {
    let start = Instant::now();
    let rows = tseitin_rows();
    let completed: Vec<&ScalingRow> = rows
        .iter()
        .filter(|r| r.verdict != RowVerdict::Timeout)
        .collect();
    let verified = completed
        .iter()
        .filter(|r| r.verdict == RowVerdict::VerifiedUnsat)
        .count();
    let slowest = rows
        .iter()
        .map(|r| r.solve_ms + r.verify_ms)
        .max()
        .unwrap_or(0);
    let bad: Vec<String> = completed
        .iter()
        .filter(|r| r.verdict != RowVerdict::VerifiedUnsat)
        .take(3)
        .map(|r| format!("{}: {:?}", r.name(), r.verdict))
        .collect();
    let pass =
        rows.len() == TSEITIN_INSTANCES && !completed.is_empty() && verified == completed.len();
    report(
        2,
        "tseitin round trip",
        pass,
        format!(
            "{verified}/{} completed runs verified, {} timeouts, slowest {slowest} ms, batch {:.1} s{}",
            completed.len(),
            rows.len() - completed.len(),
            start.elapsed().as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!(", failures: {}", bad.join("; ")) }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_proof_size_scaling() {
    let rows = tseitin_rows();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.verdict == RowVerdict::VerifiedUnsat)
        .map(|r| ((r.cnf_bytes as f64).ln(), (r.proof_bytes as f64).ln()))
        .collect();
    let slope = least_squares_slope(&points);
    let slope_ok = slope.is_some_and(|s| (s - SLOPE_TARGET).abs() <= SLOPE_TOLERANCE);
    let config = ScalingConfig {
        degree: 5,
        timeout: TSEITIN_BUDGET,
        ..Default::default()
    };
    let sanity = run_instance(&config, SANITY_NODES, 1);
    let sanity_ok =
        sanity.verdict == RowVerdict::VerifiedUnsat && sanity.proof_bytes < SANITY_LIMIT_BYTES;
    let pass = slope_ok && sanity_ok;
    report(
        3,
        "proof size scaling",
        pass,
        format!(
            "slope {} over {} points, target {SLOPE_TARGET} +/- {SLOPE_TOLERANCE}; {} parities / {} vars: {:.1} KiB proof, {:?}",
            slope.map_or("n/a".into(), |s| format!("{s:.3}")),
            points.len(),
            SANITY_NODES,
            sanity.vars,
            sanity.proof_bytes as f64 / 1024.0,
            sanity.verdict
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_cutting_planes_soundness() {
    let t = cutting_planes_soundness(10_000, 4);
    report(4, "cutting planes soundness", t.ok(), tally_line(&t));
    assert!(t.ok());
}

#[test]
fn criterion_5_redundancy_soundness() {
    let (t, accepted) = redundancy_soundness(1_000, 5);
    let r = reification_acceptance(100, 5);
    let pass = t.ok() && r.ok();
    report(
        5,
        "redundancy soundness",
        pass,
        format!(
            "{}, {accepted} accepted; reification: {}",
            tally_line(&t),
            tally_line(&r)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_xor_encoding_oracle() {
    let t = xor_encoding_oracle();
    report(6, "parity encoding oracle", t.ok(), tally_line(&t));
    assert!(t.ok());
}

#[test]
fn criterion_7_gaussian_elimination_oracle() {
    let t = gauss_oracle(500, 7);
    report(7, "gaussian elimination oracle", t.ok(), tally_line(&t));
    assert!(t.ok());
}

#[test]
fn criterion_8_negative_fixtures() {
    let fixtures = corrupt_fixtures().len();
    let t = corruption_suite();
    let pass = t.ok() && fixtures >= 20;
    report(
        8,
        "corrupted transcripts",
        pass,
        format!("{fixtures} fixtures, {}", tally_line(&t)),
    );
    assert!(pass);
}
