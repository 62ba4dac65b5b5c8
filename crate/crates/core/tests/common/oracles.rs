//! Brute-force reference checks shared by the property tests and the
//! acceptance run.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pbxor::cutting_planes::{add, divide, eval_rpn, literal_axiom, multiply, saturate, RpnToken};
use pbxor::pb::{Lit, Namespace, PBConstraint, SubstValue, Substitution, Var};
use pbxor::proof_io::{parse_opb, parse_proof, Formula, ProofStep};
use pbxor::redundancy::redundancy_check;
use pbxor::verifier::{verify_text, Checker, Verdict};
use pbxor::xor::{
    detect_xors, log_adder, log_cnf_to_pb, log_reason_clause, log_reification, log_xor_add,
    DetectedXor, Implied, Step2Mode, XorConstraint, XorMatrix, DEFAULT_K_MAX,
};

use super::golden::{constraint, LISTED, OPB, PROOF};
use super::{parity_formula, shadow_logger};

/// Trial and violation counts, with the first few failures spelled out.
#[derive(Debug, Default)]
pub struct Tally {
    pub trials: usize,
    pub violations: usize,
    pub examples: Vec<String>,
}

impl Tally {
    pub fn fail(&mut self, msg: impl Into<String>) {
        self.violations += 1;
        if self.examples.len() < 5 {
            self.examples.push(msg.into());
        }
    }

    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }

    pub fn ok(&self) -> bool {
        self.violations == 0 && self.trials > 0
    }
}

pub fn all_assignments(vars: &[Var]) -> impl Iterator<Item = BTreeMap<Var, bool>> + '_ {
    (0u32..1 << vars.len()).map(move |m| {
        vars.iter()
            .enumerate()
            .map(|(j, &v)| (v, m >> j & 1 == 1))
            .collect()
    })
}

/// Whether the constraints can be satisfied by extending `rho` over `aux`.
pub fn extendable(cs: &[&PBConstraint], rho: &BTreeMap<Var, bool>, aux: &[Var]) -> bool {
    all_assignments(aux).any(|ext| {
        let mut full = rho.clone();
        full.extend(ext);
        cs.iter().all(|c| c.evaluate(&full).unwrap())
    })
}

pub fn aux_vars(cs: &[&PBConstraint]) -> Vec<Var> {
    let mut vs: Vec<Var> = cs
        .iter()
        .flat_map(|c| c.vars())
        .filter(|v| v.namespace() == Namespace::Aux)
        .collect();
    vs.sort();
    vs.dedup();
    vs
}

/// A constraint over input variables `1..=n`, compiled for evaluation on
/// bitmask assignments (bit `i-1` holds `x<i>`).
struct Compiled {
    terms: Vec<(i64, u32, bool)>,
    degree: i64,
}

impl Compiled {
    fn new(c: &PBConstraint) -> Self {
        let terms = c
            .terms()
            .iter()
            .map(|t| {
                (
                    t.coeff.to_i64().unwrap(),
                    t.lit.var().index() - 1,
                    t.lit.is_negated(),
                )
            })
            .collect();
        Compiled {
            terms,
            degree: c.degree().to_i64().unwrap(),
        }
    }

    fn holds(&self, m: u32) -> bool {
        let lhs: i64 = self
            .terms
            .iter()
            .filter(|&&(_, v, neg)| (m >> v & 1 == 1) != neg)
            .map(|t| t.0)
            .sum();
        lhs >= self.degree
    }
}

fn random_lit(rng: &mut ChaCha8Rng, n: u32) -> Lit {
    Lit::new(Var::input(rng.gen_range(1..=n)), rng.gen())
}

fn random_constraint(
    rng: &mut ChaCha8Rng,
    n: u32,
    max_terms: usize,
    max_coeff: i64,
) -> PBConstraint {
    let len = rng.gen_range(1..=max_terms);
    let terms: Vec<(i64, Lit)> = (0..len)
        .map(|_| (rng.gen_range(1..=max_coeff), random_lit(rng, n)))
        .collect();
    let total: i64 = terms.iter().map(|t| t.0).sum();
    PBConstraint::geq(terms, rng.gen_range(0..=total + 1))
}

// ---- cutting planes -------------------------------------------------------

struct Tree {
    result: PBConstraint,
    rpn: Vec<RpnToken>,
}

fn grow(
    rng: &mut ChaCha8Rng,
    premises: &[PBConstraint],
    n: u32,
    depth: u32,
    derived: &mut Vec<PBConstraint>,
) -> Tree {
    let int = |k: i64| RpnToken::Int(BigInt::from(k));
    if depth == 0 || rng.gen_bool(0.25) {
        if rng.gen_bool(0.8) {
            let i = rng.gen_range(0..premises.len());
            return Tree {
                result: premises[i].clone(),
                rpn: vec![int(i as i64 + 1)],
            };
        }
        let l = random_lit(rng, n);
        return Tree {
            result: literal_axiom(l),
            rpn: vec![RpnToken::Lit(l)],
        };
    }
    let tree = match rng.gen_range(0..4) {
        0 => {
            let a = grow(rng, premises, n, depth - 1, derived);
            let b = grow(rng, premises, n, depth - 1, derived);
            let mut rpn = a.rpn;
            rpn.extend(b.rpn);
            rpn.push(RpnToken::Add);
            Tree {
                result: add(&a.result, &b.result),
                rpn,
            }
        }
        1 => {
            let a = grow(rng, premises, n, depth - 1, derived);
            let k = rng.gen_range(1..=4);
            let mut rpn = a.rpn;
            rpn.extend([int(k), RpnToken::Mul]);
            Tree {
                result: multiply(&a.result, k).unwrap(),
                rpn,
            }
        }
        2 => {
            let a = grow(rng, premises, n, depth - 1, derived);
            let d = rng.gen_range(1..=4);
            let mut rpn = a.rpn;
            rpn.extend([int(d), RpnToken::Div]);
            Tree {
                result: divide(&a.result, d).unwrap(),
                rpn,
            }
        }
        _ => {
            let a = grow(rng, premises, n, depth - 1, derived);
            let mut rpn = a.rpn;
            rpn.push(RpnToken::Saturate);
            Tree {
                result: saturate(&a.result),
                rpn,
            }
        }
    };
    derived.push(tree.result.clone());
    tree
}

/// Random derivation trees over at most 12 variables, 8 premises and depth
/// 6. Every derived constraint must hold wherever all premises hold, and
/// the RPN form must evaluate to the same constraint.
pub fn cutting_planes_soundness(trees: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for t in 0..trees {
        tally.trials += 1;
        let n = rng.gen_range(1..=12u32);
        let premises: Vec<PBConstraint> = (0..rng.gen_range(1..=8))
            .map(|_| random_constraint(&mut rng, n, 5, 6))
            .collect();
        let depth = rng.gen_range(1..=6);
        let mut derived = Vec::new();
        let tree = grow(&mut rng, &premises, n, depth, &mut derived);
        let db: HashMap<u64, PBConstraint> = premises
            .iter()
            .enumerate()
            .map(|(i, c)| (i as u64 + 1, c.clone()))
            .collect();
        match eval_rpn(&tree.rpn, &db) {
            Ok(c) => tally.check(c == tree.result, || {
                format!("tree {t}: rpn gives {c}, direct {}", tree.result)
            }),
            Err(e) => tally.fail(format!("tree {t}: rpn error {e}")),
        }
        let ps: Vec<Compiled> = premises.iter().map(Compiled::new).collect();
        let ds: Vec<Compiled> = derived.iter().map(Compiled::new).collect();
        for m in 0u32..1 << n {
            if !ps.iter().all(|p| p.holds(m)) {
                continue;
            }
            if let Some(i) = ds.iter().position(|d| !d.holds(m)) {
                tally.fail(format!("tree {t}: {} fails at {m:#b}", derived[i]));
                break;
            }
        }
    }
    tally
}

// ---- redundancy -------------------------------------------------------------

fn satisfiable(n: u32, cs: &[Compiled]) -> bool {
    (0u32..1 << n).any(|m| cs.iter().all(|c| c.holds(m)))
}

/// Random `(F, C, ω)` over at most 10 variables. Whenever the check
/// accepts, `F ∧ C` must be satisfiable if `F` is. Returns the tally and
/// the number of accepted triples.
pub fn redundancy_soundness(triples: usize, seed: u64) -> (Tally, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    let mut accepted = 0;
    for t in 0..triples {
        tally.trials += 1;
        let n = rng.gen_range(2..=10u32);
        let f: Vec<PBConstraint> = (0..rng.gen_range(1..=6))
            .map(|_| {
                if rng.gen_bool(0.5) {
                    random_constraint(&mut rng, n, 3, 1)
                } else {
                    random_constraint(&mut rng, n, 4, 3)
                }
            })
            .collect();
        let c = random_constraint(&mut rng, n, 4, 3);
        let mut pairs: BTreeMap<Var, SubstValue> = BTreeMap::new();
        if rng.gen_bool(0.5) && !c.is_empty() {
            // make one of C's literals true
            let l = c.terms()[rng.gen_range(0..c.len())].lit;
            pairs.insert(l.var(), SubstValue::Const(!l.is_negated()));
        }
        for _ in 0..rng.gen_range(0..=2) {
            let v = Var::input(rng.gen_range(1..=n));
            let value = if rng.gen_bool(0.5) {
                SubstValue::Const(rng.gen())
            } else {
                SubstValue::Lit(random_lit(&mut rng, n))
            };
            pairs.entry(v).or_insert(value);
        }
        let omega = Substitution::try_from_pairs(pairs).unwrap();
        if !redundancy_check(&f, &c, &omega).is_accept() {
            continue;
        }
        accepted += 1;
        let fc: Vec<Compiled> = f.iter().map(Compiled::new).collect();
        let mut fcc: Vec<Compiled> = f.iter().map(Compiled::new).collect();
        fcc.push(Compiled::new(&c));
        if satisfiable(n, &fc) && !satisfiable(n, &fcc) {
            tally.fail(format!(
                "triple {t}: accepted {c} with {omega:?} but F ∧ C is unsatisfiable"
            ));
        }
    }
    (tally, accepted)
}

/// Reifies random constraints through a checking logger: both steps must be
/// accepted and together define `y ⇔ C`.
pub fn reification_acceptance(count: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    let formula = parity_formula(3, true);
    let (mut logger, buf) = shadow_logger(&formula);
    for i in 0..count {
        tally.trials += 1;
        let c = random_constraint(&mut rng, 6, 5, 5);
        let r = match log_reification(&mut logger, &c) {
            Ok(r) => r,
            Err(e) => {
                tally.fail(format!("constraint {i} ({c}): {e}"));
                continue;
            }
        };
        let fwd = logger.shadow_constraint(r.fwd).unwrap().clone();
        let bwd = logger.shadow_constraint(r.bwd).unwrap().clone();
        let vars: Vec<Var> = c.vars().collect();
        for rho in all_assignments(&vars) {
            for yv in [false, true] {
                let mut full = rho.clone();
                full.insert(r.var, yv);
                let both = fwd.evaluate(&full).unwrap() && bwd.evaluate(&full).unwrap();
                tally.check(both == (yv == c.evaluate(&rho).unwrap()), || {
                    format!("{c}: y={yv} at {rho:?}")
                });
            }
        }
    }
    logger.flush().unwrap();
    drop(logger);
    tally.check(
        verify_text(&formula, &buf.text()).verdict.is_accepted(),
        || "replay rejected".into(),
    );
    tally
}

// ---- parity encodings -------------------------------------------------------

fn detected(formula: &Formula, k: u32, b: bool) -> DetectedXor {
    if k == 1 {
        // below the detection range
        return DetectedXor {
            xor: XorConstraint::new([Var::input(1)], b),
            vars: vec![Var::input(1)],
            clauses: [(u32::from(!b), 1)].into(),
        };
    }
    detect_xors(formula, DEFAULT_K_MAX)
        .into_iter()
        .next()
        .expect("parity detected")
}

/// For every `k ≤ 6`, both parities and both translation modes: the logged
/// pair extends to auxiliaries exactly on the parity, and the whole log
/// (translation, adders, sums, reason clauses) replays through the verifier.
pub fn xor_encoding_oracle() -> Tally {
    let mut tally = Tally::default();
    for k in 1..=6u32 {
        for b in [false, true] {
            for mode in [Step2Mode::Rup, Step2Mode::Explicit] {
                tally.trials += 1;
                let formula = parity_formula(k, b);
                let d = detected(&formula, k, b);
                let (mut logger, buf) = shadow_logger(&formula);
                let enc = match log_cnf_to_pb(&mut logger, &d, mode) {
                    Ok(e) => e,
                    Err(e) => {
                        tally.fail(format!("k={k} b={b} {mode:?}: {e}"));
                        continue;
                    }
                };
                let pb = enc.pb().unwrap();
                let g = logger.shadow_constraint(pb.geq).unwrap().clone();
                let l = logger.shadow_constraint(pb.leq).unwrap().clone();
                let pair = [&g, &l];
                let aux = aux_vars(&pair);
                let inputs: Vec<Var> = (1..=k).map(Var::input).collect();
                for rho in all_assignments(&inputs) {
                    let parity = rho.values().filter(|&&v| v).count() % 2 == 1;
                    tally.check(extendable(&pair, &rho, &aux) == (parity == b), || {
                        format!("k={k} b={b} {mode:?}: wrong extendability at {rho:?}")
                    });
                    // reason clauses for every violating assignment
                    if parity != b {
                        match log_reason_clause(&mut logger, &enc, &rho) {
                            Ok(id) => {
                                let c = logger.shadow_constraint(id).unwrap();
                                tally.check(!c.evaluate(&rho).unwrap(), || {
                                    format!("k={k}: reason clause not falsified")
                                });
                            }
                            Err(e) => tally.fail(format!("k={k} b={b}: reason clause: {e}")),
                        }
                    }
                }
                // sum with itself cancels to 0 = 0
                match log_xor_add(&mut logger, &enc, &enc) {
                    Ok(s) => tally.check(s.is_empty() && !s.rhs(), || {
                        format!("k={k}: self-sum {s:?}")
                    }),
                    Err(e) => tally.fail(format!("k={k}: xor add: {e}")),
                }
                if k >= 3 {
                    let lits = [1, 2, 3].map(|i| Var::input(i).positive());
                    if let Err(e) = log_adder(&mut logger, lits) {
                        tally.fail(format!("adder: {e}"));
                    }
                }
                logger.flush().unwrap();
                drop(logger);
                let verdict = verify_text(&formula, &buf.text()).verdict;
                tally.check(verdict.is_accepted(), || {
                    format!("k={k} b={b} {mode:?}: replay {verdict:?}")
                });
            }
        }
    }
    // sums of two different parities, checked on the worked example
    tally.trials += 1;
    let formula = parse_opb(OPB).unwrap();
    let (mut logger, buf) = shadow_logger(&formula);
    let found = detect_xors(&formula, DEFAULT_K_MAX);
    let a = log_cnf_to_pb(&mut logger, &found[0], Step2Mode::Rup).unwrap();
    let b = log_cnf_to_pb(&mut logger, &found[1], Step2Mode::Rup).unwrap();
    match log_xor_add(&mut logger, &a, &b) {
        Ok(s) => tally.check(s.vars().count() == 2 && s.rhs(), || {
            format!("worked example sum {s:?}")
        }),
        Err(e) => tally.fail(format!("worked example sum: {e}")),
    }
    logger.flush().unwrap();
    drop(logger);
    tally.check(
        verify_text(&formula, &buf.text()).verdict.is_accepted(),
        || "worked example replay".into(),
    );
    tally
}

// ---- Gaussian elimination --------------------------------------------------

/// Forced values among the free columns, or `None` when no completion
/// satisfies every row. Rows are `(mask, rhs)` over bits `1..=16`.
fn brute_force_gauss(
    rows: &[(u32, bool)],
    assigned: u32,
    values: u32,
) -> Option<Vec<(usize, bool)>> {
    let used = rows.iter().fold(0, |acc, r| acc | r.0);
    let free = used & !assigned;
    let mut always_one = free;
    let mut always_zero = free;
    let mut any = false;
    let mut sub = 0u32;
    loop {
        let m = values & assigned | sub;
        if rows
            .iter()
            .all(|&(mask, rhs)| ((m & mask).count_ones() % 2 == 1) == rhs)
        {
            any = true;
            always_one &= m;
            always_zero &= !m;
        }
        if sub == free {
            break;
        }
        sub = (sub.wrapping_sub(free)) & free;
    }
    if !any {
        return None;
    }
    let mut forced: Vec<(usize, bool)> = (0..32)
        .filter(|&c| always_one >> c & 1 == 1 || always_zero >> c & 1 == 1)
        .map(|c| (c as usize, always_one >> c & 1 == 1))
        .collect();
    forced.sort();
    Some(forced)
}

fn mask_of(x: &XorConstraint) -> u32 {
    x.bits().iter().fold(0, |m, c| m | 1 << c)
}

/// Random systems over at most 16 variables and 20 rows, driven through
/// assignments, backjumps and self-propagation. After every operation the
/// matrix must report exactly the brute-force conflict or forced values,
/// and every reported row must be a sum of its provenance that explains
/// the event.
pub fn gauss_oracle(systems: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::default();
    for s in 0..systems {
        let n = rng.gen_range(1..=16u32);
        let originals: Vec<XorConstraint> = (0..rng.gen_range(1..=20))
            .map(|_| {
                let width = rng.gen_range(1..=n.min(6));
                let vars: Vec<Var> = (0..width)
                    .map(|_| Var::input(rng.gen_range(1..=n)))
                    .collect();
                // duplicates cancel, as in GF(2)
                let mut x = XorConstraint::new(std::iter::empty::<Var>(), rng.gen());
                for v in vars {
                    x = x.sum(&XorConstraint::new([v], false));
                }
                x
            })
            .collect();
        let rows: Vec<(u32, bool)> = originals.iter().map(|x| (mask_of(x), x.rhs())).collect();
        let mut m = XorMatrix::new(&originals);
        let (mut assigned, mut values) = (0u32, 0u32);
        for op in 0..14 {
            tally.trials += 1;
            let expected = brute_force_gauss(&rows, assigned, values);
            let got = m.implied();
            let ctx = || format!("system {s} op {op}: assigned {assigned:#b} values {values:#b}");
            match (&expected, &got) {
                (None, Err(Implied::Conflict(snap))) => {
                    let mask = mask_of(&snap.xor);
                    let explains = mask & !assigned == 0
                        && ((mask & values).count_ones() % 2 == 1) != snap.xor.rhs();
                    tally.check(explains, || {
                        format!("{}: conflict row does not explain", ctx())
                    });
                    check_provenance(&mut tally, &originals, &snap.xor, &snap.provenance, &ctx);
                }
                (Some(forced), Ok(props)) => {
                    let mut found: Vec<(usize, bool)> = props
                        .iter()
                        .filter_map(|p| match p {
                            Implied::Propagation(c, v, snap) => {
                                let mask = mask_of(&snap.xor);
                                let rest = mask & !(1 << c);
                                let ok = mask >> c & 1 == 1
                                    && rest & !assigned == 0
                                    && (((rest & values).count_ones() % 2 == 1) ^ snap.xor.rhs())
                                        == *v;
                                tally.check(ok, || {
                                    format!("{}: row does not force column {c}", ctx())
                                });
                                check_provenance(
                                    &mut tally,
                                    &originals,
                                    &snap.xor,
                                    &snap.provenance,
                                    &ctx,
                                );
                                Some((*c, *v))
                            }
                            Implied::Conflict(_) => None,
                        })
                        .collect();
                    found.sort();
                    tally.check(&found == forced, || {
                        format!("{}: forced {forced:?}, matrix {found:?}", ctx())
                    });
                    let step = m.gauss_step();
                    tally.check(
                        match &step {
                            None => forced.is_empty(),
                            Some(Implied::Propagation(c, v, _)) => forced.contains(&(*c, *v)),
                            Some(Implied::Conflict(_)) => false,
                        },
                        || format!("{}: gauss_step {step:?}", ctx()),
                    );
                }
                _ => tally.fail(format!("{}: expected {expected:?}, got {got:?}", ctx())),
            }

            // next operation
            let free: Vec<u32> = (1..=n).filter(|c| assigned >> c & 1 == 0).collect();
            let set: Vec<u32> = (1..=n).filter(|c| assigned >> c & 1 == 1).collect();
            let roll = rng.gen_range(0..10);
            if roll < 2 {
                if let Some(Implied::Propagation(c, v, _)) = m.gauss_step() {
                    m.assign(c, v);
                    assigned |= 1 << c;
                    values = if v {
                        values | 1 << c
                    } else {
                        values & !(1 << c)
                    };
                    continue;
                }
            }
            if (roll < 7 || set.is_empty()) && !free.is_empty() {
                let c = free[rng.gen_range(0..free.len())];
                let v: bool = rng.gen();
                m.assign(c as usize, v);
                assigned |= 1 << c;
                values = if v {
                    values | 1 << c
                } else {
                    values & !(1 << c)
                };
            } else if !set.is_empty() {
                let c = set[rng.gen_range(0..set.len())];
                m.unassign(c as usize);
                assigned &= !(1 << c);
                values &= !(1 << c);
            }
        }
    }
    tally
}

fn check_provenance(
    tally: &mut Tally,
    originals: &[XorConstraint],
    row: &XorConstraint,
    prov: &pbxor::xor::BitSet,
    ctx: &dyn Fn() -> String,
) {
    let sum = prov.iter().fold(
        XorConstraint::new(std::iter::empty::<Var>(), false),
        |acc, i| acc.sum(&originals[i]),
    );
    tally.check(
        mask_of(&sum) == mask_of(row) && sum.rhs() == row.rhs(),
        || format!("{}: provenance mismatch", ctx()),
    );
}

// ---- worked example ---------------------------------------------------------

/// Replays the worked example and compares every listed constraint.
pub fn golden_transcript() -> Result<Duration, String> {
    let start = Instant::now();
    let formula = parse_opb(OPB).map_err(|e| e.to_string())?;
    let report = verify_text(&formula, PROOF);
    let elapsed = start.elapsed();
    if report.verdict != Verdict::AllStepsValid || report.stats.steps != 31 {
        return Err(format!(
            "verdict {:?} after {} steps",
            report.verdict, report.stats.steps
        ));
    }
    let mut checker = Checker::new(&formula);
    for (_, step) in parse_proof(PROOF).map_err(|e| e.to_string())? {
        checker.apply(&step).map_err(|e| e.to_string())?;
    }
    for &(id, text) in LISTED {
        if checker.database().get(id) != Some(&constraint(text)) {
            return Err(format!("id {id} differs from the listing"));
        }
    }
    Ok(elapsed)
}

pub struct CorruptFixture {
    pub file: String,
    pub step: usize,
    pub class: String,
    pub text: String,
}

pub fn corrupt_fixtures() -> Vec<CorruptFixture> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corrupt");
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            CorruptFixture {
                file: parts[0].to_string(),
                step: parts[1].parse().unwrap(),
                class: parts[2].to_string(),
                text: std::fs::read_to_string(dir.join(parts[0])).unwrap(),
            }
        })
        .collect()
}

/// Whether `c` holds on every assignment to x1..x4, y1..y4 satisfying the
/// worked-example database as it stands before 1-based step `step`.
pub fn implied_before_step(step: usize, c: &PBConstraint) -> bool {
    let formula = parse_opb(OPB).unwrap();
    let mut checker = Checker::new(&formula);
    for (_, s) in parse_proof(PROOF).unwrap().into_iter().take(step - 1) {
        checker.apply(&s).unwrap();
    }
    let db: Vec<PBConstraint> = checker.database().iter().map(|(_, c)| c.clone()).collect();
    let vars: Vec<Var> = (1..=4)
        .map(Var::input)
        .chain((1..=4).map(Var::aux))
        .collect();
    let implied = all_assignments(&vars)
        .all(|a| !db.iter().all(|d| d.evaluate(&a).unwrap()) || c.evaluate(&a).unwrap());
    implied
}

/// Every corrupted transcript must be rejected exactly at its mutated step.
/// Flipped `rup` lines are first confirmed not to be implied at all.
pub fn corruption_suite() -> Tally {
    let formula = parse_opb(OPB).unwrap();
    let mut tally = Tally::default();
    for fx in corrupt_fixtures() {
        tally.trials += 1;
        if fx.class == "rup-flip" {
            let line = fx.text.lines().nth(fx.step - 1).unwrap();
            let steps = parse_proof(line).unwrap();
            if let Some((_, ProofStep::Rup { constraint })) = steps.first() {
                if implied_before_step(fx.step, constraint) {
                    tally.fail(format!("{}: mutated clause is still implied", fx.file));
                    continue;
                }
            }
        }
        match verify_text(&formula, &fx.text).verdict {
            Verdict::Rejected { step, .. } if step == fx.step => {}
            other => tally.fail(format!(
                "{}: expected rejection at step {}, got {other:?}",
                fx.file, fx.step
            )),
        }
    }
    tally
}
