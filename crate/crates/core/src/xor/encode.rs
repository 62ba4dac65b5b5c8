use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use super::{DetectedXor, PbPair, XorConstraint};
use crate::logging::{LogError, ProofLogger, Rpn};
use crate::pb::{Assignment, Lit, PBConstraint, SubstValue, Substitution, Var};

#[derive(Debug, Error)]
pub enum XorLogError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("parity has no pseudo-Boolean encoding yet")]
    MissingEncoding,
    #[error("clause with negation mask {0:#b} is missing from the encoding")]
    MissingClause(u32),
    #[error("variable {0} is unassigned")]
    Unassigned(Var),
    #[error("assignment satisfies the parity")]
    NotViolated,
    #[error("parities of arity {0} are not supported")]
    Arity(usize),
}

/// A fresh variable tied to a constraint by two stored constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reified {
    pub var: Var,
    /// `y → C`, stored first.
    pub fwd: u64,
    /// `¬C → ¬y`, i.e. `C → y` read backwards.
    pub bwd: u64,
}

/// Emits `red A·ȳ + C ≥ A ; y -> 0` and
/// `red (Σa−A+1)·y + Σ a·ℓ̄ ≥ Σa−A+1 ; y -> 1` for a fresh `y`.
pub fn log_reification(logger: &mut ProofLogger, c: &PBConstraint) -> Result<Reified, LogError> {
    let y = logger.fresh_aux();
    let a = c.degree().clone();
    let mut fwd: Vec<(BigInt, Lit)> = vec![(a.clone(), y.negative())];
    fwd.extend(c.terms().iter().map(|t| (t.coeff.clone(), t.lit)));
    let k = (c.coefficient_sum() - &a + BigInt::one()).max(BigInt::from(0));
    let mut bwd: Vec<(BigInt, Lit)> = vec![(k.clone(), y.positive())];
    bwd.extend(c.terms().iter().map(|t| (t.coeff.clone(), !t.lit)));

    let fix = |b| Substitution::try_from_pairs([(y, SubstValue::Const(b))]).expect("single entry");
    let fwd = logger.red(PBConstraint::geq(fwd, a), fix(false))?;
    let bwd = logger.red(PBConstraint::geq(bwd, k), fix(true))?;
    Ok(Reified { var: y, fwd, bwd })
}

/// A full adder `2·carry + sum = a + b + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adder {
    pub carry: Var,
    pub sum: Var,
    /// `a + b + c + 2·c̄arry + s̄um ≥ 3`.
    pub geq: u64,
    /// `ā + b̄ + c̄ + 2·carry + sum ≥ 3`.
    pub leq: u64,
}

pub fn log_adder(logger: &mut ProofLogger, inputs: [Lit; 3]) -> Result<Adder, LogError> {
    let carry = log_reification(logger, &PBConstraint::geq(inputs.map(|l| (1, l)), 2))?;
    let mut sum_terms: Vec<(i64, Lit)> = inputs.map(|l| (1, l)).to_vec();
    sum_terms.push((2, carry.var.negative()));
    let sum = log_reification(logger, &PBConstraint::geq(sum_terms, 3))?;
    let geq = logger.pol(Rpn::start(sum.fwd).id(carry.fwd).scale(2).add().divide(3))?;
    let leq = logger.pol(Rpn::start(sum.bwd).id(carry.bwd).scale(2).add().divide(3))?;
    Ok(Adder {
        carry: carry.var,
        sum: sum.var,
        geq,
        leq,
    })
}

/// How the clauses `y′(b) ∨ C(ρ)` for parity-consistent `ρ` are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Step2Mode {
    /// One `rup` line each. When the logger carries a shadow checker and a
    /// line would be rejected, the explicit derivation is used instead.
    #[default]
    Rup,
    /// A `p` line from the summed adder equality.
    Explicit,
}

fn sum_rpn(ids: &[u64], tail: Option<RpnTail>) -> Option<Rpn> {
    if ids.len() == 1 && tail.is_none() {
        return None;
    }
    let mut rpn = Rpn::start(ids[0]);
    for &id in &ids[1..] {
        rpn = rpn.id(id).add();
    }
    Some(match tail {
        Some(RpnTail::Id(id)) => rpn.id(id).add(),
        Some(RpnTail::Lit(l)) => rpn.lit(l).add(),
        None => rpn,
    })
}

#[derive(Clone, Copy)]
enum RpnTail {
    Id(u64),
    Lit(Lit),
}

/// The derivation of `Σ fᵢ ≥ 1` from a complementary pair: add the literal
/// axioms to `first`, halve, double, and add `second`.
fn reason_rpn(first: u64, second: u64, falsified: &[Lit]) -> Rpn {
    let mut rpn = Rpn::start(first);
    for &l in falsified {
        rpn = rpn.lit(l);
    }
    for _ in falsified {
        rpn = rpn.add();
    }
    rpn.divide(2).scale(2).id(second).add()
}

/// Translates a detected parity into its pseudo-Boolean pair by way of a
/// chain of full adders. Returns the parity with its encoding attached.
pub fn log_cnf_to_pb(
    logger: &mut ProofLogger,
    d: &DetectedXor,
    mode: Step2Mode,
) -> Result<XorConstraint, XorLogError> {
    let k = d.vars.len();
    let b = d.xor.rhs();
    let x: Vec<Lit> = d.vars.iter().map(|v| v.positive()).collect();
    if k == 0 {
        return Err(XorLogError::Arity(0));
    }
    if k == 1 {
        // x = b: the unit clause is one half, a literal axiom the other
        let unit = d
            .clause_for(u32::from(!b))
            .ok_or(XorLogError::MissingClause(u32::from(!b)))?;
        let axiom = logger.pol(Rpn::new().lit(if b { !x[0] } else { x[0] }))?;
        let pb = if b {
            PbPair {
                geq: unit,
                leq: axiom,
            }
        } else {
            PbPair {
                geq: axiom,
                leq: unit,
            }
        };
        return Ok(d.xor.clone().with_pb(pb));
    }
    for mask in 0..(1u32 << k) {
        if (mask.count_ones() % 2 == 1) != b && d.clause_for(mask).is_none() {
            return Err(XorLogError::MissingClause(mask));
        }
    }

    // Step 1: adders from the top of the chain down
    let half = k / 2;
    let mut unit_u = None;
    let top = if k.is_multiple_of(2) {
        let u = logger.fresh_aux();
        let fix =
            Substitution::try_from_pairs([(u, SubstValue::Const(false))]).expect("single entry");
        unit_u = Some((u, logger.red(PBConstraint::clause([u.negative()]), fix)?));
        u.positive()
    } else {
        x[k - 1]
    };
    let mut carry_in = top;
    let mut geqs = Vec::with_capacity(half);
    let mut leqs = Vec::with_capacity(half);
    for i in (1..=half).rev() {
        let adder = log_adder(logger, [carry_in, x[2 * i - 1], x[2 * i - 2]])?;
        geqs.push(adder.geq);
        leqs.push(adder.leq);
        carry_in = adder.sum.positive();
    }
    let y_out = carry_in.var();
    let (geq_tail, leq_tail) = match unit_u {
        Some((u, id)) => (Some(RpnTail::Id(id)), Some(RpnTail::Lit(u.positive()))),
        None => (None, None),
    };
    let sum_geq = match sum_rpn(&geqs, geq_tail) {
        Some(rpn) => logger.pol(rpn)?,
        None => geqs[0],
    };
    let sum_leq = match sum_rpn(&leqs, leq_tail) {
        Some(rpn) => logger.pol(rpn)?,
        None => leqs[0],
    };

    // Step 2: y′ = b, by case analysis over all assignments to x
    let target = y_out.lit(b);
    let mut leaves = Vec::with_capacity(1 << k);
    for t in 0..(1u32 << k) {
        // x₁ is the most significant position of t
        let mask = (0..k)
            .filter(|&j| t >> (k - 1 - j) & 1 == 1)
            .fold(0u32, |m, j| m | 1 << j);
        if (mask.count_ones() % 2 == 1) != b {
            leaves.push(d.clause_for(mask).expect("checked above"));
            continue;
        }
        let falsified: Vec<Lit> = (0..k)
            .map(|j| if mask >> j & 1 == 1 { !x[j] } else { x[j] })
            .collect();
        let mut clause = falsified.clone();
        clause.push(target);
        let c = PBConstraint::clause(clause);
        let explicit = match mode {
            Step2Mode::Explicit => true,
            Step2Mode::Rup => logger.would_accept_rup(&c) == Some(false),
        };
        let id = if explicit {
            let mut f = falsified;
            f.push(target);
            logger.pol(reason_rpn(sum_leq, sum_geq, &f))?
        } else {
            logger.rup(c)?
        };
        leaves.push(id);
    }
    let unit = logger.pol(cascade(&leaves))?;

    let (geq, leq) = if b {
        (
            logger.pol(Rpn::start(sum_geq).id(unit).add())?,
            logger.pol(Rpn::start(sum_leq).lit(y_out.negative()).add())?,
        )
    } else {
        (
            logger.pol(Rpn::start(sum_geq).lit(y_out.positive()).add())?,
            logger.pol(Rpn::start(sum_leq).id(unit).add())?,
        )
    };
    Ok(d.xor.clone().with_pb(PbPair { geq, leq }))
}

/// `rec(prefix) = rec(prefix·0) rec(prefix·1) + 2 d` over a complete binary
/// tree of leaves.
fn cascade(leaves: &[u64]) -> Rpn {
    fn rec(rpn: Rpn, leaves: &[u64]) -> Rpn {
        if leaves.len() == 1 {
            return rpn.id(leaves[0]);
        }
        let (lo, hi) = leaves.split_at(leaves.len() / 2);
        rec(rec(rpn, lo), hi).add().divide(2)
    }
    rec(Rpn::new(), leaves)
}

/// Emits `p geq_a geq_b +` and `p leq_a leq_b +`.
pub fn log_xor_add(
    logger: &mut ProofLogger,
    a: &XorConstraint,
    b: &XorConstraint,
) -> Result<XorConstraint, XorLogError> {
    let (pa, pb) = match (a.pb(), b.pb()) {
        (Some(pa), Some(pb)) => (pa, pb),
        _ => return Err(XorLogError::MissingEncoding),
    };
    let geq = logger.pol(Rpn::start(pa.geq).id(pb.geq).add())?;
    let leq = logger.pol(Rpn::start(pa.leq).id(pb.leq).add())?;
    Ok(a.sum(b).with_pb(PbPair { geq, leq }))
}

/// The literals of the clause justifying that `rho` falsifies `x`: for each
/// variable, the literal that `rho` makes false.
pub fn reason_clause_lits(
    x: &XorConstraint,
    rho: &impl Assignment,
) -> Result<Vec<Lit>, XorLogError> {
    x.vars()
        .map(|v| {
            rho.value(v)
                .map(|val| v.lit(!val))
                .ok_or(XorLogError::Unassigned(v))
        })
        .collect()
}

/// Derives the clause of [`reason_clause_lits`] from the parity's pair with a
/// single `p` line and returns its id.
pub fn log_reason_clause(
    logger: &mut ProofLogger,
    x: &XorConstraint,
    rho: &impl Assignment,
) -> Result<u64, XorLogError> {
    let pb = x.pb().ok_or(XorLogError::MissingEncoding)?;
    let lits = reason_clause_lits(x, rho)?;
    if x.evaluate(rho) != Some(false) {
        return Err(XorLogError::NotViolated);
    }
    Ok(logger.pol(reason_rpn(pb.leq, pb.geq, &lits))?)
}
