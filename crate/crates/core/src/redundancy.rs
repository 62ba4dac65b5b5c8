//! Checking redundance-based strengthening steps against an explicit witness.
//!
//! A constraint `C` may be added to `F` when some substitution `ω` satisfies
//! `F ∧ ¬C ⊨ (F ∧ C)|ω`. The check accepts if `C` is RUP outright, and
//! otherwise requires each restricted constraint `D` to be trivially true,
//! already present in `F`, syntactically implied by `¬C`, or RUP with respect
//! to `F ∧ ¬C`.

use std::collections::HashMap;

use crate::pb::{PBConstraint, Substitution, Var};
use crate::propagation::Propagator;

pub use crate::pb::DuplicateVariable as MalformedWitness;

/// Where a restricted constraint came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Database(u64),
    Candidate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Acceptance {
    /// The constraint is implied by reverse unit propagation.
    Rup,
    /// Every restricted constraint passed one of the witness checks.
    Witness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedundancyFailure {
    pub origin: Origin,
    /// The restricted constraint that no check could justify.
    pub restricted: PBConstraint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RedundancyVerdict {
    Accept(Acceptance),
    Reject(RedundancyFailure),
}

impl RedundancyVerdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, RedundancyVerdict::Accept(_))
    }
}

/// The database view the check needs.
pub trait RedundancyContext {
    /// Constraints mentioning any of `vars`, in ascending id order. Every other
    /// constraint restricts to itself and passes trivially.
    fn mentioning(&self, vars: &[Var]) -> Vec<(u64, PBConstraint)>;
    /// Structural membership of a canonical constraint.
    fn contains(&self, c: &PBConstraint) -> bool;
    /// RUP of `c` with respect to the database plus `extra`.
    fn rup_with(&mut self, c: &PBConstraint, extra: &[&PBConstraint]) -> bool;
}

pub fn check_in<Ctx: RedundancyContext + ?Sized>(
    ctx: &mut Ctx,
    c: &PBConstraint,
    witness: &Substitution,
) -> RedundancyVerdict {
    if ctx.rup_with(c, &[]) {
        return RedundancyVerdict::Accept(Acceptance::Rup);
    }
    let neg = c.negate();
    let domain: Vec<Var> = witness.domain().collect();
    let mut to_check: Vec<(Origin, PBConstraint)> = ctx
        .mentioning(&domain)
        .into_iter()
        .map(|(id, d)| (Origin::Database(id), d))
        .collect();
    to_check.push((Origin::Candidate, c.clone()));

    for (origin, d) in to_check {
        let restricted = d.restrict(witness);
        let ok = restricted.is_trivial()
            || ctx.contains(&restricted)
            || neg.implies_syntactically(&restricted)
            || ctx.rup_with(&restricted, &[&neg]);
        if !ok {
            return RedundancyVerdict::Reject(RedundancyFailure { origin, restricted });
        }
    }
    RedundancyVerdict::Accept(Acceptance::Witness)
}

/// A self-contained database for one-off checks.
pub struct SimpleContext {
    constraints: Vec<(u64, PBConstraint)>,
    members: HashMap<PBConstraint, usize>,
    engine: Propagator,
}

impl SimpleContext {
    pub fn new<'a>(db: impl IntoIterator<Item = (u64, &'a PBConstraint)>) -> Self {
        let mut constraints: Vec<(u64, PBConstraint)> =
            db.into_iter().map(|(i, c)| (i, c.clone())).collect();
        constraints.sort_by_key(|e| e.0);
        let mut members = HashMap::new();
        let mut engine = Propagator::new();
        for (_, c) in &constraints {
            *members.entry(c.clone()).or_insert(0) += 1;
            engine.add(c);
        }
        SimpleContext {
            constraints,
            members,
            engine,
        }
    }
}

impl RedundancyContext for SimpleContext {
    fn mentioning(&self, vars: &[Var]) -> Vec<(u64, PBConstraint)> {
        self.constraints
            .iter()
            .filter(|(_, c)| vars.iter().any(|&v| c.term_for(v).is_some()))
            .cloned()
            .collect()
    }

    fn contains(&self, c: &PBConstraint) -> bool {
        self.members.contains_key(c)
    }

    fn rup_with(&mut self, c: &PBConstraint, extra: &[&PBConstraint]) -> bool {
        self.engine.rup_with(c, extra)
    }
}

/// Runs the redundancy check of `c` with witness `ω` against `db`, whose
/// constraints are numbered by their position starting at 1.
pub fn redundancy_check(
    db: &[PBConstraint],
    c: &PBConstraint,
    witness: &Substitution,
) -> RedundancyVerdict {
    let mut ctx = SimpleContext::new(db.iter().enumerate().map(|(i, c)| (i as u64 + 1, c)));
    check_in(&mut ctx, c, witness)
}
