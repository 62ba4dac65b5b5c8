//! Proof checking against an id-indexed constraint database.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use thiserror::Error;

use crate::cutting_planes::{eval_rpn_with_stats, ConstraintLookup, RpnError, RpnStats};
use crate::pb::{PBConstraint, Var};
use crate::proof_io::{Formula, ParseError, ProofStep};
use crate::propagation::{Propagator, SlotId};
use crate::redundancy::{check_in, Origin, RedundancyContext, RedundancyVerdict};

/// Constraints by id, with structural membership counts, per-variable
/// occurrence sets and a propagation engine kept in sync.
#[derive(Default)]
pub struct ConstraintDatabase {
    constraints: HashMap<u64, (PBConstraint, SlotId)>,
    members: HashMap<PBConstraint, usize>,
    occurs: HashMap<Var, BTreeSet<u64>>,
    engine: Propagator,
    next_id: u64,
    peak: usize,
}

impl ConstraintDatabase {
    pub fn new() -> Self {
        ConstraintDatabase {
            next_id: 1,
            ..Default::default()
        }
    }

    /// Stores `c` under the next id and returns it.
    pub fn insert(&mut self, c: PBConstraint) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let slot = self.engine.add(&c);
        for v in c.vars() {
            self.occurs.entry(v).or_default().insert(id);
        }
        *self.members.entry(c.clone()).or_insert(0) += 1;
        self.constraints.insert(id, (c, slot));
        self.peak = self.peak.max(self.constraints.len());
        id
    }

    pub fn delete(&mut self, id: u64) -> Option<PBConstraint> {
        let (c, slot) = self.constraints.remove(&id)?;
        self.engine.remove(slot);
        for v in c.vars() {
            if let Some(set) = self.occurs.get_mut(&v) {
                set.remove(&id);
            }
        }
        if let Some(n) = self.members.get_mut(&c) {
            *n -= 1;
            if *n == 0 {
                self.members.remove(&c);
            }
        }
        Some(c)
    }

    pub fn get(&self, id: u64) -> Option<&PBConstraint> {
        self.constraints.get(&id).map(|e| &e.0)
    }

    /// The id the next stored constraint will receive.
    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn peak_len(&self) -> usize {
        self.peak
    }

    pub fn propagations(&self) -> u64 {
        self.engine.stats().propagations
    }

    pub fn rup(&mut self, c: &PBConstraint) -> bool {
        self.engine.rup(c)
    }

    /// Live `(id, constraint)` pairs in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &PBConstraint)> {
        let mut ids: Vec<u64> = self.constraints.keys().copied().collect();
        ids.sort_unstable();
        ids.into_iter()
            .map(move |id| (id, &self.constraints[&id].0))
    }
}

impl ConstraintLookup for ConstraintDatabase {
    fn lookup(&self, id: u64) -> Option<&PBConstraint> {
        self.get(id)
    }
}

impl RedundancyContext for ConstraintDatabase {
    fn mentioning(&self, vars: &[Var]) -> Vec<(u64, PBConstraint)> {
        let mut ids = BTreeSet::new();
        for v in vars {
            if let Some(set) = self.occurs.get(v) {
                ids.extend(set.iter().copied());
            }
        }
        ids.into_iter()
            .map(|id| (id, self.constraints[&id].0.clone()))
            .collect()
    }

    fn contains(&self, c: &PBConstraint) -> bool {
        self.members.contains_key(c)
    }

    fn rup_with(&mut self, c: &PBConstraint, extra: &[&PBConstraint]) -> bool {
        self.engine.rup_with(c, extra)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("proof must start with a header")]
    MissingHeader,
    #[error("header may only appear as the first step")]
    MisplacedHeader,
    #[error("unsupported proof version {0}")]
    UnsupportedVersion(String),
    #[error("constraints may only be loaded once")]
    DuplicateLoad,
    #[error("formula has {actual} constraints but the proof expects {expected}")]
    LoadCountMismatch { expected: u64, actual: u64 },
    #[error("formula constraints must be loaded with `f` first")]
    NotLoaded,
    #[error("pol: {0}")]
    Rpn(#[from] RpnError),
    #[error("constraint is not implied by reverse unit propagation")]
    RupFailed,
    #[error("redundancy check failed on {}: restricted constraint {restricted} is not implied", describe(.origin))]
    RedundancyFailed {
        origin: Origin,
        restricted: PBConstraint,
    },
    #[error("unknown constraint id {0}")]
    UnknownId(u64),
    #[error("constraint {id} is not a contradiction: {constraint}")]
    NotContradiction { id: u64, constraint: PBConstraint },
    #[error("no steps may follow the conclusion")]
    AfterConclusion,
}

fn describe(origin: &Origin) -> String {
    match origin {
        Origin::Database(id) => format!("constraint {id}"),
        Origin::Candidate => "the new constraint".into(),
    }
}

/// What a valid step did to the database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepEffect {
    Header,
    Loaded { count: u64 },
    Added { id: u64 },
    Deleted { count: usize },
    Concluded { id: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifierStats {
    pub steps: u64,
    pub rup_checks: u64,
    pub red_checks: u64,
    pub pol_operations: u64,
    pub propagations: u64,
    pub peak_constraints: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Start,
    Running,
    Concluded,
}

/// Applies proof steps one at a time.
pub struct Checker {
    formula: Vec<PBConstraint>,
    db: ConstraintDatabase,
    phase: Phase,
    loaded: bool,
    stats: VerifierStats,
}

impl Checker {
    pub fn new(formula: &Formula) -> Self {
        Self::from_constraints(formula.constraints.clone())
    }

    pub fn from_constraints(formula: Vec<PBConstraint>) -> Self {
        Checker {
            formula,
            db: ConstraintDatabase::new(),
            phase: Phase::Start,
            loaded: false,
            stats: VerifierStats::default(),
        }
    }

    pub fn database(&self) -> &ConstraintDatabase {
        &self.db
    }

    pub fn is_concluded(&self) -> bool {
        self.phase == Phase::Concluded
    }

    pub fn stats(&self) -> VerifierStats {
        VerifierStats {
            propagations: self.db.propagations(),
            peak_constraints: self.db.peak_len(),
            ..self.stats
        }
    }

    /// Whether `c` is RUP with respect to the current database, without
    /// storing it.
    pub fn probe_rup(&mut self, c: &PBConstraint) -> bool {
        self.db.rup(c)
    }

    /// Checks one step and updates the database if it is valid. An invalid
    /// step leaves the database untouched.
    pub fn apply(&mut self, step: &ProofStep) -> Result<StepEffect, StepError> {
        match self.phase {
            Phase::Concluded => return Err(StepError::AfterConclusion),
            Phase::Start => {
                let ProofStep::Header { version } = step else {
                    return Err(StepError::MissingHeader);
                };
                if !version.starts_with("1.") {
                    return Err(StepError::UnsupportedVersion(version.clone()));
                }
                self.phase = Phase::Running;
                self.stats.steps += 1;
                return Ok(StepEffect::Header);
            }
            Phase::Running => {}
        }
        let effect = match step {
            ProofStep::Header { .. } => return Err(StepError::MisplacedHeader),
            ProofStep::Load { count } => {
                if self.loaded {
                    return Err(StepError::DuplicateLoad);
                }
                let actual = self.formula.len() as u64;
                if *count != actual {
                    return Err(StepError::LoadCountMismatch {
                        expected: *count,
                        actual,
                    });
                }
                for c in std::mem::take(&mut self.formula) {
                    self.db.insert(c);
                }
                self.loaded = true;
                StepEffect::Loaded { count: *count }
            }
            _ if !self.loaded => return Err(StepError::NotLoaded),
            ProofStep::Pol { tokens } => {
                let mut stats = RpnStats::default();
                let c = eval_rpn_with_stats(tokens, &self.db, &mut stats)?;
                self.stats.pol_operations += stats.operations();
                StepEffect::Added {
                    id: self.db.insert(c),
                }
            }
            ProofStep::Rup { constraint } => {
                self.stats.rup_checks += 1;
                if !self.db.rup(constraint) {
                    return Err(StepError::RupFailed);
                }
                StepEffect::Added {
                    id: self.db.insert(constraint.clone()),
                }
            }
            ProofStep::Red {
                constraint,
                witness,
            } => {
                self.stats.red_checks += 1;
                if let RedundancyVerdict::Reject(f) = check_in(&mut self.db, constraint, witness) {
                    return Err(StepError::RedundancyFailed {
                        origin: f.origin,
                        restricted: f.restricted,
                    });
                }
                StepEffect::Added {
                    id: self.db.insert(constraint.clone()),
                }
            }
            ProofStep::Del { ids } => {
                if let Some(&missing) = ids.iter().find(|&&id| self.db.get(id).is_none()) {
                    return Err(StepError::UnknownId(missing));
                }
                let unique: BTreeSet<u64> = ids.iter().copied().collect();
                for &id in &unique {
                    self.db.delete(id);
                }
                StepEffect::Deleted {
                    count: unique.len(),
                }
            }
            ProofStep::Conclusion { id } => {
                let c = self.db.get(*id).ok_or(StepError::UnknownId(*id))?;
                if !c.is_contradiction() {
                    return Err(StepError::NotContradiction {
                        id: *id,
                        constraint: c.clone(),
                    });
                }
                self.phase = Phase::Concluded;
                StepEffect::Concluded { id: *id }
            }
        };
        self.stats.steps += 1;
        Ok(effect)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    VerifiedUnsat,
    AllStepsValid,
    Rejected {
        /// 1-based position among proof steps (comments and blank lines excluded).
        step: usize,
        /// 1-based line in the proof text, 0 if unknown.
        line: usize,
        reason: String,
    },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        !matches!(self, Verdict::Rejected { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub verdict: Verdict,
    pub stats: VerifierStats,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Reject with a timeout reason once this instant passes.
    pub deadline: Option<Instant>,
}

/// Checks a stream of `(line, step)` items, such as a
/// [`ProofReader`](crate::proof_io::ProofReader).
pub fn verify(
    formula: &Formula,
    steps: impl IntoIterator<Item = Result<(usize, ProofStep), ParseError>>,
    options: VerifyOptions,
) -> Report {
    verify_observed(formula, steps, options, |_, _, _| {})
}

/// Like [`verify`], calling `observe(index, step, effect)` after every valid step.
pub fn verify_observed(
    formula: &Formula,
    steps: impl IntoIterator<Item = Result<(usize, ProofStep), ParseError>>,
    options: VerifyOptions,
    mut observe: impl FnMut(usize, &ProofStep, &StepEffect),
) -> Report {
    let mut checker = Checker::new(formula);
    let mut index = 0;
    let reject = |checker: &Checker, step, line, reason: String| Report {
        verdict: Verdict::Rejected { step, line, reason },
        stats: checker.stats(),
    };
    for item in steps {
        index += 1;
        let (line, step) = match item {
            Ok(s) => s,
            Err(ParseError::Syntax { line, message }) => {
                return reject(&checker, index, line, message)
            }
            Err(e) => return reject(&checker, index, 0, e.to_string()),
        };
        if options.deadline.is_some_and(|d| Instant::now() > d) {
            return reject(&checker, index, line, "time limit exceeded".into());
        }
        match checker.apply(&step) {
            Ok(effect) => observe(index, &step, &effect),
            Err(e) => return reject(&checker, index, line, e.to_string()),
        }
    }
    if index == 0 {
        return reject(&checker, 1, 0, StepError::MissingHeader.to_string());
    }
    let verdict = if checker.is_concluded() {
        Verdict::VerifiedUnsat
    } else {
        Verdict::AllStepsValid
    };
    Report {
        verdict,
        stats: checker.stats(),
    }
}

/// Convenience wrapper for in-memory proofs.
pub fn verify_text(formula: &Formula, proof: &str) -> Report {
    verify(
        formula,
        crate::proof_io::ProofReader::new(proof.as_bytes()),
        VerifyOptions::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pb::Lit;

    fn x(i: u32) -> Lit {
        Var::input(i).positive()
    }

    fn formula(cs: Vec<PBConstraint>) -> Formula {
        Formula::new(4, cs)
    }

    #[test]
    fn direct_contradiction() {
        let f = formula(vec![
            PBConstraint::clause([x(1)]),
            PBConstraint::clause([!x(1)]),
        ]);
        let r = verify_text(&f, "pseudo-Boolean proof version 1.1\nf 2\np 1 2 +\nc 3\n");
        assert_eq!(r.verdict, Verdict::VerifiedUnsat);
    }

    #[test]
    fn rup_then_conclude() {
        let f = formula(vec![
            PBConstraint::clause([x(1), x(2)]),
            PBConstraint::clause([x(1), !x(2)]),
            PBConstraint::clause([!x(1), x(2)]),
            PBConstraint::clause([!x(1), !x(2)]),
        ]);
        let proof = "pseudo-Boolean proof version 1.1\nf 4\nrup +1 x1 >= 1 ;\nrup >= 1 ;\nc 6\n";
        let r = verify_text(&f, proof);
        assert_eq!(r.verdict, Verdict::VerifiedUnsat);
        assert_eq!(r.stats.steps, 5);
        assert_eq!(r.stats.rup_checks, 2);
    }

    fn rejected_at(r: &Report) -> usize {
        match &r.verdict {
            Verdict::Rejected { step, .. } => *step,
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn rejections_carry_step_index() {
        let f = formula(vec![PBConstraint::clause([x(1), x(2)])]);
        let cases = [
            ("f 1\n", 1),
            ("pseudo-Boolean proof version 1.1\nf 2\n", 2),
            ("pseudo-Boolean proof version 1.1\nrup +1 x1 >= 1 ;\n", 2),
            (
                "pseudo-Boolean proof version 1.1\nf 1\nrup +1 x1 >= 1 ;\n",
                3,
            ),
            (
                "pseudo-Boolean proof version 1.1\nf 1\n* note\np 1 7 +\n",
                3,
            ),
            ("pseudo-Boolean proof version 1.1\nf 1\nc 1\n", 3),
            (
                "pseudo-Boolean proof version 1.1\nf 1\ndel id 1\ndel id 1\n",
                4,
            ),
            ("pseudo-Boolean proof version 1.1\nf 1\nf 1\n", 3),
            ("pseudo-Boolean proof version 1.1\nf 1\nnonsense\n", 3),
            ("pseudo-Boolean proof version 2.0\n", 1),
            ("", 1),
        ];
        for (proof, step) in cases {
            assert_eq!(rejected_at(&verify_text(&f, proof)), step, "{proof:?}");
        }
    }

    #[test]
    fn nothing_after_conclusion() {
        let f = formula(vec![PBConstraint::contradiction()]);
        let r = verify_text(
            &f,
            "pseudo-Boolean proof version 1.1\nf 1\nc 1\nrup >= 1 ;\n",
        );
        assert_eq!(rejected_at(&r), 4);
    }

    #[test]
    fn without_conclusion_all_steps_valid() {
        let f = formula(vec![PBConstraint::clause([x(1)])]);
        let r = verify_text(
            &f,
            "pseudo-Boolean proof version 1.1\nf 1\nrup +1 x1 +1 x2 >= 1 ;\n",
        );
        assert_eq!(r.verdict, Verdict::AllStepsValid);
    }

    #[test]
    fn deleted_constraints_are_gone() {
        let f = formula(vec![
            PBConstraint::clause([x(1)]),
            PBConstraint::clause([!x(1)]),
        ]);
        let r = verify_text(
            &f,
            "pseudo-Boolean proof version 1.1\nf 2\ndel id 2\nrup >= 1 ;\n",
        );
        assert_eq!(rejected_at(&r), 4);
        let mut c = Checker::new(&f);
        c.apply(&ProofStep::Header {
            version: "1.1".into(),
        })
        .unwrap();
        c.apply(&ProofStep::Load { count: 2 }).unwrap();
        c.apply(&ProofStep::Del { ids: vec![1] }).unwrap();
        let e = c.apply(&ProofStep::Rup {
            constraint: PBConstraint::clause([x(2)]),
        });
        assert_eq!(e, Err(StepError::RupFailed));
        assert_eq!(c.database().next_id(), 3);
    }

    #[test]
    fn redundancy_uses_database_and_candidate() {
        let f = formula(vec![PBConstraint::clause([x(1), x(2)])]);
        let ok = "pseudo-Boolean proof version 1.1\nf 1\nred +1 ~y1 +1 x1 >= 1 ; y1 -> 0\nred +1 y1 +1 ~x1 >= 1 ; y1 -> 1\n";
        assert_eq!(verify_text(&f, ok).verdict, Verdict::AllStepsValid);
        let bad = "pseudo-Boolean proof version 1.1\nf 1\nred +1 ~x1 >= 1 ; x1 -> 1\n";
        assert_eq!(rejected_at(&verify_text(&f, bad)), 3);
    }
}
