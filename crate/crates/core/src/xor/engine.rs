use std::collections::HashMap;

use super::{
    detect_xors, log_cnf_to_pb, log_reason_clause, log_xor_add, reason_clause_lits, BitSet,
    Implied, RowSnapshot, Step2Mode, XorConstraint, XorLogError, XorMatrix,
};
use crate::logging::ProofLogger;
use crate::pb::{Assignment, Lit, Namespace, Var};
use crate::proof_io::Formula;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XorEvent {
    Propagate(Lit, RowSnapshot),
    Conflict(RowSnapshot),
}

/// The hooks a host solver drives.
pub trait ParityPropagator {
    fn on_assignment(&mut self, lit: Lit);
    fn on_backjump(&mut self, var: Var);
    /// Next consequence of the current assignment, if any.
    fn propagate(&mut self) -> Option<XorEvent>;
    /// Logs the clause explaining `event` under `rho` and returns its id.
    /// For a propagation, `rho` must assign the propagated variable.
    fn get_reason(
        &mut self,
        logger: &mut ProofLogger,
        event: &XorEvent,
        rho: &dyn Assignment,
    ) -> Result<u64, XorLogError>;
}

/// `rho` with one variable's value flipped.
struct Flipped<'a> {
    inner: &'a dyn Assignment,
    var: Var,
}

impl Assignment for Flipped<'_> {
    fn value(&self, var: Var) -> Option<bool> {
        let v = self.inner.value(var);
        if var == self.var {
            v.map(|b| !b)
        } else {
            v
        }
    }
}

/// Gaussian elimination over the parities detected in a formula, with
/// proofs produced on demand.
#[derive(Debug)]
pub struct XorEngine {
    originals: Vec<XorConstraint>,
    matrix: XorMatrix,
    /// Encodings of sums of originals, keyed by the set of summands.
    sums: HashMap<BitSet, XorConstraint>,
}

impl XorEngine {
    /// Detects parities in `formula` and, with a logger, emits their
    /// pseudo-Boolean encodings. Parities whose encoding cannot be logged
    /// are dropped.
    pub fn attach(
        formula: &Formula,
        k_max: usize,
        mode: Step2Mode,
        mut logger: Option<&mut ProofLogger>,
    ) -> Result<Self, XorLogError> {
        let mut originals = Vec::new();
        for d in detect_xors(formula, k_max) {
            match logger.as_deref_mut() {
                Some(l) => match log_cnf_to_pb(l, &d, mode) {
                    Ok(x) => originals.push(x),
                    Err(XorLogError::MissingClause(_)) => {}
                    Err(e) => return Err(e),
                },
                None => originals.push(d.xor),
            }
        }
        Ok(Self::from_xors(originals))
    }

    /// An engine over given parities, which must carry encodings if proofs
    /// will be requested.
    pub fn from_xors(originals: Vec<XorConstraint>) -> Self {
        let matrix = XorMatrix::new(&originals);
        XorEngine {
            originals,
            matrix,
            sums: HashMap::new(),
        }
    }

    pub fn originals(&self) -> &[XorConstraint] {
        &self.originals
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    /// The encoded sum of the originals in `provenance`, logging whatever
    /// partial sums are not yet known.
    pub fn materialize(
        &mut self,
        logger: &mut ProofLogger,
        provenance: &BitSet,
    ) -> Result<XorConstraint, XorLogError> {
        let mut members = provenance.iter();
        let Some(first) = members.next() else {
            return Ok(XorConstraint::from_bits(BitSet::new(), false));
        };
        let mut acc = self.originals[first].clone();
        let mut key: BitSet = [first].into_iter().collect();
        for next in members {
            key.insert(next);
            acc = match self.sums.get(&key) {
                Some(known) => known.clone(),
                None => {
                    let s = log_xor_add(logger, &acc, &self.originals[next])?;
                    self.sums.insert(key.clone(), s.clone());
                    s
                }
            };
        }
        Ok(acc)
    }

    /// The clause literals explaining `event`; the propagated literal, if
    /// any, comes first.
    pub fn reason_lits(event: &XorEvent, rho: &dyn Assignment) -> Result<Vec<Lit>, XorLogError> {
        match event {
            XorEvent::Conflict(snap) => reason_clause_lits(&snap.xor, &rho),
            XorEvent::Propagate(lit, snap) => {
                let flipped = Flipped {
                    inner: rho,
                    var: lit.var(),
                };
                let mut lits = reason_clause_lits(&snap.xor, &flipped)?;
                let pos = lits
                    .iter()
                    .position(|l| l == lit)
                    .expect("propagated literal is in its reason");
                lits.swap(0, pos);
                Ok(lits)
            }
        }
    }
}

impl ParityPropagator for XorEngine {
    fn on_assignment(&mut self, lit: Lit) {
        if lit.var().namespace() == Namespace::Input {
            self.matrix
                .assign(lit.var().index() as usize, !lit.is_negated());
        }
    }

    fn on_backjump(&mut self, var: Var) {
        if var.namespace() == Namespace::Input {
            self.matrix.unassign(var.index() as usize);
        }
    }

    fn propagate(&mut self) -> Option<XorEvent> {
        self.matrix.gauss_step().map(|e| match e {
            Implied::Propagation(col, value, snap) => {
                XorEvent::Propagate(Var::input(col as u32).lit(value), snap)
            }
            Implied::Conflict(snap) => XorEvent::Conflict(snap),
        })
    }

    fn get_reason(
        &mut self,
        logger: &mut ProofLogger,
        event: &XorEvent,
        rho: &dyn Assignment,
    ) -> Result<u64, XorLogError> {
        let (snap, flip) = match event {
            XorEvent::Conflict(snap) => (snap, None),
            XorEvent::Propagate(lit, snap) => (snap, Some(lit.var())),
        };
        let x = self.materialize(logger, &snap.provenance)?;
        debug_assert_eq!(x.bits(), snap.xor.bits());
        match flip {
            Some(var) => log_reason_clause(logger, &x, &Flipped { inner: rho, var }),
            None => log_reason_clause(logger, &x, &rho),
        }
    }
}
