//! Parity constraints: clausal detection, the pseudo-Boolean encoding of
//! parities with its proof logging, and Gaussian elimination.

mod bitset;
mod detect;
mod encode;
mod engine;
mod gauss;

pub use bitset::BitSet;
pub use detect::{detect_xors, DetectedXor, DEFAULT_K_MAX};
pub use encode::{
    log_adder, log_cnf_to_pb, log_reason_clause, log_reification, log_xor_add, reason_clause_lits,
    Adder, Reified, Step2Mode, XorLogError,
};
pub use engine::{ParityPropagator, XorEngine, XorEvent};
pub use gauss::{Implied, RowSnapshot, XorMatrix};

use crate::pb::{Assignment, Namespace, Var};

/// Ids of the two constraints `geq`/`leq` of a parity's pseudo-Boolean
/// encoding. Together they state `Σ cᵢxᵢ = K + 2·(auxiliary terms)`, with
/// odd `cᵢ` exactly for the parity's variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PbPair {
    /// The half with the input variables in positive form.
    pub geq: u64,
    /// The half with the input variables negated.
    pub leq: u64,
}

/// `x_{i₁} ⊕ … ⊕ x_{i_k} = rhs` over input variables, stored as a bitset of
/// input indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XorConstraint {
    vars: BitSet,
    rhs: bool,
    pb: Option<PbPair>,
}

impl XorConstraint {
    /// Repeated variables cancel. Panics on auxiliary variables.
    pub fn new(vars: impl IntoIterator<Item = Var>, rhs: bool) -> Self {
        let mut set = BitSet::new();
        for v in vars {
            assert_eq!(
                v.namespace(),
                Namespace::Input,
                "parities range over input variables"
            );
            set.toggle(v.index() as usize);
        }
        XorConstraint {
            vars: set,
            rhs,
            pb: None,
        }
    }

    pub(crate) fn from_bits(vars: BitSet, rhs: bool) -> Self {
        XorConstraint {
            vars,
            rhs,
            pb: None,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars.iter().map(|i| Var::input(i as u32))
    }

    pub fn bits(&self) -> &BitSet {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    pub fn pb(&self) -> Option<PbPair> {
        self.pb
    }

    pub fn with_pb(mut self, pb: PbPair) -> Self {
        self.pb = Some(pb);
        self
    }

    /// GF(2) sum; the result carries no encoding.
    pub fn sum(&self, other: &XorConstraint) -> XorConstraint {
        let mut vars = self.vars.clone();
        vars.xor_with(&other.vars);
        XorConstraint {
            vars,
            rhs: self.rhs ^ other.rhs,
            pb: None,
        }
    }

    /// `Some(true)` if satisfied, `None` if some variable is unassigned.
    pub fn evaluate(&self, rho: &impl Assignment) -> Option<bool> {
        let mut parity = false;
        for v in self.vars() {
            parity ^= rho.value(v)?;
        }
        Some(parity == self.rhs)
    }
}
