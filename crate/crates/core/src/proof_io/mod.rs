//! Text formats: OPB and DIMACS CNF inputs, and the PBP proof dialect.

mod cnf;
mod names;
mod opb;
mod pbp;

use std::io::{self, Write};

use num_bigint::BigInt;
use thiserror::Error;

use crate::pb::{LinearInequality, Lit, PBConstraint};

pub use cnf::{parse_cnf, read_cnf, write_cnf};
pub use names::VarNames;
pub use opb::{parse_opb, read_opb, write_opb};
pub use pbp::{parse_proof, parse_proof_line, write_step, ProofReader, ProofStep, ProofWriter};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {declared} {what}, body has {found}")]
    HeaderMismatch {
        what: &'static str,
        declared: u64,
        found: u64,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            message: message.into(),
        }
    }
}

/// An input formula: constraints in file order, so that constraint `i` of the
/// list gets id `i + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Formula {
    /// Number of input variables, `x1..x<num_vars>`.
    pub num_vars: u32,
    pub constraints: Vec<PBConstraint>,
}

impl Formula {
    pub fn new(num_vars: u32, constraints: Vec<PBConstraint>) -> Self {
        Formula {
            num_vars,
            constraints,
        }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// The constraints as clauses, if every one of them is a clause in
    /// disguise. Trivially true constraints come back as `None` entries.
    pub fn clauses(&self) -> Option<Vec<Option<Vec<Lit>>>> {
        self.constraints
            .iter()
            .map(|c| {
                if c.is_trivial() {
                    Some(None)
                } else {
                    c.as_clause().map(Some)
                }
            })
            .collect()
    }
}

/// Relation symbols accepted in constraint text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Relation {
    Geq,
    Leq,
    Eq,
}

/// Raw `<coeff> <lit> ... <rel> <rhs>` with the `;` already removed.
pub(crate) struct RawConstraint {
    pub terms: Vec<(BigInt, Lit)>,
    pub relation: Relation,
    pub rhs: BigInt,
}

impl RawConstraint {
    pub fn into_constraints(self) -> Vec<PBConstraint> {
        let geq = |terms: Vec<(BigInt, Lit)>, rhs: BigInt| {
            crate::pb::normalize(LinearInequality::new(terms, rhs))
        };
        match self.relation {
            Relation::Geq => vec![geq(self.terms, self.rhs)],
            Relation::Leq => vec![geq(
                self.terms.into_iter().map(|(a, l)| (-a, l)).collect(),
                -self.rhs,
            )],
            Relation::Eq => {
                let neg = self.terms.iter().map(|(a, l)| (-a, *l)).collect();
                vec![geq(self.terms, self.rhs.clone()), geq(neg, -self.rhs)]
            }
        }
    }
}

pub(crate) fn parse_int(token: &str) -> Option<BigInt> {
    let digits = token.strip_prefix('+').unwrap_or(token);
    let body = digits.strip_prefix('-').unwrap_or(digits);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses a constraint body. `lit` resolves literal tokens.
pub(crate) fn parse_raw_constraint(
    tokens: &[&str],
    mut lit: impl FnMut(&str) -> Result<Lit, String>,
) -> Result<RawConstraint, String> {
    let mut terms = Vec::new();
    let mut i = 0;
    loop {
        let Some(&tok) = tokens.get(i) else {
            return Err("missing relation".into());
        };
        let relation = match tok {
            ">=" => Some(Relation::Geq),
            "<=" => Some(Relation::Leq),
            "=" => Some(Relation::Eq),
            _ => None,
        };
        if let Some(relation) = relation {
            let rhs = match tokens.get(i + 1) {
                Some(t) => parse_int(t).ok_or_else(|| format!("bad right-hand side `{t}`"))?,
                None => return Err("missing right-hand side".into()),
            };
            if let Some(extra) = tokens.get(i + 2) {
                return Err(format!("unexpected `{extra}` after right-hand side"));
            }
            return Ok(RawConstraint {
                terms,
                relation,
                rhs,
            });
        }
        let coeff = parse_int(tok).ok_or_else(|| format!("expected coefficient, found `{tok}`"))?;
        let l = match tokens.get(i + 1) {
            Some(t) => lit(t)?,
            None => return Err(format!("coefficient `{tok}` has no literal")),
        };
        terms.push((coeff, l));
        i += 2;
    }
}

pub(crate) fn write_constraint(
    w: &mut impl Write,
    c: &PBConstraint,
    names: Option<&VarNames>,
) -> io::Result<()> {
    for t in c.terms() {
        match names {
            Some(n) => write!(w, "+{} {} ", t.coeff, n.lit_name(t.lit))?,
            None => write!(w, "+{} {} ", t.coeff, t.lit)?,
        }
    }
    write!(w, ">= {}", c.degree())
}
