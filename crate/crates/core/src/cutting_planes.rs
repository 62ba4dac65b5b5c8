//! Cutting-planes derivation rules and the postfix evaluator used by `p` lines.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::pb::{Lit, PBConstraint, Term};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("division by zero")]
    ZeroDivisor,
    #[error("multiplication by zero")]
    ZeroFactor,
}

/// `cA·a + cB·b`, normalized. Opposite literals cancel through `ℓ + ℓ̄ = 1`.
pub fn linear_combination(
    a: &PBConstraint,
    b: &PBConstraint,
    ca: &BigInt,
    cb: &BigInt,
) -> PBConstraint {
    debug_assert!(!ca.is_negative() && !cb.is_negative());
    let scale = |t: &Term, k: &BigInt| t.coeff.clone() * k;
    let mut degree = a.degree() * ca + b.degree() * cb;
    let mut out: Vec<Term> = Vec::with_capacity(a.len() + b.len());
    let (ta, tb) = (a.terms(), b.terms());
    let (mut i, mut j) = (0, 0);
    let push = |out: &mut Vec<Term>, coeff: BigInt, lit: Lit| {
        if coeff.is_positive() {
            out.push(Term { coeff, lit });
        }
    };
    while i < ta.len() || j < tb.len() {
        let ord = match (ta.get(i), tb.get(j)) {
            (Some(x), Some(y)) => x.lit.var().cmp(&y.lit.var()),
            (Some(_), None) => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Less => {
                push(&mut out, scale(&ta[i], ca), ta[i].lit);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                push(&mut out, scale(&tb[j], cb), tb[j].lit);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let p = scale(&ta[i], ca);
                let q = scale(&tb[j], cb);
                if ta[i].lit == tb[j].lit {
                    push(&mut out, p + q, ta[i].lit);
                } else if p >= q {
                    degree -= &q;
                    push(&mut out, p - q, ta[i].lit);
                } else {
                    degree -= &p;
                    push(&mut out, q - p, tb[j].lit);
                }
                i += 1;
                j += 1;
            }
        }
    }
    if degree.is_negative() {
        degree = BigInt::zero();
    }
    PBConstraint::from_canonical(out, degree)
}

/// Sum of two constraints.
pub fn add(a: &PBConstraint, b: &PBConstraint) -> PBConstraint {
    linear_combination(a, b, &BigInt::one(), &BigInt::one())
}

/// Divides coefficients and degree by `d`, rounding up.
pub fn divide<D: Into<BigInt>>(c: &PBConstraint, d: D) -> Result<PBConstraint, RuleError> {
    let d = d.into();
    if !d.is_positive() {
        return Err(RuleError::ZeroDivisor);
    }
    if d.is_one() {
        return Ok(c.clone());
    }
    let terms = c
        .terms()
        .iter()
        .map(|t| Term {
            coeff: t.coeff.div_ceil(&d),
            lit: t.lit,
        })
        .collect();
    Ok(PBConstraint::from_canonical(terms, c.degree().div_ceil(&d)))
}

/// Scales coefficients and degree by `m`.
pub fn multiply<M: Into<BigInt>>(c: &PBConstraint, m: M) -> Result<PBConstraint, RuleError> {
    let m = m.into();
    if !m.is_positive() {
        return Err(RuleError::ZeroFactor);
    }
    let terms = c
        .terms()
        .iter()
        .map(|t| Term {
            coeff: &t.coeff * &m,
            lit: t.lit,
        })
        .collect();
    Ok(PBConstraint::from_canonical(terms, c.degree() * &m))
}

/// Caps every coefficient at the degree.
pub fn saturate(c: &PBConstraint) -> PBConstraint {
    let deg = c.degree();
    let terms = c
        .terms()
        .iter()
        .filter(|_| !deg.is_zero())
        .map(|t| Term {
            coeff: if &t.coeff > deg {
                deg.clone()
            } else {
                t.coeff.clone()
            },
            lit: t.lit,
        })
        .collect();
    PBConstraint::from_canonical(terms, deg.clone())
}

/// `ℓ ≥ 0`.
pub fn literal_axiom(lit: Lit) -> PBConstraint {
    PBConstraint::from_canonical(
        vec![Term {
            coeff: BigInt::one(),
            lit,
        }],
        BigInt::zero(),
    )
}

/// Constraint storage addressed by proof identifiers.
pub trait ConstraintLookup {
    fn lookup(&self, id: u64) -> Option<&PBConstraint>;
}

impl ConstraintLookup for HashMap<u64, PBConstraint> {
    fn lookup(&self, id: u64) -> Option<&PBConstraint> {
        self.get(&id)
    }
}

/// Identifiers `1..=len` map to slice positions.
impl ConstraintLookup for [PBConstraint] {
    fn lookup(&self, id: u64) -> Option<&PBConstraint> {
        usize::try_from(id)
            .ok()
            .and_then(|i| i.checked_sub(1))
            .and_then(|i| self.get(i))
    }
}

impl ConstraintLookup for Vec<PBConstraint> {
    fn lookup(&self, id: u64) -> Option<&PBConstraint> {
        self.as_slice().lookup(id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RpnToken {
    /// A scalar, or a constraint identifier when it sits in a constraint position.
    Int(BigInt),
    /// Literal axiom `ℓ ≥ 0`.
    Lit(Lit),
    Add,
    Mul,
    Div,
    Saturate,
}

impl fmt::Display for RpnToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RpnToken::Int(n) => write!(f, "{n}"),
            RpnToken::Lit(l) => write!(f, "{l}"),
            RpnToken::Add => f.write_str("+"),
            RpnToken::Mul => f.write_str("*"),
            RpnToken::Div => f.write_str("d"),
            RpnToken::Saturate => f.write_str("s"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum RpnError {
    #[error("empty expression")]
    Empty,
    #[error("stack underflow at token {0}")]
    StackUnderflow(usize),
    #[error("unknown constraint id {0}")]
    UnknownId(BigInt),
    #[error("token {0}: expected a scalar operand")]
    ScalarExpected(usize),
    #[error("token {0}: scalar must be positive")]
    NonPositiveScalar(usize),
    #[error("{0} items left on the stack")]
    Leftover(usize),
}

enum Item {
    Scalar(BigInt),
    Constraint(PBConstraint),
}

/// Counters accumulated while evaluating expressions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RpnStats {
    pub additions: u64,
    pub multiplications: u64,
    pub divisions: u64,
    pub saturations: u64,
}

impl RpnStats {
    pub fn operations(&self) -> u64 {
        self.additions + self.multiplications + self.divisions + self.saturations
    }
}

/// Evaluates a postfix cutting-planes expression against `db`.
///
/// Integers are pushed as scalars. `*` and `d` take their right operand as a
/// scalar and their left operand as a constraint; any integer found in a
/// constraint position is looked up as an identifier.
pub fn eval_rpn<D: ConstraintLookup + ?Sized>(
    tokens: &[RpnToken],
    db: &D,
) -> Result<PBConstraint, RpnError> {
    eval_rpn_with_stats(tokens, db, &mut RpnStats::default())
}

pub fn eval_rpn_with_stats<D: ConstraintLookup + ?Sized>(
    tokens: &[RpnToken],
    db: &D,
    stats: &mut RpnStats,
) -> Result<PBConstraint, RpnError> {
    if tokens.is_empty() {
        return Err(RpnError::Empty);
    }
    let resolve = |item: Item| -> Result<PBConstraint, RpnError> {
        match item {
            Item::Constraint(c) => Ok(c),
            Item::Scalar(n) => {
                let id = u64::try_from(&n).map_err(|_| RpnError::UnknownId(n.clone()))?;
                db.lookup(id).cloned().ok_or(RpnError::UnknownId(n))
            }
        }
    };
    let mut stack: Vec<Item> = Vec::new();
    for (pos, tok) in tokens.iter().enumerate() {
        match tok {
            RpnToken::Int(n) => stack.push(Item::Scalar(n.clone())),
            RpnToken::Lit(l) => stack.push(Item::Constraint(literal_axiom(*l))),
            RpnToken::Add => {
                let (b, a) = (stack.pop(), stack.pop());
                let (Some(a), Some(b)) = (a, b) else {
                    return Err(RpnError::StackUnderflow(pos));
                };
                let (a, b) = (resolve(a)?, resolve(b)?);
                stats.additions += 1;
                stack.push(Item::Constraint(add(&a, &b)));
            }
            RpnToken::Mul | RpnToken::Div => {
                let k = match stack.pop() {
                    Some(Item::Scalar(k)) => k,
                    Some(Item::Constraint(_)) => return Err(RpnError::ScalarExpected(pos)),
                    None => return Err(RpnError::StackUnderflow(pos)),
                };
                if !k.is_positive() {
                    return Err(RpnError::NonPositiveScalar(pos));
                }
                let c = resolve(stack.pop().ok_or(RpnError::StackUnderflow(pos))?)?;
                let r = if matches!(tok, RpnToken::Mul) {
                    stats.multiplications += 1;
                    multiply(&c, k)
                } else {
                    stats.divisions += 1;
                    divide(&c, k)
                };
                stack.push(Item::Constraint(r.expect("scalar checked positive")));
            }
            RpnToken::Saturate => {
                let c = resolve(stack.pop().ok_or(RpnError::StackUnderflow(pos))?)?;
                stats.saturations += 1;
                stack.push(Item::Constraint(saturate(&c)));
            }
        }
    }
    if stack.len() > 1 {
        return Err(RpnError::Leftover(stack.len()));
    }
    // a lone identifier copies that constraint
    resolve(stack.pop().ok_or(RpnError::Empty)?)
}
