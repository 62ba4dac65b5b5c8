//! Normalized pseudo-Boolean constraints.
//!
//! A constraint is kept in the canonical form `Σ aᵢ·ℓᵢ ≥ A` where every
//! literal is over a distinct variable, every coefficient is at least one,
//! the degree is non-negative and terms are sorted by variable. Two
//! constraints with the same Boolean meaning produced by the same sequence of
//! operations are therefore structurally equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Not;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Which variable space a variable lives in.
///
/// Input variables come from the formula; auxiliary variables are introduced
/// by proofs (reification, adder outputs) and never collide with inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    Input,
    Aux,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    ns: Namespace,
    index: u32,
}

impl Var {
    pub const fn input(index: u32) -> Self {
        Var {
            ns: Namespace::Input,
            index,
        }
    }

    pub const fn aux(index: u32) -> Self {
        Var {
            ns: Namespace::Aux,
            index,
        }
    }

    pub fn namespace(self) -> Namespace {
        self.ns
    }

    pub fn index(self) -> u32 {
        self.index
    }

    pub fn positive(self) -> Lit {
        Lit {
            var: self,
            negated: false,
        }
    }

    pub fn negative(self) -> Lit {
        Lit {
            var: self,
            negated: true,
        }
    }

    /// The literal over this variable that is true when the variable takes `value`.
    pub fn lit(self, value: bool) -> Lit {
        Lit {
            var: self,
            negated: !value,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ns {
            Namespace::Input => write!(f, "x{}", self.index),
            Namespace::Aux => write!(f, "y{}", self.index),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    var: Var,
    negated: bool,
}

impl Lit {
    pub fn new(var: Var, negated: bool) -> Self {
        Lit { var, negated }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit {
            var: self.var,
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~{}", self.var)
        } else {
            write!(f, "{}", self.var)
        }
    }
}

/// Read access to a (partial) assignment.
pub trait Assignment {
    fn value(&self, var: Var) -> Option<bool>;

    fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.value(lit.var).map(|v| lit.eval(v))
    }
}

impl Assignment for HashMap<Var, bool> {
    fn value(&self, var: Var) -> Option<bool> {
        self.get(&var).copied()
    }
}

impl Assignment for BTreeMap<Var, bool> {
    fn value(&self, var: Var) -> Option<bool> {
        self.get(&var).copied()
    }
}

impl<T: Assignment + ?Sized> Assignment for &T {
    fn value(&self, var: Var) -> Option<bool> {
        (**self).value(var)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: BigInt,
    pub lit: Lit,
}

/// An unnormalized linear inequality `Σ cᵢ·ℓᵢ ≥ rhs` with arbitrary integer
/// coefficients; literals may repeat.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearInequality {
    pub terms: Vec<(BigInt, Lit)>,
    pub rhs: BigInt,
}

impl LinearInequality {
    pub fn new(terms: Vec<(BigInt, Lit)>, rhs: BigInt) -> Self {
        LinearInequality { terms, rhs }
    }

    pub fn from_i64(terms: &[(i64, Lit)], rhs: i64) -> Self {
        LinearInequality {
            terms: terms.iter().map(|&(c, l)| (BigInt::from(c), l)).collect(),
            rhs: BigInt::from(rhs),
        }
    }
}

/// `Σ cᵢ·ℓᵢ = constant`, sugar for a pair of inequalities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearEquality {
    pub terms: Vec<(BigInt, Lit)>,
    pub constant: BigInt,
}

impl LinearEquality {
    pub fn new(terms: Vec<(BigInt, Lit)>, constant: BigInt) -> Self {
        LinearEquality { terms, constant }
    }

    pub fn from_i64(terms: &[(i64, Lit)], constant: i64) -> Self {
        LinearEquality {
            terms: terms.iter().map(|&(c, l)| (BigInt::from(c), l)).collect(),
            constant: BigInt::from(constant),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PBConstraint {
    terms: Vec<Term>,
    degree: BigInt,
}

/// Rewrites an arbitrary integer inequality into canonical normalized form.
///
/// Negative coefficients are flipped with `ℓ = 1 − ℓ̄`, repeated variables are
/// merged, zero terms are dropped and a non-positive degree is clamped to 0.
pub fn normalize(raw: LinearInequality) -> PBConstraint {
    let LinearInequality { terms, mut rhs } = raw;
    // coefficients expressed on the positive literal of each variable
    let mut acc: Vec<(Var, BigInt)> = Vec::with_capacity(terms.len());
    for (c, l) in terms {
        if l.negated {
            rhs -= &c;
            acc.push((l.var, -c));
        } else {
            acc.push((l.var, c));
        }
    }
    acc.sort_by_key(|a| a.0);

    let mut out: Vec<Term> = Vec::with_capacity(acc.len());
    let mut iter = acc.into_iter().peekable();
    while let Some((var, mut k)) = iter.next() {
        while let Some((v2, _)) = iter.peek() {
            if *v2 != var {
                break;
            }
            let (_, k2) = iter.next().unwrap();
            k += k2;
        }
        match k.sign() {
            num_bigint::Sign::Plus => out.push(Term {
                coeff: k,
                lit: var.positive(),
            }),
            num_bigint::Sign::Minus => {
                rhs -= &k;
                out.push(Term {
                    coeff: -k,
                    lit: var.negative(),
                });
            }
            num_bigint::Sign::NoSign => {}
        }
    }
    if rhs.is_negative() {
        rhs = BigInt::zero();
    }
    PBConstraint {
        terms: out,
        degree: rhs,
    }
}

impl PBConstraint {
    /// Builds a constraint from `Σ cᵢ·ℓᵢ ≥ rhs`, normalizing it.
    pub fn geq<C: Into<BigInt>, D: Into<BigInt>>(
        terms: impl IntoIterator<Item = (C, Lit)>,
        rhs: D,
    ) -> Self {
        normalize(LinearInequality {
            terms: terms.into_iter().map(|(c, l)| (c.into(), l)).collect(),
            rhs: rhs.into(),
        })
    }

    /// The clause `ℓ₁ + … + ℓₖ ≥ 1`.
    pub fn clause(lits: impl IntoIterator<Item = Lit>) -> Self {
        Self::geq(lits.into_iter().map(|l| (1, l)), 1)
    }

    /// The contradiction `0 ≥ 1`.
    pub fn contradiction() -> Self {
        PBConstraint {
            terms: Vec::new(),
            degree: BigInt::one(),
        }
    }

    /// Builds directly from already-canonical parts. Callers guarantee the
    /// canonical-form invariants.
    pub(crate) fn from_canonical(terms: Vec<Term>, degree: BigInt) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].lit.var < w[1].lit.var));
        debug_assert!(terms.iter().all(|t| t.coeff.is_positive()));
        debug_assert!(!degree.is_negative());
        PBConstraint { terms, degree }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> &BigInt {
        &self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.iter().map(|t| t.lit.var)
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.terms.iter().map(|t| t.lit)
    }

    pub fn coefficient_sum(&self) -> BigInt {
        self.terms.iter().map(|t| &t.coeff).sum()
    }

    /// Coefficient and literal on `var`, if the variable occurs.
    pub fn term_for(&self, var: Var) -> Option<&Term> {
        self.terms
            .binary_search_by(|t| t.lit.var.cmp(&var))
            .ok()
            .map(|i| &self.terms[i])
    }

    /// Degree 0: satisfied by every assignment.
    pub fn is_trivial(&self) -> bool {
        self.degree.is_zero()
    }

    /// Falsified by every assignment (coefficient sum below the degree).
    pub fn is_contradiction(&self) -> bool {
        self.coefficient_sum() < self.degree
    }

    /// The literals of this constraint if it is equivalent to a clause,
    /// i.e. the degree is positive and no coefficient is below it.
    pub fn as_clause(&self) -> Option<Vec<Lit>> {
        if self.degree.is_zero() || self.terms.iter().any(|t| t.coeff < self.degree) {
            return None;
        }
        Some(self.lits().collect())
    }

    /// `¬C`: the normalized form of `Σ −aᵢ·ℓᵢ ≥ −A + 1`.
    pub fn negate(&self) -> PBConstraint {
        // −a·ℓ = a·ℓ̄ − a for every term, so the degree picks up Σa.
        let mut degree = BigInt::one() - &self.degree;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                degree += &t.coeff;
                Term {
                    coeff: t.coeff.clone(),
                    lit: !t.lit,
                }
            })
            .collect();
        if degree.is_negative() {
            degree = BigInt::zero();
        }
        PBConstraint { terms, degree }
    }

    /// `C|ρ`: substitutes the constants and literals of `s`, shifting
    /// constants to the right-hand side.
    pub fn restrict(&self, s: &Substitution) -> PBConstraint {
        if s.is_empty() || !self.terms.iter().any(|t| s.get(t.lit.var).is_some()) {
            return self.clone();
        }
        let mut rhs = self.degree.clone();
        let mut raw = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match s.image(t.lit) {
                LitImage::Const(true) => rhs -= &t.coeff,
                LitImage::Const(false) => {}
                LitImage::Lit(l) => raw.push((t.coeff.clone(), l)),
            }
        }
        normalize(LinearInequality { terms: raw, rhs })
    }

    /// Whether `Σ_{α(ℓᵢ)=1} aᵢ ≥ A` under the total assignment `alpha`.
    pub fn evaluate(&self, alpha: &impl Assignment) -> Result<bool, UnassignedVariable> {
        let mut sum = BigInt::zero();
        for t in &self.terms {
            match alpha.lit_value(t.lit) {
                Some(true) => sum += &t.coeff,
                Some(false) => {}
                None => return Err(UnassignedVariable(t.lit.var)),
            }
        }
        Ok(sum >= self.degree)
    }

    /// Whether `other` follows from `self` by adding literal axioms.
    ///
    /// Each variable of `self` whose literal cannot be matched in `other` costs
    /// part of the degree; `other` is implied if its degree fits under what is
    /// left.
    pub fn implies_syntactically(&self, other: &PBConstraint) -> bool {
        if other.degree.is_zero() {
            return true;
        }
        let mut budget = self.degree.clone();
        for t in &self.terms {
            match other.term_for(t.lit.var) {
                Some(u) if u.lit == t.lit => {
                    if u.coeff < t.coeff {
                        budget -= &t.coeff - &u.coeff;
                    }
                }
                _ => budget -= &t.coeff,
            }
            if budget < other.degree {
                return false;
            }
        }
        other.degree <= budget
    }

    /// Sum of coefficients of literals not falsified by `rho`, minus the degree.
    pub fn slack(&self, rho: &impl Assignment) -> BigInt {
        let mut s = -self.degree.clone();
        for t in &self.terms {
            if rho.lit_value(t.lit) != Some(false) {
                s += &t.coeff;
            }
        }
        s
    }
}

impl PartialOrd for PBConstraint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PBConstraint {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |c: &PBConstraint| {
            c.terms
                .iter()
                .map(|t| (t.lit, t.coeff.clone()))
                .collect::<Vec<_>>()
        };
        key(self)
            .cmp(&key(other))
            .then_with(|| self.degree.cmp(&other.degree))
    }
}

impl fmt::Display for PBConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            write!(f, "+{} {} ", t.coeff, t.lit)?;
        }
        write!(f, ">= {}", self.degree)
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("variable {0} is not assigned")]
pub struct UnassignedVariable(pub Var);

/// Free-function form of [`PBConstraint::negate`].
pub fn negate(c: &PBConstraint) -> PBConstraint {
    c.negate()
}

/// Free-function form of [`PBConstraint::restrict`].
pub fn restrict(c: &PBConstraint, s: &Substitution) -> PBConstraint {
    c.restrict(s)
}

/// Free-function form of [`PBConstraint::implies_syntactically`].
pub fn implies_syntactically(c: &PBConstraint, d: &PBConstraint) -> bool {
    c.implies_syntactically(d)
}

/// Free-function form of [`PBConstraint::evaluate`].
pub fn evaluate(c: &PBConstraint, alpha: &impl Assignment) -> Result<bool, UnassignedVariable> {
    c.evaluate(alpha)
}

/// Splits an equality into its `≥` and `≤` halves, both normalized.
pub fn expand_equality(e: &LinearEquality) -> (PBConstraint, PBConstraint) {
    let geq = normalize(LinearInequality {
        terms: e.terms.clone(),
        rhs: e.constant.clone(),
    });
    let leq = normalize(LinearInequality {
        terms: e.terms.iter().map(|(c, l)| (-c, *l)).collect(),
        rhs: -e.constant.clone(),
    });
    (geq, leq)
}

/// What a substitution maps a variable to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubstValue {
    Const(bool),
    Lit(Lit),
}

/// Image of a literal under a substitution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LitImage {
    Const(bool),
    Lit(Lit),
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("variable {0} appears twice in the substitution")]
pub struct DuplicateVariable(pub Var);

/// A partial map from variables to constants or literals. Variables outside
/// the domain map to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, SubstValue>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn try_from_pairs(
        pairs: impl IntoIterator<Item = (Var, SubstValue)>,
    ) -> Result<Self, DuplicateVariable> {
        let mut s = Substitution::new();
        for (v, val) in pairs {
            s.insert(v, val)?;
        }
        Ok(s)
    }

    pub fn insert(&mut self, var: Var, value: SubstValue) -> Result<(), DuplicateVariable> {
        if self.map.insert(var, value).is_some() {
            return Err(DuplicateVariable(var));
        }
        Ok(())
    }

    pub fn get(&self, var: Var) -> Option<SubstValue> {
        self.map.get(&var).copied()
    }

    pub fn image(&self, lit: Lit) -> LitImage {
        match self.get(lit.var) {
            None => LitImage::Lit(lit),
            Some(SubstValue::Const(b)) => LitImage::Const(lit.eval(b)),
            Some(SubstValue::Lit(l)) => LitImage::Lit(if lit.negated { !l } else { l }),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, SubstValue)> + '_ {
        self.map.iter().map(|(v, s)| (*v, *s))
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.map.keys().copied()
    }
}

impl Assignment for Substitution {
    /// Only constant entries count as assigned.
    fn value(&self, var: Var) -> Option<bool> {
        match self.get(var) {
            Some(SubstValue::Const(b)) => Some(b),
            _ => None,
        }
    }
}
