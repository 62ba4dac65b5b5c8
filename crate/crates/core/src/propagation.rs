//! Slack-based unit propagation over pseudo-Boolean constraints and the RUP
//! check.
//!
//! [`Propagator`] keeps general constraints indexed by literal occurrence
//! together with their slack under the empty assignment, and clauses of
//! degree one under two watched literals, so repeated checks against a growing
//! database only pay for the constraints they actually touch. Every check
//! starts from the empty assignment and leaves the engine equivalent to how
//! it found it; watches may move, but any pair is valid when nothing is
//! assigned.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::pb::{Assignment, Lit, PBConstraint, Var};

pub type SlotId = u32;

const UNASSIGNED: u8 = 2;

#[derive(Clone, Debug)]
struct Slot {
    lits: Vec<u32>,
    coeffs: Vec<BigInt>,
    root_slack: BigInt,
    max_coeff: BigInt,
    alive: bool,
    /// Degree 1 with at least two literals: propagated through watches.
    clause: bool,
}

/// Why a literal is on the trail: the slot that propagated it, or `None` for
/// an assumption.
pub type SlotReason = Option<SlotId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineOutcome {
    Fixpoint,
    Conflict(SlotId),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PropagationStats {
    pub checks: u64,
    pub propagations: u64,
}

#[derive(Clone, Debug, Default)]
pub struct Propagator {
    var_index: HashMap<Var, u32>,
    vars: Vec<Var>,
    slots: Vec<Slot>,
    occ: Vec<Vec<(SlotId, u32)>>,
    watches: Vec<Vec<SlotId>>,
    root_active: BTreeSet<SlotId>,
    dead: usize,
    // scratch state, reset after every check
    values: Vec<u8>,
    slack: Vec<BigInt>,
    touched: Vec<bool>,
    touched_list: Vec<SlotId>,
    trail: Vec<(u32, SlotReason)>,
    stats: PropagationStats,
}

fn lit_code(var: u32, negated: bool) -> u32 {
    2 * var + negated as u32
}

impl Propagator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> PropagationStats {
        self.stats
    }

    fn var_id(&mut self, var: Var) -> u32 {
        if let Some(&i) = self.var_index.get(&var) {
            return i;
        }
        let i = self.vars.len() as u32;
        self.vars.push(var);
        self.var_index.insert(var, i);
        self.values.push(UNASSIGNED);
        self.occ.push(Vec::new());
        self.occ.push(Vec::new());
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        i
    }

    fn code(&mut self, lit: Lit) -> u32 {
        lit_code(self.var_id(lit.var()), lit.is_negated())
    }

    fn decode(&self, code: u32) -> Lit {
        Lit::new(self.vars[(code / 2) as usize], code % 2 == 1)
    }

    /// Number of live constraints.
    pub fn len(&self) -> usize {
        self.slots.len() - self.dead
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add(&mut self, c: &PBConstraint) -> SlotId {
        let id = self.slots.len() as SlotId;
        let mut lits = Vec::with_capacity(c.len());
        let mut coeffs = Vec::with_capacity(c.len());
        let mut max_coeff = BigInt::zero();
        let clause = c.len() >= 2 && c.degree() == &BigInt::from(1);
        for (ti, t) in c.terms().iter().enumerate() {
            let code = self.code(t.lit);
            if clause {
                if ti < 2 {
                    self.watches[code as usize].push(id);
                }
            } else {
                self.occ[code as usize].push((id, ti as u32));
            }
            lits.push(code);
            if t.coeff > max_coeff {
                max_coeff = t.coeff.clone();
            }
            coeffs.push(t.coeff.clone());
        }
        let root_slack = c.coefficient_sum() - c.degree();
        if !clause && root_slack < max_coeff {
            self.root_active.insert(id);
        }
        self.slack.push(root_slack.clone());
        self.touched.push(false);
        self.slots.push(Slot {
            lits,
            coeffs,
            root_slack,
            max_coeff,
            alive: true,
            clause,
        });
        id
    }

    pub fn remove(&mut self, id: SlotId) {
        let slot = &mut self.slots[id as usize];
        if !slot.alive {
            return;
        }
        slot.alive = false;
        self.root_active.remove(&id);
        self.dead += 1;
        if self.dead > 1024 && self.dead * 2 > self.slots.len() {
            self.compact_occurrences();
        }
    }

    pub fn is_alive(&self, id: SlotId) -> bool {
        self.slots.get(id as usize).is_some_and(|s| s.alive)
    }

    fn compact_occurrences(&mut self) {
        let slots = &self.slots;
        for list in &mut self.occ {
            list.retain(|(s, _)| slots[*s as usize].alive);
        }
        for list in &mut self.watches {
            list.retain(|s| slots[*s as usize].alive);
        }
    }

    /// Removes the most recently added slots, which must not have been
    /// followed by a compaction.
    fn pop_slots(&mut self, count: usize) {
        for _ in 0..count {
            let id = (self.slots.len() - 1) as SlotId;
            let slot = self.slots.pop().unwrap();
            if slot.clause {
                for &code in &slot.lits[..2] {
                    let list = &mut self.watches[code as usize];
                    if let Some(pos) = list.iter().rposition(|&w| w == id) {
                        list.remove(pos);
                    }
                }
            } else {
                for &code in &slot.lits {
                    let popped = self.occ[code as usize].pop();
                    debug_assert_eq!(popped.map(|p| p.0), Some(id));
                }
            }
            if !slot.alive {
                self.dead -= 1;
            }
            self.root_active.remove(&id);
            self.slack.pop();
            self.touched.pop();
        }
    }

    fn assign(&mut self, code: u32, reason: SlotReason) {
        self.values[(code / 2) as usize] = code.is_multiple_of(2) as u8;
        self.trail.push((code, reason));
    }

    /// 1 if the literal is true, 0 if false, 2 if unassigned.
    fn lit_value(&self, code: u32) -> u8 {
        let v = self.values[(code / 2) as usize];
        if v == UNASSIGNED {
            UNASSIGNED
        } else {
            v ^ (code % 2) as u8
        }
    }

    fn touch(&mut self, id: SlotId) {
        if !self.touched[id as usize] {
            self.touched[id as usize] = true;
            self.touched_list.push(id);
        }
    }

    /// Propagates every unassigned literal whose coefficient exceeds the slack.
    /// Returns true on conflict.
    fn examine(&mut self, id: SlotId) -> bool {
        let slot = &self.slots[id as usize];
        let slack = &self.slack[id as usize];
        if slack.is_negative() {
            return true;
        }
        if *slack >= slot.max_coeff {
            return false;
        }
        let mut implied = Vec::new();
        for (code, coeff) in slot.lits.iter().zip(&slot.coeffs) {
            if coeff > slack && self.lit_value(*code) == UNASSIGNED {
                implied.push(*code);
            }
        }
        for code in implied {
            if self.lit_value(code) == UNASSIGNED {
                self.assign(code, Some(id));
                self.stats.propagations += 1;
            }
        }
        false
    }

    fn run(&mut self, assumptions: &[u32]) -> EngineOutcome {
        self.stats.checks += 1;
        for &code in assumptions {
            match self.lit_value(code) {
                UNASSIGNED => self.assign(code, None),
                1 => {}
                _ => debug_assert!(false, "inconsistent assumptions"),
            }
        }
        let active: Vec<SlotId> = self.root_active.iter().copied().collect();
        for id in active {
            if self.examine(id) {
                return EngineOutcome::Conflict(id);
            }
        }
        let mut head = 0;
        while head < self.trail.len() {
            let falsified = self.trail[head].0 ^ 1;
            head += 1;
            if let Some(id) = self.propagate_watches(falsified) {
                return EngineOutcome::Conflict(id);
            }
            let mut k = 0;
            while k < self.occ[falsified as usize].len() {
                let (id, ti) = self.occ[falsified as usize][k];
                k += 1;
                if !self.slots[id as usize].alive {
                    continue;
                }
                self.touch(id);
                let coeff = &self.slots[id as usize].coeffs[ti as usize];
                self.slack[id as usize] -= coeff;
                if self.examine(id) {
                    return EngineOutcome::Conflict(id);
                }
            }
        }
        EngineOutcome::Fixpoint
    }

    /// Visits the clauses watching `falsified`; returns a falsified clause.
    fn propagate_watches(&mut self, falsified: u32) -> Option<SlotId> {
        let mut ws = std::mem::take(&mut self.watches[falsified as usize]);
        let mut kept = 0;
        let mut conflict = None;
        let mut i = 0;
        while i < ws.len() {
            let id = ws[i];
            i += 1;
            if !self.slots[id as usize].alive {
                continue;
            }
            let slot = &mut self.slots[id as usize];
            if slot.lits[0] == falsified {
                slot.lits.swap(0, 1);
            }
            let first = slot.lits[0];
            let values = &self.values;
            let value = |code: u32| {
                let v = values[(code / 2) as usize];
                if v == UNASSIGNED {
                    UNASSIGNED
                } else {
                    v ^ (code % 2) as u8
                }
            };
            if value(first) == 1 {
                ws[kept] = id;
                kept += 1;
                continue;
            }
            if let Some(k) = (2..slot.lits.len()).find(|&k| value(slot.lits[k]) != 0) {
                slot.lits.swap(1, k);
                let w = slot.lits[1];
                self.watches[w as usize].push(id);
                continue;
            }
            ws[kept] = id;
            kept += 1;
            if value(first) == 0 {
                conflict = Some(id);
                while i < ws.len() {
                    ws[kept] = ws[i];
                    kept += 1;
                    i += 1;
                }
                break;
            }
            self.assign(first, Some(id));
            self.stats.propagations += 1;
        }
        ws.truncate(kept);
        // anything pushed here meanwhile belongs to clauses whose watch moved
        // onto this literal, which cannot happen for a falsified literal
        debug_assert!(self.watches[falsified as usize].is_empty());
        self.watches[falsified as usize] = ws;
        conflict
    }

    fn reset(&mut self) {
        for &(code, _) in &self.trail {
            self.values[(code / 2) as usize] = UNASSIGNED;
        }
        self.trail.clear();
        for &id in &self.touched_list {
            let i = id as usize;
            self.touched[i] = false;
            if let Some(slot) = self.slots.get(i) {
                self.slack[i].clone_from(&slot.root_slack);
            }
        }
        self.touched_list.clear();
    }

    /// Unit propagation from `assumptions` over the live constraints plus
    /// `extra` (added temporarily, after all stored constraints). Returns the
    /// outcome and the trail in assignment order.
    pub fn propagate_with(
        &mut self,
        assumptions: &[Lit],
        extra: &[&PBConstraint],
    ) -> (EngineOutcome, Vec<(Lit, SlotReason)>) {
        let base = self.slots.len();
        for c in extra {
            self.add(c);
        }
        let codes: Vec<u32> = assumptions.iter().map(|&l| self.code(l)).collect();
        let outcome = self.run(&codes);
        let trail = self
            .trail
            .iter()
            .map(|&(c, r)| (self.decode(c), r))
            .collect();
        self.reset();
        self.pop_slots(self.slots.len() - base);
        (outcome, trail)
    }

    /// Whether propagation over the stored constraints, `extra` and `¬c`
    /// reaches a conflict from the empty assignment.
    pub fn rup_with(&mut self, c: &PBConstraint, extra: &[&PBConstraint]) -> bool {
        let neg = c.negate();
        let base = self.slots.len();
        for e in extra {
            self.add(e);
        }
        self.add(&neg);
        let conflict = matches!(self.run(&[]), EngineOutcome::Conflict(_));
        self.reset();
        self.pop_slots(self.slots.len() - base);
        conflict
    }

    pub fn rup(&mut self, c: &PBConstraint) -> bool {
        self.rup_with(c, &[])
    }
}

/// An ordered list of assigned literals with the identifiers of the
/// constraints that propagated them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trail {
    entries: Vec<(Lit, Option<u64>)>,
    values: HashMap<Var, bool>,
}

impl Trail {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Self {
        let mut t = Trail::new();
        for l in lits {
            t.push(l, None);
        }
        t
    }

    /// Appends `lit`. Returns false (and leaves the trail unchanged) if its
    /// variable is already assigned.
    pub fn push(&mut self, lit: Lit, reason: Option<u64>) -> bool {
        if self.values.contains_key(&lit.var()) {
            return false;
        }
        self.values.insert(lit.var(), !lit.is_negated());
        self.entries.push((lit, reason));
        true
    }

    pub fn entries(&self) -> &[(Lit, Option<u64>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

impl Assignment for Trail {
    fn value(&self, var: Var) -> Option<bool> {
        self.values.get(&var).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Fixpoint,
    Conflict(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropagationResult {
    pub outcome: Outcome,
    pub trail: Trail,
}

/// `Σ{aᵢ : ℓᵢ not falsified by ρ} − A`.
pub fn slack(c: &PBConstraint, rho: &impl Assignment) -> BigInt {
    c.slack(rho)
}

/// Unit propagation over `(id, constraint)` pairs starting from the literals
/// of `rho`. Constraints are examined in ascending id order and propagated
/// literals are processed first-in first-out.
pub fn unit_propagate<'a>(
    db: impl IntoIterator<Item = (u64, &'a PBConstraint)>,
    rho: &[Lit],
) -> PropagationResult {
    let mut entries: Vec<(u64, &PBConstraint)> = db.into_iter().collect();
    entries.sort_by_key(|e| e.0);
    let mut engine = Propagator::new();
    let ids: Vec<u64> = entries.iter().map(|e| e.0).collect();
    for (_, c) in &entries {
        engine.add(c);
    }
    let (outcome, trail) = engine.propagate_with(rho, &[]);
    let mut t = Trail::new();
    for (lit, reason) in trail {
        t.push(lit, reason.map(|s| ids[s as usize]));
    }
    PropagationResult {
        outcome: match outcome {
            EngineOutcome::Fixpoint => Outcome::Fixpoint,
            EngineOutcome::Conflict(s) => Outcome::Conflict(ids[s as usize]),
        },
        trail: t,
    }
}

/// Whether `db ∧ ¬c` propagates to conflict from the empty assignment.
pub fn rup_check<'a>(db: impl IntoIterator<Item = &'a PBConstraint>, c: &PBConstraint) -> bool {
    let mut engine = Propagator::new();
    for d in db {
        engine.add(d);
    }
    engine.rup(c)
}
