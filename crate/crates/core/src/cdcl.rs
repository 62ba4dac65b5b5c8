//! Conflict-driven clause learning with an optional parity propagator and
//! proof logging.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::logging::{LogError, ProofLogger};
use crate::pb::{Assignment, Lit, Namespace, PBConstraint, Var};
use crate::proof_io::Formula;
use crate::xor::{ParityPropagator, Step2Mode, XorEngine, XorEvent, XorLogError, DEFAULT_K_MAX};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub seed: u64,
    pub use_xor: bool,
    pub k_max: usize,
    pub step2: Step2Mode,
    pub conflict_budget: Option<u64>,
    pub deadline: Option<Instant>,
    pub restart_first: u64,
    pub restart_factor: f64,
    pub var_decay: f64,
    pub clause_decay: f64,
    /// Learned clauses kept before the first database reduction.
    pub reduce_first: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            use_xor: true,
            k_max: DEFAULT_K_MAX,
            step2: Step2Mode::Rup,
            conflict_budget: None,
            deadline: None,
            restart_first: 100,
            restart_factor: 1.5,
            var_decay: 0.95,
            clause_decay: 0.999,
            reduce_first: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    Conflicts,
    Time,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    /// Value of `x<i+1>` at position `i`.
    Sat(Vec<bool>),
    Unsat,
    Unknown(Limit),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub xors: usize,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub xor_propagations: u64,
    pub xor_conflicts: u64,
    pub restarts: u64,
    pub learned: u64,
    pub deleted: u64,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("constraint {0} is not a clause")]
    NotClausal(u64),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Xor(#[from] XorLogError),
}

type Code = u32;

fn code(lit: Lit) -> Code {
    2 * (lit.var().index() - 1) + lit.is_negated() as u32
}

fn decode(c: Code) -> Lit {
    Lit::new(Var::input(c / 2 + 1), c % 2 == 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reason {
    None,
    Clause(usize),
    Xor(usize),
}

#[derive(Clone, Copy, Debug)]
enum Conflict {
    Clause(usize),
    Xor(usize),
}

struct Clause {
    lits: Vec<Code>,
    learnt: bool,
    deleted: bool,
    activity: f64,
    /// Constraint id in the proof.
    id: u64,
}

struct XorReason {
    event: XorEvent,
    proof: Option<u64>,
}

/// Indexed max-heap over variable activities.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = Some(i);
        self.pos[self.heap[j] as usize] = Some(j);
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if act[self.heap[i] as usize] <= act[self.heap[parent] as usize] {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && act[self.heap[l] as usize] > act[self.heap[best] as usize] {
                best = l;
            }
            if r < self.heap.len() && act[self.heap[r] as usize] > act[self.heap[best] as usize] {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn insert(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.up(i, act);
    }

    fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(i) = self.pos[v as usize] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.len() - 1;
        self.swap(0, last);
        self.heap.pop();
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.down(0, act);
        }
        Some(top)
    }
}

/// Read-only view of the solver's assignment.
struct View<'a>(&'a [i8]);

impl Assignment for View<'_> {
    fn value(&self, var: Var) -> Option<bool> {
        if var.namespace() != Namespace::Input || var.index() == 0 {
            return None;
        }
        match self.0.get(var.index() as usize - 1) {
            Some(&v) if v >= 0 => Some(v == 1),
            _ => None,
        }
    }
}

pub struct Solver<'a> {
    config: SolverConfig,
    clauses: Vec<Clause>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    trail: Vec<Code>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    justified: Vec<bool>,
    xor: Option<XorEngine>,
    xor_reasons: Vec<XorReason>,
    xor_lim: Vec<usize>,
    logger: Option<&'a mut ProofLogger>,
    stats: SolverStats,
    /// Set when the input already contains a contradiction.
    trivially_unsat: Option<u64>,
    initial_units: Vec<usize>,
    max_learnts: usize,
    num_learnts: usize,
}

impl<'a> Solver<'a> {
    pub fn new(
        formula: &Formula,
        config: SolverConfig,
        mut logger: Option<&'a mut ProofLogger>,
    ) -> Result<Self, SolveError> {
        let max_index = formula
            .constraints
            .iter()
            .flat_map(|c| c.vars())
            .map(|v| v.index())
            .max()
            .unwrap_or(0);
        let n = formula.num_vars.max(max_index) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let activity: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 1e-5).collect();

        let mut clauses = Vec::new();
        let mut trivially_unsat = None;
        for (pos, c) in formula.constraints.iter().enumerate() {
            let id = pos as u64 + 1;
            if c.is_trivial() {
                continue;
            }
            if c.is_contradiction() {
                trivially_unsat.get_or_insert(id);
                continue;
            }
            if c.vars().any(|v| v.namespace() != Namespace::Input) {
                return Err(SolveError::NotClausal(id));
            }
            let lits = c.as_clause().ok_or(SolveError::NotClausal(id))?;
            clauses.push(Clause {
                lits: lits.into_iter().map(code).collect(),
                learnt: false,
                deleted: false,
                activity: 0.0,
                id,
            });
        }

        let xor = if config.use_xor && trivially_unsat.is_none() {
            let engine =
                XorEngine::attach(formula, config.k_max, config.step2, logger.as_deref_mut())?;
            (!engine.is_empty()).then_some(engine)
        } else {
            None
        };

        let mut solver = Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![-1; n],
            level: vec![0; n],
            reason: vec![Reason::None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap {
                heap: Vec::new(),
                pos: vec![None; n],
            },
            phase: vec![false; n],
            seen: vec![false; n],
            justified: vec![false; n],
            stats: SolverStats {
                xors: xor.as_ref().map_or(0, |x| x.originals().len()),
                ..Default::default()
            },
            xor,
            xor_reasons: Vec::new(),
            xor_lim: Vec::new(),
            logger,
            trivially_unsat,
            initial_units: Vec::new(),
            max_learnts: config.reduce_first,
            num_learnts: 0,
            config,
        };
        for v in 0..n as u32 {
            solver.heap.insert(v, &solver.activity);
        }
        for c in clauses {
            let cref = solver.attach_clause(c);
            if solver.clauses[cref].lits.len() == 1 {
                solver.initial_units.push(cref);
            }
        }
        Ok(solver)
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    fn attach_clause(&mut self, c: Clause) -> usize {
        let cref = self.clauses.len();
        if c.lits.len() >= 2 {
            self.watches[c.lits[0] as usize].push(cref);
            self.watches[c.lits[1] as usize].push(cref);
        }
        self.clauses.push(c);
        cref
    }

    fn value(&self, c: Code) -> Option<bool> {
        match self.assigns[(c / 2) as usize] {
            -1 => None,
            v => Some((v == 1) != (c % 2 == 1)),
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, c: Code, reason: Reason) {
        let v = (c / 2) as usize;
        self.assigns[v] = if c.is_multiple_of(2) { 1 } else { 0 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(c);
        if let Some(x) = &mut self.xor {
            x.on_assignment(decode(c));
        }
    }

    fn propagate_clauses(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                if self.value(first) == Some(true) {
                    kept.push(cref);
                    continue;
                }
                let len = self.clauses[cref].lits.len();
                let replacement =
                    (2..len).find(|&k| self.value(self.clauses[cref].lits[k]) != Some(false));
                if let Some(k) = replacement {
                    self.clauses[cref].lits.swap(1, k);
                    let w = self.clauses[cref].lits[1];
                    self.watches[w as usize].push(cref);
                    continue;
                }
                kept.push(cref);
                if self.value(first) == Some(false) {
                    conflict = Some(cref);
                    kept.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Reason::Clause(cref));
            }
            self.watches[false_lit as usize] = kept;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// Clause propagation to fixpoint, then parity reasoning, until neither
    /// has anything left.
    fn propagate(&mut self) -> Option<Conflict> {
        loop {
            if let Some(c) = self.propagate_clauses() {
                return Some(Conflict::Clause(c));
            }
            let event = self.xor.as_mut()?.propagate()?;
            let idx = self.xor_reasons.len();
            match event {
                XorEvent::Conflict(_) => {
                    self.stats.xor_conflicts += 1;
                    self.xor_reasons.push(XorReason { event, proof: None });
                    return Some(Conflict::Xor(idx));
                }
                XorEvent::Propagate(lit, _) => {
                    self.stats.xor_propagations += 1;
                    self.xor_reasons.push(XorReason { event, proof: None });
                    self.enqueue(code(lit), Reason::Xor(idx));
                }
            }
        }
    }

    fn xor_lits(&self, idx: usize) -> Vec<Code> {
        XorEngine::reason_lits(&self.xor_reasons[idx].event, &View(&self.assigns))
            .expect("reason variables are assigned")
            .into_iter()
            .map(code)
            .collect()
    }

    fn reason_lits(&self, r: Reason) -> Vec<Code> {
        match r {
            Reason::None => Vec::new(),
            Reason::Clause(cref) => self.clauses[cref].lits.clone(),
            Reason::Xor(idx) => self.xor_lits(idx),
        }
    }

    /// Logs the clause behind a parity event, once.
    fn ensure_xor_proof(&mut self, idx: usize) -> Result<Option<u64>, SolveError> {
        let (Some(logger), Some(engine)) = (self.logger.as_deref_mut(), self.xor.as_mut()) else {
            return Ok(None);
        };
        if let Some(id) = self.xor_reasons[idx].proof {
            return Ok(Some(id));
        }
        let id = engine.get_reason(logger, &self.xor_reasons[idx].event, &View(&self.assigns))?;
        self.xor_reasons[idx].proof = Some(id);
        Ok(Some(id))
    }

    /// Makes sure the proof database can rederive the root-level value of
    /// `v` by unit propagation.
    fn justify(&mut self, v: usize) -> Result<(), SolveError> {
        if self.logger.is_none() {
            return Ok(());
        }
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if self.justified[u] {
                continue;
            }
            self.justified[u] = true;
            let r = self.reason[u];
            if let Reason::Xor(idx) = r {
                self.ensure_xor_proof(idx)?;
            }
            for c in self.reason_lits(r) {
                let w = (c / 2) as usize;
                if w != u && !self.justified[w] {
                    stack.push(w);
                }
            }
        }
        Ok(())
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v as u32, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learned clause, asserting literal
    /// first, and the backjump level.
    fn analyze(&mut self, conflict: Conflict) -> Result<(Vec<Code>, u32), SolveError> {
        let current = self.decision_level();
        let mut learnt: Vec<Code> = vec![0];
        let mut counter = 0;
        let mut index = self.trail.len();
        let mut lits = match conflict {
            Conflict::Clause(cref) => {
                self.bump_clause(cref);
                self.clauses[cref].lits.clone()
            }
            Conflict::Xor(idx) => {
                self.ensure_xor_proof(idx)?;
                self.xor_lits(idx)
            }
        };
        let mut skip: Option<Code> = None;
        let uip = loop {
            for &q in &lits {
                if Some(q) == skip {
                    continue;
                }
                let v = (q / 2) as usize;
                if self.seen[v] {
                    continue;
                }
                if self.level[v] == 0 {
                    self.justify(v)?;
                    continue;
                }
                self.seen[v] = true;
                self.bump_var(v);
                if self.level[v] == current {
                    counter += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                index -= 1;
                if self.seen[(self.trail[index] / 2) as usize] {
                    break;
                }
            }
            let p = self.trail[index];
            let v = (p / 2) as usize;
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                break p;
            }
            let r = self.reason[v];
            match r {
                Reason::Clause(cref) => self.bump_clause(cref),
                Reason::Xor(idx) => {
                    self.ensure_xor_proof(idx)?;
                }
                Reason::None => unreachable!("only the UIP can be a decision"),
            }
            lits = self.reason_lits(r);
            skip = Some(p);
        };
        learnt[0] = uip ^ 1;
        for &q in &learnt[1..] {
            self.seen[(q / 2) as usize] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for i in 2..learnt.len() {
                if self.level[(learnt[i] / 2) as usize] > self.level[(learnt[best] / 2) as usize] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            bt = self.level[(learnt[1] / 2) as usize];
        }
        Ok((learnt, bt))
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level as usize];
        for i in (start..self.trail.len()).rev() {
            let c = self.trail[i];
            let v = (c / 2) as usize;
            self.phase[v] = c.is_multiple_of(2);
            self.assigns[v] = -1;
            self.reason[v] = Reason::None;
            if let Some(x) = &mut self.xor {
                x.on_backjump(Var::input(v as u32 + 1));
            }
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(start);
        self.qhead = start;
        self.trail_lim.truncate(level as usize);
        self.xor_reasons.truncate(self.xor_lim[level as usize]);
        self.xor_lim.truncate(level as usize);
    }

    fn locked(&self, cref: usize) -> bool {
        let c = &self.clauses[cref];
        let v = (c.lits[0] / 2) as usize;
        self.reason[v] == Reason::Clause(cref) && self.value(c.lits[0]) == Some(true)
    }

    fn reduce_db(&mut self) -> Result<(), SolveError> {
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2 && !self.locked(i)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
        });
        candidates.truncate(candidates.len() / 2);
        let mut ids = Vec::with_capacity(candidates.len());
        for &cref in &candidates {
            let c = &mut self.clauses[cref];
            c.deleted = true;
            c.lits = Vec::new();
            ids.push(c.id);
        }
        self.num_learnts -= candidates.len();
        self.stats.deleted += candidates.len() as u64;
        if let Some(logger) = self.logger.as_deref_mut() {
            logger.delete(ids)?;
        }
        Ok(())
    }

    fn learn(&mut self, lits: Vec<Code>) -> Result<usize, SolveError> {
        let id = match self.logger.as_deref_mut() {
            Some(logger) => logger.rup(PBConstraint::clause(lits.iter().map(|&c| decode(c))))?,
            None => 0,
        };
        self.stats.learned += 1;
        self.num_learnts += 1;
        Ok(self.attach_clause(Clause {
            lits,
            learnt: true,
            deleted: false,
            activity: 0.0,
            id,
        }))
    }

    /// Closes the proof after a conflict at the root.
    fn refute(&mut self, conflict: Conflict) -> Result<SolveResult, SolveError> {
        if self.logger.is_none() {
            return Ok(SolveResult::Unsat);
        }
        let lits = match conflict {
            Conflict::Clause(cref) => self.clauses[cref].lits.clone(),
            Conflict::Xor(idx) => self.xor_lits(idx),
        };
        let direct = match conflict {
            Conflict::Xor(idx) => self.ensure_xor_proof(idx)?.filter(|_| lits.is_empty()),
            Conflict::Clause(_) => None,
        };
        for c in lits {
            self.justify((c / 2) as usize)?;
        }
        let logger = self.logger.as_deref_mut().expect("checked above");
        let id = match direct {
            Some(id) => id,
            None => logger.rup(PBConstraint::contradiction())?,
        };
        logger.conclude(id)?;
        logger.flush().map_err(LogError::from)?;
        Ok(SolveResult::Unsat)
    }

    fn out_of_budget(&self) -> Option<Limit> {
        if self
            .config
            .conflict_budget
            .is_some_and(|b| self.stats.conflicts >= b)
        {
            return Some(Limit::Conflicts);
        }
        if self.config.deadline.is_some_and(|d| Instant::now() >= d) {
            return Some(Limit::Time);
        }
        None
    }

    pub fn solve(&mut self) -> Result<SolveResult, SolveError> {
        if let Some(id) = self.trivially_unsat {
            if let Some(logger) = self.logger.as_deref_mut() {
                logger.conclude(id)?;
                logger.flush().map_err(LogError::from)?;
            }
            return Ok(SolveResult::Unsat);
        }
        for cref in std::mem::take(&mut self.initial_units) {
            let lit = self.clauses[cref].lits[0];
            match self.value(lit) {
                Some(true) => {}
                Some(false) => return self.refute(Conflict::Clause(cref)),
                None => self.enqueue(lit, Reason::Clause(cref)),
            }
        }

        let mut restart_limit = self.config.restart_first as f64;
        let mut conflicts_since_restart = 0u64;
        loop {
            if let Some(conflict) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    return self.refute(conflict);
                }
                let (learnt, bt) = self.analyze(conflict)?;
                self.backtrack(bt);
                let asserting = learnt[0];
                let cref = self.learn(learnt)?;
                self.enqueue(asserting, Reason::Clause(cref));
                self.var_inc /= self.config.var_decay;
                self.cla_inc /= self.config.clause_decay;
                if let Some(limit) = self.out_of_budget() {
                    self.flush()?;
                    return Ok(SolveResult::Unknown(limit));
                }
                continue;
            }
            if conflicts_since_restart as f64 >= restart_limit {
                conflicts_since_restart = 0;
                restart_limit *= self.config.restart_factor;
                self.stats.restarts += 1;
                self.backtrack(0);
                continue;
            }
            if self.num_learnts >= self.max_learnts + self.trail.len() {
                self.reduce_db()?;
                self.max_learnts = self.max_learnts + self.max_learnts / 10;
            }
            let next = loop {
                match self.heap.pop(&self.activity) {
                    Some(v) if self.assigns[v as usize] >= 0 => continue,
                    other => break other,
                };
            };
            let Some(v) = next else {
                self.flush()?;
                return Ok(SolveResult::Sat(
                    self.assigns.iter().map(|&a| a == 1).collect(),
                ));
            };
            self.stats.decisions += 1;
            self.trail_lim.push(self.trail.len());
            self.xor_lim.push(self.xor_reasons.len());
            let c = 2 * v + u32::from(!self.phase[v as usize]);
            self.enqueue(c, Reason::None);
        }
    }

    fn flush(&mut self) -> Result<(), SolveError> {
        if let Some(logger) = self.logger.as_deref_mut() {
            logger.flush().map_err(LogError::from)?;
        }
        Ok(())
    }
}

/// Solves a clausal formula.
pub fn solve(
    formula: &Formula,
    config: SolverConfig,
    logger: Option<&mut ProofLogger>,
) -> Result<(SolveResult, SolverStats), SolveError> {
    let mut solver = Solver::new(formula, config, logger)?;
    let result = solver.solve()?;
    Ok((result, solver.stats()))
}

/// The id of the first constraint `model` violates, if any.
pub fn check_model(formula: &Formula, model: &[bool]) -> Option<u64> {
    let view = |v: Var| model.get((v.index() as usize).wrapping_sub(1)).copied();
    struct M<F>(F);
    impl<F: Fn(Var) -> Option<bool>> Assignment for M<F> {
        fn value(&self, var: Var) -> Option<bool> {
            (self.0)(var)
        }
    }
    formula
        .constraints
        .iter()
        .position(|c| c.evaluate(&M(view)).map_or(true, |ok| !ok))
        .map(|i| i as u64 + 1)
}
