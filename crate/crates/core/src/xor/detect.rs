use std::collections::{BTreeMap, HashMap};

use super::XorConstraint;
use crate::pb::{Namespace, Var};
use crate::proof_io::Formula;

pub const DEFAULT_K_MAX: usize = 6;

/// A parity found in the input together with the clauses encoding it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectedXor {
    pub xor: XorConstraint,
    /// Variables in ascending order; bit `j` of a mask refers to `vars[j]`.
    pub vars: Vec<Var>,
    /// Clause id by negation mask. The clause with mask `m` negates exactly
    /// the variables whose bit is set, so it is the one falsified by the
    /// assignment that sets those variables to true.
    pub clauses: BTreeMap<u32, u64>,
}

impl DetectedXor {
    pub fn clause_for(&self, mask: u32) -> Option<u64> {
        self.clauses.get(&mask).copied()
    }
}

/// Finds every parity of arity `2..=k_max` whose complete canonical clausal
/// encoding appears in `formula`. Results are ordered by their first clause.
pub fn detect_xors(formula: &Formula, k_max: usize) -> Vec<DetectedXor> {
    let mut groups: HashMap<Vec<Var>, (u64, BTreeMap<u32, u64>)> = HashMap::new();
    for (pos, c) in formula.constraints.iter().enumerate() {
        let id = pos as u64 + 1;
        let Some(lits) = c.as_clause() else { continue };
        if lits.len() < 2
            || lits.len() > k_max
            || lits.iter().any(|l| l.var().namespace() != Namespace::Input)
        {
            continue;
        }
        // canonical order is by variable, so `lits` is sorted by variable
        let vars: Vec<Var> = lits.iter().map(|l| l.var()).collect();
        let mask = lits
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_negated())
            .fold(0u32, |m, (j, _)| m | 1 << j);
        let entry = groups.entry(vars).or_insert((id, BTreeMap::new()));
        entry.1.entry(mask).or_insert(id);
    }

    let mut found = Vec::new();
    for (vars, (first, masks)) in groups {
        let k = vars.len();
        let needed = 1usize << (k - 1);
        for parity in [0u32, 1] {
            let clauses: BTreeMap<u32, u64> = masks
                .iter()
                .filter(|(m, _)| m.count_ones() % 2 == parity)
                .map(|(m, id)| (*m, *id))
                .collect();
            if clauses.len() == needed {
                // clauses with an odd number of negations rule out the
                // assignments of odd weight, leaving parity 0
                let rhs = parity == 0;
                let first = *clauses.values().min().unwrap_or(&first);
                let xor = XorConstraint::new(vars.iter().copied(), rhs);
                found.push((
                    first,
                    DetectedXor {
                        xor,
                        vars: vars.clone(),
                        clauses,
                    },
                ));
            }
        }
    }
    found.sort_by_key(|(first, _)| *first);
    found.into_iter().map(|(_, d)| d).collect()
}
