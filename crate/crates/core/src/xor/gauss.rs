use super::{BitSet, XorConstraint};

#[derive(Clone, Debug)]
struct Row {
    bits: BitSet,
    rhs: bool,
    /// Which original parities were summed into this row.
    prov: BitSet,
    pivot: Option<usize>,
}

/// A row as it stood when it produced an event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSnapshot {
    pub xor: XorConstraint,
    pub provenance: BitSet,
}

/// Consequences of the current partial assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Implied {
    /// Column and value, with the row that forces it.
    Propagation(usize, bool, RowSnapshot),
    Conflict(RowSnapshot),
}

/// Parity rows over input-variable columns, kept in reduced form with
/// respect to the unassigned columns: every row with a pivot has an
/// unassigned pivot column that occurs in no other row, and every row
/// without a pivot mentions assigned columns only.
#[derive(Clone, Debug, Default)]
pub struct XorMatrix {
    rows: Vec<Row>,
    pivot_row: Vec<Option<usize>>,
    assigned: BitSet,
    values: BitSet,
}

impl XorMatrix {
    pub fn new(xors: &[XorConstraint]) -> Self {
        let mut m = XorMatrix::default();
        for (i, x) in xors.iter().enumerate() {
            m.rows.push(Row {
                bits: x.bits().clone(),
                rhs: x.rhs(),
                prov: [i].into_iter().collect(),
                pivot: None,
            });
        }
        for r in 0..m.rows.len() {
            let first = m.rows[r].bits.iter().next();
            if let Some(col) = first {
                m.make_pivot(r, col);
            }
        }
        m
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_assigned(&self, col: usize) -> bool {
        self.assigned.contains(col)
    }

    fn pivot_of(&self, col: usize) -> Option<usize> {
        self.pivot_row.get(col).copied().flatten()
    }

    fn set_pivot(&mut self, col: usize, row: Option<usize>) {
        if self.pivot_row.len() <= col {
            self.pivot_row.resize(col + 1, None);
        }
        self.pivot_row[col] = row;
    }

    /// Makes `col` the pivot of row `r` and eliminates it from every other row.
    fn make_pivot(&mut self, r: usize, col: usize) {
        self.rows[r].pivot = Some(col);
        self.set_pivot(col, Some(r));
        let (bits, rhs, prov) = {
            let row = &self.rows[r];
            (row.bits.clone(), row.rhs, row.prov.clone())
        };
        for (j, other) in self.rows.iter_mut().enumerate() {
            if j != r && other.bits.contains(col) {
                other.bits.xor_with(&bits);
                other.rhs ^= rhs;
                other.prov.xor_with(&prov);
            }
        }
    }

    pub fn assign(&mut self, col: usize, value: bool) {
        self.assigned.insert(col);
        if value {
            self.values.insert(col);
        } else {
            self.values.remove(col);
        }
        if let Some(r) = self.pivot_of(col) {
            self.set_pivot(col, None);
            self.rows[r].pivot = None;
            let next = self.rows[r].bits.difference_iter(&self.assigned).next();
            if let Some(c) = next {
                self.make_pivot(r, c);
            }
        }
    }

    pub fn unassign(&mut self, col: usize) {
        if !self.assigned.contains(col) {
            return;
        }
        self.assigned.remove(col);
        self.values.remove(col);
        let row = self
            .rows
            .iter()
            .position(|row| row.pivot.is_none() && row.bits.contains(col));
        if let Some(r) = row {
            self.make_pivot(r, col);
        }
    }

    fn snapshot(&self, r: usize) -> RowSnapshot {
        let row = &self.rows[r];
        RowSnapshot {
            xor: XorConstraint::from_bits(row.bits.clone(), row.rhs),
            provenance: row.prov.clone(),
        }
    }

    fn assigned_parity(&self, r: usize) -> bool {
        self.rows[r].bits.intersection_parity(&self.values)
    }

    /// The first conflict if there is one, otherwise the first propagation.
    pub fn gauss_step(&self) -> Option<Implied> {
        if let Some(c) = self.conflict() {
            return Some(c);
        }
        (0..self.rows.len()).find_map(|r| self.propagation(r))
    }

    fn conflict(&self) -> Option<Implied> {
        (0..self.rows.len())
            .find(|&r| self.rows[r].pivot.is_none() && self.assigned_parity(r) != self.rows[r].rhs)
            .map(|r| Implied::Conflict(self.snapshot(r)))
    }

    fn propagation(&self, r: usize) -> Option<Implied> {
        let row = &self.rows[r];
        let pivot = row.pivot?;
        let mut free = row.bits.difference_iter(&self.assigned);
        let only = free.next();
        if only != Some(pivot) || free.next().is_some() {
            return None;
        }
        let value = row.rhs ^ self.assigned_parity(r);
        Some(Implied::Propagation(pivot, value, self.snapshot(r)))
    }

    /// A conflict, or every propagation.
    pub fn implied(&self) -> Result<Vec<Implied>, Implied> {
        if let Some(c) = self.conflict() {
            return Err(c);
        }
        Ok((0..self.rows.len())
            .filter_map(|r| self.propagation(r))
            .collect())
    }
}
