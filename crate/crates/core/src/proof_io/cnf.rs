use std::io::{self, BufRead, Write};

use super::{Formula, ParseError};
use crate::pb::{Lit, PBConstraint, Var};

pub fn parse_cnf(text: &str) -> Result<Formula, ParseError> {
    read_cnf(text.as_bytes())
}

/// Streaming DIMACS reader. Clauses may span lines and end at `0`.
pub fn read_cnf(reader: impl BufRead) -> Result<Formula, ParseError> {
    let mut header: Option<(u32, u64)> = None;
    let mut constraints = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            match (header, parts.as_slice()) {
                (None, ["p", "cnf", v, c]) => match (v.parse(), c.parse()) {
                    (Ok(v), Ok(c)) => header = Some((v, c)),
                    _ => return Err(ParseError::syntax(lineno, "malformed `p cnf` header")),
                },
                (Some(_), _) => return Err(ParseError::syntax(lineno, "duplicate header")),
                _ => return Err(ParseError::syntax(lineno, "malformed `p cnf` header")),
            }
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::syntax(lineno, "clause before `p cnf` header"));
        };
        for tok in trimmed.split_whitespace() {
            let n: i64 = tok.parse().map_err(|_| {
                ParseError::syntax(lineno, format!("expected integer, found `{tok}`"))
            })?;
            if n == 0 {
                constraints.push(PBConstraint::clause(current.drain(..)));
                continue;
            }
            let v = n.unsigned_abs();
            if v > u64::from(num_vars) {
                return Err(ParseError::syntax(
                    lineno,
                    format!("variable {v} exceeds declared count {num_vars}"),
                ));
            }
            current.push(Lit::new(Var::input(v as u32), n < 0));
        }
    }

    let Some((num_vars, declared)) = header else {
        return Err(ParseError::syntax(
            last_line.max(1),
            "missing `p cnf` header",
        ));
    };
    if !current.is_empty() {
        return Err(ParseError::syntax(
            last_line,
            "last clause is not terminated by 0",
        ));
    }
    if declared != constraints.len() as u64 {
        return Err(ParseError::HeaderMismatch {
            what: "clauses",
            declared,
            found: constraints.len() as u64,
        });
    }
    Ok(Formula {
        num_vars,
        constraints,
    })
}

/// Writes DIMACS clauses with `x<k>` as variable `k`.
pub fn write_cnf(w: &mut impl Write, num_vars: u32, clauses: &[Vec<Lit>]) -> io::Result<()> {
    writeln!(w, "p cnf {} {}", num_vars, clauses.len())?;
    for clause in clauses {
        for l in clause {
            let v = i64::from(l.var().index());
            write!(w, "{} ", if l.is_negated() { -v } else { v })?;
        }
        writeln!(w, "0")?;
    }
    Ok(())
}
