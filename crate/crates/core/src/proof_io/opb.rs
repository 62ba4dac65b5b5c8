use std::io::{self, BufRead, Write};

use super::{parse_raw_constraint, write_constraint, Formula, ParseError};
use crate::pb::{Lit, Var};

fn opb_lit(token: &str) -> Result<Lit, String> {
    let (neg, name) = match token.strip_prefix('~') {
        Some(rest) => (true, rest),
        None => (false, token),
    };
    let index = name
        .strip_prefix('x')
        .filter(|d| !d.is_empty() && !d.starts_with('0') && d.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|d| d.parse::<u32>().ok())
        .ok_or_else(|| format!("expected literal `x<k>` or `~x<k>`, found `{token}`"))?;
    Ok(Lit::new(Var::input(index), neg))
}

/// Reads `#variable= N` and `#constraint= M` from a header comment.
fn header_counts(comment: &str) -> (Option<u64>, Option<u64>) {
    let tokens: Vec<&str> = comment.split_whitespace().collect();
    let field = |key: &str| {
        tokens
            .iter()
            .position(|t| *t == key)
            .and_then(|i| tokens.get(i + 1))
            .and_then(|v| v.parse().ok())
    };
    (field("#variable="), field("#constraint="))
}

pub fn parse_opb(text: &str) -> Result<Formula, ParseError> {
    read_opb(text.as_bytes())
}

/// Streaming OPB reader. `=` constraints expand to a `>=` and a `<=` pair;
/// objective lines are skipped.
pub fn read_opb(reader: impl BufRead) -> Result<Formula, ParseError> {
    let mut declared_vars = None;
    let mut declared_cons = None;
    let mut statements = 0u64;
    let mut max_var = 0u32;
    let mut constraints = Vec::new();
    let mut seen_body = false;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('*') {
            if !seen_body && declared_vars.is_none() {
                let (v, c) = header_counts(comment);
                declared_vars = v;
                declared_cons = c;
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        seen_body = true;
        let mut rest = trimmed;
        while !rest.trim().is_empty() {
            let Some(end) = rest.find(';') else {
                return Err(ParseError::syntax(
                    lineno,
                    "constraint is missing its terminating `;`",
                ));
            };
            let statement = rest[..end].trim();
            rest = &rest[end + 1..];
            if statement.starts_with("min:") || statement.starts_with("max:") {
                continue;
            }
            let tokens: Vec<&str> = statement.split_whitespace().collect();
            let raw = parse_raw_constraint(&tokens, opb_lit)
                .map_err(|m| ParseError::syntax(lineno, m))?;
            for (_, l) in &raw.terms {
                max_var = max_var.max(l.var().index());
            }
            statements += 1;
            constraints.extend(raw.into_constraints());
        }
    }

    if let Some(declared) = declared_cons {
        if declared != statements {
            return Err(ParseError::HeaderMismatch {
                what: "constraints",
                declared,
                found: statements,
            });
        }
    }
    let num_vars = match declared_vars {
        Some(declared) => {
            if u64::from(max_var) > declared {
                return Err(ParseError::HeaderMismatch {
                    what: "variables",
                    declared,
                    found: max_var.into(),
                });
            }
            declared as u32
        }
        None => max_var,
    };
    Ok(Formula {
        num_vars,
        constraints,
    })
}

pub fn write_opb(w: &mut impl Write, formula: &Formula) -> io::Result<()> {
    writeln!(
        w,
        "* #variable= {} #constraint= {}",
        formula.num_vars,
        formula.constraints.len()
    )?;
    for c in &formula.constraints {
        write_constraint(w, c, None)?;
        writeln!(w, " ;")?;
    }
    Ok(())
}
