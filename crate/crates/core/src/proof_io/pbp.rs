use std::io::{self, BufRead, BufWriter, Write};

use thiserror::Error;

use super::{parse_int, parse_raw_constraint, write_constraint, ParseError, Relation, VarNames};
use crate::cutting_planes::RpnToken;
use crate::pb::{PBConstraint, SubstValue, Substitution};

/// One line of a proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofStep {
    Header {
        version: String,
    },
    Load {
        count: u64,
    },
    Red {
        constraint: PBConstraint,
        witness: Substitution,
    },
    Pol {
        tokens: Vec<RpnToken>,
    },
    Rup {
        constraint: PBConstraint,
    },
    Del {
        ids: Vec<u64>,
    },
    Conclusion {
        id: u64,
    },
}

impl ProofStep {
    pub fn keyword(&self) -> &'static str {
        match self {
            ProofStep::Header { .. } => "pseudo-Boolean",
            ProofStep::Load { .. } => "f",
            ProofStep::Red { .. } => "red",
            ProofStep::Pol { .. } => "p",
            ProofStep::Rup { .. } => "rup",
            ProofStep::Del { .. } => "del",
            ProofStep::Conclusion { .. } => "c",
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{0}")]
pub struct LineError(pub String);

fn err<T>(message: impl Into<String>) -> Result<T, LineError> {
    Err(LineError(message.into()))
}

fn parse_id(token: &str) -> Result<u64, LineError> {
    match token.parse::<u64>() {
        Ok(id) if id > 0 => Ok(id),
        _ => err(format!("expected constraint id, found `{token}`")),
    }
}

/// Parses a `>=` constraint terminated by `;`, returning the tokens that follow.
fn constraint_then_rest<'a>(
    tokens: &'a [&'a str],
    names: &mut VarNames,
) -> Result<(PBConstraint, &'a [&'a str]), LineError> {
    let Some(semi) = tokens.iter().position(|t| *t == ";") else {
        return err("constraint must be terminated by `;`");
    };
    let raw = parse_raw_constraint(&tokens[..semi], |t| {
        names
            .resolve_lit(t)
            .ok_or_else(|| format!("bad literal `{t}`"))
    })
    .map_err(LineError)?;
    if raw.relation == Relation::Eq {
        return err("`=` is not allowed in proof constraints");
    }
    let mut cs = raw.into_constraints();
    Ok((cs.remove(0), &tokens[semi + 1..]))
}

fn parse_witness(tokens: &[&str], names: &mut VarNames) -> Result<Substitution, LineError> {
    let mut witness = Substitution::new();
    let mut i = 0;
    while i < tokens.len() {
        let var = match names.resolve(tokens[i]) {
            Some(v) => v,
            None => return err(format!("bad witness variable `{}`", tokens[i])),
        };
        i += 1;
        if tokens.get(i) == Some(&"->") {
            i += 1;
        }
        let value = match tokens.get(i) {
            Some(&"0") => SubstValue::Const(false),
            Some(&"1") => SubstValue::Const(true),
            Some(t) => match names.resolve_lit(t) {
                Some(l) => SubstValue::Lit(l),
                None => return err(format!("bad witness value `{t}`")),
            },
            None => return err(format!("witness variable `{var}` has no value")),
        };
        i += 1;
        witness
            .insert(var, value)
            .map_err(|d| LineError(format!("witness maps `{}` twice", names.name(d.0))))?;
    }
    Ok(witness)
}

fn parse_rpn(tokens: &[&str], names: &mut VarNames) -> Result<Vec<RpnToken>, LineError> {
    tokens
        .iter()
        .map(|&t| match t {
            "+" => Ok(RpnToken::Add),
            "*" => Ok(RpnToken::Mul),
            "d" => Ok(RpnToken::Div),
            "s" => Ok(RpnToken::Saturate),
            _ => {
                if let Some(n) = parse_int(t) {
                    Ok(RpnToken::Int(n))
                } else {
                    names
                        .resolve_lit(t)
                        .map(RpnToken::Lit)
                        .ok_or_else(|| LineError(format!("bad token `{t}`")))
                }
            }
        })
        .collect()
}

/// Parses one proof line. Blank lines and `*` comments give `None`.
pub fn parse_proof_line(text: &str, names: &mut VarNames) -> Result<Option<ProofStep>, LineError> {
    let spaced = text.replace(';', " ; ").replace("->", " -> ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let Some((&head, rest)) = tokens.split_first() else {
        return Ok(None);
    };
    if head.starts_with('*') {
        return Ok(None);
    }
    let step = match head {
        "pseudo-Boolean" => match rest {
            ["proof", "version", v] => ProofStep::Header {
                version: (*v).to_string(),
            },
            _ => return err("malformed header"),
        },
        "f" => match rest {
            [n] => match n.parse() {
                Ok(count) => ProofStep::Load { count },
                Err(_) => return err(format!("bad constraint count `{n}`")),
            },
            _ => return err("`f` takes exactly one count"),
        },
        "red" => {
            let (constraint, after) = constraint_then_rest(rest, names)?;
            let witness = parse_witness(after, names)?;
            ProofStep::Red {
                constraint,
                witness,
            }
        }
        "rup" => {
            let (constraint, after) = constraint_then_rest(rest, names)?;
            if !after.is_empty() {
                return err(format!("unexpected `{}` after rup constraint", after[0]));
            }
            ProofStep::Rup { constraint }
        }
        "p" | "pol" => {
            if rest.is_empty() {
                return err("empty pol expression");
            }
            ProofStep::Pol {
                tokens: parse_rpn(rest, names)?,
            }
        }
        "del" => match rest {
            ["id", ids @ ..] if !ids.is_empty() => ProofStep::Del {
                ids: ids.iter().map(|t| parse_id(t)).collect::<Result<_, _>>()?,
            },
            _ => return err("expected `del id <id> ...`"),
        },
        "c" => match rest {
            [id] => ProofStep::Conclusion { id: parse_id(id)? },
            _ => return err("`c` takes exactly one id"),
        },
        other => return err(format!("unknown keyword `{other}`")),
    };
    Ok(Some(step))
}

/// Writes one step as a line, without the trailing newline.
pub fn write_step(
    w: &mut impl Write,
    step: &ProofStep,
    names: Option<&VarNames>,
) -> io::Result<()> {
    let lit = |l| match names {
        Some(n) => n.lit_name(l),
        None => l.to_string(),
    };
    match step {
        ProofStep::Header { version } => write!(w, "pseudo-Boolean proof version {version}"),
        ProofStep::Load { count } => write!(w, "f {count}"),
        ProofStep::Red {
            constraint,
            witness,
        } => {
            w.write_all(b"red ")?;
            write_constraint(w, constraint, names)?;
            w.write_all(b" ;")?;
            for (var, value) in witness.iter() {
                let name = match names {
                    Some(n) => n.name(var).into_owned(),
                    None => var.to_string(),
                };
                match value {
                    SubstValue::Const(b) => write!(w, " {name} -> {}", u8::from(b))?,
                    SubstValue::Lit(l) => write!(w, " {name} -> {}", lit(l))?,
                }
            }
            Ok(())
        }
        ProofStep::Pol { tokens } => {
            w.write_all(b"p")?;
            for t in tokens {
                match t {
                    RpnToken::Lit(l) => write!(w, " {}", lit(*l))?,
                    other => write!(w, " {other}")?,
                }
            }
            Ok(())
        }
        ProofStep::Rup { constraint } => {
            w.write_all(b"rup ")?;
            write_constraint(w, constraint, names)?;
            w.write_all(b" ;")
        }
        ProofStep::Del { ids } => {
            w.write_all(b"del id")?;
            for id in ids {
                write!(w, " {id}")?;
            }
            Ok(())
        }
        ProofStep::Conclusion { id } => write!(w, "c {id}"),
    }
}

/// Buffered sequential proof output.
pub struct ProofWriter<W: Write> {
    out: BufWriter<W>,
    names: Option<VarNames>,
    bytes: u64,
}

impl<W: Write> ProofWriter<W> {
    pub fn new(inner: W) -> Self {
        ProofWriter {
            out: BufWriter::new(inner),
            names: None,
            bytes: 0,
        }
    }

    pub fn with_names(inner: W, names: VarNames) -> Self {
        ProofWriter {
            out: BufWriter::new(inner),
            names: Some(names),
            bytes: 0,
        }
    }

    pub fn write(&mut self, step: &ProofStep) -> io::Result<()> {
        let mut line = Vec::with_capacity(64);
        write_step(&mut line, step, self.names.as_ref())?;
        line.push(b'\n');
        self.bytes += line.len() as u64;
        self.out.write_all(&line)
    }

    pub fn comment(&mut self, text: &str) -> io::Result<()> {
        let line = format!("* {text}\n");
        self.bytes += line.len() as u64;
        self.out.write_all(line.as_bytes())
    }

    /// Bytes written so far.
    pub fn bytes_written(&self) -> u64 {
        self.bytes
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

/// Streaming proof reader yielding `(line number, step)`.
pub struct ProofReader<R: BufRead> {
    lines: io::Lines<R>,
    lineno: usize,
    names: VarNames,
}

impl<R: BufRead> ProofReader<R> {
    pub fn new(reader: R) -> Self {
        ProofReader {
            lines: reader.lines(),
            lineno: 0,
            names: VarNames::new(),
        }
    }

    pub fn names(&self) -> &VarNames {
        &self.names
    }
}

impl<R: BufRead> Iterator for ProofReader<R> {
    type Item = Result<(usize, ProofStep), ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.lineno += 1;
            match parse_proof_line(&line, &mut self.names) {
                Ok(Some(step)) => return Some(Ok((self.lineno, step))),
                Ok(None) => continue,
                Err(e) => return Some(Err(ParseError::syntax(self.lineno, e.0))),
            }
        }
    }
}

/// Parses a whole proof held in memory.
pub fn parse_proof(text: &str) -> Result<Vec<(usize, ProofStep)>, ParseError> {
    ProofReader::new(text.as_bytes()).collect()
}
