//! Proof emission for producers such as the solver and the XOR engine.

use std::io::{self, Write};

use num_bigint::BigInt;
use thiserror::Error;

use crate::cutting_planes::RpnToken;
use crate::pb::{Lit, PBConstraint, Substitution, Var};
use crate::proof_io::{Formula, ProofStep, ProofWriter};
use crate::verifier::{Checker, StepError};

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("shadow check rejected `{line}`: {error}")]
    Rejected { line: String, error: StepError },
}

/// Hands out auxiliary variables `y1, y2, ...`. Auxiliaries never reach the
/// solver, so every allocation is fresh.
#[derive(Clone, Debug)]
pub struct AuxAllocator {
    next: u32,
}

impl Default for AuxAllocator {
    fn default() -> Self {
        AuxAllocator { next: 1 }
    }
}

impl AuxAllocator {
    pub fn fresh(&mut self) -> Var {
        let v = Var::aux(self.next);
        self.next += 1;
        v
    }

    pub fn allocated(&self) -> u32 {
        self.next - 1
    }
}

/// Postfix expression builder for `p` lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rpn(Vec<RpnToken>);

impl Rpn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn start(id: u64) -> Self {
        Rpn(vec![RpnToken::Int(id.into())])
    }

    pub fn id(mut self, id: u64) -> Self {
        self.0.push(RpnToken::Int(id.into()));
        self
    }

    pub fn lit(mut self, lit: Lit) -> Self {
        self.0.push(RpnToken::Lit(lit));
        self
    }

    pub fn add(mut self) -> Self {
        self.0.push(RpnToken::Add);
        self
    }

    pub fn scale(mut self, k: u64) -> Self {
        self.0.push(RpnToken::Int(BigInt::from(k)));
        self.0.push(RpnToken::Mul);
        self
    }

    pub fn divide(mut self, k: u64) -> Self {
        self.0.push(RpnToken::Int(BigInt::from(k)));
        self.0.push(RpnToken::Div);
        self
    }

    pub fn tokens(&self) -> &[RpnToken] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<RpnToken> {
        self.0
    }
}

/// Writes proof lines and tracks constraint ids. With a shadow checker every
/// step is validated before it is written.
pub struct ProofLogger {
    out: ProofWriter<Box<dyn Write + Send>>,
    next_id: u64,
    aux: AuxAllocator,
    shadow: Option<Checker>,
    lines: u64,
}

impl ProofLogger {
    /// Writes the header and the `f` line for `formula`.
    pub fn new(out: Box<dyn Write + Send>, formula: &Formula) -> Result<Self, LogError> {
        Self::build(out, formula, false)
    }

    pub fn with_shadow(out: Box<dyn Write + Send>, formula: &Formula) -> Result<Self, LogError> {
        Self::build(out, formula, true)
    }

    /// A logger that discards its output, with a shadow checker.
    pub fn checking_sink(formula: &Formula) -> Result<Self, LogError> {
        Self::with_shadow(Box::new(io::sink()), formula)
    }

    fn build(
        out: Box<dyn Write + Send>,
        formula: &Formula,
        shadow: bool,
    ) -> Result<Self, LogError> {
        let mut logger = ProofLogger {
            out: ProofWriter::new(out),
            next_id: 1,
            aux: AuxAllocator::default(),
            shadow: shadow.then(|| Checker::new(formula)),
            lines: 0,
        };
        logger.emit(ProofStep::Header {
            version: "1.1".into(),
        })?;
        logger.emit(ProofStep::Load {
            count: formula.len() as u64,
        })?;
        Ok(logger)
    }

    fn emit(&mut self, step: ProofStep) -> Result<Option<u64>, LogError> {
        if let Some(checker) = &mut self.shadow {
            if let Err(error) = checker.apply(&step) {
                let mut line = Vec::new();
                crate::proof_io::write_step(&mut line, &step, None)?;
                return Err(LogError::Rejected {
                    line: String::from_utf8_lossy(&line).into_owned(),
                    error,
                });
            }
        }
        self.out.write(&step)?;
        self.lines += 1;
        Ok(match step {
            ProofStep::Load { count } => {
                self.next_id += count;
                None
            }
            ProofStep::Red { .. } | ProofStep::Pol { .. } | ProofStep::Rup { .. } => {
                let id = self.next_id;
                self.next_id += 1;
                Some(id)
            }
            _ => None,
        })
    }

    pub fn red(
        &mut self,
        constraint: PBConstraint,
        witness: Substitution,
    ) -> Result<u64, LogError> {
        Ok(self
            .emit(ProofStep::Red {
                constraint,
                witness,
            })?
            .expect("red stores a constraint"))
    }

    pub fn pol(&mut self, rpn: Rpn) -> Result<u64, LogError> {
        Ok(self
            .emit(ProofStep::Pol {
                tokens: rpn.into_tokens(),
            })?
            .expect("pol stores a constraint"))
    }

    pub fn rup(&mut self, constraint: PBConstraint) -> Result<u64, LogError> {
        Ok(self
            .emit(ProofStep::Rup { constraint })?
            .expect("rup stores a constraint"))
    }

    pub fn delete(&mut self, ids: Vec<u64>) -> Result<(), LogError> {
        if !ids.is_empty() {
            self.emit(ProofStep::Del { ids })?;
        }
        Ok(())
    }

    pub fn conclude(&mut self, id: u64) -> Result<(), LogError> {
        self.emit(ProofStep::Conclusion { id })?;
        Ok(())
    }

    pub fn comment(&mut self, text: &str) -> Result<(), LogError> {
        Ok(self.out.comment(text)?)
    }

    /// Whether the shadow database would accept `c` by RUP. `None` without a
    /// shadow checker.
    pub fn would_accept_rup(&mut self, c: &PBConstraint) -> Option<bool> {
        let checker = self.shadow.as_mut()?;
        Some(checker.probe_rup(c))
    }

    /// The constraint stored under `id`, if a shadow checker is attached.
    pub fn shadow_constraint(&self, id: u64) -> Option<&PBConstraint> {
        self.shadow.as_ref()?.database().get(id)
    }

    pub fn shadow(&self) -> Option<&Checker> {
        self.shadow.as_ref()
    }

    pub fn fresh_aux(&mut self) -> Var {
        self.aux.fresh()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn lines_written(&self) -> u64 {
        self.lines
    }

    pub fn bytes_written(&self) -> u64 {
        self.out.bytes_written()
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

impl std::fmt::Debug for ProofLogger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProofLogger")
            .field("next_id", &self.next_id)
            .field("shadow", &self.shadow.is_some())
            .finish()
    }
}
