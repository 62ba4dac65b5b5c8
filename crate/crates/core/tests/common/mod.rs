#![allow(dead_code)]

pub mod golden;
pub mod oracles;

use std::io::{self, Write};
use std::sync::{Arc, Mutex};

use pbxor::logging::ProofLogger;
use pbxor::pb::{Lit, PBConstraint, Var};
use pbxor::proof_io::Formula;

/// A writer whose contents stay readable after it is handed away.
#[derive(Clone, Default)]
pub struct SharedBuf(Arc<Mutex<Vec<u8>>>);

impl SharedBuf {
    pub fn text(&self) -> String {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap()
    }
}

impl Write for SharedBuf {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub fn shadow_logger(formula: &Formula) -> (ProofLogger, SharedBuf) {
    let buf = SharedBuf::default();
    let logger = ProofLogger::with_shadow(Box::new(buf.clone()), formula).unwrap();
    (logger, buf)
}

pub fn x(i: u32) -> Lit {
    Var::input(i).positive()
}

/// The canonical clauses of `x1 ⊕ … ⊕ xk = b`, as a formula.
pub fn parity_formula(k: u32, b: bool) -> Formula {
    let mut cs = Vec::new();
    for mask in 0u32..(1 << k) {
        if (mask.count_ones() % 2 == 1) != b {
            let lits = (0..k).map(|j| Lit::new(Var::input(j + 1), mask >> j & 1 == 1));
            cs.push(PBConstraint::clause(lits));
        }
    }
    Formula::new(k, cs)
}
