use std::borrow::Cow;
use std::collections::HashMap;

use crate::pb::{Lit, Var};

/// Auxiliary indices at or above this value belong to free-form names.
const CUSTOM_BASE: u32 = 1 << 31;

/// Maps textual variable names to variables.
///
/// `x<k>` is input variable `k` and `y<k>` auxiliary variable `k`; any other
/// name matching `[A-Za-z][A-Za-z0-9_]*` is registered on first use and gets
/// its own auxiliary index.
#[derive(Clone, Debug, Default)]
pub struct VarNames {
    custom: HashMap<String, Var>,
    reverse: HashMap<Var, String>,
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses `x<k>`/`y<k>` with a positive index and no leading zeros.
fn standard(name: &str) -> Option<Var> {
    let (head, digits) = name.split_at(1);
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index: u32 = digits.parse().ok()?;
    match head {
        "x" => Some(Var::input(index)),
        "y" if index < CUSTOM_BASE => Some(Var::aux(index)),
        _ => None,
    }
}

impl VarNames {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resolves `name`, registering it if it is new. Returns `None` for names
    /// outside the grammar.
    pub fn resolve(&mut self, name: &str) -> Option<Var> {
        if !is_valid_name(name) {
            return None;
        }
        if let Some(v) = standard(name) {
            return Some(v);
        }
        if let Some(&v) = self.custom.get(name) {
            return Some(v);
        }
        let v = Var::aux(CUSTOM_BASE + self.custom.len() as u32);
        self.custom.insert(name.to_string(), v);
        self.reverse.insert(v, name.to_string());
        Some(v)
    }

    /// Resolves `name` or `~name`.
    pub fn resolve_lit(&mut self, token: &str) -> Option<Lit> {
        match token.strip_prefix('~') {
            Some(rest) => self.resolve(rest).map(Var::negative),
            None => self.resolve(token).map(Var::positive),
        }
    }

    pub fn name(&self, var: Var) -> Cow<'_, str> {
        match self.reverse.get(&var) {
            Some(n) => Cow::Borrowed(n.as_str()),
            None => Cow::Owned(var.to_string()),
        }
    }

    pub fn lit_name(&self, lit: Lit) -> String {
        if lit.is_negated() {
            format!("~{}", self.name(lit.var()))
        } else {
            self.name(lit.var()).into_owned()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_and_custom_names() {
        let mut n = VarNames::new();
        assert_eq!(n.resolve("x12"), Some(Var::input(12)));
        assert_eq!(n.resolve("y3"), Some(Var::aux(3)));
        let a = n.resolve("carry_1").unwrap();
        assert_eq!(n.resolve("carry_1"), Some(a));
        assert_ne!(n.resolve("x0").unwrap(), a);
        assert_eq!(n.name(a), "carry_1");
        assert_eq!(n.lit_name(!a.positive()), "~carry_1");
        assert_eq!(n.resolve("1x"), None);
        assert_eq!(n.resolve(""), None);
        assert_eq!(n.resolve_lit("~x4"), Some(Var::input(4).negative()));
    }
}
