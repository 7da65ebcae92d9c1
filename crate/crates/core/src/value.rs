//! Values appearing in events, subscripts and estimand atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::CausalDiagram;

/// A value slot: either a concrete domain label or a symbol.
///
/// Symbols are compared structurally. Two different symbols, or a symbol
/// and a constant, are treated as distinct values; a symbol bound by a
/// summation ranges over the full domain of its variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Const(String),
    Sym(String),
}

impl Value {
    pub fn constant(label: impl Into<String>) -> Self {
        Value::Const(label.into())
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Value::Sym(name.into())
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            Value::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Value::Const(c) => Some(c),
            Value::Sym(_) => None,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Value::Const(s) | Value::Sym(s) => s,
        }
    }

    /// Applies a symbol substitution.
    pub fn substituted(&self, subst: &BTreeMap<String, Value>) -> Value {
        match self {
            Value::Sym(s) => subst.get(s).cloned().unwrap_or_else(|| self.clone()),
            Value::Const(_) => self.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A summation index: `symbol` ranges over the domain of `variable`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binder {
    pub symbol: String,
    pub variable: String,
}

impl Binder {
    pub fn new(symbol: impl Into<String>, variable: impl Into<String>) -> Self {
        Binder {
            symbol: symbol.into(),
            variable: variable.into(),
        }
    }
}

/// Generator of internal symbols. Internal names contain `~`, which the
/// query grammar never produces, so they cannot collide with user symbols.
#[derive(Debug, Default, Clone)]
pub struct SymbolGen {
    next: usize,
}

impl SymbolGen {
    pub fn new() -> Self {
        Self::default()
    }

    /// A fresh symbol for a value of `variable`.
    pub fn fresh(&mut self, variable: &str) -> Binder {
        let symbol = format!("{}~{}", variable.to_lowercase(), self.next);
        self.next += 1;
        Binder::new(symbol, variable)
    }
}

/// Assigns readable names (`w`, `w'`, `w''`, ...) to internal symbols,
/// avoiding every domain label of the diagram and every reserved name.
#[derive(Debug, Clone)]
pub struct Namer {
    taken: BTreeSet<String>,
}

impl Namer {
    pub fn new(g: &CausalDiagram) -> Self {
        let taken = g
            .variables()
            .iter()
            .flat_map(|v| v.domain.iter().cloned())
            .collect();
        Namer { taken }
    }

    pub fn reserve(&mut self, name: impl Into<String>) {
        self.taken.insert(name.into());
    }

    pub fn name_for(&mut self, variable: &str) -> String {
        let mut candidate = variable.to_lowercase();
        while self.taken.contains(&candidate) {
            candidate.push('\'');
        }
        self.taken.insert(candidate.clone());
        candidate
    }
}

pub(crate) fn is_internal(symbol: &str) -> bool {
    symbol.contains('~') || symbol.starts_with('@')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn namer_adds_primes() {
        let g = fixtures::fig5c();
        let mut n = Namer::new(&g);
        assert_eq!(n.name_for("W"), "w");
        assert_eq!(n.name_for("W"), "w'");
        assert_eq!(n.name_for("W"), "w''");
    }

    #[test]
    fn namer_avoids_domain_labels() {
        let g = fixtures::bow().with_domain("X", &["x", "x'"]).unwrap();
        let mut n = Namer::new(&g);
        assert_eq!(n.name_for("X"), "x''");
    }

    #[test]
    fn fresh_symbols_are_internal() {
        let mut gen = SymbolGen::new();
        let a = gen.fresh("W");
        let b = gen.fresh("W");
        assert_ne!(a.symbol, b.symbol);
        assert!(is_internal(&a.symbol));
        assert_eq!(a.variable, "W");
    }
}
