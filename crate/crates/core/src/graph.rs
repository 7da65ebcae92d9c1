//! Acyclic directed mixed graphs.
//!
//! A [`CausalDiagram`] stores directed edges (functional parents) and
//! bidirected edges (shared exogenous parents) over named variables with
//! finite domains. Diagrams are validated on construction and immutable
//! afterwards; every graph operation returns a new diagram or a set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of variable names.
pub type VarSet = BTreeSet<String>;

/// Builds a [`VarSet`] from string-like items.
pub fn var_set<I, S>(items: I) -> VarSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    items.into_iter().map(Into::into).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(default = "binary_domain")]
    pub domain: Vec<String>,
}

fn binary_domain() -> Vec<String> {
    vec!["0".to_string(), "1".to_string()]
}

impl Variable {
    pub fn new(name: impl Into<String>, domain: &[&str]) -> Self {
        Variable {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            domain: binary_domain(),
        }
    }

    pub fn contains(&self, value: &str) -> bool {
        self.domain.iter().any(|v| v == value)
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

/// JSON layout of a diagram file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DiagramFile {
    variables: Vec<Variable>,
    #[serde(default)]
    directed: Vec<(String, String)>,
    #[serde(default)]
    bidirected: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDiagram {
    variables: Vec<Variable>,
    index: BTreeMap<String, usize>,
    directed: BTreeSet<(String, String)>,
    // stored with the lexicographically smaller endpoint first
    bidirected: BTreeSet<(String, String)>,
}

impl CausalDiagram {
    pub fn new<D, B>(variables: Vec<Variable>, directed: D, bidirected: B) -> Result<Self>
    where
        D: IntoIterator<Item = (String, String)>,
        B: IntoIterator<Item = (String, String)>,
    {
        let mut index = BTreeMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.domain.is_empty() {
                return Err(Error::EmptyDomain(v.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for value in &v.domain {
                if !seen.insert(value) {
                    return Err(Error::DuplicateDomainValue {
                        variable: v.name.clone(),
                        value: value.clone(),
                    });
                }
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let check = |name: &str| {
            if index.contains_key(name) {
                Ok(())
            } else {
                Err(Error::UnknownVariable(name.to_string()))
            }
        };

        let mut dir = BTreeSet::new();
        for (a, b) in directed {
            check(&a)?;
            check(&b)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let desc = format!("{a} -> {b}");
            if !dir.insert((a, b)) {
                return Err(Error::DuplicateEdge(desc));
            }
        }
        let mut bi = BTreeSet::new();
        for (a, b) in bidirected {
            check(&a)?;
            check(&b)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let desc = format!("{a} <-> {b}");
            let key = if a < b { (a, b) } else { (b, a) };
            if !bi.insert(key) {
                return Err(Error::DuplicateEdge(desc));
            }
        }

        let g = CausalDiagram {
            variables,
            index,
            directed: dir,
            bidirected: bi,
        };
        g.check_acyclic()?;
        Ok(g)
    }

    /// Convenience constructor for diagrams over binary variables.
    pub fn binary(
        names: &[&str],
        directed: &[(&str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<Self> {
        Self::new(
            names.iter().map(|n| Variable::binary(*n)).collect(),
            directed.iter().map(|(a, b)| (a.to_string(), b.to_string())),
            bidirected
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string())),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DiagramFile = serde_json::from_str(text)?;
        Self::new(file.variables, file.directed, file.bidirected)
    }

    pub fn to_json(&self) -> String {
        let file = DiagramFile {
            variables: self.variables.clone(),
            directed: self.directed.iter().cloned().collect(),
            bidirected: self.bidirected.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("diagram serializes")
    }

    fn check_acyclic(&self) -> Result<()> {
        let order = self.kahn();
        if order.len() == self.variables.len() {
            return Ok(());
        }
        let placed: VarSet = order.into_iter().collect();
        let stuck = self
            .names()
            .find(|n| !placed.contains(*n))
            .expect("some variable is on a cycle");
        Err(Error::Cyclic(stuck.to_string()))
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    /// Variable names in declaration order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn all(&self) -> VarSet {
        self.names().map(str::to_string).collect()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn variable(&self, name: &str) -> Result<&Variable> {
        self.index
            .get(name)
            .map(|&i| &self.variables[i])
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn domain(&self, name: &str) -> Result<&[String]> {
        Ok(&self.variable(name)?.domain)
    }

    /// Returns a copy with the domain of `name` replaced.
    pub fn with_domain(&self, name: &str, domain: &[&str]) -> Result<Self> {
        let i = self
            .position(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let mut variables = self.variables.clone();
        variables[i] = Variable::new(name, domain);
        Self::new(
            variables,
            self.directed.iter().cloned(),
            self.bidirected.iter().cloned(),
        )
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.directed.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bidirected
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn has_directed(&self, from: &str, to: &str) -> bool {
        self.directed.contains(&(from.to_string(), to.to_string()))
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        let key = if a < b { (a, b) } else { (b, a) };
        self.bidirected
            .contains(&(key.0.to_string(), key.1.to_string()))
    }

    pub fn parents(&self, name: &str) -> VarSet {
        self.directed
            .iter()
            .filter(|(_, b)| b == name)
            .map(|(a, _)| a.clone())
            .collect()
    }

    pub fn children(&self, name: &str) -> VarSet {
        self.directed
            .iter()
            .filter(|(a, _)| a == name)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn spouses(&self, name: &str) -> VarSet {
        self.bidirected
            .iter()
            .filter_map(|(a, b)| {
                if a == name {
                    Some(b.clone())
                } else if b == name {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    fn require(&self, vars: &VarSet) -> Result<()> {
        match vars.iter().find(|v| !self.contains(v)) {
            Some(v) => Err(Error::UnknownVariable(v.clone())),
            None => Ok(()),
        }
    }

    /// Reflexive-transitive closure of `vars` along reversed directed edges.
    pub fn ancestors(&self, vars: &VarSet) -> Result<VarSet> {
        self.require(vars)?;
        Ok(self.ancestors_of(vars))
    }

    pub(crate) fn ancestors_of(&self, vars: &VarSet) -> VarSet {
        let mut out = vars.clone();
        let mut stack: Vec<String> = vars.iter().cloned().collect();
        while let Some(v) = stack.pop() {
            for p in self.parents(&v) {
                if out.insert(p.clone()) {
                    stack.push(p);
                }
            }
        }
        out
    }

    pub(crate) fn ancestors_of_one(&self, var: &str) -> VarSet {
        self.ancestors_of(&var_set([var]))
    }

    /// Partition of the variables into c-components, ordered by their
    /// smallest member name.
    pub fn c_components(&self) -> Vec<VarSet> {
        let mut seen = VarSet::new();
        let mut out = Vec::new();
        let mut names: Vec<&str> = self.names().collect();
        names.sort_unstable();
        for start in names {
            if seen.contains(start) {
                continue;
            }
            let mut block = VarSet::new();
            let mut stack = vec![start.to_string()];
            while let Some(v) = stack.pop() {
                if !block.insert(v.clone()) {
                    continue;
                }
                for s in self.spouses(&v) {
                    if !block.contains(&s) {
                        stack.push(s);
                    }
                }
            }
            seen.extend(block.iter().cloned());
            out.push(block);
        }
        out
    }

    /// The c-component containing `var`.
    pub fn c_component_of(&self, var: &str) -> VarSet {
        self.c_components()
            .into_iter()
            .find(|c| c.contains(var))
            .unwrap_or_default()
    }

    /// Removes edges coming into `cut_incoming` (directed and bidirected)
    /// and directed edges going out of `cut_outgoing`.
    pub fn mutilate(&self, cut_incoming: &VarSet, cut_outgoing: &VarSet) -> Result<Self> {
        self.require(cut_incoming)?;
        self.require(cut_outgoing)?;
        Ok(self.mutilated(cut_incoming, cut_outgoing))
    }

    pub(crate) fn mutilated(&self, cut_incoming: &VarSet, cut_outgoing: &VarSet) -> Self {
        let directed = self
            .directed
            .iter()
            .filter(|(a, b)| !cut_incoming.contains(b) && !cut_outgoing.contains(a))
            .cloned()
            .collect();
        let bidirected = self
            .bidirected
            .iter()
            .filter(|(a, b)| !cut_incoming.contains(a) && !cut_incoming.contains(b))
            .cloned()
            .collect();
        CausalDiagram {
            variables: self.variables.clone(),
            index: self.index.clone(),
            directed,
            bidirected,
        }
    }

    pub fn induced_subgraph(&self, vars: &VarSet) -> Result<Self> {
        self.require(vars)?;
        Ok(self.induced(vars))
    }

    pub(crate) fn induced(&self, vars: &VarSet) -> Self {
        let variables: Vec<Variable> = self
            .variables
            .iter()
            .filter(|v| vars.contains(&v.name))
            .cloned()
            .collect();
        let index = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let keep = |(a, b): &(String, String)| vars.contains(a) && vars.contains(b);
        CausalDiagram {
            variables,
            index,
            directed: self.directed.iter().filter(|e| keep(e)).cloned().collect(),
            bidirected: self
                .bidirected
                .iter()
                .filter(|e| keep(e))
                .cloned()
                .collect(),
        }
    }

    /// Topological order with ties broken by variable name.
    pub fn topological_order(&self) -> Vec<String> {
        self.kahn()
    }

    fn kahn(&self) -> Vec<String> {
        let mut indegree: BTreeMap<&str, usize> = self.names().map(|n| (n, 0)).collect();
        for (_, b) in &self.directed {
            *indegree.get_mut(b.as_str()).expect("endpoint declared") += 1;
        }
        let mut ready: BTreeSet<&str> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut order = Vec::with_capacity(self.variables.len());
        while let Some(next) = ready.pop_first() {
            order.push(next.to_string());
            for (a, b) in &self.directed {
                if a == next {
                    let d = indegree.get_mut(b.as_str()).expect("endpoint declared");
                    *d -= 1;
                    if *d == 0 {
                        ready.insert(b.as_str());
                    }
                }
            }
        }
        order
    }
}

impl fmt::Display for CausalDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .directed_edges()
            .map(|(a, b)| format!("{a}->{b}"))
            .chain(self.bidirected_edges().map(|(a, b)| format!("{a}<->{b}")))
            .collect();
        write!(f, "[{}]", edges.join(", "))
    }
}
