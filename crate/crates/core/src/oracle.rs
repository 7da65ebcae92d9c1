//! Explicit finite structural causal models and brute-force evaluation of
//! counterfactual probabilities by enumerating exogenous states.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::ctf::{CtfEvent, CtfTerm, NestedEvent, Subscript, Unnested};
use crate::error::{Error, Result};
use crate::expr::TableSet;
use crate::graph::{CausalDiagram, VarSet};
use crate::value::Value;

/// One interventional distribution: the intervention and the joint table.
pub type Table = (BTreeMap<String, String>, Vec<f64>);

/// Largest exogenous state space the oracle will enumerate.
pub const MAX_STATES: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exogenous {
    pub name: String,
    pub probs: Vec<f64>,
}

/// Structural function of one endogenous variable, stored as a flat table
/// indexed by the exogenous arguments followed by the parents, each in
/// declared order, the first argument varying slowest. Entries are indices
/// into the variable's domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub variable: String,
    pub exogenous: Vec<String>,
    pub parents: Vec<String>,
    pub table: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSCM {
    graph: CausalDiagram,
    exogenous: Vec<Exogenous>,
    mechanisms: Vec<Mechanism>,
    // cached layout, indices into graph variables / exogenous
    order: Vec<usize>,
    args: Vec<Layout>,
}

#[derive(Debug, Clone, PartialEq)]
struct Layout {
    exo: Vec<(usize, usize)>,
    parents: Vec<(usize, usize)>,
}

impl DiscreteSCM {
    /// Builds and validates a model. `mechanisms` may be listed in any
    /// order but must cover every variable of `graph` exactly once.
    pub fn new(
        graph: CausalDiagram,
        exogenous: Vec<Exogenous>,
        mechanisms: Vec<Mechanism>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let mut exo_names = BTreeSet::new();
        for u in &exogenous {
            if !exo_names.insert(u.name.clone()) {
                return bad(format!("duplicate exogenous variable `{}`", u.name));
            }
            if u.probs.is_empty() || u.probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return bad(format!("`{}` has an invalid probability vector", u.name));
            }
            let total: f64 = u.probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return bad(format!("probabilities of `{}` sum to {total}", u.name));
            }
        }
        let mut by_var: BTreeMap<String, Mechanism> = BTreeMap::new();
        for m in mechanisms {
            graph.variable(&m.variable)?;
            if by_var.contains_key(&m.variable) {
                return bad(format!("two mechanisms for `{}`", m.variable));
            }
            by_var.insert(m.variable.clone(), m);
        }
        let mut ordered = Vec::with_capacity(graph.len());
        let mut args = Vec::with_capacity(graph.len());
        for v in graph.variables() {
            let m = match by_var.remove(&v.name) {
                Some(m) => m,
                None => return bad(format!("no mechanism for `{}`", v.name)),
            };
            let declared: VarSet = m.parents.iter().cloned().collect();
            if declared.len() != m.parents.len() || declared != graph.parents(&v.name) {
                return bad(format!(
                    "mechanism of `{}` must take exactly its parents",
                    v.name
                ));
            }
            let mut exo = Vec::new();
            for u in &m.exogenous {
                match exogenous.iter().position(|e| &e.name == u) {
                    Some(i) => exo.push((i, exogenous[i].probs.len())),
                    None => return bad(format!("unknown exogenous variable `{u}`")),
                }
            }
            let parents: Vec<(usize, usize)> = m
                .parents
                .iter()
                .map(|p| {
                    let i = graph.position(p).expect("parents are declared");
                    (i, graph.variables()[i].domain.len())
                })
                .collect();
            let size: usize = exo.iter().chain(&parents).map(|(_, n)| n).product();
            if m.table.len() != size {
                return bad(format!(
                    "table of `{}` has {} entries, expected {size}",
                    v.name,
                    m.table.len()
                ));
            }
            if let Some(x) = m.table.iter().find(|&&x| x >= v.domain.len()) {
                return bad(format!(
                    "table of `{}` yields out-of-domain index {x}",
                    v.name
                ));
            }
            args.push(Layout { exo, parents });
            ordered.push(m);
        }
        // shared exogenous parents must be exactly the bidirected edges
        let users = |u: usize| -> Vec<usize> {
            args.iter()
                .enumerate()
                .filter(|(_, l)| l.exo.iter().any(|(i, _)| *i == u))
                .map(|(v, _)| v)
                .collect()
        };
        let names: Vec<&str> = graph.names().collect();
        let mut induced = BTreeSet::new();
        for u in 0..exogenous.len() {
            let us = users(u);
            for (i, a) in us.iter().enumerate() {
                for b in &us[i + 1..] {
                    induced.insert((names[*a].min(names[*b]), names[*a].max(names[*b])));
                }
            }
        }
        let declared: BTreeSet<(&str, &str)> = graph.bidirected_edges().collect();
        if induced != declared {
            return bad("shared exogenous variables do not match the bidirected edges".into());
        }
        let order = graph
            .topological_order()
            .iter()
            .map(|n| graph.position(n).expect("declared"))
            .collect();
        Ok(DiscreteSCM {
            graph,
            exogenous,
            mechanisms: ordered,
            order,
            args,
        })
    }

    pub fn graph(&self) -> &CausalDiagram {
        &self.graph
    }

    pub fn exogenous(&self) -> &[Exogenous] {
        &self.exogenous
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn state_space(&self) -> u128 {
        self.exogenous
            .iter()
            .map(|u| u.probs.len() as u128)
            .product()
    }

    /// Calls `f(u, P(u))` for every exogenous state with positive mass.
    fn for_each_unit<F: FnMut(&[usize], f64)>(&self, mut f: F) -> Result<()> {
        let states = self.state_space();
        if states > MAX_STATES {
            return Err(Error::StateSpaceTooLarge(states));
        }
        let n = self.exogenous.len();
        let mut u = vec![0usize; n];
        loop {
            let p: f64 = u
                .iter()
                .zip(&self.exogenous)
                .map(|(&i, e)| e.probs[i])
                .product();
            if p > 0.0 {
                f(&u, p);
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(());
                }
                i -= 1;
                u[i] += 1;
                if u[i] < self.exogenous[i].probs.len() {
                    break;
                }
                u[i] = 0;
            }
        }
    }

    /// Solves the derived model at unit `u`. `fixed[i]` overrides the
    /// function of variable `i`. Returns value indices in declared order.
    fn solve_indices(&self, fixed: &[Option<usize>], u: &[usize]) -> Vec<usize> {
        let mut vals = vec![0usize; self.graph.len()];
        for &v in &self.order {
            vals[v] = match fixed[v] {
                Some(x) => x,
                None => {
                    let layout = &self.args[v];
                    let mut idx = 0;
                    for &(e, n) in &layout.exo {
                        idx = idx * n + u[e];
                    }
                    for &(p, n) in &layout.parents {
                        idx = idx * n + vals[p];
                    }
                    self.mechanisms[v].table[idx]
                }
            };
        }
        vals
    }

    fn index_intervention(
        &self,
        interventions: &BTreeMap<String, String>,
    ) -> Result<Vec<Option<usize>>> {
        let mut fixed = vec![None; self.graph.len()];
        for (k, v) in interventions {
            let i = self
                .graph
                .position(k)
                .ok_or_else(|| Error::UnknownVariable(k.clone()))?;
            fixed[i] = Some(label_index(&self.graph, k, v)?);
        }
        Ok(fixed)
    }

    /// The values of `y` in the model with `interventions` applied, at the
    /// exogenous state `u` (one index per exogenous variable).
    pub fn potential_response(
        &self,
        y: &VarSet,
        interventions: &BTreeMap<String, String>,
        u: &[usize],
    ) -> Result<BTreeMap<String, String>> {
        if u.len() != self.exogenous.len()
            || u.iter()
                .zip(&self.exogenous)
                .any(|(&i, e)| i >= e.probs.len())
        {
            return Err(Error::InvalidArgument(
                "exogenous state out of range".into(),
            ));
        }
        let vals = self.solve_indices(&self.index_intervention(interventions)?, u);
        y.iter()
            .map(|name| {
                let i = self
                    .graph
                    .position(name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                Ok((
                    name.clone(),
                    self.graph.variables()[i].domain[vals[i]].clone(),
                ))
            })
            .collect()
    }

    /// `P(⋀ events)` by summing `P(u)` over units where every event holds.
    /// Nested subscripts are evaluated at the same unit.
    pub fn ctf_probability(&self, events: &[NestedEvent]) -> Result<f64> {
        let compiled: Vec<(Compiled, usize)> = events
            .iter()
            .map(|e| {
                let term = self.compile(&e.term)?;
                let value = const_index(&self.graph, &e.term.base, &e.value)?;
                Ok((term, value))
            })
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        self.for_each_unit(|u, p| {
            if compiled.iter().all(|(t, v)| self.eval(t, u) == *v) {
                total += p;
            }
        })?;
        Ok(total)
    }

    /// [`Self::ctf_probability`] for unnested events.
    pub fn event_probability(&self, events: &[CtfEvent]) -> Result<f64> {
        let nested: Vec<NestedEvent> = events.iter().map(NestedEvent::from).collect();
        self.ctf_probability(&nested)
    }

    /// Value of `Σ_binders P(events)`, summing over the binders' domains.
    pub fn unnested_probability(&self, u: &Unnested) -> Result<f64> {
        let mut total = 0.0;
        for assignment in assignments(
            &self.graph,
            &u.binders
                .iter()
                .map(|b| (b.symbol.clone(), b.variable.clone()))
                .collect::<Vec<_>>(),
        )? {
            let events: Vec<CtfEvent> = u
                .events
                .iter()
                .map(|e| e.substituted(&assignment))
                .collect();
            total += self.event_probability(&events)?;
        }
        Ok(total)
    }

    /// `P(outcome | conditioning)`; `None` when the conditioning event has
    /// probability zero.
    pub fn conditional_probability(
        &self,
        outcome: &[NestedEvent],
        conditioning: &[NestedEvent],
    ) -> Result<Option<f64>> {
        let den = self.ctf_probability(conditioning)?;
        if den == 0.0 {
            return Ok(None);
        }
        let joint: Vec<NestedEvent> = outcome.iter().chain(conditioning).cloned().collect();
        Ok(Some(self.ctf_probability(&joint)? / den))
    }

    fn compile(&self, term: &CtfTerm) -> Result<Compiled> {
        let var = self
            .graph
            .position(&term.base)
            .ok_or_else(|| Error::UnknownVariable(term.base.clone()))?;
        let mut fixed = Vec::new();
        for (k, s) in &term.interventions {
            let i = self
                .graph
                .position(k)
                .ok_or_else(|| Error::UnknownVariable(k.clone()))?;
            let slot = match s {
                Subscript::Value(v) => Slot::Value(const_index(&self.graph, k, v)?),
                Subscript::Nested(inner) => Slot::Nested(self.compile(inner)?),
            };
            fixed.push((i, slot));
        }
        Ok(Compiled { var, fixed })
    }

    fn eval(&self, t: &Compiled, u: &[usize]) -> usize {
        let mut fixed = vec![None; self.graph.len()];
        for (i, slot) in &t.fixed {
            fixed[*i] = Some(match slot {
                Slot::Value(v) => *v,
                Slot::Nested(inner) => self.eval(inner, u),
            });
        }
        self.solve_indices(&fixed, u)[t.var]
    }

    /// `P_z(V)` for every assignment of `z`, as a row-major joint over the
    /// declared variables.
    pub fn interventional_table(&self, z: &VarSet) -> Result<Vec<Table>> {
        for v in z {
            self.graph.variable(v)?;
        }
        let size: usize = self
            .graph
            .variables()
            .iter()
            .map(|v| v.domain.len())
            .product();
        let mut out = Vec::new();
        let slots: Vec<(String, String)> = z.iter().map(|v| (v.clone(), v.clone())).collect();
        for assignment in assignments(&self.graph, &slots)? {
            let labels: BTreeMap<String, String> = assignment
                .into_iter()
                .map(|(k, v)| (k, v.label().to_string()))
                .collect();
            let fixed = self.index_intervention(&labels)?;
            let mut joint = vec![0.0; size];
            self.for_each_unit(|u, p| {
                let vals = self.solve_indices(&fixed, u);
                let mut idx = 0;
                for (i, var) in self.graph.variables().iter().enumerate() {
                    idx = idx * var.domain.len() + vals[i];
                }
                joint[idx] += p;
            })?;
            out.push((labels, joint));
        }
        Ok(out)
    }

    /// Every table promised by an available collection of intervention sets.
    pub fn tables(&self, available: &[VarSet]) -> Result<TableSet> {
        let mut set = TableSet::new(self.graph.variables().to_vec());
        for z in available {
            for (assignment, joint) in self.interventional_table(z)? {
                set.insert(assignment, joint)?;
            }
        }
        Ok(set)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScmFile = serde_json::from_str(text)?;
        let graph = CausalDiagram::from_json(&file.graph.to_string())?;
        let mut mechanisms = Vec::new();
        for m in file.mechanisms {
            let mut table = Vec::new();
            flatten_table(&m.table, &mut table)?;
            mechanisms.push(Mechanism {
                variable: m.variable,
                exogenous: m.exogenous,
                parents: m.parents,
                table,
            });
        }
        DiscreteSCM::new(graph, file.exogenous, mechanisms)
    }

    pub fn to_json(&self) -> String {
        let graph: Json = serde_json::from_str(&self.graph.to_json()).expect("graph json");
        let mechanisms = self
            .mechanisms
            .iter()
            .zip(&self.args)
            .map(|(m, l)| {
                let dims: Vec<usize> = l.exo.iter().chain(&l.parents).map(|(_, n)| *n).collect();
                MechanismFile {
                    variable: m.variable.clone(),
                    exogenous: m.exogenous.clone(),
                    parents: m.parents.clone(),
                    table: nest_table(&m.table, &dims),
                }
            })
            .collect();
        let file = ScmFile {
            graph,
            exogenous: self.exogenous.clone(),
            mechanisms,
        };
        serde_json::to_string_pretty(&file).expect("scm serializes")
    }
}

#[derive(Debug, Clone)]
struct Compiled {
    var: usize,
    fixed: Vec<(usize, Slot)>,
}

#[derive(Debug, Clone)]
enum Slot {
    Value(usize),
    Nested(Compiled),
}

#[derive(Serialize, Deserialize)]
struct ScmFile {
    graph: Json,
    exogenous: Vec<Exogenous>,
    mechanisms: Vec<MechanismFile>,
}

#[derive(Serialize, Deserialize)]
struct MechanismFile {
    variable: String,
    #[serde(default)]
    exogenous: Vec<String>,
    #[serde(default)]
    parents: Vec<String>,
    table: Json,
}

fn flatten_table(v: &Json, out: &mut Vec<usize>) -> Result<()> {
    match v {
        Json::Array(items) => items.iter().try_for_each(|i| flatten_table(i, out)),
        Json::Number(n) => {
            let x = n
                .as_u64()
                .ok_or_else(|| Error::InvalidModel(format!("table entry {n} is not an index")))?;
            out.push(x as usize);
            Ok(())
        }
        other => Err(Error::InvalidModel(format!(
            "unexpected table entry {other}"
        ))),
    }
}

fn nest_table(flat: &[usize], dims: &[usize]) -> Json {
    match dims.split_first() {
        None => Json::from(flat[0]),
        Some((&n, rest)) => {
            let chunk = flat.len() / n;
            Json::Array(
                (0..n)
                    .map(|i| nest_table(&flat[i * chunk..(i + 1) * chunk], rest))
                    .collect(),
            )
        }
    }
}

fn label_index(g: &CausalDiagram, var: &str, label: &str) -> Result<usize> {
    g.variable(var)?
        .index_of(label)
        .ok_or_else(|| Error::ValueOutOfDomain {
            variable: var.to_string(),
            value: label.to_string(),
        })
}

fn const_index(g: &CausalDiagram, var: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Const(c) => label_index(g, var, c),
        Value::Sym(s) => Err(Error::UnboundSymbol(s.clone())),
    }
}

/// Every assignment of constants to `(symbol, variable)` slots.
pub(crate) fn assignments(
    g: &CausalDiagram,
    slots: &[(String, String)],
) -> Result<Vec<BTreeMap<String, Value>>> {
    let mut out = vec![BTreeMap::new()];
    for (sym, var) in slots {
        let domain = g.domain(var)?;
        out = out
            .into_iter()
            .flat_map(|a| {
                domain.iter().map(move |d| {
                    let mut next = a.clone();
                    next.insert(sym.clone(), Value::constant(d));
                    next
                })
            })
            .collect();
    }
    Ok(out)
}

/// Size of every random exogenous variable.
const EXO_SIZE: usize = 3;

/// A random model whose induced diagram is `g`: one exogenous variable per
/// bidirected edge, one private exogenous variable per endogenous one,
/// random exogenous distributions and random function tables. Every value
/// of every variable has positive probability given any configuration of
/// its other arguments, so every interventional distribution is positive.
pub fn random_scm(g: &CausalDiagram, seed: u64) -> DiscreteSCM {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exogenous = Vec::new();
    let mut private = BTreeMap::new();
    for v in g.variables() {
        let size = EXO_SIZE.max(v.domain.len());
        private.insert(v.name.clone(), exogenous.len());
        exogenous.push(Exogenous {
            name: format!("U_{}", v.name),
            probs: dirichlet(&mut rng, size),
        });
    }
    let mut shared: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (a, b) in g.bidirected_edges() {
        let name = format!("U_{a}_{b}");
        exogenous.push(Exogenous {
            name: name.clone(),
            probs: dirichlet(&mut rng, EXO_SIZE),
        });
        shared.entry(a.to_string()).or_default().push(name.clone());
        shared.entry(b.to_string()).or_default().push(name);
    }
    let mut mechanisms = Vec::new();
    for v in g.variables() {
        let own = &exogenous[private[&v.name]];
        let mut exo = vec![own.name.clone()];
        exo.extend(shared.get(&v.name).cloned().unwrap_or_default());
        let parents: Vec<String> = g.parents(&v.name).into_iter().collect();
        let own_size = own.probs.len();
        let others: usize = exo[1..]
            .iter()
            .map(|n| {
                exogenous
                    .iter()
                    .find(|e| &e.name == n)
                    .expect("created above")
                    .probs
                    .len()
            })
            .chain(parents.iter().map(|p| g.domain(p).expect("declared").len()))
            .product();
        let k = v.domain.len();
        let mut table = vec![0usize; own_size * others];
        for rest in 0..others {
            // the private argument varies slowest; its first k values cover the domain
            let mut perm: Vec<usize> = (0..k).collect();
            for i in (1..k).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            for (i, slot) in (0..own_size).map(|i| (i, i * others + rest)) {
                table[slot] = if i < k { perm[i] } else { rng.gen_range(0..k) };
            }
        }
        mechanisms.push(Mechanism {
            variable: v.name.clone(),
            exogenous: exo,
            parents,
            table,
        });
    }
    DiscreteSCM::new(g.clone(), exogenous, mechanisms).expect("random model matches its diagram")
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3)
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}
