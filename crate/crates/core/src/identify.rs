//! C-factor extraction from available interventional distributions and the
//! recursive Tian–Pearl `Identify` subroutine.
//!
//! Intermediate estimands use placeholder symbols `@V` for the value of
//! each variable `V`; marginalizing `V` wraps the expression in a sum
//! binding `@V`. Placeholders are replaced by concrete values or query
//! symbols once a ctf-factor is identified.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ctf::{check_consistency, Consistency, CtfFactor, Inconsistency};
use crate::error::{Error, Result};
use crate::expr::{simplify, Atom, Estimand};
use crate::graph::{CausalDiagram, VarSet};
use crate::value::{Binder, Value};

/// The collection of intervention sets `Z_j` whose distributions
/// `P_{z_j}(V)` are available for every `z_j`. The empty set stands for
/// the observational distribution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AvailableSpec {
    sets: Vec<VarSet>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    available: Vec<Vec<String>>,
}

impl AvailableSpec {
    /// Keeps the declared order and drops repeated sets.
    pub fn new<I>(sets: I) -> Self
    where
        I: IntoIterator<Item = VarSet>,
    {
        let mut out: Vec<VarSet> = Vec::new();
        for s in sets {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        AvailableSpec { sets: out }
    }

    /// Only the observational distribution.
    pub fn observational() -> Self {
        AvailableSpec::new([VarSet::new()])
    }

    pub fn sets(&self) -> &[VarSet] {
        &self.sets
    }

    pub fn validate(&self, g: &CausalDiagram) -> Result<()> {
        for s in &self.sets {
            for v in s {
                g.variable(v)?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, g: &CausalDiagram) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        let spec = AvailableSpec::new(
            file.available
                .into_iter()
                .map(|s| s.into_iter().collect::<VarSet>()),
        );
        spec.validate(g)?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let file = SpecFile {
            available: self
                .sets
                .iter()
                .map(|s| s.iter().cloned().collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("spec serializes")
    }
}

pub(crate) fn placeholder(var: &str) -> String {
    format!("@{var}")
}

fn ph(var: &str) -> Value {
    Value::Sym(placeholder(var))
}

fn assign<'a, I: IntoIterator<Item = &'a String>>(vars: I) -> BTreeMap<String, Value> {
    vars.into_iter().map(|v| (v.clone(), ph(v))).collect()
}

/// `Σ_{vars} q`, binding the placeholders of `vars`.
pub(crate) fn marginalize(q: Estimand, vars: &VarSet) -> Estimand {
    let over: Vec<Binder> = vars
        .iter()
        .map(|v| Binder::new(placeholder(v), v))
        .collect();
    Estimand::sum(over, q)
}

/// `Q[B] = P_{V\B}(B)` computed from the family `P_z(V)`, as a product of
/// conditionals `P_z(v_i | m_i)` over the members of `b` in topological
/// order, where `m_i` is the Markov blanket of `v_i` among its
/// predecessors.
pub fn c_factor_from_distribution(b: &VarSet, z: &VarSet, g: &CausalDiagram) -> Result<Estimand> {
    for v in b.iter().chain(z) {
        g.variable(v)?;
    }
    let gz = g.mutilated(z, &VarSet::new());
    if b.is_empty() || !gz.c_components().contains(b) {
        return Err(Error::InvalidArgument(format!(
            "{} is not a c-component once edges into {} are removed",
            show(b),
            show(z)
        )));
    }
    let intervened = assign(z);
    let mut factors = Vec::new();
    let mut prefix = VarSet::new();
    for v in g.topological_order() {
        if z.contains(&v) {
            continue;
        }
        if b.contains(&v) {
            let mut scope = prefix.clone();
            scope.insert(v.clone());
            let blanket = blanket(&gz, &scope, &v, z);
            factors.push(Estimand::Atom(Atom::new(
                intervened.clone(),
                assign([&v]),
                assign(&blanket),
            )));
        }
        prefix.insert(v);
    }
    Ok(Estimand::product(factors))
}

/// `(T ∪ Pa(T)) \ {v} \ exclude`, where `T` is the c-component of `v` in
/// the subgraph induced by `scope`.
fn blanket(g: &CausalDiagram, scope: &VarSet, v: &str, exclude: &VarSet) -> VarSet {
    let t = g.induced(scope).c_component_of(v);
    let mut out = t.clone();
    for w in &t {
        out.extend(g.parents(w));
    }
    out.remove(v);
    out.retain(|x| !exclude.contains(x));
    out
}

/// Identifies `Q[C]` from `Q[T]` given as `q_t`. Returns `None` when `Q[C]`
/// is not identifiable from `Q[T]`.
pub fn identify(
    c: &VarSet,
    t: &VarSet,
    q_t: &Estimand,
    g: &CausalDiagram,
) -> Result<Option<Estimand>> {
    if c.is_empty() || !c.is_subset(t) {
        return Err(Error::InvalidArgument(format!(
            "target {} must be a non-empty subset of {}",
            show(c),
            show(t)
        )));
    }
    for v in t {
        g.variable(v)?;
    }
    let gt = g.induced(t);
    let a = gt.ancestors_of(c);
    if &a == c {
        return Ok(Some(marginalize(q_t.clone(), &diff(t, c))));
    }
    if &a == t {
        return Ok(None);
    }
    let q_a = simplify(&marginalize(q_t.clone(), &diff(t, &a)));
    let ga = g.induced(&a);
    let first = c.iter().next().expect("non-empty");
    let t2 = ga.c_component_of(first);
    if !c.is_subset(&t2) {
        return Err(Error::InvalidArgument(format!(
            "{} does not lie in one c-component",
            show(c)
        )));
    }
    let q_t2 = c_factor_from_factor(&t2, &a, &q_a, g);
    identify(c, &t2, &simplify(&q_t2), g)
}

/// `Q[T']` for a c-component `T'` of `G[A]`, from `Q[A]`:
/// `Π_{V_i ∈ T'} Q[A^(i)](v_i | m_i)`, with `A^(i)` the members of `A` up
/// to `V_i` in topological order and `m_i` the blanket of `v_i` in
/// `G[A^(i)]` restricted to `A`.
fn c_factor_from_factor(t2: &VarSet, a: &VarSet, q_a: &Estimand, g: &CausalDiagram) -> Estimand {
    let order: Vec<String> = g
        .topological_order()
        .into_iter()
        .filter(|v| a.contains(v))
        .collect();
    let mut factors = Vec::new();
    let mut prefix = VarSet::new();
    for v in order {
        let mut upto = prefix.clone();
        upto.insert(v.clone());
        if t2.contains(&v) {
            let m = blanket(g, &upto, &v, &diff(&g.all(), &prefix));
            let mut kept = m.clone();
            kept.insert(v.clone());
            let num = marginalize(q_a.clone(), &diff(a, &kept));
            let den = marginalize(q_a.clone(), &diff(a, &m));
            factors.push(Estimand::fraction(num, den));
        }
        prefix = upto;
    }
    Estimand::product(factors)
}

fn diff(a: &VarSet, b: &VarSet) -> VarSet {
    a.difference(b).cloned().collect()
}

pub(crate) fn show(s: &VarSet) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(","))
}

/// Outcome of identifying one single-c-component ctf-factor.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorOutcome {
    /// Identified from `P_z(V)` for the intervention set `available`.
    Identified {
        estimand: Estimand,
        available: VarSet,
    },
    Inconsistent(Inconsistency),
    NotIdentifiable,
}

/// Identifies a ctf-factor spanning one c-component from the available
/// distributions. The first intervention set in declared order that
/// works is used.
pub fn identify_ctf_factor(
    f: &CtfFactor,
    spec: &AvailableSpec,
    g: &CausalDiagram,
) -> Result<FactorOutcome> {
    f.check_form(g)?;
    spec.validate(g)?;
    if let Consistency::Inconsistent(w) = check_consistency(f, g)? {
        return Ok(FactorOutcome::Inconsistent(w));
    }
    let c = f.variables();
    let first = c
        .iter()
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty factor".into()))?;
    for z in spec.sets() {
        if !z.is_disjoint(&c) {
            continue;
        }
        let gz = g.mutilated(z, &VarSet::new());
        let b = gz.c_component_of(first);
        let q_b = simplify(&c_factor_from_distribution(&b, z, g)?);
        if let Some(q_c) = identify(&c, &b, &q_b, g)? {
            let estimand = simplify(&bind_factor(&simplify(&q_c), f, g)?);
            return Ok(FactorOutcome::Identified {
                estimand,
                available: z.clone(),
            });
        }
    }
    Ok(FactorOutcome::NotIdentifiable)
}

/// Replaces the placeholders of `Q[C]` by the factor's values: members of
/// `C` take their event values, parents take their subscript values and
/// any other free placeholder, on which `Q[C]` does not depend, takes the
/// first value of its domain.
fn bind_factor(q: &Estimand, f: &CtfFactor, g: &CausalDiagram) -> Result<Estimand> {
    let mut subst = BTreeMap::new();
    for e in &f.events {
        for (p, v) in &e.variable.interventions {
            subst.insert(placeholder(p), v.clone());
        }
    }
    for e in &f.events {
        subst.insert(placeholder(&e.variable.base), e.value.clone());
    }
    for s in q.free_symbols() {
        if let Some(var) = s.strip_prefix('@') {
            if !subst.contains_key(&s) {
                let first = g.domain(var)?.first().cloned().expect("non-empty domain");
                subst.insert(s.clone(), Value::Const(first));
            }
        }
    }
    Ok(q.substituted(&subst))
}
