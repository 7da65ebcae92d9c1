//! Counterfactual variables and events, and the rewrites that bring a
//! counterfactual query into ctf-factor form: unnesting, interventional
//! minimization, counterfactual ancestors, ancestral-set factorization and
//! c-component decomposition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CausalDiagram, VarSet};
use crate::value::{Binder, Namer, SymbolGen, Value};

/// A potential response `Y_x`: base variable `Y` under the constant
/// interventions `x`. An empty intervention map is the observational `Y`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CtfVariable {
    pub base: String,
    #[serde(default)]
    pub interventions: BTreeMap<String, Value>,
}

impl CtfVariable {
    pub fn new(base: impl Into<String>) -> Self {
        CtfVariable {
            base: base.into(),
            interventions: BTreeMap::new(),
        }
    }

    pub fn with(mut self, var: impl Into<String>, value: Value) -> Self {
        self.interventions.insert(var.into(), value);
        self
    }

    pub fn intervened(&self) -> VarSet {
        self.interventions.keys().cloned().collect()
    }

    /// True for `Y_y`-style variables that intervene on their own base.
    pub fn is_self_intervened(&self) -> bool {
        self.interventions.contains_key(&self.base)
    }

    pub fn substituted(&self, subst: &BTreeMap<String, Value>) -> Self {
        CtfVariable {
            base: self.base.clone(),
            interventions: self
                .interventions
                .iter()
                .map(|(k, v)| (k.clone(), v.substituted(subst)))
                .collect(),
        }
    }

    pub fn validate(&self, g: &CausalDiagram) -> Result<()> {
        g.variable(&self.base)?;
        for (k, v) in &self.interventions {
            check_value(g, k, v)?;
        }
        Ok(())
    }

    pub fn eq(self, value: Value) -> CtfEvent {
        CtfEvent {
            variable: self,
            value,
        }
    }
}

impl fmt::Display for CtfVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if !self.interventions.is_empty() {
            let parts: Vec<String> = self
                .interventions
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            write!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

pub(crate) fn check_value(g: &CausalDiagram, var: &str, value: &Value) -> Result<()> {
    let v = g.variable(var)?;
    match value {
        Value::Const(c) if !v.contains(c) => Err(Error::ValueOutOfDomain {
            variable: var.to_string(),
            value: c.clone(),
        }),
        _ => Ok(()),
    }
}

/// The event `variable = value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CtfEvent {
    pub variable: CtfVariable,
    pub value: Value,
}

impl CtfEvent {
    pub fn new(variable: CtfVariable, value: Value) -> Self {
        CtfEvent { variable, value }
    }

    pub fn base(&self) -> &str {
        &self.variable.base
    }

    pub fn substituted(&self, subst: &BTreeMap<String, Value>) -> Self {
        CtfEvent {
            variable: self.variable.substituted(subst),
            value: self.value.substituted(subst),
        }
    }

    pub fn validate(&self, g: &CausalDiagram) -> Result<()> {
        self.variable.validate(g)?;
        check_value(g, &self.variable.base, &self.value)
    }

    /// Every symbol mentioned by the event.
    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.variable
            .interventions
            .values()
            .chain(std::iter::once(&self.value))
            .filter_map(Value::as_sym)
    }
}

impl fmt::Display for CtfEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.variable, self.value)
    }
}

/// Writes `P(e1, e2, ...)`.
pub fn display_events(events: &[CtfEvent]) -> String {
    let parts: Vec<String> = events.iter().map(ToString::to_string).collect();
    format!("P({})", parts.join(", "))
}

/// An intervention entry of a possibly nested term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subscript {
    Value(Value),
    Nested(CtfTerm),
}

/// A possibly nested counterfactual such as `Y_{x', Z_x}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtfTerm {
    pub base: String,
    #[serde(default)]
    pub interventions: BTreeMap<String, Subscript>,
}

impl CtfTerm {
    pub fn new(base: impl Into<String>) -> Self {
        CtfTerm {
            base: base.into(),
            interventions: BTreeMap::new(),
        }
    }

    pub fn set(mut self, var: impl Into<String>, value: Value) -> Self {
        self.interventions
            .insert(var.into(), Subscript::Value(value));
        self
    }

    pub fn nest(mut self, inner: CtfTerm) -> Self {
        self.interventions
            .insert(inner.base.clone(), Subscript::Nested(inner));
        self
    }

    pub fn is_nested(&self) -> bool {
        self.interventions
            .values()
            .any(|s| matches!(s, Subscript::Nested(_)))
    }

    /// The same term when no entry is nested.
    pub fn as_variable(&self) -> Option<CtfVariable> {
        let mut out = CtfVariable::new(&self.base);
        for (k, s) in &self.interventions {
            match s {
                Subscript::Value(v) => {
                    out.interventions.insert(k.clone(), v.clone());
                }
                Subscript::Nested(_) => return None,
            }
        }
        Some(out)
    }

    pub fn eq(self, value: Value) -> NestedEvent {
        NestedEvent { term: self, value }
    }
}

impl From<&CtfVariable> for CtfTerm {
    fn from(v: &CtfVariable) -> Self {
        CtfTerm {
            base: v.base.clone(),
            interventions: v
                .interventions
                .iter()
                .map(|(k, v)| (k.clone(), Subscript::Value(v.clone())))
                .collect(),
        }
    }
}

impl fmt::Display for CtfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if !self.interventions.is_empty() {
            let parts: Vec<String> = self
                .interventions
                .iter()
                .map(|(k, s)| match s {
                    Subscript::Value(v) => format!("{k}={v}"),
                    Subscript::Nested(t) => format!("{k}={t}"),
                })
                .collect();
            write!(f, "[{}]", parts.join(", "))?;
        }
        Ok(())
    }
}

/// The event `term = value` for a possibly nested term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedEvent {
    pub term: CtfTerm,
    pub value: Value,
}

impl From<&CtfEvent> for NestedEvent {
    fn from(e: &CtfEvent) -> Self {
        NestedEvent {
            term: CtfTerm::from(&e.variable),
            value: e.value.clone(),
        }
    }
}

impl From<CtfEvent> for NestedEvent {
    fn from(e: CtfEvent) -> Self {
        NestedEvent::from(&e)
    }
}

impl fmt::Display for NestedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.term, self.value)
    }
}

/// A sum over `binders` of the probability of a conjunction of unnested
/// events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unnested {
    pub binders: Vec<Binder>,
    pub events: Vec<CtfEvent>,
}

impl Unnested {
    /// Replaces internal binder symbols by readable names.
    pub fn renamed(&self, namer: &mut Namer) -> Unnested {
        let mut subst = BTreeMap::new();
        let binders = self
            .binders
            .iter()
            .map(|b| {
                let name = namer.name_for(&b.variable);
                subst.insert(b.symbol.clone(), Value::Sym(name.clone()));
                Binder::new(name, &b.variable)
            })
            .collect();
        Unnested {
            binders,
            events: self.events.iter().map(|e| e.substituted(&subst)).collect(),
        }
    }
}

impl fmt::Display for Unnested {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.binders.is_empty() {
            let names: Vec<&str> = self.binders.iter().map(|b| b.symbol.as_str()).collect();
            write!(f, "Σ_{{{}}} ", names.join(","))?;
        }
        f.write_str(&display_events(&self.events))
    }
}

/// Rewrites nested events into a sum of unnested conjunctions by the
/// unnesting theorem, innermost terms first: `Y_{Z=Z_x}` becomes `Y_z`
/// together with the event `Z_x = z`, summed over `z`.
pub fn unnest(events: &[NestedEvent], g: &CausalDiagram, gen: &mut SymbolGen) -> Result<Unnested> {
    let mut binders = Vec::new();
    let mut out = Vec::new();
    for e in events {
        let mut aux = Vec::new();
        let variable = flatten(&e.term, g, gen, &mut binders, &mut aux)?;
        check_value(g, &variable.base, &e.value)?;
        out.push(CtfEvent::new(variable, e.value.clone()));
        out.extend(aux);
    }
    Ok(Unnested {
        binders,
        events: out,
    })
}

fn flatten(
    term: &CtfTerm,
    g: &CausalDiagram,
    gen: &mut SymbolGen,
    binders: &mut Vec<Binder>,
    aux: &mut Vec<CtfEvent>,
) -> Result<CtfVariable> {
    g.variable(&term.base)?;
    let mut out = CtfVariable::new(&term.base);
    for (key, sub) in &term.interventions {
        g.variable(key)?;
        let value = match sub {
            Subscript::Value(v) => {
                check_value(g, key, v)?;
                v.clone()
            }
            Subscript::Nested(inner) => {
                if &inner.base != key {
                    return Err(Error::InvalidTerm(format!(
                        "intervention on `{key}` is set to a response of `{}`",
                        inner.base
                    )));
                }
                if inner.interventions.contains_key(&term.base) && inner.base == term.base {
                    return Err(Error::InvalidTerm(format!("`{term}` nests itself")));
                }
                let inner_var = flatten(inner, g, gen, binders, aux)?;
                let b = gen.fresh(key);
                let value = Value::Sym(b.symbol.clone());
                binders.push(b);
                aux.push(CtfEvent::new(inner_var, value.clone()));
                value
            }
        };
        out.interventions.insert(key.clone(), value);
    }
    Ok(out)
}

/// Drops interventions that cannot reach the base variable once the
/// remaining ones are fixed: `Y_x` becomes `Y_z` with
/// `Z = X ∩ An(Y)` in the graph with edges into `X` removed.
pub fn minimize(v: &CtfVariable, g: &CausalDiagram) -> CtfVariable {
    if let Some(own) = v.interventions.get(&v.base) {
        return CtfVariable::new(&v.base).with(&v.base, own.clone());
    }
    if v.interventions.is_empty() {
        return v.clone();
    }
    let x = v.intervened();
    let reach = g.mutilated(&x, &VarSet::new()).ancestors_of_one(&v.base);
    CtfVariable {
        base: v.base.clone(),
        interventions: v
            .interventions
            .iter()
            .filter(|(k, _)| reach.contains(*k))
            .map(|(k, val)| (k.clone(), val.clone()))
            .collect(),
    }
}

/// Counterfactual ancestors: for `Y_x`, every `W_z` with `W` an ancestor
/// of `Y` once edges out of `X` are removed and `z` the part of `x` that
/// still reaches `W` once edges into `X` are removed.
pub fn ctf_ancestors(vs: &BTreeSet<CtfVariable>, g: &CausalDiagram) -> BTreeSet<CtfVariable> {
    let mut out = BTreeSet::new();
    for v in vs {
        out.extend(ancestors_of_variable(v, g));
    }
    out
}

pub(crate) fn ancestors_of_variable(v: &CtfVariable, g: &CausalDiagram) -> Vec<CtfVariable> {
    let v = minimize(v, g);
    if v.is_self_intervened() {
        return vec![v];
    }
    let x = v.intervened();
    let under = g.mutilated(&VarSet::new(), &x);
    let over = g.mutilated(&x, &VarSet::new());
    under
        .ancestors_of_one(&v.base)
        .into_iter()
        .map(|w| {
            let reach = over.ancestors_of_one(&w);
            CtfVariable {
                interventions: v
                    .interventions
                    .iter()
                    .filter(|(k, _)| reach.contains(*k))
                    .map(|(k, val)| (k.clone(), val.clone()))
                    .collect(),
                base: w,
            }
        })
        .collect()
}

/// A conjunction of events in which every variable is intervened exactly
/// on its parents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CtfFactor {
    pub events: Vec<CtfEvent>,
}

impl CtfFactor {
    pub fn new(events: Vec<CtfEvent>) -> Self {
        CtfFactor { events }
    }

    /// `V(W_*)`: the base variables appearing in the factor.
    pub fn variables(&self) -> VarSet {
        self.events
            .iter()
            .map(|e| e.variable.base.clone())
            .collect()
    }

    /// Checks that every event intervenes exactly on the parents of its base.
    pub fn check_form(&self, g: &CausalDiagram) -> Result<()> {
        for e in &self.events {
            e.validate(g)?;
            if e.variable.intervened() != g.parents(&e.variable.base) {
                return Err(Error::InvalidArgument(format!(
                    "`{}` is not intervened exactly on its parents",
                    e.variable
                )));
            }
        }
        Ok(())
    }

    pub fn substituted(&self, subst: &BTreeMap<String, Value>) -> Self {
        CtfFactor {
            events: self.events.iter().map(|e| e.substituted(subst)).collect(),
        }
    }
}

impl fmt::Display for CtfFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_events(&self.events))
    }
}

/// Writes an ancestral event set in ctf-factor form: each `W_t = w`
/// becomes `W_{pa(w)} = w`, where parents intervened in `t` keep their
/// value from `t` and the remaining parents take the value assigned to
/// their own counterfactual in the set.
pub fn ancestral_factorize(events: &[CtfEvent], g: &CausalDiagram) -> Result<CtfFactor> {
    let mut values: BTreeMap<CtfVariable, Value> = BTreeMap::new();
    let mut minimized = Vec::with_capacity(events.len());
    for e in events {
        e.validate(g)?;
        let var = minimize(&e.variable, g);
        if let Some(prev) = values.get(&var) {
            if prev != &e.value {
                return Err(Error::InvalidArgument(format!(
                    "`{var}` is assigned both {prev} and {}",
                    e.value
                )));
            }
        }
        values.insert(var.clone(), e.value.clone());
        minimized.push(CtfEvent::new(var, e.value.clone()));
    }
    let present: BTreeSet<CtfVariable> = values.keys().cloned().collect();
    if let Some(missing) = ctf_ancestors(&present, g)
        .into_iter()
        .find(|a| !present.contains(a))
    {
        return Err(Error::NotAncestral(missing.to_string()));
    }
    let mut out = Vec::with_capacity(minimized.len());
    for e in minimized {
        out.push(CtfEvent::new(
            parent_intervened(&e.variable, g, |p| values.get(p).cloned())?,
            e.value,
        ));
    }
    Ok(CtfFactor::new(out))
}

/// `W_t` rewritten as `W_{pa}`; `lookup` supplies the value of a parent's
/// counterfactual when the parent is not intervened in `t`.
pub(crate) fn parent_intervened<F>(
    v: &CtfVariable,
    g: &CausalDiagram,
    lookup: F,
) -> Result<CtfVariable>
where
    F: Fn(&CtfVariable) -> Option<Value>,
{
    let mut out = CtfVariable::new(&v.base);
    for p in g.parents(&v.base) {
        let value = match v.interventions.get(&p) {
            Some(val) => val.clone(),
            None => {
                let parent = minimize(
                    &CtfVariable {
                        base: p.clone(),
                        interventions: v.interventions.clone(),
                    },
                    g,
                );
                lookup(&parent).ok_or_else(|| Error::NotAncestral(parent.to_string()))?
            }
        };
        out.interventions.insert(p, value);
    }
    Ok(out)
}

/// Splits a ctf-factor by the c-components of the subgraph induced by its
/// variables. Blocks appear in the order of their first event.
pub fn factor_decompose(f: &CtfFactor, g: &CausalDiagram) -> Vec<CtfFactor> {
    let comps = g.induced(&f.variables()).c_components();
    let mut blocks: Vec<(usize, Vec<CtfEvent>)> = Vec::new();
    let mut slot: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &f.events {
        let comp = comps
            .iter()
            .position(|c| c.contains(&e.variable.base))
            .expect("every base lies in a component");
        let i = *slot.entry(comp).or_insert_with(|| {
            blocks.push((comp, Vec::new()));
            blocks.len() - 1
        });
        blocks[i].1.push(e.clone());
    }
    blocks
        .into_iter()
        .map(|(_, ev)| CtfFactor::new(ev))
        .collect()
}

/// A product of ratios of marginals of a joint ctf-factor. Each marginal
/// keeps a subset of the joint's events; the remaining ones are summed out.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalRatio {
    pub terms: Vec<(Vec<CtfEvent>, Vec<CtfEvent>)>,
}

impl MarginalRatio {
    /// Evaluates the product given a way to compute marginal
    /// probabilities. The empty marginal has probability one.
    pub fn evaluate<F>(&self, mut marginal: F) -> Result<f64>
    where
        F: FnMut(&[CtfEvent]) -> Result<f64>,
    {
        let mut acc = 1.0;
        for (num, den) in &self.terms {
            let d = if den.is_empty() { 1.0 } else { marginal(den)? };
            if d == 0.0 {
                return Err(Error::DivisionByZero);
            }
            let n = if num.is_empty() { 1.0 } else { marginal(num)? };
            acc *= n / d;
        }
        Ok(acc)
    }
}

/// Recovers the factor of `block` from the joint factor `f`: for each
/// block variable `W_i`, the marginal over events up to `W_i` in `order`
/// divided by the marginal over events before `W_i`. Repeated base
/// variables are kept or dropped together.
pub fn factor_from_joint(f: &CtfFactor, block: &VarSet, order: &[String]) -> Result<MarginalRatio> {
    let pos = |v: &str| order.iter().position(|o| o == v);
    for e in &f.events {
        if pos(e.base()).is_none() {
            return Err(Error::InvalidArgument(format!(
                "`{}` is missing from the topological order",
                e.base()
            )));
        }
    }
    let mut terms = Vec::new();
    for (i, w) in order.iter().enumerate() {
        if !block.contains(w) {
            continue;
        }
        let upto = |limit: usize| -> Vec<CtfEvent> {
            f.events
                .iter()
                .filter(|e| pos(e.base()).expect("checked above") < limit)
                .cloned()
                .collect()
        };
        terms.push((upto(i + 1), upto(i)));
    }
    Ok(MarginalRatio { terms })
}

/// Why a single-component ctf-factor is inconsistent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Inconsistency {
    /// `subscripted` fixes `variable` to a value other than the one
    /// `event` assigns to it.
    EventVsSubscript {
        variable: String,
        event: CtfEvent,
        subscripted: CtfEvent,
    },
    /// Two events intervene on the shared parent `parent` with different
    /// values.
    SubscriptClash {
        parent: String,
        first: CtfEvent,
        second: CtfEvent,
    },
}

impl Inconsistency {
    pub fn substituted(&self, subst: &BTreeMap<String, Value>) -> Self {
        match self {
            Inconsistency::EventVsSubscript {
                variable,
                event,
                subscripted,
            } => Inconsistency::EventVsSubscript {
                variable: variable.clone(),
                event: event.substituted(subst),
                subscripted: subscripted.substituted(subst),
            },
            Inconsistency::SubscriptClash {
                parent,
                first,
                second,
            } => Inconsistency::SubscriptClash {
                parent: parent.clone(),
                first: first.substituted(subst),
                second: second.substituted(subst),
            },
        }
    }
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconsistency::EventVsSubscript {
                variable,
                event,
                subscripted,
            } => write!(
                f,
                "`{subscripted}` fixes {variable} to {} but `{event}` observes {}",
                subscripted.variable.interventions[variable], event.value
            ),
            Inconsistency::SubscriptClash {
                parent,
                first,
                second,
            } => write!(
                f,
                "`{first}` and `{second}` fix {parent} to {} and {}",
                first.variable.interventions[parent], second.variable.interventions[parent]
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Inconsistent(Inconsistency),
}

/// Decides whether a ctf-factor spanning a single c-component is
/// inconsistent.
pub fn check_consistency(f: &CtfFactor, g: &CausalDiagram) -> Result<Consistency> {
    let vars = f.variables();
    let comps = g.induced(&vars).c_components();
    if comps.len() > 1 {
        return Err(Error::MultipleComponents(f.to_string()));
    }
    for a in &f.events {
        for (z, zval) in &a.variable.interventions {
            if !vars.contains(z) {
                continue;
            }
            if let Some(b) = f
                .events
                .iter()
                .find(|b| &b.variable.base == z && &b.value != zval)
            {
                return Ok(Consistency::Inconsistent(Inconsistency::EventVsSubscript {
                    variable: z.clone(),
                    event: b.clone(),
                    subscripted: a.clone(),
                }));
            }
        }
    }
    for (i, a) in f.events.iter().enumerate() {
        for b in &f.events[i + 1..] {
            for (t, tval) in &a.variable.interventions {
                if let Some(other) = b.variable.interventions.get(t) {
                    if other != tval {
                        return Ok(Consistency::Inconsistent(Inconsistency::SubscriptClash {
                            parent: t.clone(),
                            first: a.clone(),
                            second: b.clone(),
                        }));
                    }
                }
            }
        }
    }
    Ok(Consistency::Consistent)
}

/// Result of [`simplify_events`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Simplified {
    /// The conjunction is impossible.
    Zero,
    /// Minimized, deduplicated events without tautologies. Empty means the
    /// conjunction holds surely.
    Events(Vec<CtfEvent>),
}

/// Minimizes every variable, detects contradictions, drops duplicates and
/// tautologies of the form `Y_y = y`.
pub fn simplify_events(events: &[CtfEvent], g: &CausalDiagram) -> Simplified {
    match normalize(events, &[], g) {
        None => Simplified::Zero,
        Some(n) => Simplified::Events(n.events),
    }
}

/// Output of [`normalize`].
#[derive(Debug, Clone)]
pub(crate) struct Normalized {
    pub events: Vec<CtfEvent>,
    /// Binders that survive; the others were resolved by substitution.
    pub binders: Vec<Binder>,
    /// Values given to the resolved binders.
    pub subst: BTreeMap<String, Value>,
}

/// [`simplify_events`] under a sum over `binders`. A bound symbol forced
/// equal to another value is substituted and its binder removed, since
/// `Σ_s f(s)·[s = v] = f(v)`. Returns `None` when the conjunction is
/// impossible.
pub(crate) fn normalize(
    events: &[CtfEvent],
    binders: &[Binder],
    g: &CausalDiagram,
) -> Option<Normalized> {
    let mut events: Vec<CtfEvent> = events.to_vec();
    let mut binders: Vec<Binder> = binders.to_vec();
    let mut resolved: BTreeMap<String, Value> = BTreeMap::new();
    loop {
        for e in events.iter_mut() {
            e.variable = minimize(&e.variable, g);
        }
        let bound = |binders: &[Binder], v: &Value| {
            v.as_sym()
                .is_some_and(|s| binders.iter().any(|b| b.symbol == s))
        };
        // forced equalities: Y_y = v and repeated variables
        let mut pairs: Vec<(Value, Value)> = Vec::new();
        for e in &events {
            if let Some(own) = e.variable.interventions.get(&e.variable.base) {
                if own != &e.value {
                    pairs.push((own.clone(), e.value.clone()));
                }
            }
        }
        for (i, a) in events.iter().enumerate() {
            for b in &events[i + 1..] {
                if a.variable == b.variable && a.value != b.value {
                    pairs.push((a.value.clone(), b.value.clone()));
                }
            }
        }
        if let Some((first, second)) = pairs.into_iter().next() {
            let (from, to) = if bound(&binders, &second) {
                (second, first)
            } else if bound(&binders, &first) {
                (first, second)
            } else {
                return None;
            };
            let sym = from.as_sym().expect("bound values are symbols").to_string();
            let subst = BTreeMap::from([(sym.clone(), to)]);
            binders.retain(|b| b.symbol != sym);
            events = events.iter().map(|e| e.substituted(&subst)).collect();
            for v in resolved.values_mut() {
                *v = v.substituted(&subst);
            }
            resolved.extend(subst);
            continue;
        }
        break;
    }
    let mut out: Vec<CtfEvent> = Vec::with_capacity(events.len());
    for e in events {
        let tautology = e.variable.interventions.get(&e.variable.base) == Some(&e.value);
        if !tautology && !out.contains(&e) {
            out.push(e);
        }
    }
    Some(Normalized {
        events: out,
        binders,
        subst: resolved,
    })
}
