//! Identification of marginal and conditional counterfactual queries.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ctf::{
    ancestors_of_variable, ancestral_factorize, ctf_ancestors, display_events, factor_decompose,
    minimize, normalize, unnest, CtfEvent, CtfFactor, CtfVariable, Inconsistency, NestedEvent,
};
use crate::error::{Error, Result};
use crate::expr::{simplify, Estimand};
use crate::graph::{CausalDiagram, VarSet};
use crate::identify::{identify_ctf_factor, show, AvailableSpec, FactorOutcome};
use crate::value::{is_internal, Binder, Namer, SymbolGen, Value};

/// `P(outcome | conditioning)`; the conditioning list may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub outcome: Vec<NestedEvent>,
    pub conditioning: Vec<NestedEvent>,
}

impl Query {
    pub fn new(outcome: Vec<NestedEvent>) -> Self {
        Query {
            outcome,
            conditioning: Vec::new(),
        }
    }

    pub fn given(mut self, conditioning: Vec<NestedEvent>) -> Self {
        self.conditioning = conditioning;
        self
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |es: &[NestedEvent]| {
            es.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "P({}", join(&self.outcome))?;
        if !self.conditioning.is_empty() {
            write!(f, " | {}", join(&self.conditioning))?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Identified,
    Fail,
    /// The query is a contradiction.
    Zero,
    /// The query holds surely.
    One,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Identified => "identified",
            Status::Fail => "fail",
            Status::Zero => "zero",
            Status::One => "one",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Identified from the distributions `P_z(V)` with `z` ranging over
    /// `available`.
    Identified {
        available: VarSet,
    },
    Inconsistent(Inconsistency),
    NotIdentifiable,
}

/// What happened to one c-component ctf-factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorDiagnostic {
    pub factor: CtfFactor,
    pub verdict: Verdict,
}

impl FactorDiagnostic {
    pub fn is_failure(&self) -> bool {
        !matches!(self.verdict, Verdict::Identified { .. })
    }

    fn substituted(&self, subst: &BTreeMap<String, Value>) -> Self {
        FactorDiagnostic {
            factor: self.factor.substituted(subst),
            verdict: match &self.verdict {
                Verdict::Inconsistent(w) => Verdict::Inconsistent(w.substituted(subst)),
                other => other.clone(),
            },
        }
    }
}

impl fmt::Display for FactorDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            Verdict::Identified { available } if available.is_empty() => {
                write!(f, "{} identified from P(V)", self.factor)
            }
            Verdict::Identified { available } => {
                write!(
                    f,
                    "{} identified from P_{}(V)",
                    self.factor,
                    show(available)
                )
            }
            Verdict::Inconsistent(w) => write!(f, "{} is inconsistent: {w}", self.factor),
            Verdict::NotIdentifiable => write!(
                f,
                "{} is not identifiable from the available distributions",
                self.factor
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub status: Status,
    /// Present exactly when the status is [`Status::Identified`].
    pub estimand: Option<Estimand>,
    pub diagnostics: Vec<FactorDiagnostic>,
}

impl IdentificationResult {
    pub fn failures(&self) -> impl Iterator<Item = &FactorDiagnostic> {
        self.diagnostics.iter().filter(|d| d.is_failure())
    }
}

enum Core {
    Zero,
    One,
    Fail,
    Identified(Estimand),
}

struct Ctx<'a> {
    g: &'a CausalDiagram,
    spec: &'a AvailableSpec,
    gen: SymbolGen,
    created: Vec<Binder>,
    diagnostics: Vec<FactorDiagnostic>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a CausalDiagram, spec: &'a AvailableSpec) -> Result<Self> {
        spec.validate(g)?;
        Ok(Ctx {
            g,
            spec,
            gen: SymbolGen::new(),
            created: Vec::new(),
            diagnostics: Vec::new(),
        })
    }

    fn fresh(&mut self, variable: &str) -> Binder {
        let b = self.gen.fresh(variable);
        self.created.push(b.clone());
        b
    }

    fn unnest(&mut self, events: &[NestedEvent]) -> Result<(Vec<CtfEvent>, Vec<Binder>)> {
        let u = unnest(events, self.g, &mut self.gen)?;
        self.created.extend(u.binders.iter().cloned());
        Ok((u.events, u.binders))
    }

    /// Identifies an unnested conjunction summed over `binders`.
    fn core(&mut self, events: &[CtfEvent], binders: &[Binder]) -> Result<Core> {
        let g = self.g;
        let Some(n) = normalize(events, binders, g) else {
            return Ok(Core::Zero);
        };
        if n.events.is_empty() {
            return Ok(Core::One);
        }
        let (mut events, mut binders) = sum_out_free_events(n.events, n.binders);
        if events.is_empty() {
            return Ok(Core::One);
        }
        let present: BTreeSet<CtfVariable> = events.iter().map(|e| e.variable.clone()).collect();
        for a in ctf_ancestors(&present, g) {
            if !present.contains(&a) {
                let b = self.fresh(&a.base);
                events.push(CtfEvent::new(a, Value::Sym(b.symbol.clone())));
                binders.push(b);
            }
        }
        let f = ancestral_factorize(&events, g)?;
        let Some(n) = normalize(&f.events, &binders, g) else {
            return Ok(Core::Zero);
        };
        let mut factors = Vec::new();
        let mut failed = false;
        for block in factor_decompose(&CtfFactor::new(n.events), g) {
            let verdict = match identify_ctf_factor(&block, self.spec, g)? {
                FactorOutcome::Identified {
                    estimand,
                    available,
                } => {
                    factors.push(estimand);
                    Verdict::Identified { available }
                }
                FactorOutcome::Inconsistent(w) => {
                    failed = true;
                    Verdict::Inconsistent(w)
                }
                FactorOutcome::NotIdentifiable => {
                    failed = true;
                    Verdict::NotIdentifiable
                }
            };
            self.diagnostics.push(FactorDiagnostic {
                factor: block,
                verdict,
            });
        }
        if failed {
            return Ok(Core::Fail);
        }
        Ok(Core::Identified(simplify(&Estimand::sum(
            n.binders,
            Estimand::product(factors),
        ))))
    }

    fn finish(self, core: Core) -> IdentificationResult {
        let (status, estimand) = match core {
            Core::Zero => (Status::Zero, None),
            Core::One => (Status::One, None),
            Core::Fail => (Status::Fail, None),
            Core::Identified(Estimand::Zero) => (Status::Zero, None),
            Core::Identified(Estimand::One) => (Status::One, None),
            Core::Identified(e) => (Status::Identified, Some(e)),
        };
        let mut used: BTreeSet<String> = BTreeSet::new();
        if let Some(e) = &estimand {
            used.extend(e.all_symbols());
        }
        for d in &self.diagnostics {
            for e in &d.factor.events {
                used.extend(e.symbols().map(str::to_string));
            }
        }
        let mut namer = Namer::new(self.g);
        for s in used.iter().filter(|s| !is_internal(s)) {
            namer.reserve(s.clone());
        }
        let mut names = BTreeMap::new();
        for b in &self.created {
            if used.contains(&b.symbol) && !names.contains_key(&b.symbol) {
                names.insert(b.symbol.clone(), namer.name_for(&b.variable));
            }
        }
        let subst: BTreeMap<String, Value> = names
            .iter()
            .map(|(k, v)| (k.clone(), Value::Sym(v.clone())))
            .collect();
        let estimand = estimand.map(|e| freshen(&e.renamed(&names), &mut namer));
        let diagnostics = self
            .diagnostics
            .iter()
            .map(|d| d.substituted(&subst))
            .collect();
        IdentificationResult {
            status,
            estimand,
            diagnostics,
        }
    }
}

/// Drops events whose value is a summation symbol used nowhere else, since
/// summing such an event over its domain leaves the rest unchanged.
fn sum_out_free_events(
    mut events: Vec<CtfEvent>,
    mut binders: Vec<Binder>,
) -> (Vec<CtfEvent>, Vec<Binder>) {
    loop {
        let mut uses: BTreeMap<&str, usize> = BTreeMap::new();
        for e in &events {
            for s in e.symbols() {
                *uses.entry(s).or_default() += 1;
            }
        }
        let free = events.iter().position(|e| match e.value.as_sym() {
            Some(s) => uses[s] == 1 && binders.iter().any(|b| b.symbol == s),
            None => false,
        });
        let Some(i) = free else {
            return (events, binders);
        };
        let e = events.remove(i);
        let s = e.value.as_sym().expect("checked above");
        binders.retain(|b| b.symbol != s);
    }
}

/// Gives every remaining internal summation symbol a readable name.
fn freshen(e: &Estimand, namer: &mut Namer) -> Estimand {
    match e {
        Estimand::Zero | Estimand::One | Estimand::Atom(_) => e.clone(),
        Estimand::Product(fs) => Estimand::Product(fs.iter().map(|f| freshen(f, namer)).collect()),
        Estimand::Fraction(n, d) => Estimand::fraction(freshen(n, namer), freshen(d, namer)),
        Estimand::Sum { over, body } => {
            let mut subst = BTreeMap::new();
            let over = over
                .iter()
                .map(|b| {
                    if is_internal(&b.symbol) {
                        let name = namer.name_for(&b.variable);
                        subst.insert(b.symbol.clone(), Value::Sym(name.clone()));
                        Binder::new(name, &b.variable)
                    } else {
                        b.clone()
                    }
                })
                .collect();
            Estimand::Sum {
                over,
                body: Box::new(freshen(&body.substituted(&subst), namer)),
            }
        }
    }
}

/// Decides whether `P(outcome)` is identifiable from the available
/// distributions and returns an estimand when it is.
pub fn ctf_id(
    outcome: &[NestedEvent],
    spec: &AvailableSpec,
    g: &CausalDiagram,
) -> Result<IdentificationResult> {
    if outcome.is_empty() {
        return Err(Error::InvalidArgument(
            "the query has no outcome events".into(),
        ));
    }
    let mut ctx = Ctx::new(g, spec)?;
    let (events, binders) = ctx.unnest(outcome)?;
    let core = ctx.core(&events, &binders)?;
    Ok(ctx.finish(core))
}

/// Identifies `P(outcome | conditioning)`, reducing it to a ratio of
/// marginal queries over the ancestral components that contain an
/// outcome variable.
pub fn cond_ctf_id(
    q: &Query,
    spec: &AvailableSpec,
    g: &CausalDiagram,
) -> Result<IdentificationResult> {
    if q.conditioning.is_empty() {
        return ctf_id(&q.outcome, spec, g);
    }
    if q.outcome.is_empty() {
        return Err(Error::InvalidArgument(
            "the query has no outcome events".into(),
        ));
    }
    let mut ctx = Ctx::new(g, spec)?;
    let (y_events, mut binders) = ctx.unnest(&q.outcome)?;
    let mut x_mains = Vec::new();
    let mut x_side = Vec::new();
    let mut aux = Vec::new();
    for e in &q.conditioning {
        let (events, bs) = ctx.unnest(std::slice::from_ref(e))?;
        x_mains.push(events[0].clone());
        x_side.extend(events.iter().cloned());
        aux.extend(events[1..].iter().cloned());
        binders.extend(bs);
    }
    let all: Vec<CtfEvent> = y_events
        .iter()
        .chain(&x_mains)
        .chain(&aux)
        .cloned()
        .collect();
    let Some(n) = normalize(&all, &binders, g) else {
        if normalize(&x_side, &binders, g).is_none() {
            return Err(Error::ConditioningOnNullEvent(display_events(&x_mains)));
        }
        return Ok(ctx.finish(Core::Zero));
    };
    let x_vars: BTreeSet<CtfVariable> = x_mains
        .iter()
        .map(|e| e.substituted(&n.subst))
        .filter(|e| e.variable.interventions.get(&e.variable.base) != Some(&e.value))
        .map(|e| minimize(&e.variable, g))
        .collect();
    let (xs, ys): (Vec<CtfEvent>, Vec<CtfEvent>) = n
        .events
        .iter()
        .cloned()
        .partition(|e| x_vars.contains(&e.variable));
    if ys.is_empty() {
        return Ok(ctx.finish(Core::One));
    }
    if xs.is_empty() {
        let core = ctx.core(&ys, &n.binders)?;
        return Ok(ctx.finish(core));
    }

    // full assignment over the counterfactual ancestors
    let mut assignment: Vec<CtfEvent> = n.events.clone();
    let mut bound: Vec<Binder> = n.binders.clone();
    let w: Vec<CtfVariable> = n.events.iter().map(|e| e.variable.clone()).collect();
    let present: BTreeSet<CtfVariable> = w.iter().cloned().collect();
    for a in ctf_ancestors(&present, g) {
        if !present.contains(&a) {
            let b = ctx.fresh(&a.base);
            assignment.push(CtfEvent::new(a, Value::Sym(b.symbol.clone())));
            bound.push(b);
        }
    }
    let x_set: BTreeSet<CtfVariable> = xs.iter().map(|e| e.variable.clone()).collect();
    let d = outcome_components(&w, &x_set, &assignment, &bound, &ys, g);

    let members: Vec<usize> = (0..assignment.len())
        .filter(|&i| d.contains(&assignment[i].variable))
        .collect();
    let pick = |events: &[CtfEvent], binders: &[Binder]| -> (Vec<CtfEvent>, Vec<Binder>) {
        let chosen: Vec<CtfEvent> = members.iter().map(|&i| events[i].clone()).collect();
        let symbols: BTreeSet<&str> = chosen.iter().flat_map(CtfEvent::symbols).collect();
        let used = binders
            .iter()
            .filter(|b| symbols.contains(b.symbol.as_str()))
            .cloned()
            .collect();
        (chosen, used)
    };

    let num_factor = ancestral_factorize(&assignment, g)?;
    let (num_events, num_binders) = pick(&num_factor.events, &bound);

    let is_bound = |v: &Value| {
        v.as_sym()
            .is_some_and(|s| bound.iter().any(|b| b.symbol == s))
    };
    let mut den_assignment = assignment.clone();
    let mut den_bound = bound.clone();
    for e in den_assignment.iter_mut() {
        if d.contains(&e.variable) && !x_set.contains(&e.variable) && !is_bound(&e.value) {
            let b = ctx.fresh(&e.variable.base);
            e.value = Value::Sym(b.symbol.clone());
            den_bound.push(b);
        }
    }
    let den_factor = ancestral_factorize(&den_assignment, g)?;
    let (den_events, den_binders) = pick(&den_factor.events, &den_bound);

    let num = ctx.core(&num_events, &num_binders)?;
    let seen = ctx.diagnostics.len();
    let den = ctx.core(&den_events, &den_binders)?;
    let core = match (num, den) {
        (Core::Fail, _) => {
            ctx.diagnostics.truncate(seen);
            Core::Fail
        }
        (_, Core::Fail) => {
            ctx.diagnostics.drain(..seen);
            Core::Fail
        }
        (_, Core::Zero) => return Err(Error::ConditioningOnNullEvent(display_events(&x_mains))),
        (Core::Zero, _) => Core::Zero,
        (num, den) => {
            let value = |c: Core| match c {
                Core::One => Estimand::One,
                Core::Identified(e) => e,
                _ => unreachable!("handled above"),
            };
            ctx.diagnostics.truncate(seen);
            Core::Identified(simplify(&Estimand::fraction(value(num), value(den))))
        }
    };
    Ok(ctx.finish(core))
}

/// The union of the ancestral components that contain an outcome
/// variable. Each variable's ancestral set is taken in the diagram with
/// edges out of its conditioned ancestors removed; sets are merged when
/// they share a primitive variable, are joined by a bidirected edge, or
/// share a summation symbol.
fn outcome_components(
    w: &[CtfVariable],
    x_set: &BTreeSet<CtfVariable>,
    assignment: &[CtfEvent],
    bound: &[Binder],
    ys: &[CtfEvent],
    g: &CausalDiagram,
) -> BTreeSet<CtfVariable> {
    let value_of: BTreeMap<&CtfVariable, &Value> =
        assignment.iter().map(|e| (&e.variable, &e.value)).collect();
    let mut blocks: Vec<BTreeSet<CtfVariable>> = Vec::new();
    for wt in w {
        let an: BTreeSet<CtfVariable> = ancestors_of_variable(wt, g).into_iter().collect();
        let cut: VarSet = x_set
            .iter()
            .filter(|x| an.contains(*x))
            .map(|x| x.base.clone())
            .collect();
        let gt = g.mutilated(&VarSet::new(), &cut);
        let bases: VarSet = ancestors_of_variable(wt, &gt)
            .into_iter()
            .map(|v| v.base)
            .collect();
        blocks.push(an.into_iter().filter(|v| bases.contains(&v.base)).collect());
    }
    let symbols = |block: &BTreeSet<CtfVariable>| -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for v in block {
            let vals = v.interventions.values().chain(value_of.get(v).copied());
            for val in vals {
                if let Some(s) = val.as_sym() {
                    if bound.iter().any(|b| b.symbol == s) {
                        out.insert(s.to_string());
                    }
                }
            }
        }
        out
    };
    let linked = |a: &BTreeSet<CtfVariable>, b: &BTreeSet<CtfVariable>| {
        let ba: VarSet = a.iter().map(|v| v.base.clone()).collect();
        let bb: VarSet = b.iter().map(|v| v.base.clone()).collect();
        !ba.is_disjoint(&bb)
            || ba.iter().any(|x| bb.iter().any(|y| g.has_bidirected(x, y)))
            || !symbols(a).is_disjoint(&symbols(b))
    };
    // merge to a fixed point
    loop {
        let mut merged = false;
        'search: for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if linked(&blocks[i], &blocks[j]) {
                    let b = blocks.remove(j);
                    blocks[i].extend(b);
                    merged = true;
                    break 'search;
                }
            }
        }
        if !merged {
            break;
        }
    }
    let outcome: BTreeSet<&CtfVariable> = ys.iter().map(|e| &e.variable).collect();
    blocks
        .into_iter()
        .filter(|b| b.iter().any(|v| outcome.contains(v)))
        .flatten()
        .collect()
}
