//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use ctfid_core::{
    evaluate, AvailableSpec, CausalDiagram, CtfEvent, CtfTerm, CtfVariable, DiscreteSCM, Estimand,
    IdentificationResult, NestedEvent, Status, Value, VarSet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(s: &str) -> Value {
    Value::constant(s)
}

pub fn var(base: &str, ints: &[(&str, &str)]) -> CtfVariable {
    ints.iter()
        .fold(CtfVariable::new(base), |v, (k, x)| v.with(*k, c(x)))
}

pub fn ev(base: &str, ints: &[(&str, &str)], value: &str) -> CtfEvent {
    CtfEvent::new(var(base, ints), c(value))
}

pub fn term(base: &str, ints: &[(&str, &str)]) -> CtfTerm {
    ints.iter()
        .fold(CtfTerm::new(base), |t, (k, x)| t.set(*k, c(x)))
}

pub fn nested(events: &[CtfEvent]) -> Vec<NestedEvent> {
    events.iter().map(NestedEvent::from).collect()
}

pub fn spec(sets: &[&[&str]]) -> AvailableSpec {
    AvailableSpec::new(
        sets.iter()
            .map(|s| s.iter().map(|v| v.to_string()).collect::<VarSet>()),
    )
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Value of a closed estimand on the tables `scm` provides for `spec`.
pub fn estimand_value(e: &Estimand, scm: &DiscreteSCM, spec: &AvailableSpec) -> f64 {
    let tables = scm.tables(spec.sets()).expect("tables");
    evaluate(e, &tables, &BTreeMap::new()).expect("estimand evaluates")
}

/// Value the result claims for the query, or `None` on failure.
pub fn claimed_value(
    r: &IdentificationResult,
    scm: &DiscreteSCM,
    spec: &AvailableSpec,
) -> Option<f64> {
    match r.status {
        Status::Identified => Some(estimand_value(r.estimand.as_ref()?, scm, spec)),
        Status::Zero => Some(0.0),
        Status::One => Some(1.0),
        Status::Fail => None,
    }
}

/// Every assignment of labels to `names` under `g`'s domains.
pub fn label_grid(g: &CausalDiagram, names: &[&str]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for n in names {
        let dom = g.domain(n).expect("known variable");
        out = out
            .into_iter()
            .flat_map(|prefix| {
                dom.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Random binary diagram on at most `max_vars` variables named `A`, `B`, ...
/// in topological order, with at most `max_bidirected` bidirected edges.
pub fn random_diagram(
    rng: &mut ChaCha8Rng,
    max_vars: usize,
    max_bidirected: usize,
) -> CausalDiagram {
    let n = rng.gen_range(2..=max_vars);
    let names: Vec<String> = (0..n)
        .map(|i| ((b'A' + i as u8) as char).to_string())
        .collect();
    let mut directed = Vec::new();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.45) {
                directed.push((names[i].clone(), names[j].clone()));
            }
            pairs.push((names[i].clone(), names[j].clone()));
        }
    }
    pairs.shuffle(rng);
    let k = rng.gen_range(0..=max_bidirected.min(pairs.len()));
    pairs.truncate(k);
    CausalDiagram::new(
        names
            .iter()
            .map(|s| ctfid_core::Variable::binary(s.clone()))
            .collect(),
        directed,
        pairs,
    )
    .expect("random diagram is valid")
}

/// Random conjunction of one or two events, each with at most two
/// intervention entries.
pub fn random_query(rng: &mut ChaCha8Rng, g: &CausalDiagram) -> Vec<CtfEvent> {
    let names: Vec<String> = g.names().map(str::to_string).collect();
    let count = rng.gen_range(1..=2);
    (0..count)
        .map(|_| {
            let base = names.choose(rng).unwrap().clone();
            let others: Vec<&String> = names.iter().filter(|n| **n != base).collect();
            let k = rng.gen_range(0..=2.min(others.len()));
            let mut v = CtfVariable::new(&base);
            for x in others.choose_multiple(rng, k) {
                v = v.with(x.as_str(), c(if rng.gen_bool(0.5) { "1" } else { "0" }));
            }
            CtfEvent::new(v, c(if rng.gen_bool(0.5) { "1" } else { "0" }))
        })
        .collect()
}

/// Random available collection; contains the observational distribution
/// most of the time.
pub fn random_spec(rng: &mut ChaCha8Rng, g: &CausalDiagram) -> AvailableSpec {
    let names: Vec<String> = g.names().map(str::to_string).collect();
    let mut sets: Vec<VarSet> = Vec::new();
    if rng.gen_bool(0.75) {
        sets.push(VarSet::new());
    }
    for _ in 0..rng.gen_range(0..=2) {
        let k = rng.gen_range(1..=2.min(names.len()));
        sets.push(names.choose_multiple(rng, k).cloned().collect());
    }
    if sets.is_empty() {
        sets.push(VarSet::new());
    }
    AvailableSpec::new(sets)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
