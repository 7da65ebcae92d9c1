//! Symbolic estimands over available distributions: construction,
//! simplification, evaluation against tables, and rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Variable;
use crate::value::{Binder, Value};

/// `P_{intervened}(event | conditioning)`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "do", default)]
    pub intervened: BTreeMap<String, Value>,
    pub event: BTreeMap<String, Value>,
    #[serde(rename = "given", default)]
    pub conditioning: BTreeMap<String, Value>,
}

impl Atom {
    pub fn new(
        intervened: BTreeMap<String, Value>,
        event: BTreeMap<String, Value>,
        conditioning: BTreeMap<String, Value>,
    ) -> Self {
        Atom {
            intervened,
            event,
            conditioning,
        }
    }

    /// An unconditional atom built from `(variable, value)` pairs.
    pub fn of<'a, I, J>(intervened: I, event: J) -> Self
    where
        I: IntoIterator<Item = (&'a str, Value)>,
        J: IntoIterator<Item = (&'a str, Value)>,
    {
        Atom {
            intervened: intervened
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            event: event.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            conditioning: BTreeMap::new(),
        }
    }

    pub fn given<'a, I>(mut self, conditioning: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, Value)>,
    {
        self.conditioning
            .extend(conditioning.into_iter().map(|(k, v)| (k.to_string(), v)));
        self
    }

    fn values(&self) -> impl Iterator<Item = &Value> {
        self.intervened
            .values()
            .chain(self.event.values())
            .chain(self.conditioning.values())
    }

    fn map_values<F: Fn(&Value) -> Value>(&self, f: F) -> Atom {
        let m =
            |map: &BTreeMap<String, Value>| map.iter().map(|(k, v)| (k.clone(), f(v))).collect();
        Atom {
            intervened: m(&self.intervened),
            event: m(&self.event),
            conditioning: m(&self.conditioning),
        }
    }
}

/// An expression tree over distribution atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimand {
    Zero,
    One,
    Atom(Atom),
    Product(Vec<Estimand>),
    Fraction(Box<Estimand>, Box<Estimand>),
    Sum {
        over: Vec<Binder>,
        body: Box<Estimand>,
    },
}

impl From<Atom> for Estimand {
    fn from(a: Atom) -> Self {
        Estimand::Atom(a)
    }
}

impl Estimand {
    pub fn product(factors: Vec<Estimand>) -> Self {
        Estimand::Product(factors)
    }

    pub fn fraction(num: Estimand, den: Estimand) -> Self {
        Estimand::Fraction(Box::new(num), Box::new(den))
    }

    pub fn sum(over: Vec<Binder>, body: Estimand) -> Self {
        if over.is_empty() {
            body
        } else {
            Estimand::Sum {
                over,
                body: Box::new(body),
            }
        }
    }

    /// Symbols not bound by a sum inside the expression.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Estimand::Zero | Estimand::One => {}
            Estimand::Atom(a) => {
                for v in a.values() {
                    if let Some(s) = v.as_sym() {
                        if !bound.iter().any(|b| b == s) {
                            out.insert(s.to_string());
                        }
                    }
                }
            }
            Estimand::Product(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Estimand::Fraction(n, d) => {
                n.collect_free(bound, out);
                d.collect_free(bound, out);
            }
            Estimand::Sum { over, body } => {
                let n = bound.len();
                bound.extend(over.iter().map(|b| b.symbol.clone()));
                body.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// Every symbol mentioned anywhere, bound or free.
    pub fn all_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.extend(a.values().filter_map(Value::as_sym).map(str::to_string));
        });
        self.visit_binders(&mut |b| {
            out.insert(b.symbol.clone());
        });
        out
    }

    fn visit_atoms<F: FnMut(&Atom)>(&self, f: &mut F) {
        match self {
            Estimand::Zero | Estimand::One => {}
            Estimand::Atom(a) => f(a),
            Estimand::Product(fs) => fs.iter().for_each(|e| e.visit_atoms(f)),
            Estimand::Fraction(n, d) => {
                n.visit_atoms(f);
                d.visit_atoms(f);
            }
            Estimand::Sum { body, .. } => body.visit_atoms(f),
        }
    }

    fn visit_binders<F: FnMut(&Binder)>(&self, f: &mut F) {
        match self {
            Estimand::Zero | Estimand::One | Estimand::Atom(_) => {}
            Estimand::Product(fs) => fs.iter().for_each(|e| e.visit_binders(f)),
            Estimand::Fraction(n, d) => {
                n.visit_binders(f);
                d.visit_binders(f);
            }
            Estimand::Sum { over, body } => {
                over.iter().for_each(&mut *f);
                body.visit_binders(f);
            }
        }
    }

    /// Every atom in the expression, in left-to-right order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Estimand, out: &mut Vec<&'a Atom>) {
            match e {
                Estimand::Zero | Estimand::One => {}
                Estimand::Atom(a) => out.push(a),
                Estimand::Product(fs) => fs.iter().for_each(|f| go(f, out)),
                Estimand::Fraction(n, d) => {
                    go(n, out);
                    go(d, out);
                }
                Estimand::Sum { body, .. } => go(body, out),
            }
        }
        go(self, &mut out);
        out
    }

    /// Renames symbols everywhere, binders included. The caller keeps the
    /// map injective and free of clashes.
    pub fn renamed(&self, names: &BTreeMap<String, String>) -> Estimand {
        let subst: BTreeMap<String, Value> = names
            .iter()
            .map(|(k, v)| (k.clone(), Value::Sym(v.clone())))
            .collect();
        self.map(
            &|a| Estimand::Atom(a.map_values(|v| v.substituted(&subst))),
            &|b| Binder {
                symbol: names
                    .get(&b.symbol)
                    .cloned()
                    .unwrap_or_else(|| b.symbol.clone()),
                variable: b.variable.clone(),
            },
        )
    }

    /// Replaces free occurrences of symbols by values.
    pub fn substituted(&self, subst: &BTreeMap<String, Value>) -> Estimand {
        match self {
            Estimand::Zero | Estimand::One => self.clone(),
            Estimand::Atom(a) => Estimand::Atom(a.map_values(|v| v.substituted(subst))),
            Estimand::Product(fs) => {
                Estimand::Product(fs.iter().map(|f| f.substituted(subst)).collect())
            }
            Estimand::Fraction(n, d) => {
                Estimand::fraction(n.substituted(subst), d.substituted(subst))
            }
            Estimand::Sum { over, body } => {
                let mut inner = subst.clone();
                for b in over {
                    inner.remove(&b.symbol);
                }
                Estimand::Sum {
                    over: over.clone(),
                    body: Box::new(body.substituted(&inner)),
                }
            }
        }
    }

    fn map<A, B>(&self, atom: &A, binder: &B) -> Estimand
    where
        A: Fn(&Atom) -> Estimand,
        B: Fn(&Binder) -> Binder,
    {
        match self {
            Estimand::Zero | Estimand::One => self.clone(),
            Estimand::Atom(a) => atom(a),
            Estimand::Product(fs) => {
                Estimand::Product(fs.iter().map(|f| f.map(atom, binder)).collect())
            }
            Estimand::Fraction(n, d) => {
                Estimand::fraction(n.map(atom, binder), d.map(atom, binder))
            }
            Estimand::Sum { over, body } => Estimand::Sum {
                over: over.iter().map(binder).collect(),
                body: Box::new(body.map(atom, binder)),
            },
        }
    }

    fn mentions(&self, symbols: &BTreeSet<&str>) -> bool {
        self.free_symbols()
            .iter()
            .any(|s| symbols.contains(s.as_str()))
    }

    fn factors(self) -> Vec<Estimand> {
        match self {
            Estimand::One => Vec::new(),
            Estimand::Product(fs) => fs,
            other => vec![other],
        }
    }

    fn from_factors(mut fs: Vec<Estimand>) -> Estimand {
        match fs.len() {
            0 => Estimand::One,
            1 => fs.pop().expect("one factor"),
            _ => Estimand::Product(fs),
        }
    }
}

/// Applies syntactic rewrites until nothing changes: flattening products,
/// dropping unit factors, cancelling equal factors across a fraction,
/// turning ratios of atoms into conditionals, pulling constant factors out
/// of sums and marginalizing bound symbols that occur in a single event.
pub fn simplify(e: &Estimand) -> Estimand {
    let mut cur = e.clone();
    loop {
        let next = step(&cur);
        if next == cur {
            return next;
        }
        cur = next;
    }
}

fn step(e: &Estimand) -> Estimand {
    match e {
        Estimand::Zero | Estimand::One => e.clone(),
        Estimand::Atom(a) => {
            if a.event.is_empty() {
                Estimand::One
            } else {
                e.clone()
            }
        }
        Estimand::Product(fs) => {
            let mut out = Vec::new();
            for f in fs {
                match step(f) {
                    Estimand::Zero => return Estimand::Zero,
                    s => out.extend(s.factors()),
                }
            }
            Estimand::from_factors(out)
        }
        Estimand::Fraction(n, d) => {
            let n = step(n);
            let d = step(d);
            if n == Estimand::Zero {
                return Estimand::Zero;
            }
            let mut num = n.factors();
            let mut den = Vec::new();
            for f in d.factors() {
                match num.iter().position(|g| *g == f) {
                    Some(i) => {
                        num.remove(i);
                    }
                    None => den.push(f),
                }
            }
            if den.is_empty() {
                return Estimand::from_factors(num);
            }
            if let ([Estimand::Atom(a)], [Estimand::Atom(b)]) = (num.as_slice(), den.as_slice()) {
                if let Some(c) = conditional(a, b) {
                    return Estimand::Atom(c);
                }
            }
            Estimand::fraction(Estimand::from_factors(num), Estimand::from_factors(den))
        }
        Estimand::Sum { over, body } => {
            let body = step(body);
            simplify_sum(over.clone(), body)
        }
    }
}

/// `num / den` as a conditional atom when `den` is a marginal of `num`.
fn conditional(num: &Atom, den: &Atom) -> Option<Atom> {
    if num.intervened != den.intervened || num.conditioning != den.conditioning {
        return None;
    }
    if !den.event.iter().all(|(k, v)| num.event.get(k) == Some(v)) {
        return None;
    }
    let mut out = num.clone();
    for (k, v) in &den.event {
        out.event.remove(k);
        out.conditioning.insert(k.clone(), v.clone());
    }
    Some(out)
}

fn simplify_sum(mut over: Vec<Binder>, body: Estimand) -> Estimand {
    if over.is_empty() {
        return body;
    }
    match body {
        Estimand::Zero => return Estimand::Zero,
        Estimand::Sum {
            over: inner,
            body: inner_body,
        } if inner
            .iter()
            .all(|b| !over.iter().any(|o| o.symbol == b.symbol)) =>
        {
            over.extend(inner);
            return Estimand::Sum {
                over,
                body: inner_body,
            };
        }
        _ => {}
    }
    let mut factors = body.factors();
    // marginalize symbols that appear once, as an event value of a direct atom factor
    let mut kept = Vec::new();
    for b in over {
        let uses: usize = factors.iter().map(|f| occurrences(f, &b.symbol)).sum();
        let slot = factors.iter().position(|f| match f {
            Estimand::Atom(a) => a.event.values().any(|v| v.as_sym() == Some(&b.symbol)),
            _ => false,
        });
        match slot {
            Some(i) if uses == 1 => {
                if let Estimand::Atom(a) = &mut factors[i] {
                    a.event.retain(|_, v| v.as_sym() != Some(&b.symbol));
                }
            }
            _ => kept.push(b),
        }
    }
    if kept.is_empty() {
        return Estimand::from_factors(factors);
    }
    let symbols: BTreeSet<&str> = kept.iter().map(|b| b.symbol.as_str()).collect();
    let (inside, outside): (Vec<Estimand>, Vec<Estimand>) =
        factors.into_iter().partition(|f| f.mentions(&symbols));
    let sum = Estimand::Sum {
        over: kept,
        body: Box::new(Estimand::from_factors(inside)),
    };
    if outside.is_empty() {
        sum
    } else {
        let mut all = outside;
        all.push(sum);
        Estimand::Product(all)
    }
}

fn occurrences(e: &Estimand, symbol: &str) -> usize {
    let mut n = 0;
    e.visit_atoms(&mut |a| {
        n += a.values().filter(|v| v.as_sym() == Some(symbol)).count();
    });
    n
}

/// Joint distribution tables `P_z(V)`, one per intervention assignment.
/// Each table is a row-major array over the declared variables, the first
/// variable varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSet {
    variables: Vec<Variable>,
    tables: Vec<(BTreeMap<String, String>, Vec<f64>)>,
}

impl TableSet {
    pub fn new(variables: Vec<Variable>) -> Self {
        TableSet {
            variables,
            tables: Vec::new(),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn size(&self) -> usize {
        self.variables.iter().map(|v| v.domain.len()).product()
    }

    pub fn insert(
        &mut self,
        intervention: BTreeMap<String, String>,
        joint: Vec<f64>,
    ) -> Result<()> {
        if joint.len() != self.size() {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, expected {}",
                joint.len(),
                self.size()
            )));
        }
        for (k, v) in &intervention {
            let var = self.variable(k)?;
            if !var.contains(v) {
                return Err(Error::ValueOutOfDomain {
                    variable: k.clone(),
                    value: v.clone(),
                });
            }
        }
        match self.tables.iter_mut().find(|(z, _)| *z == intervention) {
            Some(slot) => slot.1 = joint,
            None => self.tables.push((intervention, joint)),
        }
        Ok(())
    }

    pub fn get(&self, intervention: &BTreeMap<String, String>) -> Option<&[f64]> {
        self.tables
            .iter()
            .find(|(z, _)| z == intervention)
            .map(|(_, t)| t.as_slice())
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    fn variable(&self, name: &str) -> Result<&Variable> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn domain(&self, name: &str) -> Result<&[String]> {
        Ok(&self.variable(name)?.domain)
    }

    /// Probability that the variables take the given labels under the
    /// given intervention.
    pub fn marginal(
        &self,
        intervention: &BTreeMap<String, String>,
        assignment: &BTreeMap<String, String>,
    ) -> Result<f64> {
        let table = self
            .get(intervention)
            .ok_or_else(|| Error::MissingTable(format_assignment(intervention)))?;
        let mut fixed: Vec<(usize, usize)> = Vec::with_capacity(assignment.len());
        for (k, v) in assignment {
            let pos = self
                .variables
                .iter()
                .position(|var| &var.name == k)
                .ok_or_else(|| Error::UnknownVariable(k.clone()))?;
            let idx = self.variables[pos]
                .index_of(v)
                .ok_or_else(|| Error::ValueOutOfDomain {
                    variable: k.clone(),
                    value: v.clone(),
                })?;
            fixed.push((pos, idx));
        }
        let mut strides = vec![1usize; self.variables.len()];
        for i in (0..self.variables.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.variables[i + 1].domain.len();
        }
        let mut total = 0.0;
        for (flat, p) in table.iter().enumerate() {
            if fixed
                .iter()
                .all(|&(pos, idx)| (flat / strides[pos]) % self.variables[pos].domain.len() == idx)
            {
                total += p;
            }
        }
        Ok(total)
    }
}

fn format_assignment(a: &BTreeMap<String, String>) -> String {
    if a.is_empty() {
        return "{}".to_string();
    }
    let parts: Vec<String> = a.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(","))
}

/// Numeric value of `e`. `binding` gives labels to free symbols; sums range
/// over the domains declared in `tables`.
pub fn evaluate(
    e: &Estimand,
    tables: &TableSet,
    binding: &BTreeMap<String, String>,
) -> Result<f64> {
    match e {
        Estimand::Zero => Ok(0.0),
        Estimand::One => Ok(1.0),
        Estimand::Atom(a) => {
            let resolve = |map: &BTreeMap<String, Value>| -> Result<BTreeMap<String, String>> {
                map.iter()
                    .map(|(k, v)| {
                        let label = match v {
                            Value::Const(c) => c.clone(),
                            Value::Sym(s) => binding
                                .get(s)
                                .cloned()
                                .ok_or_else(|| Error::UnboundSymbol(s.clone()))?,
                        };
                        Ok((k.clone(), label))
                    })
                    .collect()
            };
            let z = resolve(&a.intervened)?;
            let cond = resolve(&a.conditioning)?;
            let mut joint = resolve(&a.event)?;
            let den = if cond.is_empty() {
                1.0
            } else {
                tables.marginal(&z, &cond)?
            };
            if den == 0.0 {
                return Err(Error::DivisionByZero);
            }
            for (k, v) in &cond {
                if let Some(prev) = joint.insert(k.clone(), v.clone()) {
                    if &prev != v {
                        return Ok(0.0);
                    }
                }
            }
            Ok(tables.marginal(&z, &joint)? / den)
        }
        Estimand::Product(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= evaluate(f, tables, binding)?;
            }
            Ok(acc)
        }
        Estimand::Fraction(n, d) => {
            let den = evaluate(d, tables, binding)?;
            if den == 0.0 {
                return Err(Error::DivisionByZero);
            }
            Ok(evaluate(n, tables, binding)? / den)
        }
        Estimand::Sum { over, body } => {
            let domains: Vec<&[String]> = over
                .iter()
                .map(|b| tables.domain(&b.variable))
                .collect::<Result<_>>()?;
            let mut local = binding.clone();
            let mut idx = vec![0usize; over.len()];
            let mut total = 0.0;
            loop {
                for (i, b) in over.iter().enumerate() {
                    local.insert(b.symbol.clone(), domains[i][idx[i]].clone());
                }
                total += evaluate(body, tables, &local)?;
                // odometer over binder domains
                let mut i = over.len();
                loop {
                    if i == 0 {
                        return Ok(total);
                    }
                    i -= 1;
                    idx[i] += 1;
                    if idx[i] < domains[i].len() {
                        break;
                    }
                    idx[i] = 0;
                }
            }
        }
    }
}

/// Output formats for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "latex" => Ok(Format::Latex),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

pub fn render(e: &Estimand, format: Format) -> String {
    match format {
        Format::Text => {
            let mut s = String::new();
            text(e, &mut s, false);
            s
        }
        Format::Latex => {
            let mut s = String::new();
            latex(e, &mut s, false);
            s
        }
        Format::Json => to_json(e),
    }
}

fn pairs(map: &BTreeMap<String, Value>, sep: &str) -> String {
    map.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(sep)
}

fn text(e: &Estimand, out: &mut String, in_product: bool) {
    match e {
        Estimand::Zero => out.push('0'),
        Estimand::One => out.push('1'),
        Estimand::Atom(a) => {
            out.push('P');
            if !a.intervened.is_empty() {
                let _ = write!(out, "_{{{}}}", pairs(&a.intervened, ","));
            }
            let _ = write!(out, "({}", pairs(&a.event, ","));
            if !a.conditioning.is_empty() {
                let _ = write!(out, "|{}", pairs(&a.conditioning, ","));
            }
            out.push(')');
        }
        Estimand::Product(fs) => {
            for (i, f) in fs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                text(f, out, true);
            }
        }
        Estimand::Fraction(n, d) => {
            out.push('[');
            text(n, out, false);
            out.push_str("] / [");
            text(d, out, false);
            out.push(']');
        }
        Estimand::Sum { over, body } => {
            if in_product {
                out.push('(');
            }
            let names: Vec<&str> = over.iter().map(|b| b.symbol.as_str()).collect();
            let _ = write!(out, "Σ_{{{}}} ", names.join(","));
            text(body, out, false);
            if in_product {
                out.push(')');
            }
        }
    }
}

fn latex(e: &Estimand, out: &mut String, in_product: bool) {
    match e {
        Estimand::Zero => out.push('0'),
        Estimand::One => out.push('1'),
        Estimand::Atom(a) => {
            out.push('P');
            if !a.intervened.is_empty() {
                let _ = write!(out, "_{{{}}}", pairs(&a.intervened, ","));
            }
            let _ = write!(out, "({}", pairs(&a.event, ", "));
            if !a.conditioning.is_empty() {
                let _ = write!(out, " \\mid {}", pairs(&a.conditioning, ", "));
            }
            out.push(')');
        }
        Estimand::Product(fs) => {
            for (i, f) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\, ");
                }
                latex(f, out, true);
            }
        }
        Estimand::Fraction(n, d) => {
            out.push_str("\\frac{");
            latex(n, out, false);
            out.push_str("}{");
            latex(d, out, false);
            out.push('}');
        }
        Estimand::Sum { over, body } => {
            if in_product {
                out.push_str("\\left(");
            }
            let names: Vec<&str> = over.iter().map(|b| b.symbol.as_str()).collect();
            let _ = write!(out, "\\sum_{{{}}} ", names.join(","));
            latex(body, out, false);
            if in_product {
                out.push_str("\\right)");
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Repr {
    Const { value: u8 },
    Atom(Atom),
    Prod { factors: Vec<Repr> },
    Frac { num: Box<Repr>, den: Box<Repr> },
    Sum { over: Vec<Binder>, body: Box<Repr> },
}

impl From<&Estimand> for Repr {
    fn from(e: &Estimand) -> Self {
        match e {
            Estimand::Zero => Repr::Const { value: 0 },
            Estimand::One => Repr::Const { value: 1 },
            Estimand::Atom(a) => Repr::Atom(a.clone()),
            Estimand::Product(fs) => Repr::Prod {
                factors: fs.iter().map(Repr::from).collect(),
            },
            Estimand::Fraction(n, d) => Repr::Frac {
                num: Box::new(Repr::from(&**n)),
                den: Box::new(Repr::from(&**d)),
            },
            Estimand::Sum { over, body } => Repr::Sum {
                over: over.clone(),
                body: Box::new(Repr::from(&**body)),
            },
        }
    }
}

impl TryFrom<Repr> for Estimand {
    type Error = Error;

    fn try_from(r: Repr) -> Result<Self> {
        Ok(match r {
            Repr::Const { value: 0 } => Estimand::Zero,
            Repr::Const { value: 1 } => Estimand::One,
            Repr::Const { value } => {
                return Err(Error::Json(format!("constant must be 0 or 1, got {value}")))
            }
            Repr::Atom(a) => Estimand::Atom(a),
            Repr::Prod { factors } => Estimand::Product(
                factors
                    .into_iter()
                    .map(Estimand::try_from)
                    .collect::<Result<_>>()?,
            ),
            Repr::Frac { num, den } => Estimand::fraction((*num).try_into()?, (*den).try_into()?),
            Repr::Sum { over, body } => Estimand::Sum {
                over,
                body: Box::new((*body).try_into()?),
            },
        })
    }
}

pub fn to_json(e: &Estimand) -> String {
    serde_json::to_string(&Repr::from(e)).expect("estimand serializes")
}

pub fn from_json(text: &str) -> Result<Estimand> {
    let r: Repr = serde_json::from_str(text)?;
    r.try_into()
}

impl Serialize for Estimand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Estimand {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Repr::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(s: &str) -> Value {
        Value::constant(s)
    }

    fn s(n: &str) -> Value {
        Value::sym(n)
    }

    fn bin(names: &[&str]) -> Vec<Variable> {
        names.iter().map(|n| Variable::binary(*n)).collect()
    }

    fn eq13() -> Estimand {
        let x1 = Value::constant("x1");
        Estimand::product(vec![
            Atom::of([], [("Y", s("y")), ("Z", s("z"))])
                .given([("W", s("w")), ("X", x1)])
                .into(),
            Atom::of([], [("W", s("w"))]).given([("X", c("x0"))]).into(),
            Atom::of([], [("X", s("x"))]).given([("Z", s("z"))]).into(),
        ])
    }

    #[test]
    fn renders_text() {
        assert_eq!(
            render(&eq13(), Format::Text),
            "P(Y=y,Z=z|W=w,X=x1) P(W=w|X=x0) P(X=x|Z=z)"
        );
        assert_eq!(render(&Estimand::Zero, Format::Text), "0");
        let e = Estimand::sum(
            vec![Binder::new("z", "Z")],
            Estimand::product(vec![
                Atom::of([], [("Y", s("y"))])
                    .given([("X", c("1")), ("Z", s("z"))])
                    .into(),
                Atom::of([("X", c("0"))], [("Z", s("z"))]).into(),
            ]),
        );
        assert_eq!(
            render(&e, Format::Text),
            "Σ_{z} P(Y=y|X=1,Z=z) P_{X=0}(Z=z)"
        );
        assert_eq!(
            render(&e, Format::Latex),
            "\\sum_{z} P(Y=y \\mid X=1, Z=z) \\, P_{X=0}(Z=z)"
        );
    }

    #[test]
    fn json_round_trip() {
        let e = Estimand::fraction(
            Estimand::sum(vec![Binder::new("w", "W")], eq13()),
            Estimand::product(vec![Estimand::One, Estimand::Zero]),
        );
        let j = render(&e, Format::Json);
        assert!(j.contains("\"kind\":\"frac\""));
        assert_eq!(from_json(&j).unwrap(), e);
        assert!(from_json(r#"{"kind":"const","value":2}"#).is_err());
    }

    #[test]
    fn simplify_unit_and_cancellation() {
        let a: Estimand = Atom::of([], [("X", c("0"))]).into();
        assert_eq!(
            simplify(&Estimand::product(vec![a.clone(), Estimand::One])),
            a
        );
        assert_eq!(
            simplify(&Estimand::product(vec![a.clone(), Estimand::Zero])),
            Estimand::Zero
        );
        let summed = Estimand::sum(
            vec![Binder::new("z", "Z")],
            Atom::of([], [("Z", s("z"))]).into(),
        );
        assert_eq!(simplify(&summed), Estimand::One);
        let ratio = Estimand::fraction(
            Atom::of([], [("Y", s("y")), ("Z", s("z")), ("X", s("x"))]).into(),
            Atom::of([], [("Z", s("z")), ("X", s("x"))]).into(),
        );
        assert_eq!(
            simplify(&ratio),
            Atom::of([], [("Y", s("y"))])
                .given([("X", s("x")), ("Z", s("z"))])
                .into()
        );
        let cancel =
            Estimand::fraction(Estimand::product(vec![a.clone(), ratio.clone()]), a.clone());
        assert_eq!(simplify(&cancel), simplify(&ratio));
    }

    #[test]
    fn simplify_pulls_constant_factors_out_of_sums() {
        let outside: Estimand = Atom::of([], [("X", c("0"))]).into();
        let e = Estimand::sum(
            vec![Binder::new("z", "Z")],
            Estimand::product(vec![
                outside.clone(),
                Atom::of([], [("Y", c("1"))]).given([("Z", s("z"))]).into(),
                Atom::of([], [("Z", s("z"))]).into(),
            ]),
        );
        match simplify(&e) {
            Estimand::Product(fs) => {
                assert_eq!(fs[0], outside);
                assert!(matches!(fs[1], Estimand::Sum { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn table_xy() -> TableSet {
        let mut t = TableSet::new(bin(&["X", "Y"]));
        // P(X=0,Y=0)=.1, (0,1)=.2, (1,0)=.3, (1,1)=.4
        t.insert(BTreeMap::new(), vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        t
    }

    #[test]
    fn evaluate_basics() {
        let t = table_xy();
        let none = BTreeMap::new();
        assert_eq!(evaluate(&Estimand::One, &t, &none).unwrap(), 1.0);
        let px: Estimand = Atom::of([], [("X", s("x"))]).into();
        let bind = BTreeMap::from([("x".to_string(), "0".to_string())]);
        assert!((evaluate(&px, &t, &bind).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(
            evaluate(&px, &t, &none),
            Err(Error::UnboundSymbol("x".into()))
        );
        let cond: Estimand = Atom::of([], [("Y", c("1"))]).given([("X", c("1"))]).into();
        assert!((evaluate(&cond, &t, &none).unwrap() - 4.0 / 7.0).abs() < 1e-15);
        let exp: Estimand = Atom::of([("X", c("1"))], [("Y", c("1"))]).into();
        assert!(matches!(
            evaluate(&exp, &t, &none),
            Err(Error::MissingTable(_))
        ));
        let mut zero = TableSet::new(bin(&["X"]));
        zero.insert(BTreeMap::new(), vec![1.0, 0.0]).unwrap();
        let div: Estimand = Atom::of([], [("X", c("0"))]).given([("X", c("1"))]).into();
        assert_eq!(evaluate(&div, &zero, &none), Err(Error::DivisionByZero));
        let sum = Estimand::sum(
            vec![Binder::new("y", "Y")],
            Atom::of([], [("Y", s("y")), ("X", c("0"))]).into(),
        );
        assert!((evaluate(&sum, &t, &none).unwrap() - 0.3).abs() < 1e-15);
    }

    fn arb_estimand() -> impl Strategy<Value = Estimand> {
        let vals = prop_oneof![Just(c("0")), Just(c("1")), Just(s("a")), Just(s("b"))];
        let atom = (
            proptest::option::of(vals.clone()),
            vals.clone(),
            proptest::option::of(vals.clone()),
            proptest::option::of(vals),
        )
            .prop_map(|(z, y, x, w)| {
                let mut a = Atom::default();
                if let Some(z) = z {
                    a.intervened
                        .insert("X".into(), z.as_const().map(c).unwrap_or(c("0")));
                }
                a.event.insert("Y".into(), y);
                if let Some(x) = x {
                    if !a.intervened.contains_key("X") {
                        a.event.insert("X".into(), x);
                    }
                }
                if let Some(w) = w {
                    a.conditioning.insert("W".into(), w);
                }
                Estimand::Atom(a)
            });
        let leaf = prop_oneof![1 => Just(Estimand::One), 1 => Just(Estimand::Zero), 6 => atom];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 1..4).prop_map(Estimand::Product),
                (inner.clone(), inner.clone()).prop_map(|(n, d)| Estimand::fraction(n, d)),
                inner.prop_map(|b| Estimand::sum(vec![Binder::new("a", "Y")], b)),
            ]
        })
    }

    fn tables_xyw(seed: &[f64; 8]) -> TableSet {
        let mut t = TableSet::new(bin(&["W", "X", "Y"]));
        let total: f64 = seed.iter().sum();
        let joint: Vec<f64> = seed.iter().map(|p| p / total).collect();
        t.insert(BTreeMap::new(), joint.clone()).unwrap();
        for x in ["0", "1"] {
            let mut shifted = joint.clone();
            shifted.rotate_left(if x == "0" { 1 } else { 3 });
            t.insert(BTreeMap::from([("X".to_string(), x.to_string())]), shifted)
                .unwrap();
        }
        t
    }

    proptest! {
        #[test]
        fn json_round_trips(e in arb_estimand()) {
            prop_assert_eq!(from_json(&to_json(&e)).unwrap(), e);
        }

        #[test]
        fn simplify_preserves_value(
            e in arb_estimand(),
            weights in proptest::array::uniform8(0.05f64..1.0),
        ) {
            let t = tables_xyw(&weights);
            let binding = BTreeMap::from([
                ("a".to_string(), "1".to_string()),
                ("b".to_string(), "0".to_string()),
            ]);
            let before = evaluate(&e, &t, &binding);
            let after = evaluate(&simplify(&e), &t, &binding);
            if let (Ok(x), Ok(y)) = (before, after) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()), "{} vs {}", x, y);
            }
        }

        #[test]
        fn simplify_is_idempotent(e in arb_estimand()) {
            let once = simplify(&e);
            prop_assert_eq!(simplify(&once), once);
        }
    }
}
