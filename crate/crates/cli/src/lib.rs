//! Command implementations behind the `ctfid` binary. Each command returns
//! an [`Outcome`] holding its exit code and output so the binary stays a
//! thin shell and tests can run commands in-process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ctfid_core::{
    cond_ctf_id, evaluate, fixtures, parse_query, random_scm, render, AvailableSpec, CausalDiagram,
    Error, Format, IdentificationResult, Query, Status,
};
use serde_json::json;

/// Identified or degenerate query.
pub const EXIT_OK: i32 = 0;
/// Malformed input.
pub const EXIT_INPUT: i32 = 1;
/// The query is not identifiable from the available distributions.
pub const EXIT_NOT_IDENTIFIABLE: i32 = 2;
/// An oracle check found an estimand that disagrees with enumeration.
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Largest deviation an oracle check tolerates.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graph: PathBuf,
    /// Observational data only when absent.
    pub spec: Option<PathBuf>,
    pub query: String,
    pub format: Format,
    pub seeds: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn input_error(err: &anyhow::Error) -> Self {
        Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {err:#}\n"),
        }
    }
}

struct Loaded {
    graph: CausalDiagram,
    spec: AvailableSpec,
    query: Query,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(config: &RunConfig) -> anyhow::Result<Loaded> {
    let graph = CausalDiagram::from_json(&read(&config.graph)?)
        .with_context(|| format!("invalid diagram {}", config.graph.display()))?;
    let spec = match &config.spec {
        Some(path) => AvailableSpec::from_json(&read(path)?, &graph)
            .with_context(|| format!("invalid available collection {}", path.display()))?,
        None => AvailableSpec::observational(),
    };
    let query = parse_query(&config.query, &graph).context("invalid query")?;
    Ok(Loaded { graph, spec, query })
}

fn identify(loaded: &Loaded) -> anyhow::Result<IdentificationResult> {
    match cond_ctf_id(&loaded.query, &loaded.spec, &loaded.graph) {
        Ok(r) => Ok(r),
        Err(Error::ConditioningOnNullEvent(why)) => {
            bail!("the conditioning event is impossible: {why}")
        }
        Err(e) => Err(e.into()),
    }
}

fn failure_report(r: &IdentificationResult) -> String {
    let mut out = String::from("not identifiable\n");
    for d in r.failures() {
        let _ = writeln!(out, "  {d}");
    }
    out
}

fn render_result(r: &IdentificationResult, format: Format) -> String {
    match format {
        Format::Json => {
            let estimand = r.estimand.as_ref().map(|e| {
                serde_json::from_str::<serde_json::Value>(&render(e, Format::Json))
                    .expect("estimand json")
            });
            let diagnostics: Vec<String> = r.diagnostics.iter().map(ToString::to_string).collect();
            let doc = json!({
                "status": r.status.to_string(),
                "estimand": estimand,
                "diagnostics": diagnostics,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))
        }
        _ => match r.status {
            Status::Identified => format!(
                "{}\n",
                render(r.estimand.as_ref().expect("identified"), format)
            ),
            Status::Zero => "0\n".to_string(),
            Status::One => "1\n".to_string(),
            Status::Fail => failure_report(r),
        },
    }
}

/// Identifies the configured query and renders the result.
pub fn run_identify(config: &RunConfig) -> Outcome {
    let result = load(config).and_then(|l| identify(&l));
    match result {
        Err(e) => Outcome::input_error(&e),
        Ok(r) => {
            let code = if r.status == Status::Fail {
                EXIT_NOT_IDENTIFIABLE
            } else {
                EXIT_OK
            };
            Outcome {
                code,
                stdout: render_result(&r, config.format),
                stderr: String::new(),
            }
        }
    }
}

/// Compares the estimand with brute-force enumeration on `config.seeds`
/// random models of the diagram.
pub fn run_oracle_check(config: &RunConfig) -> Outcome {
    let loaded = match load(config) {
        Ok(l) => l,
        Err(e) => return Outcome::input_error(&e),
    };
    let r = match identify(&loaded) {
        Ok(r) => r,
        Err(e) => return Outcome::input_error(&e),
    };
    if r.status == Status::Fail {
        return Outcome {
            code: EXIT_NOT_IDENTIFIABLE,
            stdout: String::new(),
            stderr: format!(
                "refusing to check a query without an estimand\n{}",
                failure_report(&r)
            ),
        };
    }
    if config.seeds == 0 {
        return Outcome::input_error(&anyhow::anyhow!("--seeds must be positive"));
    }
    let q = &loaded.query;
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for seed in 0..config.seeds {
        let scm = random_scm(&loaded.graph, seed);
        let truth = scm.conditional_probability(&q.outcome, &q.conditioning);
        let claimed = match (&r.status, &r.estimand) {
            (Status::Zero, _) => Ok(0.0),
            (Status::One, _) => Ok(1.0),
            (_, Some(e)) => scm
                .tables(loaded.spec.sets())
                .and_then(|t| evaluate(e, &t, &BTreeMap::new())),
            (_, None) => unreachable!("identified results carry an estimand"),
        };
        match (truth, claimed) {
            (Ok(Some(t)), Ok(c)) => worst = worst.max((t - c).abs()),
            (Ok(None), _) | (_, Err(Error::DivisionByZero)) => skipped += 1,
            (Err(e), _) | (_, Err(e)) => return Outcome::input_error(&e.into()),
        }
    }
    let checked = config.seeds - skipped;
    let mut stdout = format!("max deviation {worst:.3e} over {checked} models");
    if skipped > 0 {
        let _ = write!(
            stdout,
            " ({skipped} skipped, conditioning event has probability zero)"
        );
    }
    stdout.push('\n');
    if worst > TOLERANCE {
        return Outcome {
            code: EXIT_CHECK_FAILED,
            stdout,
            stderr: format!("deviation exceeds {TOLERANCE:e}\n"),
        };
    }
    Outcome::ok(stdout)
}

/// Lists the bundled diagrams.
pub fn run_fixtures() -> Outcome {
    let mut out = String::new();
    for (name, description, _) in fixtures::all() {
        let _ = writeln!(out, "{name:<10} {description}");
    }
    Outcome::ok(out)
}

/// One expected result in the fixture manifest.
#[derive(Debug, Clone, serde::Deserialize)]
pub struct ManifestEntry {
    pub graph: String,
    #[serde(default)]
    pub spec: Option<String>,
    pub query: String,
    pub status: String,
    #[serde(default)]
    pub output: Option<String>,
}

/// Reads `manifest.json` from a fixture directory; paths in the entries are
/// relative to that directory.
pub fn read_manifest(dir: &Path) -> anyhow::Result<Vec<ManifestEntry>> {
    let text = read(&dir.join("manifest.json"))?;
    serde_json::from_str(&text).context("invalid manifest")
}

impl ManifestEntry {
    pub fn config(&self, dir: &Path) -> RunConfig {
        RunConfig {
            graph: dir.join(&self.graph),
            spec: self.spec.as_ref().map(|s| dir.join(s)),
            query: self.query.clone(),
            format: Format::Text,
            seeds: 0,
        }
    }
}
