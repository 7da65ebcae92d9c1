//! Benchmark workloads: worked example queries for the identification
//! engine and a five-variable model for brute-force enumeration.

use ctfid_core::{
    fixtures, parse_query, random_scm, AvailableSpec, CausalDiagram, DiscreteSCM, Query, VarSet,
};

/// A query together with everything needed to identify it.
pub struct Workload {
    pub name: &'static str,
    pub graph: CausalDiagram,
    pub spec: AvailableSpec,
    pub query: Query,
}

fn workload(name: &'static str, graph: CausalDiagram, sets: &[&[&str]], query: &str) -> Workload {
    let spec = AvailableSpec::new(
        sets.iter()
            .map(|s| s.iter().map(|v| v.to_string()).collect::<VarSet>()),
    );
    let query = parse_query(query, &graph).expect("workload query parses");
    Workload {
        name,
        graph,
        spec,
        query,
    }
}

pub fn examples() -> Vec<Workload> {
    vec![
        workload(
            "covariate_nested",
            fixtures::fig4b(),
            &[&[]],
            "P(Y[X=1, W=W[X=0]]=1, X=0)",
        ),
        workload(
            "direct_effect",
            fixtures::fig5a(),
            &[&[], &["X"]],
            "P(Y[X=1, Z=Z[X=0]]=1)",
        ),
        workload("napkin_effect", fixtures::napkin(), &[&[]], "P(Y[X=0]=1)"),
        workload(
            "conditional",
            fixtures::fig6a(),
            &[&[]],
            "P(Y[X=0]=1 | Z[X=0]=1, X=1)",
        ),
        workload(
            "inconsistent",
            fixtures::fig5c(),
            &[&[], &["X"], &["W"]],
            "P(Y[X=0, Z=0]=1, X=1, Z=1)",
        ),
    ]
}

/// A model for enumeration benchmarks on the five-variable chain with two
/// confounded pairs.
pub fn enumeration_model(seed: u64) -> DiscreteSCM {
    let g = CausalDiagram::binary(
        &["A", "B", "C", "D", "E"],
        &[("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"), ("A", "E")],
        &[("A", "C"), ("B", "E")],
    )
    .expect("valid diagram");
    random_scm(&g, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ctfid_core::{cond_ctf_id, Status};

    #[test]
    fn workloads_run() {
        let statuses: Vec<Status> = examples()
            .iter()
            .map(|w| cond_ctf_id(&w.query, &w.spec, &w.graph).unwrap().status)
            .collect();
        assert_eq!(statuses.iter().filter(|s| **s == Status::Fail).count(), 1);
        assert!(enumeration_model(1).state_space() > 0);
    }
}
