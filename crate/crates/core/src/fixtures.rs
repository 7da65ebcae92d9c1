//! Named diagrams used throughout the documentation, tests and CLI.
//!
//! All variables are binary (`"0"`, `"1"`) unless relabelled with
//! [`CausalDiagram::with_domain`].

use crate::graph::CausalDiagram;

fn build(names: &[&str], directed: &[(&str, &str)], bidirected: &[(&str, &str)]) -> CausalDiagram {
    CausalDiagram::binary(names, directed, bidirected).expect("fixture diagram is valid")
}

/// Z -> X -> Y with Z -> Y.
pub fn backdoor() -> CausalDiagram {
    build(&["X", "Y", "Z"], &[("Z", "X"), ("Z", "Y"), ("X", "Y")], &[])
}

/// W -> Z -> X -> Y with X <-> W and W <-> Y.
pub fn napkin() -> CausalDiagram {
    build(
        &["W", "X", "Y", "Z"],
        &[("W", "Z"), ("Z", "X"), ("X", "Y")],
        &[("X", "W"), ("W", "Y")],
    )
}

/// Treatment X, mediator M, outcome Y with X <-> M.
pub fn mediation() -> CausalDiagram {
    build(
        &["M", "X", "Y"],
        &[("X", "M"), ("M", "Y"), ("X", "Y")],
        &[("X", "M")],
    )
}

/// Unconfounded mediation structure with a root covariate Z.
pub fn fig4a() -> CausalDiagram {
    build(
        &["W", "X", "Y", "Z"],
        &[("Z", "X"), ("Z", "Y"), ("X", "Y"), ("X", "W"), ("W", "Y")],
        &[],
    )
}

/// [`fig4a`] with Z <-> Y.
pub fn fig4b() -> CausalDiagram {
    build(
        &["W", "X", "Y", "Z"],
        &[("Z", "X"), ("Z", "Y"), ("X", "Y"), ("X", "W"), ("W", "Y")],
        &[("Z", "Y")],
    )
}

/// [`fig4a`] with X <-> W.
pub fn fig4c() -> CausalDiagram {
    build(
        &["W", "X", "Y", "Z"],
        &[("Z", "X"), ("Z", "Y"), ("X", "Y"), ("X", "W"), ("W", "Y")],
        &[("X", "W")],
    )
}

/// X -> Z -> Y, X -> Y, X <-> Z.
pub fn fig5a() -> CausalDiagram {
    build(
        &["X", "Y", "Z"],
        &[("X", "Z"), ("Z", "Y"), ("X", "Y")],
        &[("X", "Z")],
    )
}

/// X -> Y with X <-> Y.
pub fn bow() -> CausalDiagram {
    build(&["X", "Y"], &[("X", "Y")], &[("X", "Y")])
}

/// X -> W -> Z -> Y with W -> Y.
pub fn fig5c() -> CausalDiagram {
    build(
        &["W", "X", "Y", "Z"],
        &[("X", "W"), ("W", "Z"), ("Z", "Y"), ("W", "Y")],
        &[],
    )
}

/// Same structure as [`fig5a`].
pub fn fig6a() -> CausalDiagram {
    fig5a()
}

/// X -> Z -> Y, X -> Y, X <-> Y.
pub fn fig6b() -> CausalDiagram {
    build(
        &["X", "Y", "Z"],
        &[("X", "Z"), ("Z", "Y"), ("X", "Y")],
        &[("X", "Y")],
    )
}

/// Every bundled diagram with a short description.
pub fn all() -> Vec<(&'static str, &'static str, CausalDiagram)> {
    vec![
        ("backdoor", "Z -> X -> Y, Z -> Y", backdoor()),
        ("napkin", "W -> Z -> X -> Y, X <-> W, W <-> Y", napkin()),
        ("mediation", "X -> M -> Y, X -> Y, X <-> M", mediation()),
        (
            "fig4a",
            "mediation with covariate Z, no confounding",
            fig4a(),
        ),
        ("fig4b", "fig4a plus Z <-> Y", fig4b()),
        ("fig4c", "fig4a plus X <-> W", fig4c()),
        ("fig5a", "X -> Z -> Y, X -> Y, X <-> Z", fig5a()),
        ("bow", "X -> Y, X <-> Y", bow()),
        ("fig5c", "X -> W -> Z -> Y, W -> Y", fig5c()),
        ("fig6a", "X -> Z -> Y, X -> Y, X <-> Z", fig6a()),
        ("fig6b", "X -> Z -> Y, X -> Y, X <-> Y", fig6b()),
    ]
}

pub fn by_name(name: &str) -> Option<CausalDiagram> {
    all()
        .into_iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, g)| g)
}
