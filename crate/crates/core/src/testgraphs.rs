//! Named example graphs and small parametric families.
//!
//! The named graphs are the files under `fixtures/` at the workspace root,
//! compiled in so tests, benchmarks and the CLI agree on them.

use crate::format::{parse_graph_text, GraphFile};
use crate::graph::{CausalGraph, GraphBuilder};

pub const G1_TEXT: &str = include_str!("../../../fixtures/g1.graph");
pub const G1_OBSERVED_TEXT: &str = include_str!("../../../fixtures/g1_observed.graph");
pub const G2_TEXT: &str = include_str!("../../../fixtures/g2.graph");
pub const SACHS_TEXT: &str = include_str!("../../../fixtures/sachs.graph");
pub const THREE_ACS_TEXT: &str = include_str!("../../../fixtures/three_acs.graph");

fn load(text: &str) -> GraphFile {
    parse_graph_text(text).expect("bundled fixtures are valid")
}

/// Ten variables, three of them latent.
pub fn g1() -> CausalGraph {
    load(G1_TEXT).graph
}

/// [`g1`] with all ten variables observed.
pub fn g1_observed() -> CausalGraph {
    load(G1_OBSERVED_TEXT).graph
}

/// The projection of [`g1`]: seven nodes, c-component {C, D, H}.
pub fn g2() -> CausalGraph {
    load(G2_TEXT).graph
}

/// The 11-node protein-signaling network and its reference order.
pub fn sachs() -> GraphFile {
    load(SACHS_TEXT)
}

/// Graph where `X` has several distinct ancestral c-components.
pub fn three_acs() -> GraphFile {
    load(THREE_ACS_TEXT)
}

/// `V1 <-> V2 <-> ... <-> Vn`.
pub fn bidirected_path(n: usize) -> CausalGraph {
    let mut g = GraphBuilder::new();
    for i in 1..=n {
        g.add_node(&format!("V{i}")).unwrap();
    }
    for i in 1..n {
        g.add_bidirected(i - 1, i).unwrap();
    }
    g.build()
}

/// Every pair joined by a bidirected edge; nodes named `V1..Vn`.
pub fn bidirected_clique(n: usize) -> CausalGraph {
    let mut g = GraphBuilder::new();
    for i in 1..=n {
        g.add_node(&format!("V{i}")).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            g.add_bidirected(i, j).unwrap();
        }
    }
    g.build()
}

/// `V1 -> V2 -> ... -> Vn`.
pub fn chain(n: usize) -> CausalGraph {
    let mut g = GraphBuilder::new();
    for i in 1..=n {
        g.add_node(&format!("V{i}")).unwrap();
    }
    for i in 1..n {
        g.add_directed(i - 1, i).unwrap();
    }
    g.build()
}
