//! Enumeration of testable conditional independencies in causal graphs with
//! latent confounders, plus the baselines and tooling around it.
//!
//! Graphs are semi-Markovian: directed edges for direct causation and
//! bidirected edges for unobserved common causes. Note that `Pa`, `An` and
//! `De` include their argument set, while `Nd` does not.

pub mod baselines;
pub mod citest;
pub mod clmp;
pub mod error;
pub mod format;
pub mod graph;
pub mod nodeset;
pub mod order;
pub mod project;
pub mod randgen;
pub mod separation;
pub mod sweep;
pub mod testgraphs;

pub use clmp::{collect_ci, collect_ci_parallel, list_ci, list_ci_until, list_ci_with_acs, AcContext, CiStatement};
pub use error::{Error, Result};
pub use format::{format_ci, parse_graph, read_graph_file, GraphFile, ParseError};
pub use graph::{CausalGraph, GraphBuilder};
pub use nodeset::NodeSet;
pub use order::{default_order, validate_order, VariableOrder};
pub use project::{latent_project, project_latents_fraction};
pub use randgen::{random_graph, RandomGraphSpec};
pub use separation::{augment, d_separated, find_separator, is_separated, SeparationQuery};
