//! Semi-Markovian causal graphs and the kinship queries the enumerators need.
//!
//! Nodes are dense indices assigned in declaration order. Directed edges form
//! a DAG; bidirected edges stand for latent common causes. Kinship follows the
//! reflexive convention: `parents(X)`, `ancestors(X)` and `descendants(X)` all
//! contain `X` itself, while `nondescendants(X)` does not.
//!
//! The `*_within` variants compute the same quantity in the subgraph induced
//! on a node set without materialising that subgraph.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::nodeset::NodeSet;

/// An immutable causal graph with directed and bidirected edges.
#[derive(Clone, Debug)]
pub struct CausalGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    latent: Vec<bool>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    spouses: Vec<Vec<usize>>,
}

impl PartialEq for CausalGraph {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.latent == other.latent
            && self.parents == other.parents
            && self.spouses == other.spouses
    }
}

impl Eq for CausalGraph {}

/// Incremental construction of a [`CausalGraph`].
#[derive(Default, Debug, Clone)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    latent: Vec<bool>,
    directed: Vec<(usize, usize)>,
    bidirected: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize, bool)>,
    children: Vec<Vec<usize>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) -> Result<usize> {
        self.push_node(name, false)
    }

    pub fn add_latent(&mut self, name: &str) -> Result<usize> {
        self.push_node(name, true)
    }

    fn push_node(&mut self, name: &str, latent: bool) -> Result<usize> {
        if name.is_empty() {
            return Err(Error::EmptyName);
        }
        if self.index.contains_key(name) {
            return Err(Error::DuplicateNode(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.latent.push(latent);
        self.children.push(Vec::new());
        Ok(id)
    }

    pub fn node(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    fn check(&self, a: usize, b: usize) -> Result<()> {
        let n = self.names.len();
        if a >= n {
            return Err(Error::UnknownNode(a));
        }
        if b >= n {
            return Err(Error::UnknownNode(b));
        }
        if a == b {
            return Err(Error::SelfLoop(self.names[a].clone()));
        }
        Ok(())
    }

    /// Adds `tail -> head`, rejecting edges that would close a directed cycle.
    pub fn add_directed(&mut self, tail: usize, head: usize) -> Result<()> {
        self.check(tail, head)?;
        if !self.seen.insert((tail, head, true)) {
            return Err(Error::DuplicateEdge(format!("{} -> {}", self.names[tail], self.names[head])));
        }
        if self.reaches(head, tail) {
            self.seen.remove(&(tail, head, true));
            return Err(Error::DirectedCycle(self.names[tail].clone(), self.names[head].clone()));
        }
        self.children[tail].push(head);
        self.directed.push((tail, head));
        Ok(())
    }

    pub fn add_bidirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check(a, b)?;
        let key = (a.min(b), a.max(b), false);
        if !self.seen.insert(key) {
            return Err(Error::DuplicateEdge(format!("{} <-> {}", self.names[a], self.names[b])));
        }
        self.bidirected.push((a, b));
        Ok(())
    }

    pub fn add_directed_by_name(&mut self, tail: &str, head: &str) -> Result<()> {
        let (t, h) = (self.node(tail)?, self.node(head)?);
        self.add_directed(t, h)
    }

    pub fn add_bidirected_by_name(&mut self, a: &str, b: &str) -> Result<()> {
        let (a, b) = (self.node(a)?, self.node(b)?);
        self.add_bidirected(a, b)
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.children[v].iter().copied().filter(|&c| !seen[c]));
        }
        false
    }

    pub fn build(self) -> CausalGraph {
        let n = self.names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut spouses = vec![Vec::new(); n];
        for &(t, h) in &self.directed {
            parents[h].push(t);
            children[t].push(h);
        }
        for &(a, b) in &self.bidirected {
            spouses[a].push(b);
            spouses[b].push(a);
        }
        for list in parents.iter_mut().chain(&mut children).chain(&mut spouses) {
            list.sort_unstable();
        }
        CausalGraph { names: self.names, index: self.index, latent: self.latent, parents, children, spouses }
    }
}

impl CausalGraph {
    /// Convenience constructor over observed nodes only.
    pub fn from_edges(nodes: &[&str], directed: &[(&str, &str)], bidirected: &[(&str, &str)]) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for n in nodes {
            b.add_node(n)?;
        }
        for (t, h) in directed {
            b.add_directed_by_name(t, h)?;
        }
        for (x, y) in bidirected {
            b.add_bidirected_by_name(x, y)?;
        }
        Ok(b.build())
    }

    /// Graph with `n` nodes named `V1..Vn` and no edges.
    pub fn empty(n: usize) -> Self {
        let mut b = GraphBuilder::new();
        for i in 1..=n {
            b.add_node(&format!("V{i}")).expect("generated names are unique");
        }
        b.build()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn node(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Resolves a list of names to a node set.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<NodeSet> {
        names.iter().map(|n| self.node(n.as_ref())).collect()
    }

    /// Member names in name order.
    pub fn sorted_names(&self, set: &NodeSet) -> Vec<&str> {
        let mut v: Vec<&str> = set.iter().map(|i| self.name(i)).collect();
        v.sort_unstable();
        v
    }

    pub fn is_latent(&self, node: usize) -> bool {
        self.latent[node]
    }

    pub fn has_latents(&self) -> bool {
        self.latent.iter().any(|&l| l)
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.node_count())
    }

    pub fn observed(&self) -> NodeSet {
        (0..self.node_count()).filter(|&i| !self.latent[i]).collect()
    }

    pub fn parents_of(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children_of(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn spouses_of(&self, node: usize) -> &[usize] {
        &self.spouses[node]
    }

    /// Directed edges as `(tail, head)`, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = (0..self.node_count()).flat_map(|h| self.parents[h].iter().map(move |&t| (t, h))).collect();
        v.sort_unstable();
        v
    }

    /// Bidirected edges as `(a, b)` with `a < b`, sorted.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count())
            .flat_map(|a| self.spouses[a].iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.directed_edges().len() + self.bidirected_edges().len()
    }

    pub fn has_directed(&self, tail: usize, head: usize) -> bool {
        self.parents[head].binary_search(&tail).is_ok()
    }

    pub fn has_bidirected(&self, a: usize, b: usize) -> bool {
        self.spouses[a].binary_search(&b).is_ok()
    }

    pub(crate) fn check_set(&self, set: &NodeSet) -> Result<()> {
        if set.bound() > self.node_count() {
            return Err(Error::UnknownNode(set.bound() - 1));
        }
        Ok(())
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.node_count() {
            return Err(Error::UnknownNode(node));
        }
        Ok(())
    }

    /// `x` together with every parent of a member of `x`.
    pub fn parents(&self, x: &NodeSet) -> Result<NodeSet> {
        self.check_set(x)?;
        Ok(self.parents_unchecked(x))
    }

    pub(crate) fn parents_unchecked(&self, x: &NodeSet) -> NodeSet {
        let mut out = x.clone();
        for v in x {
            out.extend(self.parents[v].iter().copied());
        }
        out
    }

    pub fn ancestors(&self, x: &NodeSet) -> Result<NodeSet> {
        self.check_set(x)?;
        Ok(self.closure(x, None, &self.parents))
    }

    pub fn descendants(&self, x: &NodeSet) -> Result<NodeSet> {
        self.check_set(x)?;
        Ok(self.closure(x, None, &self.children))
    }

    /// All nodes that are not descendants of `x` (so `x` itself is excluded).
    pub fn nondescendants(&self, x: &NodeSet) -> Result<NodeSet> {
        Ok(&self.all_nodes() - &self.descendants(x)?)
    }

    /// Union of the bidirected neighbours of members of `x`.
    pub fn spouses(&self, x: &NodeSet) -> Result<NodeSet> {
        self.check_set(x)?;
        let mut out = NodeSet::new();
        for v in x {
            out.extend(self.spouses[v].iter().copied());
        }
        Ok(out)
    }

    /// The c-component containing `x`: everything reachable over bidirected
    /// edges alone.
    pub fn c_component(&self, x: usize) -> Result<NodeSet> {
        self.check_node(x)?;
        Ok(self.c_component_within(x, &self.all_nodes()))
    }

    /// Whether `s` contains all of its ancestors.
    pub fn is_ancestral(&self, s: &NodeSet) -> Result<bool> {
        Ok(self.ancestors(s)? == *s)
    }

    /// Ancestors of `x` in the subgraph induced on `within`.
    pub fn ancestors_within(&self, x: &NodeSet, within: &NodeSet) -> NodeSet {
        self.closure(&x.intersection(within), Some(within), &self.parents)
    }

    /// Descendants of `x` in the subgraph induced on `within`.
    pub fn descendants_within(&self, x: &NodeSet, within: &NodeSet) -> NodeSet {
        self.closure(&x.intersection(within), Some(within), &self.children)
    }

    /// Spouses of `x` in the subgraph induced on `within`.
    pub fn spouses_within(&self, x: &NodeSet, within: &NodeSet) -> NodeSet {
        let mut out = NodeSet::new();
        for v in x {
            if within.contains(v) {
                out.extend(self.spouses[v].iter().copied().filter(|&s| within.contains(s)));
            }
        }
        out
    }

    /// C-component of `x` in the subgraph induced on `within`. Breadth-first,
    /// linear in the size of the subgraph. Empty when `x` is outside `within`.
    pub fn c_component_within(&self, x: usize, within: &NodeSet) -> NodeSet {
        let mut comp = NodeSet::new();
        if !within.contains(x) {
            return comp;
        }
        comp.insert(x);
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            for &s in &self.spouses[v] {
                if within.contains(s) && comp.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        comp
    }

    fn closure(&self, start: &NodeSet, within: Option<&NodeSet>, adj: &[Vec<usize>]) -> NodeSet {
        let mut out = start.clone();
        let mut stack = start.to_vec();
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if within.is_none_or(|s| s.contains(w)) && out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Partition of the nodes into c-components, ordered by smallest member.
    pub fn c_components(&self) -> Vec<NodeSet> {
        let all = self.all_nodes();
        let mut seen = NodeSet::new();
        let mut out = Vec::new();
        for v in 0..self.node_count() {
            if !seen.contains(v) {
                let c = self.c_component_within(v, &all);
                seen.union_with(&c);
                out.push(c);
            }
        }
        out
    }

    /// Size of the largest c-component (0 for the empty graph).
    pub fn largest_c_component(&self) -> usize {
        self.c_components().iter().map(NodeSet::len).max().unwrap_or(0)
    }

    /// The subgraph induced on `s`, with nodes renumbered in ascending index
    /// order and names, latent flags and edges among `s` preserved.
    pub fn induced_subgraph(&self, s: &NodeSet) -> Result<CausalGraph> {
        self.check_set(s)?;
        let mut b = GraphBuilder::new();
        let mut remap = vec![usize::MAX; self.node_count()];
        for v in s {
            remap[v] = b.push_node(&self.names[v], self.latent[v])?;
        }
        for (t, h) in self.directed_edges() {
            if s.contains(t) && s.contains(h) {
                b.add_directed(remap[t], remap[h])?;
            }
        }
        for (x, y) in self.bidirected_edges() {
            if s.contains(x) && s.contains(y) {
                b.add_bidirected(remap[x], remap[y])?;
            }
        }
        Ok(b.build())
    }

    /// Number of bidirected edges.
    pub fn bidirected_count(&self) -> usize {
        self.spouses.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Number of directed edges.
    pub fn directed_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }
}
