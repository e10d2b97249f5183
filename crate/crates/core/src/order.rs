//! Topological orderings over the observed nodes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::nodeset::NodeSet;

/// A total order over the observed nodes of a graph.
///
/// Construction only checks coverage; whether the order is consistent with
/// the directed edges is a separate question answered by [`validate_order`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableOrder {
    sequence: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl VariableOrder {
    /// Builds an order from node indices. The sequence must be a permutation
    /// of the observed nodes of `g`.
    pub fn new(g: &CausalGraph, sequence: Vec<usize>) -> Result<Self> {
        let mut position = vec![None; g.node_count()];
        for (rank, &v) in sequence.iter().enumerate() {
            g.check_node(v)?;
            if g.is_latent(v) {
                return Err(Error::LatentInOrder(g.name(v).to_string()));
            }
            if position[v].replace(rank).is_some() {
                return Err(Error::OrderCoverage(format!("`{}` listed twice", g.name(v))));
            }
        }
        if let Some(missing) = g.observed().iter().find(|&v| position[v].is_none()) {
            return Err(Error::OrderCoverage(format!("`{}` missing", g.name(missing))));
        }
        Ok(Self { sequence, position })
    }

    pub fn from_names<S: AsRef<str>>(g: &CausalGraph, names: &[S]) -> Result<Self> {
        let seq = names.iter().map(|n| g.node(n.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(g, seq)
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Rank of `node`, or `None` for nodes outside the order.
    pub fn rank(&self, node: usize) -> Option<usize> {
        self.position.get(node).copied().flatten()
    }

    /// `V^{<=x}`: `x` and every node ranked before it.
    pub fn prefix(&self, x: usize) -> NodeSet {
        match self.rank(x) {
            Some(r) => self.sequence[..=r].iter().copied().collect(),
            None => NodeSet::new(),
        }
    }

    /// Members of `set` sorted by rank; nodes outside the order sort last.
    pub fn sort_by_rank(&self, set: &NodeSet) -> Vec<usize> {
        let mut v = set.to_vec();
        v.sort_by_key(|&n| (self.rank(n).unwrap_or(usize::MAX), n));
        v
    }

    /// The lowest-ranked member of `set`.
    pub fn min_by_rank(&self, set: &NodeSet) -> Option<usize> {
        set.iter().min_by_key(|&n| (self.rank(n).unwrap_or(usize::MAX), n))
    }
}

/// Whether every directed edge between ordered nodes points forward.
pub fn validate_order(g: &CausalGraph, order: &VariableOrder) -> bool {
    first_violation(g, order).is_none()
}

/// Like [`validate_order`] but reports the offending edge.
pub fn check_order(g: &CausalGraph, order: &VariableOrder) -> Result<()> {
    match first_violation(g, order) {
        None => Ok(()),
        Some((t, h)) => Err(Error::NotTopological(g.name(t).to_string(), g.name(h).to_string())),
    }
}

fn first_violation(g: &CausalGraph, order: &VariableOrder) -> Option<(usize, usize)> {
    // Orders cover observed nodes only; edges touching a latent are skipped.
    g.directed_edges()
        .into_iter()
        .find(|&(t, h)| matches!((order.rank(t), order.rank(h)), (Some(a), Some(b)) if a >= b))
}

/// Deterministic topological order over the observed nodes, breaking ties
/// by node name.
pub fn default_order(g: &CausalGraph) -> VariableOrder {
    let n = g.node_count();
    let mut indegree: Vec<usize> = (0..n).map(|v| g.parents_of(v).len()).collect();
    let mut ready: BinaryHeap<Reverse<(&str, usize)>> =
        (0..n).filter(|&v| indegree[v] == 0).map(|v| Reverse((g.name(v), v))).collect();
    let mut seq = Vec::with_capacity(n);
    while let Some(Reverse((_, v))) = ready.pop() {
        if !g.is_latent(v) {
            seq.push(v);
        }
        for &c in g.children_of(v) {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse((g.name(c), c)));
            }
        }
    }
    VariableOrder::new(g, seq).expect("topological sort of a DAG covers every node")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgraphs;

    #[test]
    fn g2_alphabetical_order_is_valid() {
        let g = testgraphs::g2();
        let o = VariableOrder::from_names(&g, &["A", "B", "C", "D", "E", "F", "H"]).unwrap();
        assert!(validate_order(&g, &o));
        assert_eq!(default_order(&g), o);
    }

    #[test]
    fn reversed_chain_is_invalid() {
        let g = CausalGraph::from_edges(&["A", "B"], &[("A", "B")], &[]).unwrap();
        let o = VariableOrder::from_names(&g, &["B", "A"]).unwrap();
        assert!(!validate_order(&g, &o));
        assert_eq!(check_order(&g, &o), Err(Error::NotTopological("A".into(), "B".into())));
    }

    #[test]
    fn empty_graph_accepts_any_permutation() {
        let g = CausalGraph::empty(4);
        for seq in [vec![0, 1, 2, 3], vec![3, 1, 0, 2], vec![2, 3, 1, 0]] {
            assert!(validate_order(&g, &VariableOrder::new(&g, seq).unwrap()));
        }
    }

    #[test]
    fn wrong_node_set_is_rejected() {
        let g = CausalGraph::empty(3);
        assert!(matches!(VariableOrder::new(&g, vec![0, 1]), Err(Error::OrderCoverage(_))));
        assert!(matches!(VariableOrder::new(&g, vec![0, 1, 1]), Err(Error::OrderCoverage(_))));
        assert_eq!(VariableOrder::new(&g, vec![0, 1, 5]), Err(Error::UnknownNode(5)));
        let g1 = testgraphs::g1();
        let u1 = g1.node("U1").unwrap();
        assert_eq!(VariableOrder::new(&g1, vec![u1]), Err(Error::LatentInOrder("U1".into())));
    }

    #[test]
    fn default_order_breaks_ties_by_name() {
        let g = CausalGraph::from_edges(&["z", "b", "a"], &[("z", "a")], &[]).unwrap();
        let o = default_order(&g);
        let names: Vec<_> = o.sequence().iter().map(|&v| g.name(v)).collect();
        assert_eq!(names, ["b", "z", "a"]);
        assert_eq!(o.prefix(g.node("z").unwrap()).len(), 2);
    }
}
