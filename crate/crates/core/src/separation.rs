//! d-separation and constrained separator search.
//!
//! Reachability is Bayes-Ball over the graph with each bidirected edge read as
//! an explicit latent parent of both endpoints (see [`augment`]). The
//! traversal never materialises those parents: crossing `A <-> B` from `A` is
//! the two steps "up into the latent, down into `B`", allowed exactly when the
//! ball may move from `A` to a parent.

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, GraphBuilder};
use crate::nodeset::NodeSet;

/// A d-separation question `x _||_ y | z` over pairwise disjoint sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationQuery {
    pub x: NodeSet,
    pub y: NodeSet,
    pub z: NodeSet,
}

impl SeparationQuery {
    pub fn new(x: NodeSet, y: NodeSet, z: NodeSet) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptySet("x"));
        }
        if y.is_empty() {
            return Err(Error::EmptySet("y"));
        }
        if x.intersects(&y) || x.intersects(&z) || y.intersects(&z) {
            return Err(Error::NotDisjoint);
        }
        Ok(Self { x, y, z })
    }
}

/// Replaces every `A <-> B` with a fresh latent node `U` and edges `U -> A`,
/// `U -> B`. Original nodes keep their indices; fresh nodes are appended.
pub fn augment(g: &CausalGraph) -> CausalGraph {
    let mut b = GraphBuilder::new();
    for v in 0..g.node_count() {
        if g.is_latent(v) {
            b.add_latent(g.name(v)).expect("names already unique");
        } else {
            b.add_node(g.name(v)).expect("names already unique");
        }
    }
    for (t, h) in g.directed_edges() {
        b.add_directed(t, h).expect("edges already valid");
    }
    for (x, y) in g.bidirected_edges() {
        let base = format!("U[{},{}]", g.name(x), g.name(y));
        let mut name = base.clone();
        let mut k = 1;
        while b.node(&name).is_ok() {
            name = format!("{base}#{k}");
            k += 1;
        }
        let u = b.add_latent(&name).expect("fresh name");
        b.add_directed(u, x).expect("fresh source cannot close a cycle");
        b.add_directed(u, y).expect("fresh source cannot close a cycle");
    }
    b.build()
}

/// Nodes d-connected to `x` given `z` in the subgraph induced on `within`.
/// Members of `x` are included; members of `z` never are.
pub fn reachable_within(g: &CausalGraph, x: &NodeSet, z: &NodeSet, within: &NodeSet) -> NodeSet {
    let n = g.node_count();
    let anc_z = g.ancestors_within(z, within);
    // visited[2 * v] : arrived travelling up (from a child, or the start);
    // visited[2 * v + 1] : arrived travelling down (through an arrowhead).
    let mut visited = vec![false; 2 * n];
    let mut stack: Vec<(usize, bool)> = x.iter().filter(|&v| within.contains(v)).map(|v| (v, true)).collect();
    let mut reach = NodeSet::new();
    let inside = |v: &usize| within.contains(*v);
    while let Some((v, up)) = stack.pop() {
        let slot = 2 * v + usize::from(!up);
        if std::mem::replace(&mut visited[slot], true) {
            continue;
        }
        let blocked = z.contains(v);
        if !blocked {
            reach.insert(v);
        }
        if up {
            if !blocked {
                stack.extend(g.parents_of(v).iter().copied().filter(inside).map(|p| (p, true)));
                stack.extend(g.children_of(v).iter().copied().filter(inside).map(|c| (c, false)));
                stack.extend(g.spouses_of(v).iter().copied().filter(inside).map(|s| (s, false)));
            }
        } else {
            if !blocked {
                stack.extend(g.children_of(v).iter().copied().filter(inside).map(|c| (c, false)));
            }
            if anc_z.contains(v) {
                stack.extend(g.parents_of(v).iter().copied().filter(inside).map(|p| (p, true)));
                stack.extend(g.spouses_of(v).iter().copied().filter(inside).map(|s| (s, false)));
            }
        }
    }
    reach
}

/// Whether `q.z` d-separates `q.x` from `q.y` in `g`. Linear in the graph size.
pub fn d_separated(g: &CausalGraph, q: &SeparationQuery) -> Result<bool> {
    for s in [&q.x, &q.y, &q.z] {
        g.check_set(s)?;
    }
    Ok(d_separated_within(g, &q.x, &q.y, &q.z, &g.all_nodes()))
}

/// Validating shorthand for [`d_separated`].
pub fn is_separated(g: &CausalGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool> {
    d_separated(g, &SeparationQuery::new(x.clone(), y.clone(), z.clone())?)
}

pub(crate) fn d_separated_within(g: &CausalGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet, within: &NodeSet) -> bool {
    reachable_within(g, x, z, within).is_disjoint(y)
}

/// Finds `Z` with `i \ (x ∪ y) ⊆ Z ⊆ r \ (x ∪ y)` that d-separates `x` from
/// `y`, or `None` if no set in that range does. The only candidate examined
/// is `An(x ∪ y ∪ i) ∩ (r \ (x ∪ y))`, which separates whenever any
/// sandwiched set does.
pub fn find_separator(g: &CausalGraph, x: &NodeSet, y: &NodeSet, i: &NodeSet, r: &NodeSet) -> Result<Option<NodeSet>> {
    for s in [x, y, i, r] {
        g.check_set(s)?;
    }
    if !i.is_subset(r) {
        return Err(Error::Precondition("find_separator requires i ⊆ r".into()));
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet("x and y"));
    }
    if x.intersects(y) {
        return Err(Error::NotDisjoint);
    }
    Ok(find_separator_within(g, x, y, i, r, &g.all_nodes()))
}

pub(crate) fn find_separator_within(
    g: &CausalGraph,
    x: &NodeSet,
    y: &NodeSet,
    i: &NodeSet,
    r: &NodeSet,
    within: &NodeSet,
) -> Option<NodeSet> {
    let xy = x.union(y);
    let allowed = r.difference(&xy);
    let mut seed = xy.union(i);
    seed.intersect_with(within);
    let mut z = g.ancestors_within(&seed, within);
    z.intersect_with(&allowed);
    d_separated_within(g, x, y, &z, within).then_some(z)
}

/// Bit-packed adjacency for graphs with at most 64 nodes. Used by the
/// exhaustive enumerators, where the per-query cost dominates.
#[derive(Clone, Debug)]
pub struct PackedGraph {
    n: usize,
    parents: Vec<u64>,
    children: Vec<u64>,
    spouses: Vec<u64>,
}

impl PackedGraph {
    pub fn new(g: &CausalGraph) -> Option<Self> {
        let n = g.node_count();
        if n > 64 {
            return None;
        }
        let pack = |list: &[usize]| list.iter().fold(0u64, |m, &v| m | (1 << v));
        Some(Self {
            n,
            parents: (0..n).map(|v| pack(g.parents_of(v))).collect(),
            children: (0..n).map(|v| pack(g.children_of(v))).collect(),
            spouses: (0..n).map(|v| pack(g.spouses_of(v))).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn full(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn ancestors(&self, set: u64) -> u64 {
        let mut out = set;
        let mut frontier = set;
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= self.parents[v];
            }
            frontier = next & !out;
            out |= next;
        }
        out
    }

    /// Packed counterpart of [`reachable_within`] over the whole graph.
    pub fn reachable(&self, x: u64, z: u64) -> u64 {
        let anc_z = self.ancestors(z);
        let (mut seen_up, mut seen_down) = (0u64, 0u64);
        let (mut up, mut down) = (x, 0u64);
        loop {
            let new_up = up & !seen_up;
            let new_down = down & !seen_down;
            if new_up == 0 && new_down == 0 {
                break;
            }
            seen_up |= new_up;
            seen_down |= new_down;
            up = 0;
            down = 0;
            for v in bits(new_up & !z) {
                up |= self.parents[v];
                down |= self.children[v] | self.spouses[v];
            }
            for v in bits(new_down) {
                if z & (1 << v) == 0 {
                    down |= self.children[v];
                }
                if anc_z & (1 << v) != 0 {
                    up |= self.parents[v];
                    down |= self.spouses[v];
                }
            }
        }
        (seen_up | seen_down) & !z
    }

    pub fn separated(&self, x: u64, y: u64, z: u64) -> bool {
        self.reachable(x, z) & y == 0
    }
}

/// Iterates the set bits of a mask, lowest first.
pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let b = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgraphs;

    fn set(g: &CausalGraph, names: &[&str]) -> NodeSet {
        g.set_of(names).unwrap()
    }

    #[test]
    fn g2_h_separated_from_aef() {
        let g = testgraphs::g2();
        let q = SeparationQuery::new(set(&g, &["H"]), set(&g, &["A", "E", "F"]), set(&g, &["B", "C", "D"])).unwrap();
        assert!(d_separated(&g, &q).unwrap());
        let q = SeparationQuery::new(set(&g, &["H"]), set(&g, &["A"]), NodeSet::new()).unwrap();
        assert!(!d_separated(&g, &q).unwrap());
    }

    #[test]
    fn empty_graph_separates_everything() {
        let g = CausalGraph::empty(4);
        let q = SeparationQuery::new(NodeSet::from([0]), NodeSet::from([1, 2]), NodeSet::from([3])).unwrap();
        assert!(d_separated(&g, &q).unwrap());
    }

    #[test]
    fn collider_and_bidirected_behaviour() {
        // A -> C <- B: marginally separated, connected given C.
        let g = CausalGraph::from_edges(&["A", "B", "C"], &[("A", "C"), ("B", "C")], &[]).unwrap();
        assert!(is_separated(&g, &set(&g, &["A"]), &set(&g, &["B"]), &NodeSet::new()).unwrap());
        assert!(!is_separated(&g, &set(&g, &["A"]), &set(&g, &["B"]), &set(&g, &["C"])).unwrap());
        // A <-> B <-> C: A and C separated only when B is not conditioned on.
        let p = testgraphs::bidirected_path(3);
        assert!(is_separated(&p, &NodeSet::from([0]), &NodeSet::from([2]), &NodeSet::new()).unwrap());
        assert!(!is_separated(&p, &NodeSet::from([0]), &NodeSet::from([2]), &NodeSet::from([1])).unwrap());
    }

    #[test]
    fn overlapping_queries_are_rejected() {
        assert_eq!(
            SeparationQuery::new(NodeSet::from([0]), NodeSet::from([0]), NodeSet::new()),
            Err(Error::NotDisjoint)
        );
        assert_eq!(SeparationQuery::new(NodeSet::new(), NodeSet::from([0]), NodeSet::new()), Err(Error::EmptySet("x")));
    }

    #[test]
    fn augment_g2() {
        let g = testgraphs::g2();
        let a = augment(&g);
        assert_eq!(a.node_count(), 9);
        assert_eq!(a.directed_count(), 10);
        assert_eq!(a.bidirected_count(), 0);
        assert!(a.is_latent(7) && a.is_latent(8));
        for v in 0..7 {
            assert_eq!(a.name(v), g.name(v));
        }
        let m = testgraphs::chain(3);
        assert_eq!(augment(&m), m);
        let one = CausalGraph::from_edges(&["A", "B"], &[], &[("A", "B")]).unwrap();
        let a = augment(&one);
        assert_eq!(a.directed_edges(), vec![(2, 0), (2, 1)]);
    }

    #[test]
    fn find_separator_examples() {
        let g = testgraphs::g2();
        let all = g.all_nodes();
        let z = find_separator(&g, &set(&g, &["H"]), &set(&g, &["A"]), &NodeSet::new(), &all).unwrap();
        assert_eq!(z, Some(set(&g, &["B", "C", "D"])));

        let k = testgraphs::bidirected_clique(3);
        let z = find_separator(&k, &NodeSet::from([0]), &NodeSet::from([1]), &NodeSet::new(), &k.all_nodes()).unwrap();
        assert_eq!(z, None);

        let c = testgraphs::chain(3);
        let b = NodeSet::from([1]);
        let z = find_separator(&c, &NodeSet::from([0]), &NodeSet::from([2]), &b, &b).unwrap();
        assert_eq!(z, Some(b));

        assert!(matches!(
            find_separator(&c, &NodeSet::from([0]), &NodeSet::from([2]), &NodeSet::from([1]), &NodeSet::new()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn packed_matches_general_on_g2() {
        let g = testgraphs::g2();
        let p = PackedGraph::new(&g).unwrap();
        let all = g.all_nodes();
        for x in 0..7 {
            for z in 0u64..128 {
                if z & (1 << x) != 0 {
                    continue;
                }
                let general = reachable_within(&g, &NodeSet::singleton(x), &NodeSet::from_mask(z), &all);
                assert_eq!(NodeSet::from_mask(p.reachable(1 << x, z)), general);
            }
        }
    }
}
