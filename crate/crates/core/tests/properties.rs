use std::collections::HashSet;
use std::ops::ControlFlow;

use cilist_core::baselines::oracle::{exhaustive_separator_exists, naive_d_separated, verify};
use cilist_core::baselines::{list_gmp, DEFAULT_GMP_CAP};
use cilist_core::graph::GraphBuilder;
use cilist_core::project::{latent_project, with_latents};
use cilist_core::randgen::{random_graph, RandomGraphSpec};
use cilist_core::separation::{find_separator, is_separated, reachable_within, PackedGraph};
use cilist_core::{collect_ci, default_order, CausalGraph, NodeSet};
use proptest::prelude::*;

fn graph(max_n: usize) -> impl Strategy<Value = CausalGraph> {
    (1..=max_n, 0.0..=0.7f64, 0.0..=0.7f64, any::<u64>())
        .prop_map(|(n, pd, pb, seed)| random_graph(&RandomGraphSpec::new(n, pd, pb, seed).unwrap()).unwrap())
}

fn subset(n: usize, mask: u64) -> NodeSet {
    (0..n).filter(|v| mask >> v & 1 == 1).collect()
}

/// Random disjoint `(x, y, z)` with `x`, `y` nonempty, or `None`.
fn triple(n: usize, labels: &[u8]) -> Option<(NodeSet, NodeSet, NodeSet)> {
    let pick = |k| (0..n).filter(|&v| labels[v] % 4 == k).collect::<NodeSet>();
    let (x, y, z) = (pick(0), pick(1), pick(2));
    (!x.is_empty() && !y.is_empty()).then_some((x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn components_partition(g in graph(10)) {
        for x in 0..g.node_count() {
            let c = g.c_component(x).unwrap();
            prop_assert!(c.contains(x));
            prop_assert!(g.spouses(&c).unwrap().is_subset(&c));
            for y in 0..g.node_count() {
                prop_assert_eq!(c.contains(y), g.c_component(y).unwrap().contains(x));
            }
        }
    }

    #[test]
    fn ancestry_duality(g in graph(10), mask in any::<u64>()) {
        let n = g.node_count();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(
                    g.ancestors(&NodeSet::singleton(x)).unwrap().contains(y),
                    g.descendants(&NodeSet::singleton(y)).unwrap().contains(x)
                );
            }
        }
        let s = subset(n, mask);
        prop_assert!(g.is_ancestral(&g.ancestors(&s).unwrap()).unwrap());
    }

    #[test]
    fn separation_matches_path_enumeration(g in graph(7), labels in prop::collection::vec(any::<u8>(), 7)) {
        let n = g.node_count();
        if let Some((x, y, z)) = triple(n, &labels) {
            let fast = is_separated(&g, &x, &y, &z).unwrap();
            prop_assert_eq!(fast, naive_d_separated(&g, &x, &y, &z));
            prop_assert_eq!(fast, is_separated(&g, &y, &x, &z).unwrap());
            if fast {
                for (t, h) in g.directed_edges() {
                    let mut b = GraphBuilder::new();
                    for v in 0..n { b.add_node(g.name(v)).unwrap(); }
                    for e in g.directed_edges().into_iter().filter(|&e| e != (t, h)) { b.add_directed(e.0, e.1).unwrap(); }
                    for (a, c) in g.bidirected_edges() { b.add_bidirected(a, c).unwrap(); }
                    prop_assert!(is_separated(&b.build(), &x, &y, &z).unwrap());
                }
            }
        }
    }

    #[test]
    fn packed_matches_general(g in graph(12), xm in any::<u64>(), zm in any::<u64>()) {
        let n = g.node_count();
        let full = (1u64 << n) - 1;
        let (x, z) = (xm & full, zm & full & !xm);
        let p = PackedGraph::new(&g).unwrap();
        let general = reachable_within(&g, &NodeSet::from_mask(x), &NodeSet::from_mask(z), &g.all_nodes());
        prop_assert_eq!(NodeSet::from_mask(p.reachable(x, z)), general);
    }

    #[test]
    fn implicit_latents_match_augmented(g in graph(7), labels in prop::collection::vec(any::<u8>(), 7)) {
        if let Some((x, y, z)) = triple(g.node_count(), &labels) {
            let a = cilist_core::augment(&g);
            prop_assert_eq!(is_separated(&g, &x, &y, &z).unwrap(), is_separated(&a, &x, &y, &z).unwrap());
        }
    }

    #[test]
    fn separator_search_is_complete(g in graph(6)) {
        let n = g.node_count();
        for x in 0..n {
            for y in 0..n {
                if x == y { continue; }
                let (xs, ys) = (NodeSet::singleton(x), NodeSet::singleton(y));
                for r in 0u64..1 << n {
                    let mut i = r;
                    loop {
                        let (is, rs) = (subset(n, i), subset(n, r));
                        let found = find_separator(&g, &xs, &ys, &is, &rs).unwrap();
                        prop_assert_eq!(found.is_some(), exhaustive_separator_exists(&g, &xs, &ys, &is, &rs));
                        if let Some(z) = found {
                            prop_assert!(is_separated(&g, &xs, &ys, &z).unwrap());
                            let xy = xs.union(&ys);
                            prop_assert!(is.difference(&xy).is_subset(&z) && z.is_subset(&rs.difference(&xy)));
                        }
                        if i == 0 { break; }
                        i = (i - 1) & r;
                    }
                }
            }
        }
    }

    #[test]
    fn enumerator_matches_oracles(g in graph(8)) {
        let o = default_order(&g);
        for c in verify(&g, &o).unwrap() {
            prop_assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn projection_preserves_separation(g in graph(8), hide in any::<u64>()) {
        let n = g.node_count();
        let mut hidden = subset(n, hide);
        if hidden.len() == n {
            hidden.remove(0);
        }
        let lg = with_latents(&g, &hidden).unwrap();
        let p = latent_project(&lg).unwrap();
        let observed = lg.observed().to_vec();
        let m = observed.len();
        let a = PackedGraph::new(&lg).unwrap();
        let b = PackedGraph::new(&p).unwrap();
        let lift = |mask: u64| (0..m).filter(|k| mask >> k & 1 == 1).fold(0u64, |acc, k| acc | 1 << observed[k]);
        let full = (1u64 << m) - 1;
        for z in 0..=full {
            let mut x = full & !z;
            while x != 0 {
                let reach_p = b.reachable(x, z) & full;
                let reach_g = a.reachable(lift(x), lift(z));
                prop_assert_eq!(lift(reach_p), reach_g & lift(full));
                x = (x - 1) & (full & !z);
            }
        }
    }
}

#[test]
fn listed_statements_are_gmp_statements() {
    for seed in 0..40 {
        let g = random_graph(&RandomGraphSpec::new(7, 0.3, 0.3, seed).unwrap()).unwrap();
        let mut gmp = HashSet::new();
        let _ = list_gmp(&g, DEFAULT_GMP_CAP, |x, y, z| {
            gmp.insert((x.clone(), y.clone(), z.clone()));
            ControlFlow::Continue(())
        })
        .unwrap();
        for ci in collect_ci(&g, &default_order(&g)).unwrap() {
            let x = NodeSet::singleton(ci.x);
            let hit = gmp.contains(&(x.clone(), ci.w.clone(), ci.z.clone()))
                || gmp.contains(&(ci.w.clone(), x, ci.z.clone()));
            assert!(hit, "seed {seed}: statement missing from the global listing");
        }
        for (x, y, z) in &gmp {
            assert!(naive_d_separated(&g, x, y, z));
        }
    }
}
