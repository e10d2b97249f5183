//! Latent projection onto the observed nodes.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, GraphBuilder};
use crate::nodeset::NodeSet;

/// Projects out every latent node.
///
/// `A -> B` survives iff some directed path `A -> ... -> B` has only latent
/// interior nodes. `A <-> B` appears iff some path between them has
/// arrowheads at both ends and only latent non-colliders inside: either a
/// common latent ancestor reaching both through latent chains, or an existing
/// bidirected edge between the latent-chain ancestries of `A` and `B`.
pub fn latent_project(g: &CausalGraph) -> Result<CausalGraph> {
    let observed = g.observed();
    if observed.is_empty() && g.node_count() > 0 {
        return Err(Error::AllLatent);
    }
    let n = g.node_count();
    // For each observed node: the latents with a latent-only directed path into it.
    let mut hidden_anc: Vec<NodeSet> = vec![NodeSet::new(); n];
    for a in observed.iter() {
        let mut seen = NodeSet::new();
        let mut stack: Vec<usize> = g.parents_of(a).iter().copied().filter(|&p| g.is_latent(p)).collect();
        while let Some(l) = stack.pop() {
            if seen.insert(l) {
                stack.extend(g.parents_of(l).iter().copied().filter(|&p| g.is_latent(p)));
            }
        }
        hidden_anc[a] = seen;
    }

    let mut b = GraphBuilder::new();
    let mut remap = vec![usize::MAX; n];
    for v in observed.iter() {
        remap[v] = b.add_node(g.name(v))?;
    }
    for head in observed.iter() {
        let mut tails: NodeSet = g.parents_of(head).iter().copied().filter(|&p| !g.is_latent(p)).collect();
        for l in hidden_anc[head].iter() {
            tails.extend(g.parents_of(l).iter().copied().filter(|&p| !g.is_latent(p)));
        }
        for t in tails.iter() {
            b.add_directed(remap[t], remap[head])?;
        }
    }
    let reach: Vec<NodeSet> = (0..n)
        .map(|a| {
            let mut s = hidden_anc[a].clone();
            if !g.is_latent(a) {
                s.insert(a);
            }
            s
        })
        .collect();
    let obs: Vec<usize> = observed.to_vec();
    for (k, &a) in obs.iter().enumerate() {
        let touched: NodeSet = reach[a].iter().flat_map(|v| g.spouses_of(v).iter().copied()).collect();
        for &c in &obs[k + 1..] {
            let joined = hidden_anc[a].intersects(&hidden_anc[c]) || touched.intersects(&reach[c]);
            if joined {
                b.add_bidirected(remap[a], remap[c])?;
            }
        }
    }
    Ok(b.build())
}

/// Marks `⌊u·n/100⌋` uniformly chosen nodes latent, then projects.
pub fn project_latents_fraction(g: &CausalGraph, u_percent: f64, seed: u64) -> Result<CausalGraph> {
    if !(0.0..=95.0).contains(&u_percent) {
        return Err(Error::Precondition(format!("latent percentage {u_percent} outside [0, 95]")));
    }
    let n = g.node_count();
    let k = (u_percent * n as f64 / 100.0).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: NodeSet = index::sample(&mut rng, n, k).into_iter().collect();
    latent_project(&with_latents(g, &hidden)?)
}

/// A copy of `g` with the members of `hidden` flagged latent.
pub fn with_latents(g: &CausalGraph, hidden: &NodeSet) -> Result<CausalGraph> {
    g.check_set(hidden)?;
    let mut b = GraphBuilder::new();
    for v in 0..g.node_count() {
        if g.is_latent(v) || hidden.contains(v) {
            b.add_latent(g.name(v))?;
        } else {
            b.add_node(g.name(v))?;
        }
    }
    for (t, h) in g.directed_edges() {
        b.add_directed(t, h)?;
    }
    for (x, y) in g.bidirected_edges() {
        b.add_bidirected(x, y)?;
    }
    let out = b.build();
    if out.observed().is_empty() && out.node_count() > 0 {
        return Err(Error::AllLatent);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgraphs;

    #[test]
    fn g1_projects_to_g2() {
        assert_eq!(latent_project(&testgraphs::g1()).unwrap(), testgraphs::g2());
        let obs = testgraphs::g1_observed();
        let hidden = obs.set_of(&["U1", "U2", "U3"]).unwrap();
        assert_eq!(latent_project(&with_latents(&obs, &hidden).unwrap()).unwrap(), testgraphs::g2());
    }

    #[test]
    fn no_latents_is_identity() {
        let g = testgraphs::g2();
        assert_eq!(latent_project(&g).unwrap(), g);
        assert_eq!(project_latents_fraction(&g, 0.0, 7).unwrap(), g);
    }

    #[test]
    fn fork_becomes_bidirected() {
        let mut b = GraphBuilder::new();
        let l = b.add_latent("L").unwrap();
        let x = b.add_node("X").unwrap();
        let y = b.add_node("Y").unwrap();
        b.add_directed(l, x).unwrap();
        b.add_directed(l, y).unwrap();
        let p = latent_project(&b.build()).unwrap();
        assert_eq!(p, CausalGraph::from_edges(&["X", "Y"], &[], &[("X", "Y")]).unwrap());
    }

    #[test]
    fn chains_and_confounded_latents() {
        // A -> L1 -> B keeps A -> B; L1 <-> C gives B <-> C; L2 -> L1 and L2 -> D gives B <-> D.
        let mut b = GraphBuilder::new();
        for name in ["A", "B", "C", "D"] {
            b.add_node(name).unwrap();
        }
        let l1 = b.add_latent("L1").unwrap();
        let l2 = b.add_latent("L2").unwrap();
        b.add_directed(0, l1).unwrap();
        b.add_directed(l1, 1).unwrap();
        b.add_bidirected(l1, 2).unwrap();
        b.add_directed(l2, l1).unwrap();
        b.add_directed(l2, 3).unwrap();
        let p = latent_project(&b.build()).unwrap();
        let want = CausalGraph::from_edges(&["A", "B", "C", "D"], &[("A", "B")], &[("B", "C"), ("B", "D")]).unwrap();
        assert_eq!(p, want);
    }

    #[test]
    fn fraction_is_seeded() {
        let g = testgraphs::g1_observed();
        let a = project_latents_fraction(&g, 30.0, 11).unwrap();
        assert_eq!(a.node_count(), 7);
        assert_eq!(a, project_latents_fraction(&g, 30.0, 11).unwrap());
        assert!(project_latents_fraction(&g, 96.0, 1).is_err());
    }
}
