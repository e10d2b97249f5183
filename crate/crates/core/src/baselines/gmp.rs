//! Every d-separation statement of a graph.

use std::cmp::Ordering;
use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::nodeset::NodeSet;
use crate::separation::PackedGraph;

pub const DEFAULT_GMP_CAP: usize = 14;

/// Number of triples `(X, Y, Z)` with `X`, `Y` nonempty, all three disjoint,
/// and `{X, Y}` unordered: `(4^n + 2^n) / 2 - 3^n`.
pub fn gmp_candidate_count(n: usize) -> u128 {
    let n = n as u32;
    (4u128.pow(n) + 2u128.pow(n)) / 2 - 3u128.pow(n)
}

fn packed(g: &CausalGraph, cap: usize) -> Result<PackedGraph> {
    if g.has_latents() {
        return Err(Error::HasLatents);
    }
    let n = g.node_count();
    let over = |cap| Error::CapExceeded { what: "listgmp", n, cap, candidates: gmp_candidate_count(n) };
    if n > cap {
        return Err(over(cap));
    }
    PackedGraph::new(g).ok_or_else(|| over(64))
}

/// Nonempty submasks of `mask`, descending.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut sub = mask;
    std::iter::from_fn(move || {
        if sub == 0 {
            return None;
        }
        let out = sub;
        sub = (sub - 1) & mask;
        Some(out)
    })
}

/// Counts the statements [`list_gmp`] would emit without materialising them.
///
/// For each disjoint `(X, Z)` a single reachability pass yields every node
/// d-connected to `X`; any nonempty `Y` among the rest is separated.
pub fn count_gmp(g: &CausalGraph, cap: usize) -> Result<u64> {
    let p = packed(g, cap)?;
    let full = p.full();
    let ordered: u64 = (0..=full)
        .into_par_iter()
        .map(|z| {
            let mut total = 0u64;
            for x in submasks(full & !z) {
                let free = full & !(x | z | p.reachable(x, z));
                total += (1u64 << free.count_ones()) - 1;
            }
            total
        })
        .sum();
    Ok(ordered / 2)
}

/// Streams every separated `(X, Y, Z)` once, oriented so that the sorted
/// names of `X` precede those of `Y`.
pub fn list_gmp<F>(g: &CausalGraph, cap: usize, mut sink: F) -> Result<ControlFlow<()>>
where
    F: FnMut(&NodeSet, &NodeSet, &NodeSet) -> ControlFlow<()>,
{
    let p = packed(g, cap)?;
    let full = p.full();
    let key = |m: u64| -> Vec<&str> {
        let mut v: Vec<&str> = crate::separation::bits(m).map(|i| g.name(i)).collect();
        v.sort_unstable();
        v
    };
    for z in 0..=full {
        let zs = NodeSet::from_mask(z);
        for x in submasks(full & !z) {
            let free = full & !(x | z | p.reachable(x, z));
            if free == 0 {
                continue;
            }
            let kx = key(x);
            let xs = NodeSet::from_mask(x);
            for y in submasks(free) {
                if key(y).cmp(&kx) == Ordering::Greater && sink(&xs, &NodeSet::from_mask(y), &zs).is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
        }
    }
    Ok(ControlFlow::Continue(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separation::is_separated;
    use crate::testgraphs;

    #[test]
    fn closed_form() {
        assert_eq!(gmp_candidate_count(3), 9);
        assert_eq!(gmp_candidate_count(10), 465_751);
        for n in 2..=6 {
            let g = CausalGraph::empty(n);
            assert_eq!(count_gmp(&g, DEFAULT_GMP_CAP).unwrap() as u128, gmp_candidate_count(n));
        }
    }

    #[test]
    fn g2_has_753() {
        let g = testgraphs::g2();
        assert_eq!(count_gmp(&g, DEFAULT_GMP_CAP).unwrap(), 753);
        let mut listed = 0;
        let _ = list_gmp(&g, DEFAULT_GMP_CAP, |x, y, z| {
            assert!(is_separated(&g, x, y, z).unwrap());
            listed += 1;
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(listed, 753);
    }

    #[test]
    fn cap_is_enforced() {
        let g = CausalGraph::empty(5);
        assert_eq!(
            count_gmp(&g, 4),
            Err(Error::CapExceeded { what: "listgmp", n: 5, cap: 4, candidates: gmp_candidate_count(5) })
        );
        assert_eq!(count_gmp(&testgraphs::g1(), 20), Err(Error::HasLatents));
    }
}
