//! The ordered local Markov property by brute force over ancestral sets, and
//! the ancestral c-component oracle built on the same enumeration.

use std::collections::HashSet;
use std::ops::ControlFlow;

use crate::clmp::CiStatement;
use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::nodeset::NodeSet;
use crate::order::{check_order, VariableOrder};

pub const DEFAULT_BF_CAP: usize = 20;
pub const DEFAULT_ACS_CAP: usize = 16;

/// `mb(x, s)` together with the set it was computed from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovBlanketResult {
    pub x: usize,
    pub s: NodeSet,
    pub mb: NodeSet,
}

/// Parents, within `G_s`, of the c-component of `x` in `G_s`, minus `x`.
pub fn markov_blanket(g: &CausalGraph, x: usize, s: &NodeSet) -> Result<MarkovBlanketResult> {
    g.check_node(x)?;
    if !s.contains(x) {
        return Err(Error::Precondition(format!("`{}` is not in the set", g.name(x))));
    }
    if !g.is_ancestral(s)? {
        return Err(Error::NotAncestral);
    }
    Ok(MarkovBlanketResult { x, s: s.clone(), mb: blanket(g, x, s) })
}

fn blanket(g: &CausalGraph, x: usize, s: &NodeSet) -> NodeSet {
    let mut mb = g.parents_unchecked(&g.c_component_within(x, s));
    mb.intersect_with(s);
    mb.remove(x);
    mb
}

/// Whether `s` is the largest ancestral set inducing `mb(x, s)`, using
/// `s == V<=x \ De(h)` with `h = Spo(C) \ (mb ∪ {x})`.
pub fn is_maximal_ancestral(g: &CausalGraph, order: &VariableOrder, x: usize, s: &NodeSet) -> Result<bool> {
    markov_blanket(g, x, s)?;
    let scope = order.prefix(x);
    if !s.is_subset(&scope) {
        return Err(Error::Precondition("set reaches past x in the order".into()));
    }
    Ok(maximal(g, x, s, &scope, &blanket(g, x, s)))
}

fn maximal(g: &CausalGraph, x: usize, s: &NodeSet, scope: &NodeSet, mb: &NodeSet) -> bool {
    let c = g.c_component_within(x, s);
    let mut h = g.spouses_within(&c, scope).difference(mb);
    h.remove(x);
    *s == scope.difference(&g.descendants_within(&h, scope))
}

/// Calls `f` on every ancestral set `S` with `base ⊆ S ⊆ scope`. `base` must
/// be ancestral, and `scope` ancestral and listed in topological order by
/// `topo`. Sets are built by deciding nodes in order and adding a node only
/// once all its parents are present, so nothing is generated and discarded.
pub fn for_each_ancestral_superset<F>(g: &CausalGraph, base: &NodeSet, topo: &[usize], mut f: F) -> ControlFlow<()>
where
    F: FnMut(&NodeSet) -> ControlFlow<()>,
{
    let free: Vec<usize> = topo.iter().copied().filter(|v| !base.contains(*v)).collect();
    let mut cur = base.clone();
    descend(g, &free, 0, &mut cur, &mut f)
}

fn descend<F>(g: &CausalGraph, free: &[usize], k: usize, cur: &mut NodeSet, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(&NodeSet) -> ControlFlow<()>,
{
    let Some(&v) = free.get(k) else {
        return f(cur);
    };
    descend(g, free, k + 1, cur, f)?;
    if g.parents_of(v).iter().all(|&p| cur.contains(p)) {
        cur.insert(v);
        let flow = descend(g, free, k + 1, cur, f);
        cur.remove(v);
        flow?;
    }
    ControlFlow::Continue(())
}

fn check(g: &CausalGraph, order: &VariableOrder, what: &'static str, cap: usize, candidates: u128) -> Result<()> {
    if g.has_latents() {
        return Err(Error::HasLatents);
    }
    let n = g.node_count();
    if n > cap {
        return Err(Error::CapExceeded { what, n, cap, candidates });
    }
    check_order(g, order)
}

fn ancestral_upper_bound(n: usize) -> u128 {
    (n as u128) << n.saturating_sub(1).min(126)
}

/// Streams `x _||_ S \ (mb ∪ {x}) | mb` for every `x` and every maximal
/// ancestral `S` in `V<=x`, vacuous statements included. The sink also
/// receives `S`.
pub fn list_ci_bf<F>(g: &CausalGraph, order: &VariableOrder, cap: usize, mut sink: F) -> Result<ControlFlow<()>>
where
    F: FnMut(&NodeSet, CiStatement) -> ControlFlow<()>,
{
    check(g, order, "listcibf", cap, ancestral_upper_bound(g.node_count()))?;
    for (rank, &x) in order.sequence().iter().enumerate() {
        let topo = &order.sequence()[..=rank];
        let scope: NodeSet = topo.iter().copied().collect();
        let base = g.ancestors_within(&NodeSet::singleton(x), &scope);
        let flow = for_each_ancestral_superset(g, &base, topo, |s| {
            let mb = blanket(g, x, s);
            if !maximal(g, x, s, &scope, &mb) {
                return ControlFlow::Continue(());
            }
            let mut w = s.difference(&mb);
            w.remove(x);
            sink(s, CiStatement { x, w, z: mb })
        });
        if flow.is_break() {
            return Ok(flow);
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// Every distinct `C(x)` in `G_S` over ancestral `S` with `x ∈ S ⊆ V<=x`,
/// in discovery order.
pub fn brute_force_acs(g: &CausalGraph, x: usize, order: &VariableOrder, cap: usize) -> Result<Vec<NodeSet>> {
    check(g, order, "brute_force_acs", cap, 1u128 << g.node_count().min(127))?;
    let Some(rank) = order.rank(x) else {
        return Err(Error::Precondition(format!("`{}` is not in the order", g.name(x))));
    };
    let topo = &order.sequence()[..=rank];
    let scope: NodeSet = topo.iter().copied().collect();
    let base = g.ancestors_within(&NodeSet::singleton(x), &scope);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let _ = for_each_ancestral_superset(g, &base, topo, |s| {
        let c = g.c_component_within(x, s);
        if seen.insert(c.clone()) {
            out.push(c);
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}
