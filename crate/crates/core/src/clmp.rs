//! Ancestral c-components and the polynomial-delay CI enumerator.
//!
//! For a node `x` and an ancestral c-component `C` of `x`, the statement is
//! `x _||_ S+ \ Pa(C) | Pa(C) \ {x}` with
//! `S+ = V<=x \ De(Spo(C) \ Pa(C))`. Every computation for `x` happens inside
//! `V<=x`, which is ancestral under a topological order, so working "within"
//! that scope is the same as working on the induced subgraph.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::nodeset::NodeSet;
use crate::order::{check_order, VariableOrder};
use crate::separation::find_separator_within;

/// `x _||_ w | z` with `{x}`, `w`, `z` pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CiStatement {
    pub x: usize,
    pub w: NodeSet,
    pub z: NodeSet,
}

impl CiStatement {
    pub fn new(x: usize, w: NodeSet, z: NodeSet) -> Result<Self> {
        if w.contains(x) || z.contains(x) || w.intersects(&z) {
            return Err(Error::NotDisjoint);
        }
        Ok(Self { x, w, z })
    }

    /// A statement with an empty witness holds trivially.
    pub fn is_vacuous(&self) -> bool {
        self.w.is_empty()
    }
}

/// The search state for one node: the graph, the order and `V<=x`.
#[derive(Clone, Debug)]
pub struct AcContext<'g> {
    graph: &'g CausalGraph,
    order: &'g VariableOrder,
    x: usize,
    scope: NodeSet,
}

impl<'g> AcContext<'g> {
    pub fn new(graph: &'g CausalGraph, order: &'g VariableOrder, x: usize) -> Result<Self> {
        graph.check_node(x)?;
        if order.rank(x).is_none() {
            return Err(Error::Precondition(format!("`{}` is not in the order", graph.name(x))));
        }
        Ok(Self { graph, order, x, scope: order.prefix(x) })
    }

    pub fn x(&self) -> usize {
        self.x
    }

    /// `V<=x`.
    pub fn scope(&self) -> &NodeSet {
        &self.scope
    }

    /// `C(x)` in the subgraph induced on `s ∩ V<=x`.
    pub fn component_in(&self, s: &NodeSet) -> NodeSet {
        self.graph.c_component_within(self.x, &s.intersection(&self.scope))
    }

    /// `C(x)` over `An({x})`: the smallest ancestral c-component.
    pub fn smallest_ac(&self) -> NodeSet {
        let an = self.graph.ancestors_within(&NodeSet::singleton(self.x), &self.scope);
        self.graph.c_component_within(self.x, &an)
    }

    /// `C(x)` over `V<=x`: the largest ancestral c-component.
    pub fn largest_ac(&self) -> NodeSet {
        self.graph.c_component_within(self.x, &self.scope)
    }

    /// Whether `c` is `C(x)` in the subgraph induced on some ancestral set
    /// inside `V<=x`. It suffices to try `An(c)`.
    pub fn is_ac(&self, c: &NodeSet) -> bool {
        c.contains(self.x)
            && c.is_subset(&self.scope)
            && self.graph.c_component_within(self.x, &self.graph.ancestors_within(c, &self.scope)) == *c
    }

    fn require_ac(&self, c: &NodeSet) -> Result<()> {
        if self.is_ac(c) {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "{{{}}} is not an ancestral c-component of `{}`",
                self.graph.sorted_names(c).join(","),
                self.graph.name(self.x)
            )))
        }
    }

    /// The statement induced by the ancestral c-component `c`; `w` may be empty.
    pub fn ci_from_ac(&self, c: &NodeSet) -> Result<CiStatement> {
        self.require_ac(c)?;
        Ok(self.ci_unchecked(c))
    }

    pub(crate) fn ci_unchecked(&self, c: &NodeSet) -> CiStatement {
        let pa = self.graph.parents_unchecked(c);
        let w = self.s_plus_with(c, &pa).difference(&pa);
        let mut z = pa;
        z.remove(self.x);
        CiStatement { x: self.x, w, z }
    }

    /// `V<=x \ De(Spo(c) \ Pa(c))`.
    pub fn s_plus(&self, c: &NodeSet) -> NodeSet {
        self.s_plus_with(c, &self.graph.parents_unchecked(c))
    }

    fn s_plus_with(&self, c: &NodeSet, pa: &NodeSet) -> NodeSet {
        let h = self.graph.spouses_within(c, &self.scope).difference(pa);
        self.scope.difference(&self.graph.descendants_within(&h, &self.scope))
    }

    /// Whether `c` induces a non-vacuous statement.
    pub fn is_admissible(&self, c: &NodeSet) -> Result<bool> {
        self.require_ac(c)?;
        Ok(self.admissible_unchecked(c))
    }

    fn admissible_unchecked(&self, c: &NodeSet) -> bool {
        let pa = self.graph.parents_unchecked(c);
        !self.s_plus_with(c, &pa).is_subset(&pa)
    }

    /// An admissible ancestral c-component `C` with `i ⊆ C ⊆ r`, if any.
    pub fn find_aac(&self, i: &NodeSet, r: &NodeSet) -> Result<Option<NodeSet>> {
        self.require_ac(i)?;
        self.require_ac(r)?;
        if !i.is_subset(r) {
            return Err(Error::Precondition("find_aac requires i ⊆ r".into()));
        }
        Ok(self.find_aac_unchecked(i, r))
    }

    fn find_aac_unchecked(&self, i: &NodeSet, r: &NodeSet) -> Option<NodeSet> {
        let g = self.graph;
        let pa_i = g.parents_unchecked(i);
        if !self.s_plus_with(i, &pa_i).is_subset(&pa_i) {
            return Some(i.clone());
        }
        let pa_r = g.parents_unchecked(r);
        let h = g.spouses_within(i, &self.scope).difference(&pa_i);
        let candidates = g.descendants_within(&h, &self.scope);
        let xs = NodeSet::singleton(self.x);
        for d in self.order.sort_by_rank(&candidates) {
            if d == self.x {
                continue;
            }
            let ds = NodeSet::singleton(d);
            if let Some(z) = find_separator_within(g, &xs, &ds, &pa_i, &pa_r, &self.scope) {
                let an = g.ancestors_within(&i.union(&z), &self.scope);
                return Some(g.c_component_within(self.x, &an));
            }
        }
        None
    }

    /// Streams every non-vacuous statement whose ancestral c-component lies
    /// between `i` and `r`, depth first with the "shrink `r`" branch first.
    pub fn list_ci_x<F>(&self, i: &NodeSet, r: &NodeSet, mut sink: F) -> Result<ControlFlow<()>>
    where
        F: FnMut(CiStatement) -> ControlFlow<()>,
    {
        self.require_ac(i)?;
        self.require_ac(r)?;
        if !i.is_subset(r) {
            return Err(Error::Precondition("list_ci_x requires i ⊆ r".into()));
        }
        Ok(self.walk(i.clone(), r.clone(), &mut |_, ci| sink(ci), &never))
    }

    fn walk<F>(&self, i: NodeSet, r: NodeSet, sink: &mut F, stop: &dyn Fn() -> bool) -> ControlFlow<()>
    where
        F: FnMut(&NodeSet, CiStatement) -> ControlFlow<()>,
    {
        let g = self.graph;
        let mut stack = vec![(i, r)];
        while let Some((i, r)) = stack.pop() {
            if stop() {
                return ControlFlow::Break(());
            }
            if self.find_aac_unchecked(&i, &r).is_none() {
                continue;
            }
            if i == r {
                let ci = self.ci_unchecked(&i);
                sink(&i, ci)?;
                continue;
            }
            let t = g.spouses_within(&i, &self.scope).difference(&i).intersection(&r);
            let Some(s) = self.order.min_by_rank(&t) else {
                debug_assert!(false, "a proper sub-component always borders r");
                continue;
            };
            let ss = NodeSet::singleton(s);
            let r_without = r.difference(&g.descendants_within(&ss, &self.scope));
            let r2 = g.c_component_within(self.x, &r_without);
            let i2 = g.c_component_within(self.x, &g.ancestors_within(&i.union(&ss), &self.scope));
            stack.push((i2, r));
            stack.push((i, r2));
        }
        ControlFlow::Continue(())
    }

    fn walk_all<F>(&self, sink: &mut F, stop: &dyn Fn() -> bool) -> ControlFlow<()>
    where
        F: FnMut(&NodeSet, CiStatement) -> ControlFlow<()>,
    {
        self.walk(self.smallest_ac(), self.largest_ac(), sink, stop)
    }
}

fn never() -> bool {
    false
}

fn check_input(g: &CausalGraph, order: &VariableOrder) -> Result<()> {
    if g.has_latents() {
        return Err(Error::HasLatents);
    }
    if order.len() != g.node_count() {
        return Err(Error::OrderCoverage("order does not cover the graph".into()));
    }
    check_order(g, order)
}

/// Streams every non-vacuous statement of the c-component local Markov
/// property, grouped by `x` in order. Returns `Break` if the sink stopped
/// the enumeration early.
pub fn list_ci<F>(g: &CausalGraph, order: &VariableOrder, mut sink: F) -> Result<ControlFlow<()>>
where
    F: FnMut(CiStatement) -> ControlFlow<()>,
{
    list_ci_with_acs(g, order, |_, ci| sink(ci))
}

/// [`list_ci`], also passing the ancestral c-component behind each statement.
pub fn list_ci_with_acs<F>(g: &CausalGraph, order: &VariableOrder, sink: F) -> Result<ControlFlow<()>>
where
    F: FnMut(&NodeSet, CiStatement) -> ControlFlow<()>,
{
    list_ci_until(g, order, &never, sink)
}

/// [`list_ci_with_acs`] that also gives up, returning `Break`, once `stop`
/// returns true. `stop` is polled at every node of the search tree, so it
/// fires even while no statement is being produced.
pub fn list_ci_until<F>(
    g: &CausalGraph,
    order: &VariableOrder,
    stop: &dyn Fn() -> bool,
    mut sink: F,
) -> Result<ControlFlow<()>>
where
    F: FnMut(&NodeSet, CiStatement) -> ControlFlow<()>,
{
    check_input(g, order)?;
    for &x in order.sequence() {
        if AcContext::new(g, order, x)?.walk_all(&mut sink, stop).is_break() {
            return Ok(ControlFlow::Break(()));
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// Collects [`list_ci`] output.
pub fn collect_ci(g: &CausalGraph, order: &VariableOrder) -> Result<Vec<CiStatement>> {
    let mut out = Vec::new();
    let _ = list_ci(g, order, |ci| {
        out.push(ci);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Like [`collect_ci`] but enumerates different `x` on the rayon pool. The
/// result is in the same order as the sequential stream.
pub fn collect_ci_parallel(g: &CausalGraph, order: &VariableOrder) -> Result<Vec<CiStatement>> {
    check_input(g, order)?;
    let per_x = order
        .sequence()
        .par_iter()
        .map(|&x| {
            let ctx = AcContext::new(g, order, x)?;
            let mut out = Vec::new();
            let _ = ctx.walk_all(
                &mut |_, ci| {
                    out.push(ci);
                    ControlFlow::Continue(())
                },
                &never,
            );
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_x.into_iter().flatten().collect())
}
