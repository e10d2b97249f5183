//! Slow, independent checks for small graphs. Used by the property tests,
//! the acceptance suite and `cilist verify`.

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

use crate::clmp::{list_ci_with_acs, AcContext, CiStatement};
use crate::error::Result;
use crate::graph::CausalGraph;
use crate::nodeset::NodeSet;
use crate::order::VariableOrder;
use crate::separation::{d_separated_within, find_separator_within};

use super::lmp::{brute_force_acs, list_ci_bf, DEFAULT_ACS_CAP, DEFAULT_BF_CAP};

/// d-separation by walking every simple path and checking each interior
/// node: colliders must be ancestors of `z`, non-colliders outside `z`.
pub fn naive_d_separated(g: &CausalGraph, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> bool {
    let an_z = g.ancestors_within(z, &g.all_nodes());
    let mut on_path = vec![false; g.node_count()];
    !x.iter().any(|s| {
        on_path[s] = true;
        let hit = open_path_from(g, s, None, y, z, &an_z, &mut on_path);
        on_path[s] = false;
        hit
    })
}

fn open_path_from(
    g: &CausalGraph,
    v: usize,
    head_into_v: Option<bool>,
    y: &NodeSet,
    z: &NodeSet,
    an_z: &NodeSet,
    on_path: &mut Vec<bool>,
) -> bool {
    // (neighbour, arrowhead at v, arrowhead at neighbour)
    let steps = g
        .parents_of(v)
        .iter()
        .map(|&u| (u, true, false))
        .chain(g.children_of(v).iter().map(|&u| (u, false, true)))
        .chain(g.spouses_of(v).iter().map(|&u| (u, true, true)))
        .collect::<Vec<_>>();
    for (u, at_v, at_u) in steps {
        if on_path[u] {
            continue;
        }
        if let Some(into_v) = head_into_v {
            let open = if into_v && at_v { an_z.contains(v) } else { !z.contains(v) };
            if !open {
                continue;
            }
        }
        if y.contains(u) {
            return true;
        }
        on_path[u] = true;
        let hit = open_path_from(g, u, Some(at_u), y, z, an_z, on_path);
        on_path[u] = false;
        if hit {
            return true;
        }
    }
    false
}

/// Whether any `Z` with `i \ (x ∪ y) ⊆ Z ⊆ r \ (x ∪ y)` separates, by trying
/// each one.
pub fn exhaustive_separator_exists(g: &CausalGraph, x: &NodeSet, y: &NodeSet, i: &NodeSet, r: &NodeSet) -> bool {
    let xy = x.union(y);
    let lo = i.difference(&xy);
    let extra = r.difference(&xy).difference(&lo).to_vec();
    let all = g.all_nodes();
    (0u64..1 << extra.len()).any(|pick| {
        let mut z = lo.clone();
        z.extend(extra.iter().enumerate().filter(|(k, _)| pick >> k & 1 == 1).map(|(_, &v)| v));
        d_separated_within(g, x, y, &z, &all)
    })
}

/// Non-vacuous statements of every ancestral c-component found by
/// brute force, for all `x`.
pub fn statements_from_all_acs(g: &CausalGraph, order: &VariableOrder) -> Result<HashSet<CiStatement>> {
    let mut out = HashSet::new();
    for &x in order.sequence() {
        let ctx = AcContext::new(g, order, x)?;
        for c in brute_force_acs(g, x, order, DEFAULT_ACS_CAP)? {
            let ci = ctx.ci_from_ac(&c)?;
            if !ci.is_vacuous() {
                out.insert(ci);
            }
        }
    }
    Ok(out)
}

/// One line of a [`verify`] report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failures: Vec<String>) -> Self {
        let passed = failures.is_empty();
        let detail = match failures.len() {
            0 => String::new(),
            1 => failures[0].clone(),
            k => format!("{} (and {} more)", failures[0], k - 1),
        };
        Self { name, passed, detail }
    }
}

/// Cross-checks the enumerator against the brute-force baselines and
/// d-separation on one graph. Needs at most [`DEFAULT_ACS_CAP`] nodes.
pub fn verify(g: &CausalGraph, order: &VariableOrder) -> Result<Vec<Check>> {
    let mut listed: Vec<(NodeSet, CiStatement)> = Vec::new();
    let _ = list_ci_with_acs(g, order, |c, ci| {
        listed.push((c.clone(), ci));
        ControlFlow::Continue(())
    })?;
    let render = |ci: &CiStatement| crate::format::format_ci(g, ci);
    let all = g.all_nodes();
    let mut checks = Vec::new();

    let mut seen = HashSet::new();
    let dups: Vec<String> =
        listed.iter().filter(|(_, ci)| !seen.insert(ci.clone())).map(|(_, ci)| render(ci)).collect();
    let mut acs = HashSet::new();
    let mut dup_acs: Vec<String> = listed
        .iter()
        .filter(|(c, ci)| !acs.insert((ci.x, c.clone())))
        .map(|(_, ci)| format!("component behind {} repeated", render(ci)))
        .collect();
    dup_acs.extend(dups);
    checks.push(Check::new("no duplicate statements", dup_acs));

    let fast: HashSet<CiStatement> = seen;
    let oracle = statements_from_all_acs(g, order)?;
    checks.push(Check::new("matches brute-force ancestral c-components", diff(&fast, &oracle, render)));

    let mut bf = HashSet::new();
    let mut blankets: HashMap<(usize, NodeSet), NodeSet> = HashMap::new();
    let mut bijection = Vec::new();
    let _ = list_ci_bf(g, order, DEFAULT_BF_CAP.min(DEFAULT_ACS_CAP), |s, ci| {
        if let Some(prev) = blankets.insert((ci.x, ci.z.clone()), s.clone()) {
            bijection.push(format!("blanket of {} reached from {:?} and {:?}", g.name(ci.x), prev, s));
        }
        if !ci.is_vacuous() {
            bf.insert(ci);
        }
        ControlFlow::Continue(())
    })?;
    checks.push(Check::new("matches ordered local Markov (non-vacuous)", diff(&fast, &bf, render)));
    checks.push(Check::new("maximal ancestral sets map one-to-one to blankets", bijection));

    let unsound: Vec<String> = listed
        .iter()
        .filter(|(_, ci)| !d_separated_within(g, &NodeSet::singleton(ci.x), &ci.w, &ci.z, &all))
        .map(|(_, ci)| render(ci))
        .collect();
    checks.push(Check::new("every statement is d-separated", unsound));

    let s = g.largest_c_component();
    let bound = (g.node_count() as u128) << s.min(100);
    let count = Check::new(
        "count within n * 2^s",
        if (listed.len() as u128) <= bound {
            vec![]
        } else {
            vec![format!("{} statements, bound {bound}", listed.len())]
        },
    );
    checks.push(count);

    let mut loose = Vec::new();
    for (c, ci) in &listed {
        let ctx = AcContext::new(g, order, ci.x)?;
        let s_plus = ctx.s_plus(c);
        let xs = NodeSet::singleton(ci.x);
        let mut rest = ctx.scope().difference(&ci.w).difference(&ci.z);
        rest.remove(ci.x);
        for v in rest.iter() {
            let mut w = ci.w.clone();
            w.insert(v);
            if d_separated_within(g, &xs, &w, &ci.z, &all) && s_plus.contains(v) {
                loose.push(format!("{} could absorb {}", render(ci), g.name(v)));
            }
        }
    }
    checks.push(Check::new("witness sets are maximal", loose));

    let mut sep = Vec::new();
    let n = g.node_count();
    'pairs: for x in 0..n {
        for y in x + 1..n {
            let (xs, ys) = (NodeSet::singleton(x), NodeSet::singleton(y));
            let rest: Vec<usize> = (0..n).filter(|&v| v != x && v != y).collect();
            if rest.len() > 8 {
                break 'pairs;
            }
            for mask in 0u64..1 << rest.len() {
                let z: NodeSet = rest.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
                let fast = d_separated_within(g, &xs, &ys, &z, &all);
                if fast != naive_d_separated(g, &xs, &ys, &z) {
                    sep.push(format!("{} vs {} given {:?}", g.name(x), g.name(y), g.sorted_names(&z)));
                }
                let found = find_separator_within(g, &xs, &ys, &NodeSet::new(), &z.union(&xs).union(&ys), &all);
                if found.is_some() != exhaustive_separator_exists(g, &xs, &ys, &NodeSet::new(), &z) {
                    sep.push(format!("separator search for {} and {}", g.name(x), g.name(y)));
                }
            }
        }
    }
    checks.push(Check::new("d-separation agrees with path enumeration", sep));
    Ok(checks)
}

fn diff<F: Fn(&CiStatement) -> String>(a: &HashSet<CiStatement>, b: &HashSet<CiStatement>, render: F) -> Vec<String> {
    let mut out: Vec<String> = a.difference(b).map(|ci| format!("extra {}", render(ci))).collect();
    out.extend(b.difference(a).map(|ci| format!("missing {}", render(ci))));
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::default_order;
    use crate::testgraphs;

    #[test]
    fn naive_agrees_on_examples() {
        let g = testgraphs::g2();
        let s = |n: &[&str]| g.set_of(n).unwrap();
        assert!(naive_d_separated(&g, &s(&["H"]), &s(&["A", "E", "F"]), &s(&["B", "C", "D"])));
        assert!(!naive_d_separated(&g, &s(&["H"]), &s(&["A"]), &NodeSet::new()));
        // C <-> H <- D with D <-> H: conditioning on D still leaves C <-> H.
        assert!(!naive_d_separated(&g, &s(&["H"]), &s(&["C"]), &s(&["D"])));
    }

    #[test]
    fn fixtures_verify() {
        for g in
            [testgraphs::g2(), testgraphs::chain(4), testgraphs::bidirected_clique(4), testgraphs::bidirected_path(5)]
        {
            let o = default_order(&g);
            for c in verify(&g, &o).unwrap() {
                assert!(c.passed, "{}: {}", c.name, c.detail);
            }
        }
    }
}
