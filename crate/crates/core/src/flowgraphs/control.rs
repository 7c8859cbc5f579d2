use std::collections::BTreeSet;

use super::cfg::{Cfg, NodeId};
use super::postdom::{post_dominators, GraphError, PostDomTree};

/// Control-dependence edges `(governor, dependent)`.
///
/// `b` depends on `a` iff `a` has a successor `s` that `b` post-dominates and
/// `b` does not strictly post-dominate `a`. Each CFG edge `a -> s` marks the
/// post-dominator tree path from `s` up to, but excluding, `ipdom(a)`.
pub fn control_dependence_with(g: &Cfg, pdt: &PostDomTree) -> BTreeSet<(NodeId, NodeId)> {
    let mut deps = BTreeSet::new();
    for (a, s, _) in g.edges() {
        let stop = pdt.ipdom(a);
        let mut runner = Some(s);
        while let Some(r) = runner {
            if Some(r) == stop {
                break;
            }
            deps.insert((a, r));
            runner = pdt.ipdom(r);
        }
    }
    deps
}

pub fn control_dependence(g: &Cfg) -> Result<BTreeSet<(NodeId, NodeId)>, GraphError> {
    Ok(control_dependence_with(g, &post_dominators(g)?))
}
