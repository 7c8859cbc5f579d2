use std::collections::{BTreeSet, VecDeque};

use super::cfg::{Cfg, NodeId};
use super::defuse::{DefUse, Var};
use crate::frontend::FunctionAst;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataDep {
    pub from: NodeId,
    pub to: NodeId,
    pub var: Var,
}

/// Def/use sets for every node of a function CFG. The entry node defines the
/// parameters; exit is empty.
pub fn function_def_use(g: &Cfg, f: &FunctionAst) -> Vec<DefUse> {
    let mut out = vec![DefUse::default(); g.node_count()];
    for s in &f.statements {
        out[s.id.index()] = DefUse::of_statement(&s.kind);
    }
    out[g.entry()].defs = f.params.iter().map(|p| Var::Plain(p.name.clone())).collect();
    out
}

/// Worklist reaching-definitions; returns for each node the set of
/// definitions `(node, var)` that reach its entry.
pub fn reaching_definitions(g: &Cfg, du: &[DefUse]) -> Vec<BTreeSet<(NodeId, Var)>> {
    let n = g.node_count();
    let defs: Vec<(NodeId, Var)> =
        (0..n).flat_map(|node| du[node].defs.iter().map(move |v| (node, v.clone()))).collect();
    let words = defs.len().div_ceil(64);

    let mut gen = vec![vec![0u64; words]; n];
    let mut kill = vec![vec![0u64; words]; n];
    for (i, (node, _)) in defs.iter().enumerate() {
        gen[*node][i / 64] |= 1 << (i % 64);
    }
    // Any definition of a variable kills every other definition of it.
    for (node, du_node) in du.iter().enumerate() {
        for (i, (_, var)) in defs.iter().enumerate() {
            if du_node.defs.contains(var) {
                kill[node][i / 64] |= 1 << (i % 64);
            }
        }
    }

    let mut inn = vec![vec![0u64; words]; n];
    let mut out = gen.clone();
    let mut queue: VecDeque<NodeId> = g.reverse_post_order().into_iter().collect();
    let mut queued = vec![false; n];
    for &q in &queue {
        queued[q] = true;
    }
    // Nodes unreachable from entry still get a fixed point.
    for node in 0..n {
        if !queued[node] {
            queued[node] = true;
            queue.push_back(node);
        }
    }
    while let Some(node) = queue.pop_front() {
        queued[node] = false;
        let mut new_in = vec![0u64; words];
        for &p in g.predecessors(node) {
            for (w, o) in new_in.iter_mut().zip(&out[p]) {
                *w |= o;
            }
        }
        let new_out: Vec<u64> =
            (0..words).map(|w| gen[node][w] | (new_in[w] & !kill[node][w])).collect();
        inn[node] = new_in;
        if new_out != out[node] {
            out[node] = new_out;
            for s in g.successors(node) {
                if !queued[s] {
                    queued[s] = true;
                    queue.push_back(s);
                }
            }
        }
    }

    inn.iter()
        .map(|bits| {
            defs.iter()
                .enumerate()
                .filter(|(i, _)| bits[i / 64] >> (i % 64) & 1 == 1)
                .map(|(_, d)| d.clone())
                .collect()
        })
        .collect()
}

/// Def-use edges: `d -> u` labeled `v` iff `d` defines `v`, `u` uses `v`, and
/// a definition-clear path for `v` leads from `d` to `u`.
pub fn data_dependence_from(g: &Cfg, du: &[DefUse]) -> BTreeSet<DataDep> {
    let reaching = reaching_definitions(g, du);
    let mut deps = BTreeSet::new();
    for (node, rd) in reaching.iter().enumerate() {
        for (def, var) in rd {
            if du[node].uses.contains(var) {
                deps.insert(DataDep { from: *def, to: node, var: var.clone() });
            }
        }
    }
    deps
}

pub fn data_dependence(g: &Cfg, f: &FunctionAst) -> BTreeSet<DataDep> {
    data_dependence_from(g, &function_def_use(g, f))
}
