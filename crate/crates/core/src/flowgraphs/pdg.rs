use std::collections::BTreeSet;

use super::cfg::{build_cfg, Cfg};
use super::control::control_dependence_with;
use super::defuse::Var;
use super::postdom::post_dominators;
use super::reaching::data_dependence;
use crate::frontend::{FunctionAst, StatementId, StatementKind, TranslationUnit};

/// Source of a data-dependence edge: a statement, or the function entry acting
/// as the pseudo-definition that binds the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DefSite {
    Entry,
    Stmt(StatementId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataEdge {
    pub from: DefSite,
    pub to: StatementId,
    pub var: Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallLink {
    pub site: StatementId,
    pub callee: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReturnLink {
    pub callee: usize,
    pub ret: StatementId,
    pub site: StatementId,
}

/// Program dependence graph of one function. Call and return links are
/// stored on the caller's graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pdg {
    pub function: usize,
    pub statement_count: usize,
    /// `(governor, dependent)`.
    pub cdeps: Vec<(StatementId, StatementId)>,
    pub ddeps: Vec<DataEdge>,
    pub calls: Vec<CallLink>,
    pub returns: Vec<ReturnLink>,
}

impl Pdg {
    pub fn nodes(&self) -> impl Iterator<Item = StatementId> {
        (0..self.statement_count as u32).map(StatementId)
    }
}

/// Intra-procedural part of the PDG: control plus data dependence.
pub fn build_pdg(function: usize, f: &FunctionAst, cfg: &Cfg) -> Pdg {
    let pdt = post_dominators(cfg).expect("function CFGs always reach exit");
    let n = f.statements.len();
    let stmt = |node: usize| StatementId(node as u32);
    let cdeps = control_dependence_with(cfg, &pdt)
        .into_iter()
        .filter(|&(a, b)| a < n && b < n)
        .map(|(a, b)| (stmt(a), stmt(b)))
        .collect();
    let ddeps = data_dependence(cfg, f)
        .into_iter()
        .filter(|d| d.to < n)
        .map(|d| DataEdge {
            from: if d.from == cfg.entry() { DefSite::Entry } else { DefSite::Stmt(stmt(d.from)) },
            to: stmt(d.to),
            var: d.var,
        })
        .collect();
    Pdg { function, statement_count: n, cdeps, ddeps, calls: Vec::new(), returns: Vec::new() }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Callee {
    Internal(usize),
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallEdge {
    pub caller: usize,
    pub site: StatementId,
    pub callee: Callee,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub edges: Vec<CallEdge>,
}

impl CallGraph {
    pub fn build(unit: &TranslationUnit) -> Self {
        let mut edges = Vec::new();
        for (caller, f) in unit.functions.iter().enumerate() {
            for s in &f.statements {
                let mut seen = BTreeSet::new();
                for name in s.kind.callees() {
                    if !seen.insert(name) {
                        continue;
                    }
                    let callee = match unit.function(name) {
                        Some((idx, _)) => Callee::Internal(idx),
                        None => Callee::External(name.to_string()),
                    };
                    edges.push(CallEdge { caller, site: s.id, callee });
                }
            }
        }
        CallGraph { edges }
    }

    pub fn external_callees(&self) -> BTreeSet<&str> {
        self.edges
            .iter()
            .filter_map(|e| match &e.callee {
                Callee::External(n) => Some(n.as_str()),
                Callee::Internal(_) => None,
            })
            .collect()
    }
}

/// Adds call and return links to every caller's PDG.
pub fn link_interprocedural(unit: &TranslationUnit, pdgs: &mut [Pdg], calls: &CallGraph) {
    for edge in &calls.edges {
        let Callee::Internal(callee) = edge.callee else {
            continue;
        };
        let pdg = &mut pdgs[edge.caller];
        pdg.calls.push(CallLink { site: edge.site, callee });
        for s in &unit.functions[callee].statements {
            if matches!(s.kind, StatementKind::Return(_)) {
                pdg.returns.push(ReturnLink { callee, ret: s.id, site: edge.site });
            }
        }
    }
}

/// Per-function graphs plus the call graph of one translation unit.
#[derive(Debug, Clone)]
pub struct ProgramAnalysis {
    pub cfgs: Vec<Cfg>,
    pub pdgs: Vec<Pdg>,
    pub call_graph: CallGraph,
}

impl ProgramAnalysis {
    pub fn build(unit: &TranslationUnit) -> Self {
        let cfgs: Vec<Cfg> = unit.functions.iter().map(build_cfg).collect();
        let mut pdgs: Vec<Pdg> =
            unit.functions.iter().zip(&cfgs).enumerate().map(|(i, (f, g))| build_pdg(i, f, g)).collect();
        let call_graph = CallGraph::build(unit);
        link_interprocedural(unit, &mut pdgs, &call_graph);
        ProgramAnalysis { cfgs, pdgs, call_graph }
    }
}
