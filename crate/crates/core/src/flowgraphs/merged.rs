use super::defuse::Var;
use super::pdg::{DefSite, ProgramAnalysis};
use crate::frontend::{StatementId, TranslationUnit};

/// Plain directed graph with forward and reverse adjacency.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepGraph {
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl DepGraph {
    pub fn with_nodes(n: usize) -> Self {
        DepGraph { succ: vec![Vec::new(); n], pred: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.succ[from].push(to);
        self.pred[to].push(from);
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn successors(&self, n: usize) -> &[usize] {
        &self.succ[n]
    }

    pub fn predecessors(&self, n: usize) -> &[usize] {
        &self.pred[n]
    }

    pub fn reversed(&self) -> DepGraph {
        DepGraph { succ: self.pred.clone(), pred: self.succ.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointKind {
    /// Parameter-binding pseudo-definition of a function.
    Entry,
    Stmt(StatementId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProgramPoint {
    pub function: usize,
    pub kind: PointKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepKind {
    Control,
    Data(Var),
    Call,
    Return,
}

/// All PDGs of a translation unit merged into one graph, joined by call and
/// return links. Immutable once built.
#[derive(Debug, Clone)]
pub struct ProgramGraph {
    offsets: Vec<usize>,
    points: Vec<ProgramPoint>,
    graph: DepGraph,
    edges: Vec<(usize, usize, DepKind)>,
}

impl ProgramGraph {
    pub fn build(unit: &TranslationUnit, analysis: &ProgramAnalysis) -> Self {
        let mut offsets = Vec::with_capacity(unit.functions.len());
        let mut points = Vec::new();
        for (fi, f) in unit.functions.iter().enumerate() {
            offsets.push(points.len());
            points.push(ProgramPoint { function: fi, kind: PointKind::Entry });
            points.extend(
                f.statements.iter().map(|s| ProgramPoint { function: fi, kind: PointKind::Stmt(s.id) }),
            );
        }
        let mut pg = ProgramGraph { offsets, graph: DepGraph::with_nodes(points.len()), points, edges: Vec::new() };

        for pdg in &analysis.pdgs {
            let f = pdg.function;
            for &(a, b) in &pdg.cdeps {
                pg.link(pg.stmt(f, a), pg.stmt(f, b), DepKind::Control);
            }
            for d in &pdg.ddeps {
                let from = match d.from {
                    DefSite::Entry => pg.entry(f),
                    DefSite::Stmt(s) => pg.stmt(f, s),
                };
                pg.link(from, pg.stmt(f, d.to), DepKind::Data(d.var.clone()));
            }
            for c in &pdg.calls {
                pg.link(pg.stmt(f, c.site), pg.entry(c.callee), DepKind::Call);
            }
            for r in &pdg.returns {
                pg.link(pg.stmt(r.callee, r.ret), pg.stmt(f, r.site), DepKind::Return);
            }
        }
        pg
    }

    fn link(&mut self, from: usize, to: usize, kind: DepKind) {
        self.graph.add_edge(from, to);
        self.edges.push((from, to, kind));
    }

    pub fn entry(&self, function: usize) -> usize {
        self.offsets[function]
    }

    pub fn stmt(&self, function: usize, id: StatementId) -> usize {
        self.offsets[function] + 1 + id.index()
    }

    pub fn index_of(&self, p: ProgramPoint) -> usize {
        match p.kind {
            PointKind::Entry => self.entry(p.function),
            PointKind::Stmt(s) => self.stmt(p.function, s),
        }
    }

    pub fn point(&self, index: usize) -> ProgramPoint {
        self.points[index]
    }

    pub fn graph(&self) -> &DepGraph {
        &self.graph
    }

    pub fn labeled_edges(&self) -> &[(usize, usize, DepKind)] {
        &self.edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::SourceFile;

    #[test]
    fn call_edges_cross_functions() {
        let file = SourceFile::parse(
            "t.c",
            "void put(char *d, int i) { d[i] = 1; } int main(int n) { char b[4]; put(b, n); return 0; }",
        )
        .unwrap();
        let pa = ProgramAnalysis::build(&file.unit);
        let pg = ProgramGraph::build(&file.unit, &pa);
        let site = pg.stmt(1, StatementId(1));
        assert!(pg.graph().successors(site).contains(&pg.entry(0)));
        assert!(pg.graph().successors(pg.entry(0)).contains(&pg.stmt(0, StatementId(0))));
        assert_eq!(pg.point(site), ProgramPoint { function: 1, kind: PointKind::Stmt(StatementId(1)) });
    }
}
