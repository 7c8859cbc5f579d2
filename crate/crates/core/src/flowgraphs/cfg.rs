use std::collections::VecDeque;

use crate::frontend::{Block, FunctionAst, Node, StatementId, StatementKind};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Seq,
    True,
    False,
    /// Added after construction so that every node reaches exit.
    Synthetic,
}

/// Statement-level control-flow graph with a single entry and a single exit.
///
/// For a function CFG the statement nodes are `0..n`, followed by the
/// synthetic entry (`n`) and exit (`n + 1`). Graphs built through
/// [`Cfg::new`] may use any numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    entry: NodeId,
    exit: NodeId,
    succ: Vec<Vec<(NodeId, EdgeKind)>>,
    pred: Vec<Vec<NodeId>>,
    statement_count: usize,
    unreachable: Vec<StatementId>,
}

impl Cfg {
    /// Empty graph over `node_count` nodes; statement count equals node count.
    pub fn new(node_count: usize, entry: NodeId, exit: NodeId) -> Self {
        assert!(entry < node_count && exit < node_count);
        Cfg {
            entry,
            exit,
            succ: vec![Vec::new(); node_count],
            pred: vec![Vec::new(); node_count],
            statement_count: node_count,
            unreachable: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, kind: EdgeKind) {
        self.succ[from].push((to, kind));
        self.pred[to].push(from);
    }

    pub fn node_count(&self) -> usize {
        self.succ.len()
    }

    pub fn entry(&self) -> NodeId {
        self.entry
    }

    pub fn exit(&self) -> NodeId {
        self.exit
    }

    /// Number of statement nodes (`0..statement_count`).
    pub fn statement_count(&self) -> usize {
        self.statement_count
    }

    pub fn is_statement(&self, n: NodeId) -> bool {
        n < self.statement_count && n != self.entry && n != self.exit
    }

    pub fn successors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.succ[n].iter().map(|&(s, _)| s)
    }

    pub fn edges_from(&self, n: NodeId) -> &[(NodeId, EdgeKind)] {
        &self.succ[n]
    }

    pub fn predecessors(&self, n: NodeId) -> &[NodeId] {
        &self.pred[n]
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, EdgeKind)> + '_ {
        self.succ.iter().enumerate().flat_map(|(from, out)| out.iter().map(move |&(to, k)| (from, to, k)))
    }

    /// Statements not reachable from entry (e.g. code after `return`).
    pub fn unreachable(&self) -> &[StatementId] {
        &self.unreachable
    }

    pub fn reachable_from_entry(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([self.entry]);
        seen[self.entry] = true;
        while let Some(n) = queue.pop_front() {
            for s in self.successors(n) {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    pub fn reaches_exit(&self) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([self.exit]);
        seen[self.exit] = true;
        while let Some(n) = queue.pop_front() {
            for &p in &self.pred[n] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Reverse post-order from entry. Successors are explored last-to-first,
    /// which places a branch's true side ahead of its false side.
    pub fn reverse_post_order(&self) -> Vec<NodeId> {
        let n = self.node_count();
        let mut visited = vec![false; n];
        let mut post = Vec::with_capacity(n);
        let mut stack: Vec<(NodeId, usize)> = vec![(self.entry, 0)];
        visited[self.entry] = true;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let out = &self.succ[node];
            if *next < out.len() {
                let child = out[out.len() - 1 - *next].0;
                *next += 1;
                if !visited[child] {
                    visited[child] = true;
                    stack.push((child, 0));
                }
            } else {
                post.push(node);
                stack.pop();
            }
        }
        post.reverse();
        post
    }
}

/// Builds the statement-level CFG of a function.
pub fn build_cfg(f: &FunctionAst) -> Cfg {
    let n = f.statements.len();
    let mut cfg = Cfg::new(n + 2, n, n + 1);
    cfg.statement_count = n;
    let mut builder = Builder { f, cfg: &mut cfg };
    let frontier = builder.block(&f.body, vec![(n, EdgeKind::Seq)]);
    builder.connect(&frontier, n + 1);

    let reaches = cfg.reaches_exit();
    for node in 0..cfg.node_count() {
        if !reaches[node] {
            cfg.add_edge(node, cfg.exit, EdgeKind::Synthetic);
        }
    }
    let reachable = cfg.reachable_from_entry();
    cfg.unreachable = (0..n).filter(|&i| !reachable[i]).map(|i| StatementId(i as u32)).collect();
    cfg
}

struct Builder<'a> {
    f: &'a FunctionAst,
    cfg: &'a mut Cfg,
}

type Frontier = Vec<(NodeId, EdgeKind)>;

impl Builder<'_> {
    fn connect(&mut self, from: &Frontier, to: NodeId) {
        for &(src, kind) in from {
            self.cfg.add_edge(src, to, kind);
        }
    }

    fn block(&mut self, block: &Block, mut frontier: Frontier) -> Frontier {
        for node in &block.0 {
            frontier = self.node(node, frontier);
        }
        frontier
    }

    fn node(&mut self, node: &Node, frontier: Frontier) -> Frontier {
        match node {
            Node::Stmt(id) => {
                let n = id.index();
                self.connect(&frontier, n);
                if matches!(self.f.statement(*id).kind, StatementKind::Return(_)) {
                    self.cfg.add_edge(n, self.cfg.exit, EdgeKind::Seq);
                    Vec::new()
                } else {
                    vec![(n, EdgeKind::Seq)]
                }
            }
            Node::If { cond, then_branch, else_branch } => {
                let c = cond.index();
                self.connect(&frontier, c);
                let mut out = self.block(then_branch, vec![(c, EdgeKind::True)]);
                match else_branch {
                    Some(e) => out.extend(self.block(e, vec![(c, EdgeKind::False)])),
                    None => out.push((c, EdgeKind::False)),
                }
                out
            }
            Node::While { cond, body } => {
                let c = cond.index();
                self.connect(&frontier, c);
                let back = self.block(body, vec![(c, EdgeKind::True)]);
                self.connect(&back, c);
                vec![(c, EdgeKind::False)]
            }
            Node::For { init, cond, step, body } => {
                let (i, c, s) = (init.index(), cond.index(), step.index());
                self.connect(&frontier, i);
                self.cfg.add_edge(i, c, EdgeKind::Seq);
                let back = self.block(body, vec![(c, EdgeKind::True)]);
                self.connect(&back, s);
                self.cfg.add_edge(s, c, EdgeKind::Seq);
                vec![(c, EdgeKind::False)]
            }
            Node::Block(b) => self.block(b, frontier),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::SourceFile;

    fn cfg_of(src: &str) -> (FunctionAst, Cfg) {
        let file = SourceFile::parse("t.c", src).unwrap();
        let f = file.unit.functions[0].clone();
        let g = build_cfg(&f);
        (f, g)
    }

    fn edge_set(g: &Cfg) -> Vec<(NodeId, NodeId, EdgeKind)> {
        let mut e: Vec<_> = g.edges().collect();
        e.sort();
        e
    }

    #[test]
    fn straight_line_chain() {
        let (_, g) = cfg_of("int f(){ int a = 1; int b = a; int c = b; }");
        use EdgeKind::Seq;
        assert_eq!(edge_set(&g), [(0, 1, Seq), (1, 2, Seq), (2, 4, Seq), (3, 0, Seq)]);
    }

    #[test]
    fn if_else_diamond() {
        let (_, g) = cfg_of("int f(int c){ int a; if (c) a = 1; else a = 2; return a; }");
        use EdgeKind::*;
        // s0 decl, s1 if, s2 then, s3 else, s4 return, entry 5, exit 6
        assert_eq!(
            edge_set(&g),
            [(0, 1, Seq), (1, 2, True), (1, 3, False), (2, 4, Seq), (3, 4, Seq), (4, 6, Seq), (5, 0, Seq)]
        );
        for n in 0..g.node_count() {
            if n == 1 {
                assert_eq!(g.edges_from(n).len(), 2);
            }
        }
    }

    #[test]
    fn while_back_edge() {
        let (_, g) = cfg_of("int f(int c){ while (c) c = c - 1; return c; }");
        use EdgeKind::*;
        // s0 while, s1 body, s2 return, entry 3, exit 4
        assert_eq!(edge_set(&g), [(0, 1, True), (0, 2, False), (1, 0, Seq), (2, 4, Seq), (3, 0, Seq)]);
    }

    #[test]
    fn for_loop_shape() {
        let (_, g) = cfg_of("void f(char *d, int n){ int i; for (i = 0; i < n; i++) d[i] = 0; }");
        use EdgeKind::*;
        // s0 decl, s1 init, s2 cond, s3 step, s4 body; entry 5, exit 6
        assert_eq!(
            edge_set(&g),
            [(0, 1, Seq), (1, 2, Seq), (2, 4, True), (2, 6, False), (3, 2, Seq), (4, 3, Seq), (5, 0, Seq)]
        );
    }

    #[test]
    fn code_after_return_is_flagged() {
        let (_, g) = cfg_of("int f(){ return 1; int x = 2; }");
        assert_eq!(g.unreachable(), &[StatementId(1)]);
        assert!(g.reaches_exit().iter().all(|&r| r));
    }

    #[test]
    fn rpo_puts_then_before_else() {
        let (_, g) = cfg_of("int f(int c){ int a; if (c) a = 1; else a = 2; return a; }");
        assert_eq!(g.reverse_post_order(), [5, 0, 1, 2, 3, 4, 6]);
        let (_, g) = cfg_of("int f(int c){ while (c) c = c - 1; return c; }");
        assert_eq!(g.reverse_post_order(), [3, 0, 1, 2, 4]);
    }
}
