//! Random inputs and brute-force reference answers for the analysis tests.
//!
//! Every oracle here works from definitions (reachability with a node
//! removed, explicit path search, transitive closure) and shares no code
//! with the production algorithms.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use vulnrank_core::flowgraphs::{Cfg, DefUse, DepGraph, EdgeKind, NodeId, Var};

/// Random CFG with `total` nodes at most. Statements are `0..n`, entry is
/// `n`, exit is `n + 1`. Nodes that cannot reach exit get an extra edge to it.
pub fn random_cfg(rng: &mut impl Rng, total: usize) -> Cfg {
    assert!(total >= 3);
    let n = rng.gen_range(1..=total - 2);
    let (entry, exit) = (n, n + 1);
    let mut g = Cfg::new(n + 2, entry, exit);
    g.add_edge(entry, rng.gen_range(0..n), EdgeKind::Seq);
    let target = |rng: &mut _| -> NodeId {
        let t = Rng::gen_range(rng, 0..=n);
        if t == n {
            exit
        } else {
            t
        }
    };
    for s in 0..n {
        if rng.gen_bool(0.4) {
            let a = target(rng);
            let mut b = target(rng);
            while b == a {
                b = target(rng);
            }
            g.add_edge(s, a, EdgeKind::True);
            g.add_edge(s, b, EdgeKind::False);
        } else {
            g.add_edge(s, target(rng), EdgeKind::Seq);
        }
    }
    let reaches = g.reaches_exit();
    for (s, ok) in reaches.iter().enumerate() {
        if !ok && s != exit {
            g.add_edge(s, exit, EdgeKind::Synthetic);
        }
    }
    g
}

/// Nodes reachable from `start` in paths of length ≥ 1 when `banned` may not
/// be entered.
fn reach_avoiding(g: &Cfg, start: NodeId, banned: Option<NodeId>) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for y in g.successors(x) {
            if Some(y) != banned && !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Does `a` post-dominate `b` (reflexively)? True iff every path from `b`
/// to exit passes through `a`, i.e. exit is unreachable once `a` is removed.
pub fn post_dominates(g: &Cfg, a: NodeId, b: NodeId) -> bool {
    if a == b {
        return true;
    }
    if b == g.exit() {
        return false;
    }
    !reach_avoiding(g, b, Some(a))[g.exit()]
}

/// Immediate post-dominator of every node, from the full relation.
pub fn ipdoms(g: &Cfg) -> Vec<Option<NodeId>> {
    let n = g.node_count();
    (0..n)
        .map(|b| {
            let strict: Vec<NodeId> = (0..n).filter(|&a| a != b && post_dominates(g, a, b)).collect();
            strict.iter().copied().find(|&d| strict.iter().all(|&s| post_dominates(g, s, d)))
        })
        .collect()
}

/// `(a, b)` iff `a` has a successor `s` that `b` post-dominates while `b`
/// does not strictly post-dominate `a`.
pub fn control_dependence(g: &Cfg) -> BTreeSet<(NodeId, NodeId)> {
    let n = g.node_count();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for s in g.successors(a) {
            for b in 0..n {
                if post_dominates(g, b, s) && !(b != a && post_dominates(g, b, a)) {
                    out.insert((a, b));
                }
            }
        }
    }
    out
}

/// `(d, u, v)` iff `d` defines `v`, `u` uses `v`, and some CFG path of
/// length ≥ 1 leads from `d` to `u` without passing another definition of
/// `v` in between.
pub fn def_use_chains(g: &Cfg, du: &[DefUse]) -> BTreeSet<(NodeId, NodeId, Var)> {
    let mut out = BTreeSet::new();
    for (d, site) in du.iter().enumerate() {
        for v in &site.defs {
            let mut seen = vec![false; g.node_count()];
            let mut queue: VecDeque<NodeId> = g.successors(d).collect();
            while let Some(x) = queue.pop_front() {
                if seen[x] {
                    continue;
                }
                seen[x] = true;
                if du[x].uses.contains(v) {
                    out.insert((d, x, v.clone()));
                }
                if !du[x].defs.contains(v) {
                    queue.extend(g.successors(x));
                }
            }
        }
    }
    out
}

/// Random def/use sets over a few plain and dereferenced variables.
pub fn random_def_use(rng: &mut impl Rng, g: &Cfg) -> Vec<DefUse> {
    let vars = [Var::Plain("a".into()), Var::Plain("b".into()), Var::Plain("c".into()), Var::Deref("p".into())];
    (0..g.node_count())
        .map(|node| {
            let mut du = DefUse::default();
            if node == g.exit() {
                return du;
            }
            for v in &vars {
                if rng.gen_bool(0.3) {
                    du.defs.insert(v.clone());
                }
                if node != g.entry() && rng.gen_bool(0.3) {
                    du.uses.insert(v.clone());
                }
            }
            du
        })
        .collect()
}

pub fn random_dep_graph(rng: &mut impl Rng, max_nodes: usize) -> DepGraph {
    let n = rng.gen_range(1..=max_nodes);
    let p = rng.gen_range(0.02..0.2);
    let mut g = DepGraph::with_nodes(n);
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// Reflexive transitive closure by Warshall's algorithm: `m[a][b]` iff `b`
/// is reachable from `a`.
pub fn closure(g: &DepGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut m = vec![vec![false; n]; n];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = true;
        for &b in g.successors(a) {
            row[b] = true;
        }
    }
    for k in 0..n {
        for a in 0..n {
            if m[a][k] {
                for b in 0..n {
                    if m[k][b] {
                        m[a][b] = true;
                    }
                }
            }
        }
    }
    m
}

/// A generated function together with the def/use sets its generator
/// intended for each statement, indexed by statement id.
#[derive(Debug, Clone)]
pub struct GeneratedFunction {
    pub source: String,
    pub params: Vec<String>,
    pub def_use: Vec<(BTreeSet<String>, BTreeSet<String>)>,
}

struct ProgramGen<'r, R: Rng> {
    rng: &'r mut R,
    budget: usize,
    out: String,
    def_use: Vec<(BTreeSet<String>, BTreeSet<String>)>,
}

const VARS: [&str; 4] = ["a", "b", "x", "y"];

impl<R: Rng> ProgramGen<'_, R> {
    fn var(&mut self) -> &'static str {
        VARS.choose(self.rng).unwrap()
    }

    fn stmt(&mut self, depth: usize, indent: usize) {
        self.budget -= 1;
        let pad = "  ".repeat(indent);
        let choice = if depth >= 3 || self.budget < 2 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..6) };
        match choice {
            0 => {
                let (d, u1, u2) = (self.var(), self.var(), self.var());
                self.out.push_str(&format!("{pad}{d} = {u1} + {u2};\n"));
                self.def_use.push(([d.to_string()].into(), [u1.to_string(), u2.to_string()].into()));
            }
            1 => {
                let d = self.var();
                let k = self.rng.gen_range(0..100);
                self.out.push_str(&format!("{pad}{d} = {k};\n"));
                self.def_use.push(([d.to_string()].into(), BTreeSet::new()));
            }
            2 if self.rng.gen_bool(0.3) => {
                let u = self.var();
                self.out.push_str(&format!("{pad}return {u};\n"));
                self.def_use.push((BTreeSet::new(), [u.to_string()].into()));
            }
            2 => {
                let u = self.var();
                self.out.push_str(&format!("{pad}{u}++;\n"));
                self.def_use.push(([u.to_string()].into(), [u.to_string()].into()));
            }
            3 | 4 => {
                let (u1, u2) = (self.var(), self.var());
                self.out.push_str(&format!("{pad}if ({u1} < {u2}) {{\n"));
                self.def_use.push((BTreeSet::new(), [u1.to_string(), u2.to_string()].into()));
                self.block(depth + 1, indent + 1);
                if self.budget > 0 && self.rng.gen_bool(0.5) {
                    self.out.push_str(&format!("{pad}}} else {{\n"));
                    self.block(depth + 1, indent + 1);
                }
                self.out.push_str(&format!("{pad}}}\n"));
            }
            _ => {
                let u = self.var();
                self.out.push_str(&format!("{pad}while ({u}) {{\n"));
                self.def_use.push((BTreeSet::new(), [u.to_string()].into()));
                self.block(depth + 1, indent + 1);
                self.out.push_str(&format!("{pad}}}\n"));
            }
        }
    }

    fn block(&mut self, depth: usize, indent: usize) {
        let want = self.rng.gen_range(1..=3);
        for _ in 0..want {
            if self.budget == 0 {
                break;
            }
            self.stmt(depth, indent);
        }
    }
}

/// Straight-line, branching and looping function of at most `max_stmts`
/// statements over the variables `a`, `b` (parameters) and `x`, `y`.
pub fn random_function(rng: &mut impl Rng, max_stmts: usize) -> GeneratedFunction {
    let budget = rng.gen_range(1..=max_stmts);
    let mut gen = ProgramGen { rng, budget, out: String::from("int f(int a, int b) {\n  int x;\n  int y;\n"), def_use: Vec::new() };
    gen.def_use.push((["x".to_string()].into(), BTreeSet::new()));
    gen.def_use.push((["y".to_string()].into(), BTreeSet::new()));
    while gen.budget > 0 {
        gen.stmt(0, 1);
    }
    gen.out.push_str("}\n");
    GeneratedFunction { source: gen.out, params: vec!["a".into(), "b".into()], def_use: gen.def_use }
}

impl GeneratedFunction {
    /// Def/use sets per CFG node; the entry node defines the parameters.
    pub fn node_def_use(&self, g: &Cfg) -> Vec<DefUse> {
        let plain = |s: &BTreeSet<String>| s.iter().map(|v| Var::Plain(v.clone())).collect();
        let mut out: Vec<DefUse> =
            self.def_use.iter().map(|(d, u)| DefUse { defs: plain(d), uses: plain(u) }).collect();
        out.resize(g.node_count(), DefUse::default());
        out[g.entry()].defs = self.params.iter().map(|p| Var::Plain(p.clone())).collect();
        out
    }
}

/// Naive scalar GRU cell: nested loops over plain vectors, no shared kernels.
/// Weight matrices are row-per-hidden-unit.
#[derive(Debug, Clone)]
pub struct ScalarGru {
    pub w: [Vec<Vec<f64>>; 3],
    pub u: [Vec<Vec<f64>>; 3],
    pub b: [Vec<f64>; 3],
}

impl ScalarGru {
    pub fn random(rng: &mut impl Rng, input: usize, hidden: usize) -> Self {
        let mut mat = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
            (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
        };
        let w = [mat(hidden, input), mat(hidden, input), mat(hidden, input)];
        let u = [mat(hidden, hidden), mat(hidden, hidden), mat(hidden, hidden)];
        let b = [0, 1, 2].map(|_| (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect());
        ScalarGru { w, u, b }
    }

    /// States `h_1..h_l`; with `reverse` the sequence is read back to front
    /// and the states are returned in time order.
    pub fn run(&self, xs: &[Vec<f64>], reverse: bool) -> Vec<Vec<f64>> {
        let hidden = self.b[0].len();
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h = vec![0.0; hidden];
        let mut out = vec![Vec::new(); xs.len()];
        let steps: Vec<usize> = if reverse { (0..xs.len()).rev().collect() } else { (0..xs.len()).collect() };
        for t in steps {
            let x = &xs[t];
            let mut z = vec![0.0; hidden];
            let mut r = vec![0.0; hidden];
            for i in 0..hidden {
                let mut sz = self.b[0][i];
                let mut sr = self.b[1][i];
                for j in 0..x.len() {
                    sz += self.w[0][i][j] * x[j];
                    sr += self.w[1][i][j] * x[j];
                }
                for j in 0..hidden {
                    sz += self.u[0][i][j] * h[j];
                    sr += self.u[1][i][j] * h[j];
                }
                z[i] = sig(sz);
                r[i] = sig(sr);
            }
            let mut next = vec![0.0; hidden];
            for i in 0..hidden {
                let mut s = self.b[2][i];
                for j in 0..x.len() {
                    s += self.w[2][i][j] * x[j];
                }
                for j in 0..hidden {
                    s += self.u[2][i][j] * (r[j] * h[j]);
                }
                next[i] = (1.0 - z[i]) * h[i] + z[i] * s.tanh();
            }
            h = next;
            out[t] = h.clone();
        }
        out
    }

    pub fn flat(m: &[Vec<f64>]) -> Vec<f64> {
        m.iter().flatten().copied().collect()
    }
}
