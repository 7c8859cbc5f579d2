use thiserror::Error;

use super::cfg::{Cfg, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {0} cannot reach the exit node")]
    CannotReachExit(NodeId),
}

/// Immediate post-dominator of every node; `None` only for exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostDomTree {
    exit: NodeId,
    ipdom: Vec<Option<NodeId>>,
}

impl PostDomTree {
    pub fn ipdom(&self, n: NodeId) -> Option<NodeId> {
        self.ipdom[n]
    }

    pub fn as_slice(&self) -> &[Option<NodeId>] {
        &self.ipdom
    }

    /// Reflexive post-dominance: does `a` post-dominate `b`?
    pub fn post_dominates(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = Some(b);
        while let Some(n) = cur {
            if n == a {
                return true;
            }
            cur = self.ipdom[n];
        }
        false
    }

    pub fn strictly_post_dominates(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.post_dominates(a, b)
    }

    pub fn exit(&self) -> NodeId {
        self.exit
    }
}

/// Iterative post-dominator computation on the reversed CFG (Cooper, Harvey
/// and Kennedy's intersect scheme), iterated to a fixed point.
pub fn post_dominators(g: &Cfg) -> Result<PostDomTree, GraphError> {
    let n = g.node_count();
    let exit = g.exit();

    // Post-order of the reversed graph, DFS from exit along predecessor edges.
    let mut order = vec![usize::MAX; n];
    let mut post = Vec::with_capacity(n);
    let mut stack: Vec<(NodeId, usize)> = vec![(exit, 0)];
    let mut visited = vec![false; n];
    visited[exit] = true;
    while let Some(&mut (node, ref mut next)) = stack.last_mut() {
        let preds = g.predecessors(node);
        if *next < preds.len() {
            let p = preds[*next];
            *next += 1;
            if !visited[p] {
                visited[p] = true;
                stack.push((p, 0));
            }
        } else {
            order[node] = post.len();
            post.push(node);
            stack.pop();
        }
    }
    if let Some(bad) = (0..n).find(|&v| !visited[v]) {
        return Err(GraphError::CannotReachExit(bad));
    }

    let mut ipdom: Vec<Option<NodeId>> = vec![None; n];
    ipdom[exit] = Some(exit);
    let intersect = |ipdom: &[Option<NodeId>], mut a: NodeId, mut b: NodeId| {
        while a != b {
            while order[a] < order[b] {
                a = ipdom[a].expect("processed node");
            }
            while order[b] < order[a] {
                b = ipdom[b].expect("processed node");
            }
        }
        a
    };

    let mut changed = true;
    while changed {
        changed = false;
        for &node in post.iter().rev() {
            if node == exit {
                continue;
            }
            let mut new = None;
            for s in g.successors(node) {
                if ipdom[s].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => s,
                    Some(cur) => intersect(&ipdom, cur, s),
                });
            }
            if new != ipdom[node] {
                ipdom[node] = new;
                changed = true;
            }
        }
    }
    ipdom[exit] = None;
    Ok(PostDomTree { exit, ipdom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraphs::cfg::EdgeKind;

    fn graph(n: usize, entry: NodeId, exit: NodeId, edges: &[(NodeId, NodeId)]) -> Cfg {
        let mut g = Cfg::new(n, entry, exit);
        for &(a, b) in edges {
            g.add_edge(a, b, EdgeKind::Seq);
        }
        g
    }

    #[test]
    fn linear_chain() {
        let g = graph(4, 0, 3, &[(0, 1), (1, 2), (2, 3)]);
        let t = post_dominators(&g).unwrap();
        assert_eq!(t.as_slice(), &[Some(1), Some(2), Some(3), None]);
    }

    #[test]
    fn diamond() {
        // c=0, a=1, b=2, m=3, exit=4
        let g = graph(5, 0, 4, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)]);
        let t = post_dominators(&g).unwrap();
        assert_eq!(t.ipdom(1), Some(3));
        assert_eq!(t.ipdom(2), Some(3));
        assert_eq!(t.ipdom(0), Some(3));
        assert!(t.post_dominates(4, 0));
        assert!(!t.post_dominates(1, 0));
    }

    #[test]
    fn unreachable_exit_is_an_error() {
        let g = graph(4, 0, 3, &[(0, 1), (1, 1), (0, 3)]);
        assert_eq!(post_dominators(&g), Err(GraphError::CannotReachExit(1)));
    }
}
