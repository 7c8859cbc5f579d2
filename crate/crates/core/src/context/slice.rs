use std::collections::{BTreeSet, VecDeque};

use crate::flowgraphs::DepGraph;

fn closure<'g>(criterion: usize, next: impl Fn(usize) -> &'g [usize]) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([criterion]);
    let mut queue = VecDeque::from([criterion]);
    while let Some(n) = queue.pop_front() {
        for &m in next(n) {
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    seen
}

/// Nodes from which `criterion` is reachable, itself included.
pub fn backward_slice(g: &DepGraph, criterion: usize) -> BTreeSet<usize> {
    closure(criterion, |n| g.predecessors(n))
}

/// Nodes reachable from `criterion`, itself included.
pub fn forward_slice(g: &DepGraph, criterion: usize) -> BTreeSet<usize> {
    closure(criterion, |n| g.successors(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain() {
        let mut g = DepGraph::with_nodes(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        assert_eq!(backward_slice(&g, 2), BTreeSet::from([0, 1, 2]));
        assert_eq!(forward_slice(&g, 0), BTreeSet::from([0, 1, 2]));
        assert_eq!(forward_slice(&g, 1), BTreeSet::from([1, 2]));
    }

    #[test]
    fn isolated_and_cyclic() {
        let mut g = DepGraph::with_nodes(4);
        g.add_edge(1, 2);
        g.add_edge(2, 1);
        assert_eq!(backward_slice(&g, 0), BTreeSet::from([0]));
        assert_eq!(forward_slice(&g, 0), BTreeSet::from([0]));
        assert_eq!(backward_slice(&g, 1), BTreeSet::from([1, 2]));
    }
}
