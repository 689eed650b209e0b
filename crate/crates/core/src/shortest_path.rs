//! Dijkstra search with deterministic tie-breaking.
//!
//! Among all minimum-cost paths the one whose edge-id sequence (read from the
//! origin) is lexicographically smallest is returned, so whole demand groups
//! that are loaded onto a single path always land on the same one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::network::{EdgeCosts, EdgeId, Network, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub edges: Vec<EdgeId>,
    pub cost: f64,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: NodeId,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then node id
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest paths from one origin to every node.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    origin: NodeId,
    dist: Vec<f64>,
    pred: Vec<Option<EdgeId>>,
    tails: Vec<NodeId>,
}

impl ShortestPathTree {
    pub fn origin(&self) -> NodeId {
        self.origin
    }

    /// `f64::INFINITY` when `node` is unreachable.
    pub fn distance(&self, node: NodeId) -> f64 {
        self.dist[node]
    }

    pub fn is_reachable(&self, node: NodeId) -> bool {
        self.dist[node].is_finite()
    }

    pub fn path_to(&self, dest: NodeId) -> Option<Path> {
        if !self.is_reachable(dest) {
            return None;
        }
        Some(Path {
            edges: self.edges_to(dest),
            cost: self.dist[dest],
        })
    }

    fn edges_to(&self, node: NodeId) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        let mut v = node;
        while let Some(e) = self.pred[v] {
            edges.push(e);
            v = self.tails[e];
        }
        edges.reverse();
        edges
    }

    /// True when `prefix_end + e` sorts before the current path to `head`.
    fn lex_smaller(&self, prefix_end: NodeId, e: EdgeId, head: NodeId) -> bool {
        let mut candidate = self.edges_to(prefix_end);
        candidate.push(e);
        candidate < self.edges_to(head)
    }
}

pub fn shortest_path_tree(
    network: &Network,
    costs: &EdgeCosts,
    origin: NodeId,
) -> Result<ShortestPathTree> {
    if costs.len() != network.edge_count() {
        return Err(Error::Structure(format!(
            "cost vector has {} entries for {} edges",
            costs.len(),
            network.edge_count()
        )));
    }
    if !network.contains_node(origin) {
        return Err(Error::Structure(format!("origin {origin} is not a node")));
    }
    Ok(search(network, costs.as_slice(), origin))
}

/// Callers have validated lengths, ids and nonnegativity.
pub(crate) fn search(network: &Network, costs: &[f64], origin: NodeId) -> ShortestPathTree {
    let n = network.node_count();
    let mut tree = ShortestPathTree {
        origin,
        dist: vec![f64::INFINITY; n],
        pred: vec![None; n],
        tails: network.edges().iter().map(|e| e.from).collect(),
    };
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    tree.dist[origin] = 0.0;
    heap.push(State {
        cost: 0.0,
        node: origin,
    });

    while let Some(State { cost, node }) = heap.pop() {
        if settled[node] || cost > tree.dist[node] {
            continue;
        }
        settled[node] = true;
        for &e in network.outgoing(node) {
            let head = network.edge(e).to;
            if settled[head] {
                continue;
            }
            let next = cost + costs[e];
            if next < tree.dist[head] {
                tree.dist[head] = next;
                tree.pred[head] = Some(e);
                heap.push(State {
                    cost: next,
                    node: head,
                });
            } else if next == tree.dist[head] && tree.lex_smaller(node, e, head) {
                tree.pred[head] = Some(e);
            }
        }
    }
    tree
}

/// Minimum-cost `origin -> dest` path, or `None` when `dest` is unreachable.
pub fn shortest_path(
    network: &Network,
    costs: &EdgeCosts,
    origin: NodeId,
    dest: NodeId,
) -> Result<Option<Path>> {
    if !network.contains_node(dest) {
        return Err(Error::Structure(format!("destination {dest} is not a node")));
    }
    Ok(shortest_path_tree(network, costs, origin)?.path_to(dest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeAttr, NodeAttr};

    fn net(n: usize, arcs: &[(usize, usize)]) -> Network {
        Network::new(
            (0..n).map(NodeAttr::new).collect(),
            arcs.iter()
                .map(|&(a, b)| EdgeAttr::new(a, b, 1.0, 1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_edge() {
        let g = net(2, &[(0, 1)]);
        let costs = EdgeCosts::new(vec![5.0]).unwrap();
        let p = shortest_path(&g, &costs, 0, 1).unwrap().unwrap();
        assert_eq!(p.edges, vec![0]);
        assert_eq!(p.cost, 5.0);
    }

    #[test]
    fn picks_cheaper_parallel_route() {
        let g = net(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        let costs = EdgeCosts::new(vec![2.0, 2.0, 1.0, 2.0]).unwrap();
        let p = shortest_path(&g, &costs, 0, 3).unwrap().unwrap();
        assert_eq!(p.edges, vec![2, 3]);
        assert_eq!(p.cost, 3.0);
    }

    #[test]
    fn unreachable_is_none() {
        let g = net(3, &[(0, 1)]);
        let costs = EdgeCosts::new(vec![1.0]).unwrap();
        assert_eq!(shortest_path(&g, &costs, 0, 2).unwrap(), None);
        assert_eq!(shortest_path(&g, &costs, 1, 0).unwrap(), None);
        assert!(shortest_path(&g, &costs, 0, 7).is_err());
    }

    #[test]
    fn ties_prefer_smaller_edge_ids() {
        // edges 2,3 form the later-discovered equal route; 0,1 must win
        let g = net(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        let costs = EdgeCosts::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(shortest_path(&g, &costs, 0, 3).unwrap().unwrap().edges, vec![0, 1]);

        let g = net(4, &[(0, 2), (2, 3), (0, 1), (1, 3)]);
        assert_eq!(shortest_path(&g, &costs, 0, 3).unwrap().unwrap().edges, vec![0, 1]);
    }

    #[test]
    fn ties_resolved_on_first_differing_edge() {
        // Two routes 0->1->3 via edges [1, 4] and [1, 2, 5...]; equal-cost
        // alternatives diverge after a shared prefix.
        let g = net(4, &[(0, 2), (0, 1), (1, 3), (2, 3), (1, 2)]);
        let costs = EdgeCosts::new(vec![3.0, 1.0, 2.0, 2.0, 2.0]).unwrap();
        // candidates of cost 3: [1,2]; [0,...] costs 5; [1,4,3] costs 5
        assert_eq!(shortest_path(&g, &costs, 0, 3).unwrap().unwrap().edges, vec![1, 2]);
    }

    #[test]
    fn origin_to_itself_is_empty_path() {
        let g = net(2, &[(0, 1)]);
        let costs = EdgeCosts::new(vec![1.0]).unwrap();
        let p = shortest_path(&g, &costs, 0, 0).unwrap().unwrap();
        assert!(p.edges.is_empty());
        assert_eq!(p.cost, 0.0);
    }
}
