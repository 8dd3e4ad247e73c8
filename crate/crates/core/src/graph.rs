//! Dynamic undirected weighted graph with a fixed node set.
//!
//! Neighbor lists are kept sorted by node id so adjacency probes during the
//! second-order walk are a binary search.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use thiserror::Error;

use crate::rng::Rng;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("edge weight {0} is negative or not finite")]
    InvalidWeight(f64),
}

/// An undirected edge `(u, v, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId, weight: f64) -> Self {
        Edge { u, v, weight }
    }

    pub fn unit(u: NodeId, v: NodeId) -> Self {
        Edge::new(u, v, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Graph {
    adjacency: Vec<Vec<(NodeId, f64)>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `node_count` isolated nodes.
    pub fn new(node_count: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); node_count],
            edge_count: 0,
        }
    }

    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut g = Graph::new(node_count);
        for e in edges {
            g.add_edge(e.u, e.v, e.weight)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    /// Neighbors of `u` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|n| n.binary_search_by_key(&v, |&(x, _)| x).is_ok())
    }

    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let n = self.adjacency.get(u)?;
        n.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| n[i].1)
    }

    /// Inserts the undirected edge `(u, v)`. Rejects self-loops and duplicates.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, weight: f64) -> Result<(), GraphError> {
        let node_count = self.node_count();
        for node in [u, v] {
            if node >= node_count {
                return Err(GraphError::NodeOutOfRange { node, node_count });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(GraphError::InvalidWeight(weight));
        }
        let pos_u = match self.adjacency[u].binary_search_by_key(&v, |&(x, _)| x) {
            Ok(_) => return Err(GraphError::DuplicateEdge(u, v)),
            Err(p) => p,
        };
        self.adjacency[u].insert(pos_u, (v, weight));
        let pos_v = self.adjacency[v]
            .binary_search_by_key(&u, |&(x, _)| x)
            .expect_err("adjacency symmetry");
        self.adjacency[v].insert(pos_v, (u, weight));
        self.edge_count += 1;
        Ok(())
    }

    /// Every edge once, as `(u, v, w)` with `u < v`, ordered by `(u, v)`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, n)| {
            n.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| Edge::new(u, v, w))
        })
    }

    pub fn isolated_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&u| self.adjacency[u].is_empty())
    }

    /// Component label per node, dense in `[0, #components)`, numbered in order
    /// of each component's lowest node id.
    pub fn connected_components(&self) -> Components {
        let n = self.node_count();
        let mut labels = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for root in 0..n {
            if labels[root] != usize::MAX {
                continue;
            }
            labels[root] = count;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    if labels[v] == usize::MAX {
                        labels[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        Components { labels, count }
    }

    /// Splits the edge set into a BFS spanning forest and the remaining edges.
    ///
    /// Each component is spanned by a BFS tree rooted at its lowest node id;
    /// the non-tree edges are shuffled with `seed`.
    pub fn spanning_forest_split(&self, seed: u64) -> EdgeStream {
        let n = self.node_count();
        let mut visited = vec![false; n];
        let mut initial = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        for root in 0..n {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &(v, w) in &self.adjacency[u] {
                    if !visited[v] {
                        visited[v] = true;
                        initial.push(Edge::new(u.min(v), u.max(v), w));
                        queue.push_back(v);
                    }
                }
            }
        }
        let forest = Graph::from_edges(n, initial.iter().copied()).expect("forest edges are valid");
        let mut deferred: Vec<Edge> = self
            .edges()
            .filter(|e| !forest.has_edge(e.u, e.v))
            .collect();
        let mut rng = Rng::seed_from_u64(seed);
        deferred.shuffle(&mut rng);
        EdgeStream {
            node_count: n,
            initial_edges: initial,
            deferred_edges: deferred,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub labels: Vec<usize>,
    pub count: usize,
}

/// Initial forest plus the ordered stream of edges replayed on top of it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeStream {
    pub node_count: usize,
    pub initial_edges: Vec<Edge>,
    pub deferred_edges: Vec<Edge>,
    pub seed: u64,
}

impl EdgeStream {
    /// The initial forest as a graph over the full node set.
    pub fn initial_graph(&self) -> Graph {
        Graph::from_edges(self.node_count, self.initial_edges.iter().copied())
            .expect("forest edges are valid")
    }
}
