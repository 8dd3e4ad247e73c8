//! Labeled random graphs with planted communities, used when no dataset is at
//! hand (benchmarks, smoke runs, tests).

use rand::Rng as _;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::eval::ClassId;
use crate::graph::{Graph, NodeId};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartition {
    pub nodes: usize,
    pub classes: usize,
    pub edges: usize,
    /// Probability that an edge joins two nodes of the same class.
    pub homophily: f64,
}

impl PlantedPartition {
    /// Same node, edge and class counts as Cora, with a similar edge homophily.
    pub fn cora_like() -> Self {
        PlantedPartition {
            nodes: 2708,
            classes: 7,
            edges: 5278,
            homophily: 0.81,
        }
    }

    /// Every node gets at least one edge, so there are no isolated nodes as
    /// long as `edges >= nodes / 2`. Returns the graph and per-node classes.
    pub fn generate(&self, seed: u64) -> (Graph, Vec<Option<ClassId>>) {
        assert!(self.classes >= 1 && self.nodes >= 2 * self.classes, "too few nodes per class");
        let max_edges = self.nodes * (self.nodes - 1) / 2;
        assert!(self.edges <= max_edges / 2, "edge count too close to a complete graph");
        let mut rng = Rng::seed_from_u64(seed);
        let class: Vec<ClassId> = (0..self.nodes).map(|v| v % self.classes).collect();
        let members: Vec<Vec<NodeId>> = (0..self.classes)
            .map(|c| (0..self.nodes).filter(|&v| class[v] == c).collect())
            .collect();
        let mut g = Graph::new(self.nodes);
        let partner = |u: NodeId, rng: &mut Rng| -> NodeId {
            if rng.gen_bool(self.homophily) {
                let m = &members[class[u]];
                m[rng.gen_range(0..m.len())]
            } else {
                rng.gen_range(0..self.nodes)
            }
        };
        let mut order: Vec<NodeId> = (0..self.nodes).collect();
        rand::seq::SliceRandom::shuffle(&mut order[..], &mut rng);
        for &u in &order {
            while g.degree(u) == 0 && g.edge_count() < self.edges {
                let v = partner(u, &mut rng);
                if v != u {
                    g.add_edge(u, v, 1.0).expect("fresh edge");
                }
            }
        }
        while g.edge_count() < self.edges {
            let u = rng.gen_range(0..self.nodes);
            let v = partner(u, &mut rng);
            if v != u && !g.has_edge(u, v) {
                g.add_edge(u, v, 1.0).expect("fresh edge");
            }
        }
        (g, class.into_iter().map(Some).collect())
    }
}
