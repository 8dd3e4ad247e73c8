//! Second-order (p, q)-biased random walks and their slicing into training contexts.
//!
//! The transition weight from `cur` to a neighbor `x`, having arrived from
//! `prev`, is `w(cur, x) * alpha(prev, x)` where `alpha` is `1/p` for a return
//! to `prev`, `1` when `x` is adjacent to `prev` and `1/q` otherwise. The
//! distribution is computed on the fly at every step so that walks stay valid
//! while edges are being inserted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("node {0} has no neighbors")]
    DeadEnd(NodeId),
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            p: 0.5,
            q: 1.0,
            walks_per_node: 10,
            walk_length: 80,
            window: 8,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if !(self.p > 0.0 && self.p.is_finite() && self.q > 0.0 && self.q.is_finite()) {
            return Err(WalkError::InvalidConfig(format!(
                "p and q must be positive (p={}, q={})",
                self.p, self.q
            )));
        }
        if self.window < 2 || self.walk_length < self.window {
            return Err(WalkError::InvalidConfig(format!(
                "need walk_length >= window >= 2 (walk_length={}, window={})",
                self.walk_length, self.window
            )));
        }
        Ok(())
    }

    /// Number of full windows in a walk of `len` nodes.
    pub fn contexts_per_walk(&self, len: usize) -> usize {
        (len + 1).saturating_sub(self.window)
    }
}

/// A random walk; consecutive nodes were adjacent when it was generated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Walk(pub Vec<NodeId>);

impl Walk {
    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One context per full window: the first node of the window is the
    /// center and the following `window - 1` nodes are its positives.
    pub fn contexts(&self, window: usize) -> Vec<WalkContext<'_>> {
        contexts(&self.0, window)
    }
}

/// Center node plus the positive nodes that follow it in the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkContext<'a> {
    pub center: NodeId,
    pub positives: &'a [NodeId],
}

pub fn contexts(walk: &[NodeId], window: usize) -> Vec<WalkContext<'_>> {
    if window == 0 || walk.len() < window {
        return Vec::new();
    }
    walk.windows(window)
        .map(|w| WalkContext {
            center: w[0],
            positives: &w[1..],
        })
        .collect()
}

#[inline]
fn bias(g: &Graph, prev: Option<NodeId>, x: NodeId, inv_p: f64, inv_q: f64) -> f64 {
    match prev {
        None => 1.0,
        Some(t) if t == x => inv_p,
        Some(t) if g.has_edge(t, x) => 1.0,
        Some(_) => inv_q,
    }
}

/// Unnormalized transition weights, aligned with `g.neighbors(cur)`. Returns the total.
fn step_weights(
    g: &Graph,
    prev: Option<NodeId>,
    cur: NodeId,
    cfg: &WalkConfig,
    out: &mut Vec<f64>,
) -> f64 {
    let (inv_p, inv_q) = (1.0 / cfg.p, 1.0 / cfg.q);
    out.clear();
    let mut total = 0.0;
    for &(x, w) in g.neighbors(cur) {
        let uw = w * bias(g, prev, x, inv_p, inv_q);
        total += uw;
        out.push(uw);
    }
    total
}

/// Transition probabilities from `cur` to each of its neighbors (in
/// `g.neighbors(cur)` order), given the previously visited node.
pub fn step_distribution(
    g: &Graph,
    prev: Option<NodeId>,
    cur: NodeId,
    cfg: &WalkConfig,
) -> Result<Vec<f64>, WalkError> {
    if g.degree(cur) == 0 {
        return Err(WalkError::DeadEnd(cur));
    }
    let mut probs = Vec::with_capacity(g.degree(cur));
    let total = step_weights(g, prev, cur, cfg, &mut probs);
    if total <= 0.0 {
        return Err(WalkError::DeadEnd(cur));
    }
    for pr in &mut probs {
        *pr /= total;
    }
    Ok(probs)
}

/// Draws one biased walk of at most `cfg.walk_length` nodes starting at `start`.
/// An isolated start (or all-zero edge weights) truncates the walk.
pub fn random_walk<R: rand::Rng + ?Sized>(
    g: &Graph,
    start: NodeId,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Walk {
    let mut nodes = Vec::with_capacity(cfg.walk_length);
    let mut scratch = Vec::new();
    if cfg.walk_length == 0 {
        return Walk(nodes);
    }
    nodes.push(start);
    let mut prev = None;
    let mut cur = start;
    while nodes.len() < cfg.walk_length {
        let total = step_weights(g, prev, cur, cfg, &mut scratch);
        if total <= 0.0 {
            break;
        }
        let mut target = rng.gen::<f64>() * total;
        let neighbors = g.neighbors(cur);
        let mut next = neighbors[neighbors.len() - 1].0;
        for (i, &w) in scratch.iter().enumerate() {
            if target < w {
                next = neighbors[i].0;
                break;
            }
            target -= w;
        }
        nodes.push(next);
        prev = Some(cur);
        cur = next;
    }
    Walk(nodes)
}

/// Writes walks one per line as space-separated node ids.
pub fn write_walks<W: std::io::Write>(mut out: W, walks: &[Walk]) -> std::io::Result<()> {
    for walk in walks {
        let line: Vec<String> = walk.0.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}
