//! Frequency-weighted negative sampling backed by Walker's alias method.

use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("alias table needs at least one positive weight")]
    NoPositiveWeight,
    #[error("weight {weight} at index {index} is negative or not finite")]
    InvalidWeight { index: usize, weight: f64 },
}

/// Appearance count per node over every walk observed so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyCounter {
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyCounter {
    pub fn new(node_count: usize) -> Self {
        FrequencyCounter {
            counts: vec![0; node_count],
            total: 0,
        }
    }

    pub fn observe(&mut self, walk: &[NodeId]) {
        for &v in walk {
            self.counts[v] += 1;
        }
        self.total += walk.len() as u64;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `count^exponent` per node.
    pub fn weights(&self, exponent: f64) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    0.0
                } else if exponent == 1.0 {
                    c as f64
                } else {
                    (c as f64).powf(exponent)
                }
            })
            .collect()
    }
}

/// Walker's alias table: O(n) construction, O(1) sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<NodeId>,
}

impl AliasTable {
    /// Builds the table with Vose's stable variant of the alias method.
    pub fn new(weights: &[f64]) -> Result<Self, SamplerError> {
        let mut sum = 0.0;
        for (index, &weight) in weights.iter().enumerate() {
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(SamplerError::InvalidWeight { index, weight });
            }
            sum += weight;
        }
        if sum <= 0.0 {
            return Err(SamplerError::NoPositiveWeight);
        }
        let n = weights.len();
        let scale = n as f64 / sum;
        let mut prob: Vec<f64> = weights.iter().map(|&w| w * scale).collect();
        let mut alias: Vec<NodeId> = (0..n).collect();
        let mut small = Vec::with_capacity(n);
        let mut large = Vec::with_capacity(n);
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l;
            prob[l] = (prob[l] + prob[s]) - 1.0;
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        Ok(AliasTable { prob, alias })
    }

    /// Table over `n` equally likely outcomes.
    pub fn uniform(n: usize) -> Self {
        AliasTable {
            prob: vec![1.0; n],
            alias: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Per-slot acceptance probabilities.
    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    /// Per-slot alternate outcomes.
    pub fn alias(&self) -> &[NodeId] {
        &self.alias
    }

    /// Sampling probability of every outcome implied by the `(prob, alias)` slots.
    pub fn implied_distribution(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut out = vec![0.0; self.len()];
        for (i, (&p, &a)) in self.prob.iter().zip(&self.alias).enumerate() {
            out[i] += p / n;
            out[a] += (1.0 - p) / n;
        }
        out
    }

    #[inline]
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        let slot = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[slot] {
            slot
        } else {
            self.alias[slot]
        }
    }
}

/// How often the alias table is rebuilt while edges stream in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TablePolicy {
    EveryEdges(NonZeroUsize),
    Never,
}

impl TablePolicy {
    pub fn every(k: usize) -> Option<Self> {
        NonZeroUsize::new(k).map(TablePolicy::EveryEdges)
    }
}

impl std::fmt::Display for TablePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TablePolicy::EveryEdges(k) => write!(f, "{k}"),
            TablePolicy::Never => f.write_str("never"),
        }
    }
}

impl std::str::FromStr for TablePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("never") {
            return Ok(TablePolicy::Never);
        }
        s.parse::<usize>()
            .ok()
            .and_then(TablePolicy::every)
            .ok_or_else(|| format!("expected a positive edge count or `never`, got `{s}`"))
    }
}

impl From<TablePolicy> for String {
    fn from(p: TablePolicy) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for TablePolicy {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Whether negatives are redrawn for every context or shared across a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativePolicy {
    Fresh,
    Shared,
}

/// Negatives drawn for one walk. Context `i`, positive `k` uses
/// `for_context(i)[k * ns .. (k + 1) * ns]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkNegatives {
    per_positive: usize,
    stride: usize,
    ids: Vec<NodeId>,
    shared: bool,
}

impl WalkNegatives {
    pub fn per_positive(&self) -> usize {
        self.per_positive
    }

    /// Negatives for context `i`, grouped by positive.
    pub fn for_context(&self, i: usize) -> &[NodeId] {
        if self.shared {
            &self.ids
        } else {
            &self.ids[i * self.stride..(i + 1) * self.stride]
        }
    }

    /// Negatives for positive `k` of context `i`.
    pub fn for_positive(&self, i: usize, k: usize) -> &[NodeId] {
        let ns = self.per_positive;
        &self.for_context(i)[k * ns..(k + 1) * ns]
    }
}

/// Node frequency counter, alias table and refresh bookkeeping.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    counter: FrequencyCounter,
    table: AliasTable,
    exponent: f64,
    policy: TablePolicy,
    additions: usize,
    rebuilds: usize,
}

impl NegativeSampler {
    /// Starts with a uniform table so negatives exist before any walk is seen.
    pub fn new(node_count: usize, exponent: f64, policy: TablePolicy) -> Self {
        NegativeSampler {
            counter: FrequencyCounter::new(node_count),
            table: AliasTable::uniform(node_count),
            exponent,
            policy,
            additions: 0,
            rebuilds: 0,
        }
    }

    pub fn observe(&mut self, walk: &[NodeId]) {
        self.counter.observe(walk);
    }

    pub fn counter(&self) -> &FrequencyCounter {
        &self.counter
    }

    pub fn table(&self) -> &AliasTable {
        &self.table
    }

    /// Rebuilds the table from the current counts. Keeps the old table if no
    /// node has been seen yet.
    pub fn rebuild(&mut self) {
        if let Ok(t) = AliasTable::new(&self.counter.weights(self.exponent)) {
            self.table = t;
        }
    }

    /// Records one edge insertion; rebuilds when the policy says so.
    /// Returns whether a rebuild happened.
    pub fn edge_added(&mut self) -> bool {
        self.additions += 1;
        match self.policy {
            TablePolicy::EveryEdges(k) if self.additions % k.get() == 0 => {
                self.rebuild();
                self.rebuilds += 1;
                true
            }
            _ => false,
        }
    }

    /// Number of policy-driven rebuilds during the edge stream.
    pub fn stream_rebuilds(&self) -> usize {
        self.rebuilds
    }

    pub fn edges_added(&self) -> usize {
        self.additions
    }

    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> NodeId {
        self.table.sample(rng)
    }

    /// Draws every negative needed to train one walk. `Fresh` draws `ns` per
    /// positive per context; `Shared` draws one `positives * ns` pool that
    /// every context reuses.
    pub fn negatives_for_walk<R: rand::Rng + ?Sized>(
        &self,
        contexts: usize,
        positives: usize,
        ns: usize,
        policy: NegativePolicy,
        rng: &mut R,
    ) -> WalkNegatives {
        let stride = positives * ns;
        let total = match policy {
            NegativePolicy::Fresh => stride * contexts,
            NegativePolicy::Shared => stride,
        };
        let ids = (0..total).map(|_| self.table.sample(rng)).collect();
        WalkNegatives {
            per_positive: ns,
            stride,
            ids,
            shared: policy == NegativePolicy::Shared,
        }
    }
}
