//! OS-ELM skip-gram with tied weights.
//!
//! The hidden activation of a one-hot center node is `mu * beta[:, center]`,
//! so the output-side weights double as the input-side weights and no random
//! input matrix is stored. Each context runs one recursive-least-squares step:
//!
//! ```text
//! s      = h P h'
//! P     <- P - (P h')(h P) / (1 + s)
//! k      = P h'                       (with the updated P)
//! e_j    = y_j - h beta[:, j]         (pre-update beta)
//! beta_j <- beta_j + k e_j            for the positives (y = 1) and negatives (y = 0)
//! ```
//!
//! Using the updated `P`, the gain reduces to `k = (P h') (1 - s / denom)`,
//! which is how it is evaluated here (O(d) instead of O(d^2)).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Embedding;
use crate::graph::NodeId;
use crate::sampler::WalkNegatives;
use crate::scalar::{axpy, dot, Scalar};
use crate::walk::WalkContext;

/// Below this magnitude the literal denominator `h P h'` is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OselmError {
    #[error("invalid model shape: dims={dims}, nodes={nodes} (need dims >= 1, nodes >= 2)")]
    InvalidShape { dims: usize, nodes: usize },
    #[error("scale factor mu must be positive and finite, got {0}")]
    InvalidMu(f64),
    #[error("initial P scale must be positive and finite, got {0}")]
    InvalidP0(f64),
    #[error("buffer `{name}` has length {got}, expected {expected}")]
    BadBuffer {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("singular update for center {center}: h P h' = {s:e}")]
    SingularUpdate { center: NodeId, s: f64 },
}

/// Source of the hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenMode {
    /// `h = mu * beta[:, center]`.
    Tied,
    /// `h = alpha[center, :]` with `alpha` fixed at random values.
    RandomAlpha,
}

/// Denominator of the `P` update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `1 + h P h'`, the standard OS-ELM form.
    Regularized,
    /// `h P h'` alone. With this form `P_new h' = 0`, so `beta` never moves.
    Literal,
}

/// Per-context (`Sequential`) or accumulate-then-commit per walk (`Dataflow`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    Sequential,
    Dataflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OselmConfig {
    pub dims: usize,
    pub mu: f64,
    pub mode: HiddenMode,
    pub p0_scale: f64,
    pub denominator: Denominator,
}

impl Default for OselmConfig {
    fn default() -> Self {
        OselmConfig {
            dims: 32,
            mu: 0.01,
            mode: HiddenMode::Tied,
            p0_scale: 1.0,
            denominator: Denominator::Regularized,
        }
    }
}

/// Parameter accounting, in matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterCount {
    pub trainable: usize,
    pub state: usize,
    pub fixed: usize,
}

impl ParameterCount {
    pub fn total(&self) -> usize {
        self.trainable + self.state + self.fixed
    }

    pub fn bytes(&self, element_size: usize) -> usize {
        self.total() * element_size
    }
}

/// Outcome of training one walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WalkReport {
    pub contexts: usize,
    pub skipped: usize,
}

/// Accumulated `P` and `beta` differences of one walk.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainDelta<T> {
    dims: usize,
    /// Row-major `d x d`.
    pub dp: Vec<T>,
    columns: HashMap<NodeId, usize>,
    ids: Vec<NodeId>,
    data: Vec<T>,
}

impl<T: Scalar> TrainDelta<T> {
    fn new(dims: usize) -> Self {
        TrainDelta {
            dims,
            dp: vec![T::zero(); dims * dims],
            columns: HashMap::new(),
            ids: Vec::new(),
            data: Vec::new(),
        }
    }

    fn column_mut(&mut self, node: NodeId) -> &mut [T] {
        let d = self.dims;
        let idx = *self.columns.entry(node).or_insert_with(|| {
            self.ids.push(node);
            self.data.extend(std::iter::repeat(T::zero()).take(d));
            self.ids.len() - 1
        });
        &mut self.data[idx * d..(idx + 1) * d]
    }

    /// Touched `beta` columns in first-touch order.
    pub fn touched(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn beta_column(&self, node: NodeId) -> Option<&[T]> {
        let d = self.dims;
        self.columns.get(&node).map(|&i| &self.data[i * d..(i + 1) * d])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OselmModel<T> {
    dims: usize,
    nodes: usize,
    mu: T,
    mode: HiddenMode,
    denominator: Denominator,
    /// `beta` stored node-major: column `v` of the `d x V` matrix is contiguous.
    beta: Vec<T>,
    /// Row-major `d x d`, kept exactly symmetric.
    p: Vec<T>,
    /// Row-major `V x d`; only in `RandomAlpha` mode.
    alpha: Option<Vec<T>>,
}

impl<T: Scalar> OselmModel<T> {
    /// `P = p0_scale * I`, `beta ~ U[-0.5/d, 0.5/d]`, and in `RandomAlpha`
    /// mode `alpha ~ U[-1, 1]` drawn after `beta`.
    pub fn new<R: rand::Rng + ?Sized>(
        cfg: &OselmConfig,
        nodes: usize,
        rng: &mut R,
    ) -> Result<Self, OselmError> {
        validate(cfg, nodes)?;
        let d = cfg.dims;
        let bound = 0.5 / d as f64;
        let beta = (0..d * nodes)
            .map(|_| T::of(rng.gen_range(-bound..bound)))
            .collect();
        let alpha = match cfg.mode {
            HiddenMode::Tied => None,
            HiddenMode::RandomAlpha => Some(
                (0..nodes * d)
                    .map(|_| T::of(rng.gen_range(-1.0..1.0)))
                    .collect(),
            ),
        };
        let mut p = vec![T::zero(); d * d];
        for i in 0..d {
            p[i * d + i] = T::of(cfg.p0_scale);
        }
        Ok(OselmModel {
            dims: d,
            nodes,
            mu: T::of(cfg.mu),
            mode: cfg.mode,
            denominator: cfg.denominator,
            beta,
            p,
            alpha,
        })
    }

    /// Assembles a model from explicit buffers (`beta` node-major, `p` row-major,
    /// `alpha` row-major `V x d`). `cfg.p0_scale` is ignored.
    pub fn from_parts(
        cfg: &OselmConfig,
        nodes: usize,
        beta: Vec<T>,
        p: Vec<T>,
        alpha: Option<Vec<T>>,
    ) -> Result<Self, OselmError> {
        let d = cfg.dims;
        if d == 0 || nodes < 2 {
            return Err(OselmError::InvalidShape { dims: d, nodes });
        }
        if !(cfg.mu > 0.0 && cfg.mu.is_finite()) {
            return Err(OselmError::InvalidMu(cfg.mu));
        }
        check_len("beta", beta.len(), d * nodes)?;
        check_len("p", p.len(), d * d)?;
        let expected_alpha = match cfg.mode {
            HiddenMode::Tied => 0,
            HiddenMode::RandomAlpha => nodes * d,
        };
        check_len("alpha", alpha.as_ref().map_or(0, Vec::len), expected_alpha)?;
        if (cfg.mode == HiddenMode::RandomAlpha) != alpha.is_some() {
            return Err(OselmError::BadBuffer {
                name: "alpha",
                got: alpha.as_ref().map_or(0, Vec::len),
                expected: expected_alpha,
            });
        }
        Ok(OselmModel {
            dims: d,
            nodes,
            mu: T::of(cfg.mu),
            mode: cfg.mode,
            denominator: cfg.denominator,
            beta,
            p,
            alpha,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn mode(&self) -> HiddenMode {
        self.mode
    }

    pub fn denominator(&self) -> Denominator {
        self.denominator
    }

    /// `beta` in node-major order (`V` contiguous columns of length `d`).
    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn beta_column(&self, v: NodeId) -> &[T] {
        &self.beta[v * self.dims..(v + 1) * self.dims]
    }

    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn alpha(&self) -> Option<&[T]> {
        self.alpha.as_deref()
    }

    pub fn is_finite(&self) -> bool {
        self.beta.iter().chain(&self.p).all(|x| x.is_finite())
    }

    /// Hidden-layer output for a one-hot center node.
    pub fn hidden_activation(&self, center: NodeId) -> Vec<T> {
        let mut h = vec![T::zero(); self.dims];
        self.hidden_into(center, &mut h);
        h
    }

    fn hidden_into(&self, center: NodeId, h: &mut [T]) {
        match &self.alpha {
            Some(alpha) => h.copy_from_slice(&alpha[center * self.dims..(center + 1) * self.dims]),
            None => {
                for (hi, &b) in h.iter_mut().zip(self.beta_column(center)) {
                    *hi = self.mu * b;
                }
            }
        }
    }

    /// `P h'`, `s = h P h'` and the update denominator.
    fn project(&self, h: &[T], ph: &mut [T]) -> (T, T) {
        let d = self.dims;
        for (i, out) in ph.iter_mut().enumerate() {
            *out = dot(&self.p[i * d..(i + 1) * d], h);
        }
        let s = dot(h, ph);
        let denom = match self.denominator {
            Denominator::Regularized => T::one() + s,
            Denominator::Literal => s,
        };
        (s, denom)
    }

    fn check_denominator(&self, center: NodeId, denom: T) -> Result<(), OselmError> {
        if self.denominator == Denominator::Literal && denom.abs().as_f64() < SINGULAR_EPS {
            return Err(OselmError::SingularUpdate {
                center,
                s: denom.as_f64(),
            });
        }
        Ok(())
    }

    /// `target -= scale * v v'` over the full matrix. `v[i] * v[j]` and
    /// `v[j] * v[i]` are the same float, so a symmetric `target` stays
    /// exactly symmetric.
    fn rank_one_downdate(dims: usize, target: &mut [T], v: &[T], scale: T) {
        for (row, &vi) in target.chunks_exact_mut(dims).zip(v) {
            for (t, &vj) in row.iter_mut().zip(v) {
                *t -= scale * (vi * vj);
            }
        }
    }

    /// One recursive-least-squares step with hidden vector `h` against an
    /// arbitrary set of `(column, target)` pairs. Errors are evaluated against
    /// `beta` before any column moves; repeated columns accumulate.
    pub fn rls_update(&mut self, h: &[T], targets: &[(NodeId, T)]) -> Result<(), OselmError> {
        self.rls_step(usize::MAX, h, targets.iter().copied())
    }

    fn rls_step<I>(&mut self, center: NodeId, h: &[T], samples: I) -> Result<(), OselmError>
    where
        I: Iterator<Item = (NodeId, T)> + Clone,
    {
        let d = self.dims;
        let mut ph = vec![T::zero(); d];
        let (s, denom) = self.project(h, &mut ph);
        self.check_denominator(center, denom)?;
        Self::rank_one_downdate(d, &mut self.p, &ph, T::one() / denom);
        // Gain with the updated P, computed in place.
        let shrink = T::one() - s / denom;
        ph.iter_mut().for_each(|x| *x *= shrink);
        let errors: Vec<T> = samples
            .clone()
            .map(|(j, y)| y - dot(h, self.beta_column(j)))
            .collect();
        for ((j, _), e) in samples.zip(errors) {
            axpy(e, &ph, &mut self.beta[j * d..(j + 1) * d]);
        }
        Ok(())
    }

    /// Trains one context: every positive with target 1 followed by its
    /// negatives with target 0. `negatives` holds `ns` ids per positive.
    pub fn context_update(
        &mut self,
        ctx: &WalkContext<'_>,
        negatives: &[NodeId],
    ) -> Result<(), OselmError> {
        let h = self.hidden_activation(ctx.center);
        self.rls_step(ctx.center, &h, samples(ctx, negatives))
    }

    /// Accumulates the `P` and `beta` differences of all contexts against the
    /// state frozen at walk start. Singular contexts are skipped and counted.
    pub fn walk_delta(
        &self,
        contexts: &[WalkContext<'_>],
        negatives: &WalkNegatives,
    ) -> (TrainDelta<T>, usize) {
        let d = self.dims;
        let mut delta = TrainDelta::new(d);
        let mut skipped = 0;
        let mut h = vec![T::zero(); d];
        let mut ph = vec![T::zero(); d];
        let mut gain = vec![T::zero(); d];
        for (i, ctx) in contexts.iter().enumerate() {
            self.hidden_into(ctx.center, &mut h);
            let (s, denom) = self.project(&h, &mut ph);
            if self.check_denominator(ctx.center, denom).is_err() {
                skipped += 1;
                continue;
            }
            Self::rank_one_downdate(d, &mut delta.dp, &ph, T::one() / denom);
            // Gain of this context's local P = P_frozen + its own rank-one term.
            let shrink = T::one() - s / denom;
            for (g, &x) in gain.iter_mut().zip(&ph) {
                *g = x * shrink;
            }
            for (j, y) in samples::<T>(ctx, negatives.for_context(i)) {
                let e = y - dot(&h, self.beta_column(j));
                axpy(e, &gain, delta.column_mut(j));
            }
        }
        (delta, skipped)
    }

    /// Commits an accumulated walk delta: `P += dP`, `beta += dbeta`.
    pub fn apply_delta(&mut self, delta: &TrainDelta<T>) {
        let d = self.dims;
        for (p, &dp) in self.p.iter_mut().zip(&delta.dp) {
            *p += dp;
        }
        for (idx, &node) in delta.ids.iter().enumerate() {
            axpy(
                T::one(),
                &delta.data[idx * d..(idx + 1) * d],
                &mut self.beta[node * d..(node + 1) * d],
            );
        }
    }

    /// Frozen-state variant: one commit per walk.
    pub fn walk_update_dataflow(
        &mut self,
        contexts: &[WalkContext<'_>],
        negatives: &WalkNegatives,
    ) -> WalkReport {
        let (delta, skipped) = self.walk_delta(contexts, negatives);
        self.apply_delta(&delta);
        WalkReport {
            contexts: contexts.len(),
            skipped,
        }
    }

    pub fn walk_update_sequential(
        &mut self,
        contexts: &[WalkContext<'_>],
        negatives: &WalkNegatives,
    ) -> WalkReport {
        // Same arithmetic as calling `context_update` per context, but each
        // downdate of `P` is deferred and applied row by row during the next
        // projection, while the row is still in cache.
        let d = self.dims;
        let mut skipped = 0;
        let mut h = vec![T::zero(); d];
        let mut ph = vec![T::zero(); d];
        let mut pending = vec![T::zero(); d];
        let mut pending_scale: Option<T> = None;
        let mut errors = Vec::new();
        for (i, ctx) in contexts.iter().enumerate() {
            self.hidden_into(ctx.center, &mut h);
            match pending_scale.take() {
                Some(scale) => {
                    for ((row, &vi), out) in self.p.chunks_exact_mut(d).zip(&pending).zip(ph.iter_mut()) {
                        for (t, &vj) in row.iter_mut().zip(&pending) {
                            *t -= scale * (vi * vj);
                        }
                        *out = dot(row, &h);
                    }
                }
                None => {
                    for (row, out) in self.p.chunks_exact(d).zip(ph.iter_mut()) {
                        *out = dot(row, &h);
                    }
                }
            }
            let s = dot(&h, &ph);
            let denom = match self.denominator {
                Denominator::Regularized => T::one() + s,
                Denominator::Literal => s,
            };
            if self.check_denominator(ctx.center, denom).is_err() {
                skipped += 1;
                continue;
            }
            pending.copy_from_slice(&ph);
            pending_scale = Some(T::one() / denom);
            let shrink = T::one() - s / denom;
            ph.iter_mut().for_each(|x| *x *= shrink);
            let negs = negatives.for_context(i);
            errors.clear();
            errors.extend(samples::<T>(ctx, negs).map(|(j, y)| y - dot(&h, self.beta_column(j))));
            for ((j, _), &e) in samples::<T>(ctx, negs).zip(&errors) {
                axpy(e, &ph, &mut self.beta[j * d..(j + 1) * d]);
            }
        }
        if let Some(scale) = pending_scale {
            Self::rank_one_downdate(d, &mut self.p, &pending, scale);
        }
        WalkReport {
            contexts: contexts.len(),
            skipped,
        }
    }

    pub fn train_walk(
        &mut self,
        contexts: &[WalkContext<'_>],
        negatives: &WalkNegatives,
        mode: UpdateMode,
    ) -> WalkReport {
        match mode {
            UpdateMode::Sequential => self.walk_update_sequential(contexts, negatives),
            UpdateMode::Dataflow => self.walk_update_dataflow(contexts, negatives),
        }
    }

    /// Input-side weights as a `V x d` copy: `mu * beta'` in tied mode, `alpha` otherwise.
    pub fn embedding_snapshot(&self) -> Embedding<T> {
        let data = match &self.alpha {
            Some(alpha) => alpha.clone(),
            None => self.beta.iter().map(|&b| self.mu * b).collect(),
        };
        Embedding::from_vec(self.nodes, self.dims, data)
    }

    pub fn parameter_count(&self) -> ParameterCount {
        ParameterCount {
            trainable: self.dims * self.nodes,
            state: self.dims * self.dims,
            fixed: if self.alpha.is_some() {
                self.nodes * self.dims
            } else {
                0
            },
        }
    }
}

fn validate(cfg: &OselmConfig, nodes: usize) -> Result<(), OselmError> {
    if cfg.dims == 0 || nodes < 2 {
        return Err(OselmError::InvalidShape {
            dims: cfg.dims,
            nodes,
        });
    }
    if !(cfg.mu > 0.0 && cfg.mu.is_finite()) {
        return Err(OselmError::InvalidMu(cfg.mu));
    }
    if !(cfg.p0_scale > 0.0 && cfg.p0_scale.is_finite()) {
        return Err(OselmError::InvalidP0(cfg.p0_scale));
    }
    Ok(())
}

fn check_len(name: &'static str, got: usize, expected: usize) -> Result<(), OselmError> {
    if got == expected {
        Ok(())
    } else {
        Err(OselmError::BadBuffer {
            name,
            got,
            expected,
        })
    }
}

/// `(column, target)` pairs of one context: each positive then its negatives.
fn samples<'a, T: Scalar>(
    ctx: &'a WalkContext<'_>,
    negatives: &'a [NodeId],
) -> impl Iterator<Item = (NodeId, T)> + Clone + 'a {
    let ns = if ctx.positives.is_empty() {
        0
    } else {
        negatives.len() / ctx.positives.len()
    };
    ctx.positives.iter().enumerate().flat_map(move |(k, &pos)| {
        std::iter::once((pos, T::one()))
            .chain(negatives[k * ns..(k + 1) * ns].iter().map(|&n| (n, T::zero())))
    })
}
