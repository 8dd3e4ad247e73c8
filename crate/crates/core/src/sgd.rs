//! Baseline skip-gram with negative sampling trained by plain SGD.

use thiserror::Error;

use crate::embedding::Embedding;
use crate::graph::NodeId;
use crate::oselm::{ParameterCount, WalkReport};
use crate::sampler::WalkNegatives;
use crate::scalar::{axpy, dot, sigmoid, Scalar};
use crate::walk::WalkContext;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SgdError {
    #[error("invalid model shape: dims={dims}, nodes={nodes}")]
    InvalidShape { dims: usize, nodes: usize },
    #[error("learning rate must be non-negative and finite, got {0}")]
    InvalidLearningRate(f64),
    #[error("buffer `{name}` has length {got}, expected {expected}")]
    BadBuffer {
        name: &'static str,
        got: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdModel<T> {
    dims: usize,
    nodes: usize,
    lr: T,
    /// Row-major `V x d`; the embedding.
    w_in: Vec<T>,
    /// Row-major `V x d`.
    w_out: Vec<T>,
}

impl<T: Scalar> SgdModel<T> {
    /// `w_in ~ U[-0.5/d, 0.5/d]`, `w_out = 0`.
    pub fn new<R: rand::Rng + ?Sized>(
        dims: usize,
        nodes: usize,
        lr: f64,
        rng: &mut R,
    ) -> Result<Self, SgdError> {
        check_shape(dims, nodes, lr)?;
        let bound = 0.5 / dims as f64;
        let w_in = (0..dims * nodes)
            .map(|_| T::of(rng.gen_range(-bound..bound)))
            .collect();
        Ok(SgdModel {
            dims,
            nodes,
            lr: T::of(lr),
            w_in,
            w_out: vec![T::zero(); dims * nodes],
        })
    }

    pub fn from_parts(
        dims: usize,
        nodes: usize,
        lr: f64,
        w_in: Vec<T>,
        w_out: Vec<T>,
    ) -> Result<Self, SgdError> {
        check_shape(dims, nodes, lr)?;
        for (name, buf) in [("w_in", &w_in), ("w_out", &w_out)] {
            if buf.len() != dims * nodes {
                return Err(SgdError::BadBuffer {
                    name,
                    got: buf.len(),
                    expected: dims * nodes,
                });
            }
        }
        Ok(SgdModel {
            dims,
            nodes,
            lr: T::of(lr),
            w_in,
            w_out,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn learning_rate(&self) -> T {
        self.lr
    }

    pub fn w_in(&self) -> &[T] {
        &self.w_in
    }

    pub fn w_out(&self) -> &[T] {
        &self.w_out
    }

    pub fn input_row(&self, v: NodeId) -> &[T] {
        &self.w_in[v * self.dims..(v + 1) * self.dims]
    }

    pub fn output_row(&self, v: NodeId) -> &[T] {
        &self.w_out[v * self.dims..(v + 1) * self.dims]
    }

    pub fn is_finite(&self) -> bool {
        self.w_in.iter().chain(&self.w_out).all(|x| x.is_finite())
    }

    /// One SGNS step for a context. Output rows move per sample; the
    /// accumulated center gradient is applied once after all samples.
    pub fn context_update(&mut self, ctx: &WalkContext<'_>, negatives: &[NodeId]) {
        let d = self.dims;
        let c = ctx.center;
        let ns = if ctx.positives.is_empty() {
            0
        } else {
            negatives.len() / ctx.positives.len()
        };
        let mut grad_in = vec![T::zero(); d];
        let center = c * d..(c + 1) * d;
        for (k, &pos) in ctx.positives.iter().enumerate() {
            let samples = std::iter::once((pos, T::one()))
                .chain(negatives[k * ns..(k + 1) * ns].iter().map(|&n| (n, T::zero())));
            for (j, y) in samples {
                let out = j * d..(j + 1) * d;
                let g = sigmoid(dot(&self.w_in[center.clone()], &self.w_out[out.clone()])) - y;
                axpy(g, &self.w_out[out.clone()], &mut grad_in);
                axpy(-self.lr * g, &self.w_in[center.clone()], &mut self.w_out[out]);
            }
        }
        axpy(-self.lr, &grad_in, &mut self.w_in[center]);
    }

    pub fn train_walk(&mut self, contexts: &[WalkContext<'_>], negatives: &WalkNegatives) -> WalkReport {
        for (i, ctx) in contexts.iter().enumerate() {
            self.context_update(ctx, negatives.for_context(i));
        }
        WalkReport {
            contexts: contexts.len(),
            skipped: 0,
        }
    }

    /// Copy of the input-side weights.
    pub fn embedding_snapshot(&self) -> Embedding<T> {
        Embedding::from_vec(self.nodes, self.dims, self.w_in.clone())
    }

    pub fn parameter_count(&self) -> ParameterCount {
        ParameterCount {
            trainable: 2 * self.nodes * self.dims,
            state: 0,
            fixed: 0,
        }
    }
}

/// Parameter count of an SGD skip-gram of the given shape.
pub fn sgd_parameter_count(dims: usize, nodes: usize) -> Result<ParameterCount, SgdError> {
    if dims == 0 || nodes == 0 {
        return Err(SgdError::InvalidShape { dims, nodes });
    }
    Ok(ParameterCount {
        trainable: 2 * nodes * dims,
        state: 0,
        fixed: 0,
    })
}

fn check_shape(dims: usize, nodes: usize, lr: f64) -> Result<(), SgdError> {
    if dims == 0 || nodes == 0 {
        return Err(SgdError::InvalidShape { dims, nodes });
    }
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(SgdError::InvalidLearningRate(lr));
    }
    Ok(())
}

/// Negative-sampling loss of one center against `(row, target)` samples:
/// `-sum_j [y_j ln s(x_j) + (1 - y_j) ln(1 - s(x_j))]`, `x_j = in . out_j`.
pub fn sgns_loss<T: Scalar>(input: &[T], outputs: &[&[T]], targets: &[T]) -> T {
    outputs
        .iter()
        .zip(targets)
        .map(|(out, &y)| {
            let x = dot(input, out);
            // ln s(x) = -ln(1 + e^-x), ln(1 - s(x)) = -ln(1 + e^x)
            let log_pos = -(-x).exp().ln_1p();
            let log_neg = -x.exp().ln_1p();
            -(y * log_pos + (T::one() - y) * log_neg)
        })
        .sum()
}

/// Analytic gradients of [`sgns_loss`]: `(d/d input, d/d output_j for each j)`.
pub fn sgns_gradients<T: Scalar>(
    input: &[T],
    outputs: &[&[T]],
    targets: &[T],
) -> (Vec<T>, Vec<Vec<T>>) {
    let mut g_in = vec![T::zero(); input.len()];
    let mut g_out = Vec::with_capacity(outputs.len());
    for (out, &y) in outputs.iter().zip(targets) {
        let g = sigmoid(dot(input, out)) - y;
        axpy(g, out, &mut g_in);
        g_out.push(input.iter().map(|&x| g * x).collect());
    }
    (g_in, g_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use crate::rng::SeedStream;

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let mut rng = SeedStream::new(1).rng("init", 0);
        let mut m = SgdModel::<f64>::new(4, 6, 0.0, &mut rng).unwrap();
        let before = m.clone();
        let ctx = WalkContext {
            center: 0,
            positives: &[1, 2],
        };
        m.context_update(&ctx, &[3, 4]);
        assert_eq!(m, before);
    }

    #[test]
    fn hand_gradient_single_positive() {
        // w_out starts at zero so the score is 0 and g = 0.5 - 1 = -0.5.
        let lr = 0.01;
        let w_in = vec![0.2, -0.4, 0.0, 0.0];
        let mut m = SgdModel::<f64>::from_parts(2, 2, lr, w_in.clone(), vec![0.0; 4]).unwrap();
        let ctx = WalkContext {
            center: 0,
            positives: &[1],
        };
        m.context_update(&ctx, &[]);
        let expect = [0.5 * lr * 0.2, 0.5 * lr * -0.4];
        for (got, want) in m.output_row(1).iter().zip(expect) {
            assert!((got - want).abs() < 1e-18);
        }
        // The center gradient used w_out = 0, so w_in is unchanged.
        assert_eq!(m.input_row(0), &w_in[..2]);
    }

    #[test]
    fn untouched_rows_keep_init() {
        let mut rng = SeedStream::new(2).rng("init", 0);
        let mut m = SgdModel::<f64>::new(4, 8, 0.05, &mut rng).unwrap();
        let before = m.clone();
        let ctx = WalkContext {
            center: 1,
            positives: &[2, 3],
        };
        for _ in 0..5 {
            m.context_update(&ctx, &[4, 5]);
        }
        for v in [0, 2, 3, 4, 5, 6, 7] {
            assert_eq!(m.input_row(v), before.input_row(v));
        }
        assert_ne!(m.input_row(1), before.input_row(1));
        assert_ne!(m.embedding_snapshot().as_slice(), m.w_out());
        assert!(m.is_finite());
    }

    #[test]
    fn init_bounds() {
        let mut rng = SeedStream::new(3).rng("init", 0);
        let m = SgdModel::<f32>::new(32, 100, 0.01, &mut rng).unwrap();
        assert!(m.embedding_snapshot().as_slice().iter().all(|x| x.abs() <= 0.5 / 32.0));
        assert!(m.w_out().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(sgd_parameter_count(32, 2708).unwrap().total(), 173_312);
        assert!(sgd_parameter_count(0, 2708).is_err());
        let proposed = 2708 * 32 + 32 * 32;
        let ratio = 173_312.0 / proposed as f64;
        assert!((ratio - 1.9766).abs() < 1e-3);
    }

    #[test]
    fn loss_decreases_after_one_step() {
        let mut rng = SeedStream::new(4).rng("init", 0);
        let mut m = SgdModel::<f64>::new(8, 10, 0.01, &mut rng).unwrap();
        // Give w_out some signal so the first step is not trivially tiny.
        let w_out: Vec<f64> = (0..80).map(|_| rng.gen_range(-0.1..0.1)).collect();
        m = SgdModel::from_parts(8, 10, 0.01, m.w_in().to_vec(), w_out).unwrap();
        let ctx = WalkContext {
            center: 0,
            positives: &[1, 2],
        };
        let negs = [3, 4, 5, 6];
        let loss = |m: &SgdModel<f64>| {
            let rows = [1, 3, 4, 2, 5, 6];
            let outs: Vec<&[f64]> = rows.iter().map(|&r| m.output_row(r)).collect();
            sgns_loss(m.input_row(0), &outs, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
        };
        let before = loss(&m);
        m.context_update(&ctx, &negs);
        assert!(loss(&m) < before);
    }
}
