//! Dense node-embedding matrices.

use crate::scalar::Scalar;

/// Row-major `rows x dims` matrix; row `v` is the embedding of node `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    rows: usize,
    dims: usize,
    data: Vec<T>,
}

impl<T: Scalar> Embedding<T> {
    pub fn from_vec(rows: usize, dims: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * dims, "embedding buffer has wrong length");
        Embedding { rows, dims, data }
    }

    pub fn zeros(rows: usize, dims: usize) -> Self {
        Embedding::from_vec(rows, dims, vec![T::zero(); rows * dims])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, v: usize) -> &[T] {
        &self.data[v * self.dims..(v + 1) * self.dims]
    }

    pub fn row_mut(&mut self, v: usize) -> &mut [T] {
        &mut self.data[v * self.dims..(v + 1) * self.dims]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn to_f64(&self) -> Embedding<f64> {
        Embedding {
            rows: self.rows,
            dims: self.dims,
            data: self.data.iter().map(|x| x.as_f64()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Embedding<T>) -> f64 {
        assert_eq!((self.rows, self.dims), (other.rows, other.dims));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs().as_f64())
            .fold(0.0, f64::max)
    }
}
