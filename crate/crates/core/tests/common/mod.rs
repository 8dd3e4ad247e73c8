//! Reference computations shared by the integration tests. Nothing here calls
//! into the library's numerical code.

#![allow(dead_code)]

use std::path::PathBuf;

/// Solves `a x = b` for each column of `b` by Gaussian elimination with
/// partial pivoting. `a` is `n x n` row-major, `b` is `n x m` row-major.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize, m: usize) -> Vec<f64> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            for k in 0..m {
                b.swap(col * m + k, pivot * m + k);
            }
        }
        let diag = a[col * n + col];
        assert!(diag.abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = a[row * n + col] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            for k in 0..m {
                b[row * m + k] -= f * b[col * m + k];
            }
        }
    }
    let mut x = vec![0.0; n * m];
    for row in (0..n).rev() {
        for k in 0..m {
            let mut acc = b[row * m + k];
            for j in row + 1..n {
                acc -= a[row * n + j] * x[j * m + k];
            }
            x[row * m + k] = acc / a[row * n + row];
        }
    }
    x
}

/// Regularized least squares with prior mean `beta0` and ridge `lambda`:
/// `argmin ||H B - T||^2 + lambda ||B - beta0||^2`, i.e.
/// `(H'H + lambda I) B = H'T + lambda beta0`. `h` is `N x d`, `t` is `N x V`,
/// `beta0` is `d x V`; returns `d x V`, all row-major.
pub fn ridge(h: &[f64], t: &[f64], beta0: &[f64], n: usize, d: usize, v: usize, lambda: f64) -> Vec<f64> {
    let mut a = vec![0.0; d * d];
    let mut rhs = vec![0.0; d * v];
    for i in 0..d {
        for j in 0..d {
            a[i * d + j] = (0..n).map(|r| h[r * d + i] * h[r * d + j]).sum::<f64>();
        }
        a[i * d + i] += lambda;
        for k in 0..v {
            rhs[i * v + k] = (0..n).map(|r| h[r * d + i] * t[r * v + k]).sum::<f64>() + lambda * beta0[i * v + k];
        }
    }
    solve(a, rhs, d, v)
}

/// Second-order transition probabilities from `cur` having arrived from
/// `prev`, read off a dense weighted adjacency matrix. Returns `(x, prob)` for
/// every neighbor `x` of `cur`.
pub fn node2vec_transition(adj: &[Vec<f64>], prev: usize, cur: usize, p: f64, q: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (x, &w) in adj[cur].iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let bias = if x == prev {
            1.0 / p
        } else if adj[prev][x] != 0.0 {
            1.0
        } else {
            1.0 / q
        };
        out.push((x, w * bias));
    }
    let z: f64 = out.iter().map(|e| e.1).sum();
    out.iter_mut().for_each(|e| e.1 /= z);
    out
}

/// Cora location: `CORA_DIR`, else `data/cora` at the workspace root.
pub fn cora_dir() -> Option<PathBuf> {
    let candidates = std::env::var_os("CORA_DIR")
        .map(PathBuf::from)
        .into_iter()
        .chain(std::iter::once(
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/cora"),
        ));
    for dir in candidates {
        if dir.join("edges.txt").exists() || dir.join("cora.cites").exists() {
            return Some(dir);
        }
    }
    None
}

/// Norm-wise relative difference `||a - b|| / max(||a||, ||b||)`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}
