//! Sequential OS-ELM updates against the closed-form ridge solution.

mod common;

use rand::Rng;
use seqn2v::rng::SeedStream;
use seqn2v::{OselmConfig, OselmModel};

struct Problem {
    n: usize,
    d: usize,
    v: usize,
    h: Vec<f64>,
    t: Vec<f64>,
    beta0: Vec<f64>,
}

fn problem(seed: u64, n: usize, d: usize, v: usize, prior: bool) -> Problem {
    let mut rng = SeedStream::new(seed).rng("oracle", 0);
    let h = (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let t = (0..n * v).map(|_| if rng.gen_bool(0.3) { 1.0 } else { 0.0 }).collect();
    let beta0 = (0..d * v)
        .map(|_| if prior { rng.gen_range(-0.5..0.5) } else { 0.0 })
        .collect();
    Problem { n, d, v, h, t, beta0 }
}

/// Feeds every row of `H` with all `V` targets and returns `beta` as `d x V`.
fn run_oselm<T: seqn2v::Scalar>(pb: &Problem, p0: f64) -> Vec<f64> {
    let (d, v) = (pb.d, pb.v);
    let cfg = OselmConfig {
        dims: d,
        mu: 1.0,
        ..OselmConfig::default()
    };
    let beta: Vec<T> = (0..v * d).map(|k| T::of(pb.beta0[(k % d) * v + k / d])).collect();
    let mut p = vec![T::zero(); d * d];
    (0..d).for_each(|i| p[i * d + i] = T::of(p0));
    let mut m = OselmModel::from_parts(&cfg, v, beta, p, None).unwrap();
    for r in 0..pb.n {
        let h: Vec<T> = pb.h[r * d..(r + 1) * d].iter().map(|&x| T::of(x)).collect();
        let targets: Vec<(usize, T)> = (0..v).map(|j| (j, T::of(pb.t[r * v + j]))).collect();
        m.rls_update(&h, &targets).unwrap();
    }
    let mut out = vec![0.0; d * v];
    for j in 0..v {
        for (i, b) in m.beta_column(j).iter().enumerate() {
            out[i * v + j] = b.as_f64();
        }
    }
    out
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn matches_ridge_from_zero_prior() {
    for (seed, n, d, v) in [(1, 50, 8, 16), (2, 10, 4, 6), (3, 3, 8, 5), (4, 50, 1, 2)] {
        let pb = problem(seed, n, d, v, false);
        let oracle = common::ridge(&pb.h, &pb.t, &pb.beta0, n, d, v, 1.0);
        let got = run_oselm::<f64>(&pb, 1.0);
        assert!(max_abs(&oracle, &got) < 1e-10, "seed {seed}: {}", max_abs(&oracle, &got));
    }
}

#[test]
fn matches_ridge_with_prior_and_scaled_p0() {
    for (seed, p0) in [(5, 1.0), (6, 10.0), (7, 0.1)] {
        let pb = problem(seed, 40, 6, 12, true);
        let oracle = common::ridge(&pb.h, &pb.t, &pb.beta0, pb.n, pb.d, pb.v, 1.0 / p0);
        let got = run_oselm::<f64>(&pb, p0);
        assert!(max_abs(&oracle, &got) < 1e-9, "p0 {p0}: {}", max_abs(&oracle, &got));
    }
}

#[test]
fn single_precision_tracks_oracle() {
    let pb = problem(8, 50, 8, 16, false);
    let oracle = common::ridge(&pb.h, &pb.t, &pb.beta0, pb.n, pb.d, pb.v, 1.0);
    let got = run_oselm::<f32>(&pb, 1.0);
    assert!(max_abs(&oracle, &got) < 1e-4, "{}", max_abs(&oracle, &got));
}

#[test]
fn gaussian_elimination_solves_known_system() {
    // [[2, 1], [1, 3]] x = [3, 5] -> x = [0.8, 1.4]
    let x = common::solve(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2, 1);
    assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
    // Needs a row swap.
    let x = common::solve(vec![0.0, 1.0, 1.0, 0.0], vec![2.0, 3.0], 2, 1);
    assert_eq!(x, vec![3.0, 2.0]);
}
