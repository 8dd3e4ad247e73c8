//! Monte-Carlo checks of the walk and alias samplers, and finite-difference
//! checks of the skip-gram gradients.

mod common;

use std::collections::HashMap;

use rand::Rng;
use seqn2v::sgd::{sgns_gradients, sgns_loss};
use seqn2v::walk::random_walk;
use seqn2v::{AliasTable, Graph, SeedStream, WalkConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Small weighted graph with triangles, a pendant node and a long chord.
fn test_graph() -> (Graph, Vec<Vec<f64>>) {
    let edges = [
        (0, 1, 1.0),
        (0, 2, 2.0),
        (1, 2, 1.0),
        (1, 3, 0.5),
        (2, 3, 1.5),
        (3, 4, 1.0),
        (4, 5, 3.0),
        (5, 0, 1.0),
        (5, 6, 1.0),
    ];
    let n = 7;
    let mut adj = vec![vec![0.0; n]; n];
    let mut g = Graph::new(n);
    for &(u, v, w) in &edges {
        g.add_edge(u, v, w).unwrap();
        adj[u][v] = w;
        adj[v][u] = w;
    }
    (g, adj)
}

#[test]
fn walk_transitions_match_second_order_probabilities() {
    let (g, adj) = test_graph();
    let cfg = WalkConfig {
        p: 0.5,
        q: 2.0,
        walk_length: 80,
        ..WalkConfig::default()
    };
    let mut rng = SeedStream::new(11).rng("walks", 0);
    let mut counts: HashMap<(usize, usize), HashMap<usize, u64>> = HashMap::new();
    let mut steps = 0u64;
    while steps < 150_000 {
        for start in 0..g.node_count() {
            let w = random_walk(&g, start, &cfg, &mut rng);
            for t in w.nodes().windows(3) {
                *counts.entry((t[0], t[1])).or_default().entry(t[2]).or_default() += 1;
                steps += 1;
            }
        }
    }
    let cells: usize = counts.keys().map(|&(_, cur)| g.degree(cur)).sum();
    // Bonferroni over all cells keeps the family-wise false alarm rate at 1e-3.
    let z = Normal::new(0.0, 1.0)
        .unwrap()
        .inverse_cdf(1.0 - 1e-3 / (2.0 * cells as f64));
    for (&(prev, cur), next) in &counts {
        let total: u64 = next.values().sum();
        for (x, prob) in common::node2vec_transition(&adj, prev, cur, cfg.p, cfg.q) {
            let observed = *next.get(&x).unwrap_or(&0) as f64;
            let expected = total as f64 * prob;
            let sd = (total as f64 * prob * (1.0 - prob)).sqrt();
            assert!(
                (observed - expected).abs() <= z * sd + 1e-9,
                "({prev}->{cur})->{x}: observed {observed}, expected {expected:.1} +- {:.1}",
                z * sd
            );
        }
        for &x in next.keys() {
            assert!(adj[cur][x] != 0.0, "stepped off an edge {cur}->{x}");
        }
    }
}

#[test]
fn first_step_is_weight_proportional() {
    let (g, adj) = test_graph();
    let cfg = WalkConfig {
        p: 0.25,
        q: 4.0,
        walk_length: 2,
        ..WalkConfig::default()
    };
    let mut rng = SeedStream::new(12).rng("walks", 0);
    let draws = 200_000;
    let start = 2;
    let mut counts = [0u64; 7];
    for _ in 0..draws {
        counts[random_walk(&g, start, &cfg, &mut rng).nodes()[1]] += 1;
    }
    let z: f64 = adj[start].iter().sum();
    let sigma = Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - 1e-3 / 14.0);
    for (x, &c) in counts.iter().enumerate() {
        let prob = adj[start][x] / z;
        let sd = (draws as f64 * prob * (1.0 - prob)).sqrt();
        assert!((c as f64 - draws as f64 * prob).abs() <= sigma * sd + 1e-9, "node {x}");
    }
}

#[test]
fn alias_tables_reconstruct_random_weights() {
    let mut rng = SeedStream::new(13).rng("alias", 0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..64);
        let mut w: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..100.0) })
            .collect();
        if w.iter().all(|&x| x == 0.0) {
            w[0] = 1.0;
        }
        let total: f64 = w.iter().sum();
        let table = AliasTable::new(&w).unwrap();
        for (got, want) in table.implied_distribution().iter().zip(&w) {
            assert!((got - want / total).abs() <= 1e-12, "{got} vs {}", want / total);
        }
    }
}

#[test]
fn alias_draws_pass_chi_square() {
    let mut rng = SeedStream::new(14).rng("alias", 0);
    let w: Vec<f64> = (0..40).map(|i| 1.0 + (i % 7) as f64 * (i as f64).sqrt()).collect();
    let total: f64 = w.iter().sum();
    let table = AliasTable::new(&w).unwrap();
    let draws = 1_000_000;
    let mut counts = vec![0u64; w.len()];
    for _ in 0..draws {
        counts[table.sample(&mut rng)] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&w)
        .map(|(&c, &wi)| {
            let e = draws as f64 * wi / total;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let limit = ChiSquared::new((w.len() - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < limit, "chi-square {stat} >= {limit}");
}

#[test]
fn sgns_gradients_match_central_differences() {
    let mut rng = SeedStream::new(15).rng("grad", 0);
    let eps = 1e-6;
    for _ in 0..100 {
        let d = rng.gen_range(1..16);
        let k = rng.gen_range(1..10);
        let input: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let outputs: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = (0..k).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
        let loss = |inp: &[f64], outs: &[Vec<f64>]| {
            let refs: Vec<&[f64]> = outs.iter().map(|o| o.as_slice()).collect();
            sgns_loss(inp, &refs, &targets)
        };
        let refs: Vec<&[f64]> = outputs.iter().map(|o| o.as_slice()).collect();
        let (g_in, g_out) = sgns_gradients(&input, &refs, &targets);

        let mut fd_in = vec![0.0; d];
        for i in 0..d {
            let (mut a, mut b) = (input.clone(), input.clone());
            a[i] += eps;
            b[i] -= eps;
            fd_in[i] = (loss(&a, &outputs) - loss(&b, &outputs)) / (2.0 * eps);
        }
        assert!(common::rel_diff(&g_in, &fd_in) <= 1e-6, "input {}", common::rel_diff(&g_in, &fd_in));

        for j in 0..k {
            let mut fd = vec![0.0; d];
            for i in 0..d {
                let (mut a, mut b) = (outputs.clone(), outputs.clone());
                a[j][i] += eps;
                b[j][i] -= eps;
                fd[i] = (loss(&input, &a) - loss(&input, &b)) / (2.0 * eps);
            }
            assert!(common::rel_diff(&g_out[j], &fd) <= 1e-6, "output {j}: {}", common::rel_diff(&g_out[j], &fd));
        }
    }
}
