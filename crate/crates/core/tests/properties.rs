//! Property tests over graphs, walks, samplers, the RLS update, metrics and
//! serialization.

use proptest::prelude::*;
use seqn2v::checkpoint::{read_checkpoint, write_checkpoint};
use seqn2v::dataset::NodeDictionary;
use seqn2v::eval::f1_scores;
use seqn2v::io::{read_embedding, write_embedding};
use seqn2v::walk::{contexts, random_walk, step_distribution};
use seqn2v::{
    AliasTable, Embedding, ExperimentConfig, Graph, HiddenMode, ModelKind, OselmConfig, OselmModel,
    SeedStream, Trainer, WalkConfig,
};

/// Random simple graph: `n` nodes and candidate edges filtered for loops and
/// duplicates.
fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..24).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..3 * n).prop_map(move |cands| {
            let mut g = Graph::new(n);
            for (u, v, w) in cands {
                if u != v && !g.has_edge(u, v) {
                    g.add_edge(u, v, w).unwrap();
                }
            }
            g
        })
    })
}

/// Follows forest edges to check that no edge closes a cycle.
fn is_forest(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn adjacency_is_symmetric(g in arb_graph()) {
        for u in 0..g.node_count() {
            for &(v, w) in g.neighbors(u) {
                prop_assert_eq!(g.edge_weight(v, u), Some(w));
            }
        }
        let degree_sum: usize = (0..g.node_count()).map(|u| g.degree(u)).sum();
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn forest_split_preserves_components_and_is_acyclic(g in arb_graph(), seed in any::<u64>()) {
        let split = g.spanning_forest_split(seed);
        let forest = split.initial_graph();
        let full = g.connected_components();
        prop_assert_eq!(&forest.connected_components(), &full);
        let tree: Vec<(usize, usize)> = split.initial_edges.iter().map(|e| (e.u, e.v)).collect();
        prop_assert!(is_forest(g.node_count(), &tree));
        prop_assert_eq!(tree.len(), g.node_count() - full.count);
        prop_assert_eq!(split.initial_edges.len() + split.deferred_edges.len(), g.edge_count());
        let mut replay = forest;
        for e in &split.deferred_edges {
            prop_assert!(g.has_edge(e.u, e.v));
            replay.add_edge(e.u, e.v, e.weight).unwrap();
        }
        prop_assert_eq!(replay, g);
    }

    #[test]
    fn adding_edges_never_adds_components(g in arb_graph(), extra in prop::collection::vec((0usize..24, 0usize..24), 1..20)) {
        let mut g = g;
        let n = g.node_count();
        let mut count = g.connected_components().count;
        for (u, v) in extra {
            let (u, v) = (u % n, v % n);
            if u == v || g.has_edge(u, v) {
                continue;
            }
            g.add_edge(u, v, 1.0).unwrap();
            let next = g.connected_components().count;
            prop_assert!(next <= count);
            count = next;
        }
    }

    #[test]
    fn step_distribution_is_normalized(g in arb_graph(), p in 0.1f64..4.0, q in 0.1f64..4.0, seed in any::<u64>()) {
        let cfg = WalkConfig { p, q, ..WalkConfig::default() };
        let mut rng = SeedStream::new(seed).rng("walks", 0);
        for cur in 0..g.node_count() {
            if g.degree(cur) == 0 {
                prop_assert!(step_distribution(&g, None, cur, &cfg).is_err());
                continue;
            }
            let prev = g.neighbors(cur)[rand::Rng::gen_range(&mut rng, 0..g.degree(cur))].0;
            let probs = step_distribution(&g, Some(prev), cur, &cfg).unwrap();
            prop_assert!(probs.iter().all(|&x| x >= 0.0));
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_bias_walk_is_first_order(g in arb_graph()) {
        let cfg = WalkConfig { p: 1.0, q: 1.0, ..WalkConfig::default() };
        for cur in 0..g.node_count() {
            if g.degree(cur) == 0 {
                continue;
            }
            let total: f64 = g.neighbors(cur).iter().map(|e| e.1).sum();
            let first = step_distribution(&g, None, cur, &cfg).unwrap();
            for &(prev, _) in g.neighbors(cur) {
                let probs = step_distribution(&g, Some(prev), cur, &cfg).unwrap();
                for (k, &(_, w)) in g.neighbors(cur).iter().enumerate() {
                    prop_assert!((probs[k] - w / total).abs() < 1e-12);
                    prop_assert!((probs[k] - first[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn walks_follow_edges(g in arb_graph(), len in 0usize..40, seed in any::<u64>()) {
        let cfg = WalkConfig { walk_length: len, ..WalkConfig::default() };
        let mut rng = SeedStream::new(seed).rng("walks", 0);
        for start in 0..g.node_count() {
            let w = random_walk(&g, start, &cfg, &mut rng);
            let nodes = w.nodes();
            if len > 0 {
                prop_assert_eq!(nodes[0], start);
            }
            let expected = if g.degree(start) == 0 { len.min(1) } else { len };
            prop_assert_eq!(nodes.len(), expected);
            for pair in nodes.windows(2) {
                prop_assert!(g.has_edge(pair[0], pair[1]));
            }
            let ctx = contexts(nodes, cfg.window);
            prop_assert_eq!(ctx.len(), cfg.contexts_per_walk(nodes.len()));
            for (i, c) in ctx.iter().enumerate() {
                prop_assert_eq!(c.center, nodes[i]);
                prop_assert_eq!(c.positives, &nodes[i + 1..i + cfg.window]);
            }
        }
    }

    #[test]
    fn alias_table_reconstructs_weights(w in prop::collection::vec(0.0f64..1e3, 1..200)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.0);
        let t = AliasTable::new(&w).unwrap();
        for (got, want) in t.implied_distribution().iter().zip(&w) {
            prop_assert!((got - want / total).abs() <= 1e-12);
        }
        prop_assert!(t.prob().iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!(t.alias().iter().all(|&a| a < w.len()));
    }

    #[test]
    fn p_stays_symmetric_and_positive(
        seed in any::<u64>(),
        d in 1usize..12,
        mu in 0.001f64..1.0,
        alpha in any::<bool>(),
        updates in 1usize..200,
    ) {
        let v = 10;
        let cfg = OselmConfig {
            dims: d,
            mu,
            mode: if alpha { HiddenMode::RandomAlpha } else { HiddenMode::Tied },
            ..OselmConfig::default()
        };
        let mut rng = SeedStream::new(seed).rng("init", 0);
        let mut m = OselmModel::<f64>::new(&cfg, v, &mut rng).unwrap();
        for _ in 0..updates {
            let walk: Vec<usize> = (0..4).map(|_| rand::Rng::gen_range(&mut rng, 0..v)).collect();
            let negs: Vec<usize> = (0..6).map(|_| rand::Rng::gen_range(&mut rng, 0..v)).collect();
            for ctx in contexts(&walk, 4) {
                m.context_update(&ctx, &negs).unwrap();
            }
        }
        let p = m.p();
        for i in 0..d {
            prop_assert!(p[i * d + i] > 0.0);
            for j in 0..d {
                prop_assert_eq!(p[i * d + j], p[j * d + i]);
            }
        }
        prop_assert!(m.is_finite());
    }

    #[test]
    fn f1_matches_brute_force(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..200)) {
        let (pred, truth): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let r = f1_scores(&pred, &truth, 5).unwrap();
        let correct = pairs.iter().filter(|(p, t)| p == t).count();
        // Single-label micro F1 is accuracy.
        prop_assert!((r.micro_f1 - correct as f64 / pairs.len() as f64).abs() < 1e-12);
        let mut macro_sum = 0.0;
        for c in 0..5 {
            let tp = pairs.iter().filter(|&&(p, t)| p == c && t == c).count() as f64;
            let pp = pairs.iter().filter(|&&(p, _)| p == c).count() as f64;
            let ap = pairs.iter().filter(|&&(_, t)| t == c).count() as f64;
            let prec = if pp > 0.0 { tp / pp } else { 0.0 };
            let rec = if ap > 0.0 { tp / ap } else { 0.0 };
            macro_sum += if prec + rec > 0.0 { 2.0 * prec * rec / (prec + rec) } else { 0.0 };
        }
        prop_assert!((r.macro_f1 - macro_sum / 5.0).abs() < 1e-12);
    }

    #[test]
    fn checkpoint_round_trip_is_exact(seed in any::<u64>(), d in 1usize..8, v in 2usize..12, original in any::<bool>(), alpha in any::<bool>()) {
        let cfg = ExperimentConfig {
            dims: d,
            model: if original { ModelKind::Original } else { ModelKind::Proposed },
            mode: if alpha { HiddenMode::RandomAlpha } else { HiddenMode::Tied },
            ..ExperimentConfig::default()
        };
        let mut rng = SeedStream::new(seed).rng("init", 0);
        let t = Trainer::<f64>::new(&cfg, v, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &t).unwrap();
        let back: Trainer<f64> = read_checkpoint(buf.as_slice()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn embedding_text_round_trip(rows in 1usize..10, dims in 1usize..6, seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng("init", 0);
        let data: Vec<f64> = (0..rows * dims).map(|_| rand::Rng::gen_range(&mut rng, -1e3..1e3)).collect();
        let emb = Embedding::from_vec(rows, dims, data);
        let dict = NodeDictionary::from_ids((0..rows).map(|i| format!("n{}", i * 7 + 3)));
        let mut buf = Vec::new();
        write_embedding(&mut buf, &emb, &dict).unwrap();
        let (dict2, back) = read_embedding(buf.as_slice()).unwrap();
        prop_assert_eq!(dict2.originals(), dict.originals());
        // Values are written with nine significant digits.
        for (a, b) in back.as_slice().iter().zip(emb.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300));
        }
    }
}
