#![allow(dead_code, clippy::needless_range_loop)]

use ges_core::datagen::{forward_sample, sample_parameters, RngSeed};
use ges_core::graph::{Dag, VariableSpec};
use ges_core::scoring::{DataScorer, ScoreConfig, Scorer};

/// Acyclicity by repeatedly peeling sinks off an adjacency matrix.
pub fn acyclic(n: usize, adj: &[Vec<bool>]) -> bool {
    let mut alive = vec![true; n];
    for _ in 0..n {
        let sink = (0..n).find(|&u| alive[u] && (0..n).all(|v| !alive[v] || !adj[u][v]));
        match sink {
            Some(u) => alive[u] = false,
            None => return false,
        }
    }
    true
}

/// DAGs as adjacency matrices over every subset of ordered pairs.
pub fn brute_force_dags(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut adj = vec![vec![false; n]; n];
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[u][v] = true;
            }
        }
        if (0..n).any(|u| (0..n).any(|v| adj[u][v] && adj[v][u])) {
            continue;
        }
        if acyclic(n, &adj) {
            out.push(adj);
        }
    }
    out
}

pub type ClassKey = (Vec<(usize, usize)>, Vec<(usize, usize, usize)>);

/// Skeleton plus v-structures, computed straight from the matrix.
pub fn class_key(n: usize, adj: &[Vec<bool>]) -> ClassKey {
    let mut skel = Vec::new();
    let mut vs = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if adj[u][v] || adj[v][u] {
                skel.push((u, v));
            }
        }
    }
    for c in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if adj[a][c] && adj[b][c] && !adj[a][b] && !adj[b][a] {
                    vs.push((a, c, b));
                }
            }
        }
    }
    (skel, vs)
}

/// Share of trials where adding an edge moves BDeu in the expected direction.
pub fn local_consistency_rates(m: usize, trials: u64) -> (f64, f64) {
    let spec = VariableSpec::numbered(&[2, 3, 2]);
    let chain = Dag::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let mut dependent_up = 0;
    let mut independent_down = 0;
    for t in 0..trials {
        let bn = sample_parameters(&chain, &spec, 10.0, RngSeed::new(1000 + t, 0)).unwrap();
        let data = forward_sample(&bn, m, RngSeed::new(1000 + t, 1));
        let scorer = DataScorer::new(&data, &ScoreConfig::default()).unwrap();
        // X1 and X2 are dependent: adding X1 -> X2 to the empty graph should help.
        let empty = Dag::empty(3);
        if scorer.score(&empty.with_edge(0, 1).unwrap()) > scorer.score(&empty) {
            dependent_up += 1;
        }
        // X1 and X3 are independent given X2: adding X1 -> X3 to the chain should hurt.
        if scorer.score(&chain.with_edge(0, 2).unwrap()) < scorer.score(&chain) {
            independent_down += 1;
        }
    }
    (
        dependent_up as f64 / trials as f64,
        independent_down as f64 / trials as f64,
    )
}
