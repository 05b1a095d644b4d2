use std::collections::BTreeSet;

use ges_core::datagen::{forward_sample, sample_parameters, RngSeed};
use ges_core::graph::{included_in, Cpdag, Dag, VariableSpec};
use ges_core::oracle::enumerate_classes;
use ges_core::scoring::{CategoricalDataset, DataScorer, ScoreConfig};
use ges_core::search::{
    backward_neighborhood, backward_neighbors, bes, class_score, forward_neighborhood,
    forward_neighbors, ges, search, uges, Algorithm, Edit, Phase, SearchConfig, SearchTrace, Start,
};
use proptest::prelude::*;

#[test]
fn neighbor_relations_are_mutually_inverse() {
    for n in 1..=4 {
        let classes = enumerate_classes(n).unwrap();
        let fwd: Vec<BTreeSet<Cpdag>> = classes
            .iter()
            .map(|c| forward_neighbors(c).into_iter().collect())
            .collect();
        let bwd: Vec<BTreeSet<Cpdag>> = classes
            .iter()
            .map(|c| backward_neighbors(c).into_iter().collect())
            .collect();
        for (i, c) in classes.iter().enumerate() {
            for (j, d) in classes.iter().enumerate() {
                assert_eq!(fwd[i].contains(d), bwd[j].contains(c));
            }
            for d in &fwd[i] {
                assert_eq!(d.edge_count(), c.edge_count() + 1);
                assert!(included_in(&c.representative(), &d.representative()).unwrap());
            }
            for d in &bwd[i] {
                assert_eq!(d.edge_count() + 1, c.edge_count());
                assert!(included_in(&d.representative(), &c.representative()).unwrap());
            }
        }
    }
}

#[test]
fn neighborhood_edits_reproduce_their_class() {
    for c in enumerate_classes(4).unwrap() {
        let members = c.consistent_extensions().unwrap();
        for (d, edit) in forward_neighborhood(&c) {
            let Edit::Insert(u, v) = edit else {
                panic!("forward edit {edit}")
            };
            assert!(members.iter().any(|g| g
                .with_edge(u, v)
                .map(|h| h.to_cpdag() == d)
                .unwrap_or(false)));
        }
        for (d, edit) in backward_neighborhood(&c) {
            let Edit::Delete(u, v) = edit else {
                panic!("backward edit {edit}")
            };
            assert!(members
                .iter()
                .any(|g| g.has_edge(u, v) && g.without_edge(u, v).unwrap().to_cpdag() == d));
        }
    }
}

fn assert_valid_trace(t: &SearchTrace, scorer: &DataScorer) {
    let steps = t.steps();
    assert!(steps[0].edit.is_none());
    for w in steps.windows(2) {
        assert!(w[1].state.score > w[0].state.score);
        let edit = w[1].edit.unwrap();
        assert_eq!(edit.phase(), w[1].phase);
        let expected = match edit {
            Edit::Insert(..) => forward_neighborhood(&w[0].state.class),
            Edit::Delete(..) => backward_neighborhood(&w[0].state.class),
        };
        assert!(expected.contains_key(&w[1].state.class));
    }
    for s in steps {
        for g in s.state.class.consistent_extensions().unwrap() {
            assert!((scorer_score(scorer, &g) - s.state.score).abs() <= 1e-9);
        }
    }
}

fn scorer_score(scorer: &DataScorer, g: &Dag) -> f64 {
    use ges_core::scoring::Scorer;
    scorer.score(g)
}

fn phases_contiguous(t: &SearchTrace) -> bool {
    let phases: Vec<Phase> = t.steps()[1..].iter().map(|s| s.phase).collect();
    phases
        .windows(2)
        .all(|w| !(w[0] == Phase::Backward && w[1] == Phase::Forward))
}

fn dataset(
    cards: Vec<usize>,
    edges: Vec<(usize, usize)>,
    m: usize,
    seed: u64,
) -> CategoricalDataset {
    let n = cards.len();
    let spec = VariableSpec::numbered(&cards);
    let edges: Vec<_> = edges
        .into_iter()
        .filter(|&(u, v)| u < n && v < n && u < v)
        .collect();
    let g = Dag::from_edges(n, &edges).unwrap();
    let bn = sample_parameters(&g, &spec, 5.0, RngSeed::new(seed, 0)).unwrap();
    forward_sample(&bn, m, RngSeed::new(seed, 1))
}

fn arb_dataset() -> impl Strategy<Value = CategoricalDataset> {
    (
        proptest::collection::vec(2usize..=3, 2..=5),
        proptest::collection::vec((0usize..5, 0usize..5), 0..6),
        20usize..400,
        any::<u64>(),
    )
        .prop_map(|(cards, edges, m, seed)| dataset(cards, edges, m, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn search_traces_climb_strictly(data in arb_dataset()) {
        let scorer = DataScorer::new(&data, &ScoreConfig::default()).unwrap();
        let n = data.spec().len();
        let steps = n * n + n;
        let g = ges(&scorer, &Cpdag::empty(n), steps).unwrap();
        assert_valid_trace(&g, &scorer);
        prop_assert!(phases_contiguous(&g));
        let b = bes(&scorer, &Cpdag::complete(n), steps).unwrap();
        assert_valid_trace(&b, &scorer);
        let u = uges(&scorer, &Cpdag::empty(n), steps).unwrap();
        assert_valid_trace(&u, &scorer);
        // A finished search sits at a local maximum of its move set.
        if !u.truncated {
            let best = u.score();
            for d in forward_neighbors(u.result()).iter().chain(&backward_neighbors(u.result())) {
                prop_assert!(class_score(&scorer, d) <= best);
            }
        }
    }

    #[test]
    fn record_order_does_not_matter(data in arb_dataset(), shift in any::<usize>()) {
        let m = data.len();
        let perm: Vec<usize> = (0..m).map(|i| (i + shift) % m.max(1)).rev().collect();
        let shuffled = data.permuted(&perm);
        let cfg = SearchConfig::default();
        let a = search(&DataScorer::new(&data, &ScoreConfig::default()).unwrap(), &cfg).unwrap();
        let b = search(&DataScorer::new(&shuffled, &ScoreConfig::default()).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a.result(), b.result());
        prop_assert_eq!(a.len(), b.len());
    }
}

#[test]
fn traces_are_bit_reproducible() {
    let data = dataset(
        vec![2, 3, 2, 2, 2],
        vec![(0, 1), (1, 2), (3, 2), (2, 4)],
        2000,
        11,
    );
    let spec = data.spec().clone();
    for alg in [
        Algorithm::Fes,
        Algorithm::Bes,
        Algorithm::Ges,
        Algorithm::Uges,
    ] {
        let runs: Vec<Vec<u8>> = (0..3)
            .map(|_| {
                let scorer = DataScorer::new(&data, &ScoreConfig::default()).unwrap();
                let cfg = SearchConfig {
                    algorithm: alg,
                    start: if alg == Algorithm::Bes {
                        Start::Complete
                    } else {
                        Start::Empty
                    },
                    max_steps: None,
                };
                let t = search(&scorer, &cfg).unwrap();
                let mut buf = Vec::new();
                t.write_tsv(&mut buf, &spec).unwrap();
                buf
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[1], runs[2]);
    }
}
