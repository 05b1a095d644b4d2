use std::collections::{BTreeSet, HashMap};

use ges_core::graph::{
    equivalent, format_cpdag, format_dag, included_in, parse_cpdag, parse_dag, Cpdag, Dag, NodeSet,
    SepQuery, VariableSpec,
};
use ges_core::oracle::{enumerate_classes, enumerate_dags};
use proptest::prelude::*;

mod common;
use common::{brute_force_dags, class_key};

#[test]
fn enumeration_counts_match_brute_force() {
    for (n, dags, classes) in [(1, 1, 1), (2, 3, 2), (3, 25, 11), (4, 543, 185)] {
        let brute = brute_force_dags(n);
        let keys: BTreeSet<_> = brute.iter().map(|a| class_key(n, a)).collect();
        assert_eq!(brute.len(), dags, "n={n}");
        assert_eq!(keys.len(), classes, "n={n}");
        assert_eq!(enumerate_dags(n).unwrap().len(), dags);
        assert_eq!(enumerate_classes(n).unwrap().len(), classes);
    }
}

/// Path-based d-separation: some simple path between x and y is active given z.
fn path_d_separated(g: &Dag, x: usize, y: usize, z: NodeSet) -> bool {
    fn active_from(g: &Dag, path: &mut Vec<usize>, y: usize, z: NodeSet) -> bool {
        let cur = *path.last().unwrap();
        if cur == y {
            return path.windows(3).all(|w| {
                let (a, b, c) = (w[0], w[1], w[2]);
                let collider = g.has_edge(a, b) && g.has_edge(c, b);
                if collider {
                    z.contains(b) || !g.descendants(b).intersection(z).is_empty()
                } else {
                    !z.contains(b)
                }
            });
        }
        for next in 0..g.n() {
            if g.adjacent(cur, next) && !path.contains(&next) {
                path.push(next);
                if active_from(g, path, y, z) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    !active_from(g, &mut vec![x], y, z)
}

#[test]
fn d_separation_agrees_with_path_search() {
    for n in 1..=4 {
        for g in enumerate_dags(n).unwrap() {
            for x in 0..n {
                for y in x + 1..n {
                    let rest = NodeSet::full(n).without(x).without(y);
                    for z in rest.subsets() {
                        let q = SepQuery::new(x, y, z).unwrap();
                        assert_eq!(
                            g.d_separated(&q).unwrap(),
                            path_d_separated(&g, x, y, z),
                            "{:?} {x} {y} {z:?}",
                            g.edges()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn equivalence_matches_separation_sets() {
    let dags = enumerate_dags(4).unwrap();
    let seps: Vec<_> = dags.iter().map(Dag::separations).collect();
    for i in 0..dags.len() {
        for j in 0..dags.len() {
            let eq = equivalent(&dags[i], &dags[j]).unwrap();
            assert_eq!(eq, seps[i] == seps[j]);
            let both = seps[j].is_subset(&seps[i]) && seps[i].is_subset(&seps[j]);
            assert_eq!(eq, both);
        }
    }
}

#[test]
fn inclusion_is_a_preorder() {
    let dags = enumerate_dags(3).unwrap();
    let rel: Vec<Vec<bool>> = dags
        .iter()
        .map(|g| dags.iter().map(|h| included_in(g, h).unwrap()).collect())
        .collect();
    for i in 0..dags.len() {
        assert!(rel[i][i]);
        for j in 0..dags.len() {
            assert_eq!(
                rel[i][j] && rel[j][i],
                equivalent(&dags[i], &dags[j]).unwrap()
            );
            for k in 0..dags.len() {
                if rel[i][j] && rel[j][k] {
                    assert!(rel[i][k]);
                }
            }
        }
    }
    let four = enumerate_dags(4).unwrap();
    for g in &four {
        assert!(included_in(g, g).unwrap());
        assert!(included_in(&Dag::empty(4), g).unwrap());
        assert!(included_in(g, &Dag::complete(4)).unwrap());
    }
}

#[test]
fn classes_round_trip_through_extensions() {
    let mut by_class: HashMap<Cpdag, Vec<Dag>> = HashMap::new();
    for g in enumerate_dags(4).unwrap() {
        let c = g.to_cpdag();
        let members = c.consistent_extensions().unwrap();
        assert!(members.contains(&g));
        for m in &members {
            assert!(equivalent(m, &g).unwrap());
            assert_eq!(m.to_cpdag(), c);
        }
        let rebuilt = Cpdag::new(4, &c.directed_edges(), &c.undirected_edges()).unwrap();
        assert_eq!(rebuilt, c);
        by_class.entry(c).or_default().push(g);
    }
    assert_eq!(by_class.len(), 185);
    for (c, dags) in by_class {
        let mut members = c.consistent_extensions().unwrap();
        let mut dags = dags;
        members.sort();
        dags.sort();
        assert_eq!(members, dags);
    }
}

#[test]
fn covered_reversals_stay_in_class() {
    for g in enumerate_dags(4).unwrap() {
        for (u, v) in g.edges() {
            let covered = g.is_covered(u, v).unwrap();
            assert_eq!(covered, g.parents(v) == g.parents(u).with(u));
            if covered {
                let r = g.reverse_covered(u, v).unwrap();
                assert!(equivalent(&g, &r).unwrap());
            } else {
                assert!(g.reverse_covered(u, v).is_err());
            }
        }
    }
}

#[test]
fn parameter_count_is_a_class_invariant() {
    let specs = [
        VariableSpec::numbered(&[2, 2, 2, 2]),
        VariableSpec::numbered(&[2, 3, 2, 2]),
        VariableSpec::numbered(&[4, 2, 2, 2]),
        VariableSpec::numbered(&[3, 5, 2, 4]),
    ];
    for c in enumerate_classes(4).unwrap() {
        let members = c.consistent_extensions().unwrap();
        for spec in &specs {
            let d = members[0].parameter_count(spec);
            assert!(members.iter().all(|g| g.parameter_count(spec) == d));
        }
    }
}

fn arb_dag(max_n: usize) -> impl Strategy<Value = Dag> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), pairs),
                Just(()).prop_perturb(move |_, mut rng| {
                    let mut perm: Vec<usize> = (0..n).collect();
                    for i in (1..n).rev() {
                        perm.swap(i, rng.random_range(0..=i));
                    }
                    perm
                }),
            )
        })
        .prop_map(|(n, bits, perm)| {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        edges.push((perm[u], perm[v]));
                    }
                    k += 1;
                }
            }
            Dag::from_edges(n, &edges).unwrap()
        })
}

proptest! {
    #[test]
    fn larger_dags_d_separation_matches_paths(g in arb_dag(7), seed in any::<u64>()) {
        let n = g.n();
        prop_assume!(n >= 2);
        let x = (seed % n as u64) as usize;
        let y = (x + 1 + (seed >> 8) as usize % (n - 1)) % n;
        let rest = NodeSet::full(n).without(x).without(y);
        let z = NodeSet::from_bits((seed >> 16) & rest.bits());
        let q = SepQuery::new(x, y, z).unwrap();
        prop_assert_eq!(g.d_separated(&q).unwrap(), path_d_separated(&g, x, y, z));
    }

    #[test]
    fn cpdag_round_trip(g in arb_dag(7)) {
        let c = g.to_cpdag();
        let members = c.consistent_extensions().unwrap();
        prop_assert!(members.contains(&g));
        for m in members.iter().take(20) {
            prop_assert_eq!(m.to_cpdag(), c.clone());
        }
        prop_assert_eq!(c.edge_count(), g.edge_count());
    }

    #[test]
    fn text_encodings_round_trip(g in arb_dag(8)) {
        let spec = VariableSpec::numbered(&vec![2; g.n()]);
        prop_assert_eq!(parse_dag(&format_dag(&g, &spec), &spec).unwrap(), g.clone());
        let c = g.to_cpdag();
        prop_assert_eq!(parse_cpdag(&format_cpdag(&c, &spec), &spec).unwrap(), c);
    }

    #[test]
    fn topological_order_respects_edges(g in arb_dag(10)) {
        let order = g.topological_order();
        let mut pos = vec![0; g.n()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for (u, v) in g.edges() {
            prop_assert!(pos[u] < pos[v]);
        }
    }
}
