mod common;

use proptest::prelude::*;

use regbisect::graph::{
    count_cycles, error_upper_bound, fixtures, sample_regular_graph, treelike_fraction, Graph, SampleMode,
    MAX_CYCLE_LENGTH,
};

use common::{brute_force_counts, cube, prism};

fn assert_matches_oracle(g: &Graph) {
    let oracle = brute_force_counts(g);
    let kmax = g.n().clamp(3, MAX_CYCLE_LENGTH);
    let census = count_cycles(g, kmax).unwrap();
    for k in 3..=kmax {
        assert_eq!(census.get(k), oracle[k], "k={k}");
    }
}

#[test]
fn named_fixtures_match_oracle() {
    for g in [
        fixtures::complete(4),
        fixtures::complete(5),
        fixtures::complete_bipartite(3),
        fixtures::cycle(7),
        fixtures::petersen(),
        cube(),
        prism(4),
        prism(5),
    ] {
        assert_matches_oracle(&g);
    }
    // known values
    let p = count_cycles(&fixtures::petersen(), 10).unwrap();
    assert_eq!((p.get(3), p.get(4), p.get(5), p.get(6)), (0, 0, 12, 10));
    let k4 = count_cycles(&fixtures::complete(4), 4).unwrap();
    assert_eq!((k4.get(3), k4.get(4)), (4, 3));
}

#[test]
fn random_small_graphs_match_oracle() {
    for seed in 0..12 {
        let (g, _) = sample_regular_graph(12, 3, seed, SampleMode::Reject).unwrap();
        assert_matches_oracle(&g);
        let (g, _) = sample_regular_graph(8, 3, seed, SampleMode::Erase).unwrap();
        assert_matches_oracle(&g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_bound_covers_non_treelike_balls(seed in 0u64..10_000, r in 1usize..=3) {
        let (g, _) = sample_regular_graph(60, 3, seed, SampleMode::Reject).unwrap();
        let census = count_cycles(&g, (2 * r + 1).min(MAX_CYCLE_LENGTH)).unwrap();
        let bound = error_upper_bound(&census, r, 3, g.n());
        prop_assert!(bound >= 1.0 - treelike_fraction(&g, r - 1) - 1e-12);
    }

    #[test]
    fn cycle_counts_are_label_invariant(seed in 0u64..10_000, shift in 1usize..30) {
        let (g, _) = sample_regular_graph(30, 3, seed, SampleMode::Reject).unwrap();
        let relabeled: Vec<(usize, usize)> = g.edges().map(|(u, v)| ((u + shift) % 30, (v + shift) % 30)).collect();
        let h = Graph::from_edges(30, 3, &relabeled).unwrap();
        prop_assert_eq!(count_cycles(&g, 8).unwrap(), count_cycles(&h, 8).unwrap());
    }
}
