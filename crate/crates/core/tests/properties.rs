//! Randomized invariants across modules.

use graphpack::balance::{discrepancy_of, partition_vectors, WeightVector};
use graphpack::clique::factors::random_clique_packing;
use graphpack::clique::hypergraph::is_proper;
use graphpack::clique::{enumerate_cliques, proper_hyperedge_coloring};
use graphpack::completion::matching::{
    edge_disjoint_perfect_matchings, hopcroft_karp, matching_size, reference_matching, AuxBipartite,
};
use graphpack::graph::{binomial2, connected_components, pair_from_index, pair_index, Graph};
use graphpack::instances::{
    cheap_two_independent, gen_bounded_tree, gen_forest, is_two_independent, normalize_collection,
    separator_for_bound,
};
use graphpack::slicer::{PipelineConstants, SlicedHost};
use graphpack::verify::{verify_packing, Finding};
use graphpack::{CompleteHost, Embedding, PackingLedger, Phase};
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = Graph> {
    (2usize..14, 0.0f64..1.0, any::<u64>()).prop_map(|(n, p, s)| Graph::gnp(n, p, s))
}

/// Independent check: no two members adjacent or sharing a neighbour.
fn naive_two_independent(g: &Graph, set: &[usize]) -> bool {
    for (a, &u) in set.iter().enumerate() {
        for &v in &set[a + 1..] {
            if u == v || g.has_edge(u, v) {
                return false;
            }
            if g.neighbors(u).iter().any(|w| g.neighbors(v).contains(w)) {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_index_is_a_bijection(n in 2usize..60) {
        let mut seen = vec![false; binomial2(n)];
        for b in 1..n {
            for a in 0..b {
                let i = pair_index(a, b);
                prop_assert_eq!(i, pair_index(b, a));
                prop_assert!(!seen[i]);
                seen[i] = true;
                prop_assert_eq!(pair_from_index(i), (a, b));
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn text_format_round_trips(g in small_graph()) {
        prop_assert_eq!(Graph::parse_text(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn normalization_keeps_every_edge(
        sizes in prop::collection::vec(2usize..30, 1..8),
        seed in any::<u64>(),
    ) {
        let graphs: Vec<Graph> = sizes
            .iter()
            .enumerate()
            .map(|(i, &k)| gen_bounded_tree(k, 3, seed.wrapping_add(i as u64)).unwrap())
            .collect();
        let total: usize = graphs.iter().map(Graph::edge_count).sum();
        let set = normalize_collection(&graphs, 40).unwrap();
        prop_assert_eq!(set.total_edges, total);
        let sum: usize = set.instances.iter().map(|i| i.graph.edge_count()).sum();
        prop_assert_eq!(sum, total);
        for inst in &set.instances {
            prop_assert_eq!(inst.graph.vertex_count(), 40);
        }
        // every input edge is present under its provenance map
        for (g, prov) in graphs.iter().zip(&set.provenance) {
            let host = &set.instances[prov.instance].graph;
            for (u, v) in g.edges() {
                let (x, y) = (prov.vertex_map[u].unwrap(), prov.vertex_map[v].unwrap());
                prop_assert!(host.has_edge(x, y));
            }
        }
    }

    #[test]
    fn separators_respect_the_bound(n in 5usize..120, k in 1usize..20, seed in any::<u64>()) {
        let g = gen_forest(n, 1 + (seed % 3) as usize, 3, seed).unwrap();
        let s = separator_for_bound(&g, k).unwrap();
        let mut active = vec![true; n];
        for &v in &s.vertices {
            active[v] = false;
        }
        let kept = g.without_vertices(&active.iter().map(|a| !a).collect::<Vec<_>>());
        let biggest = connected_components(&kept)
            .iter()
            .filter(|c| c.iter().all(|&v| active[v]))
            .map(Vec::len)
            .max()
            .unwrap_or(0);
        prop_assert!(biggest <= k);
        prop_assert!(biggest <= s.component_bound);
    }

    #[test]
    fn two_independent_sets_are_two_independent(g in small_graph(), m in 1usize..6) {
        let avoid = vec![false; g.vertex_count()];
        let set = cheap_two_independent(&g, m, &avoid);
        prop_assert!(set.len() <= m);
        prop_assert!(naive_two_independent(&g, &set));
        prop_assert!(is_two_independent(&g, &set));
    }

    #[test]
    fn two_independence_check_agrees_with_naive(g in small_graph(), picks in prop::collection::vec(0usize..14, 0..5)) {
        let mut set: Vec<usize> = picks.into_iter().filter(|&v| v < g.vertex_count()).collect();
        set.sort_unstable();
        set.dedup();
        prop_assert_eq!(is_two_independent(&g, &set), naive_two_independent(&g, &set));
    }

    #[test]
    fn slicing_partitions_pairs_deterministically(n in 10usize..60, layers in 1usize..5, seed in any::<u64>()) {
        let mut c = PipelineConstants::desk(n, seed).with_layers(layers);
        c.zeta = 0.0;
        c.delta = 0.0;
        c.gamma = 0.15;
        let a = SlicedHost::build(&c).unwrap();
        let b = SlicedHost::build(&c).unwrap();
        prop_assert_eq!(&a.layers, &b.layers);
        prop_assert_eq!(&a.zones, &b.zones);
        let total: usize = a.layers.iter().map(Graph::edge_count).sum();
        prop_assert_eq!(total + a.unassigned_count(), binomial2(n));
        for u in 0..n {
            for v in u + 1..n {
                let hits = a.layers.iter().filter(|l| l.has_edge(u, v)).count();
                prop_assert!(hits <= 1);
                prop_assert_eq!(a.layer_of(u, v), a.layers.iter().position(|l| l.has_edge(u, v)));
            }
        }
    }

    #[test]
    fn partitions_are_valid_and_report_true_discrepancy(
        coords in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..60),
        m in 1usize..6,
        seed in any::<u64>(),
    ) {
        let a: Vec<WeightVector<f64>> = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| WeightVector::new(i, vec![x, y]))
            .collect();
        let r = partition_vectors(&a, m, seed).unwrap();
        prop_assert_eq!(r.parts.len(), m);
        let mut ids = r.parts.concat();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..a.len()).collect::<Vec<_>>());
        prop_assert!((r.discrepancy - discrepancy_of(&a, &r.parts)).abs() < 1e-9);
    }

    #[test]
    fn clique_packings_are_edge_disjoint_cliques(g in small_graph(), ell in 2usize..5, seed in any::<u64>()) {
        let packing = random_clique_packing(&g, ell, seed);
        let mut used = vec![false; binomial2(g.vertex_count())];
        for clique in &packing {
            prop_assert_eq!(clique.len(), ell);
            for (a, &u) in clique.iter().enumerate() {
                for &v in &clique[a + 1..] {
                    prop_assert!(g.has_edge(u, v));
                    let i = pair_index(u, v);
                    prop_assert!(!used[i]);
                    used[i] = true;
                }
            }
        }
    }

    #[test]
    fn hyperedge_colorings_are_proper(g in small_graph(), ell in 2usize..5, seed in any::<u64>()) {
        let h = enumerate_cliques(&g, ell);
        for hyper in [h.over_vertices(), h.over_edges()] {
            let c = proper_hyperedge_coloring(&hyper, seed);
            prop_assert!(is_proper(&hyper, &c.colors));
        }
    }

    #[test]
    fn hopcroft_karp_matches_the_reference(
        left in 1usize..12,
        right in 1usize..12,
        p in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let adj: Vec<Vec<usize>> = (0..left)
            .map(|l| {
                (0..right)
                    .filter(|&r| graphpack::rng::unit_draw(seed, (l * right + r) as u64) < p)
                    .collect()
            })
            .collect();
        let hk = hopcroft_karp(&adj, right);
        let reference = reference_matching(&adj, right);
        prop_assert_eq!(matching_size(&hk), matching_size(&reference));
        let mut taken = vec![false; right];
        for (l, m) in hk.iter().enumerate() {
            if let Some(r) = *m {
                prop_assert!(adj[l].contains(&r));
                prop_assert!(!taken[r]);
                taken[r] = true;
            }
        }
    }

    #[test]
    fn perfect_matchings_are_pairwise_edge_disjoint(k in 1usize..10, count in 1usize..6, seed in any::<u64>()) {
        let adj: Vec<Vec<usize>> = (0..k)
            .map(|l| (0..k).filter(|&r| graphpack::rng::unit_draw(seed, (l * k + r) as u64) < 0.8).collect())
            .collect();
        let aux = AuxBipartite::from_adjacency(adj.clone(), k);
        let found = edge_disjoint_perfect_matchings(&aux, count);
        let mut used = std::collections::HashSet::new();
        for m in &found.matchings {
            let mut right = m.clone();
            right.sort_unstable();
            prop_assert_eq!(right, (0..k).collect::<Vec<_>>());
            for (l, &r) in m.iter().enumerate() {
                prop_assert!(adj[l].contains(&r));
                prop_assert!(used.insert((l, r)));
            }
        }
    }

    #[test]
    fn ledger_commits_are_atomic(n in 4usize..20, seed in any::<u64>()) {
        let mut ledger = PackingLedger::new(n);
        let host = CompleteHost(n);
        let g = Graph::gnp(n, 0.3, seed);
        let edges: Vec<_> = g.edges().collect();
        let half = edges.len() / 2;
        ledger.commit_edges(&edges[..half], &host).unwrap();
        let before = ledger.used_count();
        if half > 0 {
            // overlapping batch is refused whole
            prop_assert!(ledger.commit_edges(&edges, &host).is_err());
            prop_assert_eq!(ledger.used_count(), before);
        }
        ledger.commit_edges(&edges[half..], &host).unwrap();
        prop_assert_eq!(ledger.used_count(), edges.len());
        for &(u, v) in &edges {
            prop_assert!(ledger.is_used(u, v));
        }
    }

    #[test]
    fn verification_catches_corruption(n in 6usize..30, seed in any::<u64>(), which in 0usize..3) {
        let path = Graph::path(n);
        let guests = vec![path.clone(), path];
        let id: Vec<usize> = (0..n).collect();
        let mut es = vec![Embedding::total(0, &id, Phase::Phase3)];
        es.push(match which {
            0 => Embedding::total(1, &id, Phase::Phase3),
            1 => {
                let mut bad = id.clone();
                bad[seed as usize % n] = bad[(seed as usize + 1) % n];
                Embedding::total(1, &bad, Phase::Phase3)
            }
            _ => Embedding::new(1, n, Phase::Phase3),
        });
        let r = verify_packing(&CompleteHost(n), &guests, &es);
        prop_assert!(!r.valid);
        let hit = match which {
            0 => r.findings.iter().any(|f| matches!(f, Finding::Overlap { .. })),
            1 => r.findings.iter().any(|f| matches!(f, Finding::NonInjective { .. })),
            _ => r.findings.iter().any(|f| matches!(f, Finding::Unmapped { .. })),
        };
        prop_assert!(hit);
    }
}
