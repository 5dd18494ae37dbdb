use graphfam::{build_universe, generate_graph, FamilyConfig, GenError, UniverseConfig};
use proptest::prelude::*;

fn ordered(a: f64, b: f64) -> (f64, f64) {
    (a.min(b), a.max(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_graphs_satisfy_invariants(
        universe_seed in any::<u64>(),
        family_seed in any::<u64>(),
        k in 4usize..16,
        eps in 0.0f64..0.3,
        n_lo in 20usize..120,
        n_extra in 0usize..100,
        h in (0.1f64..0.9, 0.1f64..0.9),
        d in (1.0f64..8.0, 1.0f64..8.0),
        rho in (0.0f64..1.0, 0.0f64..1.0),
        alpha in (1.5f64..3.5, 1.5f64..3.5),
        index in 0usize..1000,
    ) {
        let universe = build_universe(&UniverseConfig {
            community_count: k,
            edge_propensity_variance: eps,
            seed: universe_seed,
            ..Default::default()
        }).unwrap();
        let family = FamilyConfig {
            graph_count: 1000,
            node_range: (n_lo.max(k), n_lo.max(k) + n_extra),
            community_range: (2, k.min(6)),
            homophily_range: ordered(h.0, h.1),
            degree_range: ordered(d.0, d.1),
            degree_separation_range: ordered(rho.0, rho.1),
            power_law_range: ordered(alpha.0, alpha.1),
            seed: Some(family_seed),
        };
        let g = match generate_graph(&universe, &family, index) {
            Ok(g) => g,
            // A drawn subset can lack any diagonal or off-diagonal propensity.
            Err(GenError::UnsatisfiableHomophily { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        prop_assert_eq!(g.check_invariants(), Ok(()));
        prop_assert!(g.communities.iter().all(|&c| c < k));
        let p = &g.params;
        prop_assert!((family.node_range.0..=family.node_range.1).contains(&p.node_count));
        prop_assert!((family.community_range.0..=family.community_range.1).contains(&p.community_count));
        prop_assert!(family.homophily_range.0 <= p.homophily && p.homophily <= family.homophily_range.1);
        prop_assert!(family.degree_range.0 <= p.avg_degree && p.avg_degree <= family.degree_range.1);
        prop_assert!(g.p_star.values().iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert_eq!(&g, &generate_graph(&universe, &family, index).unwrap());
    }
}
