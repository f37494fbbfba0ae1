use num_traits::Zero;
use proptest::prelude::*;

use polyval::discounted::{check_optimality, solve_discounted_graph, DiscountedOptions, RealizeStrategy};
use polyval::energy::pratt::{pratt_realize, DifferenceSystem};
use polyval::energy::{decide_mean_payoff_graph, solve_energy_graph, solve_energy_lex_graph, EnergyOptions};
use polyval::game::{GameGraph, Owner};
use polyval::json::{parse_game, serialize_game};
use polyval::oracles::{brute_disc, brute_energy, brute_energy_min_side, brute_mean_payoff, WinnerPartition, DEFAULT_CAP};
use polyval::weight::{rat, LexWeight, Rational};
use polyval::{GameKind, GameSpec};

fn owner() -> impl Strategy<Value = Owner> {
    prop_oneof![Just(Owner::Max), Just(Owner::Min)]
}

/// Games on up to `max_n` nodes with out-degree 1..=3 and weights `k/den`
/// for `|k| <= 4`, `den <= max_den`.
fn game(max_n: usize, max_den: i64) -> impl Strategy<Value = GameGraph<Rational>> {
    (1..=max_n).prop_flat_map(move |n| {
        let node = (owner(), prop::collection::vec((0..n, -4i64..=4, 1..=max_den), 1..=3));
        prop::collection::vec(node, n).prop_map(|nodes| {
            let owners = nodes.iter().map(|(o, _)| *o).collect();
            let edges = nodes
                .iter()
                .enumerate()
                .flat_map(|(a, (_, out))| out.iter().map(move |&(b, k, d)| (a, b, rat(k, d))))
                .collect();
            GameGraph::new(owners, edges)
        })
    })
}

fn lambda() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(rat(1, 2)), Just(rat(2, 3)), Just(rat(9, 10)), Just(rat(99, 100))]
}

fn options(realize: RealizeStrategy, monitor: bool) -> DiscountedOptions {
    DiscountedOptions { realize, monitor, ..DiscountedOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1024, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn discounted_values_match_the_oracle(g in game(5, 3), l in lambda()) {
        let oracle = brute_disc(&g, &l, DEFAULT_CAP).unwrap();
        for realize in [RealizeStrategy::PassThrough, RealizeStrategy::ExactVertex] {
            let sol = solve_discounted_graph(&g, &l, &options(realize, true)).unwrap();
            prop_assert_eq!(&sol.values, &oracle);
            prop_assert!(check_optimality(&g, &l, &sol.values));
            prop_assert!(sol.monitor.unwrap().pass);
        }
    }

    #[test]
    fn monitor_does_not_change_discounted_results(g in game(5, 2), l in lambda()) {
        let on = solve_discounted_graph(&g, &l, &options(RealizeStrategy::Auto, true)).unwrap();
        let off = solve_discounted_graph(&g, &l, &options(RealizeStrategy::Auto, false)).unwrap();
        prop_assert_eq!(on.values, off.values);
        prop_assert_eq!(on.iterations, off.iterations);
        prop_assert_eq!(on.steps, off.steps);
        prop_assert!(off.monitor.is_none());
    }

    #[test]
    fn steps_have_positive_length(g in game(5, 2), l in lambda()) {
        let sol = solve_discounted_graph(&g, &l, &options(RealizeStrategy::PassThrough, false)).unwrap();
        for s in &sol.steps {
            prop_assert!(s.epsilon > Rational::zero());
            prop_assert!(!s.binding.is_empty());
        }
    }

    #[test]
    fn energy_pipelines_match_the_oracle(g in game(6, 1)) {
        let oracle = brute_energy(&g, DEFAULT_CAP).unwrap();
        for fast in [false, true] {
            let o = EnergyOptions { integer_fast_path: fast, monitor: true, ..EnergyOptions::default() };
            let sol = solve_energy_graph(&g, &o).unwrap();
            prop_assert_eq!(&sol.partition, &oracle);
            // no report when elimination decides every node
            prop_assert!(sol.monitor.map_or(sol.reduced_nodes == 0, |m| m.pass));
        }
    }

    #[test]
    fn energy_with_fractional_weights(g in game(5, 3)) {
        let oracle = brute_energy(&g, DEFAULT_CAP).unwrap();
        let sol = solve_energy_graph(&g, &EnergyOptions::default()).unwrap();
        prop_assert_eq!(sol.partition, oracle);
    }

    #[test]
    fn energy_with_lex_weights(g in game(5, 1), rhos in prop::collection::vec(-2i64..=2, 15)) {
        let mut r = rhos.iter().cycle();
        let g = g.map_weights(|w| LexWeight::new(w.clone(), rat(*r.next().unwrap(), 1)));
        let oracle = brute_energy(&g, DEFAULT_CAP).unwrap();
        let o = EnergyOptions { monitor: true, ..EnergyOptions::default() };
        let sol = solve_energy_lex_graph(&g, &o).unwrap();
        prop_assert_eq!(&sol.partition, &oracle);
        prop_assert!(sol.monitor.map_or(sol.reduced_nodes == 0, |m| m.pass));
    }

    #[test]
    fn oracle_sides_are_complementary(g in game(5, 1)) {
        let max = brute_energy(&g, DEFAULT_CAP).unwrap().max_flags(g.n());
        let min = brute_energy_min_side(&g, DEFAULT_CAP).unwrap();
        for v in 0..g.n() {
            prop_assert_ne!(max[v], min[v]);
        }
    }

    #[test]
    fn certificate_paths_are_controllable(g in game(6, 1)) {
        let sol = solve_energy_graph(&g, &EnergyOptions::default()).unwrap();
        for p in &sol.certificate.paths {
            let first = &g.edges[p.edges[0]];
            prop_assert_eq!(first.from, p.from);
            prop_assert_eq!(g.edges[*p.edges.last().unwrap()].to, p.to);
            prop_assert_ne!(g.owners[p.from], g.owners[p.to]);
            for w in p.edges.windows(2) {
                let (e, f) = (&g.edges[w[0]], &g.edges[w[1]]);
                prop_assert_eq!(e.to, f.from);
                prop_assert_eq!(g.owners[f.from], g.owners[p.from]);
            }
        }
    }

    #[test]
    fn mean_payoff_threshold(g in game(5, 1), t in -3i64..=3) {
        let t = Rational::from_integer(t.into());
        let values = brute_mean_payoff(&g, DEFAULT_CAP).unwrap();
        let expected = WinnerPartition::from_flags(&values.iter().map(|v| *v >= t).collect::<Vec<_>>());
        let sol = decide_mean_payoff_graph(&g, &t, &EnergyOptions::default()).unwrap();
        prop_assert_eq!(sol.partition, expected);
    }

    #[test]
    fn difference_systems(n in 1usize..5, cs in prop::collection::vec((0usize..5, 0usize..5, -5i64..=5, any::<bool>()), 0..8)) {
        let mut s = DifferenceSystem::<i64>::new(n);
        for (a, b, c, eq) in cs {
            let (a, b) = (a % n, b % n);
            if eq { s.equal(a, b, c) } else { s.at_most(a, b, c) }
        }
        match pratt_realize(&s) {
            Ok(x) => prop_assert!(s.is_satisfied_by(&x)),
            Err(inf) => {
                prop_assert!(!inf.cycle.is_empty());
                // no small integer point exists either
                let range: Vec<i64> = (-12..=12).collect();
                let mut x = vec![0i64; n];
                fn search(s: &DifferenceSystem<i64>, x: &mut Vec<i64>, k: usize, range: &[i64]) -> bool {
                    if k == x.len() {
                        return s.is_satisfied_by(x);
                    }
                    range.iter().any(|&v| { x[k] = v; search(s, x, k + 1, range) })
                }
                prop_assert!(!search(&s, &mut x, 1, &range));
            }
        }
    }

    #[test]
    fn json_round_trip(g in game(4, 3), l in lambda()) {
        let nodes = (0..g.n()).map(|i| polyval::Node { id: format!("n{i}"), owner: g.owners[i] }).collect();
        let edges = g.edges.iter().map(|e| polyval::Edge { from: e.from, to: e.to, weight: polyval::WeightValue::Rational(e.weight.clone()) }).collect();
        let spec = GameSpec::new(GameKind::Discounted { lambda: l }, nodes, edges);
        let bytes = serialize_game(&spec);
        let back = parse_game(&bytes).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(serialize_game(&back), bytes);
    }
}
