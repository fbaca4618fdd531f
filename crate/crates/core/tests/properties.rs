use num_rational::BigRational;
use proptest::prelude::*;
use stable_kmeans::exact::{rational, RootSum};
use stable_kmeans::generators::{generate, GenSpec};
use stable_kmeans::local_search::run_local_search;
use stable_kmeans::metric::{int_coords, Cost, MetricInstance, Objective, Solution};
use stable_kmeans::oracle::{brute_force_optimum, certify_stability};
use stable_kmeans::reductions::{qsat_to_e3sat, CnfFormula, Lit, TripleSystem};
use stable_kmeans::verify::{count_sat, SearchBudget};

fn coords(dim: usize, n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-20i64..=20, dim), n)
}

prop_compose! {
    fn instance(objective: Objective)(dim in 1usize..=2, n in 2usize..=7, c in 2usize..=5)
        (points in coords(dim, n), centres in coords(dim, c), k in 1..=c.min(3))
        -> (Vec<Vec<i64>>, Vec<Vec<i64>>, usize, Objective) {
        (points, centres, k, objective)
    }
}

fn build((p, c, k, o): &(Vec<Vec<i64>>, Vec<Vec<i64>>, usize, Objective)) -> MetricInstance {
    MetricInstance::build(int_coords(p), int_coords(c), *k, *o).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn opening_a_centre_never_raises_cost(spec in instance(Objective::Means), extra in 0usize..5) {
        let inst = build(&spec);
        let s = Solution::first(inst.k());
        let extra = extra % inst.n_centres();
        let mut more = s.indices().to_vec();
        if !more.contains(&extra) {
            more.push(extra);
            more.sort_unstable();
        }
        prop_assert!(inst.cost_of_indices(&more) <= inst.cost(&s));
    }

    #[test]
    fn median_costs_are_exact(spec in instance(Objective::Median)) {
        let inst = build(&spec);
        let s = Solution::first(inst.k());
        let Cost::Radical(r) = inst.cost(&s) else { panic!("median costs are radicals") };
        let direct: f64 = (0..inst.n_points())
            .map(|j| s.indices().iter().map(|&i| (inst.sqdist()[i][j] as f64).sqrt()).fold(f64::INFINITY, f64::min))
            .sum();
        prop_assert!((r.to_f64() - direct).abs() <= 1e-6 * direct.max(1.0));
    }

    #[test]
    fn rescaling_scales_means_costs(spec in instance(Objective::Means), t in 2i64..5) {
        let inst = build(&spec);
        let scaled: Vec<Vec<i64>> = spec.0.iter().map(|v| v.iter().map(|x| x * t).collect()).collect();
        let centres: Vec<Vec<i64>> = spec.1.iter().map(|v| v.iter().map(|x| x * t).collect()).collect();
        let big = MetricInstance::build(int_coords(&scaled), int_coords(&centres), spec.2, Objective::Means).unwrap();
        let a = brute_force_optimum(&inst).unwrap();
        let b = brute_force_optimum(&big).unwrap();
        prop_assert_eq!(&a.optima, &b.optima);
        let (Cost::Squared(x), Cost::Squared(y)) = (a.cost, b.cost) else { panic!("means costs are integers") };
        prop_assert_eq!(x * (t * t) as u128, y);
    }

    #[test]
    fn local_search_strictly_descends(spec in instance(Objective::Means), rho in 1usize..=2) {
        let inst = build(&spec);
        let rho = rho.min(inst.k());
        let t = run_local_search(&inst, rho, &Solution::first(inst.k()), None).unwrap();
        prop_assert!(t.terminated_locally_optimal);
        for w in t.iterates.windows(2) {
            prop_assert!(w[1].cost < w[0].cost);
        }
        let again = run_local_search(&inst, rho, &Solution::first(inst.k()), None).unwrap();
        prop_assert_eq!(serde_json::to_string(&t).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn stability_is_monotone_in_alpha(spec in instance(Objective::Means), a in 1i64..40, b in 1i64..40) {
        let inst = build(&spec);
        let (lo, hi) = (a.min(b), a.max(b));
        let small: BigRational = rational(100 + lo, 100);
        let large: BigRational = rational(100 + hi, 100);
        let s_large = certify_stability(&inst, &large).unwrap().stable;
        let s_small = certify_stability(&inst, &small).unwrap().stable;
        prop_assert!(!s_large || s_small);
    }

    #[test]
    fn generator_is_deterministic(seed in any::<u64>(), n in 3usize..10, k in 1usize..3) {
        let spec = GenSpec::uniform(n, k + 2, k, 2, seed);
        prop_assert_eq!(generate(&spec).unwrap().to_json().unwrap(), generate(&spec).unwrap().to_json().unwrap());
    }

    #[test]
    fn root_sums_order_like_floats(xs in prop::collection::vec(1u64..200, 1..5), ys in prop::collection::vec(1u64..200, 1..5)) {
        let sum = |v: &[u64]| v.iter().fold(RootSum::zero(), |acc, &d| acc + RootSum::sqrt(d));
        let (a, b) = (sum(&xs), sum(&ys));
        let (fa, fb) = (a.to_f64(), b.to_f64());
        if (fa - fb).abs() > 1e-9 {
            prop_assert_eq!(a.cmp(&b), fa.partial_cmp(&fb).unwrap());
        }
    }
}

fn formula() -> impl Strategy<Value = CnfFormula> {
    (1usize..=5).prop_flat_map(|n| {
        let clause = prop::collection::btree_map(0..n, any::<bool>(), 1..=n)
            .prop_map(|m| m.into_iter().map(|(var, positive)| Lit { var, positive }).collect::<Vec<_>>());
        prop::collection::vec(clause, 1..=3).prop_map(move |cs| CnfFormula::new(n, cs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exact3_rewriting_keeps_model_count(phi in formula()) {
        let (psi, prov) = qsat_to_e3sat(&phi).unwrap();
        prop_assert!(psi.clauses().iter().all(|c| c.len() == 3));
        prop_assert!(psi.occurrence_bound() <= prov.b_prime);
        let b = SearchBudget::unlimited();
        prop_assert_eq!(count_sat(&phi, &b).unwrap().count, count_sat(&psi, &b).unwrap().count);
        if prov.q >= 2 {
            prop_assert!(psi.n_vars() <= 2 * prov.q * prov.b * phi.n_vars());
            prop_assert!(psi.m() <= 3 * prov.q * prov.q * phi.m());
        }
    }

    #[test]
    fn dimacs_round_trip(phi in formula()) {
        prop_assert_eq!(CnfFormula::from_dimacs(&phi.to_dimacs()).unwrap(), phi);
    }

    #[test]
    fn triple_text_round_trip(raw in prop::collection::btree_set((0usize..9, 0usize..9, 0usize..9), 0..12)) {
        let triples: std::collections::BTreeSet<[usize; 3]> = raw
            .into_iter()
            .filter(|(a, b, c)| a != b && b != c && a != c)
            .map(|(a, b, c)| {
                let mut t = [a, b, c];
                t.sort_unstable();
                t
            })
            .collect();
        let ts = TripleSystem::plain(9, triples.into_iter().collect()).unwrap();
        prop_assert_eq!(TripleSystem::from_text(&ts.to_text()).unwrap(), ts);
    }
}
