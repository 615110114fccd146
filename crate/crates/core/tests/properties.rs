//! Property tests for the set-function oracles and the contract models.

use proptest::prelude::*;

use contractlab_core::itemset::ItemSet;
use contractlab_core::multiaction::{agent_best_response, MultiActionInstance, NumericMode};
use contractlab_core::setfn::{CoverageFn, SetFunction};
use contractlab_core::value::Value;

fn ratio_strategy(denom: i64) -> impl Strategy<Value = Value> {
    (0..=denom).prop_map(move |p| Value::ratio(p, denom))
}

fn additive_fn(n: usize) -> impl Strategy<Value = SetFunction> {
    prop::collection::vec(ratio_strategy(16), n)
        .prop_map(|w| SetFunction::additive(w).expect("non-negative weights"))
}

fn coverage_fn(items: usize, universe: usize) -> impl Strategy<Value = CoverageFn> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), universe), items).prop_map(
        move |rows| {
            let covers: Vec<Vec<usize>> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter_map(|(i, &b)| b.then_some(i))
                        .collect()
                })
                .collect();
            CoverageFn::from_index_covers(universe, &covers).expect("indices in range")
        },
    )
}

fn xos_fn(n: usize) -> impl Strategy<Value = Vec<Vec<Value>>> {
    prop::collection::vec(prop::collection::vec(ratio_strategy(16), n), 1..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn values_are_nonnegative_and_zero_on_empty(clauses in xos_fn(5), mask in 0u64..32) {
        let f = SetFunction::xos(clauses).unwrap();
        let v = f.value(&ItemSet::from_mask(5, mask)).unwrap();
        prop_assert!(!v.is_negative());
        prop_assert!(f.value(&ItemSet::empty(5)).unwrap().is_zero());
    }

    #[test]
    fn xos_dominates_every_clause_with_equality_somewhere(
        clauses in xos_fn(5),
        mask in 0u64..32,
    ) {
        let s = ItemSet::from_mask(5, mask);
        let f = SetFunction::xos(clauses.clone()).unwrap();
        let v = f.value(&s).unwrap();
        let mut met = false;
        for clause in &clauses {
            let cv = s.iter().fold(Value::zero(), |acc, i| &acc + &clause[i]);
            prop_assert!(cv <= v);
            met |= cv == v;
        }
        prop_assert!(met);
    }

    #[test]
    fn coverage_functions_are_monotone_submodular(cov in coverage_fn(6, 8)) {
        let f = SetFunction::coverage(cov);
        let report = f.check_classes().unwrap();
        prop_assert!(report.monotone, "witness {:?}", report.monotone_witness);
        prop_assert!(report.submodular, "witness {:?}", report.submodular_witness);
    }

    #[test]
    fn demand_maximizes_surplus(
        f in additive_fn(6),
        prices in prop::collection::vec(ratio_strategy(20), 6),
    ) {
        let best = f.demand(&prices).unwrap();
        let surplus = |s: &ItemSet| {
            s.iter().fold(f.value(s).unwrap(), |acc, i| &acc - &prices[i])
        };
        let top = surplus(&best);
        for mask in 0..64u64 {
            prop_assert!(surplus(&ItemSet::from_mask(6, mask)) <= top);
        }
    }

    #[test]
    fn marginals_telescope(f in additive_fn(6), mask in 0u64..64, order_seed in any::<u64>()) {
        let target = ItemSet::from_mask(6, mask);
        let mut order = target.indices();
        // cheap deterministic shuffle
        let mut state = order_seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let mut acc = Value::zero();
        let mut partial = ItemSet::empty(6);
        for &i in &order {
            acc = &acc + &f.marginal(i, &partial).unwrap();
            partial.insert(i);
        }
        let direct = f.value(&target).unwrap();
        prop_assert!((acc.to_f64() - direct.to_f64()).abs() <= 1e-9);
    }

    #[test]
    fn best_response_beats_every_set(
        values in prop::collection::vec(ratio_strategy(12), 16),
        costs in prop::collection::vec(ratio_strategy(24), 4),
        alpha_num in 0i64..=12,
    ) {
        let mut values = values;
        values[0] = Value::zero();
        let f = SetFunction::table(values).unwrap();
        let inst = MultiActionInstance::new(costs.clone(), f, NumericMode::Rational).unwrap();
        let alpha = Value::ratio(alpha_num, 12);
        let br = agent_best_response(&inst, &alpha).unwrap();
        let utility = |s: &ItemSet| {
            let c = s.iter().fold(Value::zero(), |acc, i| &acc + &costs[i]);
            &(&inst.f().value(s).unwrap() * &alpha) - &c
        };
        let top = utility(&br);
        for mask in 0..16u64 {
            prop_assert!(utility(&ItemSet::from_mask(4, mask)) <= top);
        }
    }
}
