//! Properties of the instance model, the fronts and the estimates.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use release_planner::estimation::{derive_cost_vector, derive_value_matrix, EstimationParams};
use release_planner::feature_model::{parse_feature_file, FeatureSpec, Stakeholder};
use release_planner::monrp::{
    brute_force_front, dominates, hypervolume, nsga2_search, random_instance, read_front_csv, MonrpInstance,
    SearchParams,
};
use release_planner::scenario_engine::parse_scenario_spec;

use common::{integer_instance, seeded};

fn real_instance() -> impl Strategy<Value = MonrpInstance> {
    (1usize..6, 1usize..14, any::<u64>(), 0.0f64..=1.0)
        .prop_map(|(m, n, seed, p)| random_instance(m, n, seed, (0.5, 20.0), (0.5, 9.0), p).unwrap())
}

proptest! {
    #![proptest_config(seeded(1000, 21))]

    #[test]
    fn scores_scale_with_values(inst in real_instance(), k in 0.0f64..50.0) {
        let scaled = inst.with_scaled_values(k).unwrap();
        for (a, b) in inst.scores().iter().zip(scaled.scores()) {
            prop_assert!((a * k - b).abs() <= 1e-9 * (a * k).abs().max(1.0));
        }
    }

    #[test]
    fn instance_csv_round_trip(inst in real_instance()) {
        prop_assert_eq!(MonrpInstance::from_csv(&inst.to_csv()).unwrap(), inst);
    }

    #[test]
    fn exact_front_is_sorted_and_complete(inst in integer_instance(3, 9)) {
        let front = brute_force_front(&inst).unwrap();
        let c = front.candidates();
        for w in c.windows(2) {
            prop_assert!(w[0].cost_total < w[1].cost_total
                || (w[0].cost_total == w[1].cost_total && w[0].selection < w[1].selection));
        }
        // every vector outside the front is dominated by or equal to a front member
        let n = inst.n();
        for mask in 0..1u64 << n {
            let bits = release_planner::monrp::Selection::from_mask(mask, n);
            if c.iter().any(|x| x.selection == bits) {
                continue;
            }
            let (v, cost) = release_planner::monrp::evaluate(&inst, &bits).unwrap();
            prop_assert!(c.iter().any(|x| x.value_total >= v && x.cost_total <= cost && (x.value_total > v || x.cost_total < cost)));
        }
        prop_assert_eq!(read_front_csv(&front.to_csv()).unwrap(), c.to_vec());
    }
}

proptest! {
    #![proptest_config(seeded(300, 22))]

    #[test]
    fn metaheuristic_points_are_covered_by_the_oracle(inst in real_instance(), seed in any::<u64>()) {
        let exact = brute_force_front(&inst).unwrap();
        let params = SearchParams { population: 24, generations: 30, ..SearchParams::with_seed(seed) };
        let meta = nsga2_search(&inst, &params).unwrap();
        for m in meta.candidates() {
            prop_assert!(exact.candidates().iter().any(|e| dominates(e, m)
                || (e.value_total == m.value_total && e.cost_total == m.cost_total)));
        }
        let (he, hm) = (hypervolume(&exact, &inst).unwrap(), hypervolume(&meta, &inst).unwrap());
        prop_assert!(he >= hm - 1e-9 * he.abs().max(1.0));
    }
}

fn stakeholders() -> Vec<Stakeholder> {
    vec![Stakeholder::new("a", "", 0.5), Stakeholder::new("b", "", 0.25), Stakeholder::new("c", "", 0.25)]
}

/// Features as lists of scenarios, each scenario a tag bitmask over a, b, c.
fn features() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..8, 1..5), 1..5)
}

fn build(features: &[Vec<u8>]) -> Vec<FeatureSpec> {
    features
        .iter()
        .enumerate()
        .map(|(i, scenarios)| {
            let mut text = format!("@id:f{i}\nFeature: F{i}\n");
            for (k, mask) in scenarios.iter().enumerate() {
                for (bit, id) in ["a", "b", "c"].iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        text.push_str(&format!("  @stakeholder:{id}\n"));
                    }
                }
                text.push_str(&format!("  Scenario: s{k}\n    When x\n"));
            }
            parse_feature_file(&text).unwrap()
        })
        .collect()
}

fn program(body_steps: usize, subsystems: usize) -> String {
    let mut text = String::from("system U stakeholder\nsystem A\nsystem B\nevent A.go()\nevent B.go()\n");
    for s in 0..subsystems {
        text.push_str(&format!("system S{s} subsystem of A\n"));
    }
    text.push_str("scenario r on A.go {\n");
    for _ in 0..body_steps {
        text.push_str("  request B.go()\n");
    }
    text.push_str("}\n");
    text
}

proptest! {
    #![proptest_config(seeded(1000, 23))]

    #[test]
    fn value_entries_are_linear_and_monotone(f in features(), unit in 0.1f64..10.0, extra in 0usize..5, mask in 1u8..8) {
        let specs = build(&f);
        let base = EstimationParams { value_unit: unit, ..EstimationParams::default() };
        let doubled = EstimationParams { value_unit: 2.0 * unit, ..EstimationParams::default() };
        let m1 = derive_value_matrix(&specs, &stakeholders(), &base).unwrap();
        let m2 = derive_value_matrix(&specs, &stakeholders(), &doubled).unwrap();
        for (r1, r2) in m1.iter().zip(&m2) {
            for (a, b) in r1.iter().zip(r2) {
                prop_assert_eq!(2.0 * a, *b);
            }
        }
        let mut more = f.clone();
        let target = extra % more.len();
        more[target].push(mask);
        let m3 = derive_value_matrix(&build(&more), &stakeholders(), &base).unwrap();
        for (r1, r3) in m1.iter().zip(&m3) {
            for (a, b) in r1.iter().zip(r3) {
                prop_assert!(b >= a);
            }
        }
    }

    #[test]
    fn overrides_are_taken_verbatim(
        f in features(),
        value in 0.0f64..1e6,
        cost in 0.0f64..1e6,
        alpha in 0.0f64..10.0,
        unit in 0.1f64..10.0,
    ) {
        let specs = build(&f);
        let mut params = EstimationParams { alpha, value_unit: unit, ..EstimationParams::default() };
        params.overrides.value.insert("f0".into(), [("b".to_string(), value)].into());
        params.overrides.cost.insert("f0".into(), cost);
        let m = derive_value_matrix(&specs, &stakeholders(), &params).unwrap();
        prop_assert_eq!(m[1][0].to_bits(), value.to_bits());
        let c = derive_cost_vector(&specs, &BTreeMap::new(), &params);
        if specs.len() == 1 {
            prop_assert_eq!(c.unwrap()[0].to_bits(), cost.to_bits());
        } else {
            prop_assert!(c.is_err());
        }
    }

    #[test]
    fn cost_grows_with_body_steps(steps in 1usize..8, subsystems in 0usize..4, add in 1usize..4) {
        let specs = build(&[vec![1]]);
        let cost = |steps| {
            let programs: BTreeMap<_, _> = [("f0".to_string(), parse_scenario_spec(&program(steps, subsystems)).unwrap())].into();
            derive_cost_vector(&specs, &programs, &EstimationParams::default()).unwrap()[0]
        };
        let c = cost(steps);
        prop_assert_eq!(c, 5.0 * 2.0 + steps as f64 + 3.0 * subsystems as f64);
        prop_assert!(cost(steps + add) >= c);
    }
}
