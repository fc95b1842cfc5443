//! Derives the value matrix and cost vector for the smart-charging features
//! and prints the resulting instance.
//!
//! ```bash
//! cargo run --example estimate_instance
//! ```

use std::collections::BTreeMap;

use release_planner::estimation::{
    build_instance, derive_cost_vector, derive_value_matrix, program_cost, EstimationParams,
};
use release_planner::feature_model::{parse_feature_file, Stakeholder};
use release_planner::scenario_engine::parse_scenario_spec;

const FEATURES: [&str; 3] = [
    include_str!("../data/smart_charging/features/grid.feature"),
    include_str!("../data/smart_charging/features/status.feature"),
    include_str!("../data/smart_charging/features/umc.feature"),
];
const PROGRAMS: [(&str, &str); 3] = [
    ("grid", include_str!("../data/smart_charging/scenarios/grid.scn")),
    ("status", include_str!("../data/smart_charging/scenarios/status.scn")),
    ("umc", include_str!("../data/smart_charging/scenarios/umc.scn")),
];

fn main() {
    let stakeholders = vec![
        Stakeholder::new("evu", "Electric vehicle user", 0.5),
        Stakeholder::new("dso", "Distribution system operator", 0.3),
        Stakeholder::new("city", "City administration", 0.2),
    ];
    let features: Vec<_> = FEATURES.iter().map(|t| parse_feature_file(t).expect("feature parses")).collect();
    let programs: BTreeMap<_, _> =
        PROGRAMS.iter().map(|(id, t)| (id.to_string(), parse_scenario_spec(t).expect("program parses"))).collect();

    let params = EstimationParams::default();
    for (id, p) in &programs {
        println!("{id:<7} cost {:>5}  ({} body steps)", program_cost(p, &params), p.total_body_steps());
    }

    let value = derive_value_matrix(&features, &stakeholders, &params).unwrap();
    let cost = derive_cost_vector(&features, &programs, &params).unwrap();
    let inst = build_instance(&stakeholders, &features, value, cost).unwrap();
    println!("\nscores: {:?}\n\n{}", inst.scores(), inst.to_csv());
}
