//! One round of the test-driven loop on the user-managed charging feature:
//! generate step skeletons, bind them, run them against the scenario
//! specification, then drop a rule and watch the test fail.
//!
//! ```bash
//! cargo run --example tdss_loop
//! ```

use release_planner::feature_model::parse_feature_file;
use release_planner::scenario_engine::{parse_scenario_spec, SelectionStrategy};
use release_planner::tdss::{bind_steps, execute_test, generate_step_skeletons, parse_bindings, render_steps_file};

const FEATURE: &str = include_str!("../data/smart_charging/features/umc.feature");
const SCENARIOS: &str = include_str!("../data/smart_charging/scenarios/umc.scn");
const BINDINGS: &str = include_str!("../data/smart_charging/bindings/umc.bind");

fn run(scn: &str) {
    let spec = parse_feature_file(FEATURE).expect("feature parses");
    let program = parse_scenario_spec(scn).expect("scenarios parse");
    let entries = parse_bindings(BINDINGS).expect("bindings parse");
    let bound = bind_steps(&generate_step_skeletons(&spec), &entries, &program).expect("bindings are valid");
    let report = execute_test(&spec, &bound.skeletons, &program, 100, SelectionStrategy::Priority, 0).unwrap();
    print!("{report}");
    for s in &report.scenarios {
        println!("\n{}:", s.name);
        for line in &s.trace {
            println!("  {line}");
        }
    }
}

fn main() {
    let spec = parse_feature_file(FEATURE).expect("feature parses");
    println!("--- steps file ---\n{}", render_steps_file(&generate_step_skeletons(&spec)));

    println!("--- full specification ---");
    run(SCENARIOS);

    let start = SCENARIOS.find("scenario umc ").expect("umc rule");
    let end = start + SCENARIOS[start..].find('}').unwrap() + 1;
    let trimmed = format!("{}{}", &SCENARIOS[..start], &SCENARIOS[end..]);
    println!("\n--- without rule umc ---");
    run(&trimmed);
}
