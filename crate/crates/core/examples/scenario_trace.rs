//! Runs a scenario specification from one injected event and prints the trace.
//!
//! ```bash
//! cargo run --example scenario_trace -- data/charging_plan.scn "EVU -> App.enterChargingPreferences()"
//! ```

use release_planner::scenario_engine::{
    parse_event_pattern, parse_scenario_spec, run_to_quiescence, EventInstance, ExecutionState, SelectionStrategy,
};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "data/charging_plan.scn".into());
    let event = args.next().unwrap_or_else(|| "EVU -> App.enterChargingPreferences()".into());
    let seed: Option<u64> = args.next().and_then(|s| s.parse().ok());

    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let program = parse_scenario_spec(&text).unwrap_or_else(|e| panic!("{path}: {e}"));
    let pattern = parse_event_pattern(&event).unwrap_or_else(|e| panic!("{event}: {e}"));
    let mut instance = EventInstance::new(&pattern.owner, &pattern.name);
    if let Some(sender) = &pattern.sender {
        instance = instance.from(sender);
    }
    for (name, value) in &pattern.args {
        instance = instance.arg(name, value.clone());
    }

    let strategy = if seed.is_some() { SelectionStrategy::SeededRandom } else { SelectionStrategy::Priority };
    let mut state = ExecutionState::new(&program, strategy, seed.unwrap_or(0));
    state.inject(&instance).unwrap_or_else(|e| panic!("{e}"));
    let report = run_to_quiescence(&mut state, 100).expect("non-zero budget");
    print!("{}", report.trace);
    println!(
        "{} selections, {}",
        report.selections,
        if report.budget_exhausted { "budget exhausted" } else { "quiescent" }
    );
}
