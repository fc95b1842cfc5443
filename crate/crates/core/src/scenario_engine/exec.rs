//! Behavioral-programming style execution of a [`ScenarioProgram`].
//!
//! Each triggered rule becomes an activation with a program counter into its
//! body. At every step one event requested by an activation is selected; all
//! activations whose current step matches it advance, exhausted activations
//! retire, and rules triggered by the event are activated at position 0.

use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{BodyStep, EventInstance, ProgramError, ScenarioProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionStrategy {
    /// Lowest (rule declaration index, body position) wins; ties between
    /// activations of the same rule go to the older activation.
    #[default]
    Priority,
    /// Uniform choice among requesting activations, driven by the run seed.
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("budget must be positive")]
    ZeroBudget,
    #[error(transparent)]
    InvalidEvent(#[from] ProgramError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Activation {
    pub rule: usize,
    pub pc: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceEntry {
    pub event: EventInstance,
    pub injected: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace(pub Vec<TraceEntry>);

impl Trace {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &EventInstance> {
        self.0.iter().map(|e| &e.event)
    }

    /// Event names in order, handy for assertions.
    pub fn names(&self) -> Vec<&str> {
        self.events().map(|e| e.name.as_str()).collect()
    }

    /// Tab-separated rendering: `seq, sender, owner.name, args`; an absent
    /// sender prints as `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, entry) in self.0.iter().enumerate() {
            let e = &entry.event;
            let args: Vec<String> = e.args.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}.{}\t{}",
                i + 1,
                e.sender.as_deref().unwrap_or("-"),
                e.owner,
                e.name,
                args.join(",")
            );
        }
        out
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tsv())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Selected(EventInstance),
    Quiescent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub trace: Trace,
    pub selections: usize,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone)]
pub struct ExecutionState<'p> {
    program: &'p ScenarioProgram,
    activations: Vec<Activation>,
    trace: Trace,
    strategy: SelectionStrategy,
    seed: u64,
    rng: ChaCha8Rng,
}

impl<'p> ExecutionState<'p> {
    pub fn new(program: &'p ScenarioProgram, strategy: SelectionStrategy, seed: u64) -> Self {
        Self {
            program,
            activations: Vec::new(),
            trace: Trace::default(),
            strategy,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Deterministic priority selection, seed 0.
    pub fn deterministic(program: &'p ScenarioProgram) -> Self {
        Self::new(program, SelectionStrategy::Priority, 0)
    }

    pub fn program(&self) -> &'p ScenarioProgram {
        self.program
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn step_count(&self) -> usize {
        self.trace.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    /// Currently requested events, one entry per requesting activation.
    pub fn pending_requests(&self) -> Vec<&EventInstance> {
        self.activations.iter().filter_map(|a| self.program.request_at(a.rule, a.pc)).collect()
    }

    pub fn is_quiescent(&self) -> bool {
        self.pending_requests().is_empty()
    }

    /// Feeds an environment event into the program.
    pub fn inject(&mut self, event: &EventInstance) -> Result<(), EngineError> {
        let event = self.program.validate_event(event)?;
        self.apply(event, true);
        Ok(())
    }

    pub fn step(&mut self) -> StepResult {
        let mut candidates: Vec<usize> = (0..self.activations.len())
            .filter(|&i| {
                let a = self.activations[i];
                self.program.request_at(a.rule, a.pc).is_some()
            })
            .collect();
        if candidates.is_empty() {
            return StepResult::Quiescent;
        }
        let chosen = match self.strategy {
            SelectionStrategy::Priority => {
                candidates.sort_by_key(|&i| (self.activations[i].rule, self.activations[i].pc));
                candidates[0]
            }
            SelectionStrategy::SeededRandom => candidates[self.rng.gen_range(0..candidates.len())],
        };
        let a = self.activations[chosen];
        let event = self.program.request_at(a.rule, a.pc).expect("candidate is at a request").clone();
        self.apply(event.clone(), false);
        StepResult::Selected(event)
    }

    fn apply(&mut self, event: EventInstance, injected: bool) {
        let rules = self.program.rules();
        for a in &mut self.activations {
            let step: &BodyStep = &rules[a.rule].body[a.pc];
            if step.pattern().matches(&event) {
                a.pc += 1;
            }
        }
        self.activations.retain(|a| a.pc < rules[a.rule].body.len());
        for (idx, rule) in rules.iter().enumerate() {
            if rule.trigger.matches(&event) {
                self.activations.push(Activation { rule: idx, pc: 0 });
            }
        }
        self.trace.0.push(TraceEntry { event, injected });
    }
}

/// Steps until quiescence or until `budget` selections have been made.
pub fn run_to_quiescence(state: &mut ExecutionState<'_>, budget: usize) -> Result<RunReport, EngineError> {
    if budget == 0 {
        return Err(EngineError::ZeroBudget);
    }
    let mut selections = 0;
    while selections < budget {
        match state.step() {
            StepResult::Selected(_) => selections += 1,
            StepResult::Quiescent => break,
        }
    }
    Ok(RunReport { trace: state.trace.clone(), selections, budget_exhausted: !state.is_quiescent() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario_engine::model::Value;
    use crate::scenario_engine::parse::parse_scenario_spec;

    fn charging_plan() -> ScenarioProgram {
        parse_scenario_spec(include_str!("../../data/charging_plan.scn")).unwrap()
    }

    fn prefs() -> EventInstance {
        EventInstance::new("App", "enterChargingPreferences").from("EVU")
    }

    #[test]
    fn charging_plan_trigger_activates_one_rule() {
        let prog = charging_plan();
        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&prefs()).unwrap();
        assert_eq!(st.activations().len(), 1);
        assert_eq!(st.trace().len(), 1);
        assert_eq!(st.step_count(), 1);
    }

    #[test]
    fn charging_plan_body_order() {
        let prog = charging_plan();
        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&prefs()).unwrap();
        let mut got = Vec::new();
        while let StepResult::Selected(e) = st.step() {
            got.push(e.name);
        }
        assert_eq!(got, ["calculateChargingPlan", "chargingPlan", "executeChargingPlan"]);
        assert_eq!(st.step(), StepResult::Quiescent);
        assert_eq!(st.trace().len(), 4);
        assert_eq!(
            st.trace().to_tsv(),
            "1\tEVU\tApp.enterChargingPreferences\t\n\
             2\t-\tApp.calculateChargingPlan\t\n\
             3\tApp\tEV.chargingPlan\t\n\
             4\t-\tEV.executeChargingPlan\t\n"
        );
    }

    #[test]
    fn fresh_state_is_quiescent() {
        let prog = charging_plan();
        let mut st = ExecutionState::deterministic(&prog);
        assert_eq!(st.step(), StepResult::Quiescent);
        assert!(st.trace().is_empty());
    }

    #[test]
    fn injection_without_matching_trigger() {
        let prog = charging_plan();
        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&EventInstance::new("EVU", "energyPriceInformation")).unwrap();
        assert_eq!(st.trace().len(), 1);
        assert!(st.activations().is_empty());
        // sender mismatch: trigger requires EVU as sender
        st.inject(&EventInstance::new("App", "enterChargingPreferences").from("EV")).unwrap();
        assert!(st.activations().is_empty());
    }

    #[test]
    fn injection_errors() {
        let prog = parse_scenario_spec("system A\nevent A.x(n: int)\nevent A.y()\nscenario s on A.x { request A.y() }")
            .unwrap();
        let mut st = ExecutionState::deterministic(&prog);
        for bad in [
            EventInstance::new("A", "x"),
            EventInstance::new("A", "x").arg("n", Value::Bool(true)),
            EventInstance::new("A", "x").arg("n", Value::Int(1)).arg("m", Value::Int(2)),
            EventInstance::new("A", "ghost"),
            EventInstance::new("A", "y").from("Nobody"),
        ] {
            assert!(st.inject(&bad).is_err(), "{bad}");
        }
        assert!(st.trace().is_empty());
        st.inject(&EventInstance::new("A", "x").arg("n", Value::Int(1))).unwrap();
        assert_eq!(st.activations().len(), 1);
    }

    // Two rules triggered by the same event request distinct events.
    // Hand enumeration against the (rule index, body position) priority:
    //   after x: candidates (0,0)->a1, (1,0)->b1  => a1
    //   after a1: (0,1)->a2, (1,0)->b1             => a2 (0 < 1 on rule index)
    //   after a2: rule 0 retired, (1,0)->b1        => b1, then (1,1)->b2 => b2
    // Swapping the declarations swaps the roles.
    const TWO_RULES: &str = "system A\nevent A.x()\nevent A.a1()\nevent A.a2()\nevent A.b1()\nevent A.b2()\n";

    #[test]
    fn priority_between_rules() {
        let first = format!(
            "{TWO_RULES}scenario ra on A.x {{ request A.a1() request A.a2() }}\nscenario rb on A.x {{ request A.b1() request A.b2() }}"
        );
        let second = format!(
            "{TWO_RULES}scenario rb on A.x {{ request A.b1() request A.b2() }}\nscenario ra on A.x {{ request A.a1() request A.a2() }}"
        );
        for (text, want) in [(first, ["x", "a1", "a2", "b1", "b2"]), (second, ["x", "b1", "b2", "a1", "a2"])] {
            let prog = parse_scenario_spec(&text).unwrap();
            let mut st = ExecutionState::deterministic(&prog);
            st.inject(&EventInstance::new("A", "x")).unwrap();
            let run = run_to_quiescence(&mut st, 10).unwrap();
            assert_eq!(run.trace.names(), want);
            assert!(!run.budget_exhausted);
        }
    }

    #[test]
    fn shared_request_advances_both_rules() {
        let prog = parse_scenario_spec(
            "system A\nevent A.x()\nevent A.y()\nevent A.z()\n\
             scenario r1 on A.x { request A.y() }\n\
             scenario r2 on A.x { receive A.y request A.z() }",
        )
        .unwrap();
        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&EventInstance::new("A", "x")).unwrap();
        let run = run_to_quiescence(&mut st, 10).unwrap();
        assert_eq!(run.trace.names(), ["x", "y", "z"]);
    }

    #[test]
    fn receive_only_rule_is_quiescent_until_event() {
        let prog = parse_scenario_spec(
            "system A\nevent A.x()\nevent A.y()\nevent A.z()\nscenario w on A.x { receive A.y request A.z() }",
        )
        .unwrap();
        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&EventInstance::new("A", "x")).unwrap();
        assert!(st.is_quiescent());
        assert_eq!(st.step(), StepResult::Quiescent);
        st.inject(&EventInstance::new("A", "y")).unwrap();
        assert_eq!(st.step(), StepResult::Selected(EventInstance::new("A", "z")));
    }

    // Hand simulation of the cycle, three steps:
    //   inject x: rule p active (requests y)
    //   step 1: y selected, p retires, q activates (requests x)
    //   step 2: x selected, q retires, p activates (requests y)
    //   step 3: y selected ... never quiescent.
    #[test]
    fn mutual_retrigger_exhausts_budget() {
        let prog = parse_scenario_spec(
            "system A\nevent A.x()\nevent A.y()\nscenario p on A.x { request A.y() }\nscenario q on A.y { request A.x() }",
        )
        .unwrap();
        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&EventInstance::new("A", "x")).unwrap();
        assert_eq!(st.step(), StepResult::Selected(EventInstance::new("A", "y")));
        assert_eq!(st.step(), StepResult::Selected(EventInstance::new("A", "x")));
        assert_eq!(st.step(), StepResult::Selected(EventInstance::new("A", "y")));

        let mut st = ExecutionState::deterministic(&prog);
        st.inject(&EventInstance::new("A", "x")).unwrap();
        let run = run_to_quiescence(&mut st, 50).unwrap();
        assert_eq!(run.selections, 50);
        assert!(run.budget_exhausted);
        assert_eq!(run.trace.len(), 51);
    }

    #[test]
    fn zero_budget() {
        let prog = charging_plan();
        let mut st = ExecutionState::deterministic(&prog);
        assert_eq!(run_to_quiescence(&mut st, 0), Err(EngineError::ZeroBudget));
    }

    #[test]
    fn seeded_random_is_reproducible() {
        let text = format!(
            "{TWO_RULES}scenario ra on A.x {{ request A.a1() request A.a2() }}\nscenario rb on A.x {{ request A.b1() request A.b2() }}"
        );
        let prog = parse_scenario_spec(&text).unwrap();
        let run = |seed| {
            let mut st = ExecutionState::new(&prog, SelectionStrategy::SeededRandom, seed);
            st.inject(&EventInstance::new("A", "x")).unwrap();
            run_to_quiescence(&mut st, 10).unwrap().trace.to_tsv()
        };
        assert_eq!(run(7), run(7));
        let distinct: std::collections::BTreeSet<String> = (0..32).map(run).collect();
        assert!(distinct.len() > 1, "random selection never interleaved");
    }
}
