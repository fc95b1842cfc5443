//! Test-driven scenario specification: usage scenarios become test steps,
//! test steps are bound to events, and the bound steps run against a
//! scenario program.
//!
//! A `When` step binds to a `trigger` (the event is injected), a `Then` step
//! to a `receive` (the engine runs until the event is selected). Unrelated
//! events may be selected in between.

use std::fmt::{self, Write as _};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature_model::{FeatureSpec, StepKind};
use crate::scenario_engine::{
    parse_event_pattern, EngineError, EventInstance, EventPattern, ExecutionState, ProgramError, ScenarioProgram,
    SelectionStrategy, StepResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Trigger,
    Receive,
}

impl Action {
    pub fn expected_for(kind: StepKind) -> Self {
        match kind {
            StepKind::When => Action::Trigger,
            StepKind::Then => Action::Receive,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Trigger => "trigger",
            Action::Receive => "receive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub action: Action,
    pub event: EventPattern,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSkeleton {
    pub feature_id: String,
    pub scenario_name: String,
    pub scenario_index: usize,
    pub step_index: usize,
    pub kind: StepKind,
    pub text: String,
    /// Anchored, escaped step text.
    pub pattern: String,
    pub binding: Option<Binding>,
}

#[derive(Debug, Error)]
pub enum TdssError {
    #[error("bindings line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("bindings line {line}: {action} bound to {kind} step `{text}`")]
    ActionMismatch { line: usize, action: Action, kind: StepKind, text: String },
    #[error("bindings line {line}: {source}")]
    Event { line: usize, source: ProgramError },
    #[error("step `{text}` matches bindings on lines {first} and {second}")]
    Ambiguous { text: String, first: usize, second: usize },
    #[error("steps file line {line}: {message}")]
    StepsSyntax { line: usize, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One skeleton per step, in file order, unbound.
pub fn generate_step_skeletons(spec: &FeatureSpec) -> Vec<StepSkeleton> {
    let mut out = Vec::with_capacity(spec.step_count());
    for (si, scenario) in spec.scenarios.iter().enumerate() {
        for (k, step) in scenario.steps.iter().enumerate() {
            out.push(StepSkeleton {
                feature_id: spec.id.clone(),
                scenario_name: scenario.name.clone(),
                scenario_index: si,
                step_index: k,
                kind: step.resolved,
                text: step.text.clone(),
                pattern: format!("^{}$", regex::escape(&step.text)),
                binding: None,
            });
        }
    }
    out
}

/// Renders skeletons as a `.steps` file: `keyword<TAB>pattern` lines, each
/// scenario introduced by a comment.
pub fn render_steps_file(skeletons: &[StepSkeleton]) -> String {
    let mut out = String::new();
    if let Some(first) = skeletons.first() {
        let _ = writeln!(out, "# feature: {}", first.feature_id);
    }
    let mut current = None;
    for s in skeletons {
        if current != Some(s.scenario_index) {
            current = Some(s.scenario_index);
            let _ = writeln!(out, "# scenario: {}", s.scenario_name);
        }
        let _ = writeln!(out, "{}\t{}", s.kind, s.pattern);
    }
    out
}

/// Reads the `keyword<TAB>pattern` lines of a `.steps` file.
pub fn parse_steps_file(text: &str) -> Result<Vec<(StepKind, String)>, TdssError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |message: String| TdssError::StepsSyntax { line: i + 1, message };
        let (kw, pattern) = line.split_once('\t').ok_or_else(|| bad("expected `keyword<TAB>pattern`".into()))?;
        let kind = match kw.trim() {
            "When" => StepKind::When,
            "Then" => StepKind::Then,
            other => return Err(bad(format!("unknown keyword `{other}`"))),
        };
        out.push((kind, pattern.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BindingEntry {
    pub line: usize,
    pub regex: Regex,
    pub action: Action,
    pub event: EventPattern,
}

/// Parses a `.bind` file: `pattern<TAB>trigger|receive<TAB>event` per line.
/// Blank lines and `#` comments are skipped.
pub fn parse_bindings(text: &str) -> Result<Vec<BindingEntry>, TdssError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let n = i + 1;
        let bad = |message: String| TdssError::Syntax { line: n, message };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let regex = Regex::new(fields[0]).map_err(|e| bad(e.to_string()))?;
        let action = match fields[1].trim() {
            "trigger" => Action::Trigger,
            "receive" => Action::Receive,
            other => return Err(bad(format!("unknown action `{other}`"))),
        };
        let event = parse_event_pattern(fields[2].trim()).map_err(|e| bad(e.to_string()))?;
        out.push(BindingEntry { line: n, regex, action, event });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BindOutcome {
    pub skeletons: Vec<StepSkeleton>,
    /// Line numbers of entries that matched no step.
    pub unmatched: Vec<usize>,
}

/// Attaches bindings to the skeletons whose step text they match. A step
/// matched by two entries is an error, as is an entry naming an event the
/// program does not declare, or a trigger that cannot be instantiated.
pub fn bind_steps(
    skeletons: &[StepSkeleton],
    entries: &[BindingEntry],
    program: &ScenarioProgram,
) -> Result<BindOutcome, TdssError> {
    for entry in entries {
        let checked = match entry.action {
            Action::Trigger => program.validate_event(&pattern_instance(&entry.event)).map(|_| ()),
            Action::Receive => program.validate_pattern(&entry.event),
        };
        checked.map_err(|source| TdssError::Event { line: entry.line, source })?;
    }
    let mut used = vec![false; entries.len()];
    let mut bound = Vec::with_capacity(skeletons.len());
    for skeleton in skeletons {
        let mut hit: Option<usize> = None;
        for (k, entry) in entries.iter().enumerate() {
            if !entry.regex.is_match(&skeleton.text) {
                continue;
            }
            if let Some(prev) = hit {
                return Err(TdssError::Ambiguous {
                    text: skeleton.text.clone(),
                    first: entries[prev].line,
                    second: entry.line,
                });
            }
            hit = Some(k);
        }
        let mut s = skeleton.clone();
        if let Some(k) = hit {
            let entry = &entries[k];
            if entry.action != Action::expected_for(s.kind) {
                return Err(TdssError::ActionMismatch {
                    line: entry.line,
                    action: entry.action,
                    kind: s.kind,
                    text: s.text,
                });
            }
            used[k] = true;
            s.binding = Some(Binding { action: entry.action, event: entry.event.clone() });
        }
        bound.push(s);
    }
    let unmatched = entries.iter().zip(&used).filter(|(_, &u)| !u).map(|(e, _)| e.line).collect();
    Ok(BindOutcome { skeletons: bound, unmatched })
}

fn pattern_instance(p: &EventPattern) -> EventInstance {
    EventInstance { sender: p.sender.clone(), owner: p.owner.clone(), name: p.name.clone(), args: p.args.clone() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    FailUnbound { step: usize, text: String },
    FailNotObserved { step: usize, text: String, expected: String },
    FailBudget { step: usize, text: String, expected: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::FailUnbound { .. } => "FAIL unbound",
            Verdict::FailNotObserved { .. } => "FAIL not observed",
            Verdict::FailBudget { .. } => "FAIL budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Engine trace as `Trace::to_tsv` lines.
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub scenarios: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestReport {
    pub feature_id: String,
    pub scenarios: Vec<ScenarioResult>,
    pub totals: Totals,
}

impl TestReport {
    pub fn all_passed(&self) -> bool {
        self.totals.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.scenarios {
            write!(f, "{:<20} {:<18} {}", self.feature_id, s.verdict.label(), s.name)?;
            match &s.verdict {
                Verdict::Pass => {}
                Verdict::FailUnbound { step, text } => write!(f, " (step {}: `{text}`)", step + 1)?,
                Verdict::FailNotObserved { step, expected, .. } | Verdict::FailBudget { step, expected, .. } => {
                    write!(f, " (step {}: expected {expected})", step + 1)?
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Runs every usage scenario of `spec` on a fresh engine state. `budget`
/// bounds the engine selections per scenario.
pub fn execute_test(
    spec: &FeatureSpec,
    skeletons: &[StepSkeleton],
    program: &ScenarioProgram,
    budget: usize,
    strategy: SelectionStrategy,
    seed: u64,
) -> Result<TestReport, TdssError> {
    if budget == 0 {
        return Err(EngineError::ZeroBudget.into());
    }
    let mut scenarios = Vec::with_capacity(spec.scenarios.len());
    for (si, scenario) in spec.scenarios.iter().enumerate() {
        let steps: Vec<&StepSkeleton> = skeletons.iter().filter(|s| s.scenario_index == si).collect();
        let mut state = ExecutionState::new(program, strategy, seed);
        let verdict = run_scenario(&mut state, &steps, budget)?;
        scenarios.push(ScenarioResult {
            name: scenario.name.clone(),
            verdict,
            trace: state.trace().to_tsv().lines().map(str::to_owned).collect(),
        });
    }
    let passed = scenarios.iter().filter(|s| s.verdict.is_pass()).count();
    let totals = Totals { scenarios: scenarios.len(), passed, failed: scenarios.len() - passed };
    Ok(TestReport { feature_id: spec.id.clone(), scenarios, totals })
}

fn run_scenario(state: &mut ExecutionState<'_>, steps: &[&StepSkeleton], budget: usize) -> Result<Verdict, TdssError> {
    let mut used = 0;
    for s in steps {
        let Some(binding) = &s.binding else {
            return Ok(Verdict::FailUnbound { step: s.step_index, text: s.text.clone() });
        };
        match binding.action {
            Action::Trigger => state.inject(&pattern_instance(&binding.event))?,
            Action::Receive => loop {
                let expected = || binding.event.to_string();
                if state.is_quiescent() {
                    return Ok(Verdict::FailNotObserved {
                        step: s.step_index,
                        text: s.text.clone(),
                        expected: expected(),
                    });
                }
                if used == budget {
                    return Ok(Verdict::FailBudget { step: s.step_index, text: s.text.clone(), expected: expected() });
                }
                used += 1;
                if let StepResult::Selected(e) = state.step() {
                    if binding.event.matches(&e) {
                        break;
                    }
                }
            },
        }
    }
    Ok(Verdict::Pass)
}
