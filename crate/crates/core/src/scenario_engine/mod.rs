//! Scenario specifications: systems, events and event-coupled scenario rules,
//! plus an engine that interleaves them.

mod exec;
mod model;
mod parse;

pub use exec::{
    run_to_quiescence, Activation, EngineError, ExecutionState, RunReport, SelectionStrategy, StepResult, Trace,
    TraceEntry,
};
pub use model::{
    BodyStep, EventDecl, EventInstance, EventPattern, Level, ParamType, ProgramBuilder, ProgramError, ScenarioProgram,
    ScenarioRule, SystemDef, SystemKind, Value,
};
pub use parse::{parse_event_pattern, parse_scenario_spec, ScenarioParseError};
