use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemKind {
    ConstituentSystem,
    ExternalStakeholder,
    Subsystem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDef {
    pub id: String,
    pub kind: SystemKind,
    pub parent: Option<String>,
}

impl SystemDef {
    pub fn constituent(id: impl Into<String>) -> Self {
        Self { id: id.into(), kind: SystemKind::ConstituentSystem, parent: None }
    }

    pub fn stakeholder(id: impl Into<String>) -> Self {
        Self { id: id.into(), kind: SystemKind::ExternalStakeholder, parent: None }
    }

    pub fn subsystem(id: impl Into<String>, parent: impl Into<String>) -> Self {
        Self { id: id.into(), kind: SystemKind::Subsystem, parent: Some(parent.into()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamType {
    String,
    Int,
    Bool,
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamType::String => "string",
            ParamType::Int => "int",
            ParamType::Bool => "bool",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Str(String),
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn param_type(&self) -> ParamType {
        match self {
            Value::Str(_) => ParamType::String,
            Value::Int(_) => ParamType::Int,
            Value::Bool(_) => ParamType::Bool,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventDecl {
    pub owner: String,
    pub name: String,
    pub params: Vec<(String, ParamType)>,
}

impl EventDecl {
    pub fn new(owner: impl Into<String>, name: impl Into<String>) -> Self {
        Self { owner: owner.into(), name: name.into(), params: Vec::new() }
    }

    pub fn with_param(mut self, name: impl Into<String>, ty: ParamType) -> Self {
        self.params.push((name.into(), ty));
        self
    }
}

/// A concrete event; `args` are in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventInstance {
    pub sender: Option<String>,
    pub owner: String,
    pub name: String,
    pub args: Vec<(String, Value)>,
}

impl EventInstance {
    pub fn new(owner: impl Into<String>, name: impl Into<String>) -> Self {
        Self { sender: None, owner: owner.into(), name: name.into(), args: Vec::new() }
    }

    pub fn from(mut self, sender: impl Into<String>) -> Self {
        self.sender = Some(sender.into());
        self
    }

    pub fn arg(mut self, name: impl Into<String>, value: Value) -> Self {
        self.args.push((name.into(), value));
        self
    }

    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.owner, self.name)
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[(String, Value)]) -> fmt::Result {
    f.write_str("(")?;
    for (i, (k, v)) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{k}={v}")?;
    }
    f.write_str(")")
}

impl fmt::Display for EventInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.sender {
            write!(f, "{s} -> ")?;
        }
        write!(f, "{}.{}", self.owner, self.name)?;
        write_args(f, &self.args)
    }
}

/// Structural match on (sender, owner, name). An absent sender matches any
/// sender; listed args must match literally, unlisted args are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventPattern {
    pub sender: Option<String>,
    pub owner: String,
    pub name: String,
    pub args: Vec<(String, Value)>,
}

impl EventPattern {
    pub fn new(owner: impl Into<String>, name: impl Into<String>) -> Self {
        Self { sender: None, owner: owner.into(), name: name.into(), args: Vec::new() }
    }

    pub fn from(mut self, sender: impl Into<String>) -> Self {
        self.sender = Some(sender.into());
        self
    }

    pub fn arg(mut self, name: impl Into<String>, value: Value) -> Self {
        self.args.push((name.into(), value));
        self
    }

    pub fn matches(&self, event: &EventInstance) -> bool {
        self.owner == event.owner
            && self.name == event.name
            && self.sender.as_ref().is_none_or(|s| event.sender.as_ref() == Some(s))
            && self.args.iter().all(|(k, v)| event.args.iter().any(|(ek, ev)| ek == k && ev == v))
    }

    /// The instance this pattern denotes when used as a request: sender as
    /// given and args reordered to follow the declaration.
    pub fn instantiate(&self, decl: &EventDecl) -> Result<EventInstance, ProgramError> {
        let instance = EventInstance {
            sender: self.sender.clone(),
            owner: self.owner.clone(),
            name: self.name.clone(),
            args: self.args.clone(),
        };
        check_args(decl, &instance.args, true)?;
        Ok(normalize(decl, instance))
    }
}

impl fmt::Display for EventPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.sender {
            write!(f, "{s} -> ")?;
        }
        write!(f, "{}.{}", self.owner, self.name)?;
        write_args(f, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BodyStep {
    Request(EventPattern),
    Receive(EventPattern),
}

impl BodyStep {
    pub fn pattern(&self) -> &EventPattern {
        match self {
            BodyStep::Request(p) | BodyStep::Receive(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRule {
    pub id: String,
    pub trigger: EventPattern,
    pub body: Vec<BodyStep>,
    /// Requested instances, one per body position (`None` for receives).
    #[serde(skip)]
    pub(crate) requests: Vec<Option<EventInstance>>,
}

impl ScenarioRule {
    pub fn new(id: impl Into<String>, trigger: EventPattern, body: Vec<BodyStep>) -> Self {
        Self { id: id.into(), trigger, body, requests: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Level {
    #[default]
    SoS,
    CSInternal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("duplicate system `{0}`")]
    DuplicateSystem(String),
    #[error("subsystem `{0}` has unknown parent `{1}`")]
    UnknownParent(String, String),
    #[error("subsystem `{0}` must belong to a constituent system, `{1}` is not one")]
    ParentNotConstituent(String, String),
    #[error("system `{0}` has a parent but is not a subsystem")]
    UnexpectedParent(String),
    #[error("undeclared system `{0}`")]
    UndeclaredSystem(String),
    #[error("duplicate event `{0}.{1}`")]
    DuplicateEvent(String, String),
    #[error("duplicate parameter `{2}` in event `{0}.{1}`")]
    DuplicateParam(String, String, String),
    #[error("undeclared event `{0}.{1}`")]
    UndeclaredEvent(String, String),
    #[error("event `{0}.{1}` has no parameter `{2}`")]
    UnknownArg(String, String, String),
    #[error("argument `{2}` of `{0}.{1}` given twice")]
    DuplicateArg(String, String, String),
    #[error("argument `{2}` of `{0}.{1}` expects {3}, got {4}")]
    ArgType(String, String, String, ParamType, ParamType),
    #[error("event `{0}.{1}` expects {2} argument(s), got {3}")]
    Arity(String, String, usize, usize),
    #[error("duplicate scenario `{0}`")]
    DuplicateRule(String),
    #[error("scenario `{0}` has an empty body")]
    EmptyBody(String),
    #[error("no scenario rules")]
    NoRules,
}

fn check_args(decl: &EventDecl, args: &[(String, Value)], complete: bool) -> Result<(), ProgramError> {
    let e = |f: fn(String, String, String) -> ProgramError, k: &str| {
        f(decl.owner.clone(), decl.name.clone(), k.to_string())
    };
    let mut seen = BTreeSet::new();
    for (k, v) in args {
        if !seen.insert(k.as_str()) {
            return Err(e(ProgramError::DuplicateArg, k));
        }
        let Some((_, ty)) = decl.params.iter().find(|(p, _)| p == k) else {
            return Err(e(ProgramError::UnknownArg, k));
        };
        if v.param_type() != *ty {
            return Err(ProgramError::ArgType(decl.owner.clone(), decl.name.clone(), k.clone(), *ty, v.param_type()));
        }
    }
    if complete && args.len() != decl.params.len() {
        return Err(ProgramError::Arity(decl.owner.clone(), decl.name.clone(), decl.params.len(), args.len()));
    }
    Ok(())
}

fn normalize(decl: &EventDecl, mut event: EventInstance) -> EventInstance {
    event.args.sort_by_key(|(k, _)| decl.params.iter().position(|(p, _)| p == k));
    event
}

/// A validated scenario specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioProgram {
    systems: Vec<SystemDef>,
    events: Vec<EventDecl>,
    rules: Vec<ScenarioRule>,
    level: Level,
}

impl ScenarioProgram {
    pub fn new(
        systems: Vec<SystemDef>,
        events: Vec<EventDecl>,
        rules: Vec<ScenarioRule>,
        level: Level,
    ) -> Result<Self, ProgramError> {
        let mut b = ProgramBuilder::new(level);
        for s in systems {
            b.add_system(s)?;
        }
        for e in events {
            b.add_event(e)?;
        }
        for r in rules {
            b.add_rule(r)?;
        }
        b.build()
    }

    pub fn systems(&self) -> &[SystemDef] {
        &self.systems
    }

    pub fn events(&self) -> &[EventDecl] {
        &self.events
    }

    pub fn rules(&self) -> &[ScenarioRule] {
        &self.rules
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn system(&self, id: &str) -> Option<&SystemDef> {
        self.systems.iter().find(|s| s.id == id)
    }

    pub fn event(&self, owner: &str, name: &str) -> Option<&EventDecl> {
        self.events.iter().find(|e| e.owner == owner && e.name == name)
    }

    pub fn count_kind(&self, kind: SystemKind) -> usize {
        self.systems.iter().filter(|s| s.kind == kind).count()
    }

    pub fn total_body_steps(&self) -> usize {
        self.rules.iter().map(|r| r.body.len()).sum()
    }

    /// Checks an event against its declaration and returns it with args in
    /// declaration order.
    pub fn validate_event(&self, event: &EventInstance) -> Result<EventInstance, ProgramError> {
        let decl = self
            .event(&event.owner, &event.name)
            .ok_or_else(|| ProgramError::UndeclaredEvent(event.owner.clone(), event.name.clone()))?;
        if let Some(s) = &event.sender {
            if self.system(s).is_none() {
                return Err(ProgramError::UndeclaredSystem(s.clone()));
            }
        }
        check_args(decl, &event.args, true)?;
        Ok(normalize(decl, event.clone()))
    }

    /// Checks a (possibly partial) pattern against the declarations.
    pub fn validate_pattern(&self, pattern: &EventPattern) -> Result<(), ProgramError> {
        let decl = self
            .event(&pattern.owner, &pattern.name)
            .ok_or_else(|| ProgramError::UndeclaredEvent(pattern.owner.clone(), pattern.name.clone()))?;
        if let Some(s) = &pattern.sender {
            if self.system(s).is_none() {
                return Err(ProgramError::UndeclaredSystem(s.clone()));
            }
        }
        check_args(decl, &pattern.args, false)
    }

    pub(crate) fn request_at(&self, rule: usize, pc: usize) -> Option<&EventInstance> {
        self.rules[rule].requests[pc].as_ref()
    }
}

/// Incremental construction with per-item validation, so the parser can
/// attach source positions to semantic errors.
#[derive(Debug)]
pub struct ProgramBuilder {
    program: ScenarioProgram,
    pending_parents: BTreeMap<String, String>,
}

impl ProgramBuilder {
    pub fn new(level: Level) -> Self {
        Self {
            program: ScenarioProgram { systems: Vec::new(), events: Vec::new(), rules: Vec::new(), level },
            pending_parents: BTreeMap::new(),
        }
    }

    pub fn set_level(&mut self, level: Level) {
        self.program.level = level;
    }

    pub fn add_system(&mut self, system: SystemDef) -> Result<(), ProgramError> {
        if self.program.system(&system.id).is_some() {
            return Err(ProgramError::DuplicateSystem(system.id));
        }
        match (&system.kind, &system.parent) {
            (SystemKind::Subsystem, Some(p)) => {
                self.pending_parents.insert(system.id.clone(), p.clone());
            }
            (SystemKind::Subsystem, None) => return Err(ProgramError::UnknownParent(system.id, String::new())),
            (_, Some(_)) => return Err(ProgramError::UnexpectedParent(system.id)),
            (_, None) => {}
        }
        self.program.systems.push(system);
        Ok(())
    }

    /// Resolves subsystem parents; call after all systems are added.
    pub fn check_parents(&mut self) -> Result<(), ProgramError> {
        for (child, parent) in std::mem::take(&mut self.pending_parents) {
            match self.program.system(&parent) {
                None => return Err(ProgramError::UnknownParent(child, parent)),
                Some(p) if p.kind != SystemKind::ConstituentSystem => {
                    return Err(ProgramError::ParentNotConstituent(child, parent))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    pub fn add_event(&mut self, event: EventDecl) -> Result<(), ProgramError> {
        if self.program.system(&event.owner).is_none() {
            return Err(ProgramError::UndeclaredSystem(event.owner));
        }
        if self.program.event(&event.owner, &event.name).is_some() {
            return Err(ProgramError::DuplicateEvent(event.owner, event.name));
        }
        let mut names = BTreeSet::new();
        for (p, _) in &event.params {
            if !names.insert(p.as_str()) {
                return Err(ProgramError::DuplicateParam(event.owner.clone(), event.name.clone(), p.clone()));
            }
        }
        self.program.events.push(event);
        Ok(())
    }

    pub fn add_rule(&mut self, mut rule: ScenarioRule) -> Result<(), ProgramError> {
        if self.program.rules.iter().any(|r| r.id == rule.id) {
            return Err(ProgramError::DuplicateRule(rule.id));
        }
        if rule.body.is_empty() {
            return Err(ProgramError::EmptyBody(rule.id));
        }
        self.program.validate_pattern(&rule.trigger)?;
        let mut requests = Vec::with_capacity(rule.body.len());
        for step in &rule.body {
            let p = step.pattern();
            self.program.validate_pattern(p)?;
            requests.push(match step {
                BodyStep::Request(p) => {
                    let decl = self.program.event(&p.owner, &p.name).expect("validated above");
                    Some(p.instantiate(decl)?)
                }
                BodyStep::Receive(_) => None,
            });
        }
        rule.requests = requests;
        self.program.rules.push(rule);
        Ok(())
    }

    pub fn build(mut self) -> Result<ScenarioProgram, ProgramError> {
        self.check_parents()?;
        if self.program.rules.is_empty() {
            return Err(ProgramError::NoRules);
        }
        Ok(self.program)
    }
}
