//! Feature files: a strict Gherkin subset.
//!
//! A feature file holds one `Feature:` with free-text description followed by
//! usage scenarios made of `When`/`Then`/`And` steps. Scenarios are linked to
//! stakeholders with `@stakeholder:<id>` tag lines; the feature id defaults to
//! a slug of the title and can be pinned with an `@id:<slug>` tag above the
//! `Feature:` line.
//!
//! ```text
//! @id:umc
//! Feature: User-managed charging
//!   Optional description.
//!
//!   @stakeholder:evu
//!   Scenario: The EVU user enters charging preferences
//!     When the EVU user enters charging preferences
//!     Then the smartphone app calculates an optimized charging plan
//!     And the smartphone app sends the charging plan to the electric vehicle
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the stakeholder weight simplex constraint.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepKeyword {
    When,
    Then,
    And,
}

/// Keyword of a step after `And` has been resolved to its predecessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepKind {
    When,
    Then,
}

impl fmt::Display for StepKeyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKeyword::When => "When",
            StepKeyword::Then => "Then",
            StepKeyword::And => "And",
        })
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::When => "When",
            StepKind::Then => "Then",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageStep {
    pub keyword: StepKeyword,
    pub text: String,
    pub resolved: StepKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageScenario {
    pub name: String,
    pub steps: Vec<UsageStep>,
    pub stakeholder_tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub id: String,
    pub title: String,
    pub description: String,
    pub scenarios: Vec<UsageScenario>,
    pub source_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    #[serde(default, rename = "name")]
    pub display_name: String,
    pub weight: f64,
}

impl Stakeholder {
    pub fn new(id: impl Into<String>, display_name: impl Into<String>, weight: f64) -> Self {
        Self { id: id.into(), display_name: display_name.into(), weight }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureErrorKind {
    MissingFeatureHeader,
    DuplicateFeatureHeader,
    StepOutsideScenario,
    AndAsFirstStep,
    FirstStepNotWhen(StepKeyword),
    UnsupportedKeyword(String),
    UnknownKeyword(String),
    EmptyStepText,
    EmptyTitle,
    EmptyScenarioName,
    EmptyScenario(String),
    NoScenarios,
    BadTag(String),
    MisplacedTag(String),
    DanglingTags,
    EmptyId,
}

impl fmt::Display for FeatureErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FeatureErrorKind::*;
        match self {
            MissingFeatureHeader => write!(f, "no Feature header"),
            DuplicateFeatureHeader => write!(f, "more than one Feature header"),
            StepOutsideScenario => write!(f, "step outside scenario"),
            AndAsFirstStep => write!(f, "And cannot be the first step of a scenario"),
            FirstStepNotWhen(k) => write!(f, "first step must be When, found {k}"),
            UnsupportedKeyword(k) => write!(f, "unsupported keyword `{k}` (only When/Then/And)"),
            UnknownKeyword(k) => write!(f, "unknown keyword `{k}`"),
            EmptyStepText => write!(f, "step without text"),
            EmptyTitle => write!(f, "feature title is empty"),
            EmptyScenarioName => write!(f, "scenario name is empty"),
            EmptyScenario(name) => write!(f, "scenario `{name}` has no steps"),
            NoScenarios => write!(f, "feature has no scenarios"),
            BadTag(t) => write!(f, "malformed tag `{t}`"),
            MisplacedTag(t) => write!(f, "tag `{t}` is not allowed here"),
            DanglingTags => write!(f, "tags not followed by a Scenario"),
            EmptyId => write!(f, "cannot derive a feature id from the title"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}, line {line}")]
pub struct FeatureParseError {
    pub line: usize,
    pub kind: FeatureErrorKind,
}

fn err(line: usize, kind: FeatureErrorKind) -> FeatureParseError {
    FeatureParseError { line, kind }
}

/// Lower-case ASCII slug: runs of non-alphanumerics collapse to `-`.
pub fn slugify(title: &str) -> String {
    let mut slug = String::with_capacity(title.len());
    let mut dash = false;
    for c in title.chars() {
        if c.is_ascii_alphanumeric() {
            if dash && !slug.is_empty() {
                slug.push('-');
            }
            dash = false;
            slug.push(c.to_ascii_lowercase());
        } else {
            dash = true;
        }
    }
    slug
}

enum Tag {
    Id(String),
    Stakeholder(String),
}

fn parse_tags(line: &str, lineno: usize) -> Result<Vec<Tag>, FeatureParseError> {
    line.split_whitespace()
        .map(|tok| {
            let body = tok.strip_prefix('@').ok_or_else(|| err(lineno, FeatureErrorKind::BadTag(tok.to_string())))?;
            match body.split_once(':') {
                Some(("id", v)) if !v.is_empty() => Ok(Tag::Id(v.to_string())),
                Some(("stakeholder", v)) if !v.is_empty() => Ok(Tag::Stakeholder(v.to_string())),
                _ => Err(err(lineno, FeatureErrorKind::BadTag(tok.to_string()))),
            }
        })
        .collect()
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    }
}

fn step_keyword(word: &str) -> Option<StepKeyword> {
    match word {
        "When" => Some(StepKeyword::When),
        "Then" => Some(StepKeyword::Then),
        "And" => Some(StepKeyword::And),
        _ => None,
    }
}

fn is_step_like(word: &str) -> bool {
    step_keyword(word).is_some() || matches!(word, "Given" | "But" | "*")
}

/// Parses one feature file. `source_path` is left empty; use
/// [`parse_feature_file_at`] to record where the text came from.
pub fn parse_feature_file(text: &str) -> Result<FeatureSpec, FeatureParseError> {
    parse_feature_file_at(text, "")
}

pub fn parse_feature_file_at(text: &str, source_path: &str) -> Result<FeatureSpec, FeatureParseError> {
    let mut explicit_id: Option<String> = None;
    let mut title: Option<String> = None;
    let mut description: Vec<String> = Vec::new();
    let mut scenarios: Vec<UsageScenario> = Vec::new();
    let mut pending_tags: BTreeSet<String> = BTreeSet::new();
    let mut pending_tag_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }

        if line.starts_with('@') {
            for tag in parse_tags(line, lineno)? {
                match tag {
                    Tag::Id(v) if title.is_none() => explicit_id = Some(v),
                    Tag::Id(v) => return Err(err(lineno, FeatureErrorKind::MisplacedTag(format!("@id:{v}")))),
                    Tag::Stakeholder(v) if title.is_some() => {
                        pending_tags.insert(v);
                        pending_tag_line = lineno;
                    }
                    Tag::Stakeholder(v) => {
                        return Err(err(lineno, FeatureErrorKind::MisplacedTag(format!("@stakeholder:{v}"))))
                    }
                }
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("Feature:") {
            if title.is_some() {
                return Err(err(lineno, FeatureErrorKind::DuplicateFeatureHeader));
            }
            let t = rest.trim();
            if t.is_empty() {
                return Err(err(lineno, FeatureErrorKind::EmptyTitle));
            }
            title = Some(t.to_string());
            continue;
        }

        if title.is_none() {
            return Err(err(lineno, FeatureErrorKind::MissingFeatureHeader));
        }

        if let Some(rest) = line.strip_prefix("Scenario:") {
            if let Some(prev) = scenarios.last() {
                if prev.steps.is_empty() {
                    return Err(err(lineno, FeatureErrorKind::EmptyScenario(prev.name.clone())));
                }
            }
            let name = rest.trim();
            if name.is_empty() {
                return Err(err(lineno, FeatureErrorKind::EmptyScenarioName));
            }
            scenarios.push(UsageScenario {
                name: name.to_string(),
                steps: Vec::new(),
                stakeholder_tags: std::mem::take(&mut pending_tags),
            });
            continue;
        }

        let (word, rest) = split_keyword(line);
        let Some(scenario) = scenarios.last_mut() else {
            if is_step_like(word) {
                return Err(err(lineno, FeatureErrorKind::StepOutsideScenario));
            }
            if !pending_tags.is_empty() {
                return Err(err(pending_tag_line, FeatureErrorKind::DanglingTags));
            }
            description.extend(line.split_whitespace().map(str::to_string));
            continue;
        };
        if !pending_tags.is_empty() {
            return Err(err(pending_tag_line, FeatureErrorKind::DanglingTags));
        }
        let keyword = match step_keyword(word) {
            Some(k) => k,
            None if matches!(word, "Given" | "But" | "*") => {
                return Err(err(lineno, FeatureErrorKind::UnsupportedKeyword(word.to_string())))
            }
            None => return Err(err(lineno, FeatureErrorKind::UnknownKeyword(word.to_string()))),
        };
        if rest.is_empty() {
            return Err(err(lineno, FeatureErrorKind::EmptyStepText));
        }
        let resolved = match (keyword, scenario.steps.last()) {
            (StepKeyword::When, _) => StepKind::When,
            (StepKeyword::Then, None) => return Err(err(lineno, FeatureErrorKind::FirstStepNotWhen(keyword))),
            (StepKeyword::Then, Some(_)) => StepKind::Then,
            (StepKeyword::And, None) => return Err(err(lineno, FeatureErrorKind::AndAsFirstStep)),
            (StepKeyword::And, Some(prev)) => prev.resolved,
        };
        scenario.steps.push(UsageStep { keyword, text: rest.to_string(), resolved });
    }

    let Some(title) = title else {
        return Err(err(last_line.max(1), FeatureErrorKind::MissingFeatureHeader));
    };
    if !pending_tags.is_empty() {
        return Err(err(pending_tag_line, FeatureErrorKind::DanglingTags));
    }
    match scenarios.last() {
        None => return Err(err(last_line, FeatureErrorKind::NoScenarios)),
        Some(s) if s.steps.is_empty() => return Err(err(last_line, FeatureErrorKind::EmptyScenario(s.name.clone()))),
        Some(_) => {}
    }
    let id = explicit_id.unwrap_or_else(|| slugify(&title));
    if id.is_empty() {
        return Err(err(1, FeatureErrorKind::EmptyId));
    }

    Ok(FeatureSpec { id, title, description: description.join(" "), scenarios, source_path: source_path.to_string() })
}

impl FeatureSpec {
    pub fn step_count(&self) -> usize {
        self.scenarios.iter().map(|s| s.steps.len()).sum()
    }

    /// Canonical text form; parsing it again yields an equal spec (modulo
    /// `source_path`).
    pub fn to_canonical_text(&self) -> String {
        let mut out = format!("@id:{}\nFeature: {}\n", self.id, self.title);
        if !self.description.is_empty() {
            out.push_str(&format!("  {}\n", self.description));
        }
        for scenario in &self.scenarios {
            out.push('\n');
            if !scenario.stakeholder_tags.is_empty() {
                let tags: Vec<String> = scenario.stakeholder_tags.iter().map(|t| format!("@stakeholder:{t}")).collect();
                out.push_str(&format!("  {}\n", tags.join(" ")));
            }
            out.push_str(&format!("  Scenario: {}\n", scenario.name));
            for step in &scenario.steps {
                out.push_str(&format!("    {} {}\n", step.keyword, step.text));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn error(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, subject, message);
    }

    pub fn warning(&mut self, subject: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Warning, subject, message);
    }

    fn push(&mut self, severity: Severity, subject: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { severity, subject: subject.into(), message: message.into() });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.issues.extend(other.issues);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            let level = match issue.severity {
                Severity::Warning => "warning",
                Severity::Error => "error",
            };
            writeln!(f, "{level}: {}: {}", issue.subject, issue.message)?;
        }
        Ok(())
    }
}

/// Checks stakeholder weights: each in `[0, 1]`, ids unique, sum 1 within
/// [`WEIGHT_SUM_TOLERANCE`].
pub fn validate_stakeholders(stakeholders: &[Stakeholder]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = BTreeSet::new();
    for s in stakeholders {
        if !seen.insert(s.id.as_str()) {
            report.error(&s.id, "duplicate stakeholder id");
        }
        if !(s.weight.is_finite() && (0.0..=1.0).contains(&s.weight)) {
            report.error(&s.id, format!("weight {} outside [0, 1]", s.weight));
        }
    }
    if stakeholders.is_empty() {
        report.error("stakeholders", "no stakeholders defined");
    } else {
        let sum: f64 = stakeholders.iter().map(|s| s.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            report.error("stakeholders", format!("weights sum {sum} ≠ 1"));
        }
    }
    report
}

pub fn validate_project_features(specs: &[FeatureSpec], stakeholders: &[Stakeholder]) -> ValidationReport {
    let mut report = validate_stakeholders(stakeholders);
    let known: BTreeSet<&str> = stakeholders.iter().map(|s| s.id.as_str()).collect();

    let mut by_id: BTreeMap<&str, usize> = BTreeMap::new();
    for spec in specs {
        *by_id.entry(spec.id.as_str()).or_default() += 1;
    }
    for (id, count) in by_id {
        if count > 1 {
            report.error(id, format!("duplicate feature id ({count} files)"));
        }
    }

    for spec in specs {
        for scenario in &spec.scenarios {
            let subject = format!("{} / {}", spec.id, scenario.name);
            if scenario.stakeholder_tags.is_empty() {
                report.warning(&subject, "scenario has no stakeholder tags and contributes no value");
            }
            for tag in &scenario.stakeholder_tags {
                if !known.contains(tag.as_str()) {
                    report.error(&subject, format!("unknown stakeholder `{tag}`"));
                }
            }
        }
    }
    report
}
