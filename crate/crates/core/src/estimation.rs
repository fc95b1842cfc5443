//! Value and cost estimates derived from the specification artifacts.
//!
//! `value(f, s) = value_unit × (usage scenarios of f tagged with s)` and
//! `cost(f) = alpha × constituent systems + beta × rule body steps + gamma ×
//! subsystems` of the feature's scenario program. Stakeholder systems are not
//! counted. Any entry can be overridden by hand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feature_model::{FeatureSpec, Stakeholder};
use crate::monrp::{InstanceError, MonrpInstance};
use crate::scenario_engine::{ScenarioProgram, SystemKind};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Feature id to cost.
    pub cost: BTreeMap<String, f64>,
    /// Feature id to stakeholder id to value.
    pub value: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub value_unit: f64,
    pub overrides: Overrides,
}

impl Default for EstimationParams {
    fn default() -> Self {
        Self { alpha: 5.0, beta: 1.0, gamma: 3.0, value_unit: 1.0, overrides: Overrides::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("{0} must be finite and non-negative, got {1}")]
    Negative(String, f64),
    #[error("value_unit must be positive, got {0}")]
    ValueUnit(f64),
    #[error("override names unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("override for `{0}` names unknown stakeholder `{1}`")]
    UnknownStakeholder(String, String),
    #[error("feature `{0}` has neither a scenario program nor a cost override")]
    MissingProgram(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn non_negative(what: impl FnOnce() -> String, v: f64) -> Result<(), EstimationError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(EstimationError::Negative(what(), v))
    }
}

impl EstimationParams {
    pub fn validate(&self) -> Result<(), EstimationError> {
        non_negative(|| "alpha".into(), self.alpha)?;
        non_negative(|| "beta".into(), self.beta)?;
        non_negative(|| "gamma".into(), self.gamma)?;
        if !(self.value_unit.is_finite() && self.value_unit > 0.0) {
            return Err(EstimationError::ValueUnit(self.value_unit));
        }
        for (f, &c) in &self.overrides.cost {
            non_negative(|| format!("cost override for {f}"), c)?;
        }
        for (f, row) in &self.overrides.value {
            for (s, &v) in row {
                non_negative(|| format!("value override ({f}, {s})"), v)?;
            }
        }
        Ok(())
    }
}

/// `m × n` matrix, rows in stakeholder order, columns in feature order.
pub fn derive_value_matrix(
    features: &[FeatureSpec],
    stakeholders: &[Stakeholder],
    params: &EstimationParams,
) -> Result<Vec<Vec<f64>>, EstimationError> {
    params.validate()?;
    for (f, row) in &params.overrides.value {
        if !features.iter().any(|spec| &spec.id == f) {
            return Err(EstimationError::UnknownFeature(f.clone()));
        }
        if let Some(s) = row.keys().find(|s| !stakeholders.iter().any(|sh| &sh.id == *s)) {
            return Err(EstimationError::UnknownStakeholder(f.clone(), s.clone()));
        }
    }
    let matrix = stakeholders
        .iter()
        .map(|s| {
            features
                .iter()
                .map(|f| {
                    if let Some(&v) = params.overrides.value.get(&f.id).and_then(|row| row.get(&s.id)) {
                        return v;
                    }
                    let tagged = f.scenarios.iter().filter(|sc| sc.stakeholder_tags.contains(&s.id)).count();
                    params.value_unit * tagged as f64
                })
                .collect()
        })
        .collect();
    Ok(matrix)
}

/// Cost of one program under the linear model.
pub fn program_cost(program: &ScenarioProgram, params: &EstimationParams) -> f64 {
    params.alpha * program.count_kind(SystemKind::ConstituentSystem) as f64
        + params.beta * program.total_body_steps() as f64
        + params.gamma * program.count_kind(SystemKind::Subsystem) as f64
}

/// Cost per feature; `programs` is keyed by feature id.
pub fn derive_cost_vector(
    features: &[FeatureSpec],
    programs: &BTreeMap<String, ScenarioProgram>,
    params: &EstimationParams,
) -> Result<Vec<f64>, EstimationError> {
    params.validate()?;
    if let Some(f) = params.overrides.cost.keys().find(|f| !features.iter().any(|spec| &spec.id == *f)) {
        return Err(EstimationError::UnknownFeature(f.clone()));
    }
    features
        .iter()
        .map(|f| match (params.overrides.cost.get(&f.id), programs.get(&f.id)) {
            (Some(&c), _) => Ok(c),
            (None, Some(p)) => Ok(program_cost(p, params)),
            (None, None) => Err(EstimationError::MissingProgram(f.id.clone())),
        })
        .collect()
}

/// Assembles the instance in declaration order of stakeholders and features.
pub fn build_instance(
    stakeholders: &[Stakeholder],
    features: &[FeatureSpec],
    value: Vec<Vec<f64>>,
    cost: Vec<f64>,
) -> Result<MonrpInstance, EstimationError> {
    Ok(MonrpInstance::new(
        stakeholders.iter().map(|s| s.id.clone()).collect(),
        stakeholders.iter().map(|s| s.weight).collect(),
        features.iter().map(|f| f.id.clone()).collect(),
        value,
        cost,
    )?)
}
