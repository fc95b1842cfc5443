//! Release planning for systems of systems.
//!
//! The pipeline runs from natural-language feature files to a Pareto front of
//! release candidates:
//!
//! 1. [`feature_model`] parses feature files with stakeholder-tagged usage
//!    scenarios.
//! 2. [`scenario_engine`] parses and executes scenario specifications, and
//!    [`tdss`] tests them against the usage scenarios.
//! 3. [`estimation`] derives per-stakeholder values and per-feature costs.
//! 4. [`monrp`] searches for value/cost trade-offs, exactly for small
//!    instances and with a non-dominated sorting genetic algorithm otherwise.
//!
//! [`cli`] wires the steps together over a project directory.

pub mod cli;
pub mod estimation;
pub mod feature_model;
pub mod monrp;
pub mod scenario_engine;
pub mod tdss;
