//! Multi-objective next release problem.
//!
//! Each feature `i` has a weighted score `Σ_j w_j · value(f_i, s_j)` and a cost.
//! A release is a decision vector `x`; its value `f1 = Σ score_i · x_i` is
//! maximized and its cost `f2 = Σ cost_i · x_i` minimized. Fronts come from an
//! exhaustive oracle (small `n`) or from [`nsga2_search`].

mod front;
mod instance;
mod nsga2;

pub use front::{
    brute_force_front, dominates, hypervolume, hypervolume_of, read_front_csv, ParetoFront, Provenance,
    ReleaseCandidate, SolverError, MAX_EXACT_FEATURES,
};
pub use instance::{evaluate, random_instance, InstanceError, MonrpInstance, Selection};
pub use nsga2::{nsga2_search, SearchParams};
