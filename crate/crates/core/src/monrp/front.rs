use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::instance::{evaluate_unchecked, InstanceError, MonrpInstance, Selection};
use super::nsga2::SearchParams;

/// Largest feature count the exhaustive oracle accepts.
pub const MAX_EXACT_FEATURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("exact search supports at most {MAX_EXACT_FEATURES} features, instance has {0}")]
    TooLarge(usize),
    #[error("front is empty")]
    EmptyFront,
    #[error("invalid search parameters: {0}")]
    Params(String),
    #[error("front csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReleaseCandidate {
    pub selection: Selection,
    /// f1, maximized.
    pub value_total: f64,
    /// f2, minimized.
    pub cost_total: f64,
}

impl ReleaseCandidate {
    pub fn evaluate(inst: &MonrpInstance, selection: Selection) -> Result<Self, InstanceError> {
        let (value_total, cost_total) = super::instance::evaluate(inst, &selection)?;
        Ok(Self { selection, value_total, cost_total })
    }

    pub(crate) fn from_bits(inst: &MonrpInstance, bits: Vec<bool>) -> Self {
        let (value_total, cost_total) = evaluate_unchecked(inst, &bits);
        Self { selection: Selection(bits), value_total, cost_total }
    }

    /// Objectives in bi-minimization form `(-f1, f2)`.
    pub fn minimization_point(&self) -> [f64; 2] {
        [-self.value_total, self.cost_total]
    }
}

/// Pareto dominance between minimization points.
pub(crate) fn dominates_min(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// `a` dominates `b`: at least as much value at no more cost, strictly better
/// in one of the two.
pub fn dominates(a: &ReleaseCandidate, b: &ReleaseCandidate) -> bool {
    dominates_min(&a.minimization_point(), &b.minimization_point())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Exact,
    Metaheuristic,
}

fn front_order(a: &ReleaseCandidate, b: &ReleaseCandidate) -> Ordering {
    a.cost_total
        .total_cmp(&b.cost_total)
        .then(b.value_total.total_cmp(&a.value_total))
        .then_with(|| a.selection.cmp(&b.selection))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoFront {
    candidates: Vec<ReleaseCandidate>,
    provenance: Provenance,
    params: Option<SearchParams>,
}

impl ParetoFront {
    /// Keeps the non-dominated candidates, drops repeated decision vectors and
    /// sorts by ascending cost, descending value, then decision vector.
    pub fn new(candidates: Vec<ReleaseCandidate>, provenance: Provenance, params: Option<SearchParams>) -> Self {
        let mut kept: Vec<ReleaseCandidate> =
            candidates.iter().filter(|c| !candidates.iter().any(|o| dominates(o, c))).cloned().collect();
        kept.sort_by(front_order);
        kept.dedup_by(|a, b| a.selection == b.selection);
        Self { candidates: kept, provenance, params }
    }

    /// For input already known to be mutually non-dominated.
    fn from_nondominated(mut candidates: Vec<ReleaseCandidate>, provenance: Provenance) -> Self {
        candidates.sort_by(front_order);
        candidates.dedup_by(|a, b| a.selection == b.selection);
        Self { candidates, provenance, params: None }
    }

    pub fn candidates(&self) -> &[ReleaseCandidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn params(&self) -> Option<&SearchParams> {
        self.params.as_ref()
    }

    /// Distinct `(value, cost)` pairs, compared bit-exactly.
    pub fn objective_pairs(&self) -> BTreeSet<(u64, u64)> {
        self.candidates.iter().map(|c| (c.value_total.to_bits(), c.cost_total.to_bits())).collect()
    }

    pub fn contains_empty_release(&self) -> bool {
        self.candidates.iter().any(|c| c.selection.count() == 0)
    }

    /// `candidate_id,value_total,cost_total,x_bits`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("candidate_id,value_total,cost_total,x_bits\n");
        for (i, c) in self.candidates.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{},{}", c.value_total, c.cost_total, c.selection);
        }
        out
    }

    /// Two columns, cost then value, for plotting.
    pub fn to_plot_data(&self) -> String {
        let mut out = String::from("# cost_total,value_total\n");
        for c in &self.candidates {
            let _ = writeln!(out, "{},{}", c.cost_total, c.value_total);
        }
        out
    }
}

/// Reads the candidates back from [`ParetoFront::to_csv`] output.
pub fn read_front_csv(text: &str) -> Result<Vec<ReleaseCandidate>, SolverError> {
    let mut lines = text.lines();
    match lines.next() {
        Some("candidate_id,value_total,cost_total,x_bits") => {}
        other => return Err(SolverError::Csv(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let bad = || SolverError::Csv(format!("row {}: `{line}`", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(ReleaseCandidate {
                value_total: f[1].parse().map_err(|_| bad())?,
                cost_total: f[2].parse().map_err(|_| bad())?,
                selection: f[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Exhaustive front over all `2^n` decision vectors.
pub fn brute_force_front(inst: &MonrpInstance) -> Result<ParetoFront, SolverError> {
    let n = inst.n();
    if n > MAX_EXACT_FEATURES {
        return Err(SolverError::TooLarge(n));
    }
    let points: Vec<(f64, f64, u64)> = (0..1u64 << n)
        .map(|mask| {
            let bits = Selection::from_mask(mask, n);
            let (v, c) = evaluate_unchecked(inst, &bits.0);
            (v, c, mask)
        })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].1.total_cmp(&points[b].1).then(points[b].0.total_cmp(&points[a].0)));

    // A point survives if it has the best value within its cost group and
    // beats every strictly cheaper point.
    let mut front = Vec::new();
    let mut best_cheaper = f64::NEG_INFINITY;
    let mut k = 0;
    while k < order.len() {
        let cost = points[order[k]].1;
        let group_best = points[order[k]].0;
        let mut end = k;
        while end < order.len() && points[order[end]].1 == cost {
            let (v, c, mask) = points[order[end]];
            if v == group_best && v > best_cheaper {
                front.push(ReleaseCandidate {
                    selection: Selection::from_mask(mask, n),
                    value_total: v,
                    cost_total: c,
                });
            }
            end += 1;
        }
        best_cheaper = best_cheaper.max(group_best);
        k = end;
    }
    Ok(ParetoFront::from_nondominated(front, Provenance::Exact))
}

/// Area dominated by the front in `(Σscore - f1, f2)` space, bounded by the
/// reference point `(1.01·Σscore, 1.01·Σcost)`.
pub fn hypervolume(front: &ParetoFront, inst: &MonrpInstance) -> Result<f64, SolverError> {
    hypervolume_of(front.candidates(), inst)
}

pub fn hypervolume_of(candidates: &[ReleaseCandidate], inst: &MonrpInstance) -> Result<f64, SolverError> {
    if candidates.is_empty() {
        return Err(SolverError::EmptyFront);
    }
    let total_score = inst.total_score();
    let (ref_x, ref_y) = (1.01 * total_score, 1.01 * inst.total_cost());
    let mut pts: Vec<(f64, f64)> = candidates.iter().map(|c| (total_score - c.value_total, c.cost_total)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hv = 0.0;
    let mut ceiling = ref_y;
    for (x, y) in pts {
        if x < ref_x && y < ceiling {
            hv += (ref_x - x) * (ceiling - y);
            ceiling = y;
        }
    }
    Ok(hv)
}
