use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::feature_model::WEIGHT_SUM_TOLERANCE;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance needs at least one stakeholder and one feature")]
    Empty,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("weights sum {0} ≠ 1")]
    WeightSum(f64),
    #[error("weight of `{0}` is {1}, outside [0, 1]")]
    WeightRange(String, f64),
    #[error("{0} must be finite and non-negative, got {1}")]
    Negative(String, f64),
    #[error("invalid range {0}: {1}")]
    InvalidRange(&'static str, String),
    #[error("instance csv: {0}")]
    Csv(String),
}

/// Decision vector: `x[i]` is set when feature `i` is in the release.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Selection(pub Vec<bool>);

impl Selection {
    pub fn empty(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Bit `i` of `mask` selects feature `i`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("bad bit `{other}` in `{s}`")),
            })
            .collect::<Result<_, _>>()
            .map(Selection)
    }
}

/// Stakeholders with weights, features with costs, and the stakeholder ×
/// feature value matrix. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonrpInstance {
    stakeholders: Vec<String>,
    weights: Vec<f64>,
    features: Vec<String>,
    /// `value[j][i]`: value of feature `i` to stakeholder `j`.
    value: Vec<Vec<f64>>,
    cost: Vec<f64>,
    #[serde(skip)]
    scores: Vec<f64>,
}

fn check_entry(what: impl FnOnce() -> String, v: f64) -> Result<(), InstanceError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(InstanceError::Negative(what(), v))
    }
}

impl MonrpInstance {
    pub fn new(
        stakeholders: Vec<String>,
        weights: Vec<f64>,
        features: Vec<String>,
        value: Vec<Vec<f64>>,
        cost: Vec<f64>,
    ) -> Result<Self, InstanceError> {
        let (m, n) = (stakeholders.len(), features.len());
        if m == 0 || n == 0 {
            return Err(InstanceError::Empty);
        }
        if weights.len() != m {
            return Err(InstanceError::Dimension(format!("{} weights for {m} stakeholders", weights.len())));
        }
        if cost.len() != n {
            return Err(InstanceError::Dimension(format!("{} costs for {n} features", cost.len())));
        }
        if value.len() != m || value.iter().any(|row| row.len() != n) {
            let cols = value.first().map_or(0, Vec::len);
            return Err(InstanceError::Dimension(format!("value matrix is {}×{cols}, expected {m}×{n}", value.len())));
        }
        for (id, &w) in stakeholders.iter().zip(&weights) {
            if !(w.is_finite() && (0.0..=1.0).contains(&w)) {
                return Err(InstanceError::WeightRange(id.clone(), w));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(InstanceError::WeightSum(sum));
        }
        for (j, row) in value.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                check_entry(|| format!("value({}, {})", features[i], stakeholders[j]), v)?;
            }
        }
        for (i, &c) in cost.iter().enumerate() {
            check_entry(|| format!("cost of {}", features[i]), c)?;
        }
        let scores = (0..n).map(|i| (0..m).map(|j| weights[j] * value[j][i]).sum()).collect();
        Ok(Self { stakeholders, weights, features, value, cost, scores })
    }

    pub fn stakeholders(&self) -> &[String] {
        &self.stakeholders
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn value_matrix(&self) -> &[Vec<f64>] {
        &self.value
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    /// Number of stakeholders.
    pub fn m(&self) -> usize {
        self.stakeholders.len()
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.features.len()
    }

    /// Weighted importance of each feature: `Σ_j w_j · value(f_i, s_j)`.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn total_score(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.cost.iter().sum()
    }

    /// Same instance with every value scaled by `k` (k ≥ 0).
    pub fn with_scaled_values(&self, k: f64) -> Result<Self, InstanceError> {
        let value = self.value.iter().map(|r| r.iter().map(|v| v * k).collect()).collect();
        Self::new(self.stakeholders.clone(), self.weights.clone(), self.features.clone(), value, self.cost.clone())
    }

    /// Same instance with every cost scaled by `k` (k ≥ 0).
    pub fn with_scaled_costs(&self, k: f64) -> Result<Self, InstanceError> {
        let cost = self.cost.iter().map(|c| c * k).collect();
        Self::new(self.stakeholders.clone(), self.weights.clone(), self.features.clone(), self.value.clone(), cost)
    }

    /// CSV layout: stakeholder ids, weights, one value row per stakeholder,
    /// costs, feature ids.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let nums = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let mut write = |rec: Vec<String>| w.write_record(&rec).expect("in-memory csv");
        write(self.stakeholders.clone());
        write(nums(&self.weights));
        for row in &self.value {
            write(nums(row));
        }
        write(nums(&self.cost));
        write(self.features.clone());
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 input")
    }

    pub fn from_csv(text: &str) -> Result<Self, InstanceError> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
        let rows: Vec<Vec<String>> = r
            .records()
            .map(|rec| {
                rec.map(|r| r.iter().map(|f| f.trim().to_string()).collect())
                    .map_err(|e| InstanceError::Csv(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        if rows.len() < 5 {
            return Err(InstanceError::Csv(format!("expected at least 5 rows, found {}", rows.len())));
        }
        let m = rows[0].len();
        if rows.len() != m + 4 {
            return Err(InstanceError::Csv(format!("{m} stakeholders need {} rows, found {}", m + 4, rows.len())));
        }
        let parse = |row: usize| -> Result<Vec<f64>, InstanceError> {
            rows[row]
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| InstanceError::Csv(format!("row {}: `{f}` is not a number", row + 1)))
                })
                .collect()
        };
        let weights = parse(1)?;
        let value = (2..m + 2).map(parse).collect::<Result<Vec<_>, _>>()?;
        let cost = parse(m + 2)?;
        Self::new(rows[0].clone(), weights, rows[m + 3].clone(), value, cost)
    }
}

/// Objective pair for a decision vector: `(f1, f2)` = (Σ score·x, Σ cost·x).
pub fn evaluate(inst: &MonrpInstance, x: &Selection) -> Result<(f64, f64), InstanceError> {
    if x.len() != inst.n() {
        return Err(InstanceError::Dimension(format!(
            "decision vector has {} entries, instance has {} features",
            x.len(),
            inst.n()
        )));
    }
    Ok(evaluate_unchecked(inst, &x.0))
}

pub(crate) fn evaluate_unchecked(inst: &MonrpInstance, x: &[bool]) -> (f64, f64) {
    let mut value = 0.0;
    let mut cost = 0.0;
    for (i, &on) in x.iter().enumerate() {
        if on {
            value += inst.scores[i];
            cost += inst.cost[i];
        }
    }
    (value, cost)
}

/// Seeded synthetic instance. Weights are drawn uniformly and normalized;
/// each stakeholder is interested in each feature with `interest_prob`, in
/// which case its value is uniform in `value_range`; costs are uniform in
/// `cost_range`.
pub fn random_instance(
    m: usize,
    n: usize,
    seed: u64,
    cost_range: (f64, f64),
    value_range: (f64, f64),
    interest_prob: f64,
) -> Result<MonrpInstance, InstanceError> {
    if m == 0 || n == 0 {
        return Err(InstanceError::Empty);
    }
    for (name, (lo, hi)) in [("cost_range", cost_range), ("value_range", value_range)] {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(InstanceError::InvalidRange(name, format!("({lo}, {hi})")));
        }
    }
    if !(0.0..=1.0).contains(&interest_prob) {
        return Err(InstanceError::InvalidRange("interest_prob", interest_prob.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..m).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let value = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(interest_prob) { rng.gen_range(value_range.0..=value_range.1) } else { 0.0 })
                .collect()
        })
        .collect();
    let cost = (0..n).map(|_| rng.gen_range(cost_range.0..=cost_range.1)).collect();
    MonrpInstance::new(
        (1..=m).map(|j| format!("s{j}")).collect(),
        weights,
        (1..=n).map(|i| format!("f{i}")).collect(),
        value,
        cost,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(values: Vec<f64>, cost: Vec<f64>) -> MonrpInstance {
        let n = values.len();
        MonrpInstance::new(vec!["s".into()], vec![1.0], (0..n).map(|i| format!("f{i}")).collect(), vec![values], cost)
            .unwrap()
    }

    #[test]
    fn scores_identity_weight() {
        assert_eq!(single(vec![3.0, 0.0], vec![1.0, 1.0]).scores(), [3.0, 0.0]);
    }

    #[test]
    fn scores_weighted_average() {
        let inst = MonrpInstance::new(
            vec!["a".into(), "b".into()],
            vec![0.5, 0.5],
            vec!["f1".into()],
            vec![vec![2.0], vec![4.0]],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(inst.scores(), [3.0]);
    }

    #[test]
    fn zero_values_zero_scores() {
        assert_eq!(single(vec![0.0; 3], vec![1.0; 3]).scores(), [0.0; 3]);
    }

    #[test]
    fn evaluate_examples() {
        let inst = single(vec![3.0, 1.0], vec![5.0, 5.0]);
        assert_eq!(evaluate(&inst, &Selection::empty(2)).unwrap(), (0.0, 0.0));
        assert_eq!(evaluate(&inst, &Selection::full(2)).unwrap(), (4.0, 10.0));
        assert_eq!(evaluate(&inst, &"10".parse().unwrap()).unwrap(), (3.0, 5.0));
        assert!(matches!(evaluate(&inst, &Selection::empty(3)), Err(InstanceError::Dimension(_))));
    }

    #[test]
    fn construction_errors() {
        let ids = |k: usize, p: &str| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let ok = |w: Vec<f64>, v: Vec<Vec<f64>>, c: Vec<f64>| {
            MonrpInstance::new(ids(w.len(), "s"), w, ids(c.len(), "f"), v, c)
        };
        assert!(ok(vec![0.4, 0.6], vec![vec![1.0; 3], vec![0.0; 3]], vec![1.0; 3]).is_ok());
        assert!(matches!(
            ok(vec![0.6, 0.6], vec![vec![1.0; 3], vec![0.0; 3]], vec![1.0; 3]),
            Err(InstanceError::WeightSum(_))
        ));
        assert!(matches!(
            ok(vec![0.5, 0.5], vec![vec![1.0; 2], vec![0.0; 2]], vec![1.0; 3]),
            Err(InstanceError::Dimension(_))
        ));
        assert!(matches!(
            ok(vec![1.5, -0.5], vec![vec![1.0; 3], vec![0.0; 3]], vec![1.0; 3]),
            Err(InstanceError::WeightRange(..))
        ));
        assert!(matches!(ok(vec![1.0], vec![vec![-1.0]], vec![1.0]), Err(InstanceError::Negative(..))));
        assert!(matches!(ok(vec![1.0], vec![vec![1.0]], vec![f64::NAN]), Err(InstanceError::Negative(..))));
        assert!(matches!(ok(vec![], vec![], vec![]), Err(InstanceError::Empty)));
    }

    #[test]
    fn random_instances() {
        let a = random_instance(10, 40, 3, (1.0, 10.0), (1.0, 5.0), 0.3).unwrap();
        assert_eq!((a.m(), a.n()), (10, 40));
        assert!((a.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        assert_eq!(a, random_instance(10, 40, 3, (1.0, 10.0), (1.0, 5.0), 0.3).unwrap());
        assert_ne!(a, random_instance(10, 40, 4, (1.0, 10.0), (1.0, 5.0), 0.3).unwrap());
        let zero = random_instance(3, 5, 1, (1.0, 2.0), (1.0, 2.0), 0.0).unwrap();
        assert!(zero.value_matrix().iter().flatten().all(|&v| v == 0.0));
        assert!(random_instance(3, 5, 1, (0.0, 2.0), (1.0, 2.0), 0.5).is_err());
        assert!(random_instance(3, 5, 1, (3.0, 2.0), (1.0, 2.0), 0.5).is_err());
        assert!(random_instance(3, 5, 1, (1.0, 2.0), (1.0, 2.0), 1.5).is_err());
        assert!(random_instance(0, 5, 1, (1.0, 2.0), (1.0, 2.0), 0.5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = random_instance(4, 7, 9, (1.0, 10.0), (1.0, 5.0), 0.5).unwrap();
        let text = a.to_csv();
        assert_eq!(text.lines().count(), 4 + 4);
        let b = MonrpInstance::from_csv(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_csv());
        assert!(MonrpInstance::from_csv("a,b\n0.5,0.5\n1\n").is_err());
    }

    #[test]
    fn selection_text() {
        let s: Selection = "0110".parse().unwrap();
        assert_eq!(s.to_string(), "0110");
        assert_eq!(s.selected().collect::<Vec<_>>(), [1, 2]);
        assert_eq!(Selection::from_mask(0b0110, 4), s);
        assert!("01x".parse::<Selection>().is_err());
    }
}
