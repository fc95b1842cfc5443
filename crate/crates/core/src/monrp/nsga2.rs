//! Non-dominated sorting genetic algorithm over binary decision vectors.
//!
//! Objectives are minimized as `(-f1, f2)`. One generation: binary tournament
//! on (rank, crowding distance), uniform crossover, independent bit-flip
//! mutation, then elitist truncation of parents ∪ offspring by front rank and
//! crowding distance, with repeated decision vectors dropped first. Every
//! random draw comes from one ChaCha stream seeded by [`SearchParams::seed`],
//! consumed in a fixed order.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::front::{dominates_min, ParetoFront, Provenance, ReleaseCandidate, SolverError};
use super::instance::{evaluate_unchecked, MonrpInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1/n`.
    pub mutation_rate: Option<f64>,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { population: 100, generations: 250, crossover_rate: 0.9, mutation_rate: None, seed: 0 }
    }
}

impl SearchParams {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return Err(SolverError::Params(format!(
                "population must be even and at least 4, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(SolverError::Params(format!("crossover_rate {} outside [0, 1]", self.crossover_rate)));
        }
        if let Some(p) = self.mutation_rate {
            if !(0.0..=1.0).contains(&p) {
                return Err(SolverError::Params(format!("mutation_rate {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn effective_mutation_rate(&self, n: usize) -> f64 {
        self.mutation_rate.unwrap_or(1.0 / n as f64)
    }
}

#[derive(Debug, Clone)]
struct Individual {
    genes: Vec<bool>,
    objectives: [f64; 2],
    rank: usize,
    crowding: f64,
}

impl Individual {
    fn new(inst: &MonrpInstance, genes: Vec<bool>) -> Self {
        let (value, cost) = evaluate_unchecked(inst, &genes);
        Self { genes, objectives: [-value, cost], rank: usize::MAX, crowding: 0.0 }
    }
}

/// Fronts of indices into `pop`, best first; also stores each rank.
fn non_dominated_sort(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_min(&pop[i].objectives, &pop[j].objectives) {
                dominates[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates_min(&pop[j].objectives, &pop[i].objectives) {
                dominates[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            pop[i].rank = rank;
            for &j in &dominates[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
        rank += 1;
    }
    fronts
}

fn assign_crowding(pop: &mut [Individual], front: &[usize]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.len() <= 2 {
        for &i in front {
            pop[i].crowding = f64::INFINITY;
        }
        return;
    }
    for obj in 0..2 {
        let mut sorted = front.to_vec();
        sorted.sort_by(|&a, &b| pop[a].objectives[obj].total_cmp(&pop[b].objectives[obj]).then(a.cmp(&b)));
        let lo = pop[sorted[0]].objectives[obj];
        let hi = pop[sorted[sorted.len() - 1]].objectives[obj];
        pop[sorted[0]].crowding = f64::INFINITY;
        pop[sorted[sorted.len() - 1]].crowding = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..sorted.len() - 1 {
            let gap = pop[sorted[k + 1]].objectives[obj] - pop[sorted[k - 1]].objectives[obj];
            pop[sorted[k]].crowding += gap / range;
        }
    }
}

fn tournament<'a>(pop: &'a [Individual], rng: &mut ChaCha8Rng) -> &'a Individual {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    match a.rank.cmp(&b.rank) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => match a.crowding.partial_cmp(&b.crowding) {
            Some(std::cmp::Ordering::Greater) => a,
            Some(std::cmp::Ordering::Less) => b,
            _ => {
                if rng.gen_bool(0.5) {
                    a
                } else {
                    b
                }
            }
        },
    }
}

/// Truncates `pop` to `size` survivors. Repeated decision vectors only survive
/// when there are fewer than `size` distinct ones.
fn environmental_selection(pop: Vec<Individual>, size: usize) -> Vec<Individual> {
    let mut seen = HashSet::with_capacity(pop.len());
    let (distinct, repeats): (Vec<_>, Vec<_>) = pop.into_iter().partition(|ind| seen.insert(ind.genes.clone()));
    if distinct.len() >= size {
        return truncate_by_rank(distinct, size);
    }
    let mut pop = distinct;
    pop.extend(repeats.into_iter().take(size - pop.len()));
    truncate_by_rank(pop, size)
}

/// Rank-then-crowding truncation, leaving rank and crowding set.
fn truncate_by_rank(mut pop: Vec<Individual>, size: usize) -> Vec<Individual> {
    let fronts = non_dominated_sort(&mut pop);
    let mut keep = Vec::with_capacity(size);
    for front in fronts {
        assign_crowding(&mut pop, &front);
        if keep.len() + front.len() <= size {
            keep.extend(front);
        } else {
            let mut last = front;
            last.sort_by(|&a, &b| pop[b].crowding.total_cmp(&pop[a].crowding).then(a.cmp(&b)));
            last.truncate(size - keep.len());
            keep.extend(last);
        }
        if keep.len() == size {
            break;
        }
    }
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("each index kept once")).collect()
}

/// Approximates the Pareto front; the result is the non-dominated subset of
/// the final population with repeated decision vectors removed.
pub fn nsga2_search(inst: &MonrpInstance, params: &SearchParams) -> Result<ParetoFront, SolverError> {
    params.validate()?;
    let n = inst.n();
    let size = params.population;
    let mutation = params.effective_mutation_rate(n);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let init: Vec<Individual> =
        (0..size).map(|_| Individual::new(inst, (0..n).map(|_| rng.gen_bool(0.5)).collect())).collect();
    let mut pop = environmental_selection(init, size);

    for _ in 0..params.generations {
        let mut offspring = Vec::with_capacity(size);
        while offspring.len() < size {
            let mut c1 = tournament(&pop, &mut rng).genes.clone();
            let mut c2 = tournament(&pop, &mut rng).genes.clone();
            if rng.gen_bool(params.crossover_rate) {
                for k in 0..n {
                    if rng.gen_bool(0.5) {
                        std::mem::swap(&mut c1[k], &mut c2[k]);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for gene in child.iter_mut() {
                    if rng.gen_bool(mutation) {
                        *gene = !*gene;
                    }
                }
            }
            offspring.push(Individual::new(inst, c1));
            offspring.push(Individual::new(inst, c2));
        }
        pop.extend(offspring);
        pop = environmental_selection(pop, size);
    }

    let fronts = non_dominated_sort(&mut pop);
    let best: Vec<ReleaseCandidate> =
        fronts[0].iter().map(|&i| ReleaseCandidate::from_bits(inst, pop[i].genes.clone())).collect();
    Ok(ParetoFront::new(best, Provenance::Metaheuristic, Some(params.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monrp::{brute_force_front, random_instance};

    #[test]
    fn params_validation() {
        assert!(SearchParams::default().validate().is_ok());
        for bad in [
            SearchParams { population: 3, ..Default::default() },
            SearchParams { population: 2, ..Default::default() },
            SearchParams { population: 101, ..Default::default() },
            SearchParams { crossover_rate: 1.5, ..Default::default() },
            SearchParams { mutation_rate: Some(-0.1), ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(SolverError::Params(_))), "{bad:?}");
        }
    }

    #[test]
    fn sort_ranks_layers() {
        let mk = |v: f64, c: f64| Individual { genes: vec![], objectives: [-v, c], rank: 0, crowding: 0.0 };
        let mut pop = vec![mk(1.0, 1.0), mk(2.0, 1.0), mk(0.5, 3.0), mk(3.0, 3.0), mk(2.0, 1.0)];
        let fronts = non_dominated_sort(&mut pop);
        assert_eq!(fronts, vec![vec![1, 3, 4], vec![0], vec![2]]);
        assert_eq!(pop.iter().map(|i| i.rank).collect::<Vec<_>>(), [1, 0, 2, 0, 0]);
    }

    #[test]
    fn crowding_boundaries_infinite() {
        let mk = |v: f64, c: f64| Individual { genes: vec![], objectives: [-v, c], rank: 0, crowding: 0.0 };
        let mut pop = vec![mk(0.0, 0.0), mk(1.0, 1.0), mk(3.0, 2.0), mk(4.0, 4.0)];
        assign_crowding(&mut pop, &[0, 1, 2, 3]);
        assert!(pop[0].crowding.is_infinite() && pop[3].crowding.is_infinite());
        // interior: (3-0)/4 + (2-0)/4 for index 1, (4-1)/4 + (4-1)/4 for index 2
        assert!((pop[1].crowding - 1.25).abs() < 1e-12);
        assert!((pop[2].crowding - 1.5).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_front() {
        let inst = random_instance(4, 15, 5, (1.0, 10.0), (1.0, 10.0), 0.5).unwrap();
        let p = SearchParams { population: 20, generations: 30, ..SearchParams::with_seed(11) };
        let a = nsga2_search(&inst, &p).unwrap();
        let b = nsga2_search(&inst, &p).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.provenance(), Provenance::Metaheuristic);
        assert_eq!(a.params(), Some(&p));
    }

    #[test]
    fn small_instance_matches_oracle() {
        let inst = random_instance(3, 6, 2, (1.0, 10.0), (1.0, 10.0), 0.6).unwrap();
        let exact = brute_force_front(&inst).unwrap();
        let meta = nsga2_search(&inst, &SearchParams { population: 40, generations: 60, ..SearchParams::with_seed(1) })
            .unwrap();
        assert_eq!(meta.objective_pairs(), exact.objective_pairs());
    }
}
