//! Compares the evolutionary search with the exhaustive front on small
//! random instances.
//!
//! ```bash
//! cargo run --release --example exact_vs_nsga2 -- 20
//! ```

use std::time::Instant;

use release_planner::monrp::{brute_force_front, hypervolume, nsga2_search, random_instance, SearchParams};

fn main() {
    let count: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let start = Instant::now();
    let mut equal = 0;
    println!("seed  exact  nsga2  same-set  hv-ratio");
    for seed in 0..count {
        let inst = random_instance(5, 12, seed, (1.0, 10.0), (1.0, 10.0), 0.5).expect("valid ranges");
        let exact = brute_force_front(&inst).expect("n <= 20");
        let meta = nsga2_search(&inst, &SearchParams::with_seed(seed)).expect("default params");
        let same = exact.objective_pairs() == meta.objective_pairs();
        equal += same as usize;
        let ratio = hypervolume(&meta, &inst).unwrap() / hypervolume(&exact, &inst).unwrap();
        println!("{seed:>4}  {:>5}  {:>5}  {:>8}  {ratio:.6}", exact.len(), meta.len(), same);
    }
    println!("{equal}/{count} identical fronts in {:.2?}", start.elapsed());
}
