//! Searches a random 10-stakeholder, 40-feature instance and writes plot data
//! for the front.
//!
//! ```bash
//! cargo run --release --example release_front -- 42 front.dat
//! gnuplot -e "plot 'front.dat' using 2:1 with linespoints" -p
//! ```

use std::time::Instant;

use release_planner::monrp::{hypervolume, nsga2_search, random_instance, SearchParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(42);
    let out = args.next();

    let inst = random_instance(10, 40, seed, (1.0, 10.0), (1.0, 10.0), 0.5).expect("valid ranges");
    let start = Instant::now();
    let front = nsga2_search(&inst, &SearchParams::with_seed(seed)).expect("default params");
    println!(
        "{} candidates in {:.2?}, hypervolume {:.1}, total value {:.1}, total cost {:.1}",
        front.len(),
        start.elapsed(),
        hypervolume(&front, &inst).unwrap(),
        inst.total_score(),
        inst.total_cost()
    );
    for c in front.candidates().iter().step_by((front.len() / 10).max(1)) {
        println!("  value {:>7.2}  cost {:>6.1}  features {}", c.value_total, c.cost_total, c.selection.count());
    }
    if let Some(path) = out {
        std::fs::write(&path, front.to_plot_data()).unwrap_or_else(|e| panic!("{path}: {e}"));
        println!("plot data written to {path}");
    }
}
