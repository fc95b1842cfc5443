//! Parses a feature file and prints its scenarios with resolved step kinds.
//!
//! ```bash
//! cargo run --example parse_feature -- data/smart_charging/features/umc.feature
//! ```

use release_planner::feature_model::parse_feature_file_at;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/umc_usage.feature".into());
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let spec = match parse_feature_file_at(&text, &path) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!("{} ({} scenarios, {} steps)", spec.id, spec.scenarios.len(), spec.step_count());
    for s in &spec.scenarios {
        let tags: Vec<&str> = s.stakeholder_tags.iter().map(String::as_str).collect();
        println!("\n{} [{}]", s.name, tags.join(", "));
        for step in &s.steps {
            println!("  {:<5} -> {:<4} {}", step.keyword.to_string(), step.resolved.to_string(), step.text);
        }
    }
    println!("\n--- canonical form ---\n{}", spec.to_canonical_text());
}
