//! Runs every pipeline command on a scratch copy of the smart-charging project.
//!
//! ```bash
//! cargo run --example project_pipeline
//! ```

use std::fs;
use std::path::Path;

use release_planner::cli::{
    cmd_estimate, cmd_gen_steps, cmd_report, cmd_search, cmd_test, cmd_validate, Options, REPORT_FILE,
};

fn copy_dir(src: &Path, dst: &Path) {
    fs::create_dir_all(dst).unwrap();
    for entry in fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &to);
        } else {
            fs::copy(entry.path(), to).unwrap();
        }
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("smart_charging");
    copy_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/smart_charging"), &project);
    let opts = Options::new(&project);

    let steps = [
        ("validate", cmd_validate(&opts)),
        ("gen-steps", cmd_gen_steps(&opts, false)),
        ("test", cmd_test(&opts)),
        ("estimate", cmd_estimate(&opts, false)),
        ("search", cmd_search(&opts, None, true)),
        ("report", cmd_report(&opts)),
    ];
    for (name, result) in steps {
        match result {
            Ok(out) => println!("== {name} (exit {})\n{}", out.status.code(), out.message.trim_end()),
            Err(e) => {
                eprintln!("{name}: {e}");
                std::process::exit(e.status().code());
            }
        }
    }
    println!("\n{}", fs::read_to_string(project.join("out").join(REPORT_FILE)).unwrap());
}
