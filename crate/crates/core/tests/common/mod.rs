#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use release_planner::monrp::MonrpInstance;
use tempfile::TempDir;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn copy_dir(src: &Path, dst: &Path) {
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

/// Fresh copy of the smart-charging project; returns the guard and the
/// project directory.
pub fn corpus_copy() -> (TempDir, PathBuf) {
    let tmp = tempfile::tempdir().unwrap();
    let project = tmp.path().join("smart_charging");
    copy_dir(&data_dir().join("smart_charging"), &project);
    (tmp, project)
}

pub fn planner(project: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_release-planner"))
        .arg("--project")
        .arg(project)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Removes `scenario <id> ... }` from a scenario file.
pub fn remove_rule(path: &Path, id: &str) {
    let text = fs::read_to_string(path).unwrap();
    let start = text.find(&format!("scenario {id} ")).expect("rule present");
    let end = start + text[start..].find('}').unwrap() + 1;
    fs::write(path, format!("{}{}", &text[..start], &text[end..])).unwrap();
}

pub fn seeded(cases: u32, seed: u64) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

/// Instances with integer costs and values, so sums are exact in `f64`.
pub fn integer_instance(max_m: usize, max_n: usize) -> impl Strategy<Value = MonrpInstance> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        (
            prop::collection::vec(1u32..=10, m),
            prop::collection::vec(prop::collection::vec(0u32..=10, n), m),
            prop::collection::vec(0u32..=20, n),
        )
            .prop_map(move |(w, value, cost)| {
                let total: u32 = w.iter().sum();
                MonrpInstance::new(
                    (0..m).map(|j| format!("s{j}")).collect(),
                    w.iter().map(|&x| x as f64 / total as f64).collect(),
                    (0..n).map(|i| format!("f{i}")).collect(),
                    value.into_iter().map(|row| row.into_iter().map(f64::from).collect()).collect(),
                    cost.into_iter().map(f64::from).collect(),
                )
                .expect("normalized weights")
            })
    })
}
