mod common;

use std::fs;
use std::path::Path;

use release_planner::cli::{RunManifest, EXACT_FRONT_FILE, FRONT_FILE};
use release_planner::monrp::{random_instance, read_front_csv};
use serde_json::Value;

use common::{code, corpus_copy, planner, remove_rule, stderr, stdout};

fn edit(path: &Path, from: &str, to: &str) {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.contains(from), "{from:?} not in {}", path.display());
    fs::write(path, text.replacen(from, to, 1)).unwrap();
}

#[test]
fn validate_accepts_corpus() {
    let (_g, p) = corpus_copy();
    let out = planner(&p, &["validate"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).starts_with("3 features, 16 usage steps, 3 scenario programs"));
}

#[test]
fn validate_reports_weight_sum() {
    let (_g, p) = corpus_copy();
    edit(&p.join("project.toml"), "weight = 0.2", "weight = 0.1");
    let out = planner(&p, &["validate"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("weights sum 0.9"), "{}", stdout(&out));
}

#[test]
fn validate_missing_features_dir_is_environment_error() {
    let (_g, p) = corpus_copy();
    fs::remove_dir_all(p.join("features")).unwrap();
    assert_eq!(code(&planner(&p, &["validate"])), 2);
}

#[test]
fn missing_config_and_bad_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&planner(tmp.path(), &["validate"])), 2);
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["frobnicate"])), 2);
    edit(&p.join("project.toml"), "[search]", "[search]\nelitism = true");
    let out = planner(&p, &["validate"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("elitism"));
}

#[test]
fn unknown_stakeholder_tag_fails_validation() {
    let (_g, p) = corpus_copy();
    edit(&p.join("features/grid.feature"), "@stakeholder:city", "@stakeholder:ghost");
    let out = planner(&p, &["validate"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("unknown stakeholder `ghost`"));
}

#[test]
fn gen_steps_is_idempotent_and_guards_edits() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    let steps = p.join("out/steps/status.steps");
    let first = fs::read_to_string(&steps).unwrap();
    let again = planner(&p, &["gen-steps"]);
    assert_eq!(code(&again), 0);
    assert!(stdout(&again).lines().all(|l| l.starts_with("unchanged")));
    assert_eq!(fs::read_to_string(&steps).unwrap(), first);

    // a new scenario only adds lines
    let feature = p.join("features/status.feature");
    let mut text = fs::read_to_string(&feature).unwrap();
    text.push_str("\n  @stakeholder:evu\n  Scenario: Paused\n    When the user pauses charging\n");
    fs::write(&feature, text).unwrap();
    let out = planner(&p, &["gen-steps"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let extended = fs::read_to_string(&steps).unwrap();
    assert!(extended.ends_with("# scenario: Paused\nWhen\t^the user pauses charging$\n"));
    assert!(extended.starts_with(first.trim_end_matches('\n')));

    // a changed step would lose a line
    edit(&feature, "pauses charging", "stops charging");
    let refused = planner(&p, &["gen-steps"]);
    assert_eq!(code(&refused), 2);
    assert!(stderr(&refused).contains("--force"));
    assert_eq!(fs::read_to_string(&steps).unwrap(), extended);
    assert_eq!(code(&planner(&p, &["gen-steps", "--force"])), 0);
    assert!(fs::read_to_string(&steps).unwrap().contains("stops charging"));

    let bind = fs::read_to_string(p.join("bindings/status.bind")).unwrap();
    assert_eq!(bind, fs::read_to_string(common::data_dir().join("smart_charging/bindings/status.bind")).unwrap());
}

#[test]
fn test_needs_current_skeletons() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["test"])), 2);
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    edit(&p.join("features/umc.feature"), "executes this charging plan", "runs this charging plan");
    let out = planner(&p, &["test"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("out of date"));
}

#[test]
fn test_passes_then_fails_without_rule() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    let out = planner(&p, &["test"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("5/5 scenarios passed"));
    assert!(p.join("out/test.manifest.json").exists());

    remove_rule(&p.join("scenarios/umc.scn"), "umc");
    let out = planner(&p, &["test"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL not observed"));
    assert!(stdout(&out).contains("4/5 scenarios passed"));
}

#[test]
fn unbound_step_fails_with_fail_unbound() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    let bind = p.join("bindings/status.bind");
    let text: String = fs::read_to_string(&bind)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("showProgress"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&bind, text).unwrap();
    let out = planner(&p, &["test"]);
    assert_eq!(code(&out), 1);
    let report: Value = serde_json::from_str(&fs::read_to_string(p.join("out/test-report.json")).unwrap()).unwrap();
    let status = report.as_array().unwrap().iter().find(|r| r["feature_id"] == "status").unwrap();
    assert_eq!(status["scenarios"][0]["verdict"], "fail_unbound");
    assert_eq!(status["scenarios"][0]["step"], 1);
    assert_eq!(status["scenarios"][1]["verdict"], "pass");
}

#[test]
fn binding_errors_are_domain_failures() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    edit(&p.join("bindings/grid.bind"), "receive\tEIS -> App.reschedule()", "receive\tEIS -> App.teleport()");
    let out = planner(&p, &["test"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("teleport"), "{}", stderr(&out));
}

#[test]
fn estimate_requires_passing_tests() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    remove_rule(&p.join("scenarios/status.scn"), "report");
    let out = planner(&p, &["estimate"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--allow-failing"));
    assert_eq!(code(&planner(&p, &["estimate", "--allow-failing"])), 0);
    assert!(p.join("out/instance.csv").exists());
}

#[test]
fn estimate_writes_instance_and_respects_overrides() {
    let (_g, p) = corpus_copy();
    assert_eq!(code(&planner(&p, &["gen-steps"])), 0);
    assert_eq!(code(&planner(&p, &["estimate"])), 0);
    let csv = fs::read_to_string(p.join("out/instance.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    // ids, weights, 3 value rows, costs, feature ids
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "evu,dso,city");
    assert_eq!(lines[2], "0,2,2");
    assert_eq!(lines[3], "1,0,1");
    assert_eq!(lines[4], "1,0,0");
    assert_eq!(lines[5], "21,12,21");
    assert_eq!(lines[6], "grid,status,umc");

    let mut cfg = fs::read_to_string(p.join("project.toml")).unwrap();
    cfg.push_str("\n[estimation.overrides.cost]\ngrid = 8.5\n\n[estimation.overrides.value.umc]\ncity = 4.0\n");
    fs::write(p.join("project.toml"), cfg).unwrap();
    assert_eq!(code(&planner(&p, &["estimate"])), 0);
    let csv = fs::read_to_string(p.join("out/instance.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[4], "1,0,4");
    assert_eq!(lines[5], "8.5,12,21");
}

#[test]
fn estimate_names_feature_without_program() {
    let (_g, p) = corpus_copy();
    fs::remove_file(p.join("scenarios/grid.scn")).unwrap();
    let out = planner(&p, &["estimate", "--allow-failing"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("`grid`"), "{}", stderr(&out));
}

#[test]
fn search_requires_an_instance() {
    let (_g, p) = corpus_copy();
    let out = planner(&p, &["search"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("run estimate"));
}

#[test]
fn search_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = random_instance(10, 40, 7, (1.0, 10.0), (1.0, 10.0), 0.5).unwrap();
    let csv = tmp.path().join("random_10x40.csv");
    fs::write(&csv, inst.to_csv()).unwrap();
    let run = |dir: &str| {
        let out_dir = tmp.path().join(dir);
        let out = planner(
            tmp.path(),
            &["--seed", "42", "--output", out_dir.to_str().unwrap(), "search", "--instance", csv.to_str().unwrap()],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        (fs::read(out_dir.join(FRONT_FILE)).unwrap(), fs::read(out_dir.join("front.dat")).unwrap())
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let front = read_front_csv(std::str::from_utf8(&a.0).unwrap()).unwrap();
    assert!(front.len() >= 10);

    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/search.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, Some(42));
    assert!(manifest.stale_inputs().is_empty());
}

#[test]
fn exact_search_prints_ratio_and_guards_size() {
    let tmp = tempfile::tempdir().unwrap();
    let small = tmp.path().join("small.csv");
    fs::write(&small, random_instance(4, 12, 3, (1.0, 10.0), (1.0, 10.0), 0.5).unwrap().to_csv()).unwrap();
    let out = planner(tmp.path(), &["search", "--instance", small.to_str().unwrap(), "--exact"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("hypervolume ratio"));
    assert!(tmp.path().join("out").join(EXACT_FRONT_FILE).exists());

    let big = tmp.path().join("big.csv");
    fs::write(&big, random_instance(2, 21, 3, (1.0, 10.0), (1.0, 10.0), 0.5).unwrap().to_csv()).unwrap();
    assert_eq!(code(&planner(tmp.path(), &["search", "--instance", big.to_str().unwrap(), "--exact"])), 2);
}

#[test]
fn full_pipeline_and_report() {
    let (_g, p) = corpus_copy();
    for cmd in [&["validate"][..], &["gen-steps"], &["test"], &["estimate"], &["search", "--exact"], &["report"]] {
        let out = planner(&p, cmd);
        assert_eq!(code(&out), 0, "{cmd:?}: {}{}", stdout(&out), stderr(&out));
    }
    let report = fs::read_to_string(p.join("out/report.txt")).unwrap();
    assert!(report.contains("(empty release)"));
    assert!(report.contains("status, umc"));
    let front = read_front_csv(&fs::read_to_string(p.join("out").join(FRONT_FILE)).unwrap()).unwrap();
    let exact = read_front_csv(&fs::read_to_string(p.join("out").join(EXACT_FRONT_FILE)).unwrap()).unwrap();
    assert_eq!(front, exact);
    for name in ["gen-steps", "test", "estimate", "search"] {
        assert!(p.join(format!("out/{name}.manifest.json")).exists(), "{name}");
    }
}
