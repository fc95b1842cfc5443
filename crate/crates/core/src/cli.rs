//! Project-level commands: `validate`, `gen-steps`, `test`, `estimate`,
//! `search` and `report`.
//!
//! A project is a directory holding `project.toml`:
//!
//! ```toml
//! name = "smart-charging"
//!
//! [paths]              # relative to the project directory; these are the defaults
//! features = "features"
//! scenarios = "scenarios"
//! bindings = "bindings"
//! output = "out"
//!
//! [[stakeholders]]
//! id = "evu"
//! name = "Electric vehicle user"
//! weight = 1.0
//!
//! [estimation]         # alpha, beta, gamma, value_unit
//! alpha = 5.0
//!
//! [estimation.overrides.cost]
//! umc = 12.0
//!
//! [estimation.overrides.value.umc]
//! evu = 4.0
//!
//! [test]
//! budget = 100
//! strategy = "priority"   # or "seeded-random"
//!
//! [search]             # population, generations, crossover_rate, mutation_rate, seed
//! seed = 42
//! ```
//!
//! Feature `<id>` is specified by `<id>.scn` in the scenarios directory and
//! bound by `<id>.bind` in the bindings directory. Files named
//! `<system>.internal.scn` describe the inside of one constituent system.
//!
//! Every command writes only below the output directory. Successful runs
//! leave a `<command>.manifest.json` with input digests.
//!
//! Exit status: 0 success, 1 domain failure (invalid specification, failing
//! test, missing pipeline stage), 2 usage or environment failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::estimation::{build_instance, derive_cost_vector, derive_value_matrix, EstimationParams};
use crate::feature_model::{
    parse_feature_file_at, validate_project_features, FeatureSpec, Stakeholder, ValidationReport,
};
use crate::monrp::{
    brute_force_front, hypervolume, nsga2_search, read_front_csv, MonrpInstance, ParetoFront, SearchParams,
    MAX_EXACT_FEATURES,
};
use crate::scenario_engine::{parse_scenario_spec, Level, ScenarioProgram, SelectionStrategy, SystemKind};
use crate::tdss::{
    bind_steps, execute_test, generate_step_skeletons, parse_bindings, parse_steps_file, render_steps_file, TestReport,
};

pub const CONFIG_FILE: &str = "project.toml";
pub const INSTANCE_FILE: &str = "instance.csv";
pub const FRONT_FILE: &str = "front.csv";
pub const EXACT_FRONT_FILE: &str = "front-exact.csv";
pub const TEST_REPORT_FILE: &str = "test-report.json";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub features: PathBuf,
    pub scenarios: PathBuf,
    pub bindings: PathBuf,
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            features: "features".into(),
            scenarios: "scenarios".into(),
            bindings: "bindings".into(),
            output: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestConfig {
    pub budget: usize,
    pub strategy: SelectionStrategy,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { budget: 100, strategy: SelectionStrategy::Priority }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub name: String,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub stakeholders: Vec<Stakeholder>,
    #[serde(default)]
    pub estimation: EstimationParams,
    #[serde(default)]
    pub test: TestConfig,
    #[serde(default)]
    pub search: SearchParams,
}

impl ProjectConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("{CONFIG_FILE}: {e}")))
    }
}

/// Input file with its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    /// Inputs whose current content no longer matches the recorded digest.
    pub fn stale_inputs(&self) -> Vec<&str> {
        self.inputs
            .iter()
            .filter(|d| fs::read(&d.path).map(|b| sha256_hex(&b) != d.sha256).unwrap_or(true))
            .map(|d| d.path.as_str())
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
    Usage,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Failure => 1,
            Status::Usage => 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Domain(_) => Status::Failure,
            _ => Status::Usage,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    /// Human-readable summary for stdout.
    pub message: String,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "release-planner", version, about = "Release planning for systems of systems")]
pub struct Args {
    /// Project directory containing project.toml.
    #[arg(long, global = true, default_value = ".")]
    pub project: PathBuf,
    /// Seed for the search and the engine's random selection.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the configured one.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Parse and cross-check feature files, scenario programs and stakeholders.
    Validate,
    /// Write one .steps skeleton file per feature.
    GenSteps {
        /// Overwrite skeleton files even when lines would be lost.
        #[arg(long)]
        force: bool,
    },
    /// Run the bound test steps against the scenario programs.
    Test,
    /// Derive the value matrix and cost vector as an instance CSV.
    Estimate {
        /// Estimate even when tests fail.
        #[arg(long)]
        allow_failing: bool,
    },
    /// Search for the Pareto front of release candidates.
    Search {
        /// Instance CSV to use instead of the project's estimate.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Also enumerate the exact front (at most 20 features).
        #[arg(long)]
        exact: bool,
    },
    /// Summarize the last search.
    Report,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub project: PathBuf,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

impl Options {
    pub fn new(project: impl Into<PathBuf>) -> Self {
        Self { project: project.into(), ..Self::default() }
    }
}

impl From<&Args> for Options {
    fn from(a: &Args) -> Self {
        Self { project: a.project.clone(), seed: a.seed, output: a.output.clone() }
    }
}

pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let opts = Options::from(args);
    match &args.command {
        Command::Validate => cmd_validate(&opts),
        Command::GenSteps { force } => cmd_gen_steps(&opts, *force),
        Command::Test => cmd_test(&opts),
        Command::Estimate { allow_failing } => cmd_estimate(&opts, *allow_failing),
        Command::Search { instance, exact } => cmd_search(&opts, instance.as_deref(), *exact),
        Command::Report => cmd_report(&opts),
    }
}

struct Project {
    root: PathBuf,
    config: ProjectConfig,
    output: PathBuf,
    digests: Vec<FileDigest>,
}

impl Project {
    fn load(opts: &Options) -> Result<Self, CliError> {
        let path = opts.project.join(CONFIG_FILE);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let text =
            String::from_utf8(bytes.clone()).map_err(|_| CliError::Config(format!("{}: not UTF-8", path.display())))?;
        let config = ProjectConfig::from_toml(&text)?;
        let output = opts.output.clone().unwrap_or_else(|| opts.project.join(&config.paths.output));
        let digests = vec![FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) }];
        Ok(Self { root: opts.project.clone(), config, output, digests })
    }

    fn dir(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        self.digests.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).map_err(|_| CliError::Config(format!("{}: not UTF-8", path.display())))
    }

    fn write_manifest(&self, command: &str, seed: Option<u64>, outputs: &[PathBuf]) -> Result<PathBuf, CliError> {
        write_manifest(&self.output, command, seed, self.digests.clone(), outputs)
    }
}

fn write_manifest(
    dir: &Path,
    command: &str,
    seed: Option<u64>,
    inputs: Vec<FileDigest>,
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let manifest = RunManifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        inputs,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = dir.join(format!("{command}.manifest.json"));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&path, format!("{json}\n").as_bytes())?;
    Ok(path)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Files in `dir` with the given extension, sorted by name.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

struct Artifacts {
    features: Vec<FeatureSpec>,
    /// SoS-level programs keyed by file stem.
    programs: BTreeMap<String, ScenarioProgram>,
    report: ValidationReport,
}

fn load_artifacts(project: &mut Project) -> Result<Artifacts, CliError> {
    let mut report = ValidationReport::default();
    let mut features = Vec::new();
    for path in list_files(&project.dir(&project.config.paths.features), "feature")? {
        let text = project.read(&path)?;
        match parse_feature_file_at(&text, &path.display().to_string()) {
            Ok(spec) => features.push(spec),
            Err(e) => report.error(path.display().to_string(), e.to_string()),
        }
    }
    if features.is_empty() && !report.has_errors() {
        report.error("features", "no feature files");
    }

    let mut programs = BTreeMap::new();
    let mut internal = BTreeMap::new();
    for path in list_files(&project.dir(&project.config.paths.scenarios), "scn")? {
        let text = project.read(&path)?;
        let subject = path.display().to_string();
        let program = match parse_scenario_spec(&text) {
            Ok(p) => p,
            Err(e) => {
                report.error(&subject, e.to_string());
                continue;
            }
        };
        let stem = file_stem(&path);
        match (stem.strip_suffix(".internal"), program.level()) {
            (Some(cs), Level::CSInternal) => {
                internal.insert(cs.to_string(), subject);
            }
            (Some(_), Level::SoS) => report.error(&subject, "internal program must declare `level internal`"),
            (None, Level::CSInternal) => {
                report.error(&subject, "`level internal` requires a `<system>.internal.scn` file name")
            }
            (None, Level::SoS) => {
                programs.insert(stem, program);
            }
        }
    }

    report.merge(validate_project_features(&features, &project.config.stakeholders));
    if let Err(e) = project.config.estimation.validate() {
        report.error("estimation", e.to_string());
    }
    for spec in &features {
        if !programs.contains_key(&spec.id) && !project.config.estimation.overrides.cost.contains_key(&spec.id) {
            report.warning(&spec.id, "no scenario program and no cost override");
        }
    }
    for stem in programs.keys() {
        if !features.iter().any(|f| &f.id == stem) {
            report.warning(format!("{stem}.scn"), "no feature with this id");
        }
    }
    for (cs, subject) in &internal {
        let known = programs.values().any(|p| p.system(cs).is_some_and(|s| s.kind == SystemKind::ConstituentSystem));
        if !known {
            report.warning(subject, format!("`{cs}` is not a constituent system of any program"));
        }
    }
    Ok(Artifacts { features, programs, report })
}

fn validated(project: &mut Project) -> Result<Artifacts, CliError> {
    let artifacts = load_artifacts(project)?;
    if artifacts.report.has_errors() {
        return Err(CliError::Domain(format!("validation failed\n{}", artifacts.report)));
    }
    Ok(artifacts)
}

pub fn cmd_validate(opts: &Options) -> Result<Outcome, CliError> {
    let mut project = Project::load(opts)?;
    let artifacts = load_artifacts(&mut project)?;
    let steps: usize = artifacts.features.iter().map(FeatureSpec::step_count).sum();
    let mut message = format!(
        "{} features, {} usage steps, {} scenario programs\n",
        artifacts.features.len(),
        steps,
        artifacts.programs.len()
    );
    message.push_str(&artifacts.report.to_string());
    let status = if artifacts.report.has_errors() { Status::Failure } else { Status::Success };
    Ok(Outcome { status, message, outputs: Vec::new() })
}

fn steps_path(project: &Project, id: &str) -> PathBuf {
    project.output.join("steps").join(format!("{id}.steps"))
}

/// True when every step line of `old` survives, in order, in `new`.
fn only_adds_lines(old: &str, new: &str) -> bool {
    let is_step = |l: &&str| !l.trim().is_empty() && !l.starts_with('#');
    let mut fresh = new.lines().filter(is_step);
    old.lines().filter(is_step).all(|line| fresh.any(|n| n == line))
}

pub fn cmd_gen_steps(opts: &Options, force: bool) -> Result<Outcome, CliError> {
    let mut project = Project::load(opts)?;
    let artifacts = validated(&mut project)?;
    let mut plan = Vec::new();
    let mut conflicts = Vec::new();
    for spec in &artifacts.features {
        let path = steps_path(&project, &spec.id);
        let text = render_steps_file(&generate_step_skeletons(spec));
        let state = match fs::read_to_string(&path) {
            Ok(old) if old == text => "unchanged",
            Ok(old) if only_adds_lines(&old, &text) => "extended",
            Ok(_) if force => "overwritten",
            Ok(_) => {
                conflicts.push(path.display().to_string());
                continue;
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => "created",
            Err(e) => return Err(CliError::Io { path, source: e }),
        };
        plan.push((path, text, state));
    }
    if !conflicts.is_empty() {
        return Err(CliError::Usage(format!(
            "refusing to overwrite edited skeletons (use --force): {}",
            conflicts.join(", ")
        )));
    }
    let mut message = String::new();
    let mut outputs = Vec::new();
    for (path, text, state) in plan {
        if state != "unchanged" {
            write_atomic(&path, text.as_bytes())?;
        }
        let _ = writeln!(message, "{state:<12}{}", path.display());
        outputs.push(path);
    }
    project.write_manifest("gen-steps", None, &outputs)?;
    Ok(Outcome { status: Status::Success, message, outputs })
}

fn run_tests(project: &mut Project, artifacts: &Artifacts, seed: u64) -> Result<(Vec<TestReport>, String), CliError> {
    let mut reports = Vec::new();
    let mut notes = String::new();
    for spec in &artifacts.features {
        let skeletons = generate_step_skeletons(spec);
        let path = steps_path(project, &spec.id);
        let on_disk = match fs::read_to_string(&path) {
            Ok(text) => parse_steps_file(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
            Err(_) => return Err(CliError::Usage(format!("{} missing; run gen-steps", path.display()))),
        };
        let expected: Vec<_> = skeletons.iter().map(|s| (s.kind, s.pattern.clone())).collect();
        if on_disk != expected {
            return Err(CliError::Usage(format!("{} is out of date; run gen-steps", path.display())));
        }
        let program = artifacts
            .programs
            .get(&spec.id)
            .ok_or_else(|| CliError::Domain(format!("feature `{}` has no scenario program to test", spec.id)))?;
        let bind_path = project.dir(&project.config.paths.bindings).join(format!("{}.bind", spec.id));
        let entries = if bind_path.exists() {
            let text = project.read(&bind_path)?;
            parse_bindings(&text).map_err(|e| CliError::Domain(format!("{}: {e}", bind_path.display())))?
        } else {
            Vec::new()
        };
        let bound = bind_steps(&skeletons, &entries, program)
            .map_err(|e| CliError::Domain(format!("{}: {e}", bind_path.display())))?;
        for line in &bound.unmatched {
            let _ = writeln!(notes, "warning: {}:{line} matches no step", bind_path.display());
        }
        let report = execute_test(
            spec,
            &bound.skeletons,
            program,
            project.config.test.budget,
            project.config.test.strategy,
            seed,
        )
        .map_err(|e| CliError::Config(format!("test: {e}")))?;
        reports.push(report);
    }
    Ok((reports, notes))
}

pub fn cmd_test(opts: &Options) -> Result<Outcome, CliError> {
    let mut project = Project::load(opts)?;
    let artifacts = validated(&mut project)?;
    let seed = opts.seed.unwrap_or(0);
    let (reports, mut message) = run_tests(&mut project, &artifacts, seed)?;
    let path = project.output.join(TEST_REPORT_FILE);
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    write_atomic(&path, format!("{json}\n").as_bytes())?;

    let (mut total, mut passed) = (0, 0);
    for r in &reports {
        message.push_str(&r.to_string());
        total += r.totals.scenarios;
        passed += r.totals.passed;
    }
    let _ = writeln!(message, "{passed}/{total} scenarios passed");
    let outputs = vec![path];
    let status = if passed == total {
        project.write_manifest("test", Some(seed), &outputs)?;
        Status::Success
    } else {
        Status::Failure
    };
    Ok(Outcome { status, message, outputs })
}

pub fn cmd_estimate(opts: &Options, allow_failing: bool) -> Result<Outcome, CliError> {
    let mut project = Project::load(opts)?;
    let artifacts = validated(&mut project)?;
    if !allow_failing {
        let (reports, _) = run_tests(&mut project, &artifacts, opts.seed.unwrap_or(0))?;
        let failed: usize = reports.iter().map(|r| r.totals.failed).sum();
        if failed > 0 {
            return Err(CliError::Domain(format!("{failed} test scenarios fail; fix them or pass --allow-failing")));
        }
    }
    let params = &project.config.estimation;
    let stakeholders = &project.config.stakeholders;
    let domain = |e: crate::estimation::EstimationError| CliError::Domain(e.to_string());
    let value = derive_value_matrix(&artifacts.features, stakeholders, params).map_err(domain)?;
    let cost = derive_cost_vector(&artifacts.features, &artifacts.programs, params).map_err(domain)?;
    let inst = build_instance(stakeholders, &artifacts.features, value, cost).map_err(domain)?;

    let path = project.output.join(INSTANCE_FILE);
    write_atomic(&path, inst.to_csv().as_bytes())?;
    let mut message = format!("{:<20} {:>10} {:>10}\n", "feature", "score", "cost");
    for (i, f) in inst.features().iter().enumerate() {
        let note = if params.overrides.cost.contains_key(f) { " (override)" } else { "" };
        let _ = writeln!(message, "{f:<20} {:>10.3} {:>10.3}{note}", inst.scores()[i], inst.costs()[i]);
    }
    let _ = writeln!(message, "wrote {}", path.display());
    let outputs = vec![path];
    project.write_manifest("estimate", None, &outputs)?;
    Ok(Outcome { status: Status::Success, message, outputs })
}

fn read_instance(path: &Path) -> Result<(MonrpInstance, FileDigest), CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let text = String::from_utf8_lossy(&bytes);
    let inst = MonrpInstance::from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((inst, FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) }))
}

fn describe_front(label: &str, front: &ParetoFront, inst: &MonrpInstance) -> String {
    let hv = hypervolume(front, inst).unwrap_or(0.0);
    format!("{label}: {} candidates, hypervolume {hv:.6}\n", front.len())
}

pub fn cmd_search(opts: &Options, instance: Option<&Path>, exact: bool) -> Result<Outcome, CliError> {
    let config_path = opts.project.join(CONFIG_FILE);
    let project = if instance.is_none() || config_path.exists() { Some(Project::load(opts)?) } else { None };
    let output = match &project {
        Some(p) => p.output.clone(),
        None => opts.output.clone().unwrap_or_else(|| opts.project.join(Paths::default().output)),
    };
    let instance_path = match instance {
        Some(p) => p.to_path_buf(),
        None => output.join(INSTANCE_FILE),
    };
    if !instance_path.exists() {
        return Err(CliError::Domain(format!("no instance at {}; run estimate first", instance_path.display())));
    }
    let (inst, digest) = read_instance(&instance_path)?;
    if exact && inst.n() > MAX_EXACT_FEATURES {
        return Err(CliError::Usage(format!(
            "--exact supports at most {MAX_EXACT_FEATURES} features, instance has {}",
            inst.n()
        )));
    }
    let mut params = project.as_ref().map(|p| p.config.search.clone()).unwrap_or_default();
    if let Some(seed) = opts.seed {
        params.seed = seed;
    }
    let front = nsga2_search(&inst, &params).map_err(|e| CliError::Config(format!("search: {e}")))?;

    let mut outputs = Vec::new();
    let mut emit = |name: &str, front: &ParetoFront| -> Result<(), CliError> {
        let csv = output.join(name);
        let plot = csv.with_extension("dat");
        write_atomic(&csv, front.to_csv().as_bytes())?;
        write_atomic(&plot, front.to_plot_data().as_bytes())?;
        outputs.push(csv);
        outputs.push(plot);
        Ok(())
    };
    emit(FRONT_FILE, &front)?;
    let mut message = describe_front("nsga2", &front, &inst);
    if exact {
        let exact_front = brute_force_front(&inst).map_err(|e| CliError::Usage(e.to_string()))?;
        emit(EXACT_FRONT_FILE, &exact_front)?;
        message.push_str(&describe_front("exact", &exact_front, &inst));
        let ratio = hypervolume(&front, &inst).unwrap_or(0.0) / hypervolume(&exact_front, &inst).unwrap_or(1.0);
        let same = front.objective_pairs() == exact_front.objective_pairs();
        let _ = writeln!(message, "hypervolume ratio {ratio:.6}, same objective pairs: {same}");
    }
    if front.contains_empty_release() {
        message.push_str("note: the front includes the empty release\n");
    }
    for p in &outputs {
        let _ = writeln!(message, "wrote {}", p.display());
    }
    let mut inputs = vec![digest];
    if let Some(p) = &project {
        inputs.splice(0..0, p.digests.iter().cloned());
    }
    write_manifest(&output, "search", Some(params.seed), inputs, &outputs)?;
    Ok(Outcome { status: Status::Success, message, outputs })
}

pub fn cmd_report(opts: &Options) -> Result<Outcome, CliError> {
    let output = if opts.project.join(CONFIG_FILE).exists() {
        Project::load(opts)?.output
    } else {
        opts.output.clone().unwrap_or_else(|| opts.project.join(Paths::default().output))
    };
    let manifest_path = output.join("search.manifest.json");
    let manifest: RunManifest = match fs::read_to_string(&manifest_path) {
        Ok(text) => {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", manifest_path.display())))?
        }
        Err(_) => return Err(CliError::Domain(format!("no search results in {}; run search first", output.display()))),
    };
    let instance_path = manifest
        .inputs
        .last()
        .map(|d| PathBuf::from(&d.path))
        .ok_or_else(|| CliError::Config(format!("{}: no inputs recorded", manifest_path.display())))?;
    let (inst, _) = read_instance(&instance_path)?;
    let front_path = output.join(FRONT_FILE);
    let text = fs::read_to_string(&front_path).map_err(io_err(&front_path))?;
    let candidates = read_front_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", front_path.display())))?;

    let mut out = String::new();
    let _ = writeln!(out, "release candidates (seed {})", manifest.seed.map_or("-".into(), |s| s.to_string()));
    for stale in manifest.stale_inputs() {
        let _ = writeln!(out, "warning: {stale} changed since the search");
    }
    let _ = writeln!(out, "{:>4} {:>12} {:>12}  features", "#", "value", "cost");
    for (i, c) in candidates.iter().enumerate() {
        let names: Vec<&str> = c.selection.selected().map(|k| inst.features()[k].as_str()).collect();
        let features = if names.is_empty() { "(empty release)".to_string() } else { names.join(", ") };
        let _ = writeln!(out, "{i:>4} {:>12.4} {:>12.4}  {features}", c.value_total, c.cost_total);
    }
    let exact_path = output.join(EXACT_FRONT_FILE);
    if let Ok(text) = fs::read_to_string(&exact_path) {
        if let Ok(exact) = read_front_csv(&text) {
            let _ = writeln!(out, "exact front: {} candidates", exact.len());
        }
    }
    let path = output.join(REPORT_FILE);
    write_atomic(&path, out.as_bytes())?;
    Ok(Outcome { status: Status::Success, message: out, outputs: vec![path] })
}
