//! The five subcommands. Each writes into a directory tracked by a manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mase_core::evolution::{detect_breaking, evolve, max_slope, Termination, Trajectory};
use mase_core::symmetry::{verify_theorem, SymmetryReport};
use mase_core::traveling_wave::{
    contact_profile, periodic_profile, singular_line, solitary_profile, solitary_window, turning_points, Regularity,
    TWParams, TWProfile,
};
use mase_core::weakform::{
    bump_family, steady_report, steady_weak_residual, unsteady_weak_residual, BumpKind, ResidualEntry, ResidualReport,
    TestFunction,
};
use mase_core::{Error as CoreError, Field, Grid, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{from_value, set_path, Scenario, SweepCommand, SweepSpec, TwRequest};
use crate::error::{CliError, Result};
use crate::output::{csv_string, fmt_num, read_columns, read_json, Manifest, OutputDir};

pub const PROFILE_CSV: &str = "profile.csv";
pub const PROFILE_JSON: &str = "profile.json";
pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const BREAKING_JSON: &str = "breaking.json";
pub const SYMMETRY_JSON: &str = "symmetry.json";
pub const WEAKFORM_JSON: &str = "weakform.json";
pub const SWEEP_CSV: &str = "sweep.csv";
const SNAPSHOT_DIR: &str = "snapshots";

/// Edge decay of default solitary windows.
const SOLITARY_EDGE_RATIO: f64 = 1e-8;
/// Bumps in the residual family reported by `tw`.
const TW_BUMPS: usize = 12;

fn snapshot_name(t: f64) -> String {
    format!("{SNAPSHOT_DIR}/t={t:.9}.csv")
}

fn termination_tag(t: Termination) -> &'static str {
    match t {
        Termination::Completed => "completed",
        Termination::BreakingDetected => "breaking_detected",
        Termination::DtUnderflow => "dt_underflow",
    }
}

fn termination_from_tag(tag: &str) -> Option<Termination> {
    match tag {
        "completed" => Some(Termination::Completed),
        "breaking_detected" => Some(Termination::BreakingDetected),
        "dt_underflow" => Some(Termination::DtUnderflow),
        _ => None,
    }
}

fn regularity_tag(r: Regularity) -> &'static str {
    match r {
        Regularity::SmoothSolitary => "smooth_solitary",
        Regularity::SmoothPeriodic => "smooth_periodic",
        Regularity::Peaked => "peaked",
        Regularity::Cusped => "cusped",
        Regularity::Composite => "composite",
    }
}

fn field_csv(u: &Field) -> String {
    let grid = u.grid();
    csv_string(&["x", "u"], u.values().iter().enumerate().map(|(j, v)| [grid.x(j), *v]))
}

/// Run a scenario and store its trajectory.
///
/// `input` is the scenario value after overrides; it is recorded verbatim.
/// File paths in the scenario are resolved against `base`.
pub fn simulate(input: Value, base: &Path, out: &Path, timing: bool) -> Result<Manifest> {
    let clock = Instant::now();
    let scenario: Scenario = from_value(input.clone(), base)?;
    scenario.validate(base)?;
    let initial = State::new(0.0, scenario.initial_field(base)?)?;
    let traj = evolve(&initial, &scenario.solver)?;

    let mut dir = OutputDir::create(out, Manifest::new("simulate", input))?;
    for state in traj.snapshots() {
        dir.write(&snapshot_name(state.time()), &field_csv(state.u()))?;
    }
    let rows: Vec<[f64; 4]> = traj
        .snapshots()
        .iter()
        .map(|s| [s.time(), s.u().mean(), s.u().sup_norm(), max_slope(s.u())])
        .collect();
    dir.write(DIAGNOSTICS_CSV, &csv_string(&["t", "mean", "sup_norm", "max_slope"], rows))?;

    let termination = traj.termination();
    if scenario.analysis.breaking || termination == Termination::BreakingDetected {
        dir.write_json(BREAKING_JSON, &detect_breaking(&traj))?;
    }
    if scenario.analysis.symmetry {
        let tol = &scenario.tolerances;
        match verify_theorem(&traj, tol.symmetry_tol, tol.travel_tol) {
            Ok(report) => dir.write_json(SYMMETRY_JSON, &report)?,
            Err(e) => dir.manifest_mut().notes.push(format!("symmetry analysis failed: {e}")),
        }
    }
    if scenario.analysis.weakform {
        match unsteady_family_report(&traj, &mut ChaCha8Rng::seed_from_u64(0), TW_BUMPS) {
            Ok(report) => dir.write_json(WEAKFORM_JSON, &json!({ "seed": 0, "report": report }))?,
            Err(e) => dir.manifest_mut().notes.push(format!("weak-form analysis failed: {e}")),
        }
    }

    let manifest = dir.manifest_mut();
    manifest.status = Some(termination_tag(termination).into());
    if timing {
        manifest.wall_clock_seconds = Some(clock.elapsed().as_secs_f64());
    }
    dir.finish()
}

/// Reads a `simulate` directory back into a trajectory.
pub fn load_trajectory(run: &Path) -> Result<Trajectory> {
    let manifest: Manifest = read_json(&run.join(crate::output::MANIFEST))?;
    if manifest.command != "simulate" {
        return Err(CliError::format(run, format!("not a simulate run (command '{}')", manifest.command)));
    }
    let scenario: Scenario = from_value(manifest.input.clone(), run)?;
    let grid = scenario.grid()?;
    let prefix = format!("{SNAPSHOT_DIR}/t=");
    let mut snapshots = Vec::new();
    for entry in manifest.files.iter().filter(|f| f.path.starts_with(&prefix)) {
        let stamp = entry.path[prefix.len()..].trim_end_matches(".csv");
        let time: f64 =
            stamp.parse().map_err(|_| CliError::format(run.join(&entry.path), "snapshot time not parseable"))?;
        let (_, u) = read_columns(&run.join(&entry.path))?;
        snapshots.push(State::new(time, Field::new(grid.clone(), u)?)?);
    }
    snapshots.sort_by(|a, b| a.time().total_cmp(&b.time()));
    let termination = manifest
        .status
        .as_deref()
        .and_then(termination_from_tag)
        .ok_or_else(|| CliError::format(run, "manifest has no termination status"))?;
    Ok(Trajectory::new(snapshots, scenario.solver, termination)?)
}

/// Symmetry analysis of a stored run; tolerances default to the scenario's.
pub fn symmetry(run: &Path, symmetry_tol: Option<f64>, travel_tol: Option<f64>) -> Result<SymmetryReport> {
    let traj = load_trajectory(run)?;
    let mut dir = OutputDir::reopen(run)?;
    let scenario: Scenario = from_value(dir.manifest_mut().input.clone(), run)?;
    let sym = symmetry_tol.unwrap_or(scenario.tolerances.symmetry_tol);
    let travel = travel_tol.unwrap_or(scenario.tolerances.travel_tol);
    if !(sym > 0.0 && travel > 0.0) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    let report = verify_theorem(&traj, sym, travel)?;
    dir.write_json(SYMMETRY_JSON, &report)?;
    dir.finish()?;
    Ok(report)
}

/// Sidecar written next to `profile.csv`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileInfo {
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub regularity: Regularity,
    pub period: Option<f64>,
    pub window: f64,
    pub n_points: usize,
    pub amplitude: f64,
    pub turning_points: Vec<f64>,
    pub singular_line: f64,
    pub steady_residual: Option<ResidualReport>,
}

fn build_profile(req: &TwRequest) -> Result<TWProfile> {
    match (req.a, req.e) {
        (None, None) => {
            let length = match req.length {
                Some(l) => l,
                None => solitary_window(req.c, SOLITARY_EDGE_RATIO)?,
            };
            Ok(solitary_profile(req.c, &Grid::new(req.n_points, length)?)?)
        }
        (Some(a), Some(e)) => {
            let params = TWParams::new(req.c, a, e)?;
            match periodic_profile(&params, req.n_points) {
                Err(CoreError::Nonexistence(periodic)) => match contact_profile(&params, req.n_points) {
                    Err(CoreError::Nonexistence(contact)) => {
                        Err(CoreError::Nonexistence(format!("{periodic}; {contact}")).into())
                    }
                    other => Ok(other?),
                },
                other => Ok(other?),
            }
        }
        _ => Err(CliError::Config("A and E must be given together".into())),
    }
}

/// Construct a traveling wave and certify it against a bump family.
pub fn tw(input: Value, out: &Path, timing: bool) -> Result<Manifest> {
    let clock = Instant::now();
    let req: TwRequest = from_value(input.clone(), Path::new("<tw>"))?;
    if ![Some(req.c), req.a, req.e, req.length].iter().flatten().all(|v| v.is_finite()) {
        return Err(CliError::Config("traveling-wave parameters must be finite".into()));
    }
    let profile = build_profile(&req)?;
    let mut dir = OutputDir::create(out, Manifest::new("tw", input))?;

    let family = bump_family(BumpKind::GaussianBumpTruncated, 0.0, profile.window, profile.window / 8.0, TW_BUMPS)?;
    let steady_residual = match steady_report(&profile, &family) {
        Ok(r) => Some(r),
        Err(e) => {
            dir.manifest_mut().notes.push(format!("steady residual skipped: {e}"));
            None
        }
    };
    let params = profile.params;
    let info = ProfileInfo {
        c: params.speed,
        a: params.integration_constant,
        e: params.energy,
        regularity: profile.regularity,
        period: profile.period,
        window: profile.window,
        n_points: profile.values.len(),
        amplitude: profile.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        turning_points: turning_points(&params).into_iter().map(|r| r.value).collect(),
        singular_line: singular_line(&params),
        steady_residual,
    };
    dir.write(PROFILE_CSV, &csv_string(&["xi", "U"], profile.xi.iter().zip(&profile.values).map(|(x, u)| [*x, *u])))?;
    dir.write_json(PROFILE_JSON, &info)?;
    let manifest = dir.manifest_mut();
    manifest.status = Some(regularity_tag(profile.regularity).into());
    if timing {
        manifest.wall_clock_seconds = Some(clock.elapsed().as_secs_f64());
    }
    dir.finish()
}

/// Rebuilds a profile from a `tw` directory.
pub fn load_profile(dir: &Path) -> Result<TWProfile> {
    let info: ProfileInfo = read_json(&dir.join(PROFILE_JSON))?;
    let (xi, values) = read_columns(&dir.join(PROFILE_CSV))?;
    Ok(TWProfile {
        params: TWParams::new(info.c, info.a, info.e)?,
        xi,
        values,
        regularity: info.regularity,
        period: info.period,
        window: info.window,
    })
}

/// Random bump with support inside `[0, length]` and at least 32 grid cells per half-width.
fn random_bump(rng: &mut ChaCha8Rng, length: f64, spacing: f64) -> Result<TestFunction> {
    let (lo, hi) = (32.0 * spacing * 1.01, length / 4.0);
    if lo > hi {
        return Err(CoreError::Support(format!("window {length} too short for bumps at spacing {spacing}")).into());
    }
    let width = rng.gen_range(lo..=hi);
    let center = rng.gen_range(width * 1.001..=length - width * 1.001);
    let kind = if rng.gen_bool(0.5) { BumpKind::PolynomialBump } else { BumpKind::GaussianBumpTruncated };
    Ok(TestFunction::new(kind, center, width)?)
}

fn steady_family_report(profile: &TWProfile, rng: &mut ChaCha8Rng, count: usize) -> Result<ResidualReport> {
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let psi = random_bump(rng, profile.window, profile.spacing())?;
        let residual = steady_weak_residual(profile, &psi)?;
        entries.push(ResidualEntry { test_function: psi, time_function: None, residual, normalization: psi.mass() });
    }
    Ok(ResidualReport::new(entries))
}

fn unsteady_family_report(traj: &Trajectory, rng: &mut ChaCha8Rng, count: usize) -> Result<ResidualReport> {
    let grid = traj.grid();
    let times: Vec<f64> = traj.times().collect();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let span = t1 - t0;
    if times.len() < 3 || span <= 0.0 {
        return Err(CoreError::InsufficientSnapshots { needed: 3, got: times.len() }.into());
    }
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let psi = random_bump(rng, grid.length(), grid.spacing())?;
        let width = span * rng.gen_range(0.2..=0.45);
        let center = rng.gen_range(t0 + 1.01 * width..=t1 - 1.01 * width);
        let rho = TestFunction::new(BumpKind::PolynomialBump, center, width)?;
        let residual = unsteady_weak_residual(traj, &psi, &rho)?;
        entries.push(ResidualEntry {
            test_function: psi,
            time_function: Some(rho),
            residual,
            normalization: psi.mass() * rho.mass(),
        });
    }
    Ok(ResidualReport::new(entries))
}

/// Weak-form residuals against a seeded random family: steady for `tw`
/// directories, space-time for `simulate` runs.
pub fn weakform(dir: &Path, seed: u64, count: usize) -> Result<ResidualReport> {
    if count == 0 {
        return Err(CliError::Config("count must be positive".into()));
    }
    let mut out = OutputDir::reopen(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = match out.manifest_mut().command.as_str() {
        "tw" => steady_family_report(&load_profile(dir)?, &mut rng, count)?,
        "simulate" => unsteady_family_report(&load_trajectory(dir)?, &mut rng, count)?,
        other => return Err(CliError::format(dir, format!("cannot evaluate residuals for '{other}' output"))),
    };
    out.write_json(WEAKFORM_JSON, &json!({ "seed": seed, "report": report }))?;
    out.manifest_mut().seed = Some(seed);
    out.finish()?;
    Ok(report)
}

/// Headline row of one sweep point.
struct PointOutcome {
    status: String,
    columns: [f64; 3],
}

fn run_point(spec: &SweepSpec, base: &Path, value: f64, out: &Path) -> Result<PointOutcome> {
    let mut input = spec.template.clone();
    set_path(&mut input, &spec.parameter, json!(value))?;
    match spec.command {
        SweepCommand::Simulate => {
            let manifest = simulate(input, base, out, false)?;
            let (t, sup, slope) = last_diagnostics(out)?;
            Ok(PointOutcome { status: manifest.status.unwrap_or_default(), columns: [t, sup, slope] })
        }
        SweepCommand::Tw => {
            let manifest = tw(input, out, false)?;
            let info: ProfileInfo = read_json(&out.join(PROFILE_JSON))?;
            let residual = info.steady_residual.map_or(f64::NAN, |r| r.max_abs_residual);
            Ok(PointOutcome {
                status: manifest.status.unwrap_or_default(),
                columns: [info.amplitude, info.period.unwrap_or(f64::NAN), residual],
            })
        }
    }
}

fn last_diagnostics(run: &Path) -> Result<(f64, f64, f64)> {
    let path = run.join(DIAGNOSTICS_CSV);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let last = text.lines().rfind(|l| !l.trim().is_empty()).unwrap_or_default();
    let cells: Vec<f64> = last.split(',').filter_map(|c| c.parse().ok()).collect();
    match cells.as_slice() {
        [t, _, sup, slope] => Ok((*t, *sup, *slope)),
        _ => Err(CliError::format(path, "no diagnostics rows")),
    }
}

/// Run every point of a sweep on `workers` threads, one directory per point.
///
/// Point outputs never depend on scheduling; failures are recorded in the
/// aggregate table and the manifest notes without stopping the sweep.
pub fn sweep(input: Value, base: &Path, out: &Path, workers: usize, timing: bool) -> Result<Manifest> {
    let clock = Instant::now();
    let spec: SweepSpec = from_value(input.clone(), base)?;
    if spec.values.is_empty() || !spec.values.iter().all(|v| v.is_finite()) {
        return Err(CliError::Config("sweep values must be a non-empty list of finite numbers".into()));
    }
    if workers == 0 {
        return Err(CliError::Config("workers must be positive".into()));
    }
    let mut dir = OutputDir::create(out, Manifest::new("sweep", input))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let points: Vec<(String, PathBuf)> =
        (0..spec.values.len()).map(|i| format!("point_{i:04}")).map(|name| (name.clone(), out.join(name))).collect();
    let outcomes: Vec<Result<PointOutcome>> = pool.install(|| {
        spec.values.par_iter().zip(&points).map(|(v, (_, path))| run_point(&spec, base, *v, path)).collect()
    });

    let header = match spec.command {
        SweepCommand::Simulate => "index,value,status,final_time,sup_norm,max_slope",
        SweepCommand::Tw => "index,value,status,amplitude,period,max_abs_residual",
    };
    let mut table = format!("{header}\n");
    for (i, ((value, outcome), (name, _))) in spec.values.iter().zip(&outcomes).zip(&points).enumerate() {
        let (status, columns) = match outcome {
            Ok(p) => (p.status.clone(), p.columns),
            Err(e) => {
                dir.manifest_mut().notes.push(format!("{name}: {}", e.one_line()));
                (format!("error:{}", e.kind()), [f64::NAN; 3])
            }
        };
        let cells: Vec<String> = columns.iter().map(|v| fmt_num(*v)).collect();
        table.push_str(&format!("{i},{},{status},{}\n", fmt_num(*value), cells.join(",")));
    }
    dir.write(SWEEP_CSV, &table)?;
    let failed = outcomes.iter().filter(|o| o.is_err()).count();
    let manifest = dir.manifest_mut();
    manifest.status = Some(if failed == 0 { "completed".into() } else { format!("{failed} point(s) failed") });
    if timing {
        manifest.wall_clock_seconds = Some(clock.elapsed().as_secs_f64());
    }
    dir.finish()
}
