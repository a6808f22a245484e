//! `simulate`, `compare` and `verify`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hs_core::measure::bl_distance;
use hs_core::verification::{self as checks, CheckResult, HBoundSample, TestFunction, WeakQuadrature};
use hs_core::{
    sup_distance, to_lagrangian, Error, EtaSolution, EulerianState, KernelSpec, LagrangianFlow, Provenance,
    RadonMeasure1D, Result, ScaledU, Snapshot, Solution, Trajectory,
};

use crate::config::{RunConfig, SolverChoice};
use crate::scenario;

/// Resolution used for every bounded-Lipschitz distance the harness reports.
pub const BL_RESOLUTION: f64 = 1e-3;

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

/// `x,u` rows at the nodes of `u`, 17 significant digits.
pub fn snapshot_csv(s: &EulerianState) -> String {
    let mut out = String::from("x,u\n");
    for &(x, u) in s.u_nodes() {
        let _ = writeln!(out, "{x:.16e},{u:.16e}");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Lagrangian,
    Eta,
}

impl Solver {
    pub fn label(self) -> &'static str {
        match self {
            Solver::Lagrangian => "lagrangian",
            Solver::Eta => "eta",
        }
    }

    pub fn selected(choice: SolverChoice) -> Vec<Solver> {
        match choice {
            SolverChoice::Lagrangian => vec![Solver::Lagrangian],
            SolverChoice::Eta => vec![Solver::Eta],
            SolverChoice::Both => vec![Solver::Lagrangian, Solver::Eta],
        }
    }
}

fn perturb(mut traj: Trajectory, factor: Option<f64>) -> Trajectory {
    if let Some(f) = factor {
        for snap in &mut traj.snapshots {
            snap.state = snap.state.scaled_u(f);
            snap.triple = None;
            snap.eta = None;
        }
    }
    traj
}

pub fn trajectory(cfg: &RunConfig, initial: &EulerianState, solver: Solver, times: &[f64]) -> Result<Trajectory> {
    let traj = match solver {
        Solver::Lagrangian => Trajectory::lagrangian(initial, times)?,
        Solver::Eta => Trajectory::eta(initial, KernelSpec::new(cfg.n)?, cfg.grid, cfg.dt, times)?,
    };
    Ok(perturb(traj, cfg.perturb_u))
}

/// A solution that can be sampled at any time in `[0, t_end]`.
fn live_solution(cfg: &RunConfig, initial: &EulerianState, solver: Solver) -> Result<Box<dyn Solution>> {
    let base: Box<dyn Solution> = match solver {
        Solver::Eta if initial.energy() > 0.0 => {
            Box::new(EtaSolution::new(initial, KernelSpec::new(cfg.n)?, cfg.grid, cfg.dt, cfg.t_end)?)
        }
        _ => Box::new(LagrangianFlow::new(initial)?),
    };
    Ok(match cfg.perturb_u {
        Some(factor) => Box::new(ScaledU { inner: base, factor }),
        None => base,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotFiles {
    pub t: f64,
    pub csv: PathBuf,
    pub measure: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub solver: Solver,
    pub provenance: Provenance,
    pub energy: f64,
    pub breaking_times: Vec<f64>,
    pub snapshots: Vec<SnapshotFiles>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub initial_state: EulerianState,
    pub times: Vec<f64>,
    pub trajectories: Vec<TrajectoryRecord>,
}

#[derive(Serialize)]
struct MeasureFile<'a> {
    t: f64,
    energy: f64,
    measure: &'a RadonMeasure1D,
}

pub struct Simulation {
    pub manifest: Manifest,
    pub trajectories: Vec<(Solver, Trajectory)>,
}

/// Run the selected solvers and write snapshot CSVs, measure JSONs and
/// `manifest.json` under `cfg.out`, one subdirectory per solver.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    cfg.validate()?;
    let initial = scenario::load(&cfg.scenario)?;
    let times = cfg.output_times();
    let mut records = Vec::new();
    let mut trajectories = Vec::new();
    for solver in Solver::selected(cfg.solver) {
        let traj = trajectory(cfg, &initial, solver, &times)?;
        let mut files = Vec::new();
        for (k, snap) in traj.snapshots.iter().enumerate() {
            let csv = PathBuf::from(solver.label()).join(format!("u_{k:04}.csv"));
            let measure = PathBuf::from(solver.label()).join(format!("mu_{k:04}.json"));
            write_file(&cfg.out.join(&csv), &snapshot_csv(&snap.state))?;
            let body = MeasureFile { t: snap.t, energy: snap.measure.total_mass(), measure: &snap.measure };
            write_file(&cfg.out.join(&measure), &to_json(&body))?;
            files.push(SnapshotFiles { t: snap.t, csv, measure });
        }
        records.push(TrajectoryRecord {
            solver,
            provenance: traj.provenance.clone(),
            energy: traj.energy,
            breaking_times: traj.breaking_times.clone(),
            snapshots: files,
        });
        trajectories.push((solver, traj));
    }
    let manifest = Manifest { config: cfg.clone(), initial_state: initial, times, trajectories: records };
    write_file(&cfg.out.join("manifest.json"), &to_json(&manifest))?;
    Ok(Simulation { manifest, trajectories })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub sup_u: f64,
    pub energy_diff: f64,
    pub bl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub max_sup_u: f64,
    pub max_energy_diff: f64,
    pub max_bl: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Per-time discrepancy between two trajectories on the same output times.
pub fn compare_trajectories(a: &Trajectory, b: &Trajectory) -> Result<Vec<CompareRow>> {
    if a.times() != b.times() {
        return Err(Error::MismatchedTimes(format!("{:?} vs {:?}", a.times(), b.times())));
    }
    Ok(a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(p, q): (&Snapshot, &Snapshot)| CompareRow {
            t: p.t,
            sup_u: sup_distance(&p.state, &q.state),
            energy_diff: (p.measure.total_mass() - q.measure.total_mass()).abs(),
            bl: bl_distance(&p.measure, &q.measure, BL_RESOLUTION),
        })
        .collect())
}

/// Run both solvers and write `compare.json`. Passes when the largest sup
/// and energy differences stay within `tolerance`.
pub fn compare(cfg: &RunConfig, tolerance: f64) -> Result<CompareReport> {
    let cfg = RunConfig { solver: SolverChoice::Both, ..cfg.clone() };
    let sim = simulate(&cfg)?;
    let rows = compare_trajectories(&sim.trajectories[0].1, &sim.trajectories[1].1)?;
    let max = |f: fn(&CompareRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (max_sup_u, max_energy_diff, max_bl) = (max(|r| r.sup_u), max(|r| r.energy_diff), max(|r| r.bl));
    let report = CompareReport {
        pass: max_sup_u <= tolerance && max_energy_diff <= tolerance,
        rows,
        max_sup_u,
        max_energy_diff,
        max_bl,
        tolerance,
    };
    write_file(&cfg.out.join("compare.json"), &to_json(&report))?;
    Ok(report)
}

pub const CHECKS: &[&str] = &[
    "weak_residual",
    "holder",
    "lip_eta_u",
    "kr_time",
    "appendix_a1",
    "moment_growth",
    "p_moment",
    "h_bounds",
];

/// Expand `all` and reject unknown names before any work is done.
pub fn resolve_checks(names: &[String]) -> Result<Vec<&'static str>> {
    if names.is_empty() || names.iter().any(|n| n == "all") {
        return Ok(CHECKS.to_vec());
    }
    names
        .iter()
        .map(|n| CHECKS.iter().copied().find(|c| c == n).ok_or_else(|| Error::UnknownCheck(n.clone())))
        .collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Weak residual tolerance at the default quadrature.
pub const WEAK_TOLERANCE: f64 = 1e-3;
pub const WEAK_BUMPS: usize = 5;

fn weak_check(cfg: &RunConfig, initial: &EulerianState, solver: Solver) -> Result<CheckResult> {
    let sol = live_solution(cfg, initial, solver)?;
    let end_state = LagrangianFlow::new(initial)?.state_at(cfg.t_end)?;
    let xs = end_state.breakpoints();
    let x_range = (xs[0] - 0.5, xs[xs.len() - 1] + 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst: f64 = 0.0;
    let mut levels = Vec::new();
    for _ in 0..WEAK_BUMPS {
        let phi = TestFunction::random(&mut rng, cfg.t_end, x_range);
        let mut quad = WeakQuadrature::default();
        let mut per_level = Vec::new();
        for _ in 0..3 {
            per_level.push(checks::weak_residual(&*sol, &phi, quad)?);
            quad = quad.refined();
        }
        worst = worst.max(per_level[0].r1.max(per_level[0].r2));
        levels.push((phi, per_level));
    }
    Ok(CheckResult::from_margin("weak_residual", WEAK_TOLERANCE - worst)
        .fitted("max_residual_default", worst)
        .fitted("per_bump_levels", &levels)
        .param("tolerance", WEAK_TOLERANCE)
        .param("quadrature", WeakQuadrature::default()))
}

fn holder(cfg: &RunConfig, initial: &EulerianState, solver: Solver) -> Result<CheckResult> {
    let flow = LagrangianFlow::new(initial)?;
    let breaking = flow.breaking_times().into_iter().find(|&t| t <= cfg.t_end);
    let center = breaking.unwrap_or(0.5 * cfg.t_end);
    let half_window = 0.1f64.min(0.5 * cfg.t_end);
    let times = checks::sample_times(center, half_window, 0.0, cfg.t_end, 20, cfg.seed);
    let radii = checks::default_radii(5e-3);
    let sol = match solver {
        Solver::Lagrangian => live_solution(cfg, initial, solver)?,
        Solver::Eta => Box::new(trajectory(cfg, initial, solver, &times)?) as Box<dyn Solution>,
    };
    let fit = checks::holder_check(&*sol, &times, &radii)?;
    let margin = if fit.constant_field {
        0.0
    } else if breaking.is_some() {
        (fit.exponent - 0.45).min(0.55 - fit.exponent)
    } else {
        fit.exponent - 0.9
    };
    Ok(CheckResult::from_margin("holder", margin)
        .fitted("exponent", fit.exponent)
        .fitted("constant", fit.constant)
        .fitted("constant_field", fit.constant_field)
        .param("center", center)
        .param("near_breaking", breaking.is_some())
        .param("half_window", half_window))
}

fn lip(cfg: &RunConfig, initial: &EulerianState) -> Result<CheckResult> {
    let flow = LagrangianFlow::new(initial)?;
    let r = checks::lip_eta_u_check(flow.initial(), &linspace(0.0, cfg.t_end, 41));
    Ok(CheckResult::from_margin("lip_eta_u", 1.0 + 1e-6 - r.max_ratio)
        .fitted("max_ratio", r.max_ratio)
        .fitted("worst_time", r.worst_time)
        .param("samples", 41))
}

pub const KR_PAIRS: usize = 50;

fn kr(cfg: &RunConfig, initial: &EulerianState, solver: Solver) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6b72);
    let lo = 0.25 * cfg.t_end;
    let pairs: Vec<(f64, f64)> =
        (0..KR_PAIRS).map(|_| (rng.gen_range(lo..=cfg.t_end), rng.gen_range(lo..=cfg.t_end))).collect();
    let mut times: Vec<f64> = pairs.iter().flat_map(|p| [p.0, p.1]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let traj = trajectory(cfg, initial, solver, &times)?;
    let r = checks::kr_time_check(&traj, &pairs, BL_RESOLUTION, None)?;
    Ok(CheckResult::from_margin("kr_time", r.min_slack)
        .fitted("worst_pair", r.worst_pair)
        .fitted("worst_distance", r.worst_distance)
        .fitted("worst_bound", r.worst_bound)
        .param("pairs", KR_PAIRS)
        .param("resolution", BL_RESOLUTION))
}

/// A label inside the cell where `U` varies most at time `t`: whichever of
/// the one-third and two-thirds points has the larger `|U|`, so it stays
/// clear of nodes and of points where `U` vanishes.
pub fn a1_label(initial: &EulerianState, t: f64) -> Result<f64> {
    let state = LagrangianFlow::new(initial)?.state_at(t)?;
    let x = to_lagrangian(&state, hs_core::lagrangian::DEFAULT_PAD)?;
    let i = (0..x.cells())
        .max_by(|&a, &b| (x.u[a + 1] - x.u[a]).abs().total_cmp(&(x.u[b + 1] - x.u[b]).abs()))
        .unwrap_or(0);
    let at = |f: f64| x.xi[i] + f * (x.xi[i + 1] - x.xi[i]);
    let (a, b) = (at(1.0 / 3.0), at(2.0 / 3.0));
    Ok(if x.eval(a).1.abs() >= x.eval(b).1.abs() { a } else { b })
}

fn a1(cfg: &RunConfig, initial: &EulerianState) -> Result<CheckResult> {
    let spec = KernelSpec::new(cfg.n)?;
    let t = 1.0f64.min(0.5 * cfg.t_end);
    let seq: Vec<f64> = (4..=10).map(|k| t - t * 0.5f64.powi(k)).collect();
    let xi = a1_label(initial, t)?;
    let with = checks::appendix_a1_order(initial, spec, xi, t, &seq, true)?;
    let without = checks::appendix_a1_order(initial, spec, xi, t, &seq, false)?;
    let margin = match (with.order, without.order) {
        (None, _) => 0.0,
        (Some(w), None) => w - 1.4,
        (Some(w), Some(wo)) => (w - 1.4).min(1.1 - wo),
    };
    Ok(CheckResult::from_margin("appendix_a1", margin)
        .fitted("order", with.order)
        .fitted("order_without_corrections", without.order)
        .fitted("errors", &with.errors)
        .param("t", t)
        .param("xi", xi))
}

fn moment_snapshots(cfg: &RunConfig, initial: &EulerianState, solver: Solver) -> Result<(Vec<f64>, Trajectory)> {
    let times = linspace(0.0, cfg.t_end, 17);
    let traj = trajectory(cfg, initial, solver, &times)?;
    Ok((times, traj))
}

fn moments(cfg: &RunConfig, traj: &Trajectory, times: &[f64]) -> Result<CheckResult> {
    let fit = checks::moment_growth_check(traj, times, cfg.gamma)?;
    let margin = if fit.c_tilde.is_finite() { 0.0 } else { -1.0 };
    Ok(CheckResult::from_margin("moment_growth", margin)
        .fitted("c_tilde", fit.c_tilde)
        .fitted("moments", &fit.moments)
        .param("gamma", cfg.gamma))
}

pub const P_MOMENT_TOLERANCE: f64 = 1e-6;

fn p_moments(cfg: &RunConfig, traj: &Trajectory) -> Result<CheckResult> {
    let spec = KernelSpec::new(cfg.n)?;
    let mut margin = f64::INFINITY;
    let mut rows = Vec::new();
    for snap in &traj.snapshots {
        let r = checks::p_moment_check(&snap.measure, spec, cfg.gamma, P_MOMENT_TOLERANCE * 1e-2)?;
        margin = margin.min(r.bound - r.p_moment + P_MOMENT_TOLERANCE);
        rows.push((snap.t, r));
    }
    Ok(CheckResult::from_margin("p_moment", margin)
        .fitted("samples", &rows)
        .param("gamma", cfg.gamma)
        .param("n", cfg.n)
        .param("tolerance", P_MOMENT_TOLERANCE))
}

fn h_bounds(cfg: &RunConfig, initial: &EulerianState) -> Result<CheckResult> {
    let times: Vec<f64> = (1..=20).map(|k| cfg.t_end * k as f64 / 20.0).collect();
    let traj = Trajectory::eta(initial, KernelSpec::new(cfg.n)?, cfg.grid, cfg.dt, &times)?;
    let samples: Vec<HBoundSample> = traj.snapshots.iter().filter_map(|s| s.eta.as_ref()).map(HBoundSample::of).collect();
    let margin = samples.iter().map(HBoundSample::slack).fold(f64::INFINITY, f64::min);
    Ok(CheckResult::from_margin("h_bounds", if samples.is_empty() { 0.0 } else { margin })
        .fitted("samples", &samples)
        .param("grid", cfg.grid)
        .param("dt", cfg.dt)
        .param("n", cfg.n))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub results: Vec<CheckResult>,
    pub pass: bool,
}

fn tagged(mut r: CheckResult, solver: Solver, tag: bool) -> CheckResult {
    if tag {
        r.name = format!("{}/{}", r.name, solver.label());
    }
    r.param("solver", solver)
}

/// Run the named checks and write `verify.json`.
pub fn verify(cfg: &RunConfig, names: &[String]) -> Result<VerifyReport> {
    cfg.validate()?;
    let selected = resolve_checks(names)?;
    let initial = scenario::load(&cfg.scenario)?;
    let solvers = Solver::selected(cfg.solver);
    let tag = solvers.len() > 1;
    let mut results = Vec::new();
    let mut moment_cache: Vec<(Solver, Vec<f64>, Trajectory)> = Vec::new();
    for name in selected {
        match name {
            "lip_eta_u" => results.push(lip(cfg, &initial)?),
            "appendix_a1" => results.push(a1(cfg, &initial)?),
            "h_bounds" => results.push(h_bounds(cfg, &initial)?),
            _ => {
                for &solver in &solvers {
                    let r = match name {
                        "weak_residual" => weak_check(cfg, &initial, solver)?,
                        "holder" => holder(cfg, &initial, solver)?,
                        "kr_time" => kr(cfg, &initial, solver)?,
                        "moment_growth" | "p_moment" => {
                            if !moment_cache.iter().any(|c| c.0 == solver) {
                                let (times, traj) = moment_snapshots(cfg, &initial, solver)?;
                                moment_cache.push((solver, times, traj));
                            }
                            let (_, times, traj) = moment_cache.iter().find(|c| c.0 == solver).unwrap();
                            if name == "moment_growth" {
                                moments(cfg, traj, times)?
                            } else {
                                p_moments(cfg, traj)?
                            }
                        }
                        other => return Err(Error::UnknownCheck(other.to_string())),
                    };
                    results.push(tagged(r, solver, tag));
                }
            }
        }
    }
    let pass = results.iter().all(|r| r.pass);
    let report = VerifyReport { config: cfg.clone(), results, pass };
    write_file(&cfg.out.join("verify.json"), &to_json(&report))?;
    Ok(report)
}
