//! Command-line interface. Exit codes: 0 ok, 1 usage or input error,
//! 2 solver diagnostic.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use bdry_fronts::boundary::{solve_boundary_riemann, solve_boundary_riemann_star, TraceRelation};
use bdry_fronts::riemann::solve_riemann;
use bdry_fronts::State;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::experiments::{compare_limits, estimate_suite, stable_within, EstimateConfig, SuiteKind};
use crate::output::{self, num, state_cells, state_header, Table};
use crate::report::{config_hash, Check, ExperimentReport, RunReport};
use crate::scenario::{Resolved, Scenario, ScenarioError, SystemSpec, Task};

#[derive(Debug, Parser)]
#[command(name = "bdry-fronts", version, about = "Front tracking for boundary value problems of conservation laws")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Seed for randomized suites (overrides the scenario seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads for independent runs.
    #[arg(long, global = true, env = "BDRY_FRONTS_JOBS", default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a Riemann problem and sample the fan.
    Riemann {
        /// Preset name, inline JSON or JSON file.
        #[arg(long)]
        system: String,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        left: State,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        right: State,
        /// `lo:hi:n` grid of `ξ = x/t`.
        #[arg(long, default_value = "-3:3:601", allow_hyphen_values = true)]
        sample_grid: String,
    },
    /// Solve a boundary Riemann problem.
    BoundaryRiemann {
        #[arg(long)]
        system: String,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        interior: State,
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
        boundary_datum: State,
        #[arg(long, default_value = "simD", value_parser = parse_relation)]
        relation: TraceRelation,
        #[arg(long, default_value = "0:3:301", allow_hyphen_values = true)]
        sample_grid: String,
    },
    /// Front tracking for a scenario.
    FrontTrack {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Comma-separated sample times.
        #[arg(long, value_delimiter = ',')]
        sample_times: Option<Vec<f64>>,
    },
    /// Viscous reference solution for a scenario.
    Viscous {
        #[arg(long)]
        scenario: PathBuf,
        /// Replaces the scenario system.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Grid spacing; default `0.2 ε L`.
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Compare traces across viscosity matrices.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Boundary-hit interaction estimate on a randomized suite.
    EstimateSuite {
        #[arg(long, value_enum, default_value = "burgers")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.005")]
        deltas: Vec<f64>,
    },
    /// Every task listed in a scenario, with one report.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SuiteArg {
    Burgers,
    Euler,
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"))).collect()
}

fn parse_state(s: &str) -> Result<State, String> {
    let v = parse_list(s)?;
    if v.is_empty() {
        return Err("empty state".into());
    }
    Ok(State::from_vec(v))
}

fn parse_relation(s: &str) -> Result<TraceRelation, String> {
    s.parse().map_err(|e: bdry_fronts::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CmdError> {
    let p: Vec<&str> = s.split(':').collect();
    let bad = || CmdError::Usage(format!("sample grid `{s}` is not lo:hi:n"));
    if p.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = p[0].parse().map_err(|_| bad())?;
    let hi: f64 = p[1].parse().map_err(|_| bad())?;
    let n: usize = p[2].parse().map_err(|_| bad())?;
    if n < 2 || !(hi > lo) {
        return Err(bad());
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Solver(String),
}

impl CmdError {
    pub fn code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 1,
            CmdError::Solver(_) => 2,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Usage(m) | CmdError::Solver(m) => f.write_str(m),
        }
    }
}

impl From<ScenarioError> for CmdError {
    fn from(e: ScenarioError) -> Self {
        CmdError::Usage(e.to_string())
    }
}

impl From<bdry_fronts::Error> for CmdError {
    fn from(e: bdry_fronts::Error) -> Self {
        CmdError::Solver(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Usage(format!("i/o: {e}"))
    }
}

/// Parses `args` and runs the command; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CmdError> {
    let g = &cli.global;
    let jobs = g.jobs.max(1);
    let out = &g.out_dir;
    match &cli.command {
        Command::Riemann { system, left, right, sample_grid } => {
            let spec = SystemSpec::resolve(system)?;
            let sys = spec.build()?;
            check_dim(&sys, &[left, right])?;
            let grid = parse_grid(sample_grid)?;
            let fan = solve_riemann(&sys, left, right)?;
            output::fan_samples(&sys, &fan, &grid).write(&out.join("fan.csv"))?;
            output::wave_summary(&fan.waves).write(&out.join("waves.csv"))?;
            let mut report = ExperimentReport::new("riemann", &(&spec, left.as_slice(), right.as_slice(), &grid));
            let mut run = RunReport::new("riemann", report.config_hash.clone());
            run.metric("waves", fan.waves.len() as f64);
            run.metric("total_strength", fan.waves.iter().map(|w| w.strength.abs()).sum());
            report.runs.push(run);
            report.write(&out.join("report.json"))?;
        }
        Command::BoundaryRiemann { system, interior, boundary_datum, relation, sample_grid } => {
            let spec = SystemSpec::resolve(system)?;
            let sys = spec.build()?;
            check_dim(&sys, &[interior, boundary_datum])?;
            let grid = parse_grid(sample_grid)?;
            let fan = match relation {
                TraceRelation::SimD => solve_boundary_riemann(&sys, interior, boundary_datum)?,
                TraceRelation::Star => solve_boundary_riemann_star(&sys, interior, boundary_datum)?,
            };
            output::wave_summary(fan.zero_speed.iter().chain(&fan.waves)).write(&out.join("boundary_waves.csv"))?;
            let n = sys.dim();
            let mut states = Table::new(std::iter::once("role".to_string()).chain(state_header("v", n)));
            for (role, v) in [("datum", boundary_datum), ("lower", &fan.lower), ("trace", &fan.trace), ("interior", interior)] {
                let mut row = vec![role.to_string()];
                row.extend(state_cells(v));
                states.push(row);
            }
            states.write(&out.join("boundary_states.csv"))?;
            let mut samples = Table::new(std::iter::once("xi".to_string()).chain(state_header("v", n)));
            for &xi in grid.iter().filter(|&&x| x > 0.0) {
                let mut row = vec![num(xi)];
                row.extend(state_cells(&fan.sample(&sys, xi)));
                samples.push(row);
            }
            samples.write(&out.join("boundary_fan.csv"))?;
            let mut layer = Table::new(std::iter::once("y".to_string()).chain(state_header("w", n)));
            if let Some(p) = &fan.layer {
                for (y, w) in p.grid.iter().zip(&p.values) {
                    let mut row = vec![num(*y)];
                    row.extend(state_cells(w));
                    layer.push(row);
                }
            }
            layer.write(&out.join("layer.csv"))?;
            let cfg = (&spec, interior.as_slice(), boundary_datum.as_slice(), relation, &grid);
            let mut report = ExperimentReport::new("boundary-riemann", &cfg);
            let mut run = RunReport::new("boundary-riemann", report.config_hash.clone());
            run.metric("xi", fan.center_size);
            run.metric("outgoing_strength", fan.outgoing_strength());
            if let Some(p) = &fan.layer {
                run.metric("layer_endpoint_residual", p.endpoint_residual);
                run.metric("layer_beta_residual", p.beta_residual);
            }
            report.runs.push(run);
            report.write(&out.join("report.json"))?;
        }
        Command::FrontTrack { scenario, delta, t_end, sample_times } => {
            let mut sc = load(scenario, g.seed)?;
            if let Some(d) = delta {
                sc.deltas = vec![*d];
            }
            if let Some(t) = t_end {
                sc.t_end = *t;
                sc.sample_times.retain(|&s| s <= *t);
            }
            if let Some(s) = sample_times {
                sc.sample_times = s.clone();
            }
            sc.tasks = vec![Task::FrontTrack];
            finish(run_scenario(sc.resolve()?, out, jobs)?, out)?;
        }
        Command::Viscous { scenario, system, epsilon, dx, t_end } => {
            let mut sc = load(scenario, g.seed)?;
            if let Some(s) = system {
                sc.system = SystemSpec::resolve(s)?;
                sc.viscosities.clear();
            }
            if let Some(e) = epsilon {
                sc.epsilons = vec![*e];
            }
            if sc.epsilons.is_empty() {
                sc.epsilons = vec![1e-3];
            }
            if let Some(h) = dx {
                if sc.epsilons.len() != 1 {
                    return Err(CmdError::Usage("--dx needs a single epsilon".into()));
                }
                sc.viscous.dx_per_epsilon = h / (sc.epsilons[0] * sc.viscous.length);
            }
            if let Some(t) = t_end {
                sc.t_end = *t;
                sc.sample_times.retain(|&s| s <= *t);
            }
            sc.tasks = vec![Task::Viscous];
            finish(run_scenario(sc.resolve()?, out, jobs)?, out)?;
        }
        Command::Compare { scenario } => {
            let mut sc = load(scenario, g.seed)?;
            sc.tasks = vec![Task::Compare];
            finish(run_scenario(sc.resolve()?, out, jobs)?, out)?;
        }
        Command::Run { scenario } => {
            let sc = load(scenario, g.seed)?;
            finish(run_scenario(sc.resolve()?, out, jobs)?, out)?;
        }
        Command::EstimateSuite { suite, runs, deltas } => {
            if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
                return Err(CmdError::Usage("deltas must be positive".into()));
            }
            let kind = match suite {
                SuiteArg::Burgers => SuiteKind::Burgers,
                SuiteArg::Euler => SuiteKind::Euler,
            };
            let mut cfg = EstimateConfig::new(kind, *runs);
            cfg.deltas = deltas.clone();
            let seed = g.seed.unwrap_or(0);
            let res = estimate_suite(&cfg, seed, jobs);
            let mut t = Table::new(["delta", "run", "tau", "s_abs", "varsigma_neg", "xi_abs", "delta_v", "ratio"]);
            for r in &res.rows {
                t.push(vec![
                    num(r.delta),
                    r.run.to_string(),
                    num(r.tau),
                    num(r.s_abs),
                    num(r.varsigma_neg),
                    num(r.xi_abs),
                    num(r.delta_v),
                    num(r.ratio),
                ]);
            }
            t.write(&out.join("scatter.csv"))?;
            let mut report = ExperimentReport::new("estimate-suite", &(&cfg, seed));
            for (d, c, hits, aborted) in &res.fits {
                let mut run = RunReport::new(format!("delta={d}"), config_hash(&(&cfg, seed, d)));
                run.metric("fitted_c", *c);
                run.metric("hits", *hits as f64);
                run.metric("aborted", *aborted as f64);
                report.runs.push(run);
            }
            for e in &res.errors {
                report.runs.push(RunReport::failed("aborted", report.config_hash.clone(), e));
            }
            let finite = res.rows.iter().all(|r| r.ratio.is_finite());
            report.checks.push(Check::at_least("ratios finite", finite as u8 as f64, 1.0));
            if res.fits.len() >= 2 {
                let (a, b) = (res.fits[0].1.max(0.0), res.fits[1].1.max(0.0));
                let ok = stable_within(a, b, 2.0, 1e-9);
                report.checks.push(Check::at_least("fitted C stable within x2", ok as u8 as f64, 1.0));
            }
            report.fitted_c = res.fits.iter().map(|f| f.1).reduce(f64::max);
            report.write(&out.join("report.json"))?;
        }
    }
    Ok(())
}

fn check_dim(sys: &bdry_fronts::system::SystemDef, states: &[&State]) -> Result<(), CmdError> {
    if states.iter().any(|s| s.len() != sys.dim()) {
        return Err(CmdError::Usage(format!("states must have {} components", sys.dim())));
    }
    Ok(())
}

fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, CmdError> {
    let mut sc = Scenario::load(path)?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    Ok(sc)
}

fn finish(report: ExperimentReport, out: &Path) -> Result<(), CmdError> {
    report.write(&out.join("report.json"))?;
    if let Some(r) = report.runs.iter().find(|r| r.error.is_some()) {
        return Err(CmdError::Solver(format!("{}: {}", r.label, r.error.as_deref().unwrap_or(""))));
    }
    Ok(())
}

fn run_dir(out: &Path, multiple: bool, label: &str, tag: &str) -> PathBuf {
    if multiple {
        out.join(format!("{label}-{tag}"))
    } else {
        out.to_path_buf()
    }
}

/// Runs every task of a resolved scenario, writes its CSVs under `out` and
/// returns the report (also the caller's to persist). Solver failures are
/// recorded per run without aborting sibling runs.
pub fn run_scenario(res: Resolved, out: &Path, jobs: usize) -> Result<ExperimentReport, CmdError> {
    let sc = &res.scenario;
    let mut report = ExperimentReport::new(if sc.name.is_empty() { "scenario" } else { &sc.name }, sc);
    let tasks = sc.tasks();
    if tasks.contains(&Task::FrontTrack) {
        front_track_task(&res, out, jobs, &mut report)?;
    }
    if tasks.contains(&Task::Viscous) {
        viscous_task(&res, out, jobs, &mut report)?;
    }
    if tasks.contains(&Task::Compare) {
        compare_task(&res, out, jobs, &mut report)?;
    }
    // merge order: config hash, then label
    report.runs.sort_by(|a, b| (&a.config_hash, &a.label).cmp(&(&b.config_hash, &b.label)));
    Ok(report)
}

fn front_track_task(res: &Resolved, out: &Path, jobs: usize, report: &mut ExperimentReport) -> Result<(), CmdError> {
    use bdry_fronts::front_tracking::run;
    let sc = &res.scenario;
    let mut list = Vec::new();
    for v in 0..res.variants.len() {
        for &d in &sc.deltas {
            list.push((v, d));
        }
    }
    let multiple = list.len() > 1;
    let outcomes = crate::experiments::par_map(jobs, list, |(v, d)| {
        let tc = sc.tracking_config(d);
        let hash = config_hash(&(&res.variants[v].1, &tc, &sc.initial, &sc.boundary));
        (v, d, hash, run(&res.variants[v].2, &res.initial, &res.boundary, &tc))
    });
    for (v, d, hash, outcome) in outcomes {
        let (label, _, sys) = &res.variants[v];
        let name = format!("front-track/{label}/delta={d}");
        match outcome {
            Ok(tr) => {
                let dir = run_dir(out, multiple, label, &format!("delta{d}"));
                let x_min = if sc.domain == bdry_fronts::front_tracking::Domain::HalfLine { 0.0 } else { f64::NEG_INFINITY };
                output::profiles(&tr.profiles, sys.dim(), x_min).write(&dir.join("profiles.csv"))?;
                output::interactions(&tr.records).write(&dir.join("interactions.csv"))?;
                output::functional(&tr).write(&dir.join("functional.csv"))?;
                let mut r = RunReport::new(name, hash);
                r.metric("delta", d);
                r.metric("initial_size", tr.initial_size);
                r.metric("sup_tv", tr.sup_tv);
                r.metric("final_tv", tr.final_state.spatial_tv());
                r.metric("events", tr.events as f64);
                r.metric("max_fronts", tr.max_fronts as f64);
                let ups = |i: usize| tr.functional[i].1.total;
                r.metric("upsilon_initial", ups(0));
                r.metric("upsilon_final", ups(tr.functional.len() - 1));
                let rise = tr.records.iter().map(|x| x.glimm_after.total - x.glimm_before.total).fold(0.0, f64::max);
                r.metric("max_upsilon_increase", rise);
                if let Some(b) = &tr.final_state.boundary {
                    r.metric("xi_final", b.xi);
                }
                for (i, x) in tr.final_state.base.iter().enumerate() {
                    r.metric(&format!("trace_v{}", i + 1), *x);
                }
                report.runs.push(r);
            }
            Err(e) => report.runs.push(RunReport::failed(name, hash, e)),
        }
    }
    Ok(())
}

fn viscous_task(res: &Resolved, out: &Path, jobs: usize, report: &mut ExperimentReport) -> Result<(), CmdError> {
    use bdry_fronts::viscous::viscous_solve;
    let sc = &res.scenario;
    let mut list = Vec::new();
    for v in 0..res.variants.len() {
        for &e in &sc.epsilons {
            list.push((v, e));
        }
    }
    let multiple = list.len() > 1;
    let outcomes = crate::experiments::par_map(jobs, list, |(v, e)| {
        let vc = sc.viscous_config(e);
        let hash = config_hash(&(&res.variants[v].1, &vc, &sc.initial, &sc.boundary));
        (v, e, hash, viscous_solve(&res.variants[v].2, &res.initial, &res.boundary, &vc))
    });
    for (v, e, hash, outcome) in outcomes {
        let (label, _, sys) = &res.variants[v];
        let name = format!("viscous/{label}/epsilon={e}");
        match outcome {
            Ok(sol) => {
                let dir = run_dir(out, multiple, label, &format!("eps{e}"));
                let n = sys.dim();
                let mut prof = Table::new(["t", "x"].into_iter().map(String::from).chain(state_header("v", n)));
                for p in &sol.profiles {
                    for (x, v) in p.x.iter().zip(&p.v) {
                        let mut row = vec![num(p.t), num(*x)];
                        row.extend(state_cells(v));
                        prof.push(row);
                    }
                }
                prof.write(&dir.join("viscous_profile.csv"))?;
                let mut tr = Table::new(std::iter::once("t".to_string()).chain(state_header("vbar", n)));
                for (t, v) in &sol.traces {
                    let mut row = vec![num(*t)];
                    row.extend(state_cells(v));
                    tr.push(row);
                }
                tr.write(&dir.join("trace_estimate.csv"))?;
                let mut r = RunReport::new(name, hash);
                r.metric("epsilon", e);
                r.metric("steps", sol.steps as f64);
                if let Some((_, v)) = sol.traces.last() {
                    for (i, x) in v.iter().enumerate() {
                        r.metric(&format!("trace_v{}", i + 1), *x);
                    }
                }
                report.runs.push(r);
            }
            Err(err) => report.runs.push(RunReport::failed(name, hash, err)),
        }
    }
    Ok(())
}

fn compare_task(res: &Resolved, out: &Path, jobs: usize, report: &mut ExperimentReport) -> Result<(), CmdError> {
    let sc = &res.scenario;
    let table = compare_limits(res, jobs);
    let n = res.variants[0].2.dim();
    let mut t = Table::new(
        ["label", "source", "epsilon"].into_iter().map(String::from).chain(state_header("vbar", n)).chain(["discrepancy".to_string(), "config_hash".to_string()]),
    );
    for r in &table.rows {
        let mut row = vec![r.label.clone(), r.source.to_string(), output::opt(r.epsilon)];
        row.extend(state_cells(&r.trace));
        row.push(num(r.discrepancy));
        row.push(r.config_hash.clone());
        t.push(row);
    }
    t.write(&out.join("compare.csv"))?;
    let smallest = sc.epsilons.iter().copied().reduce(f64::min);
    for (label, _, _) in &res.variants {
        if let (Some(o), Some(e)) = (table.find(label, "linear-oracle", None), smallest) {
            if let Some(v) = table.find(label, "viscous", Some(e)) {
                let gap = crate::experiments::max_abs_diff(&v.trace, &o.trace);
                report.checks.push(Check::at_most(&format!("{label}: viscous trace vs closed form"), gap, sc.tolerances.trace));
            }
        }
    }
    if table.rows.iter().any(|r| r.source == "cauchy-viscous") {
        report.checks.push(Check::at_most(
            "Cauchy traces independent of the viscosity",
            table.max_discrepancy("cauchy-viscous"),
            sc.tolerances.cauchy,
        ));
    }
    report.runs.extend(table.runs);
    Ok(())
}
