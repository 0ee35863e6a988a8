//! Acceptance suite: one PASS/FAIL line per criterion, run in order so the
//! wall-clock budgets are meaningful on a single core.

use std::path::Path;
use std::time::{Duration, Instant};

use bdry_fronts::boundary::{
    linear_boundary_trace, solve_boundary_layer, solve_boundary_riemann, solve_boundary_riemann_star,
    LinearBoundaryProblem,
};
use bdry_fronts::front_tracking::Datum;
use bdry_fronts::system::{burgers, linear, p_system, PSystemViscosity};
use bdry_fronts::viscous::{viscous_solve, ViscousConfig};
use bdry_fronts::State;
use bdry_fronts_cli::experiments::{
    estimate_suite, residual_suite, riemann_oracle_suite, stable_within, tv_suite, EstimateConfig, OracleConfig,
    ResidualConfig, SuiteKind, TvConfig,
};
use bdry_fronts_cli::run_cli;
use nalgebra::DMatrix;

const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn st(x: &[f64]) -> State {
    State::from_vec(x.to_vec())
}

fn gisclon_a() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])
}

fn coupled() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0])
}

fn criterion_1() -> Outcome {
    let (v0, vb) = (st(&[0.0, 0.0]), st(&[1.0, 1.0]));
    let mut detail = String::new();
    let mut pass = true;
    for (d, expected) in [(DMatrix::identity(2, 2), st(&[0.0, 1.0])), (coupled(), st(&[0.0, 1.5]))] {
        let prob = LinearBoundaryProblem::new(gisclon_a(), d.clone(), v0.clone(), vb.clone()).unwrap();
        let closed = linear_boundary_trace(&prob).unwrap().trace;
        let closed_err = (&closed - &expected).amax();
        // interior reference off the origin keeps the data inside the ball
        let sys = linear(gisclon_a(), d, Some(st(&[0.5, 0.5])), Some(2.0)).unwrap();
        let cfg = ViscousConfig { epsilon: 1e-3, dx: 2e-4, length: 1.0, t_end: 0.1, ..ViscousConfig::default() };
        let sol = viscous_solve(&sys, &Datum::constant(&v0), &Datum::constant(&vb), &cfg).unwrap();
        let visc = sol.traces.last().unwrap().1.clone();
        let visc_err = (&visc - &expected).amax();
        pass &= closed_err <= 1e-12 && visc_err <= 5e-2;
        detail += &format!("closed-form err {closed_err:.1e}, viscous err {visc_err:.2e}; ");
    }
    Outcome { pass, detail }
}

fn criterion_2() -> Outcome {
    let sys = p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap();
    let r = riemann_oracle_suite(&sys, &OracleConfig::default(), SEED, 1);
    let (a, b) = (r.max_ratio(0), r.max_ratio(1));
    let pass = r.failures.is_empty() && a <= 3.0 && b <= 3.0 && stable_within(a, b, 2.0, 0.0);
    Outcome {
        pass,
        detail: format!("max L1/delta {a:.4} (delta 1e-2), {b:.4} (delta 5e-3), failures {}", r.failures.len()),
    }
}

fn criterion_3() -> Outcome {
    let sys = p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap();
    let r = tv_suite(&sys, &TvConfig::default(), SEED, 1);
    let failed = r.runs.iter().filter(|x| x.error.is_some()).count();
    let (tv, mono) = (r.worst_tv_ratio(), r.monotone_fraction());
    Outcome {
        pass: failed == 0 && tv <= 3.0 && mono >= 0.99,
        detail: format!("{} runs, {failed} aborted, sup TV / initial {tv:.3}, C0 {}, non-increasing {mono:.4}", r.runs.len(), r.c0),
    }
}

fn criterion_4(out: &Path) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (kind, runs, name) in [(SuiteKind::Burgers, 250, "burgers"), (SuiteKind::Euler, 40, "euler")] {
        let cfg = EstimateConfig::new(kind, runs);
        let r = estimate_suite(&cfg, SEED, 1);
        let finite = r.rows.iter().all(|x| x.ratio.is_finite());
        let enough = r.fits.iter().all(|f| f.2 >= 200);
        // the estimate bounds increases only; decreases fit C = 0
        let c: Vec<f64> = r.fits.iter().map(|f| f.1.max(0.0)).collect();
        let stable = stable_within(c[0], c[1], 2.0, 1e-9);
        let path = out.join(format!("{name}_scatter.csv"));
        let mut w = csv::Writer::from_path(&path).unwrap();
        for row in &r.rows {
            w.serialize(row).unwrap();
        }
        w.flush().unwrap();
        pass &= finite && enough && stable && path.exists();
        let hits: Vec<usize> = r.fits.iter().map(|f| f.2).collect();
        let raw: Vec<String> = r.fits.iter().map(|f| format!("{:.3e}", f.1)).collect();
        detail += &format!("{name}: hits {hits:?}, max ratio {raw:?}, C {c:?}, aborted {}; ", r.errors.len());
    }
    Outcome { pass, detail }
}

fn criterion_5() -> Outcome {
    let sys = burgers(0.0, Some(0.0), Some(3.0)).unwrap();
    let p = solve_boundary_layer(&sys, &st(&[-1.0]), &st(&[0.0])).unwrap();
    let err = p.map_or(f64::INFINITY, |p| {
        (0..=4000).map(|i| 20.0 * i as f64 / 4000.0).map(|y| (p.eval(y)[0] + (0.5 * y).tanh()).abs()).fold(0.0, f64::max)
    });
    let absent = solve_boundary_layer(&sys, &st(&[1.0]), &st(&[0.0])).unwrap().is_none();
    Outcome { pass: err <= 1e-6 && absent, detail: format!("max |w + tanh(y/2)| {err:.2e}, no layer to +1: {absent}") }
}

fn criterion_6() -> Outcome {
    let sys = p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap();
    let r = residual_suite(&sys, &ResidualConfig::default(), SEED).unwrap();
    let (c0, c1) = (r.weak_constant(0), r.weak_constant(1));
    let (e0, e1) = (r.entropy_min(0), r.entropy_min(1));
    let c = c0.max(c1);
    let pass = stable_within(c0, c1, 2.0, 1e-12) && e0 >= -c && e1 >= -c;
    Outcome { pass, detail: format!("weak C {c0:.3e} / {c1:.3e}, min entropy residual/delta {e0:.3e} / {e1:.3e}") }
}

fn criterion_7() -> Outcome {
    let (v0, vb) = (st(&[0.0, 0.0]), st(&[1.0, 1.0]));
    let sys = |d| linear(gisclon_a(), d, Some(st(&[0.5, 0.5])), Some(2.0)).unwrap();
    let gap = |d: DMatrix<f64>| {
        let s = sys(d);
        let a = solve_boundary_riemann(&s, &v0, &vb).unwrap().trace;
        let b = solve_boundary_riemann_star(&s, &v0, &vb).unwrap().trace;
        (a - b).amax()
    };
    let (c, i) = (gap(coupled()), gap(DMatrix::identity(2, 2)));
    Outcome { pass: c >= 0.1 && i <= 1e-8, detail: format!("coupled gap {c:.4}, identity gap {i:.1e}") }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let invocations = |out: &Path| -> Vec<Vec<String>> {
        let o = |sub: &str| out.join(sub).display().to_string();
        vec![
            vec!["riemann", "--system", "p-system", "--left", "1,0", "--right", "1.05,-0.02", "--out-dir", &o("riemann")],
            vec![
                "front-track",
                "--scenario",
                &scenarios.join("p_system_steps.json").display().to_string(),
                "--out-dir",
                &o("front-track"),
            ],
            vec!["estimate-suite", "--suite", "burgers", "--runs", "8", "--seed", "5", "--out-dir", &o("estimate")],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut codes = Vec::new();
    for dir in [a.path(), b.path()] {
        for args in invocations(dir) {
            codes.push(run_cli(std::iter::once("bdry-fronts".to_string()).chain(args)));
        }
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    let csvs = fa.iter().filter(|f| f.0.ends_with(".csv")).count();
    let same = fa == fb;
    Outcome {
        pass: codes.iter().all(|&c| c == 0) && same && csvs >= 5,
        detail: format!("exit codes {codes:?}, {} files ({csvs} CSV), identical: {same}", fa.len()),
    }
}

#[test]
fn acceptance() {
    let scatter = tempfile::tempdir().unwrap();
    let criteria: Vec<(u32, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Duration::from_secs(60), Box::new(criterion_1)),
        (2, Duration::from_secs(300), Box::new(criterion_2)),
        (3, Duration::from_secs(600), Box::new(criterion_3)),
        (4, Duration::from_secs(600), Box::new(|| criterion_4(scatter.path()))),
        (5, Duration::from_secs(60), Box::new(criterion_5)),
        (6, Duration::from_secs(300), Box::new(criterion_6)),
        (7, Duration::from_secs(60), Box::new(criterion_7)),
        (8, Duration::from_secs(300), Box::new(criterion_8)),
    ];
    let mut failed = Vec::new();
    for (n, budget, f) in criteria {
        let t = Instant::now();
        let o = f();
        let elapsed = t.elapsed();
        let pass = o.pass && elapsed <= budget;
        println!(
            "{} criterion {n}: {} [{:.1} s of {} s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
