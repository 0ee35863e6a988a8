//! Randomized front-tracking suites: total-variation stability and the
//! Riemann-problem oracle.

use bdry_fronts::front_tracking::{calibrate_c0, run, Datum, Domain, InteractionRecord, TrackingConfig};
use bdry_fronts::riemann::{compose, sample_fan, solve_riemann};
use bdry_fronts::system::SystemDef;
use bdry_fronts::State;
use rand::Rng;
use serde::Serialize;

use super::{par_map, run_rng};

fn random_direction<R: Rng>(rng: &mut R, n: usize) -> State {
    loop {
        let v = State::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 0.1 {
            return v / norm;
        }
    }
}

/// Random piecewise-constant half-line data around the reference state:
/// up to `max_jumps` jumps of `v_0` in `(0, x_max)`, a boundary jump at the
/// corner and up to two jumps of `v_b` in `(0, t_end)`. The data size
/// `TV v_0 + TV v_b + |v_0(0⁺) − v_b(0⁺)|` equals `size`.
pub fn random_half_line_data<R: Rng>(
    rng: &mut R,
    sys: &SystemDef,
    size: f64,
    max_jumps: usize,
    x_max: f64,
    t_end: f64,
) -> (Datum, Datum) {
    let n = sys.dim();
    let jumps = rng.gen_range(1..=max_jumps.max(1));
    let datum_jumps = rng.gen_range(0..=2usize);
    let mut weights: Vec<f64> = (0..jumps + 1 + datum_jumps).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w *= size / total);
    let dirs: Vec<State> = (0..weights.len()).map(|_| random_direction(rng, n)).collect();
    let center = &sys.reference + random_direction(rng, n) * (0.1 * sys.radius * rng.gen::<f64>());
    let mut xs: Vec<f64> = (0..jumps).map(|_| rng.gen_range(0.02 * x_max..x_max)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut values = vec![center.clone()];
    for i in 0..xs.len() {
        let next = values[i].clone() + &dirs[i] * weights[i];
        values.push(next);
    }
    let v0 = Datum::steps(&xs, &values).expect("valid steps");
    let corner = jumps;
    let b0 = &center + &dirs[corner] * weights[corner];
    let mut ts: Vec<f64> = (0..datum_jumps).map(|_| rng.gen_range(0.05 * t_end..0.8 * t_end)).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut bvals = vec![b0];
    for i in 0..ts.len() {
        let next = bvals[i].clone() + &dirs[corner + 1 + i] * weights[corner + 1 + i];
        bvals.push(next);
    }
    let vb = Datum::steps(&ts, &bvals).expect("valid steps");
    (v0, vb)
}

#[derive(Debug, Clone, Serialize)]
pub struct TvConfig {
    pub runs: usize,
    pub delta: f64,
    pub t_end: f64,
    /// Data sizes are drawn uniformly from `[size/5, size]`.
    pub size: f64,
    pub max_jumps: usize,
    pub x_max: f64,
    /// Per-interaction slack on `Υ` in units of `δ²`.
    pub slack_factor: f64,
    /// Scenarios used only to calibrate `C₀`.
    pub calibration_runs: usize,
}

impl Default for TvConfig {
    fn default() -> Self {
        TvConfig {
            runs: 100,
            delta: 1e-2,
            t_end: 2.0,
            size: 0.05,
            max_jumps: 4,
            x_max: 1.5,
            slack_factor: 10.0,
            calibration_runs: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TvRun {
    pub index: usize,
    pub initial_size: f64,
    pub sup_tv: f64,
    pub events: usize,
    pub interactions: usize,
    /// Interactions with `Υ_after ≤ Υ_before + slack` for the calibrated `C₀`.
    pub non_increasing: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TvSuiteResult {
    pub c0: f64,
    pub runs: Vec<TvRun>,
}

impl TvSuiteResult {
    pub fn monotone_fraction(&self) -> f64 {
        let (ok, all) = self.runs.iter().fold((0, 0), |(a, b), r| (a + r.non_increasing, b + r.interactions));
        if all == 0 {
            1.0
        } else {
            ok as f64 / all as f64
        }
    }

    pub fn worst_tv_ratio(&self) -> f64 {
        self.runs.iter().filter(|r| r.error.is_none()).map(|r| r.sup_tv / r.initial_size.max(1e-300)).fold(0.0, f64::max)
    }
}

fn tv_run(sys: &SystemDef, cfg: &TvConfig, seed: u64, stream: u64) -> (TvRun, Vec<InteractionRecord>) {
    let mut rng = run_rng(seed, stream);
    let size = rng.gen_range(0.2 * cfg.size..=cfg.size);
    let (v0, vb) = random_half_line_data(&mut rng, sys, size, cfg.max_jumps, cfg.x_max, cfg.t_end);
    let tc = TrackingConfig { delta: cfg.delta, t_end: cfg.t_end, domain: Domain::HalfLine, ..TrackingConfig::default() };
    match run(sys, &v0, &vb, &tc) {
        Ok(tr) => {
            let r = TvRun {
                index: stream as usize,
                initial_size: tr.initial_size,
                sup_tv: tr.sup_tv,
                events: tr.events,
                interactions: tr.records.len(),
                non_increasing: 0,
                error: None,
            };
            (r, tr.records)
        }
        Err(e) => {
            let r = TvRun {
                index: stream as usize,
                initial_size: size,
                sup_tv: f64::NAN,
                events: 0,
                interactions: 0,
                non_increasing: 0,
                error: Some(e.to_string()),
            };
            (r, Vec::new())
        }
    }
}

/// Runs `cfg.runs` random half-line scenarios. `C₀` is calibrated first on
/// `cfg.calibration_runs` separate scenarios (streams after the suite's).
pub fn tv_suite(sys: &SystemDef, cfg: &TvConfig, seed: u64, jobs: usize) -> TvSuiteResult {
    let slack = cfg.slack_factor * cfg.delta * cfg.delta;
    let base = cfg.runs as u64;
    let calib: Vec<_> = par_map(jobs, (0..cfg.calibration_runs as u64).collect(), |i| tv_run(sys, cfg, seed, base + i).1);
    let pairs: Vec<_> = calib.iter().flatten().map(|r| (r.glimm_before, r.glimm_after)).collect();
    let c0 = calibrate_c0(&pairs, slack);
    let runs = par_map(jobs, (0..base).collect(), |i| {
        let (mut r, recs) = tv_run(sys, cfg, seed, i);
        r.non_increasing =
            recs.iter().filter(|x| x.glimm_after.with_c0(c0) - x.glimm_before.with_c0(c0) <= slack).count();
        r
    });
    TvSuiteResult { c0, runs }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleConfig {
    pub cases: usize,
    pub deltas: Vec<f64>,
    pub t_end: f64,
    /// Bound on each wave strength and on the offset of the left state.
    pub max_strength: f64,
    /// Quadrature points for the L¹ distance.
    pub quadrature: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { cases: 50, deltas: vec![1e-2, 5e-3], t_end: 1.0, max_strength: 0.05, quadrature: 20_000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// `errors[i][j]`: L¹ error of case `i` at `deltas[j]`; NaN on failure.
    pub errors: Vec<Vec<f64>>,
    pub deltas: Vec<f64>,
    pub failures: Vec<String>,
}

impl OracleResult {
    /// `max_i error_ij / δ_j`.
    pub fn max_ratio(&self, j: usize) -> f64 {
        self.errors.iter().map(|e| e[j] / self.deltas[j]).fold(0.0, f64::max)
    }
}

/// Whole-line front tracking of random Riemann problems against the exact
/// self-similar solution at `t_end`.
pub fn riemann_oracle_suite(sys: &SystemDef, cfg: &OracleConfig, seed: u64, jobs: usize) -> OracleResult {
    let n = sys.dim();
    let results = par_map(jobs, (0..cfg.cases as u64).collect(), |i| -> Result<Vec<f64>, String> {
        let mut rng = run_rng(seed, i);
        let left = &sys.reference + State::from_fn(n, |_, _| rng.gen_range(-cfg.max_strength..cfg.max_strength));
        let strengths: Vec<f64> = (0..n).map(|_| rng.gen_range(-cfg.max_strength..cfg.max_strength)).collect();
        let waves = compose(sys, &left, &strengths).map_err(|e| e.to_string())?;
        let right = waves.last().map_or(left.clone(), |w| w.right.clone());
        let fan = solve_riemann(sys, &left, &right).map_err(|e| e.to_string())?;
        let v0 = Datum::steps(&[0.0], &[left.clone(), right.clone()]).map_err(|e| e.to_string())?;
        let half = (sys.max_speed() + 0.5) * cfg.t_end.max(1e-12);
        cfg.deltas
            .iter()
            .map(|&delta| {
                let tc = TrackingConfig {
                    delta,
                    t_end: cfg.t_end,
                    domain: Domain::Line,
                    guard: None,
                    sample_times: vec![cfg.t_end],
                    ..TrackingConfig::default()
                };
                let tr = run(sys, &v0, &v0, &tc).map_err(|e| e.to_string())?;
                let prof = &tr.profiles[0].steps;
                let m = cfg.quadrature;
                let h = 2.0 * half / m as f64;
                let l1: f64 = (0..m)
                    .map(|k| {
                        let x = -half + h * (k as f64 + 0.5);
                        (prof.eval(x) - sample_fan(sys, &fan, x / cfg.t_end)).norm()
                    })
                    .sum::<f64>()
                    * h;
                Ok(l1)
            })
            .collect()
    });
    let mut errors = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => errors.push(e),
            Err(m) => {
                failures.push(format!("case {i}: {m}"));
                errors.push(vec![f64::NAN; cfg.deltas.len()]);
            }
        }
    }
    OracleResult { errors, deltas: cfg.deltas.clone(), failures }
}
