//! Lax wave curves, the self-similar Riemann solver and rarefaction
//! discretisation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_norm, newton_fd, State};
use crate::system::{eigen_structure, right_eigenvector, sorted_real_eigenvalues, FieldKind, SystemDef};

/// Number of RK4 steps used along an integral curve.
const CURVE_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveKind {
    Shock,
    Contact,
    Rarefaction,
    NonPhysical,
}

impl WaveKind {
    pub fn label(self) -> &'static str {
        match self {
            WaveKind::Shock => "shock",
            WaveKind::Contact => "contact",
            WaveKind::Rarefaction => "rarefaction",
            WaveKind::NonPhysical => "non-physical",
        }
    }
}

/// A single elementary wave. `family` is 0-based; `None` marks a
/// non-physical front.
#[derive(Debug, Clone)]
pub struct Wave {
    pub family: Option<usize>,
    pub kind: WaveKind,
    pub left: State,
    pub right: State,
    /// `(σ, σ)` for discontinuities, `(λ_k(left), λ_k(right))` for rarefactions.
    pub speeds: (f64, f64),
    pub strength: f64,
}

impl Wave {
    /// Speed at which a front carrying this wave travels.
    pub fn front_speed(&self) -> f64 {
        self.speeds.1
    }

    pub fn jump(&self) -> f64 {
        (&self.right - &self.left).norm()
    }
}

/// Self-similar solution of a Riemann problem.
#[derive(Debug, Clone)]
pub struct RiemannFan {
    pub waves: Vec<Wave>,
    /// `ω_0 = v_l, …, ω_m = v_r`, one more entry than `waves`.
    pub states: Vec<State>,
}

impl RiemannFan {
    pub fn left(&self) -> &State {
        &self.states[0]
    }
    pub fn right(&self) -> &State {
        self.states.last().expect("fan has at least one state")
    }
    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }
}

fn check_ball(sys: &SystemDef, v: &State) -> Result<()> {
    if sys.in_ball(v) && v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::SmallDataViolated { state: v.iter().copied().collect() })
    }
}

/// Right eigenvector `r_k` at `w`, oriented along `reference`.
fn aligned_eigenvector(sys: &SystemDef, w: &State, k: usize, reference: &DVector<f64>) -> Option<DVector<f64>> {
    let r = right_eigenvector(sys, w, k).ok()?;
    if sys.fields[k] == FieldKind::LinearlyDegenerate && r.dot(reference) < 0.0 {
        Some(-r)
    } else {
        Some(r)
    }
}

/// Integral curve of `r_k` through `v0`, evaluated at parameter `s`.
pub fn integral_curve(sys: &SystemDef, v0: &State, k: usize, s: f64) -> Result<State> {
    if s == 0.0 {
        return Ok(v0.clone());
    }
    let e0 = eigen_structure(sys, v0)?;
    let reference = e0.right[k].clone();
    // short curves need fewer steps for the same accuracy
    let steps = if s.abs() <= 0.1 { CURVE_STEPS / 4 } else { CURVE_STEPS };
    let h = s / steps as f64;
    let mut w = v0.clone();
    let fail = || Error::SmallDataViolated { state: v0.iter().copied().collect() };
    for _ in 0..steps {
        let k1 = aligned_eigenvector(sys, &w, k, &reference).ok_or_else(fail)?;
        let k2 = aligned_eigenvector(sys, &(&w + &k1 * (0.5 * h)), k, &reference).ok_or_else(fail)?;
        let k3 = aligned_eigenvector(sys, &(&w + &k2 * (0.5 * h)), k, &reference).ok_or_else(fail)?;
        let k4 = aligned_eigenvector(sys, &(&w + &k3 * h), k, &reference).ok_or_else(fail)?;
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(w)
}

/// Point of the `k`-Hugoniot locus through `v0` with `ℓ_k(v0)·(v − v0) = s`;
/// returns the state and the shock speed.
pub fn hugoniot_point(sys: &SystemDef, v0: &State, k: usize, s: f64) -> Result<(State, f64)> {
    let e0 = eigen_structure(sys, v0)?;
    if s == 0.0 {
        return Ok((v0.clone(), e0.values[k]));
    }
    let n = sys.dim();
    let l = e0.left[k].clone();
    let g0 = sys.conserved(v0);
    let f0 = sys.flux(v0);
    let mut x = DVector::zeros(n + 1);
    let guess = v0 + &e0.right[k] * s;
    x.rows_mut(0, n).copy_from(&guess);
    x[n] = e0.values[k] + 0.5 * s;
    for _ in 0..50 {
        let v = x.rows(0, n).into_owned();
        if !sys.law.admissible(&v) {
            break;
        }
        let sigma = x[n];
        let gv = sys.conserved(&v);
        let mut res = DVector::zeros(n + 1);
        res.rows_mut(0, n).copy_from(&(sys.flux(&v) - &f0 - (&gv - &g0) * sigma));
        res[n] = l.dot(&(&v - v0)) - s;
        if max_norm(&res) <= 1e-14 * (1.0 + max_norm(&f0)) {
            return Ok((v, sigma));
        }
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let block = sys.law.flux_jacobian(&v) - sys.law.conserved_jacobian(&v) * sigma;
        jac.view_mut((0, 0), (n, n)).copy_from(&block);
        jac.view_mut((0, n), (n, 1)).copy_from(&(-(&gv - &g0)));
        jac.view_mut((n, 0), (1, n)).copy_from(&l.transpose());
        let step = jac.lu().solve(&(-res)).ok_or_else(|| Error::SmallDataViolated {
            state: v.iter().copied().collect(),
        })?;
        x += &step;
        if max_norm(&step) <= 1e-15 * (1.0 + max_norm(&x)) {
            let v = x.rows(0, n).into_owned();
            return Ok((v, x[n]));
        }
    }
    Err(Error::SmallDataViolated { state: v0.iter().copied().collect() })
}

/// Elementary `k`-wave leaving `v0` with parameter `s`.
pub fn elementary_wave(sys: &SystemDef, v0: &State, k: usize, s: f64) -> Result<Wave> {
    if s.abs() > sys.s_max {
        return Err(Error::SmallDataViolated { state: v0.iter().copied().collect() });
    }
    let lam0 = sorted_real_eigenvalues(sys, v0)?[k];
    let wave = match sys.fields[k] {
        FieldKind::LinearlyDegenerate => {
            let v1 = integral_curve(sys, v0, k, s)?;
            Wave {
                family: Some(k),
                kind: WaveKind::Contact,
                left: v0.clone(),
                right: v1,
                speeds: (lam0, lam0),
                strength: s,
            }
        }
        FieldKind::GenuinelyNonlinear if s >= 0.0 => {
            let v1 = integral_curve(sys, v0, k, s)?;
            let lam1 = sorted_real_eigenvalues(sys, &v1)?[k];
            Wave {
                family: Some(k),
                kind: WaveKind::Rarefaction,
                left: v0.clone(),
                right: v1,
                speeds: (lam0, lam1),
                strength: s,
            }
        }
        FieldKind::GenuinelyNonlinear => {
            let (v1, sigma) = hugoniot_point(sys, v0, k, s)?;
            Wave {
                family: Some(k),
                kind: WaveKind::Shock,
                left: v0.clone(),
                right: v1,
                speeds: (sigma, sigma),
                strength: s,
            }
        }
    };
    check_ball(sys, &wave.right)?;
    Ok(wave)
}

/// State reached from `v0` along the `k`-th Lax curve at parameter `s`.
pub fn wave_curve(sys: &SystemDef, v0: &State, k: usize, s: f64) -> Result<State> {
    Ok(elementary_wave(sys, v0, k, s)?.right)
}

/// Composes waves of families `1..N` with the given strengths.
pub fn compose(sys: &SystemDef, v_l: &State, strengths: &[f64]) -> Result<Vec<Wave>> {
    let mut waves = Vec::with_capacity(strengths.len());
    let mut v = v_l.clone();
    for (k, &s) in strengths.iter().enumerate() {
        let w = elementary_wave(sys, &v, k, s)?;
        v = w.right.clone();
        waves.push(w);
    }
    Ok(waves)
}

fn composed_end(sys: &SystemDef, v_l: &State, strengths: &[f64]) -> Result<State> {
    let mut v = v_l.clone();
    for (k, &s) in strengths.iter().enumerate() {
        v = wave_curve(sys, &v, k, s)?;
    }
    Ok(v)
}

/// Builds a fan from given strengths; zero-strength waves are omitted and the
/// last state is pinned to `v_r`.
pub fn fan_from_strengths(sys: &SystemDef, v_l: &State, v_r: &State, strengths: &[f64]) -> Result<RiemannFan> {
    let mut waves = compose(sys, v_l, strengths)?;
    waves.retain(|w| w.strength != 0.0);
    if waves.is_empty() && v_l != v_r {
        return Err(Error::RiemannFailed { residual: max_norm(&(v_l - v_r)), iterations: 0 });
    }
    if let Some(last) = waves.last_mut() {
        last.right = v_r.clone();
    }
    let mut states = vec![v_l.clone()];
    states.extend(waves.iter().map(|w| w.right.clone()));
    Ok(RiemannFan { waves, states })
}

/// Strengths `(s_1, …, s_N)` connecting `v_l` to `v_r`.
pub fn riemann_strengths(sys: &SystemDef, v_l: &State, v_r: &State) -> Result<Vec<f64>> {
    let n = sys.dim();
    if v_l == v_r {
        return Ok(vec![0.0; n]);
    }
    let e = eigen_structure(sys, v_l)?;
    let left = DMatrix::from_rows(&e.left.iter().map(|l| l.transpose()).collect::<Vec<_>>());
    let tol = 1e-12 * (1.0 + max_norm(v_r));
    let residual = |s: &DVector<f64>| -> Option<DVector<f64>> {
        composed_end(sys, v_l, s.as_slice()).ok().map(|v| &left * (v - v_r))
    };
    // quasi-Newton in characteristic coordinates, seeded with the identity
    let mut s = &left * (v_r - v_l);
    let mut g = residual(&s);
    let mut b = DMatrix::<f64>::identity(n, n);
    let mut last_res = f64::INFINITY;
    let mut iterations = 0;
    if let Some(mut gk) = g.take() {
        for it in 0..50 {
            iterations = it + 1;
            let end = composed_end(sys, v_l, s.as_slice())?;
            let res = max_norm(&(end - v_r));
            last_res = res;
            if res <= tol {
                return Ok(s.iter().copied().collect());
            }
            let Some(step) = b.clone().lu().solve(&(-&gk)) else { break };
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..8 {
                let trial = &s + &step * lambda;
                if let Some(gt) = residual(&trial) {
                    if max_norm(&gt) < max_norm(&gk) {
                        accepted = Some((trial, gt));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((trial, gt)) = accepted else { break };
            let ds = &trial - &s;
            let dg = &gt - &gk;
            let denom = ds.dot(&ds);
            if denom > 0.0 {
                b += (&dg - &b * &ds) * ds.transpose() / denom;
            }
            s = trial;
            gk = gt;
        }
    }
    // fall back to a finite-difference Newton solve
    let out = newton_fd(residual, &left * (v_r - v_l), 1e-13, 50);
    let end = composed_end(sys, v_l, out.x.as_slice());
    if let Ok(end) = end {
        let res = max_norm(&(end - v_r));
        if res <= 1e-10 * (1.0 + max_norm(v_r)) {
            return Ok(out.x.iter().copied().collect());
        }
        last_res = last_res.min(res);
    }
    Err(Error::RiemannFailed { residual: last_res, iterations: iterations + out.iterations })
}

/// Solves the Riemann problem between `v_l` and `v_r`.
pub fn solve_riemann(sys: &SystemDef, v_l: &State, v_r: &State) -> Result<RiemannFan> {
    if v_l == v_r {
        return Ok(RiemannFan { waves: Vec::new(), states: vec![v_l.clone()] });
    }
    let s = riemann_strengths(sys, v_l, v_r)?;
    fan_from_strengths(sys, v_l, v_r, &s)
}

/// Self-similar value of the fan at `x/t = xi`.
pub fn sample_fan(sys: &SystemDef, fan: &RiemannFan, xi: f64) -> State {
    for w in &fan.waves {
        match w.kind {
            WaveKind::Rarefaction => {
                if xi < w.speeds.0 {
                    return w.left.clone();
                }
                if xi <= w.speeds.1 {
                    return rarefaction_state(sys, w, xi);
                }
            }
            _ => {
                if xi < w.speeds.0 {
                    return w.left.clone();
                }
            }
        }
    }
    fan.right().clone()
}

/// State inside a centred rarefaction where `λ_k = xi`, by a bracketed
/// secant (Illinois) iteration on the curve parameter.
fn rarefaction_state(sys: &SystemDef, w: &Wave, xi: f64) -> State {
    let k = w.family.expect("rarefactions are physical");
    let eval = |t: f64| -> Option<(State, f64)> {
        let v = integral_curve(sys, &w.left, k, t).ok()?;
        let lam = sorted_real_eigenvalues(sys, &v).ok()?[k];
        Some((v, lam - xi))
    };
    let (mut a, mut fa) = (0.0, w.speeds.0 - xi);
    let (mut b, mut fb) = (w.strength, w.speeds.1 - xi);
    let mut best = if fa.abs() < fb.abs() { w.left.clone() } else { w.right.clone() };
    let mut side = 0;
    for _ in 0..100 {
        if (b - a).abs() <= 1e-10 {
            break;
        }
        let mut t = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        if !(t > a.min(b) && t < a.max(b)) {
            t = 0.5 * (a + b);
        }
        let Some((v, ft)) = eval(t) else { break };
        best = v;
        if ft.abs() <= 1e-13 {
            break;
        }
        if (ft > 0.0) == (fb > 0.0) {
            b = t;
            fb = ft;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = t;
            fa = ft;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    best
}

/// Splits a rarefaction into `⌈s/δ⌉` jumps of equal strength; each piece
/// travels at the characteristic speed of its right state.
pub fn discretize_rarefaction(sys: &SystemDef, wave: &Wave, delta: f64) -> Result<Vec<Wave>> {
    if wave.kind != WaveKind::Rarefaction {
        return Err(Error::InvalidInput("discretize_rarefaction needs a rarefaction".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    if wave.strength == 0.0 {
        return Ok(Vec::new());
    }
    let k = wave.family.expect("rarefactions are physical");
    let pieces = (wave.strength / delta).ceil().max(1.0) as usize;
    let ds = wave.strength / pieces as f64;
    let mut out = Vec::with_capacity(pieces);
    let mut left = wave.left.clone();
    let mut lam_left = wave.speeds.0;
    for j in 1..=pieces {
        let right = if j == pieces {
            wave.right.clone()
        } else {
            integral_curve(sys, &wave.left, k, ds * j as f64)?
        };
        let lam_right = if j == pieces {
            wave.speeds.1
        } else {
            sorted_real_eigenvalues(sys, &right)?[k]
        };
        out.push(Wave {
            family: Some(k),
            kind: WaveKind::Rarefaction,
            left: left.clone(),
            right: right.clone(),
            speeds: (lam_left, lam_right),
            strength: ds,
        });
        left = right;
        lam_left = lam_right;
    }
    Ok(out)
}
