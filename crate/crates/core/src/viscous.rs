//! Explicit finite-difference solver for `g(v)_t + f(v)_x = ε (D(v) v_x)_x`
//! on `[0, L]` with the boundary condition `β̃(v(t,0), v_b(t)) = 0`, or on
//! `[−L, L]` without boundary condition.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::boundary::{beta_tilde, incoming_hyperbolic};
use crate::error::{Error, Result};
use crate::front_tracking::{Datum, Domain};
use crate::linalg::State;
use crate::system::SystemDef;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ViscousConfig {
    pub epsilon: f64,
    pub dx: f64,
    pub length: f64,
    pub t_end: f64,
    pub domain: Domain,
    /// Safety factor on the explicit stability bound.
    pub safety: f64,
    pub sample_times: Vec<f64>,
    /// Trace window `[K ε, 2K ε]`.
    pub window_factor: f64,
}

impl Default for ViscousConfig {
    fn default() -> Self {
        ViscousConfig {
            epsilon: 1e-3,
            dx: 2e-4,
            length: 1.0,
            t_end: 0.1,
            domain: Domain::HalfLine,
            safety: 0.4,
            sample_times: Vec::new(),
            window_factor: 20.0,
        }
    }
}

/// Node values `v_i ≈ v(t, x_i)`.
#[derive(Debug, Clone)]
pub struct ViscousGrid {
    pub epsilon: f64,
    pub dx: f64,
    pub dt: f64,
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<State>,
    pub boundary_datum: Option<State>,
    /// Artificial viscosity added on top of `ε D`.
    pub numerical_viscosity: f64,
    identity_g: bool,
}

#[derive(Debug, Clone)]
pub struct ViscousProfile {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<State>,
}

#[derive(Debug, Clone)]
pub struct ViscousSolution {
    pub profiles: Vec<ViscousProfile>,
    /// `(t, v̄_est)` at every sample time and at `t_end`.
    pub traces: Vec<(f64, State)>,
    pub final_grid: ViscousGrid,
    pub steps: usize,
}

impl ViscousGrid {
    /// Grid with explicit stability bound `Δt ≤ safety · min(Δx/λ_max, Δx²/(2ε‖D‖))`
    /// and numerical viscosity `max(0, λ_max Δx/2 − ε d_min)`, `d_min` the
    /// smallest eigenvalue of the symmetric part of `D` at the reference.
    pub fn new(sys: &SystemDef, v0: &Datum, vb: Option<State>, config: &ViscousConfig) -> Result<Self> {
        if !(config.epsilon > 0.0 && config.dx > 0.0 && config.length > 0.0) {
            return Err(Error::InvalidInput("ε, Δx and L must be positive".into()));
        }
        let m = (config.length / config.dx).round() as usize;
        let (start, count) = match config.domain {
            Domain::HalfLine => (0.0, m + 1),
            Domain::Line => (-config.length, 2 * m + 1),
        };
        let x: Vec<f64> = (0..count).map(|i| start + i as f64 * config.dx).collect();
        let v: Vec<State> = x.iter().map(|&xi| v0.eval(xi)).collect();
        let lam = sys.max_speed().max(1e-12);
        let dref = sys.viscosity(&sys.reference);
        let sym = (&dref + dref.transpose()) * 0.5;
        let d_min = sym.symmetric_eigenvalues().min().max(0.0);
        let d_norm = sys
            .ball_samples()
            .iter()
            .map(|s| sys.viscosity(s).svd(false, false).singular_values.max())
            .fold(0.0, f64::max)
            .max(1e-12);
        let numerical_viscosity = (0.5 * lam * config.dx - config.epsilon * d_min).max(0.0);
        let diff = config.epsilon * d_norm + numerical_viscosity;
        let dt = config.safety * (config.dx / lam).min(config.dx * config.dx / (2.0 * diff));
        let r = &sys.reference;
        let identity_g = sys.conserved(r) == *r && sys.law.conserved_jacobian(r) == DMatrix::identity(r.len(), r.len());
        let mut grid = ViscousGrid {
            epsilon: config.epsilon,
            dx: config.dx,
            dt,
            t: 0.0,
            x,
            v,
            boundary_datum: vb,
            numerical_viscosity,
            identity_g,
        };
        if let Some(b) = grid.boundary_datum.clone() {
            let pred = grid.v[0].clone();
            grid.v[0] = boundary_value(sys, &pred, &b)?;
        }
        Ok(grid)
    }

    /// Interface fluxes `F_{i+1/2}`, including diffusion, as a flat
    /// row-major `(nodes − 1) × N` buffer.
    fn fluxes(&self, sys: &SystemDef) -> Vec<f64> {
        let n = sys.dim();
        let nodes = self.v.len();
        let mut f = vec![0.0; nodes * n];
        let mut g: Vec<f64> = Vec::with_capacity(if self.identity_g { 0 } else { nodes * n });
        for (i, v) in self.v.iter().enumerate() {
            sys.law.flux_into(v, &mut f[i * n..(i + 1) * n]);
            if !self.identity_g {
                g.extend(sys.conserved(v).iter());
            }
        }
        let fixed = sys.law.constant_viscosity();
        let (eps, nu, dx) = (self.epsilon, self.numerical_viscosity, self.dx);
        let mut out = vec![0.0; (nodes - 1) * n];
        let mut grad = vec![0.0; n];
        for i in 0..nodes - 1 {
            let (a, b) = (&self.v[i], &self.v[i + 1]);
            for c in 0..n {
                grad[c] = (b[c] - a[c]) / dx;
            }
            let varying;
            let d = match &fixed {
                Some(d) => d,
                None => {
                    varying = sys.viscosity(&((a + b) * 0.5));
                    &varying
                }
            };
            let row = &mut out[i * n..(i + 1) * n];
            for c in 0..n {
                let mut diff = 0.0;
                for k in 0..n {
                    diff += d[(c, k)] * grad[k];
                }
                let dg = if self.identity_g { grad[c] } else { (g[(i + 1) * n + c] - g[i * n + c]) / dx };
                row[c] = 0.5 * (f[i * n + c] + f[(i + 1) * n + c]) - eps * diff - nu * dg;
            }
        }
        out
    }

    fn invert_conserved(&self, sys: &SystemDef, target: &State, guess: &State) -> Result<State> {
        if self.identity_g {
            return Ok(target.clone());
        }
        let mut v = guess.clone();
        for _ in 0..30 {
            let r = sys.conserved(&v) - target;
            if r.amax() <= 1e-14 * (1.0 + target.amax()) {
                return Ok(v);
            }
            let step = sys
                .law
                .conserved_jacobian(&v)
                .lu()
                .solve(&r)
                .ok_or_else(|| Error::InvalidSystem("singular conserved-variable Jacobian".into()))?;
            v -= step;
        }
        Ok(v)
    }
}

/// Boundary node from the predictor: `β̃(v, v_b) = 0` plus the
/// non-incoming hyperbolic characteristic components of the predictor.
pub fn boundary_value(sys: &SystemDef, predictor: &State, v_b: &State) -> Result<State> {
    let n = sys.dim();
    let h = sys.hyperbolic_dim;
    if h == 0 {
        return Ok(v_b.clone());
    }
    let a = sys.law.flux_jacobian(v_b);
    let a11 = a.view((0, 0), (h, h)).into_owned();
    let incoming = incoming_hyperbolic(sys, v_b)?;
    let (vals, _, left) = crate::linalg::real_eigensystem(&a11)
        .ok_or_else(|| Error::HyperbolicityViolated { state: v_b.iter().copied().collect(), reason: "hyperbolic block".into() })?;
    // rows: parabolic components, incoming projections, remaining projections
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut row = 0;
    for j in h..n {
        m[(row, j)] = 1.0;
        rhs[row] = v_b[j];
        row += 1;
    }
    for d in &incoming {
        for c in 0..h {
            m[(row, c)] = d.left[c];
        }
        rhs[row] = d.left.dot(&v_b.rows(0, h));
        row += 1;
    }
    for (i, &lam) in vals.iter().enumerate() {
        if incoming.iter().any(|d| (d.speed - lam).abs() <= 1e-12 * (1.0 + lam.abs())) {
            continue;
        }
        let l = left.row(i).transpose();
        for c in 0..h {
            m[(row, c)] = l[c];
        }
        rhs[row] = l.dot(&predictor.rows(0, h));
        row += 1;
    }
    if row != n {
        return Err(Error::InvalidSystem("boundary condition count mismatch".into()));
    }
    let v = m.lu().solve(&rhs).ok_or_else(|| Error::InvalidSystem("singular boundary system".into()))?;
    debug_assert!(beta_tilde(sys, &v, v_b).map_or(true, |r| r.amax() < 1e-10));
    Ok(v)
}

/// One explicit step of the conservative scheme. Returns the discrete
/// conservation defect `Σ g Δx` change minus the boundary fluxes.
pub fn viscous_step(sys: &SystemDef, grid: &mut ViscousGrid) -> Result<f64> {
    let n_nodes = grid.v.len();
    let n = sys.dim();
    let fl = grid.fluxes(sys);
    let flux_at = |i: usize| DVector::from_column_slice(&fl[i * n..(i + 1) * n]);
    let lam = grid.dt / grid.dx;
    let new_boundary = match &grid.boundary_datum {
        Some(b) => {
            // half-cell predictor for the hyperbolic components
            let f0 = sys.flux(&grid.v[0]);
            let pred_g = sys.conserved(&grid.v[0]) - (flux_at(0) - f0) * (2.0 * lam);
            let pred = grid.invert_conserved(sys, &pred_g, &grid.v[0])?;
            Some(boundary_value(sys, &pred, b)?)
        }
        None => None,
    };
    let mut change = DVector::zeros(n);
    for i in 1..n_nodes - 1 {
        if grid.identity_g {
            let v = &mut grid.v[i];
            for c in 0..n {
                let d = (fl[i * n + c] - fl[(i - 1) * n + c]) * lam;
                v[c] -= d;
                change[c] -= d;
            }
        } else {
            let g_old = sys.conserved(&grid.v[i]);
            let g_new = &g_old - (flux_at(i) - flux_at(i - 1)) * lam;
            change += &g_new - &g_old;
            grid.v[i] = grid.invert_conserved(sys, &g_new, &grid.v[i])?;
        }
    }
    let defect = (change * grid.dx + (flux_at(n_nodes - 2) - flux_at(0)) * grid.dt).amax();
    // far end: zero-gradient outflow
    grid.v[n_nodes - 1] = grid.v[n_nodes - 2].clone();
    grid.v[0] = new_boundary.unwrap_or_else(|| grid.v[1].clone());
    grid.t += grid.dt;
    for (i, v) in grid.v.iter().enumerate() {
        if !v.iter().all(|c| c.is_finite()) || !sys.in_ball(v) {
            return Err(Error::ViscousOutOfRegime { x: grid.x[i], time: grid.t });
        }
    }
    Ok(defect)
}

/// Average of `v` over `x ∈ [K ε, 2K ε]`.
pub fn trace_estimate(grid: &ViscousGrid, window_factor: f64) -> State {
    let (a, b) = (window_factor * grid.epsilon, 2.0 * window_factor * grid.epsilon);
    let mut sum = DVector::zeros(grid.v[0].len());
    let mut count = 0usize;
    for (x, v) in grid.x.iter().zip(&grid.v) {
        if *x >= a && *x <= b {
            sum += v;
            count += 1;
        }
    }
    if count == 0 {
        return grid.v[0].clone();
    }
    sum / count as f64
}

/// Integrates to `t_end`; the boundary datum is `v_b(t)`, read as a function
/// of time from `vb`.
pub fn viscous_solve(sys: &SystemDef, v0: &Datum, vb: &Datum, config: &ViscousConfig) -> Result<ViscousSolution> {
    let datum = |t: f64| (config.domain == Domain::HalfLine).then(|| vb.eval(t));
    let mut grid = ViscousGrid::new(sys, v0, datum(0.0), config)?;
    let mut samples: Vec<f64> = config.sample_times.iter().copied().filter(|&t| t >= 0.0 && t <= config.t_end).collect();
    samples.sort_by(f64::total_cmp);
    let mut profiles = Vec::new();
    let mut traces = Vec::new();
    let mut steps = 0usize;
    let base_dt = grid.dt;
    let mut targets = samples.clone();
    targets.push(config.t_end);
    for (k, &target) in targets.iter().enumerate() {
        while grid.t < target - 1e-14 * (1.0 + target) {
            grid.dt = base_dt.min(target - grid.t);
            grid.boundary_datum = datum(grid.t);
            viscous_step(sys, &mut grid)?;
            steps += 1;
        }
        grid.dt = base_dt;
        let is_sample = k < samples.len();
        if is_sample {
            profiles.push(ViscousProfile { t: grid.t, x: grid.x.clone(), v: grid.v.clone() });
        }
        if is_sample || k == samples.len() {
            traces.push((grid.t, trace_estimate(&grid, config.window_factor)));
        }
    }
    Ok(ViscousSolution { profiles, traces, final_grid: grid, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{burgers, linear, p_system, PSystemViscosity};

    fn st(x: &[f64]) -> State {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn constant_state_is_steady() {
        let sys = p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap();
        let c = st(&[1.02, 0.01]);
        let cfg = ViscousConfig { epsilon: 1e-2, dx: 1e-2, length: 1.0, t_end: 0.05, ..Default::default() };
        let sol = viscous_solve(&sys, &Datum::constant(&c), &Datum::constant(&c), &cfg).unwrap();
        assert!(sol.final_grid.v.iter().all(|v| (v - &c).amax() < 1e-14));
    }

    #[test]
    fn heat_block_obeys_max_principle_and_conservation() {
        let sys = linear(DMatrix::zeros(1, 1), DMatrix::identity(1, 1), Some(st(&[0.0])), Some(2.0)).unwrap();
        let v0 = Datum::steps(&[0.4, 0.6], &[st(&[0.0]), st(&[1.0]), st(&[0.0])]).unwrap();
        let cfg = ViscousConfig { epsilon: 1e-2, dx: 1e-2, length: 1.0, t_end: 0.1, domain: Domain::Line, ..Default::default() };
        let mut grid = ViscousGrid::new(&sys, &v0, None, &cfg).unwrap();
        for _ in 0..200 {
            let defect = viscous_step(&sys, &mut grid).unwrap();
            assert!(defect <= 1e-10);
            assert!(grid.v.iter().all(|v| v[0] >= -1e-15 && v[0] <= 1.0 + 1e-15));
        }
    }

    #[test]
    fn burgers_viscous_shock_speed() {
        let sys = burgers(0.0, Some(0.5), Some(1.0)).unwrap();
        let v0 = Datum::steps(&[0.3], &[st(&[1.0]), st(&[0.0])]).unwrap();
        let cfg = ViscousConfig {
            epsilon: 1e-2,
            dx: 2e-3,
            length: 1.0,
            t_end: 0.8,
            domain: Domain::Line,
            sample_times: vec![0.4, 0.8],
            ..Default::default()
        };
        let sol = viscous_solve(&sys, &v0, &Datum::constant(&st(&[1.0])), &cfg).unwrap();
        // position of the 1/2 level crossing
        let mid = |p: &ViscousProfile| {
            let i = p.v.iter().position(|v| v[0] < 0.5).unwrap();
            let (a, b) = (p.v[i - 1][0], p.v[i][0]);
            p.x[i - 1] + (a - 0.5) / (a - b) * (p.x[i] - p.x[i - 1])
        };
        let speed = (mid(&sol.profiles[1]) - mid(&sol.profiles[0])) / 0.4;
        assert!((speed - 0.5).abs() <= 0.02, "speed {speed}");
    }

    #[test]
    fn navier_stokes_boundary_fixes_velocity() {
        let sys = p_system(2.0, PSystemViscosity::NavierStokes { mu: 1.0 }, None, None).unwrap();
        let v_b = st(&[1.05, 0.03]);
        let v = boundary_value(&sys, &st(&[1.01, 0.0]), &v_b).unwrap();
        assert_eq!(v, st(&[1.01, 0.03]));
    }
}
