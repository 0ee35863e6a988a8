//! Distributional residuals of front-tracking solutions.
//!
//! For a piecewise-constant `v` with straight fronts and `φ` supported in
//! `t, x > 0`,
//! `∬ g(v) φ_t + f(v) φ_x = Σ_fronts ∫ φ(t, x(t)) (σ[g] − [f]) dt`
//! and likewise with `(η, q)`, so the residuals are line integrals along the
//! front history.

use bdry_fronts::front_tracking::{run, Domain, FrontSegment, TrackingConfig};
use bdry_fronts::system::SystemDef;
use rand::Rng;
use serde::Serialize;

use super::{random_half_line_data, run_rng};

/// `φ(t, x) = b((t − t_c)/t_w) b((x − x_c)/x_w)` with the smooth bump
/// `b(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`; `max φ = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TestFunction {
    pub t_c: f64,
    pub t_w: f64,
    pub x_c: f64,
    pub x_w: f64,
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

impl TestFunction {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        bump((t - self.t_c) / self.t_w) * bump((x - self.x_c) / self.x_w)
    }
}

/// `n` bumps with support inside `(0, t_end) × (0, x_max)`.
pub fn random_test_functions<R: Rng>(rng: &mut R, n: usize, t_end: f64, x_max: f64) -> Vec<TestFunction> {
    (0..n)
        .map(|_| {
            let t_w = rng.gen_range(0.1..0.3) * t_end;
            let t_c = rng.gen_range(t_w * 1.05..t_end - t_w * 1.05);
            let x_w = rng.gen_range(0.1..0.3) * x_max;
            let x_c = rng.gen_range(x_w * 1.05..x_max - x_w * 1.05);
            TestFunction { t_c, t_w, x_c, x_w }
        })
        .collect()
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// `∫ φ(t, x(t)) dt` along a segment by panelled 5-point Gauss–Legendre.
fn line_integral(phi: &TestFunction, seg: &FrontSegment) -> f64 {
    let a = seg.t0.max(phi.t_c - phi.t_w);
    let b = seg.t1.min(phi.t_c + phi.t_w);
    if b <= a {
        return 0.0;
    }
    // panels fine enough for both the time and the space bump along the path
    let scale = phi.t_w.min(phi.x_w / seg.speed.abs().max(1e-12));
    let panels = ((b - a) / scale * 16.0).ceil().clamp(1.0, 4096.0) as usize;
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        for (z, w) in GAUSS5 {
            let t = mid + 0.5 * h * z;
            sum += w * phi.eval(t, seg.x_at(t));
        }
    }
    sum * 0.5 * h
}

/// `(|weak residual|, entropy residual)` of the front history for `φ`.
/// The weak residual is the Euclidean norm of the vector residual.
pub fn front_residuals(sys: &SystemDef, history: &[FrontSegment], phi: &TestFunction) -> (f64, f64) {
    let n = sys.dim();
    let mut weak = vec![0.0; n];
    let mut entropy = 0.0;
    for seg in history {
        let w = line_integral(phi, seg);
        if w == 0.0 {
            continue;
        }
        let s = seg.speed;
        let dg = sys.conserved(&seg.right) - sys.conserved(&seg.left);
        let df = sys.flux(&seg.right) - sys.flux(&seg.left);
        for c in 0..n {
            weak[c] += w * (s * dg[c] - df[c]);
        }
        if let (Some((el, ql)), Some((er, qr))) = (sys.law.entropy(&seg.left), sys.law.entropy(&seg.right)) {
            entropy += w * (s * (er - el) - (qr - ql));
        }
    }
    (weak.iter().map(|x| x * x).sum::<f64>().sqrt(), entropy)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualConfig {
    pub deltas: Vec<f64>,
    pub test_functions: usize,
    pub t_end: f64,
    pub size: f64,
    pub max_jumps: usize,
    pub x_max: f64,
}

impl Default for ResidualConfig {
    fn default() -> Self {
        ResidualConfig { deltas: vec![1e-2, 5e-3], test_functions: 20, t_end: 2.0, size: 0.05, max_jumps: 4, x_max: 1.5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualResult {
    pub test_functions: Vec<TestFunction>,
    /// `weak[j][i]`, `entropy[j][i]`: residuals at `deltas[j]` for `φ_i`.
    pub weak: Vec<Vec<f64>>,
    pub entropy: Vec<Vec<f64>>,
    pub deltas: Vec<f64>,
}

impl ResidualResult {
    /// `C_δ = max_φ |R(φ)| / δ`.
    pub fn weak_constant(&self, j: usize) -> f64 {
        self.weak[j].iter().fold(0.0_f64, |m, &r| m.max(r)) / self.deltas[j]
    }

    /// `min_φ R_η(φ) / δ`.
    pub fn entropy_min(&self, j: usize) -> f64 {
        self.entropy[j].iter().fold(f64::INFINITY, |m, &r| m.min(r)) / self.deltas[j]
    }
}

/// One random half-line scenario tracked at every `δ` with the front
/// history recorded, tested against `cfg.test_functions` bumps.
pub fn residual_suite(sys: &SystemDef, cfg: &ResidualConfig, seed: u64) -> bdry_fronts::Result<ResidualResult> {
    let mut rng = run_rng(seed, 0);
    let (v0, vb) = random_half_line_data(&mut rng, sys, cfg.size, cfg.max_jumps, cfg.x_max, cfg.t_end);
    let phis = random_test_functions(&mut rng, cfg.test_functions, cfg.t_end, cfg.x_max);
    let mut weak = Vec::new();
    let mut entropy = Vec::new();
    for &delta in &cfg.deltas {
        let tc = TrackingConfig {
            delta,
            t_end: cfg.t_end,
            domain: Domain::HalfLine,
            record_history: true,
            ..TrackingConfig::default()
        };
        let tr = run(sys, &v0, &vb, &tc)?;
        let (w, e): (Vec<f64>, Vec<f64>) = phis.iter().map(|p| front_residuals(sys, &tr.history, p)).unzip();
        weak.push(w);
        entropy.push(e);
    }
    Ok(ResidualResult { test_functions: phis, weak, entropy, deltas: cfg.deltas.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bdry_fronts::system::burgers;
    use bdry_fronts::State;

    fn seg(speed: f64, l: f64, r: f64) -> FrontSegment {
        FrontSegment {
            t0: 0.0,
            t1: 2.0,
            x0: 0.2,
            speed,
            left: State::from_element(1, l),
            right: State::from_element(1, r),
            non_physical: false,
        }
    }

    #[test]
    fn exact_shock_has_no_weak_residual() {
        let sys = burgers(0.0, Some(0.0), Some(2.0)).unwrap();
        let phi = TestFunction { t_c: 1.0, t_w: 0.5, x_c: 0.5, x_w: 0.4 };
        let (w, e) = front_residuals(&sys, &[seg(0.5, 1.0, 0.0)], &phi);
        assert!(w < 1e-15);
        // admissible shock dissipates entropy
        assert!(e > 0.0);
        let (w, e) = front_residuals(&sys, &[seg(0.5, 0.0, 1.0)], &phi);
        assert!(w < 1e-15 && e < 0.0);
    }

    #[test]
    fn line_integral_of_stationary_front() {
        // 0.5 ∫ b over (−1, 1), b(0) = 1
        let phi = TestFunction { t_c: 1.0, t_w: 0.5, x_c: 0.2, x_w: 0.1 };
        let v = line_integral(&phi, &seg(0.0, 0.0, 0.0));
        assert!((v - 0.5 * 1.206_900_322_437_876_2).abs() < 1e-8, "{v}");
    }
}
