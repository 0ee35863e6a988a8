//! The trace relations `∼_D` and `∼_*` and boundary Riemann problems.

use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::beta_tilde;
use super::layer::{solve_boundary_layer, BoundaryLayerProfile, CenterMode, Shooting};
use crate::error::{Error, Result};
use crate::linalg::{max_norm, newton_fd, State};
use crate::riemann::{
    compose, hugoniot_point, integral_curve, sample_fan, solve_riemann, Wave, WaveKind,
};
use crate::system::{classify_boundary_field, eigen_structure, sorted_real_eigenvalues, FieldKind, SystemDef};

/// Speeds below this are treated as zero when validating outgoing waves.
const SPEED_TOL: f64 = 1e-9;

/// Which admissible-trace relation selects the boundary value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceRelation {
    #[serde(rename = "simD")]
    /// Viscosity-consistent: 0-speed Lax wave plus a boundary layer.
    SimD,
    /// Riemann-problem based: every wave of `(v_b, v̄)` has non-positive speed.
    #[serde(rename = "star")]
    Star,
}

impl FromStr for TraceRelation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simD" | "simd" | "D" => Ok(TraceRelation::SimD),
            "star" | "*" => Ok(TraceRelation::Star),
            other => Err(Error::InvalidInput(format!("unknown trace relation `{other}`"))),
        }
    }
}

/// Evidence for `v̄ ∼_D v_b`.
#[derive(Debug, Clone)]
pub struct EquivWitness {
    /// Sub-trace `v̲` with `f(v̲) = f(v̄)`.
    pub lower: State,
    /// 0-speed wave from `v̲` (left) to `v̄` (right), when `v̲ ≠ v̄`.
    pub zero_speed: Option<Wave>,
    pub profile: BoundaryLayerProfile,
}

/// Self-similar solution of a boundary Riemann problem on `x > 0`.
#[derive(Debug, Clone)]
pub struct BoundaryFan {
    pub relation: TraceRelation,
    /// Inviscid boundary value `v̄`.
    pub trace: State,
    /// Sub-trace `v̲`; equals `trace` without a 0-speed wave.
    pub lower: State,
    pub zero_speed: Option<Wave>,
    /// Layer from the boundary datum to `v̲`; absent for `∼_*`.
    pub layer: Option<BoundaryLayerProfile>,
    /// Outgoing waves from `trace` to the interior state, speeds > 0.
    pub waves: Vec<Wave>,
    /// Boundary characteristic family, if any.
    pub boundary_family: Option<usize>,
    /// Signed size `ξ` of the characteristic boundary component.
    pub center_size: f64,
}

impl BoundaryFan {
    pub fn interior(&self) -> &State {
        self.waves.last().map(|w| &w.right).unwrap_or(&self.trace)
    }

    /// Total strength `Σ|s|` of the outgoing waves.
    pub fn outgoing_strength(&self) -> f64 {
        self.waves.iter().map(|w| w.strength.abs()).sum()
    }

    /// Value at `x/t = ξ > 0`.
    pub fn sample(&self, sys: &SystemDef, xi: f64) -> State {
        let fan = crate::riemann::RiemannFan {
            states: std::iter::once(self.trace.clone()).chain(self.waves.iter().map(|w| w.right.clone())).collect(),
            waves: self.waves.clone(),
        };
        sample_fan(sys, &fan, xi)
    }
}

fn lax_zero_speed(sys: &SystemDef, left: &State, right: &State, k: usize) -> Result<bool> {
    let ll = sorted_real_eigenvalues(sys, left)?[k];
    let lr = sorted_real_eigenvalues(sys, right)?[k];
    Ok(ll > 0.0 && lr < 0.0)
}

/// State `v` on the `k`-Hugoniot locus through `v0` with zero shock speed,
/// `v ≠ v0`, together with its locus parameter.
fn zero_speed_hugoniot(sys: &SystemDef, v0: &State, k: usize) -> Result<Option<(State, f64)>> {
    let lam = sorted_real_eigenvalues(sys, v0)?[k];
    if lam.abs() <= sys.tol_char {
        return Ok(None);
    }
    let sigma = |s: f64| hugoniot_point(sys, v0, k, s).map(|(_, sg)| sg).ok();
    // σ(s) ≈ λ + s/2 for normalised GNL fields
    let mut s0 = -2.0 * lam;
    let mut s1 = -1.9 * lam;
    let (Some(mut f0), Some(mut f1)) = (sigma(s0), sigma(s1)) else {
        return Ok(None);
    };
    for _ in 0..60 {
        if f1.abs() <= 1e-14 {
            break;
        }
        if f1 == f0 {
            return Ok(None);
        }
        let s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = match sigma(s1) {
            Some(v) => v,
            None => return Ok(None),
        };
    }
    if f1.abs() > 1e-12 || s1.abs() <= 1e-14 {
        return Ok(None);
    }
    Ok(Some((hugoniot_point(sys, v0, k, s1)?.0, s1)))
}

fn zero_speed_wave(sys: &SystemDef, left: &State, right: &State, k: usize) -> Result<Wave> {
    let e = eigen_structure(sys, left)?;
    let strength = e.left[k].dot(&(right - left));
    let (kind, speed) = match sys.fields[k] {
        FieldKind::LinearlyDegenerate => (WaveKind::Contact, e.values[k]),
        FieldKind::GenuinelyNonlinear => (WaveKind::Shock, 0.0),
    };
    Ok(Wave { family: Some(k), kind, left: left.clone(), right: right.clone(), speeds: (speed, speed), strength })
}

/// Decides `v̄ ∼_D v_b`, returning a witness when it holds.
pub fn check_equiv_d(sys: &SystemDef, vbar: &State, v_b: &State) -> Result<Option<EquivWitness>> {
    let k = classify_boundary_field(sys, vbar)?;
    if let Some(profile) = solve_boundary_layer(sys, vbar, v_b)? {
        return Ok(Some(EquivWitness { lower: vbar.clone(), zero_speed: None, profile }));
    }
    let Some(k) = k else {
        return Ok(None);
    };
    match sys.fields[k] {
        FieldKind::GenuinelyNonlinear => {
            let Some((lower, _)) = zero_speed_hugoniot(sys, vbar, k)? else {
                return Ok(None);
            };
            if !sys.in_ball(&lower) || !lax_zero_speed(sys, &lower, vbar, k)? {
                return Ok(None);
            }
            match solve_boundary_layer(sys, &lower, v_b)? {
                Some(profile) => {
                    let wave = zero_speed_wave(sys, &lower, vbar, k)?;
                    Ok(Some(EquivWitness { lower, zero_speed: Some(wave), profile }))
                }
                None => Ok(None),
            }
        }
        FieldKind::LinearlyDegenerate => contact_layer_search(sys, vbar, v_b, k),
    }
}

/// Searches `v̲ = ω_k(v̄; −s)` along the 0-speed contact curve such that a
/// layer from `v_b` to `v̲` exists.
fn contact_layer_search(sys: &SystemDef, vbar: &State, v_b: &State, k: usize) -> Result<Option<EquivWitness>> {
    let reference = Shooting::setup(sys, vbar, CenterMode::None, None)?;
    let m = reference.param_count();
    let residual = |x: &DVector<f64>| -> Option<DVector<f64>> {
        let lower = integral_curve(sys, vbar, k, -x[0]).ok()?;
        let sh = Shooting::setup(sys, &lower, CenterMode::None, Some((reference.basis(), None))).ok()?;
        if sh.param_count() != m {
            return None;
        }
        let w0 = sh.boundary_value(&x.rows(1, m).into_owned())?;
        beta_tilde(sys, &w0, v_b).ok()
    };
    let tol = 1e-10 * (1.0 + max_norm(v_b));
    let out = newton_fd(residual, DVector::zeros(m + 1), tol, 60);
    if !out.converged {
        return Ok(None);
    }
    let lower = integral_curve(sys, vbar, k, -out.x[0])?;
    let sh = Shooting::setup(sys, &lower, CenterMode::None, Some((reference.basis(), None)))?;
    let Some(profile) = sh.profile(&out.x.rows(1, m).into_owned(), v_b) else {
        return Ok(None);
    };
    let zero_speed = (out.x[0] != 0.0).then(|| zero_speed_wave(sys, &lower, vbar, k)).transpose()?;
    Ok(Some(EquivWitness { lower, zero_speed, profile }))
}

/// Decides `v̄ ∼_* v_b`: all waves of the Riemann problem `(v_b, v̄)` have
/// non-positive speed.
pub fn check_equiv_star(sys: &SystemDef, vbar: &State, v_b: &State) -> Result<bool> {
    let fan = solve_riemann(sys, v_b, vbar)?;
    Ok(fan.waves.iter().all(|w| w.speeds.0.max(w.speeds.1) <= SPEED_TOL))
}

fn outgoing_ok(waves: &[Wave]) -> bool {
    waves.iter().all(|w| match w.kind {
        WaveKind::Rarefaction => w.speeds.0 >= -SPEED_TOL && w.speeds.1 > 0.0,
        _ => w.speeds.0 > SPEED_TOL,
    }) && waves.windows(2).all(|p| p[0].family < p[1].family)
}

fn fan_from_witness(sys: &SystemDef, trace: State, witness: EquivWitness, waves: Vec<Wave>) -> Result<BoundaryFan> {
    let boundary_family = classify_boundary_field(sys, &trace)?;
    let jump = witness.zero_speed.as_ref().map(|w| w.strength).unwrap_or(0.0);
    Ok(BoundaryFan {
        relation: TraceRelation::SimD,
        center_size: witness.profile.center_size + jump,
        trace,
        lower: witness.lower,
        zero_speed: witness.zero_speed,
        layer: Some(witness.profile),
        waves,
        boundary_family,
    })
}

/// Solves the boundary Riemann problem with interior datum `v_in` and
/// boundary datum `v_b` under `∼_D`.
pub fn solve_boundary_riemann(sys: &SystemDef, v_in: &State, v_b: &State) -> Result<BoundaryFan> {
    if v_in == v_b {
        let witness = EquivWitness {
            lower: v_in.clone(),
            zero_speed: None,
            profile: BoundaryLayerProfile::constant(sys, v_in, v_b),
        };
        return fan_from_witness(sys, v_in.clone(), witness, Vec::new());
    }
    if sys.dim() == 1 {
        return scalar_boundary_riemann(sys, v_in, v_b);
    }
    let k = classify_boundary_field(sys, v_in)?;
    let lam = sorted_real_eigenvalues(sys, v_in)?;
    let n = sys.dim();
    let branches: Vec<Branch> = match k {
        None => vec![Branch { out: (0..n).filter(|&j| lam[j] > 0.0).collect(), contact: None, center: false }],
        Some(k) if sys.fields[k] == FieldKind::LinearlyDegenerate => {
            vec![Branch { out: (k + 1..n).collect(), contact: Some(k), center: false }]
        }
        Some(k) => vec![
            Branch { out: (k + 1..n).collect(), contact: None, center: true },
            Branch { out: (k..n).collect(), contact: None, center: false },
        ],
    };
    let mut last = String::from("no admissible branch");
    for branch in &branches {
        match generic_branch(sys, v_in, v_b, branch) {
            Ok(Some(fan)) => return Ok(fan),
            Ok(None) => {}
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::BoundaryRiemannFailed(last))
}

struct Branch {
    out: Vec<usize>,
    contact: Option<usize>,
    center: bool,
}

fn generic_branch(sys: &SystemDef, v_in: &State, v_b: &State, br: &Branch) -> Result<Option<BoundaryFan>> {
    let n = sys.dim();
    let mode = if br.center { CenterMode::Slowest } else { CenterMode::None };
    let reference = Shooting::setup(sys, v_in, mode, None)?;
    let m = reference.param_count();
    let q = beta_tilde(sys, v_in, v_b)?.len();
    let n_out = br.out.len();
    let n_contact = usize::from(br.contact.is_some());
    if n_out + n_contact + m != q {
        return Ok(None);
    }
    let ref_basis = reference.basis().clone();
    let ref_center = reference.center_direction().cloned();
    let split = |x: &DVector<f64>| {
        let vbar = x.rows(0, n).into_owned();
        let mut strengths = vec![0.0; n];
        for (i, &j) in br.out.iter().enumerate() {
            strengths[j] = x[n + i];
        }
        let s0 = if n_contact == 1 { x[n + n_out] } else { 0.0 };
        let a = x.rows(n + n_out + n_contact, m).into_owned();
        (vbar, strengths, s0, a)
    };
    let lower_of = |vbar: &State, s0: f64| -> Result<State> {
        match br.contact {
            Some(k) if s0 != 0.0 => integral_curve(sys, vbar, k, -s0),
            _ => Ok(vbar.clone()),
        }
    };
    let shooting_at = |lower: &State| -> Result<Shooting<'_>> {
        Shooting::setup(sys, lower, mode, Some((&ref_basis, ref_center.as_ref())))
    };
    let residual = |x: &DVector<f64>| -> Option<DVector<f64>> {
        let (vbar, strengths, s0, a) = split(x);
        if !sys.law.admissible(&vbar) {
            return None;
        }
        let waves = compose(sys, &vbar, &strengths).ok()?;
        let end = waves.last().map(|w| w.right.clone()).unwrap_or(vbar.clone());
        let lower = lower_of(&vbar, s0).ok()?;
        let sh = shooting_at(&lower).ok()?;
        if sh.param_count() != m {
            return None;
        }
        let w0 = sh.boundary_value(&a)?;
        let beta = beta_tilde(sys, &w0, v_b).ok()?;
        let mut r = DVector::zeros(n + q);
        r.rows_mut(0, n).copy_from(&(end - v_in));
        r.rows_mut(n, q).copy_from(&beta);
        Some(r)
    };
    let mut x0 = DVector::zeros(n + q);
    x0.rows_mut(0, n).copy_from(v_in);
    let tol = 1e-10 * (1.0 + max_norm(v_in) + max_norm(v_b));
    let out = newton_fd(residual, x0, tol, 80);
    if !out.converged {
        return Ok(None);
    }
    let (vbar, strengths, s0, a) = split(&out.x);
    let mut waves = compose(sys, &vbar, &strengths)?;
    waves.retain(|w| w.strength != 0.0);
    if let Some(last) = waves.last_mut() {
        last.right = v_in.clone();
    }
    if !outgoing_ok(&waves) {
        return Ok(None);
    }
    let lower = lower_of(&vbar, s0)?;
    let sh = shooting_at(&lower)?;
    let Some(profile) = sh.profile(&a, v_b) else {
        return Ok(None);
    };
    let zero_speed = match br.contact {
        Some(k) if s0 != 0.0 => Some(zero_speed_wave(sys, &lower, &vbar, k)?),
        _ => None,
    };
    let witness = EquivWitness { lower, zero_speed, profile };
    fan_from_witness(sys, vbar, witness, waves).map(Some)
}

/// Sonic state `λ(u) = 0` of a scalar law, by Newton from `u0`.
fn sonic_state(sys: &SystemDef, u0: &State) -> Result<Option<State>> {
    let lam = |u: f64| sorted_real_eigenvalues(sys, &DVector::from_element(1, u)).map(|l| l[0]);
    let mut u = u0[0];
    for _ in 0..50 {
        let f = lam(u)?;
        if f.abs() <= 1e-14 {
            let s = DVector::from_element(1, u);
            return Ok(sys.in_ball(&s).then_some(s));
        }
        let h = 1e-6 * (1.0 + u.abs());
        let df = (lam(u + h)? - lam(u - h)?) / (2.0 * h);
        if df.abs() <= 1e-14 {
            return Ok(None);
        }
        u -= f / df;
        if !u.is_finite() || !sys.in_ball(&DVector::from_element(1, u)) {
            return Ok(None);
        }
    }
    Ok(None)
}

fn scalar_boundary_riemann(sys: &SystemDef, u0: &State, ub: &State) -> Result<BoundaryFan> {
    let mut candidates = vec![u0.clone(), ub.clone()];
    if let Some(s) = sonic_state(sys, u0)? {
        candidates.push(s);
    }
    // 0-speed shock leaving the boundary datum
    if sys.fields[0] == FieldKind::GenuinelyNonlinear {
        if let Some((right, _)) = zero_speed_hugoniot(sys, ub, 0)? {
            if sys.in_ball(&right) && lax_zero_speed(sys, ub, &right, 0)? {
                candidates.push(right);
            }
        }
    }
    for vbar in candidates {
        let Ok(fan) = solve_riemann(sys, &vbar, u0) else {
            continue;
        };
        if !outgoing_ok(&fan.waves) {
            continue;
        }
        if let Some(witness) = check_equiv_d(sys, &vbar, ub)? {
            return fan_from_witness(sys, vbar, witness, fan.waves);
        }
    }
    Err(Error::BoundaryRiemannFailed("no scalar branch admissible".into()))
}

/// Solves the boundary Riemann problem under `∼_*`: the trace is the value
/// at `x/t = 0⁺` of the Riemann problem `(v_b, v_in)`.
pub fn solve_boundary_riemann_star(sys: &SystemDef, v_in: &State, v_b: &State) -> Result<BoundaryFan> {
    let fan = solve_riemann(sys, v_b, v_in)?;
    let trace = sample_fan(sys, &fan, 1e-13);
    let out = solve_riemann(sys, &trace, v_in)?;
    let waves: Vec<Wave> = out.waves.into_iter().filter(|w| w.strength != 0.0).collect();
    Ok(BoundaryFan {
        relation: TraceRelation::Star,
        lower: trace.clone(),
        boundary_family: classify_boundary_field(sys, &trace)?,
        trace,
        zero_speed: None,
        layer: None,
        waves,
        center_size: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{linear_boundary_trace, LinearBoundaryProblem};
    use crate::system::{burgers, lagrangian_euler, linear, p_system, PSystemViscosity};
    use nalgebra::DMatrix;

    fn st(x: &[f64]) -> State {
        DVector::from_vec(x.to_vec())
    }

    fn gisclon(d: DMatrix<f64>) -> SystemDef {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        linear(a, d, Some(st(&[0.5, 0.5])), Some(2.0)).unwrap()
    }

    fn coupled() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0])
    }

    #[test]
    fn linear_systems_match_the_linear_trace() {
        for d in [DMatrix::identity(2, 2), coupled()] {
            let sys = gisclon(d.clone());
            let fan = solve_boundary_riemann(&sys, &st(&[0.0, 0.0]), &st(&[1.0, 1.0])).unwrap();
            let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
            let lin = linear_boundary_trace(&LinearBoundaryProblem::new(a, d, st(&[0.0, 0.0]), st(&[1.0, 1.0])).unwrap())
                .unwrap();
            assert!((&fan.trace - &lin.trace).amax() < 1e-8, "{} vs {}", fan.trace, lin.trace);
            assert_eq!(fan.waves.len(), 1);
            assert!((fan.waves[0].front_speed() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn relations_differ_for_coupled_viscosity_only() {
        let data = (st(&[0.0, 0.0]), st(&[1.0, 1.0]));
        let d_coupled = solve_boundary_riemann(&gisclon(coupled()), &data.0, &data.1).unwrap();
        let s_coupled = solve_boundary_riemann_star(&gisclon(coupled()), &data.0, &data.1).unwrap();
        assert!((&d_coupled.trace - &s_coupled.trace).amax() >= 0.1);
        let d_id = solve_boundary_riemann(&gisclon(DMatrix::identity(2, 2)), &data.0, &data.1).unwrap();
        let s_id = solve_boundary_riemann_star(&gisclon(DMatrix::identity(2, 2)), &data.0, &data.1).unwrap();
        assert!((&d_id.trace - &s_id.trace).amax() <= 1e-8);
        assert!(check_equiv_star(&gisclon(coupled()), &s_coupled.trace, &data.1).unwrap());
        assert!(check_equiv_d(&gisclon(coupled()), &d_coupled.trace, &data.1).unwrap().is_some());
    }

    #[test]
    fn trivial_equivalences() {
        let sys = burgers(0.0, Some(0.0), Some(3.0)).unwrap();
        let w = check_equiv_d(&sys, &st(&[0.3]), &st(&[0.3])).unwrap().unwrap();
        assert!(w.profile.is_constant());
        let w = check_equiv_d(&sys, &st(&[-1.0]), &st(&[0.0])).unwrap().unwrap();
        assert_eq!(w.lower, st(&[-1.0]));
        assert!(w.zero_speed.is_none());
    }

    #[test]
    fn burgers_zero_speed_shock_orientation() {
        let sys = burgers(0.0, Some(0.0), Some(3.0)).unwrap();
        // v̲ = 1/2 on the left of a 0-speed shock to v̄ = −1/2
        let w = check_equiv_d(&sys, &st(&[-0.5]), &st(&[0.5])).unwrap().unwrap();
        assert!((w.lower[0] - 0.5).abs() < 1e-10);
        assert!(w.zero_speed.is_some());
        // reversed orientation violates the Lax inequalities
        let eta = 0.01;
        assert!(check_equiv_d(&sys, &st(&[0.5]), &st(&[-0.5 - eta])).unwrap().is_none());
    }

    #[test]
    fn burgers_characteristic_boundary_riemann() {
        let sys = burgers(0.0, Some(0.0), Some(3.0)).unwrap();
        // interior 1, datum −1: sonic trace 0 with a centred rarefaction into the domain
        let fan = solve_boundary_riemann(&sys, &st(&[1.0]), &st(&[-1.0])).unwrap();
        assert!(fan.trace[0].abs() < 1e-10);
        assert_eq!(fan.waves.len(), 1);
        assert_eq!(fan.waves[0].kind, WaveKind::Rarefaction);
        assert!((fan.center_size + 1.0).abs() < 1e-10);
        // interior −1, datum 0: layer to −1, no waves
        let fan = solve_boundary_riemann(&sys, &st(&[-1.0]), &st(&[0.0])).unwrap();
        assert_eq!(fan.trace, st(&[-1.0]));
        assert!(fan.waves.is_empty());
        // interior 0.5, datum 1: trace is the datum, shock of speed 0.75
        let fan = solve_boundary_riemann(&sys, &st(&[0.5]), &st(&[1.0])).unwrap();
        assert_eq!(fan.trace, st(&[1.0]));
        assert!((fan.waves[0].front_speed() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn p_system_boundary_riemann_small_data() {
        for visc in [PSystemViscosity::Artificial, PSystemViscosity::NavierStokes { mu: 1.0 }] {
            let sys = p_system(2.0, visc, None, None).unwrap();
            let v_in = st(&[1.0, 0.0]);
            let v_b = st(&[1.03, 0.02]);
            let fan = solve_boundary_riemann(&sys, &v_in, &v_b).unwrap();
            assert_eq!(fan.waves.len(), 1);
            assert_eq!(fan.waves[0].family, Some(1));
            assert!((fan.interior() - &v_in).amax() < 1e-9);
            let layer = fan.layer.as_ref().unwrap();
            assert!(layer.beta_residual < 1e-9, "{}", layer.beta_residual);
            // the velocity is always imposed
            assert!((fan.trace[1] - layer.boundary_value()[1]).abs() < 1e-3 || visc == PSystemViscosity::Artificial);
        }
    }

    #[test]
    fn euler_contact_parks_at_the_wall() {
        let sys = lagrangian_euler(1.4, None, None).unwrap();
        let v_in = st(&[1.0, 0.0, 2.5]);
        let v_b = st(&[1.02, 0.01, 2.52]);
        let fan = solve_boundary_riemann(&sys, &v_in, &v_b).unwrap();
        assert_eq!(fan.boundary_family, Some(1));
        assert!(fan.waves.iter().all(|w| w.family == Some(2)));
        let layer = fan.layer.as_ref().unwrap();
        assert!(layer.beta_residual < 1e-9);
        assert!((fan.interior() - &v_in).amax() < 1e-9);
        if let Some(z) = &fan.zero_speed {
            assert!(z.front_speed().abs() < 1e-8);
            assert!((sys.flux(&z.left) - sys.flux(&z.right)).amax() < 1e-9);
        }
    }
}
