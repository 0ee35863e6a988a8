//! Conservation-law systems `g(v)_t + f(v)_x = ε (D(v) v_x)_x`, their
//! eigenstructure, and the built-in catalogue.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, fd_jacobian, mat_max_norm, null_vector, State};

/// Flux, conserved map and viscosity of a system.
///
/// Only `dim`, `flux` and `viscosity` are required. The Jacobian falls back to
/// central differences. Implementations that override `conserved` must also
/// override `conserved_jacobian`.
pub trait ConservationLaw: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn flux(&self, v: &State) -> State;
    /// Allocation-free `flux`, written into `out`.
    fn flux_into(&self, v: &State, out: &mut [f64]) {
        out.copy_from_slice(self.flux(v).as_slice());
    }
    fn flux_jacobian(&self, v: &State) -> DMatrix<f64> {
        fd_jacobian(|w| self.flux(w), v)
    }
    fn conserved(&self, v: &State) -> State {
        v.clone()
    }
    fn conserved_jacobian(&self, v: &State) -> DMatrix<f64> {
        DMatrix::identity(v.len(), v.len())
    }
    fn viscosity(&self, v: &State) -> DMatrix<f64>;
    /// `D` when it does not depend on the state.
    fn constant_viscosity(&self) -> Option<DMatrix<f64>> {
        None
    }
    /// Convex entropy and entropy flux `(η, q)`, when known.
    fn entropy(&self, _v: &State) -> Option<(f64, f64)> {
        None
    }
    /// Whether states are physically meaningful (e.g. positive specific volume).
    fn admissible(&self, _v: &State) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    GenuinelyNonlinear,
    LinearlyDegenerate,
}

/// A conservation-law system together with its small-data neighbourhood.
#[derive(Debug, Clone)]
pub struct SystemDef {
    pub name: String,
    pub law: Arc<dyn ConservationLaw>,
    pub fields: Vec<FieldKind>,
    pub reference: State,
    pub radius: f64,
    pub tol_char: f64,
    /// Largest admissible wave-curve parameter (default: the ball diameter).
    pub s_max: f64,
    /// Size of the leading zero block of the viscosity matrix.
    pub hyperbolic_dim: usize,
    /// Non-fatal diagnostics collected at construction (Kawashima–Shizuta).
    pub warnings: Vec<String>,
}

/// Eigenvalues and normalised eigenvectors of `(Dg)⁻¹ Df` at a state.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub state: State,
    pub values: Vec<f64>,
    pub right: Vec<DVector<f64>>,
    pub left: Vec<DVector<f64>>,
}

impl EigenDecomposition {
    pub fn right_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.right)
    }
}

impl SystemDef {
    /// Builds and validates a system. `radius` defaults to `0.25 (1 + |v*|)`.
    pub fn new(
        name: impl Into<String>,
        law: Arc<dyn ConservationLaw>,
        fields: Vec<FieldKind>,
        reference: State,
        radius: Option<f64>,
    ) -> Result<Self> {
        let n = law.dim();
        if fields.len() != n || reference.len() != n {
            return Err(Error::InvalidSystem(format!(
                "dimension mismatch: N = {n}, {} field tags, reference of length {}",
                fields.len(),
                reference.len()
            )));
        }
        let radius = radius.unwrap_or(0.25 * (1.0 + reference.norm()));
        let d = law.viscosity(&reference);
        let hyperbolic_dim = leading_zero_block(&d);
        let mut sys = SystemDef {
            name: name.into(),
            law,
            fields,
            reference,
            radius,
            tol_char: 1e-8,
            s_max: 2.0 * radius,
            hyperbolic_dim,
            warnings: Vec::new(),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn flux(&self, v: &State) -> State {
        self.law.flux(v)
    }

    pub fn conserved(&self, v: &State) -> State {
        self.law.conserved(v)
    }

    pub fn viscosity(&self, v: &State) -> DMatrix<f64> {
        self.law.viscosity(v)
    }

    /// `(Dg)⁻¹ Df` at `v`.
    pub fn characteristic_matrix(&self, v: &State) -> Result<DMatrix<f64>> {
        let df = self.law.flux_jacobian(v);
        let dg = self.law.conserved_jacobian(v);
        let inv = dg.try_inverse().ok_or_else(|| Error::HyperbolicityViolated {
            state: v.iter().copied().collect(),
            reason: "Jacobian of the conserved map is singular".into(),
        })?;
        Ok(inv * df)
    }

    pub fn in_ball(&self, v: &State) -> bool {
        (v - &self.reference).norm() <= self.radius && self.law.admissible(v)
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.dim();
        let v = self.reference.clone();
        if !self.law.admissible(&v) {
            return Err(Error::InvalidSystem("reference state is not admissible".into()));
        }
        let eig = eigen_structure(self, &v)?;
        let d = self.viscosity(&v);
        let h = self.hyperbolic_dim;
        for i in 0..n {
            for j in 0..n {
                if (i < h || j < h) && d[(i, j)].abs() > 1e-14 {
                    return Err(Error::InvalidSystem(
                        "viscosity matrix is not in block normal form [[0,0],[0,b]]".into(),
                    ));
                }
            }
        }
        if h < n {
            let b = d.view((h, h), (n - h, n - h)).into_owned();
            let sym = (&b + b.transpose()) * 0.5;
            let min_eig = eigenvalues(&sym).first().map(|e| e.0).unwrap_or(0.0);
            if min_eig <= 0.0 {
                return Err(Error::InvalidSystem(
                    "parabolic block of the viscosity matrix is not positive definite".into(),
                ));
            }
        }
        // Kawashima–Shizuta: no eigenvector of the symbol lies in ker D.
        for (k, r) in eig.right.iter().enumerate() {
            if (&d * r).norm() <= 1e-10 * r.norm() {
                self.warnings.push(format!(
                    "Kawashima-Shizuta condition fails: eigenvector {} lies in ker D",
                    k + 1
                ));
            }
        }
        Ok(())
    }

    /// Largest characteristic speed over a sample of the admissible ball.
    pub fn max_speed(&self) -> f64 {
        let mut best = 0.0_f64;
        for v in self.ball_samples() {
            if let Ok(m) = self.characteristic_matrix(&v) {
                for (re, _) in eigenvalues(&m) {
                    best = best.max(re.abs());
                }
            }
        }
        best
    }

    /// Largest value of the fastest eigenvalue over the ball samples.
    pub fn max_top_eigenvalue(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for v in self.ball_samples() {
            if let Ok(m) = self.characteristic_matrix(&v) {
                if let Some(&(re, _)) = eigenvalues(&m).last() {
                    best = best.max(re);
                }
            }
        }
        best
    }

    /// Centre, the `2N` axis points at distance `r*`, and the `2^N` diagonal
    /// corners scaled into the ball.
    pub fn ball_samples(&self) -> Vec<State> {
        let n = self.dim();
        let mut out = vec![self.reference.clone()];
        let r = self.radius * 0.999;
        for i in 0..n {
            for s in [-1.0, 1.0] {
                let mut v = self.reference.clone();
                v[i] += s * r;
                out.push(v);
            }
        }
        for mask in 0..(1usize << n) {
            let mut v = self.reference.clone();
            for i in 0..n {
                let s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
                v[i] += s * r / (n as f64).sqrt();
            }
            out.push(v);
        }
        out.retain(|v| self.law.admissible(v));
        out
    }
}

fn leading_zero_block(d: &DMatrix<f64>) -> usize {
    let n = d.nrows();
    let mut h = 0;
    while h < n {
        let row_zero = (0..n).all(|j| d[(h, j)].abs() <= 1e-14);
        let col_zero = (0..n).all(|i| d[(i, h)].abs() <= 1e-14);
        if row_zero && col_zero {
            h += 1;
        } else {
            break;
        }
    }
    h
}

fn state_vec(v: &State) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Real, distinct eigenvalues sorted ascending, or a hyperbolicity error.
pub fn sorted_real_eigenvalues(sys: &SystemDef, v: &State) -> Result<Vec<f64>> {
    let m = sys.characteristic_matrix(v)?;
    real_distinct(&m, v)
}

fn real_distinct(m: &DMatrix<f64>, v: &State) -> Result<Vec<f64>> {
    let scale = 1.0 + mat_max_norm(m);
    let ev = eigenvalues(m);
    let mut vals = Vec::with_capacity(ev.len());
    for (re, im) in ev {
        if im.abs() > 1e-10 * scale {
            return Err(Error::HyperbolicityViolated {
                state: state_vec(v),
                reason: format!("complex eigenvalue {re} ± {}i", im.abs()),
            });
        }
        vals.push(re);
    }
    for w in vals.windows(2) {
        if w[1] - w[0] <= 1e-9 * scale {
            return Err(Error::HyperbolicityViolated {
                state: state_vec(v),
                reason: format!("coalescing eigenvalues {} and {}", w[0], w[1]),
            });
        }
    }
    Ok(vals)
}

/// Eigenvalues, right and left eigenvectors of `(Dg)⁻¹Df` at `v`.
///
/// Genuinely nonlinear fields are scaled so that `∇λ_k · r_k = 1`; linearly
/// degenerate ones have `|r_k| = 1` with their largest component positive.
pub fn eigen_structure(sys: &SystemDef, v: &State) -> Result<EigenDecomposition> {
    let m = sys.characteristic_matrix(v)?;
    let values = real_distinct(&m, v)?;
    let n = values.len();
    let mut right = Vec::with_capacity(n);
    for &lam in &values {
        right.push(unit_right(&m, lam));
    }
    let rmat = DMatrix::from_columns(&right);
    let linv = rmat.clone().try_inverse().ok_or_else(|| Error::HyperbolicityViolated {
        state: state_vec(v),
        reason: "eigenvectors are not independent".into(),
    })?;
    let mut left: Vec<DVector<f64>> = (0..n).map(|i| linv.row(i).transpose()).collect();
    for k in 0..n {
        if sys.fields[k] == FieldKind::GenuinelyNonlinear {
            let dl = eigenvalue_derivative(sys, v, &right[k], &left[k]);
            if dl.abs() <= 1e-10 {
                return Err(Error::HyperbolicityViolated {
                    state: state_vec(v),
                    reason: format!("field {} declared genuinely nonlinear but ∇λ·r = {dl:e}", k + 1),
                });
            }
            right[k] /= dl;
            left[k] *= dl;
        }
    }
    Ok(EigenDecomposition { state: v.clone(), values, right, left })
}

fn unit_right(m: &DMatrix<f64>, lam: f64) -> DVector<f64> {
    let n = m.nrows();
    let mut r = null_vector(&(m - DMatrix::identity(n, n) * lam));
    // one step of inverse iteration tightens the residual
    let perturbed = m - DMatrix::identity(n, n) * (lam + 1e-13 * (1.0 + lam.abs()));
    if let Some(refined) = perturbed.lu().solve(&r) {
        let nr = refined.norm();
        if nr.is_finite() && nr > 0.0 {
            r = refined / nr;
        }
    }
    if r[r.iamax()] < 0.0 {
        r = -r;
    }
    r
}

/// The `k`-th right eigenvector of [`eigen_structure`] alone, without the
/// other fields.
pub fn right_eigenvector(sys: &SystemDef, v: &State, k: usize) -> Result<DVector<f64>> {
    let m = sys.characteristic_matrix(v)?;
    let values = real_distinct(&m, v)?;
    let r = unit_right(&m, values[k]);
    if sys.fields[k] != FieldKind::GenuinelyNonlinear {
        return Ok(r);
    }
    let n = values.len();
    let mut l = null_vector(&(m.transpose() - DMatrix::identity(n, n) * values[k]));
    let lr = l.dot(&r);
    if lr.abs() <= 1e-12 * l.norm() {
        return Err(Error::HyperbolicityViolated { state: state_vec(v), reason: "eigenvectors are not independent".into() });
    }
    l /= lr;
    let dl = eigenvalue_derivative(sys, v, &r, &l);
    if dl.abs() <= 1e-10 {
        return Err(Error::HyperbolicityViolated {
            state: state_vec(v),
            reason: format!("field {} declared genuinely nonlinear but ∇λ·r = {dl:e}", k + 1),
        });
    }
    Ok(r / dl)
}

/// `∇λ_k · r` via the perturbation formula `ℓ_k · (∂_r A) r_k`, with a
/// fourth-order central difference for `∂_r A`.
pub fn eigenvalue_derivative(sys: &SystemDef, v: &State, r: &DVector<f64>, l: &DVector<f64>) -> f64 {
    let h = 1e-3 * (1.0 + v.norm()) / r.norm().max(1e-300);
    let at = |t: f64| sys.characteristic_matrix(&(v + r * t)).ok();
    match (at(2.0 * h), at(h), at(-h), at(-2.0 * h)) {
        (Some(a2), Some(a1), Some(m1), Some(m2)) => {
            let da = ((a1 - m1) * 8.0 - (a2 - m2)) / (12.0 * h);
            l.dot(&(da * r))
        }
        _ => f64::NAN,
    }
}

/// Index (0-based) of the boundary characteristic family, if any.
///
/// A family qualifies when `|λ_k(v)| ≤ tol_char` or when `λ_k` takes both
/// signs over the sampled admissible ball around `v*`.
pub fn classify_boundary_field(sys: &SystemDef, v: &State) -> Result<Option<usize>> {
    let vals = sorted_real_eigenvalues(sys, v)?;
    let n = vals.len();
    let mut candidates: Vec<usize> = Vec::new();
    let mut has_pos = vec![false; n];
    let mut has_neg = vec![false; n];
    let mut near_zero = vec![false; n];
    for w in sys.ball_samples() {
        if let Ok(vs) = sorted_real_eigenvalues(sys, &w) {
            for k in 0..n {
                if vs[k].abs() <= sys.tol_char {
                    near_zero[k] = true;
                } else if vs[k] > 0.0 {
                    has_pos[k] = true;
                } else {
                    has_neg[k] = true;
                }
            }
        }
    }
    for k in 0..n {
        if vals[k].abs() <= sys.tol_char || near_zero[k] || (has_pos[k] && has_neg[k]) {
            candidates.push(k);
        }
    }
    match candidates.len() {
        0 => Ok(None),
        1 => Ok(Some(candidates[0])),
        _ => Err(Error::MultipleCharacteristicFields(candidates.iter().map(|k| k + 1).collect())),
    }
}

// ---------------------------------------------------------------------------
// Catalogue

/// `v_t + A v_x = ε (D v_x)_x` with constant matrices.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl ConservationLaw for LinearSystem {
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn flux(&self, v: &State) -> State {
        &self.a * v
    }
    fn flux_into(&self, v: &State, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.a.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
    }
    fn flux_jacobian(&self, _v: &State) -> DMatrix<f64> {
        self.a.clone()
    }
    fn viscosity(&self, _v: &State) -> DMatrix<f64> {
        self.d.clone()
    }
    fn constant_viscosity(&self) -> Option<DMatrix<f64>> {
        Some(self.d.clone())
    }
    fn entropy(&self, v: &State) -> Option<(f64, f64)> {
        // symmetric A admits η = |v|²/2, q = vᵀAv/2
        if (&self.a - self.a.transpose()).amax() <= 1e-14 {
            Some((0.5 * v.dot(v), 0.5 * v.dot(&(&self.a * v))))
        } else {
            None
        }
    }
}

/// Burgers flux shifted by `a`: `f(u) = (u − a)² / 2`, `D = 1`.
#[derive(Debug, Clone)]
pub struct Burgers {
    pub shift: f64,
}

impl ConservationLaw for Burgers {
    fn dim(&self) -> usize {
        1
    }
    fn flux(&self, v: &State) -> State {
        let w = v[0] - self.shift;
        DVector::from_element(1, 0.5 * w * w)
    }
    fn flux_into(&self, v: &State, out: &mut [f64]) {
        let w = v[0] - self.shift;
        out[0] = 0.5 * w * w;
    }
    fn flux_jacobian(&self, v: &State) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v[0] - self.shift)
    }
    fn viscosity(&self, _v: &State) -> DMatrix<f64> {
        DMatrix::identity(1, 1)
    }
    fn constant_viscosity(&self) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(1, 1))
    }
    fn entropy(&self, v: &State) -> Option<(f64, f64)> {
        let u = v[0];
        let a = self.shift;
        // η = u²/2, q' = u f'(u) = u (u − a)
        Some((0.5 * u * u, u * u * u / 3.0 - a * u * u / 2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PSystemViscosity {
    /// `D = I`.
    Artificial,
    /// `D = [[0, 0], [0, μ / v]]`.
    NavierStokes { mu: f64 },
}

/// Isentropic gas dynamics in Lagrangian coordinates, unknowns `(v, u)`,
/// `f = (−u, p(v))`, `p(v) = v^(−γ)`.
#[derive(Debug, Clone)]
pub struct PSystem {
    pub gamma: f64,
    pub viscosity: PSystemViscosity,
}

impl PSystem {
    pub fn pressure(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }
    pub fn dpressure(&self, v: f64) -> f64 {
        -self.gamma * v.powf(-self.gamma - 1.0)
    }
}

impl ConservationLaw for PSystem {
    fn dim(&self) -> usize {
        2
    }
    fn flux(&self, s: &State) -> State {
        DVector::from_vec(vec![-s[1], self.pressure(s[0])])
    }
    fn flux_into(&self, s: &State, out: &mut [f64]) {
        out[0] = -s[1];
        out[1] = self.pressure(s[0]);
    }
    fn flux_jacobian(&self, s: &State) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, self.dpressure(s[0]), 0.0])
    }
    fn viscosity(&self, s: &State) -> DMatrix<f64> {
        match self.viscosity {
            PSystemViscosity::Artificial => DMatrix::identity(2, 2),
            PSystemViscosity::NavierStokes { mu } => {
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, mu / s[0]])
            }
        }
    }
    fn constant_viscosity(&self) -> Option<DMatrix<f64>> {
        (self.viscosity == PSystemViscosity::Artificial).then(|| DMatrix::identity(2, 2))
    }
    fn entropy(&self, s: &State) -> Option<(f64, f64)> {
        let (v, u) = (s[0], s[1]);
        // η = u²/2 + ∫_v^∞ p, q = u p(v)
        let g = self.gamma;
        Some((0.5 * u * u + v.powf(1.0 - g) / (g - 1.0), u * self.pressure(v)))
    }
    fn admissible(&self, s: &State) -> bool {
        s[0] > 0.0 && s.iter().all(|x| x.is_finite())
    }
}

/// Full gas dynamics in Lagrangian coordinates, unknowns `(v, u, E)` with
/// `p = (γ − 1)(E − u²/2)/v`, `f = (−u, p, p u)` and artificial viscosity.
#[derive(Debug, Clone)]
pub struct LagrangianEuler {
    pub gamma: f64,
}

impl LagrangianEuler {
    pub fn pressure(&self, s: &State) -> f64 {
        (self.gamma - 1.0) * (s[2] - 0.5 * s[1] * s[1]) / s[0]
    }
}

impl ConservationLaw for LagrangianEuler {
    fn dim(&self) -> usize {
        3
    }
    fn flux(&self, s: &State) -> State {
        let p = self.pressure(s);
        DVector::from_vec(vec![-s[1], p, p * s[1]])
    }
    fn flux_into(&self, s: &State, out: &mut [f64]) {
        let p = self.pressure(s);
        out[0] = -s[1];
        out[1] = p;
        out[2] = p * s[1];
    }
    fn flux_jacobian(&self, s: &State) -> DMatrix<f64> {
        let (v, u) = (s[0], s[1]);
        let p = self.pressure(s);
        let pv = -p / v;
        let pu = -(self.gamma - 1.0) * u / v;
        let pe = (self.gamma - 1.0) / v;
        DMatrix::from_row_slice(
            3,
            3,
            &[0.0, -1.0, 0.0, pv, pu, pe, u * pv, u * pu + p, u * pe],
        )
    }
    fn viscosity(&self, _s: &State) -> DMatrix<f64> {
        DMatrix::identity(3, 3)
    }
    fn constant_viscosity(&self) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(3, 3))
    }
    fn admissible(&self, s: &State) -> bool {
        s[0] > 0.0 && self.pressure(s) > 0.0 && s.iter().all(|x| x.is_finite())
    }
}

/// Linear constant-coefficient system; every field is linearly degenerate.
pub fn linear(a: DMatrix<f64>, d: DMatrix<f64>, reference: Option<State>, radius: Option<f64>) -> Result<SystemDef> {
    let n = a.nrows();
    if a.ncols() != n || d.nrows() != n || d.ncols() != n {
        return Err(Error::InvalidSystem("A and D must be square of equal size".into()));
    }
    let reference = reference.unwrap_or_else(|| DVector::zeros(n));
    SystemDef::new(
        "linear",
        Arc::new(LinearSystem { a, d }),
        vec![FieldKind::LinearlyDegenerate; n],
        reference,
        radius,
    )
}

pub fn burgers(shift: f64, reference: Option<f64>, radius: Option<f64>) -> Result<SystemDef> {
    let reference = DVector::from_element(1, reference.unwrap_or(shift));
    SystemDef::new(
        "burgers",
        Arc::new(Burgers { shift }),
        vec![FieldKind::GenuinelyNonlinear],
        reference,
        radius,
    )
}

pub fn p_system(gamma: f64, viscosity: PSystemViscosity, reference: Option<State>, radius: Option<f64>) -> Result<SystemDef> {
    if gamma <= 1.0 {
        return Err(Error::InvalidSystem("p-system needs γ > 1".into()));
    }
    let reference = reference.unwrap_or_else(|| DVector::from_vec(vec![1.0, 0.0]));
    SystemDef::new(
        "p-system",
        Arc::new(PSystem { gamma, viscosity }),
        vec![FieldKind::GenuinelyNonlinear; 2],
        reference,
        radius,
    )
}

pub fn lagrangian_euler(gamma: f64, reference: Option<State>, radius: Option<f64>) -> Result<SystemDef> {
    if gamma <= 1.0 {
        return Err(Error::InvalidSystem("Euler needs γ > 1".into()));
    }
    let reference = reference.unwrap_or_else(|| DVector::from_vec(vec![1.0, 0.0, 2.5]));
    SystemDef::new(
        "lagrangian-euler",
        Arc::new(LagrangianEuler { gamma }),
        vec![
            FieldKind::GenuinelyNonlinear,
            FieldKind::LinearlyDegenerate,
            FieldKind::GenuinelyNonlinear,
        ],
        reference,
        radius,
    )
}
