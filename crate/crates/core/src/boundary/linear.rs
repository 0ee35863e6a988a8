use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{max_norm, real_eigensystem, stable_subspace, State};
use crate::riemann::{RiemannFan, Wave, WaveKind};

/// Boundary Riemann problem for `v_t + A v_x = ε D v_xx` with constant data.
#[derive(Debug, Clone)]
pub struct LinearBoundaryProblem {
    pub a: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub v0: State,
    pub vb: State,
}

/// Trace, outgoing contacts and the decaying layer of a linear problem.
#[derive(Debug, Clone)]
pub struct LinearTrace {
    pub trace: State,
    pub fan: RiemannFan,
    /// Orthonormal basis of the stable subspace of `D⁻¹A`.
    pub stable_basis: DMatrix<f64>,
    /// Coordinates of `v_b − v̄` in `stable_basis`.
    pub layer_coords: DVector<f64>,
    m: DMatrix<f64>,
}

impl LinearTrace {
    /// Layer `w(y) = v̄ + exp(y D⁻¹A)(v_b − v̄)`, evaluated through the stable basis.
    pub fn layer(&self, y: f64) -> State {
        if self.stable_basis.ncols() == 0 {
            return self.trace.clone();
        }
        let restricted = self.stable_basis.transpose() * &self.m * &self.stable_basis;
        let e = (restricted * y).exp();
        &self.trace + &self.stable_basis * (e * &self.layer_coords)
    }
}

impl LinearBoundaryProblem {
    pub fn new(a: DMatrix<f64>, d: DMatrix<f64>, v0: State, vb: State) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || d.shape() != (n, n) || v0.len() != n || vb.len() != n {
            return Err(Error::InvalidInput("inconsistent dimensions".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
            return Err(Error::InvalidInput("A must be symmetric".into()));
        }
        let sym = (&d + d.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::InvalidInput("D must have a positive definite symmetric part".into()));
        }
        Ok(Self { a, d, v0, vb })
    }

    /// Number of positive eigenvalues of `A`.
    pub fn positive_count(&self) -> usize {
        self.a.clone().symmetric_eigenvalues().iter().filter(|&&l| l > 0.0).count()
    }
}

/// Trace `v̄` with `v_b − v̄` in the stable subspace of `D⁻¹A` and `v̄ − v_0`
/// spanned by the eigenvectors of `A` with positive eigenvalues.
pub fn linear_boundary_trace(prob: &LinearBoundaryProblem) -> Result<LinearTrace> {
    let n = prob.a.nrows();
    let dinv = prob
        .d
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("D must be invertible".into()))?;
    let m = &dinv * &prob.a;
    let stable = stable_subspace(&m)?;
    let (vals, right, _) = real_eigensystem(&prob.a)
        .ok_or_else(|| Error::DegenerateTrace("A needs simple real eigenvalues".into()))?;
    if vals.iter().any(|l| l.abs() <= 1e-12) {
        return Err(Error::DegenerateTrace("A must be invertible".into()));
    }
    let positive: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.0).collect();
    let ms = stable.ncols();
    if ms + positive.len() != n {
        return Err(Error::DegenerateTrace(format!(
            "stable dimension {ms} plus {} outgoing fields differs from N = {n}",
            positive.len()
        )));
    }
    let mut basis = DMatrix::zeros(n, n);
    basis.view_mut((0, 0), (n, ms)).copy_from(&stable);
    for (c, &i) in positive.iter().enumerate() {
        basis.set_column(ms + c, &right.column(i));
    }
    let rhs = &prob.vb - &prob.v0;
    let lu = basis.clone().lu();
    if lu.determinant().abs() <= 1e-12 {
        return Err(Error::DegenerateTrace("stable subspace and outgoing eigenvectors are dependent".into()));
    }
    let coeffs = lu.solve(&rhs).ok_or_else(|| Error::DegenerateTrace("singular trace system".into()))?;
    let alpha = coeffs.rows(0, ms).into_owned();
    let beta = coeffs.rows(ms, positive.len()).into_owned();
    let trace = &prob.vb - &stable * &alpha;

    let mut waves = Vec::new();
    let mut states = vec![trace.clone()];
    let mut current = trace.clone();
    for (c, &i) in positive.iter().enumerate() {
        let s = -beta[c];
        if s == 0.0 {
            continue;
        }
        let next = &current + right.column(i) * s;
        waves.push(Wave {
            family: Some(i),
            kind: WaveKind::Contact,
            left: current.clone(),
            right: next.clone(),
            speeds: (vals[i], vals[i]),
            strength: s,
        });
        states.push(next.clone());
        current = next;
    }
    if let Some(last) = waves.last_mut() {
        debug_assert!(max_norm(&(&last.right - &prob.v0)) <= 1e-10 * (1.0 + max_norm(&prob.v0)));
        last.right = prob.v0.clone();
        *states.last_mut().expect("non-empty") = prob.v0.clone();
    }
    Ok(LinearTrace { trace, fan: RiemannFan { waves, states }, stable_basis: stable, layer_coords: alpha, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::invariance_residual;

    fn st(x: &[f64]) -> State {
        DVector::from_vec(x.to_vec())
    }

    fn gisclon(d: DMatrix<f64>) -> LinearBoundaryProblem {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        LinearBoundaryProblem::new(a, d, st(&[0.0, 0.0]), st(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn identity_viscosity_trace() {
        let out = linear_boundary_trace(&gisclon(DMatrix::identity(2, 2))).unwrap();
        assert!((&out.trace - st(&[0.0, 1.0])).amax() < 1e-12);
        assert_eq!(out.fan.waves.len(), 1);
        let w = &out.fan.waves[0];
        assert_eq!(w.speeds.0, 1.0);
        assert!((w.left[1] - 1.0).abs() < 1e-12 && w.right[1] == 0.0);
    }

    #[test]
    fn coupled_viscosity_trace() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let out = linear_boundary_trace(&gisclon(d.clone())).unwrap();
        assert!((&out.trace - st(&[0.0, 1.5])).amax() < 1e-12);
        let m = d.try_inverse().unwrap() * DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(invariance_residual(&m, &out.stable_basis) < 1e-12);
        // the layer decays to the trace and starts at v_b
        assert!((out.layer(0.0) - st(&[1.0, 1.0])).amax() < 1e-12);
        assert!((out.layer(40.0) - &out.trace).amax() < 1e-12);
    }

    #[test]
    fn equal_data_have_trivial_trace() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let c = st(&[0.2, -0.3]);
        let prob = LinearBoundaryProblem::new(a, DMatrix::identity(2, 2), c.clone(), c.clone()).unwrap();
        let out = linear_boundary_trace(&prob).unwrap();
        assert_eq!(out.trace, c);
        assert!(out.fan.waves.is_empty());
        assert_eq!(prob.positive_count(), 1);
    }

    #[test]
    fn rejects_non_symmetric_a() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, 1.0]);
        assert!(LinearBoundaryProblem::new(a, DMatrix::identity(2, 2), st(&[0.0, 0.0]), st(&[0.0, 0.0])).is_err());
    }
}
