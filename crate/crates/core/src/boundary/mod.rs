//! Viscous boundary condition `β̃`, boundary layers, the admissible-trace
//! relation `∼_D`, and boundary Riemann problems on the half-line `x > 0`.

mod layer;
mod linear;
mod riemann;

use nalgebra::DVector;

pub use layer::{solve_boundary_layer, BoundaryLayerProfile};
pub use linear::{linear_boundary_trace, LinearBoundaryProblem, LinearTrace};
pub use riemann::{
    check_equiv_d, check_equiv_star, solve_boundary_riemann, solve_boundary_riemann_star, BoundaryFan,
    EquivWitness, TraceRelation,
};

use crate::error::{Error, Result};
use crate::linalg::{real_eigensystem, State};
use crate::system::SystemDef;

/// An incoming characteristic direction of the hyperbolic block at a state.
#[derive(Debug, Clone)]
pub struct IncomingDirection {
    pub speed: f64,
    /// Left eigenvector of the hyperbolic block `A₁₁`.
    pub left: DVector<f64>,
}

/// Incoming (positive-speed) directions of the hyperbolic block `A₁₁(v_b)`.
///
/// A zero eigenvalue that vanishes over the whole admissible ball (as for the
/// mass equation in Lagrangian coordinates) counts as not incoming; a zero
/// eigenvalue that can change sign makes the incoming count ill-defined.
pub fn incoming_hyperbolic(sys: &SystemDef, v_b: &State) -> Result<Vec<IncomingDirection>> {
    let h = sys.hyperbolic_dim;
    if h == 0 {
        return Ok(Vec::new());
    }
    let block = |v: &State| -> Result<nalgebra::DMatrix<f64>> {
        Ok(sys.characteristic_matrix(v)?.view((0, 0), (h, h)).into_owned())
    };
    let bad = || Error::CharacteristicHyperbolicBlock(v_b.iter().copied().collect());
    let (vals, _, left) = real_eigensystem(&block(v_b)?).ok_or_else(bad)?;
    let mut out = Vec::new();
    for (i, &lam) in vals.iter().enumerate() {
        if lam > sys.tol_char {
            out.push(IncomingDirection { speed: lam, left: left.row(i).transpose() });
        } else if lam.abs() <= sys.tol_char {
            let identically_zero = sys.ball_samples().iter().all(|w| {
                block(w)
                    .ok()
                    .and_then(|m| real_eigensystem(&m))
                    .map(|(vs, _, _)| vs[i].abs() <= sys.tol_char)
                    .unwrap_or(false)
            });
            if !identically_zero {
                return Err(bad());
            }
        }
    }
    Ok(out)
}

/// Residual of the viscous boundary condition: all parabolic components of
/// `w0 − v_b`, followed by the incoming characteristic projections of its
/// hyperbolic components. Zero iff the condition holds.
pub fn beta_tilde(sys: &SystemDef, w0: &State, v_b: &State) -> Result<DVector<f64>> {
    let n = sys.dim();
    let h = sys.hyperbolic_dim;
    let diff = w0 - v_b;
    let incoming = incoming_hyperbolic(sys, v_b)?;
    let mut out = Vec::with_capacity(n - h + incoming.len());
    out.extend(diff.iter().skip(h).copied());
    let hyp = diff.rows(0, h).into_owned();
    out.extend(incoming.iter().map(|d| d.left.dot(&hyp)));
    Ok(DVector::from_vec(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{linear, p_system, ConservationLaw, FieldKind, PSystemViscosity};
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn st(x: &[f64]) -> State {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn invertible_viscosity_is_full_dirichlet() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let sys = linear(a, DMatrix::identity(2, 2), None, None).unwrap();
        let r = beta_tilde(&sys, &st(&[0.1, 0.2]), &st(&[0.1, 0.2])).unwrap();
        assert_eq!(r, st(&[0.0, 0.0]));
        let r = beta_tilde(&sys, &st(&[0.3, 0.2]), &st(&[0.1, 0.25])).unwrap();
        assert!((r - st(&[0.2, -0.05])).amax() < 1e-15);
    }

    #[test]
    fn navier_stokes_like_block_with_inflow() {
        // density / velocity / energy with u > 0 at the wall: density is incoming
        let u = 0.3;
        let a = DMatrix::from_row_slice(3, 3, &[u, 1.0, 0.0, 0.5, u, 0.4, 0.0, 0.7, u]);
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let sys = linear(a, d, None, None).unwrap();
        let r = beta_tilde(&sys, &st(&[0.1, 0.2, 0.3]), &st(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!((r[0], r[1], r[2]), (0.2, 0.3, 0.1));
    }

    #[test]
    fn navier_stokes_like_block_with_outflow() {
        let u = -0.3;
        let a = DMatrix::from_row_slice(3, 3, &[u, 1.0, 0.0, 0.5, u, 0.4, 0.0, 0.7, u]);
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let sys = linear(a, d, None, None).unwrap();
        let r = beta_tilde(&sys, &st(&[0.1, 0.2, 0.3]), &st(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(r.len(), 2);
    }

    #[test]
    fn p_system_navier_stokes_always_fixes_velocity() {
        let sys = p_system(1.4, PSystemViscosity::NavierStokes { mu: 1.0 }, None, None).unwrap();
        let r = beta_tilde(&sys, &st(&[1.1, 0.05]), &st(&[0.9, -0.02])).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.07).abs() < 1e-15);
    }

    #[derive(Debug)]
    struct VaryingMass;
    impl ConservationLaw for VaryingMass {
        fn dim(&self) -> usize {
            2
        }
        fn flux(&self, v: &State) -> State {
            // mass flux ρu with velocity as the second unknown
            st(&[v[0] * v[1], v[1] + 2.0 * v[0]])
        }
        fn viscosity(&self, _v: &State) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0])
        }
    }

    #[test]
    fn sign_changing_hyperbolic_speed_is_rejected() {
        let sys = SystemDef::new(
            "varying",
            Arc::new(VaryingMass),
            // field tags are irrelevant for the block test
            vec![FieldKind::LinearlyDegenerate, FieldKind::LinearlyDegenerate],
            st(&[1.0, 0.0]),
            Some(0.2),
        )
        .unwrap();
        assert!(matches!(
            beta_tilde(&sys, &st(&[1.0, 0.0]), &st(&[1.0, 0.0])),
            Err(Error::CharacteristicHyperbolicBlock(_))
        ));
        assert!(beta_tilde(&sys, &st(&[1.0, 0.1]), &st(&[1.0, 0.1])).is_ok());
    }
}
