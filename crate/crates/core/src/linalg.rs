//! Small dense linear-algebra helpers built on nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type State = DVector<f64>;

/// Largest absolute entry.
pub fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn mat_max_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Central finite-difference Jacobian with step `1e-6 * (1 + |v|)`.
pub fn fd_jacobian<F>(f: F, v: &State) -> DMatrix<f64>
where
    F: Fn(&State) -> State,
{
    let n = v.len();
    let h = 1e-6 * (1.0 + v.norm());
    let m = f(v).len();
    let mut jac = DMatrix::zeros(m, n);
    for j in 0..n {
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[j] += h;
        vm[j] -= h;
        let col = (f(&vp) - f(&vm)) / (2.0 * h);
        jac.set_column(j, &col);
    }
    jac
}

/// Eigenvalues of a real matrix as (re, im) pairs, sorted by real part.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(m[(0, 0)], 0.0)];
    }
    let mut ev: Vec<(f64, f64)> = m
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    ev
}

/// Unit vector spanning (approximately) the kernel of `m`.
pub fn null_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &s)| if s < bv { (i, s) } else { (bi, bv) });
    let mut out = DVector::zeros(n);
    for j in 0..n {
        out[j] = v_t[(idx, j)];
    }
    out
}

/// Real eigenvalues (ascending) with right eigenvectors (unit norm, largest
/// component positive) as columns and the matching left eigenvectors as rows
/// of the inverse. `None` when the spectrum is not real and simple.
pub fn real_eigensystem(m: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Some((Vec::new(), DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)));
    }
    let scale = 1.0 + mat_max_norm(m);
    let ev = eigenvalues(m);
    if ev.iter().any(|e| e.1.abs() > 1e-10 * scale) {
        return None;
    }
    let vals: Vec<f64> = ev.iter().map(|e| e.0).collect();
    if vals.windows(2).any(|w| w[1] - w[0] <= 1e-12 * scale) {
        return None;
    }
    let mut right = DMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let mut r = null_vector(&(m - DMatrix::identity(n, n) * lam));
        let imax = r.iamax();
        if r[imax] < 0.0 {
            r = -r;
        }
        right.set_column(k, &r);
    }
    let left = right.clone().try_inverse()?;
    Some((vals, right, left))
}

/// Matrix sign function by the scaled Newton iteration.
fn matrix_sign(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut x = m.clone();
    for _ in 0..100 {
        let inv = x.clone().try_inverse()?;
        // determinant scaling accelerates the first iterations
        let det = x.determinant().abs();
        let n = x.nrows() as f64;
        let mu = if det > 0.0 && det.is_finite() { det.powf(-1.0 / n) } else { 1.0 };
        let next = (&x * mu + inv / mu) * 0.5;
        let diff = mat_max_norm(&(&next - &x));
        x = next;
        if diff <= 1e-14 * mat_max_norm(&x).max(1.0) {
            // one unscaled polishing step
            let inv = x.clone().try_inverse()?;
            return Some((&x + inv) * 0.5);
        }
    }
    None
}

/// Orthonormal basis of the column space of `m` using the given rank.
fn column_basis(m: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let n = m.nrows();
    if rank == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut basis = DMatrix::zeros(n, rank);
    for (c, &i) in order.iter().take(rank).enumerate() {
        basis.set_column(c, &u.column(i));
    }
    basis
}

/// Orthonormal basis of the invariant subspace of `m` belonging to eigenvalues
/// with negative real part.
///
/// The spectral projector `(I - sign(m)) / 2` is formed with the matrix sign
/// function and its range is orthonormalised; the result is then polished by
/// one orthogonal subspace iteration so that `m B = B (Bᵀ m B)` holds to
/// rounding level.
pub fn stable_subspace(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidInput("stable_subspace needs a square matrix".into()));
    }
    let scale = mat_max_norm(m).max(1.0);
    let ev = eigenvalues(m);
    for &(re, _) in &ev {
        if re.abs() <= 1e-10 * scale {
            return Err(Error::MarginalSpectrum(re));
        }
    }
    let dim = ev.iter().filter(|e| e.0 < 0.0).count();
    if dim == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    if dim == n {
        return Ok(DMatrix::identity(n, n));
    }
    let sign = matrix_sign(m).ok_or(Error::MarginalSpectrum(0.0))?;
    let proj = (DMatrix::identity(n, n) - sign) * 0.5;
    let mut basis = column_basis(&proj, dim);
    // polish: B <- orth(P B) with the projector rebuilt from the basis
    let pb = &proj * &basis;
    basis = column_basis(&pb, dim);
    Ok(basis)
}

/// Residual of the M-invariance of a basis: `‖MB − B(BᵀMB)‖_max`.
pub fn invariance_residual(m: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    let mb = m * basis;
    let restricted = basis.transpose() * &mb;
    mat_max_norm(&(mb - basis * restricted))
}

/// Outcome of a Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton (Gauss–Newton for non-square systems) iteration with a
/// finite-difference Jacobian. A step that increases the residual is halved
/// up to twelve times.
pub fn newton_fd<F>(f: F, x0: DVector<f64>, tol: f64, max_iter: usize) -> NewtonOutcome
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>>,
{
    let mut x = x0;
    let mut fx = match f(&x) {
        Some(v) => v,
        None => {
            return NewtonOutcome { x, residual: f64::INFINITY, iterations: 0, converged: false }
        }
    };
    let mut res = max_norm(&fx);
    for it in 0..max_iter {
        if res <= tol {
            return NewtonOutcome { x, residual: res, iterations: it, converged: true };
        }
        let n = x.len();
        let h = 1e-7 * (1.0 + max_norm(&x));
        let mut jac = DMatrix::zeros(fx.len(), n);
        let mut ok = true;
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            match (f(&xp), f(&xm)) {
                (Some(a), Some(b)) => jac.set_column(j, &((a - b) / (2.0 * h))),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let square = if jac.nrows() == jac.ncols() { jac.clone().lu().solve(&(-&fx)) } else { None };
        let step = match square {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            // rectangular or singular: least-squares / minimum-norm step
            _ => match jac.clone().svd(true, true).solve(&(-&fx), 1e-12 * mat_max_norm(&jac).max(1e-300)) {
                Ok(s) => s,
                Err(_) => break,
            },
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial = &x + &step * lambda;
            if let Some(ft) = f(&trial) {
                let rt = max_norm(&ft);
                if rt.is_finite() && (rt < res || rt <= tol) {
                    x = trial;
                    fx = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return NewtonOutcome { x, residual: res, iterations: it + 1, converged: res <= tol };
        }
    }
    let converged = res <= tol;
    NewtonOutcome { x, residual: res, iterations: max_iter, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_subspace_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let b = stable_subspace(&m).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((b[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(b[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn stable_subspace_lower_triangular() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, 1.0]);
        let b = stable_subspace(&m).unwrap();
        let s5 = 5f64.sqrt();
        let sign = b[(0, 0)].signum();
        assert!((sign * b[(0, 0)] - 2.0 / s5).abs() < 1e-12);
        assert!((sign * b[(1, 0)] + 1.0 / s5).abs() < 1e-12);
        assert!(invariance_residual(&m, &b) <= 1e-12);
    }

    #[test]
    fn stable_subspace_full_and_marginal() {
        let m = -DMatrix::<f64>::identity(3, 3);
        assert_eq!(stable_subspace(&m).unwrap().ncols(), 3);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(stable_subspace(&rot), Err(Error::MarginalSpectrum(_))));
    }

    #[test]
    fn stable_subspace_complex_pair() {
        let m = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, -2.0, -1.0, 0.5, 0.3, 0.0, 2.0]);
        let b = stable_subspace(&m).unwrap();
        assert_eq!(b.ncols(), 2);
        assert!(invariance_residual(&m, &b) <= 1e-10);
        let restricted = b.transpose() * &m * &b;
        assert!(eigenvalues(&restricted).iter().all(|e| e.0 < 0.0));
    }

    #[test]
    fn newton_solves_scalar_root() {
        let out = newton_fd(
            |x| Some(DVector::from_vec(vec![x[0] * x[0] - 2.0])),
            DVector::from_vec(vec![1.0]),
            1e-13,
            50,
        );
        assert!(out.converged);
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-12);
    }
}
