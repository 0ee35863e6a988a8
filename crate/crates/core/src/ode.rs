use crate::linalg::State;

/// One classical fourth-order Runge–Kutta step of `z' = rhs(z)`.
pub fn rk4_step<F>(rhs: &F, z: &State, h: f64) -> Option<State>
where
    F: Fn(&State) -> Option<State>,
{
    let k1 = rhs(z)?;
    let k2 = rhs(&(z + &k1 * (0.5 * h)))?;
    let k3 = rhs(&(z + &k2 * (0.5 * h)))?;
    let k4 = rhs(&(z + &k3 * h))?;
    Some(z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrate over `[0, span]` with `steps` equal RK4 steps (negative `span`
/// integrates backwards).
pub fn rk4_integrate<F>(rhs: &F, z0: &State, span: f64, steps: usize) -> Option<State>
where
    F: Fn(&State) -> Option<State>,
{
    let h = span / steps as f64;
    let mut z = z0.clone();
    for _ in 0..steps {
        z = rk4_step(rhs, &z, h)?;
    }
    Some(z)
}
