//! Browser bindings: Riemann fan sampling, the linear boundary trace as a
//! function of the viscosity matrix, and the scalar boundary layer.
//!
//! Every export returns a flat `Float64Array`; errors surface as JS
//! exceptions carrying the solver message.

use bdry_fronts::boundary::{
    linear_boundary_trace, solve_boundary_layer, solve_boundary_riemann, solve_boundary_riemann_star,
    LinearBoundaryProblem,
};
use bdry_fronts::riemann::{sample_fan, solve_riemann};
use bdry_fronts::system::{burgers, lagrangian_euler, linear, p_system, PSystemViscosity, SystemDef};
use bdry_fronts::State;
use nalgebra::DMatrix;
use wasm_bindgen::prelude::*;

fn system(name: &str) -> Result<SystemDef, String> {
    let r = match name {
        "burgers" => burgers(0.0, None, None),
        "p-system" => p_system(2.0, PSystemViscosity::Artificial, None, None),
        "euler" => lagrangian_euler(1.4, None, None),
        other => return Err(format!("unknown system `{other}`")),
    };
    r.map_err(|e| e.to_string())
}

/// Rows `(ξ, v…)` of the self-similar Riemann solution at `n` points of
/// `[xi_min, xi_max]`.
pub fn fan_samples(name: &str, left: &[f64], right: &[f64], xi_min: f64, xi_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let sys = system(name)?;
    if left.len() != sys.dim() || right.len() != sys.dim() {
        return Err(format!("states must have {} components", sys.dim()));
    }
    if n < 2 || !(xi_max > xi_min) {
        return Err("need n ≥ 2 and xi_max > xi_min".into());
    }
    let fan = solve_riemann(&sys, &State::from_column_slice(left), &State::from_column_slice(right)).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(n * (sys.dim() + 1));
    for i in 0..n {
        let xi = xi_min + (xi_max - xi_min) * i as f64 / (n - 1) as f64;
        out.push(xi);
        out.extend(sample_fan(&sys, &fan, xi).iter());
    }
    Ok(out)
}

/// For `A = diag(−1, 1)`, `v₀ = 0`, `v_b = (1, 1)` and `D = [[d11, d12], [d21, d22]]`:
/// `[closed-form trace (2), ∼_D trace (2), ∼_* trace (2)]`.
pub fn gisclon(d11: f64, d12: f64, d21: f64, d22: f64) -> Result<Vec<f64>, String> {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
    let d = DMatrix::from_row_slice(2, 2, &[d11, d12, d21, d22]);
    let (v0, vb) = (State::from_vec(vec![0.0, 0.0]), State::from_vec(vec![1.0, 1.0]));
    let prob = LinearBoundaryProblem::new(a.clone(), d.clone(), v0.clone(), vb.clone()).map_err(|e| e.to_string())?;
    let closed = linear_boundary_trace(&prob).map_err(|e| e.to_string())?.trace;
    let sys = linear(a, d, Some(State::from_vec(vec![0.5, 0.5])), Some(2.0)).map_err(|e| e.to_string())?;
    let sim_d = solve_boundary_riemann(&sys, &v0, &vb).map_err(|e| e.to_string())?.trace;
    let star = solve_boundary_riemann_star(&sys, &v0, &vb).map_err(|e| e.to_string())?.trace;
    Ok(closed.iter().chain(sim_d.iter()).chain(star.iter()).copied().collect())
}

/// Burgers layer `w' = f(w) − f(v̲)` from `w(0) = v_b` to `v̲`, sampled at `n`
/// points of `[0, y_max]`; empty when no layer exists.
pub fn burgers_layer(lower: f64, v_b: f64, y_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 || !(y_max > 0.0) {
        return Err("need n ≥ 2 and y_max > 0".into());
    }
    let radius = 2.0 * (lower.abs() + v_b.abs()).max(0.5);
    let sys = burgers(0.0, Some(0.0), Some(radius)).map_err(|e| e.to_string())?;
    let p = solve_boundary_layer(&sys, &State::from_element(1, lower), &State::from_element(1, v_b)).map_err(|e| e.to_string())?;
    Ok(match p {
        Some(p) => (0..n).map(|i| p.eval(y_max * i as f64 / (n - 1) as f64)[0]).collect(),
        None => Vec::new(),
    })
}

#[wasm_bindgen(js_name = riemannFan)]
pub fn riemann_fan_js(system: &str, left: &[f64], right: &[f64], xi_min: f64, xi_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    fan_samples(system, left, right, xi_min, xi_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = gisclonTraces)]
pub fn gisclon_js(d11: f64, d12: f64, d21: f64, d22: f64) -> Result<Vec<f64>, JsValue> {
    gisclon(d11, d12, d21, d22).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = burgersLayer)]
pub fn burgers_layer_js(lower: f64, v_b: f64, y_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    burgers_layer(lower, v_b, y_max, n).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fan_endpoints_are_the_data() {
        let s = fan_samples("p-system", &[1.0, 0.0], &[1.05, -0.02], -3.0, 3.0, 7).unwrap();
        assert_eq!(s.len(), 21);
        assert_eq!(&s[1..3], &[1.0, 0.0]);
        assert!((s[19] - 1.05).abs() < 1e-12 && (s[20] + 0.02).abs() < 1e-12);
    }

    #[test]
    fn gisclon_coupled_traces() {
        let t = gisclon(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((t[0] - 0.0).abs() < 1e-9 && (t[1] - 1.5).abs() < 1e-9);
        assert!((t[2] - t[0]).abs() < 1e-8 && (t[3] - t[1]).abs() < 1e-8);
        assert!((t[5] - t[3]).abs() >= 0.1);
    }

    #[test]
    fn layer_matches_tanh_and_reports_absence() {
        let w = burgers_layer(-1.0, 0.0, 10.0, 11).unwrap();
        for (i, x) in w.iter().enumerate() {
            assert!((x + (0.5 * i as f64).tanh()).abs() < 1e-6);
        }
        assert!(burgers_layer(1.0, 0.0, 10.0, 11).unwrap().is_empty());
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(fan_samples("nope", &[0.0], &[0.0], -1.0, 1.0, 3).is_err());
        assert!(fan_samples("burgers", &[0.0, 1.0], &[0.0], -1.0, 1.0, 3).is_err());
    }
}
