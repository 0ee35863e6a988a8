use bdry_fronts::boundary::{check_equiv_d, linear_boundary_trace, solve_boundary_riemann, LinearBoundaryProblem};
use bdry_fronts::front_tracking::{run, Datum, Domain, TrackingConfig};
use bdry_fronts::riemann::{compose, sample_fan, solve_riemann, WaveKind};
use bdry_fronts::system::{lagrangian_euler, linear, p_system, sorted_real_eigenvalues, PSystemViscosity, SystemDef};
use bdry_fronts::State;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn psys() -> SystemDef {
    p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap()
}

fn near(sys: &SystemDef, offs: &[f64]) -> State {
    &sys.reference + State::from_column_slice(offs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riemann_fan_connects_data_and_satisfies_rankine_hugoniot(
        a in prop::collection::vec(-0.05..0.05f64, 2),
        b in prop::collection::vec(-0.05..0.05f64, 2),
    ) {
        let sys = psys();
        let (l, r) = (near(&sys, &a), near(&sys, &b));
        let fan = solve_riemann(&sys, &l, &r).unwrap();
        prop_assert_eq!(fan.states.len(), fan.waves.len() + 1);
        prop_assert!((&fan.states[0] - &l).amax() <= 1e-12);
        prop_assert!((fan.states.last().unwrap() - &r).amax() <= 1e-9);
        for w in &fan.waves {
            if w.kind != WaveKind::Rarefaction {
                let s = w.speeds.0;
                let res = (sys.conserved(&w.right) - sys.conserved(&w.left)) * s - (sys.flux(&w.right) - sys.flux(&w.left));
                prop_assert!(res.amax() <= 1e-9 * (1.0 + sys.flux(&w.left).amax()));
            }
            if w.kind == WaveKind::Shock {
                // Lax condition
                let k = w.family.unwrap();
                let ll = sorted_real_eigenvalues(&sys, &w.left).unwrap()[k];
                let lr = sorted_real_eigenvalues(&sys, &w.right).unwrap()[k];
                prop_assert!(lr <= w.speeds.0 + 1e-9 && w.speeds.0 <= ll + 1e-9);
            }
        }
        prop_assert!((sample_fan(&sys, &fan, -1e3) - &l).amax() <= 1e-12);
        prop_assert!((sample_fan(&sys, &fan, 1e3) - &r).amax() <= 1e-9);
    }

    #[test]
    fn composed_waves_are_recovered_by_the_solver(s in prop::collection::vec(-0.04..0.04f64, 3)) {
        let sys = lagrangian_euler(1.4, None, None).unwrap();
        let l = sys.reference.clone();
        let waves = compose(&sys, &l, &s).unwrap();
        let r = waves.last().unwrap().right.clone();
        let fan = solve_riemann(&sys, &l, &r).unwrap();
        for (k, &sk) in s.iter().enumerate() {
            let got: f64 = fan.waves.iter().filter(|w| w.family == Some(k)).map(|w| w.strength).sum();
            prop_assert!((got - sk).abs() <= 1e-7, "family {}: {} vs {}", k, got, sk);
        }
    }

    #[test]
    fn linear_trace_is_split_by_the_two_subspaces(
        d in prop::collection::vec(-0.4..0.4f64, 4),
        v0 in prop::collection::vec(-1.0..1.0f64, 2),
        vb in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let dm = DMatrix::identity(2, 2) + DMatrix::from_row_slice(2, 2, &d);
        let prob = LinearBoundaryProblem::new(a, dm.clone(), State::from_vec(v0.clone()), State::from_vec(vb.clone()));
        prop_assume!(prob.is_ok());
        let t = linear_boundary_trace(&prob.unwrap()).unwrap();
        // outgoing part changes only the second component
        prop_assert!((t.trace[0] - v0[0]).abs() <= 1e-10);
        // v_b − v̄ is an eigenvector of D⁻¹A with negative eigenvalue
        let m = dm.try_inverse().unwrap() * DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let w = State::from_vec(vb.clone()) - &t.trace;
        if w.norm() > 1e-9 {
            let mw = &m * &w;
            let lam = mw.dot(&w) / w.dot(&w);
            prop_assert!(lam < 0.0);
            prop_assert!((mw - &w * lam).amax() <= 1e-8 * (1.0 + w.amax()));
        }
        // the layer starts at v_b and decays to the trace
        prop_assert!((t.layer(0.0) - State::from_vec(vb)).amax() <= 1e-9);
        prop_assert!((t.layer(60.0) - &t.trace).amax() <= 1e-8);
    }

    #[test]
    fn boundary_riemann_trace_is_admissible(
        a in prop::collection::vec(-0.04..0.04f64, 2),
        b in prop::collection::vec(-0.04..0.04f64, 2),
    ) {
        let sys = psys();
        let (vin, vb) = (near(&sys, &a), near(&sys, &b));
        let fan = solve_boundary_riemann(&sys, &vin, &vb).unwrap();
        for w in &fan.waves {
            prop_assert!(w.speeds.0.min(w.speeds.1) >= -1e-9);
        }
        let end = fan.waves.last().map_or(fan.trace.clone(), |w| w.right.clone());
        prop_assert!((end - &vin).amax() <= 1e-8);
        prop_assert!(check_equiv_d(&sys, &fan.trace, &vb).unwrap().is_some());
    }

    #[test]
    fn constant_data_stay_constant(c in prop::collection::vec(-0.05..0.05f64, 2)) {
        let sys = psys();
        let v = near(&sys, &c);
        let d = Datum::constant(&v);
        let cfg = TrackingConfig { t_end: 0.5, domain: Domain::HalfLine, sample_times: vec![0.5], ..TrackingConfig::default() };
        let tr = run(&sys, &d, &d, &cfg).unwrap();
        prop_assert_eq!(tr.events, 0);
        prop_assert!((tr.profiles[0].steps.eval(0.3) - &v).amax() == 0.0);
        prop_assert!(tr.sup_tv == 0.0);
    }
}

#[test]
fn symmetric_linear_system_has_constant_coefficients() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
    let sys = linear(a, DMatrix::identity(2, 2), None, None).unwrap();
    let e = sorted_real_eigenvalues(&sys, &State::from_vec(vec![0.3, -0.2])).unwrap();
    assert_eq!(e, vec![-1.0, 1.0]);
}
