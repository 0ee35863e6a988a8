//! Inviscid traces against vanishing-viscosity traces for several
//! viscosity matrices.

use bdry_fronts::boundary::{linear_boundary_trace, LinearBoundaryProblem, TraceRelation};
use bdry_fronts::front_tracking::{run, Datum, Domain, Segment};
use bdry_fronts::system::SystemDef;
use bdry_fronts::viscous::viscous_solve;
use bdry_fronts::State;
use nalgebra::DMatrix;

use super::{max_abs_diff, par_map};
use crate::report::{config_hash, RunReport};
use crate::scenario::{Resolved, SystemSpec};

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub label: String,
    /// `front-tracking`, `star`, `linear-oracle`, `viscous`, `extrapolated`,
    /// `cauchy-front-tracking` or `cauchy-viscous`.
    pub source: &'static str,
    pub epsilon: Option<f64>,
    pub trace: State,
    /// Max-norm distance to the first viscosity's row of the same source
    /// and `ε`.
    pub discrepancy: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Default)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    pub runs: Vec<RunReport>,
}

impl CompareTable {
    pub fn find(&self, label: &str, source: &str, epsilon: Option<f64>) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.label == label && r.source == source && r.epsilon == epsilon)
    }

    /// Largest discrepancy among rows of `source`.
    pub fn max_discrepancy(&self, source: &str) -> f64 {
        self.rows.iter().filter(|r| r.source == source).map(|r| r.discrepancy).fold(0.0, f64::max)
    }
}

/// Whole-line datum equal to `v_b` on `x < 0` and to `v_0` on `x > 0`.
pub fn reflected_datum(v0: &Datum, vb: &State) -> Datum {
    let b: Vec<f64> = vb.iter().copied().collect();
    let mut segments = vec![Segment { start: -1.0, left: b.clone(), right: b }];
    let at0 = v0.eval(0.0);
    let first_inside = v0.segments.iter().position(|s| s.start > 0.0);
    let containing = match first_inside {
        Some(0) => None,
        Some(i) => Some(i - 1),
        None => Some(v0.segments.len() - 1),
    };
    if let Some(i) = containing {
        let s = &v0.segments[i];
        let right = if s.left == s.right { at0.iter().copied().collect() } else { s.right.clone() };
        segments.push(Segment { start: 0.0, left: at0.iter().copied().collect(), right });
    } else {
        let c: Vec<f64> = v0.segments[0].left.clone();
        segments.push(Segment { start: 0.0, left: c.clone(), right: c });
    }
    segments.extend(v0.segments.iter().filter(|s| s.start > 0.0).cloned());
    Datum { segments }
}

fn linear_matrices(spec: &SystemSpec) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let a = spec.a.as_ref()?;
    let n = a.len();
    let am = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let dm = match &spec.d {
        Some(d) => DMatrix::from_fn(n, n, |i, j| d[i][j]),
        None => DMatrix::identity(n, n),
    };
    Some((am, dm))
}

enum Job {
    Tracking { variant: usize, relation: TraceRelation, cauchy: bool },
    Viscous { variant: usize, epsilon: f64, cauchy: bool },
}

/// Traces per viscosity: front tracking under `∼_D` and `∼_*`, the linear
/// closed form when available, viscous estimates per `ε` with a linear
/// extrapolation in `ε` from the two smallest, and the whole-line (Cauchy)
/// counterparts, which must not depend on the viscosity.
pub fn compare_limits(res: &Resolved, jobs: usize) -> CompareTable {
    let sc = &res.scenario;
    let delta = sc.deltas.iter().copied().fold(f64::INFINITY, f64::min);
    let mut eps = sc.epsilons.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let smallest = eps.last().copied();
    let mut list = Vec::new();
    for v in 0..res.variants.len() {
        list.push(Job::Tracking { variant: v, relation: TraceRelation::SimD, cauchy: false });
        list.push(Job::Tracking { variant: v, relation: TraceRelation::Star, cauchy: false });
        list.push(Job::Tracking { variant: v, relation: TraceRelation::SimD, cauchy: true });
        for &e in &eps {
            list.push(Job::Viscous { variant: v, epsilon: e, cauchy: false });
        }
        if let Some(e) = smallest {
            list.push(Job::Viscous { variant: v, epsilon: e, cauchy: true });
        }
    }
    let vb0 = res.boundary.eval(0.0);
    let reflected = reflected_datum(&res.initial, &vb0);
    let outcomes = par_map(jobs, list, |job| match job {
        Job::Tracking { variant, relation, cauchy } => {
            let sys: &SystemDef = &res.variants[variant].2;
            let mut tc = sc.tracking_config(delta);
            tc.relation = relation;
            tc.sample_times.clear();
            let (source, v0) = match (cauchy, relation) {
                (true, _) => ("cauchy-front-tracking", &reflected),
                (false, TraceRelation::SimD) => ("front-tracking", &res.initial),
                (false, TraceRelation::Star) => ("star", &res.initial),
            };
            if cauchy {
                tc.domain = Domain::Line;
            }
            let hash = config_hash(&(&res.variants[variant].1, &tc));
            let out = run(sys, v0, &res.boundary, &tc).map(|tr| {
                let st = &tr.final_state;
                if cauchy {
                    st.profile().steps.eval(1e-12).clone()
                } else {
                    st.base.clone()
                }
            });
            (variant, source, None, hash, out)
        }
        Job::Viscous { variant, epsilon, cauchy } => {
            let sys: &SystemDef = &res.variants[variant].2;
            let mut vc = sc.viscous_config(epsilon);
            vc.sample_times.clear();
            let v0 = if cauchy {
                vc.domain = Domain::Line;
                &reflected
            } else {
                &res.initial
            };
            let hash = config_hash(&(&res.variants[variant].1, &vc));
            let out = viscous_solve(sys, v0, &res.boundary, &vc).map(|s| s.traces.last().expect("final trace").1.clone());
            let source = if cauchy { "cauchy-viscous" } else { "viscous" };
            (variant, source, Some(epsilon), hash, out)
        }
    });
    let mut table = CompareTable::default();
    let push = |table: &mut CompareTable, variant: usize, source: &'static str, epsilon: Option<f64>, hash: String, trace: State| {
        let label = res.variants[variant].0.clone();
        let mut run = RunReport::new(format!("{label}/{source}"), hash.clone());
        if let Some(e) = epsilon {
            run.metric("epsilon", e);
        }
        for (i, x) in trace.iter().enumerate() {
            run.metric(&format!("v{}", i + 1), *x);
        }
        table.runs.push(run);
        table.rows.push(CompareRow { label, source, epsilon, trace, discrepancy: 0.0, config_hash: hash });
    };
    for (variant, source, epsilon, hash, out) in outcomes {
        match out {
            Ok(trace) => push(&mut table, variant, source, epsilon, hash, trace),
            Err(e) => {
                let label = &res.variants[variant].0;
                table.runs.push(RunReport::failed(format!("{label}/{source}"), hash, e));
            }
        }
    }
    // closed form and extrapolation
    for (v, (_, spec, _)) in res.variants.iter().enumerate() {
        if let Some((a, d)) = linear_matrices(spec) {
            let hash = config_hash(&(spec, "linear-oracle"));
            let prob = LinearBoundaryProblem::new(a, d, res.initial.eval(0.0), vb0.clone());
            match prob.and_then(|p| linear_boundary_trace(&p)) {
                Ok(t) => push(&mut table, v, "linear-oracle", None, hash, t.trace),
                Err(e) => table.runs.push(RunReport::failed(format!("{}/linear-oracle", res.variants[v].0), hash, e)),
            }
        }
        if eps.len() >= 2 {
            let (e1, e2) = (eps[eps.len() - 2], eps[eps.len() - 1]);
            let label = &res.variants[v].0;
            let get = |e| table.find(label, "viscous", Some(e)).map(|r| r.trace.clone());
            if let (Some(t1), Some(t2)) = (get(e1), get(e2)) {
                // v(ε) ≈ v₀ + c ε
                let limit = (&t2 * e1 - &t1 * e2) / (e1 - e2);
                push(&mut table, v, "extrapolated", None, config_hash(&(spec, &eps, "extrapolated")), limit);
            }
        }
    }
    let first = res.variants[0].0.clone();
    let refs: Vec<(&'static str, Option<f64>, State)> =
        table.rows.iter().filter(|r| r.label == first).map(|r| (r.source, r.epsilon, r.trace.clone())).collect();
    for r in &mut table.rows {
        // the Cauchy limit is compared against front tracking of the first viscosity
        let key = if r.source == "cauchy-viscous" { ("cauchy-front-tracking", None) } else { (r.source, r.epsilon) };
        if let Some((_, _, t)) = refs.iter().find(|(s, e, _)| *s == key.0 && *e == key.1) {
            r.discrepancy = max_abs_diff(&r.trace, t);
        }
    }
    for (run, row) in table.runs.iter_mut().filter(|r| r.error.is_none()).zip(&table.rows) {
        run.metric("discrepancy", row.discrepancy);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_of_constant_and_steps() {
        let vb = State::from_vec(vec![1.0]);
        let c = Datum::constant(&State::from_vec(vec![0.0]));
        let r = reflected_datum(&c, &vb);
        assert_eq!(r.eval(-0.5)[0], 1.0);
        assert_eq!(r.eval(0.5)[0], 0.0);
        let s = Datum::steps(&[0.5], &[State::from_vec(vec![0.0]), State::from_vec(vec![2.0])]).unwrap();
        let r = reflected_datum(&s, &vb);
        r.validate(1).unwrap();
        assert_eq!((r.eval(-0.1)[0], r.eval(0.2)[0], r.eval(0.7)[0]), (1.0, 0.0, 2.0));
    }
}
