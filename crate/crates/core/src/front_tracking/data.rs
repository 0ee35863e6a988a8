use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::State;

/// Default smallness threshold `δ*` on the total size of the data.
pub const DEFAULT_GUARD: f64 = 0.1;

/// One piece of a piecewise-linear datum: linear from `left` at `start` to
/// `right` at the next piece's start. The last piece must be constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Piecewise-linear BV function of one variable; equal to the first piece's
/// `left` value before its start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Datum {
    pub segments: Vec<Segment>,
}

impl Datum {
    pub fn constant(v: &State) -> Self {
        let c: Vec<f64> = v.iter().copied().collect();
        Datum { segments: vec![Segment { start: 0.0, left: c.clone(), right: c }] }
    }

    /// Piecewise-constant datum: `values[0]` before `breaks[0]`, and so on.
    pub fn steps(breaks: &[f64], values: &[State]) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidInput("need one more value than breakpoints".into()));
        }
        let mut segments = Vec::with_capacity(values.len());
        let first = values[0].iter().copied().collect::<Vec<_>>();
        let start = breaks.first().map_or(0.0, |&b| 0.0_f64.min(b - 1.0));
        segments.push(Segment { start, left: first.clone(), right: first });
        for (b, v) in breaks.iter().zip(&values[1..]) {
            let c: Vec<f64> = v.iter().copied().collect();
            segments.push(Segment { start: *b, left: c.clone(), right: c });
        }
        let d = Datum { segments };
        d.validate(values[0].len())?;
        Ok(d)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let Some(last) = self.segments.last() else {
            return Err(Error::InvalidInput("datum has no segments".into()));
        };
        if last.left != last.right {
            return Err(Error::InvalidInput("last datum segment must be constant".into()));
        }
        for s in &self.segments {
            if s.left.len() != dim || s.right.len() != dim {
                return Err(Error::InvalidInput(format!("datum state has wrong dimension (expected {dim})")));
            }
            if !s.start.is_finite() || s.left.iter().chain(&s.right).any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("datum contains non-finite values".into()));
            }
        }
        if self.segments.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(Error::InvalidInput("datum breakpoints must increase strictly".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.segments[0].left.len()
    }

    /// Right limit at `x`.
    pub fn eval(&self, x: f64) -> State {
        let segs = &self.segments;
        let i = segs.partition_point(|s| s.start <= x);
        if i == 0 {
            return State::from_vec(segs[0].left.clone());
        }
        let s = &segs[i - 1];
        let l = State::from_vec(s.left.clone());
        if i == segs.len() || s.left == s.right {
            return l;
        }
        let r = State::from_vec(s.right.clone());
        let theta = (x - s.start) / (segs[i].start - s.start);
        &l + (r - &l) * theta
    }

    /// Total variation (Euclidean jumps and ramp increments).
    pub fn total_variation(&self) -> f64 {
        let mut tv = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            tv += dist(&s.left, &s.right);
            if let Some(next) = self.segments.get(i + 1) {
                tv += dist(&s.right, &next.left);
            }
        }
        tv
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Right-continuous step function: `values[i]` on `[breaks[i−1], breaks[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub breaks: Vec<f64>,
    pub values: Vec<State>,
}

impl StepFunction {
    pub fn eval(&self, x: f64) -> &State {
        &self.values[self.breaks.partition_point(|&b| b <= x)]
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }
}

/// Equal-area staircase of a datum: each ramp with increment `Δ` becomes
/// `⌈|Δ|_∞/δ⌉` equal jumps placed at the midpoints of equal subintervals.
pub fn quantize(datum: &Datum, delta: f64) -> StepFunction {
    let segs = &datum.segments;
    let mut breaks = Vec::new();
    let mut values = vec![State::from_vec(segs[0].left.clone())];
    let push = |x: f64, v: State, breaks: &mut Vec<f64>, values: &mut Vec<State>| {
        if values.last() != Some(&v) {
            breaks.push(x);
            values.push(v);
        }
    };
    for (i, s) in segs.iter().enumerate() {
        let l = State::from_vec(s.left.clone());
        let r = State::from_vec(s.right.clone());
        push(s.start, l.clone(), &mut breaks, &mut values);
        if let Some(next) = segs.get(i + 1) {
            if s.left != s.right {
                let inc = &r - &l;
                let n = (inc.amax() / delta).ceil().max(1.0) as usize;
                let len = next.start - s.start;
                for j in 1..=n {
                    let x = s.start + len * (j as f64 - 0.5) / n as f64;
                    push(x, &l + &inc * (j as f64 / n as f64), &mut breaks, &mut values);
                }
            }
        }
    }
    StepFunction { breaks, values }
}

/// Piecewise-constant approximations of the initial and boundary data.
/// `guard` is the threshold `δ*` on `TV v_0 + TV v_b + |v_0(0⁺) − v_b(0⁺)|`;
/// `None` disables the check.
pub fn quantize_data(
    v0: &Datum,
    vb: &Datum,
    delta: f64,
    guard: Option<f64>,
) -> Result<(StepFunction, StepFunction)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    v0.validate(v0.dim())?;
    vb.validate(v0.dim())?;
    if let Some(limit) = guard {
        let size = data_size(v0, vb);
        if size > limit {
            return Err(Error::SmallDataGuard { size, limit });
        }
    }
    Ok((quantize(v0, delta), quantize(vb, delta)))
}

/// `TV v_0 + TV v_b + |v_0(0⁺) − v_b(0⁺)|`.
pub fn data_size(v0: &Datum, vb: &Datum) -> f64 {
    v0.total_variation() + vb.total_variation() + (v0.eval(0.0) - vb.eval(0.0)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s1(x: f64) -> State {
        State::from_element(1, x)
    }

    #[test]
    fn constant_data_unchanged() {
        let d = Datum::constant(&s1(0.3));
        let q = quantize(&d, 0.01);
        assert!(q.breaks.is_empty());
        assert_eq!(q.values, vec![s1(0.3)]);
    }

    #[test]
    fn ramp_becomes_two_step_staircase() {
        let d = Datum {
            segments: vec![
                Segment { start: 0.0, left: vec![0.0], right: vec![0.1] },
                Segment { start: 0.1, left: vec![0.1], right: vec![0.1] },
            ],
        };
        let q = quantize(&d, 0.05);
        assert_eq!(q.breaks.len(), 2);
        assert!((q.total_variation() - 0.1).abs() < 1e-15);
        assert!((q.breaks[0] - 0.025).abs() < 1e-15 && (q.breaks[1] - 0.075).abs() < 1e-15);
        // oracle: L¹ distance to min(x, 0.1) by fine midpoint quadrature
        let n = 100_000;
        let l1: f64 = (0..n)
            .map(|i| {
                let x = 0.2 * (i as f64 + 0.5) / n as f64;
                (q.eval(x)[0] - x.min(0.1)).abs() * 0.2 / n as f64
            })
            .sum();
        assert!(l1 <= 0.05);
    }

    #[test]
    fn single_jump_unchanged() {
        let d = Datum::steps(&[0.5], &[s1(0.0), s1(0.02)]).unwrap();
        let q = quantize(&d, 0.01);
        assert_eq!(q.breaks, vec![0.5]);
        assert_eq!(q.values, vec![s1(0.0), s1(0.02)]);
    }

    #[test]
    fn guard_rejects_large_data() {
        let d = Datum::steps(&[0.5], &[s1(0.0), s1(0.2)]).unwrap();
        let vb = Datum::constant(&s1(0.0));
        assert!(matches!(quantize_data(&d, &vb, 0.01, Some(DEFAULT_GUARD)), Err(Error::SmallDataGuard { .. })));
        assert!(quantize_data(&d, &vb, 0.01, None).is_ok());
    }
}
