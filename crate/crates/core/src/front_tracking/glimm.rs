use serde::{Deserialize, Serialize};

use super::{Front, FTState};
use crate::riemann::WaveKind;

/// Coefficients of the Glimm-type functional. `c0` is a calibrated
/// surrogate, not a published constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlimmWeights {
    pub physical: f64,
    pub boundary: f64,
    pub c0: f64,
}

impl Default for GlimmWeights {
    fn default() -> Self {
        GlimmWeights { physical: 1.0, boundary: 2.0, c0: 1.0 }
    }
}

/// `Υ = V + C₀ (Q + Q_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GlimmSnapshot {
    pub linear: f64,
    pub quadratic: f64,
    pub boundary: f64,
    pub total: f64,
}

impl GlimmSnapshot {
    pub fn with_c0(&self, c0: f64) -> f64 {
        self.linear + c0 * (self.quadratic + self.boundary)
    }
}

fn approach_class(front: &Front, n: usize) -> (usize, bool) {
    match front.wave.family {
        Some(k) => (k, front.wave.kind == WaveKind::Shock),
        None => (n, false),
    }
}

/// Glimm-type functional of a front-tracking state.
///
/// `V` sums front strengths plus `w_b` times the boundary terms (centre
/// size, 0-speed wave, remaining boundary-datum variation). `Q` sums
/// `|s_α||s_β|` over approaching pairs: a faster family on the left, or the
/// same family with at least one shock; non-physical fronts approach every
/// physical front on their right. `Q_b` sums `|s_α|` over fronts moving
/// towards the boundary, times `w_b` times the boundary strength.
pub fn glimm_functional(state: &FTState, weights: &GlimmWeights) -> GlimmSnapshot {
    let n = state.sys.dim();
    let fronts = &state.fronts;
    let mut linear = 0.0;
    // per class: total size, and size carried by shocks
    let mut total = vec![0.0; n + 1];
    let mut shocks = vec![0.0; n + 1];
    let mut quadratic = 0.0;
    for f in fronts {
        let s = f.size();
        linear += weights.physical * s;
        let (c, shock) = approach_class(f, n);
        let faster: f64 = total[c + 1..].iter().sum();
        let same = if shock { total[c] } else { shocks[c] };
        if c < n {
            quadratic += s * (faster + same);
        }
        total[c] += s;
        if shock {
            shocks[c] += s;
        }
    }
    let (mut b_linear, mut b_strength) = (0.0, 0.0);
    if let Some(b) = &state.boundary {
        let zero = b.zero_speed.as_ref().map_or(0.0, |w| w.strength.abs());
        b_linear = b.xi.abs() + zero + state.remaining_datum_variation();
        b_strength = b_linear + (&b.trace - &b.datum).norm();
    }
    linear += weights.boundary * b_linear;
    let incoming: f64 = if state.boundary.is_some() {
        fronts.iter().filter(|f| f.speed < 0.0).map(Front::size).sum()
    } else {
        0.0
    };
    let boundary = weights.boundary * b_strength * incoming;
    GlimmSnapshot {
        linear,
        quadratic,
        boundary,
        total: linear + weights.c0 * (quadratic + boundary),
    }
}

/// Smallest power of two `C₀ ∈ [1, 2^40]` making `Υ` non-increasing (up to
/// `slack`) across every recorded interaction; if none does, the one with
/// the fewest violations.
pub fn calibrate_c0<'a, I>(pairs: I, slack: f64) -> f64
where
    I: IntoIterator<Item = &'a (GlimmSnapshot, GlimmSnapshot)> + Clone,
{
    let mut best = (usize::MAX, 1.0);
    for e in 0..=40 {
        let c0 = 2f64.powi(e);
        let bad = pairs
            .clone()
            .into_iter()
            .filter(|(b, a)| a.with_c0(c0) - b.with_c0(c0) > slack)
            .count();
        if bad == 0 {
            return c0;
        }
        if bad < best.0 {
            best = (bad, c0);
        }
    }
    best.1
}
