//! Event-driven wave front-tracking on the half-line (or the whole line)
//! with boundary Riemann problems, non-physical fronts and a Glimm-type
//! functional.

mod data;
mod glimm;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use data::{data_size, quantize, quantize_data, Datum, Segment, StepFunction, DEFAULT_GUARD};
pub use glimm::{calibrate_c0, glimm_functional, GlimmSnapshot, GlimmWeights};

use crate::boundary::{
    solve_boundary_riemann, solve_boundary_riemann_star, BoundaryFan, BoundaryLayerProfile, TraceRelation,
};
use crate::error::{Error, Result};
use crate::linalg::State;
use crate::riemann::{discretize_rarefaction, elementary_wave, solve_riemann, Wave, WaveKind};
use crate::system::SystemDef;

/// Waves weaker than this are merged into their neighbours.
const NEGLIGIBLE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    HalfLine,
    Line,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackingConfig {
    pub delta: f64,
    pub t_end: f64,
    pub domain: Domain,
    pub relation: TraceRelation,
    pub sample_times: Vec<f64>,
    /// `δ*`; `None` disables the small-data guard.
    pub guard: Option<f64>,
    /// Simplified-solver threshold `ρ`; default `δ³`.
    pub rho: Option<f64>,
    /// Non-physical speed `λ̂`; default `max λ_N + 1` over the ball.
    pub np_speed: Option<f64>,
    /// Allowed total variation as a multiple of the initial data size.
    pub tv_cap_factor: f64,
    pub max_events: usize,
    pub max_fronts: usize,
    pub weights: GlimmWeights,
    /// Keep the full front history in the trajectory.
    pub record_history: bool,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            delta: 1e-2,
            t_end: 1.0,
            domain: Domain::HalfLine,
            relation: TraceRelation::SimD,
            sample_times: Vec::new(),
            guard: Some(DEFAULT_GUARD),
            rho: None,
            np_speed: None,
            tv_cap_factor: 10.0,
            max_events: 200_000,
            max_fronts: 20_000,
            weights: GlimmWeights::default(),
            record_history: false,
        }
    }
}

/// A travelling discontinuity.
#[derive(Debug, Clone)]
pub struct Front {
    pub x: f64,
    pub speed: f64,
    /// Physical payload, or `WaveKind::NonPhysical` with `family: None`.
    pub wave: Wave,
    /// Creation sequence number.
    pub seq: u64,
    /// Creation time.
    pub born: f64,
}

/// Straight piece of a front path between creation and removal.
#[derive(Debug, Clone)]
pub struct FrontSegment {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub speed: f64,
    pub left: State,
    pub right: State,
    pub non_physical: bool,
}

impl FrontSegment {
    pub fn x_at(&self, t: f64) -> f64 {
        self.x0 + self.speed * (t - self.t0)
    }
}

impl Front {
    pub fn is_non_physical(&self) -> bool {
        self.wave.kind == WaveKind::NonPhysical
    }

    pub fn jump(&self) -> f64 {
        (&self.wave.right - &self.wave.left).norm()
    }

    /// `|s|` for physical fronts, `|v_r − v_l|` for non-physical ones.
    pub fn size(&self) -> f64 {
        if self.is_non_physical() {
            self.jump()
        } else {
            self.wave.strength.abs()
        }
    }
}

/// Boundary structure at `x = 0`.
#[derive(Debug, Clone)]
pub struct BoundaryRecord {
    pub datum: State,
    pub trace: State,
    pub lower: State,
    pub xi: f64,
    pub zero_speed: Option<Wave>,
    pub family: Option<usize>,
    pub layer: Option<BoundaryLayerProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionKind {
    FrontFront,
    BoundaryHit,
    DatumJump,
}

impl InteractionKind {
    pub fn label(self) -> &'static str {
        match self {
            InteractionKind::FrontFront => "front-front",
            InteractionKind::BoundaryHit => "boundary-hit",
            InteractionKind::DatumJump => "datum-jump",
        }
    }
}

#[derive(Debug, Clone)]
pub struct InteractionRecord {
    pub time: f64,
    pub x: f64,
    pub kind: InteractionKind,
    /// Signed strengths of the incoming fronts.
    pub incoming: Vec<f64>,
    pub hitting_family: Option<usize>,
    /// `ς`: shock speed, or the characteristic speed at the leftmost state.
    pub hitting_speed: Option<f64>,
    pub xi_before: f64,
    pub xi_after: f64,
    /// Signed change of the total variation: fronts in `x > 0` plus the
    /// boundary component `|ξ|` (centre size or 0-speed wave), which a
    /// detaching 0-speed shock only moves into the interior.
    pub delta_v: f64,
    /// `|s|([ς]⁻ + |ξ|)` for boundary hits.
    pub bound: Option<f64>,
    /// Hitting family equals the boundary characteristic family.
    pub characteristic: bool,
    pub accurate: bool,
    pub glimm_before: GlimmSnapshot,
    pub glimm_after: GlimmSnapshot,
}

/// Which fronts take part in an event.
#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Collision { first: usize, last: usize },
    /// Fronts `0..=last` reach `x = 0`; the datum may jump at the same time.
    BoundaryHit { last: usize, datum_jump: bool },
    DatumJump,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

/// Piecewise-constant profile at time `t`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub t: f64,
    pub steps: StepFunction,
}

/// Evolving front-tracking state.
#[derive(Debug, Clone)]
pub struct FTState {
    pub sys: SystemDef,
    pub t: f64,
    pub fronts: Vec<Front>,
    /// State left of the first front (the trace on the half-line).
    pub base: State,
    pub boundary: Option<BoundaryRecord>,
    pub datum_jumps: VecDeque<(f64, State)>,
    pub delta: f64,
    pub rho: f64,
    pub np_speed: f64,
    pub relation: TraceRelation,
    pub weights: GlimmWeights,
    /// Retired front segments; `None` when history is off.
    pub history: Option<Vec<FrontSegment>>,
    next_seq: u64,
}

fn time_tol(t: f64) -> f64 {
    1e-12 * (1.0 + t.abs())
}

fn np_wave(left: State, right: State, speed: f64) -> Wave {
    let strength = (&right - &left).norm();
    Wave { family: None, kind: WaveKind::NonPhysical, left, right, speeds: (speed, speed), strength }
}

impl FTState {
    /// State at `t = 0` from quantized data: a Riemann problem at every
    /// jump of `v_0` and, on the half-line, a boundary Riemann problem.
    pub fn new(sys: &SystemDef, v0: &StepFunction, vb: &StepFunction, config: &TrackingConfig) -> Result<Self> {
        let delta = config.delta;
        let np_speed = config.np_speed.unwrap_or_else(|| sys.max_top_eigenvalue() + 1.0);
        let mut st = FTState {
            sys: sys.clone(),
            t: 0.0,
            fronts: Vec::new(),
            base: v0.values[0].clone(),
            boundary: None,
            datum_jumps: VecDeque::new(),
            delta,
            rho: config.rho.unwrap_or(delta * delta * delta),
            np_speed,
            relation: config.relation,
            weights: config.weights,
            history: config.record_history.then(Vec::new),
            next_seq: 0,
        };
        let half = config.domain == Domain::HalfLine;
        let mut fronts = Vec::new();
        for (i, &x) in v0.breaks.iter().enumerate() {
            if half && x <= 0.0 {
                continue;
            }
            let (l, r) = (&v0.values[i], &v0.values[i + 1]);
            let fan = solve_riemann(sys, l, r)?;
            fronts.extend(st.emit(fan.waves, x, l, r)?);
        }
        if half {
            let interior = v0.eval(0.0).clone();
            st.base = interior.clone();
            let datum = vb.eval(0.0).clone();
            for (i, &t) in vb.breaks.iter().enumerate() {
                if t > 0.0 {
                    st.datum_jumps.push_back((t, vb.values[i + 1].clone()));
                }
            }
            let fan = st.boundary_fan(&interior, &datum)?;
            let out = st.emit(fan.waves.clone(), 0.0, &fan.trace, &interior)?;
            st.base = fan.trace.clone();
            st.boundary = Some(record_from_fan(fan, datum));
            fronts.splice(0..0, out);
        }
        st.fronts = fronts;
        Ok(st)
    }

    fn boundary_fan(&self, v_in: &State, v_b: &State) -> Result<BoundaryFan> {
        match self.relation {
            TraceRelation::SimD => solve_boundary_riemann(&self.sys, v_in, v_b),
            TraceRelation::Star => solve_boundary_riemann_star(&self.sys, v_in, v_b),
        }
    }

    fn seq(&mut self) -> u64 {
        self.next_seq += 1;
        self.next_seq
    }

    /// Fronts at `x` for waves from `v_l` to `v_r`: rarefactions are split
    /// into jumps of strength at most `δ`, negligible waves are merged, and
    /// the states are chained exactly.
    fn emit(&mut self, waves: Vec<Wave>, x: f64, v_l: &State, v_r: &State) -> Result<Vec<Front>> {
        let mut pieces = Vec::new();
        for w in waves {
            if w.kind != WaveKind::NonPhysical && w.strength.abs() <= NEGLIGIBLE {
                continue;
            }
            if w.kind == WaveKind::Rarefaction {
                pieces.extend(discretize_rarefaction(&self.sys, &w, self.delta)?);
            } else {
                pieces.push(w);
            }
        }
        let n = pieces.len();
        let mut out = Vec::with_capacity(n);
        for (i, mut w) in pieces.into_iter().enumerate() {
            if i == 0 {
                w.left = v_l.clone();
            }
            if i + 1 == n {
                w.right = v_r.clone();
            }
            if let Some(prev) = out.last() {
                let prev: &Front = prev;
                w.left = prev.wave.right.clone();
            }
            let speed = match w.kind {
                WaveKind::Rarefaction => w.speeds.1,
                _ => w.speeds.0,
            };
            let seq = self.seq();
            out.push(Front { x, speed, wave: w, seq, born: self.t });
        }
        if out.is_empty() && (v_l - v_r).norm() > 0.0 {
            // the whole jump was negligible: keep it as a non-physical front
            let seq = self.seq();
            let wave = np_wave(v_l.clone(), v_r.clone(), self.np_speed);
            out.push(Front { x, speed: self.np_speed, wave, seq, born: self.t });
        }
        Ok(out)
    }

    /// Moves fronts in `range` to the history.
    fn retire(&mut self, range: std::ops::Range<usize>) {
        let t = self.t;
        if let Some(h) = &mut self.history {
            for f in &self.fronts[range] {
                h.push(FrontSegment {
                    t0: f.born,
                    t1: t,
                    x0: f.x - f.speed * (t - f.born),
                    speed: f.speed,
                    left: f.wave.left.clone(),
                    right: f.wave.right.clone(),
                    non_physical: f.is_non_physical(),
                });
            }
        }
    }

    pub fn spatial_tv(&self) -> f64 {
        self.fronts.iter().map(Front::jump).sum()
    }

    pub fn remaining_datum_variation(&self) -> f64 {
        let Some(b) = &self.boundary else {
            return 0.0;
        };
        let mut prev = &b.datum;
        let mut tv = 0.0;
        for (_, v) in &self.datum_jumps {
            tv += (v - prev).norm();
            prev = v;
        }
        tv
    }

    pub fn glimm(&self) -> GlimmSnapshot {
        glimm_functional(self, &self.weights)
    }

    pub fn profile(&self) -> Profile {
        let breaks = self.fronts.iter().map(|f| f.x).collect();
        let mut values = vec![self.base.clone()];
        values.extend(self.fronts.iter().map(|f| f.wave.right.clone()));
        Profile { t: self.t, steps: StepFunction { breaks, values } }
    }

    fn pair_time(&self, i: usize) -> Option<f64> {
        let (a, b) = (&self.fronts[i], &self.fronts[i + 1]);
        let closing = a.speed - b.speed;
        let gap = b.x - a.x;
        if closing <= 1e-13 * (1.0 + a.speed.abs()) {
            return None;
        }
        Some(self.t + gap.max(0.0) / closing)
    }

    fn hit_time(&self) -> Option<f64> {
        self.boundary.as_ref()?;
        let f = self.fronts.first()?;
        (f.speed < 0.0).then(|| self.t + f.x.max(0.0) / -f.speed)
    }

    /// Earliest event, if any.
    pub fn next_event(&self) -> Option<Event> {
        self.next_events().into_iter().next()
    }

    /// All events at the earliest event time, ordered by position.
    pub fn next_events(&self) -> Vec<Event> {
        let n = self.fronts.len();
        let pairs: Vec<Option<f64>> = (0..n.saturating_sub(1)).map(|i| self.pair_time(i)).collect();
        let hit = self.hit_time();
        let jump = self.datum_jumps.front().map(|j| j.0);
        let tmin = pairs.iter().flatten().chain(hit.iter()).chain(jump.iter()).copied().fold(f64::INFINITY, f64::min);
        if !tmin.is_finite() {
            return Vec::new();
        }
        let lim = tmin + time_tol(tmin);
        let in_pair = |i: usize| pairs[i].is_some_and(|t| t <= lim);
        let mut events = Vec::new();
        let mut i = 0;
        if hit.is_some_and(|t| t <= lim) {
            let mut last = 0;
            while last + 1 < n && in_pair(last) {
                last += 1;
            }
            let datum_jump = jump.is_some_and(|t| t <= lim);
            events.push(Event { time: tmin, kind: EventKind::BoundaryHit { last, datum_jump } });
            i = last + 1;
        } else if jump.is_some_and(|t| t <= lim) {
            events.push(Event { time: tmin, kind: EventKind::DatumJump });
        }
        while i + 1 < n {
            if in_pair(i) {
                let first = i;
                while i + 1 < n && in_pair(i) {
                    i += 1;
                }
                events.push(Event { time: tmin, kind: EventKind::Collision { first, last: i } });
            }
            i += 1;
        }
        events
    }

    /// Moves all fronts linearly to time `t`.
    pub fn advance(&mut self, t: f64) {
        let dt = t - self.t;
        if dt > 0.0 {
            for f in &mut self.fronts {
                f.x += f.speed * dt;
            }
        }
        self.t = self.t.max(t);
    }

    /// Processes every event at the earliest event time not after `t_limit`.
    /// Returns `None` when no event remains before `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<Option<Vec<InteractionRecord>>> {
        let events = self.next_events();
        let Some(first) = events.first() else {
            return Ok(None);
        };
        if first.time > t_limit {
            return Ok(None);
        }
        self.advance(first.time);
        self.t = first.time;
        let mut records = Vec::with_capacity(events.len());
        // right to left keeps the indices of earlier events valid
        for ev in events.iter().rev() {
            let rec = match ev.kind {
                EventKind::Collision { first, last } => self.resolve_interior(first, last)?,
                EventKind::BoundaryHit { last, datum_jump } => self.resolve_boundary(Some(last), datum_jump)?,
                EventKind::DatumJump => self.resolve_boundary(None, true)?,
            };
            records.push(rec);
        }
        records.reverse();
        Ok(Some(records))
    }

    /// Replaces colliding fronts `first..=last` by the solution of the
    /// Riemann problem at the meeting point.
    pub fn resolve_interior(&mut self, first: usize, last: usize) -> Result<InteractionRecord> {
        let glimm_before = self.glimm();
        let x = self.fronts[first..=last].iter().map(|f| f.x).sum::<f64>() / (last - first + 1) as f64;
        let v_l = self.fronts[first].wave.left.clone();
        let v_r = self.fronts[last].wave.right.clone();
        let incoming: Vec<f64> = self.fronts[first..=last].iter().map(|f| f.wave.strength).collect();
        let tv_in: f64 = self.fronts[first..=last].iter().map(Front::jump).sum();
        let simplified = if last == first + 1 {
            let (a, b) = (&self.fronts[first], &self.fronts[last]);
            let small = a.is_non_physical() || b.is_non_physical() || (a.wave.strength * b.wave.strength).abs() < self.rho;
            if small {
                self.simplified(a.clone(), b.clone())
            } else {
                None
            }
        } else {
            None
        };
        let accurate = simplified.is_none();
        let out = match simplified {
            Some(waves) => self.emit(waves, x, &v_l, &v_r)?,
            None => {
                let fan = solve_riemann(&self.sys, &v_l, &v_r)?;
                self.emit(fan.waves, x, &v_l, &v_r)?
            }
        };
        let tv_out: f64 = out.iter().map(Front::jump).sum();
        self.retire(first..last + 1);
        self.fronts.splice(first..=last, out);
        let xi = self.boundary.as_ref().map_or(0.0, |b| b.xi);
        Ok(InteractionRecord {
            time: self.t,
            x,
            kind: InteractionKind::FrontFront,
            incoming,
            hitting_family: None,
            hitting_speed: None,
            xi_before: xi,
            xi_after: xi,
            delta_v: tv_out - tv_in,
            bound: None,
            characteristic: false,
            accurate,
            glimm_before,
            glimm_after: self.glimm(),
        })
    }

    /// Simplified solver: incoming physical waves are transmitted with their
    /// strengths (same-family waves merged) and the defect is carried by one
    /// non-physical front.
    fn simplified(&self, a: Front, b: Front) -> Option<Vec<Wave>> {
        let v_l = &a.wave.left;
        let v_r = &b.wave.right;
        let mut plan: Vec<(usize, f64)> = Vec::new();
        match (a.wave.family, b.wave.family) {
            (None, Some(j)) => plan.push((j, b.wave.strength)),
            (Some(i), Some(j)) if i == j => plan.push((i, a.wave.strength + b.wave.strength)),
            (Some(i), Some(j)) if i > j => {
                plan.push((j, b.wave.strength));
                plan.push((i, a.wave.strength));
            }
            _ => return None,
        }
        let mut waves = Vec::new();
        let mut v = v_l.clone();
        for (k, s) in plan {
            let w = elementary_wave(&self.sys, &v, k, s).ok()?;
            v = w.right.clone();
            waves.push(w);
        }
        if (&v - v_r).norm() > 0.0 {
            waves.push(np_wave(v, v_r.clone(), self.np_speed));
        }
        Some(waves)
    }

    /// Boundary Riemann problem at `x = 0` after fronts `0..=last` hit the
    /// boundary and/or the boundary datum jumps.
    pub fn resolve_boundary(&mut self, last: Option<usize>, datum_jump: bool) -> Result<InteractionRecord> {
        let glimm_before = self.glimm();
        let old = self.boundary.clone().ok_or_else(|| Error::InvalidInput("no boundary on the whole line".into()))?;
        let mut datum = old.datum.clone();
        if datum_jump {
            if let Some((_, v)) = self.datum_jumps.pop_front() {
                datum = v;
            }
        }
        let kind = if last.is_some() { InteractionKind::BoundaryHit } else { InteractionKind::DatumJump };
        let hitting = last.map(|_| self.fronts[0].clone());
        let count = last.map_or(0, |l| l + 1);
        let incoming: Vec<f64> = self.fronts[..count].iter().map(|f| f.wave.strength).collect();
        let tv_in: f64 = self.fronts[..count].iter().map(Front::jump).sum();
        let v_in = match last {
            Some(l) => self.fronts[l].wave.right.clone(),
            None => self.base.clone(),
        };
        let (out, record) = if last.is_none() && datum == old.datum {
            (Vec::new(), None)
        } else {
            let fan = self.boundary_fan(&v_in, &datum)?;
            let out = self.emit(fan.waves.clone(), 0.0, &fan.trace, &v_in)?;
            self.base = fan.trace.clone();
            (out, Some(record_from_fan(fan, datum.clone())))
        };
        let tv_out: f64 = out.iter().map(Front::jump).sum();
        let mut out = out;
        for f in &mut out {
            f.x = 0.0;
        }
        self.retire(0..count);
        self.fronts.splice(0..count, out);
        match record {
            Some(r) => self.boundary = Some(r),
            None => {
                if let Some(b) = &mut self.boundary {
                    b.datum = datum;
                }
            }
        }
        let xi_after = self.boundary.as_ref().map_or(0.0, |b| b.xi);
        let (hitting_family, hitting_speed, bound, characteristic) = match &hitting {
            Some(h) => {
                let sigma = h.wave.speeds.0;
                let bound = h.size() * ((-sigma).max(0.0) + old.xi.abs());
                let ch = h.wave.family.is_some() && h.wave.family == old.family;
                (h.wave.family, Some(sigma), Some(bound), ch)
            }
            None => (None, None, None, false),
        };
        Ok(InteractionRecord {
            time: self.t,
            x: 0.0,
            kind,
            incoming,
            hitting_family,
            hitting_speed,
            xi_before: old.xi,
            xi_after,
            delta_v: (tv_out + xi_after.abs()) - (tv_in + old.xi.abs()),
            bound,
            characteristic,
            accurate: true,
            glimm_before,
            glimm_after: self.glimm(),
        })
    }
}

fn record_from_fan(fan: BoundaryFan, datum: State) -> BoundaryRecord {
    BoundaryRecord {
        datum,
        trace: fan.trace,
        lower: fan.lower,
        xi: fan.center_size,
        zero_speed: fan.zero_speed,
        family: fan.boundary_family,
        layer: fan.layer,
    }
}

/// Output of a front-tracking run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub profiles: Vec<Profile>,
    pub final_state: FTState,
    pub records: Vec<InteractionRecord>,
    /// `(t, snapshot)` at `t = 0` and after every event time.
    pub functional: Vec<(f64, GlimmSnapshot)>,
    /// `TV v_0 + TV v_b + |v_0(0⁺) − v_b(0⁺)|` of the quantized data.
    pub initial_size: f64,
    pub sup_tv: f64,
    pub events: usize,
    pub max_fronts: usize,
    /// Every front path up to `t_end` when `record_history` is set.
    pub history: Vec<FrontSegment>,
}

/// Runs front tracking to `t_end`, sampling profiles at `sample_times`.
pub fn run(sys: &SystemDef, v0: &Datum, vb: &Datum, config: &TrackingConfig) -> Result<Trajectory> {
    if !(config.t_end >= 0.0) {
        return Err(Error::InvalidInput("t_end must be non-negative".into()));
    }
    let (v0q, vbq) = quantize_data(v0, vb, config.delta, config.guard)?;
    let mut state = FTState::new(sys, &v0q, &vbq, config)?;
    let initial_size = match config.domain {
        Domain::HalfLine => {
            v0q.total_variation() + vbq.total_variation() + (v0q.eval(0.0) - vbq.eval(0.0)).norm()
        }
        Domain::Line => v0q.total_variation(),
    };
    let cap = config.tv_cap_factor * initial_size.max(config.delta);
    let mut samples: Vec<f64> = config.sample_times.iter().copied().filter(|&t| t >= 0.0 && t <= config.t_end).collect();
    samples.sort_by(f64::total_cmp);
    let mut profiles = Vec::with_capacity(samples.len());
    let mut records = Vec::new();
    let mut functional = vec![(0.0, state.glimm())];
    let mut sup_tv = state.spatial_tv();
    let mut events = 0usize;
    let mut max_fronts = state.fronts.len();
    let mut targets: Vec<f64> = samples.clone();
    targets.push(config.t_end);
    for (ti, &target) in targets.iter().enumerate() {
        while let Some(batch) = state.step(target)? {
            events += batch.len();
            records.extend(batch);
            let tv = state.spatial_tv();
            sup_tv = sup_tv.max(tv);
            max_fronts = max_fronts.max(state.fronts.len());
            functional.push((state.t, state.glimm()));
            if tv > cap {
                return Err(Error::VariationBlowUp { tv, cap, time: state.t });
            }
            if events > config.max_events || state.fronts.len() > config.max_fronts {
                return Err(Error::FrontExplosion(events.max(state.fronts.len())));
            }
        }
        state.advance(target);
        if ti < samples.len() {
            profiles.push(state.profile());
        }
    }
    let n = state.fronts.len();
    state.retire(0..n);
    let history = state.history.take().unwrap_or_default();
    Ok(Trajectory { profiles, final_state: state, records, functional, initial_size, sup_tv, events, max_fronts, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::sample_fan;
    use crate::system::{burgers, linear, p_system, PSystemViscosity};
    use nalgebra::{DMatrix, DVector};

    fn st(x: &[f64]) -> State {
        DVector::from_vec(x.to_vec())
    }

    fn front(x: f64, speed: f64, l: f64, r: f64, seq: u64) -> Front {
        let wave = Wave {
            family: Some(0),
            kind: WaveKind::Shock,
            left: st(&[l]),
            right: st(&[r]),
            speeds: (speed, speed),
            strength: r - l,
        };
        Front { x, speed, wave, seq, born: 0.0 }
    }

    fn bare_state(fronts: Vec<Front>, boundary: bool) -> FTState {
        let sys = burgers(0.0, Some(0.0), Some(3.0)).unwrap();
        let base = fronts.first().map_or(st(&[0.0]), |f| f.wave.left.clone());
        FTState {
            sys,
            t: 0.0,
            fronts,
            base: base.clone(),
            boundary: boundary.then(|| BoundaryRecord {
                datum: base.clone(),
                trace: base.clone(),
                lower: base,
                xi: 0.0,
                zero_speed: None,
                family: None,
                layer: None,
            }),
            datum_jumps: VecDeque::new(),
            delta: 0.01,
            rho: 1e-6,
            np_speed: 4.0,
            relation: TraceRelation::SimD,
            weights: GlimmWeights::default(),
            history: None,
            next_seq: 10,
        }
    }

    #[test]
    fn collision_time() {
        let s = bare_state(vec![front(1.0, 1.0, 0.0, 0.1, 1), front(2.0, -1.0, 0.1, 0.2, 2)], false);
        let e = s.next_event().unwrap();
        assert!((e.time - 0.5).abs() < 1e-15);
        assert_eq!(e.kind, EventKind::Collision { first: 0, last: 1 });
    }

    #[test]
    fn boundary_hit_time() {
        let s = bare_state(vec![front(1.0, -2.0, 0.0, 0.1, 1)], true);
        let e = s.next_event().unwrap();
        assert!((e.time - 0.5).abs() < 1e-15);
        assert!(matches!(e.kind, EventKind::BoundaryHit { last: 0, .. }));
    }

    #[test]
    fn no_events() {
        assert!(bare_state(Vec::new(), true).next_event().is_none());
    }

    #[test]
    fn functional_examples() {
        let s = bare_state(Vec::new(), true);
        assert_eq!(s.glimm().total, 0.0);
        let s = bare_state(vec![front(1.0, 0.5, 0.1, 0.0, 1)], false);
        assert!((s.glimm().total - 0.1).abs() < 1e-15);
        let s = bare_state(vec![front(1.0, 0.5, 0.3, 0.2, 1), front(2.0, 0.4, 0.2, 0.1, 2)], false);
        let g = s.glimm();
        assert!((g.quadratic - 0.01).abs() < 1e-15);
        assert!((g.total - (g.linear + 0.01)).abs() < 1e-15);
    }

    #[test]
    fn constant_data_no_events() {
        let sys = p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap();
        let c = Datum::constant(&st(&[1.0, 0.0]));
        let cfg = TrackingConfig { sample_times: vec![0.5], ..TrackingConfig::default() };
        let tr = run(&sys, &c, &c, &cfg).unwrap();
        assert_eq!(tr.events, 0);
        assert!(tr.profiles[0].steps.breaks.is_empty());
        assert_eq!(tr.profiles[0].steps.values[0], st(&[1.0, 0.0]));
    }

    #[test]
    fn riemann_datum_matches_fan_before_boundary() {
        let sys = p_system(2.0, PSystemViscosity::Artificial, None, None).unwrap();
        let (l, r) = (st(&[1.0, 0.02]), st(&[1.03, -0.01]));
        let v0 = Datum::steps(&[5.0], &[l.clone(), r.clone()]).unwrap();
        let vb = Datum::constant(&l);
        let delta = 0.005;
        let cfg = TrackingConfig { delta, t_end: 1.0, sample_times: vec![1.0], ..TrackingConfig::default() };
        let tr = run(&sys, &v0, &vb, &cfg).unwrap();
        let fan = solve_riemann(&sys, &l, &r).unwrap();
        let prof = &tr.profiles[0].steps;
        let n = 20_000;
        let (a, b) = (3.0, 7.0);
        let l1: f64 = (0..n)
            .map(|i| {
                let x = a + (b - a) * (i as f64 + 0.5) / n as f64;
                (prof.eval(x) - sample_fan(&sys, &fan, x - 5.0)).abs().sum() * (b - a) / n as f64
            })
            .sum();
        assert!(l1 <= 3.0 * delta, "L1 = {l1}");
    }

    #[test]
    fn gisclon_trace_is_constant_under_front_tracking() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let sys = linear(a, DMatrix::identity(2, 2), Some(st(&[0.5, 0.5])), Some(2.0)).unwrap();
        let v0 = Datum::constant(&st(&[0.0, 0.0]));
        let vb = Datum::constant(&st(&[1.0, 1.0]));
        let cfg = TrackingConfig { guard: None, sample_times: vec![0.5, 1.0], ..TrackingConfig::default() };
        let tr = run(&sys, &v0, &vb, &cfg).unwrap();
        for p in &tr.profiles {
            assert!((p.steps.values[0].clone() - st(&[0.0, 1.0])).amax() < 1e-9);
        }
    }

    #[test]
    fn burgers_shocks_merge_and_hit_the_boundary() {
        let sys = burgers(0.0, Some(0.0), Some(1.0)).unwrap();
        let v0 = Datum::steps(&[0.3, 0.6], &[st(&[0.0]), st(&[-0.02]), st(&[-0.05])]).unwrap();
        let vb = Datum::constant(&st(&[0.0]));
        let cfg = TrackingConfig { delta: 0.01, t_end: 40.0, ..TrackingConfig::default() };
        let tr = run(&sys, &v0, &vb, &cfg).unwrap();
        assert!(tr.records.iter().any(|r| r.kind == InteractionKind::BoundaryHit));
        assert!(tr.sup_tv <= 3.0 * tr.initial_size);
    }
}
