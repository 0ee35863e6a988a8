//! Deterministic CSV writers. Floats use the shortest round-trip form.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use bdry_fronts::front_tracking::{InteractionRecord, Profile, Trajectory};
use bdry_fronts::riemann::RiemannFan;
use bdry_fronts::State;

pub fn num(x: f64) -> String {
    if x == 0.0 {
        // no negative zero in the files
        "0".to_string()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

pub fn state_header(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn state_cells(v: &State) -> Vec<String> {
    v.iter().map(|&x| num(x)).collect()
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// `(xi, v_1..v_N)` on a grid.
pub fn fan_samples(sys: &bdry_fronts::system::SystemDef, fan: &RiemannFan, grid: &[f64]) -> Table {
    let n = sys.dim();
    let mut t = Table::new(std::iter::once("xi".to_string()).chain(state_header("v", n)));
    for &xi in grid {
        let v = bdry_fronts::riemann::sample_fan(sys, fan, xi);
        let mut row = vec![num(xi)];
        row.extend(state_cells(&v));
        t.push(row);
    }
    t
}

/// `(family, kind, speed_left, speed_right, strength)` per wave.
pub fn wave_summary<'a>(waves: impl IntoIterator<Item = &'a bdry_fronts::riemann::Wave>) -> Table {
    let mut t = Table::new(["family", "kind", "speed_left", "speed_right", "strength"]);
    for w in waves {
        t.push(vec![
            w.family.map_or_else(String::new, |k| (k + 1).to_string()),
            w.kind.label().to_string(),
            num(w.speeds.0),
            num(w.speeds.1),
            num(w.strength),
        ]);
    }
    t
}

/// `(t, x, v_1..v_N)`: one row per constant piece, `x` its left end
/// (the first piece starts at `x_min`).
pub fn profiles(profiles: &[Profile], dim: usize, x_min: f64) -> Table {
    let mut t = Table::new(["t", "x"].into_iter().map(String::from).chain(state_header("v", dim)));
    for p in profiles {
        let s = &p.steps;
        for (i, v) in s.values.iter().enumerate() {
            let x = if i == 0 { x_min } else { s.breaks[i - 1] };
            let mut row = vec![num(p.t), num(x)];
            row.extend(state_cells(v));
            t.push(row);
        }
    }
    t
}

/// `(tau, type, delta_v, bound, xi, varsigma, family, characteristic,
/// accurate)`.
pub fn interactions(records: &[InteractionRecord]) -> Table {
    let mut t = Table::new([
        "tau",
        "type",
        "delta_v",
        "bound",
        "xi",
        "varsigma",
        "family",
        "characteristic",
        "accurate",
    ]);
    for r in records {
        t.push(vec![
            num(r.time),
            r.kind.label().to_string(),
            num(r.delta_v),
            opt(r.bound),
            num(r.xi_before),
            opt(r.hitting_speed),
            r.hitting_family.map_or_else(String::new, |k| (k + 1).to_string()),
            (r.characteristic as u8).to_string(),
            (r.accurate as u8).to_string(),
        ]);
    }
    t
}

/// `(t, V, Q, Upsilon, Q_b)`.
pub fn functional(tr: &Trajectory) -> Table {
    let mut t = Table::new(["t", "V", "Q", "Upsilon", "Q_b"]);
    for (time, g) in &tr.functional {
        t.push(vec![num(*time), num(g.linear), num(g.quadratic), num(g.total), num(g.boundary)]);
    }
    t
}
