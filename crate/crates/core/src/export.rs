//! Plot-ready tables and the CSV / JSON-lines writers.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::equilibrium::positive_equilibrium;
use crate::simulate::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    XY,
    XZ,
    YZ,
    XYZ,
}

impl Plane {
    fn axes(self) -> &'static [usize] {
        match self {
            Plane::XY => &[0, 1],
            Plane::XZ => &[0, 2],
            Plane::YZ => &[1, 2],
            Plane::XYZ => &[0, 1, 2],
        }
    }
}

/// A labelled point drawn on top of the orbit (origin, interior equilibria).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub label: String,
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub columns: Vec<String>,
    /// One row per stored trajectory point.
    pub rows: Vec<Vec<f64>>,
    pub markers: Vec<Marker>,
}

const NAMES: [&str; 3] = ["X", "Y", "Z"];

pub fn phase_portrait_export(traj: &Trajectory, plane: Plane) -> PhaseTable {
    let axes = plane.axes();
    let mut columns = vec!["t".to_string()];
    columns.extend(axes.iter().map(|&a| NAMES[a].to_string()));
    let rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| {
            let v = s.to_array();
            std::iter::once(t).chain(axes.iter().map(|&a| v[a])).collect()
        })
        .collect();
    let mut markers = vec![Marker { label: "origin".into(), coords: vec![0.0; axes.len()] }];
    for (k, e) in positive_equilibrium(&traj.params).positive.iter().enumerate() {
        let v = e.to_array();
        markers.push(Marker {
            label: if k == 0 { "E*".into() } else { format!("E*{}", k + 1) },
            coords: axes.iter().map(|&a| v[a]).collect(),
        });
    }
    PhaseTable { columns, rows, markers }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl PhaseTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn markers_csv(&self) -> String {
        let mut out = String::from("label");
        for c in &self.columns[1..] {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for m in &self.markers {
            out.push_str(&m.label);
            for &v in &m.coords {
                write!(out, ",{}", fmt_num(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// `t,X,Y,Z` with one row per stored point.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    phase_portrait_export(traj, Plane::XYZ).to_csv()
}

/// One JSON object `{t, kind, payload}` per line.
pub fn events_jsonl(traj: &Trajectory) -> String {
    let mut out = String::new();
    for e in &traj.events {
        out.push_str(&serde_json::to_string(e).expect("events serialize"));
        out.push('\n');
    }
    out
}
