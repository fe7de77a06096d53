//! Output documents. Floats are written in Rust's shortest round-trip form,
//! so reading a file back gives the exact in-memory values.

use std::fmt::Write as _;

use lpreach::reach::{ObstacleSpec, Trajectory};
use lpreach::{SolveOutcome, SolveStatus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub fun: f64,
    /// Basic column of each canonical row.
    pub basis: Vec<usize>,
}

impl SolutionDoc {
    pub fn from_outcome(o: &SolveOutcome) -> Self {
        Self { status: o.status, x: o.x.to_vec(), fun: o.fun, basis: o.basis.indices().to_vec() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }
}

/// One CSV row per stored state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    pub obstacle_bound: Option<f64>,
}

pub fn step_records(traj: &Trajectory<f64>, bounds: Option<&[f64]>) -> Vec<StepRecord> {
    traj.times()
        .zip(&traj.states)
        .enumerate()
        .map(|(k, (t, s))| StepRecord {
            t,
            y_lo: s.y_lo.clone(),
            y_hi: s.y_hi.clone(),
            obstacle_bound: bounds.map(|b| b[k]),
        })
        .collect()
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn trajectory_csv(records: &[StepRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = records.first() {
        let m = first.y_lo.len();
        let mut header = vec!["t".to_string()];
        header.extend((0..m).map(|i| format!("y_lo_{i}")));
        header.extend((0..m).map(|i| format!("y_hi_{i}")));
        if first.obstacle_bound.is_some() {
            header.push("obstacle_bound".into());
        }
        w.write_record(&header).expect("in-memory write");
    }
    for r in records {
        let mut row = vec![num(r.t)];
        row.extend(r.y_lo.iter().chain(&r.y_hi).copied().map(num));
        if let Some(b) = r.obstacle_bound {
            row.push(num(b));
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn read_trajectory_csv(text: &str) -> Result<Vec<StepRecord>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    let with_bound = header.iter().next_back() == Some("obstacle_bound");
    let m = (header.len() - 1 - with_bound as usize) / 2;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| format!("row {}: {e}", line + 1)))
            .collect::<Result<_, _>>()?;
        if vals.len() != header.len() {
            return Err(format!("row {} has {} fields, expected {}", line + 1, vals.len(), header.len()));
        }
        out.push(StepRecord {
            t: vals[0],
            y_lo: vals[1..1 + m].to_vec(),
            y_hi: vals[1 + m..1 + 2 * m].to_vec(),
            obstacle_bound: with_bound.then(|| vals[1 + 2 * m]),
        });
    }
    Ok(out)
}

/// Projection of the tube onto lifted coordinates `(cx, cy)`: one rectangle
/// per drawn step, plus the obstacle when it lives in the same plane.
pub fn tube_svg(records: &[StepRecord], cx: usize, cy: usize, obstacle: Option<&ObstacleSpec>) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in records {
        x0 = x0.min(r.y_lo[cx]);
        x1 = x1.max(r.y_hi[cx]);
        y0 = y0.min(r.y_lo[cy]);
        y1 = y1.max(r.y_hi[cy]);
    }
    let circle = obstacle.filter(|o| o.coords == [cx, cy]);
    if let Some(o) = circle {
        x0 = x0.min(o.center[0] - o.radius);
        x1 = x1.max(o.center[0] + o.radius);
        y0 = y0.min(o.center[1] - o.radius);
        y1 = y1.max(o.center[1] + o.radius);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    let (x0, y0, w, h) = (x0 - pad, y0 - pad, x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let size = 600.0;
    let scale = size / w.max(h);
    let px = |x: f64| (x - x0) * scale;
    let py = |y: f64| (y0 + h - y) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.3} {:.3}">"#,
        w * scale,
        h * scale,
        w * scale,
        h * scale
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(o) = circle {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#d62728" fill-opacity="0.3" stroke="#d62728"/>"##,
            px(o.center[0]),
            py(o.center[1]),
            o.radius * scale
        );
    }
    let stride = records.len().div_ceil(400).max(1);
    for r in records.iter().step_by(stride).chain(records.last()) {
        let _ = writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#1f77b4" fill-opacity="0.15" stroke="#1f77b4" stroke-width="0.5"/>"##,
            px(r.y_lo[cx]),
            py(r.y_hi[cy]),
            (r.y_hi[cx] - r.y_lo[cx]) * scale,
            (r.y_hi[cy] - r.y_lo[cy]) * scale
        );
    }
    s.push_str("</svg>\n");
    s
}
