//! CSV trace files: `t, x_1..x_n, u_1..u_m, y_1..y_m, r_1..r_m, yhat_1..yhat_m, V`.

use std::path::Path;

use nrflow::scenarios::PlatoonMetrics;
use nrflow::Trace64;

use crate::error::{CliError, Result};

/// Nine significant digits.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn header(n: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x_{i}")));
    for name in ["u", "y", "r", "yhat"] {
        h.extend((1..=m).map(|i| format!("{name}_{i}")));
    }
    h.push("V".into());
    h
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_trace(path: &Path, trace: &Trace64, n: usize, m: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header(n, m)).map_err(csv_err(path))?;
    for r in &trace.records {
        let mut row = Vec::with_capacity(2 + n + 4 * m);
        row.push(fmt_value(r.t));
        for part in [&r.x, &r.u, &r.y, &r.r, &r.yhat] {
            row.extend(part.iter().map(|&v| fmt_value(v)));
        }
        row.push(fmt_value(r.v));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parsed CSV with a header row and numeric cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rd.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::config(path, format!("line {}: {e}", rows.len() + 2)))?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// `t`, per-agent lateral error and arclength (with a road), then the gap
/// between each consecutive pair.
pub fn write_platoon_metrics(path: &Path, m: &PlatoonMetrics<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut h = vec!["t".to_string()];
    h.extend((1..=m.lateral_errors.len()).map(|i| format!("lateral_{i}")));
    h.extend((1..=m.arclengths.len()).map(|i| format!("s_{i}")));
    h.extend((1..=m.distances.len()).map(|i| format!("distance_{}_{}", i, i + 1)));
    w.write_record(&h).map_err(csv_err(path))?;
    for (k, &t) in m.times.iter().enumerate() {
        let mut row = vec![fmt_value(t)];
        for col in m.lateral_errors.iter().chain(&m.arclengths).chain(&m.distances) {
            row.push(fmt_value(col[k]));
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nrflow::{ClosedLoopTrace, TraceRecord};

    #[test]
    fn trace_round_trips_to_nine_digits() {
        let mut tr = ClosedLoopTrace::new(0.1, 0.2, 0.2);
        for k in 0..3 {
            let t = 0.1 * k as f64;
            tr.records.push(TraceRecord {
                t,
                x: vec![std::f64::consts::PI * t, -1.0 / 3.0],
                u: vec![1e-12 + t],
                y: vec![123456.789 * t],
                yhat: vec![2.0f64.sqrt()],
                r: vec![-t],
                r_ahead: vec![0.0],
                v: 0.5 * t * t,
            });
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        write_trace(&path, &tr, 2, 1).unwrap();
        let table = read_table(&path).unwrap();
        assert_eq!(table.header, header(2, 1));
        assert_eq!(table.header.len(), 1 + 2 + 4 + 1);
        for (row, rec) in table.rows.iter().zip(&tr.records) {
            let want: Vec<f64> = std::iter::once(rec.t)
                .chain(rec.x.iter().copied())
                .chain(rec.u.iter().copied())
                .chain(rec.y.iter().copied())
                .chain(rec.r.iter().copied())
                .chain(rec.yhat.iter().copied())
                .chain(std::iter::once(rec.v))
                .collect();
            for (a, b) in row.iter().zip(&want) {
                assert!((a - b).abs() <= 5e-9 * b.abs(), "{a} vs {b}");
            }
        }
    }
}
