//! Result tables, the JSON envelope and SVG plots.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use lfun_core::C64;
use serde_json::{json, Map, Value};

use crate::config::Config;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// Shortest representation that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// One CSV file. Complex columns are split into `<name>_re`, `<name>_im`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()
    }

    fn records(&self) -> impl Iterator<Item = Value> + '_ {
        self.rows.iter().map(move |r| {
            let mut m = Map::new();
            m.insert("table".into(), json!(self.name));
            for (h, c) in self.header.iter().zip(r) {
                m.insert(h.clone(), c.to_json());
            }
            Value::Object(m)
        })
    }
}

/// `re, im` cells of a complex value.
pub fn complex(z: C64) -> [Cell; 2] {
    [Cell::Float(z.re), Cell::Float(z.im)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

impl Plot {
    pub fn new(name: &str, x_label: &str, y_label: &str) -> Self {
        Self { name: name.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn series(mut self, label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        self.series.push((label.into(), points));
        self
    }

    pub fn to_svg(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 56.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
        let pts = self.series.iter().flat_map(|(_, p)| p.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !(x0 < x1) {
            (x0, x1) = (x0.min(0.0) - 0.5, x1.max(0.0) + 0.5);
        }
        if !(y0 < y1) {
            (y0, y1) = (y0.min(0.0) - 0.5, y1.max(0.0) + 0.5);
        }
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * M, H - 2.0 * M);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(&self.x_label));
        let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, H / 2.0, H / 2.0, escape(&self.y_label));
        for (v, x, anchor) in [(x0, M, "start"), (x1, W - M, "end")] {
            let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#, H - M + 16.0, tick(v));
        }
        for (v, y) in [(y0, H - M), (y1, M + 10.0)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, M - 4.0, tick(v));
        }
        for (i, (label, points)) in self.series.iter().enumerate() {
            let c = COLORS[i % COLORS.len()];
            let path: Vec<String> = points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, M + 8.0, M + 16.0 + 14.0 * i as f64, escape(label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Everything one command produces.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

impl Report {
    pub fn records(&self) -> Vec<Value> {
        self.tables.iter().flat_map(Table::records).collect()
    }
}

pub fn envelope(config: Option<&Config>, command: &str, report: &Report, runtime_s: f64) -> Value {
    let config = match config {
        Some(c) => json!({ "hash": c.hash(), "echo": c.canonical() }),
        None => Value::Null,
    };
    json!({
        "config": config,
        "command": command,
        "records": report.records(),
        "version": env!("CARGO_PKG_VERSION"),
        "runtime_s": runtime_s,
    })
}

/// Writes `<command>.json`, one CSV per table and, when asked, one SVG per plot.
pub fn write_all(dir: &Path, command: &str, envelope: &Value, report: &Report, plots: bool) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(envelope).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(dir.join(format!("{command}.json")), text)?;
    for t in &report.tables {
        t.write_csv(&dir.join(format!("{}.csv", t.name)))?;
    }
    if plots {
        write_plots(dir, report)?;
    }
    Ok(())
}

pub fn write_plots(dir: &Path, report: &Report) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for p in &report.plots {
        std::fs::write(dir.join(format!("{}.svg", p.name)), p.to_svg())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.5819767068693265] {
            let s = Cell::Float(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(Cell::Float(0.5).render(), "0.5");
    }

    #[test]
    fn records_carry_table_name() {
        let mut t = Table::new("n", &["mode", "n"]);
        t.push(vec![0usize.into(), 0.25.into()]);
        let r = Report { tables: vec![t], plots: vec![] }.records();
        assert_eq!(r[0]["table"], "n");
        assert_eq!(r[0]["n"], 0.25);
    }

    #[test]
    fn svg_is_well_formed() {
        let p = Plot::new("p", "x", "y<1").series("a", vec![(0.0, 1.0), (1.0, 2.0)]);
        let s = p.to_svg();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("y&lt;1"));
    }
}
