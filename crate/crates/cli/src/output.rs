//! CSV tables with a `# key=value` header block, plus a gnuplot script per sweep.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;
use crate::error::CliResult;

/// Header line that changes between otherwise identical runs.
pub const TIMESTAMP_KEY: &str = "generated_unix";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Self::Empty, Self::Num)
    }
}

/// Shortest decimal that parses back to the same `f64`: positional for
/// moderate magnitudes, scientific otherwise.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Num(v) => format_number(*v),
            Self::Int(v) => v.to_string(),
            Self::Text(s) => s.clone(),
            Self::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# key=value` lines, e.g. shape diagnostics.
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new(), meta: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn num(&self, row: usize, name: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(name)?)? {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

pub fn render_csv(config: &RunConfig, table: &Table, timestamp: u64) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "# tool=holosim {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(buf, "# mode={}", config.mode.name())?;
    writeln!(buf, "# {TIMESTAMP_KEY}={timestamp}")?;
    writeln!(buf, "# config={}", serde_json::to_string(&config.echo())?)?;
    for (k, v) in &table.meta {
        writeln!(buf, "# {k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn write_table(path: &Path, config: &RunConfig, table: &Table) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, render_csv(config, table, now_unix())?)?;
    Ok(())
}

pub struct PlotSpec<'a> {
    pub x: &'a str,
    pub y: &'a [&'a str],
    /// Column that splits the data into one curve per distinct value.
    pub group: &'a str,
    pub groups: Vec<f64>,
    pub logscale_x: bool,
    pub xlabel: &'a str,
}

pub fn gnuplot_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}

pub fn render_gnuplot(csv: &Path, spec: &PlotSpec<'_>) -> String {
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let png = csv.with_extension("png");
    let png = png.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let groups: Vec<String> = spec.groups.iter().map(|g| format_number(*g)).collect();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set datafile columnheaders\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{png}'\n"));
    if spec.logscale_x {
        s.push_str("set logscale x\n");
    }
    s.push_str(&format!("set xlabel '{}'\n", spec.xlabel));
    s.push_str("set ylabel 'ΔE/ΔE_cl'\n");
    s.push_str("set key left top\n");
    let mut curves = Vec::new();
    for y in spec.y {
        curves.push(format!(
            "for [g in \"{}\"] '{name}' using (column('{}')):(column('{}') == g+0 ? column('{y}') : 1/0) with linespoints title sprintf('{y}, {}=%s', g)",
            groups.join(" "),
            spec.x,
            spec.group,
            spec.group,
        ));
    }
    s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    s
}

pub fn write_gnuplot(csv: &Path, spec: &PlotSpec<'_>) -> CliResult<PathBuf> {
    let path = gnuplot_path(csv);
    fs::write(&path, render_gnuplot(csv, spec))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 0.047548148179516546, 1e-20, 6.02e23, 1.0 / 3.0, 1e-4, 123456.789] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            let mantissa: String = s.chars().take_while(|c| *c != 'e').filter(char::is_ascii_digit).collect();
            let significant = mantissa.trim_start_matches('0').len();
            assert!(significant <= 17, "{s}");
        }
        assert_eq!(format_number(1e-20), "1e-20");
        assert_eq!(format_number(0.25), "0.25");
    }
}
