//! CSV pattern files and plot-ready outputs.
//!
//! Numbers are written with 17 significant digits, which reproduces every
//! double exactly on reading.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use markedk::{LocalTestResult, MarkedPattern, Point, SummaryCurve, Window};

/// A pattern read from CSV, with the optional ground-truth column.
#[derive(Debug, Clone)]
pub struct PatternFile {
    pub pattern: MarkedPattern,
    pub truth: Option<Vec<bool>>,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn open_input(path: &Path) -> anyhow::Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin()));
    }
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(file))
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
}

fn parse_number(record: &csv::StringRecord, idx: usize, name: &str) -> anyhow::Result<f64> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(idx).unwrap_or("").trim();
    if raw.is_empty() {
        bail!("line {line}: empty `{name}` field");
    }
    let v: f64 = raw
        .parse()
        .map_err(|_| anyhow!("line {line}: `{raw}` is not a number in column `{name}`"))?;
    if !v.is_finite() {
        bail!("line {line}: non-finite value in column `{name}`");
    }
    Ok(v)
}

fn parse_bool(raw: &str, line: u64) -> anyhow::Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" => Ok(true),
        "0" | "false" | "f" | "no" => Ok(false),
        other => bail!("line {line}: `{other}` is not a truth flag"),
    }
}

/// Read `x,y,mark[,truth]` (extra columns are ignored).
pub fn read_pattern(path: &Path, window: Window) -> anyhow::Result<PatternFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(open_input(path)?);
    let headers = rdr
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?
        .clone();
    let find = |name: &str| {
        column(&headers, name).ok_or_else(|| anyhow!("{}: missing column `{name}`", path.display()))
    };
    let (xi, yi, mi) = (find("x")?, find("y")?, find("mark")?);
    let ti = column(&headers, "truth");

    let mut points = Vec::new();
    let mut marks = Vec::new();
    let mut truth = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            anyhow!("{}: line {line}: {e}", path.display())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let x = parse_number(&record, xi, "x")?;
        let y = parse_number(&record, yi, "y")?;
        let m = parse_number(&record, mi, "mark")?;
        if !window.contains(Point::new(x, y)) {
            bail!("line {line}: point ({x}, {y}) lies outside the window");
        }
        points.push(Point::new(x, y));
        marks.push(m);
        if let Some(t) = ti {
            truth.push(parse_bool(record.get(t).unwrap_or(""), line)?);
        }
    }
    let pattern = MarkedPattern::new(points, marks, window)
        .with_context(|| format!("{}: invalid pattern", path.display()))?;
    Ok(PatternFile {
        pattern,
        truth: ti.map(|_| truth),
    })
}

fn create(path: &Path) -> anyhow::Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}

/// Write to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => create(p)?.write_all(bytes)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn pattern_csv(pattern: &MarkedPattern, truth: Option<&[bool]>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if truth.is_some() {
        w.write_record(["x", "y", "mark", "truth"])?;
    } else {
        w.write_record(["x", "y", "mark"])?;
    }
    for (i, (p, m)) in pattern.points().iter().zip(pattern.marks()).enumerate() {
        let mut row = vec![fmt_f64(p.x), fmt_f64(p.y), fmt_f64(*m)];
        if let Some(t) = truth {
            row.push(if t[i] { "1" } else { "0" }.to_string());
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

/// Curves sharing one grid, written column-wise with an `r` column first.
pub fn curves_csv(columns: &[(&str, &SummaryCurve)]) -> anyhow::Result<Vec<u8>> {
    let first = columns
        .first()
        .ok_or_else(|| anyhow!("no curves to write"))?
        .1;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["r"];
    header.extend(columns.iter().map(|(name, _)| *name));
    w.write_record(&header)?;
    for (k, r) in first.grid.values().iter().enumerate() {
        let mut row = vec![fmt_f64(*r)];
        row.extend(columns.iter().map(|(_, c)| fmt_f64(c.values[k])));
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

/// Per-point local results joined to coordinates.
pub fn local_points_csv(
    pattern: &MarkedPattern,
    local: &LocalTestResult,
) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "mark", "t", "p", "reject"])?;
    for i in 0..pattern.len() {
        let p = pattern.points()[i];
        w.write_record([
            fmt_f64(p.x),
            fmt_f64(p.y),
            fmt_f64(pattern.marks()[i]),
            fmt_f64(local.statistics[i]),
            fmt_f64(local.p_values[i]),
            (if local.reject[i] { "1" } else { "0" }).to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

/// Append `rows` to a CSV table, writing `header` first when the file is new
/// or empty.
pub fn append_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(header)?;
    }
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// A generic numeric table with one binary grouping column.
#[derive(Debug, Clone)]
pub struct GroupedTable {
    /// The two group labels, in sorted order.
    pub labels: [String; 2],
    /// For every requested variable, the values of each group.
    pub columns: Vec<(String, [Vec<f64>; 2])>,
}

pub fn read_grouped(
    path: &Path,
    group: &str,
    variables: &[String],
) -> anyhow::Result<GroupedTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(open_input(path)?);
    let headers = rdr.headers()?.clone();
    let gi = column(&headers, group)
        .ok_or_else(|| anyhow!("{}: missing group column `{group}`", path.display()))?;
    let vars: Vec<(String, usize)> = variables
        .iter()
        .map(|v| {
            column(&headers, v)
                .map(|i| (v.clone(), i))
                .ok_or_else(|| anyhow!("{}: missing column `{v}`", path.display()))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut groups: Vec<String> = Vec::new();
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let g = record.get(gi).unwrap_or("").trim().to_string();
        if g.is_empty() {
            bail!("line {line}: empty group field");
        }
        if !groups.contains(&g) {
            groups.push(g.clone());
            if groups.len() > 2 {
                bail!(
                    "line {line}: group column `{group}` is not binary (saw {})",
                    groups.join(", ")
                );
            }
        }
        let values = vars
            .iter()
            .map(|(name, i)| parse_number(&record, *i, name))
            .collect::<anyhow::Result<Vec<f64>>>()?;
        rows.push((g, values));
    }
    if groups.len() != 2 {
        bail!("group column `{group}` must take exactly two values");
    }
    groups.sort();
    let labels = [groups[0].clone(), groups[1].clone()];
    let columns = vars
        .iter()
        .enumerate()
        .map(|(k, (name, _))| {
            let mut split = [Vec::new(), Vec::new()];
            for (g, values) in &rows {
                split[usize::from(*g == labels[1])].push(values[k]);
            }
            (name.clone(), split)
        })
        .collect();
    Ok(GroupedTable { labels, columns })
}
