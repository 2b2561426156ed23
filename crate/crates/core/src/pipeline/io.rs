//! CSV ingestion and export.
//!
//! - Return panels: `date,<label>,<label>,…` with ISO-8601 dates, strictly
//!   increasing, no blank cells.
//! - Factor panels: `date,x_us,x_eu,delta_us,delta_eu` (raw EU shock).
//! - Firms: long format `firm_id,year,value`, rows in any order, gaps allowed.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;

use crate::changepoint::FirmSeries;
use crate::error::{Error, Result};
use crate::factor::FactorPanel;
use crate::panel::Panel;

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn record_line(r: &csv::StringRecord) -> usize {
    r.position().map_or(0, |p| p.line() as usize)
}

/// Reads a dated numeric table: returns dates, header labels and columns.
fn read_dated_table(path: &Path) -> Result<(Vec<NaiveDate>, Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::NoData(path.to_path_buf()));
    }
    if &headers[0] != "date" {
        return Err(parse_err(path, 1, format!("first column must be `date`, found `{}`", &headers[0])));
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut dates = Vec::new();
    let mut columns = vec![Vec::new(); labels.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        if rec.len() != headers.len() {
            return Err(parse_err(path, line, format!("expected {} fields, found {}", headers.len(), rec.len())));
        }
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|_| parse_err(path, line, format!("bad date `{}`", &rec[0])))?;
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(parse_err(path, line, format!("date {date} does not follow {prev}")));
            }
        }
        for (j, cell) in rec.iter().skip(1).enumerate() {
            if cell.is_empty() {
                return Err(parse_err(path, line, format!("missing value for `{}`", labels[j])));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(path, line, format!("bad number `{cell}` for `{}`", labels[j])))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, format!("non-finite value for `{}`", labels[j])));
            }
            columns[j].push(v);
        }
        dates.push(date);
    }
    if dates.is_empty() {
        return Err(Error::NoData(path.to_path_buf()));
    }
    Ok((dates, labels, columns))
}

pub fn load_return_panel(path: &Path) -> Result<Panel> {
    let (dates, labels, columns) = read_dated_table(path)?;
    if labels.is_empty() {
        return Err(parse_err(path, 1, "no series columns after `date`"));
    }
    Panel::new(dates, labels, columns)
}

pub fn write_panel_csv<W: Write>(out: W, panel: &Panel) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string()];
    header.extend(panel.labels().iter().cloned());
    w.write_record(&header)?;
    for (t, d) in panel.dates().iter().enumerate() {
        let mut row = vec![d.format("%Y-%m-%d").to_string()];
        row.extend(panel.columns().iter().map(|c| c[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<panel>", e))?;
    Ok(())
}

const FACTOR_COLUMNS: [&str; 4] = ["x_us", "x_eu", "delta_us", "delta_eu"];

pub fn load_factor_panel(path: &Path) -> Result<FactorPanel> {
    let (dates, labels, mut columns) = read_dated_table(path)?;
    if labels != FACTOR_COLUMNS {
        return Err(parse_err(
            path,
            1,
            format!("factor header must be date,{}", FACTOR_COLUMNS.join(",")),
        ));
    }
    let delta_eu = columns.pop().unwrap();
    let delta_us = columns.pop().unwrap();
    let x_eu = columns.pop().unwrap();
    let x_us = columns.pop().unwrap();
    FactorPanel::new(dates, x_us, x_eu, delta_us, delta_eu)
}

pub fn write_factor_csv<W: Write>(out: W, f: &FactorPanel) -> Result<()> {
    let panel = Panel::new(
        f.dates.clone(),
        FACTOR_COLUMNS.iter().map(|s| s.to_string()).collect(),
        vec![f.x_us.clone(), f.x_eu.clone(), f.delta_us.clone(), f.delta_eu_raw.clone()],
    )?;
    write_panel_csv(out, &panel)
}

/// Loads firms in order of first appearance; `times` hold the raw years.
pub fn load_firm_csv(path: &Path) -> Result<Vec<FirmSeries>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::NoData(path.to_path_buf()));
    }
    if headers.iter().collect::<Vec<_>>() != ["firm_id", "year", "value"] {
        return Err(parse_err(path, 1, "header must be firm_id,year,value"));
    }
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(usize, f64)>> = HashMap::new();
    let mut seen: HashMap<(String, usize), usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        if rec.len() != 3 {
            return Err(parse_err(path, line, format!("expected 3 fields, found {}", rec.len())));
        }
        let firm = rec[0].to_string();
        if firm.is_empty() {
            return Err(parse_err(path, line, "empty firm_id"));
        }
        let year: usize = rec[1]
            .parse()
            .ok()
            .filter(|&y| y >= 1)
            .ok_or_else(|| parse_err(path, line, format!("bad year `{}`", &rec[1])))?;
        let value: f64 = rec[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(path, line, format!("bad value `{}`", &rec[2])))?;
        if let Some(first) = seen.insert((firm.clone(), year), line) {
            return Err(parse_err(
                path,
                line,
                format!("duplicate row for firm `{firm}`, year {year} (first at line {first})"),
            ));
        }
        if !rows.contains_key(&firm) {
            order.push(firm.clone());
        }
        rows.entry(firm).or_default().push((year, value));
    }
    if order.is_empty() {
        return Err(Error::NoData(path.to_path_buf()));
    }
    order
        .into_iter()
        .map(|id| {
            let mut obs = rows.remove(&id).unwrap_or_default();
            obs.sort_by_key(|&(y, _)| y);
            let (times, values) = obs.into_iter().unzip();
            FirmSeries::new(id, times, values)
        })
        .collect()
}

/// Writes firms as `firm_id,year,value`, mapping grid index `t` to `year_of(t)`.
pub fn write_firm_csv<W: Write>(out: W, firms: &[FirmSeries], year_of: impl Fn(usize) -> usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["firm_id", "year", "value"])?;
    for f in firms {
        for (&t, &v) in f.times.iter().zip(&f.values) {
            w.write_record([f.firm_id.clone(), year_of(t).to_string(), v.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<firms>", e))?;
    Ok(())
}

/// Maps calendar years onto the changepoint grid `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearGrid {
    years: Vec<usize>,
}

impl YearGrid {
    /// The sorted union of every year observed in the cohort.
    pub fn from_firms(firms: &[FirmSeries]) -> Self {
        let years: BTreeSet<usize> = firms.iter().flat_map(|f| f.times.iter().copied()).collect();
        YearGrid {
            years: years.into_iter().collect(),
        }
    }

    /// `first, first + 1, …, first + n − 1`.
    pub fn contiguous(first: usize, n: usize) -> Self {
        YearGrid {
            years: (first..first + n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.years.len()
    }

    /// Year at grid index `k ∈ 1..=n`.
    pub fn year(&self, k: usize) -> usize {
        self.years[k - 1]
    }

    pub fn index(&self, year: usize) -> Option<usize> {
        self.years.binary_search(&year).ok().map(|i| i + 1)
    }

    /// Rewrites each firm's years as grid indices.
    pub fn remap(&self, firms: &[FirmSeries]) -> Result<Vec<FirmSeries>> {
        firms
            .iter()
            .map(|f| {
                let times = f
                    .times
                    .iter()
                    .map(|&y| {
                        self.index(y).ok_or_else(|| {
                            Error::InvalidInput(format!("year {y} is outside the grid")).in_firm(&f.firm_id)
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                FirmSeries::new(f.firm_id.clone(), times, f.values.clone())
            })
            .collect()
    }
}
