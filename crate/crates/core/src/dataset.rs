//! Raw series ingestion, daily aggregation, and frame alignment.
//!
//! Raw inputs are per-variable CSVs (hourly or daily). They are aggregated
//! to daily means and aligned into a single gap-free [`TimeSeriesFrame`]
//! covering the intersection of the series' date ranges.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measurement unit of a raw series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    /// Nephelometric turbidity units.
    Ntu,
    /// Millimetres (rainfall).
    Mm,
    /// Metres (water level).
    M,
    /// Degrees Celsius (air temperature).
    DegC,
    /// Megajoules per square metre (solar exposure).
    MjPerM2,
}

impl Unit {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "NTU" | "ntu" => Ok(Unit::Ntu),
            "mm" => Ok(Unit::Mm),
            "m" => Ok(Unit::M),
            "degC" | "C" | "celsius" => Ok(Unit::DegC),
            "MJ/m2" | "MJ/m^2" => Ok(Unit::MjPerM2),
            other => Err(Error::Config(format!("unknown unit '{other}'"))),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Ntu => "NTU",
            Unit::Mm => "mm",
            Unit::M => "m",
            Unit::DegC => "degC",
            Unit::MjPerM2 => "MJ/m2",
        };
        f.write_str(s)
    }
}

/// Timestamp of one raw observation: a calendar date plus an optional hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stamp {
    pub date: NaiveDate,
    pub hour: Option<u8>,
}

impl fmt::Display for Stamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hour {
            Some(h) => write!(f, "{} {:02}:00", self.date, h),
            None => write!(f, "{}", self.date),
        }
    }
}

/// One observation: a timestamp and a value that may be flagged missing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub stamp: Stamp,
    pub value: Option<f64>,
}

/// A single variable's observations, sorted by timestamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawSeries {
    pub variable: String,
    pub unit: Unit,
    pub observations: Vec<Observation>,
    /// Rows the parser could not interpret (counted, not fatal).
    pub skipped_rows: usize,
}

impl RawSeries {
    /// True if any observation carries an hour component.
    pub fn is_sub_daily(&self) -> bool {
        self.observations.iter().any(|o| o.stamp.hour.is_some())
    }
}

/// Column mapping for [`ingest_csv`].
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub date_col: String,
    pub value_col: String,
    pub variable: String,
    pub unit: Unit,
}

/// Parse one variable's CSV into a [`RawSeries`].
///
/// The date column accepts `YYYY-MM-DD`, `YYYY-MM-DD HH:MM`, or
/// `YYYY-MM-DDTHH:MM[:SS]`. Blank value cells become missing observations;
/// rows whose date cannot be parsed are counted in `skipped_rows`.
/// Duplicate timestamps with equal values are collapsed; with conflicting
/// values they are an error.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<RawSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h == schema.date_col)
        .ok_or_else(|| Error::CsvParse {
            path: path.display().to_string(),
            msg: format!("missing date column '{}'", schema.date_col),
        })?;
    let value_idx = headers
        .iter()
        .position(|h| h == schema.value_col)
        .ok_or_else(|| Error::CsvParse {
            path: path.display().to_string(),
            msg: format!("missing value column '{}'", schema.value_col),
        })?;

    let mut observations = Vec::new();
    let mut skipped = 0usize;
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let stamp = match record.get(date_idx).and_then(parse_stamp) {
            Some(s) => s,
            None => {
                skipped += 1;
                continue;
            }
        };
        let raw_value = record.get(value_idx).unwrap_or("");
        let value = if raw_value.is_empty() || raw_value.eq_ignore_ascii_case("na") {
            None
        } else {
            match raw_value.parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                Ok(_) => None,
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            }
        };
        observations.push(Observation { stamp, value });
    }

    if observations.is_empty() {
        return Err(Error::EmptySeries {
            path: path.display().to_string(),
        });
    }

    observations.sort_by_key(|o| o.stamp);
    // Collapse exact duplicates; conflicting values are unrecoverable.
    let mut deduped: Vec<Observation> = Vec::with_capacity(observations.len());
    for obs in observations {
        match deduped.last() {
            Some(prev) if prev.stamp == obs.stamp => {
                if prev.value != obs.value {
                    return Err(Error::DuplicateTimestamp {
                        variable: schema.variable.clone(),
                        stamp: obs.stamp.to_string(),
                    });
                }
            }
            _ => deduped.push(obs),
        }
    }

    Ok(RawSeries {
        variable: schema.variable.clone(),
        unit: schema.unit,
        observations: deduped,
        skipped_rows: skipped,
    })
}

fn parse_stamp(s: &str) -> Option<Stamp> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(Stamp { date: d, hour: None });
    }
    for fmt in ["%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            use chrono::Timelike;
            return Some(Stamp {
                date: dt.date(),
                hour: Some(dt.hour() as u8),
            });
        }
    }
    None
}

/// Collapse a sub-daily series to daily means.
///
/// Each calendar day becomes one observation whose value is the arithmetic
/// mean of that day's non-missing readings; days where every reading is
/// missing are flagged missing. Already-daily series pass through unchanged.
pub fn aggregate_daily(series: &RawSeries) -> RawSeries {
    if !series.is_sub_daily() {
        return series.clone();
    }
    let mut by_day: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for obs in &series.observations {
        let entry = by_day.entry(obs.stamp.date).or_insert((0.0, 0));
        if let Some(v) = obs.value {
            entry.0 += v;
            entry.1 += 1;
        }
    }
    let observations = by_day
        .into_iter()
        .map(|(date, (sum, count))| Observation {
            stamp: Stamp { date, hour: None },
            value: (count > 0).then(|| sum / count as f64),
        })
        .collect();
    RawSeries {
        variable: series.variable.clone(),
        unit: series.unit,
        observations,
        skipped_rows: series.skipped_rows,
    }
}

/// How internal gaps are handled during alignment.
#[derive(Debug, Clone, Copy)]
pub struct GapPolicy {
    /// Longest run of consecutive missing days that may be linearly
    /// interpolated; anything longer aborts alignment.
    pub max_interp_days: u32,
}

impl Default for GapPolicy {
    fn default() -> Self {
        GapPolicy { max_interp_days: 2 }
    }
}

/// Date-indexed, gap-free daily table of all variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesFrame {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeriesFrame {
    /// Assemble a frame from parallel columns. All columns must match the
    /// date vector's length and the dates must be consecutive days.
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        for w in dates.windows(2) {
            if w[1] - w[0] != chrono::Duration::days(1) {
                return Err(Error::Config(format!(
                    "dates not consecutive at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::Config(format!(
                    "column '{}' has length {} but frame has {} dates",
                    name,
                    col.len(),
                    dates.len()
                )));
            }
        }
        Ok(TimeSeriesFrame { dates, names, columns })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Frame restricted to rows [start, end) (half-open row range).
    pub fn slice(&self, start: usize, end: usize) -> TimeSeriesFrame {
        TimeSeriesFrame {
            dates: self.dates[start..end].to_vec(),
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[start..end].to_vec()).collect(),
        }
    }

    /// Write as CSV: `date` column plus one column per variable.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
        let mut header = vec!["date".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_io(path))?;
        for (i, date) in self.dates.iter().enumerate() {
            let mut row = vec![date.to_string()];
            for col in &self.columns {
                row.push(format!("{:.10}", col[i]));
            }
            w.write_record(&row).map_err(csv_io(path))?;
        }
        w.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    /// Read a frame previously written by [`TimeSeriesFrame::write_csv`].
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        })?;
        let headers = reader
            .headers()
            .map_err(|e| Error::CsvParse {
                path: path.display().to_string(),
                msg: e.to_string(),
            })?
            .clone();
        if headers.get(0) != Some("date") {
            return Err(Error::CsvParse {
                path: path.display().to_string(),
                msg: "first column must be 'date'".into(),
            });
        }
        let names: Vec<String> = headers.iter().skip(1).map(String::from).collect();
        let mut dates = Vec::new();
        let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for record in reader.records() {
            let record = record.map_err(|e| Error::CsvParse {
                path: path.display().to_string(),
                msg: e.to_string(),
            })?;
            let date = record
                .get(0)
                .and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok())
                .ok_or_else(|| Error::CsvParse {
                    path: path.display().to_string(),
                    msg: "bad date cell".into(),
                })?;
            dates.push(date);
            for (j, col) in columns.iter_mut().enumerate() {
                let cell = record.get(j + 1).unwrap_or("");
                let v: f64 = cell.parse().map_err(|_| Error::CsvParse {
                    path: path.display().to_string(),
                    msg: format!("bad numeric cell '{cell}'"),
                })?;
                col.push(v);
            }
        }
        TimeSeriesFrame::new(dates, names, columns)
    }
}

fn csv_io(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Result of [`align_frame`]: the frame plus how many cells were interpolated.
#[derive(Debug, Clone)]
pub struct AlignOutcome {
    pub frame: TimeSeriesFrame,
    pub filled: usize,
}

/// Align daily series into one gap-free frame.
///
/// The frame covers the intersection of the series' date ranges (after
/// trimming leading/trailing missing days). Interior gaps up to the policy
/// cap are linearly interpolated; longer gaps are an error.
pub fn align_frame(series_list: &[RawSeries], policy: GapPolicy) -> Result<AlignOutcome> {
    if series_list.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }

    struct Trimmed<'a> {
        variable: &'a str,
        first: NaiveDate,
        last: NaiveDate,
        values: BTreeMap<NaiveDate, f64>,
    }

    let mut trimmed = Vec::with_capacity(series_list.len());
    for s in series_list {
        if s.is_sub_daily() {
            return Err(Error::Config(format!(
                "series '{}' is sub-daily; aggregate before aligning",
                s.variable
            )));
        }
        let values: BTreeMap<NaiveDate, f64> = s
            .observations
            .iter()
            .filter_map(|o| o.value.map(|v| (o.stamp.date, v)))
            .collect();
        let (first, last) = match (values.keys().next(), values.keys().next_back()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(Error::EmptyIntersection),
        };
        trimmed.push(Trimmed {
            variable: &s.variable,
            first,
            last,
            values,
        });
    }

    let start = trimmed.iter().map(|t| t.first).max().unwrap();
    let end = trimmed.iter().map(|t| t.last).min().unwrap();
    if start > end {
        return Err(Error::EmptyIntersection);
    }

    let n_days = (end - start).num_days() as usize + 1;
    let dates: Vec<NaiveDate> = (0..n_days)
        .map(|i| start + chrono::Duration::days(i as i64))
        .collect();

    let mut filled = 0usize;
    let mut names = Vec::with_capacity(trimmed.len());
    let mut columns = Vec::with_capacity(trimmed.len());
    for t in &trimmed {
        let mut col: Vec<Option<f64>> = dates.iter().map(|d| t.values.get(d).copied()).collect();
        // Interpolate interior runs of missing days against their known
        // neighbors; the trim above guarantees both endpoints exist.
        let mut i = 0;
        while i < col.len() {
            if col[i].is_some() {
                i += 1;
                continue;
            }
            let gap_start = i;
            while i < col.len() && col[i].is_none() {
                i += 1;
            }
            let gap_len = i - gap_start;
            if gap_len > policy.max_interp_days as usize {
                return Err(Error::GapTooLong {
                    variable: t.variable.to_string(),
                    date: dates[i - 1],
                    gap_days: gap_len as i64,
                    cap: policy.max_interp_days,
                });
            }
            let left = col[gap_start - 1].unwrap();
            let right = col[i].unwrap();
            for (j, slot) in col[gap_start..i].iter_mut().enumerate() {
                let frac = (j + 1) as f64 / (gap_len + 1) as f64;
                *slot = Some(left + frac * (right - left));
                filled += 1;
            }
        }
        names.push(t.variable.to_string());
        columns.push(col.into_iter().map(Option::unwrap).collect());
    }

    let frame = TimeSeriesFrame::new(dates, names, columns)?;
    Ok(AlignOutcome { frame, filled })
}

/// Day-of-year helper used by the synthetic generator and plots.
pub fn day_of_year(date: NaiveDate) -> u32 {
    date.ordinal()
}
