use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Schema, TimeSeriesDataset, Timestamp, VariableColumn};
use crate::error::{Error, Result};

/// How the time column is written in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TimeFormat {
    /// Integer seconds since the epoch.
    Epoch,
    Rfc3339,
    /// A strftime-style pattern, interpreted as UTC.
    Pattern(String),
}

impl Default for TimeFormat {
    fn default() -> Self {
        TimeFormat::Pattern("%Y-%m-%d %H:%M:%S".into())
    }
}

impl FromStr for TimeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "" => Err(Error::InvalidArgument("empty time format".into())),
            "epoch" => Ok(TimeFormat::Epoch),
            "rfc3339" => Ok(TimeFormat::Rfc3339),
            p => Ok(TimeFormat::Pattern(p.to_string())),
        }
    }
}

impl TryFrom<String> for TimeFormat {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeFormat> for String {
    fn from(f: TimeFormat) -> String {
        f.to_string()
    }
}

impl fmt::Display for TimeFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeFormat::Epoch => f.write_str("epoch"),
            TimeFormat::Rfc3339 => f.write_str("rfc3339"),
            TimeFormat::Pattern(p) => f.write_str(p),
        }
    }
}

impl TimeFormat {
    pub fn parse_timestamp(&self, raw: &str) -> Option<Timestamp> {
        let raw = raw.trim();
        match self {
            TimeFormat::Epoch => raw.parse::<i64>().ok(),
            TimeFormat::Rfc3339 => DateTime::parse_from_rfc3339(raw)
                .ok()
                .map(|d| d.timestamp()),
            TimeFormat::Pattern(p) => NaiveDateTime::parse_from_str(raw, p)
                .map(|d| d.and_utc().timestamp())
                .or_else(|_| {
                    NaiveDate::parse_from_str(raw, p)
                        .map(|d| d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp())
                })
                .ok(),
        }
    }

    pub fn format_timestamp(&self, t: Timestamp) -> String {
        match self {
            TimeFormat::Epoch => t.to_string(),
            TimeFormat::Rfc3339 => utc(t).to_rfc3339(),
            TimeFormat::Pattern(p) => utc(t).format(p).to_string(),
        }
    }
}

pub fn utc(t: Timestamp) -> DateTime<Utc> {
    DateTime::<Utc>::from_timestamp(t, 0).expect("timestamp within chrono range")
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("na") || field.eq_ignore_ascii_case("nan")
}

/// Read a CSV file into a dataset.
///
/// Only columns named in `schema` are kept, in header order. Rows are sorted
/// by time (stable, so equal timestamps keep file order) and exact duplicate
/// rows are dropped. Missing markers (empty, `NA`, `NaN`) become NaN.
pub fn load_csv(path: &Path, schema: &Schema, format: &TimeFormat) -> Result<TimeSeriesDataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers()?.clone();

    let time_col = schema.time_column()?;
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    };
    let time_idx = position(time_col)?;
    for name in schema.columns.keys() {
        position(name)?;
    }

    // value columns in header order
    let value_cols: Vec<(usize, &str)> = header
        .iter()
        .enumerate()
        .filter(|(i, h)| *i != time_idx && schema.columns.contains_key(*h))
        .collect();

    struct Row {
        time: Timestamp,
        raw: Vec<String>,
        values: Vec<f64>,
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_time = record.get(time_idx).unwrap_or("");
        let time = format
            .parse_timestamp(raw_time)
            .ok_or_else(|| Error::Timestamp {
                line,
                value: raw_time.to_string(),
            })?;
        let mut raw = Vec::with_capacity(value_cols.len() + 1);
        raw.push(raw_time.to_string());
        let mut values = Vec::with_capacity(value_cols.len());
        for &(idx, name) in &value_cols {
            let field = record.get(idx).unwrap_or("");
            let v = if is_missing(field) {
                f64::NAN
            } else {
                field.parse::<f64>().map_err(|_| Error::Value {
                    line,
                    column: name.to_string(),
                    value: field.to_string(),
                })?
            };
            raw.push(field.to_string());
            values.push(v);
        }
        rows.push(Row { time, raw, values });
    }

    rows.sort_by_key(|r| r.time);
    let mut kept: Vec<Row> = Vec::with_capacity(rows.len());
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    let mut group_time = None;
    for row in rows {
        if group_time != Some(row.time) {
            seen.clear();
            group_time = Some(row.time);
        }
        if seen.insert(row.raw.clone()) {
            kept.push(row);
        }
    }

    let columns = value_cols
        .iter()
        .enumerate()
        .map(|(j, &(_, name))| {
            let spec = schema.columns[name];
            VariableColumn::new(
                name,
                spec.role,
                spec.dtype,
                kept.iter().map(|r| r.values[j]).collect(),
            )
        })
        .collect();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    TimeSeriesDataset::new(name, kept.iter().map(|r| r.time).collect(), columns)
}

/// Write a dataset as CSV with a leading `time` column. Values use the
/// shortest representation that parses back to the same f64; missing
/// values are written as empty fields.
pub fn write_csv(ds: &TimeSeriesDataset, path: &Path, format: &TimeFormat) -> Result<()> {
    let mut out = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = String::with_capacity(ds.row_count() * (8 + 12 * ds.columns.len()));
    buf.push_str("time");
    for c in &ds.columns {
        buf.push(',');
        buf.push_str(&c.name);
    }
    buf.push('\n');
    for (i, &t) in ds.time.iter().enumerate() {
        buf.push_str(&format.format_timestamp(t));
        for c in &ds.columns {
            buf.push(',');
            let v = c.values[i];
            if !v.is_nan() {
                buf.push_str(&v.to_string());
            }
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dtype, Role};

    fn schema() -> Schema {
        Schema::new()
            .with("time", Role::TimeIndex, Dtype::Numeric)
            .with("x", Role::Input, Dtype::Numeric)
    }

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn drops_exact_duplicate() {
        let f = write("time,x\n1,1.0\n2,2.0\n2,2.0\n3,3.0\n");
        let ds = load_csv(f.path(), &schema(), &TimeFormat::Epoch).unwrap();
        assert_eq!(ds.row_count(), 3);
    }

    #[test]
    fn sorts_rows_by_time() {
        let f = write("time,x\n3,30\n1,10\n2,20\n");
        let ds = load_csv(f.path(), &schema(), &TimeFormat::Epoch).unwrap();
        assert_eq!(ds.time, vec![1, 2, 3]);
        assert_eq!(ds.columns[0].values, vec![10.0, 20.0, 30.0]);
    }

    #[test]
    fn equal_times_keep_file_order() {
        let f = write("time,x\n1,5\n1,4\n0,3\n");
        let ds = load_csv(f.path(), &schema(), &TimeFormat::Epoch).unwrap();
        assert_eq!(ds.columns[0].values, vec![3.0, 5.0, 4.0]);
    }

    #[test]
    fn missing_time_column() {
        let f = write("when,x\n1,1\n");
        let err = load_csv(f.path(), &schema(), &TimeFormat::Epoch).unwrap_err();
        assert!(err.to_string().contains("column not found"), "{err}");
    }

    #[test]
    fn bad_timestamp_reports_line() {
        let f = write("time,x\n2021-01-01 00:00:00,1\nnot a date,2\n");
        let err = load_csv(f.path(), &schema(), &TimeFormat::default()).unwrap_err();
        assert!(matches!(err, Error::Timestamp { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_markers() {
        let f = write("time,x\n1,\n2,NA\n3,nan\n4,NaN\n5,1.5\n");
        let ds = load_csv(f.path(), &schema(), &TimeFormat::Epoch).unwrap();
        assert_eq!(ds.columns[0].missing_count(), 4);
    }

    #[test]
    fn unmapped_columns_dropped() {
        let f = write("time,x,extra\n1,1,foo\n");
        let ds = load_csv(f.path(), &schema(), &TimeFormat::Epoch).unwrap();
        assert_eq!(ds.columns.len(), 1);
    }

    #[test]
    fn pattern_round_trip() {
        let fmt = TimeFormat::default();
        let t = fmt.parse_timestamp("2021-05-09 00:00:00").unwrap();
        assert_eq!(t, 1_620_518_400);
        assert_eq!(fmt.format_timestamp(t), "2021-05-09 00:00:00");
    }
}
