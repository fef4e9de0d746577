//! Time-series datasets: typed columns with roles, CSV I/O, cleaning,
//! smoothing diagnostics and the reference/current split.

mod csv_io;
mod preprocess;
mod smoothing;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, utc, write_csv, TimeFormat};
pub use preprocess::{clean, polynomial_interpolate, CleanPolicy};
pub use smoothing::{growth_rate, kalman_smooth, moving_average, MovingAverageConfig};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Input,
    Target,
    Prediction,
    #[serde(alias = "time")]
    TimeIndex,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Target => "target",
            Role::Prediction => "prediction",
            Role::TimeIndex => "time_index",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dtype {
    #[default]
    Numeric,
    Binary,
    Categorical,
}

/// One variable. Missing values are stored as NaN until the dataset is cleaned.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableColumn {
    pub name: String,
    pub role: Role,
    pub dtype: Dtype,
    pub values: Vec<f64>,
}

impl VariableColumn {
    pub fn new(name: impl Into<String>, role: Role, dtype: Dtype, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            role,
            dtype,
            values,
        }
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSchema {
    pub role: Role,
    #[serde(default)]
    pub dtype: Dtype,
}

/// Column name -> role/dtype. Exactly one entry must carry the time-index role.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    pub columns: BTreeMap<String, ColumnSchema>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, role: Role, dtype: Dtype) -> Self {
        self.columns
            .insert(name.to_string(), ColumnSchema { role, dtype });
        self
    }

    pub fn time_column(&self) -> Result<&str> {
        let mut it = self
            .columns
            .iter()
            .filter(|(_, c)| c.role == Role::TimeIndex)
            .map(|(n, _)| n.as_str());
        match (it.next(), it.next()) {
            (Some(name), None) => Ok(name),
            (None, _) => Err(Error::Schema("no column has role time_index".into())),
            (Some(_), Some(_)) => Err(Error::Schema(
                "more than one column has role time_index".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    pub name: String,
    pub time: Vec<Timestamp>,
    pub columns: Vec<VariableColumn>,
}

impl TimeSeriesDataset {
    pub fn new(
        name: impl Into<String>,
        time: Vec<Timestamp>,
        columns: Vec<VariableColumn>,
    ) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            time,
            columns,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let n = self.time.len();
        if let Some(w) = self.time.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Schema(format!(
                "time index decreases at row {}",
                w + 1
            )));
        }
        let mut targets = 0;
        let mut predictions = 0;
        for c in &self.columns {
            if c.values.len() != n {
                return Err(Error::Schema(format!(
                    "column {} has {} values, expected {n}",
                    c.name,
                    c.values.len()
                )));
            }
            match c.role {
                Role::Target => targets += 1,
                Role::Prediction => predictions += 1,
                Role::TimeIndex => {
                    return Err(Error::Schema(format!(
                        "column {} duplicates the time index",
                        c.name
                    )))
                }
                Role::Input => {}
            }
        }
        if targets > 1 || predictions > 1 {
            return Err(Error::Schema(
                "at most one target and one prediction column allowed".into(),
            ));
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<&VariableColumn> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    }

    pub fn column_mut(&mut self, name: &str) -> Result<&mut VariableColumn> {
        self.columns
            .iter_mut()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    }

    pub fn columns_with_role(&self, role: Role) -> impl Iterator<Item = &VariableColumn> {
        self.columns.iter().filter(move |c| c.role == role)
    }

    /// Input and target columns, i.e. everything drift detection looks at.
    pub fn monitored_columns(&self) -> impl Iterator<Item = &VariableColumn> {
        self.columns
            .iter()
            .filter(|c| matches!(c.role, Role::Input | Role::Target))
    }

    /// Copy of rows `[begin, end)`.
    pub fn slice(&self, begin: usize, end: usize) -> TimeSeriesDataset {
        TimeSeriesDataset {
            name: self.name.clone(),
            time: self.time[begin..end].to_vec(),
            columns: self
                .columns
                .iter()
                .map(|c| VariableColumn {
                    values: c.values[begin..end].to_vec(),
                    ..c.clone()
                })
                .collect(),
        }
    }

    /// Keep the rows whose mask entry is true.
    pub fn filter_rows(&self, keep: &[bool]) -> TimeSeriesDataset {
        let pick = |v: &[f64]| {
            v.iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(x, _)| *x)
                .collect::<Vec<_>>()
        };
        TimeSeriesDataset {
            name: self.name.clone(),
            time: self
                .time
                .iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(t, _)| *t)
                .collect(),
            columns: self
                .columns
                .iter()
                .map(|c| VariableColumn {
                    values: pick(&c.values),
                    ..c.clone()
                })
                .collect(),
        }
    }

    fn same_layout(&self, other: &TimeSeriesDataset) -> bool {
        self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.name == b.name && a.role == b.role && a.dtype == b.dtype)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCurrentSplit {
    pub reference: TimeSeriesDataset,
    pub current: TimeSeriesDataset,
    pub split_timestamp: Timestamp,
}

impl ReferenceCurrentSplit {
    pub fn new(
        reference: TimeSeriesDataset,
        current: TimeSeriesDataset,
        split_timestamp: Timestamp,
    ) -> Result<Self> {
        if reference.is_empty() || current.is_empty() {
            return Err(Error::EmptySplit("both halves must contain rows".into()));
        }
        if !reference.same_layout(&current) {
            return Err(Error::Schema(
                "reference and current have different columns".into(),
            ));
        }
        let ref_max = *reference.time.last().unwrap();
        let cur_min = current.time[0];
        if !(ref_max < split_timestamp && split_timestamp <= cur_min) {
            return Err(Error::InvalidArgument(format!(
                "split timestamp {split_timestamp} does not separate the halves"
            )));
        }
        Ok(Self {
            reference,
            current,
            split_timestamp,
        })
    }

    /// Reference and current values of one variable.
    pub fn variable(&self, name: &str) -> Result<(&[f64], &[f64])> {
        Ok((
            &self.reference.column(name)?.values,
            &self.current.column(name)?.values,
        ))
    }
}

/// Rows with `time < at` become the reference, the rest the current window.
pub fn split(ds: &TimeSeriesDataset, at: Timestamp) -> Result<ReferenceCurrentSplit> {
    let cut = ds.time.partition_point(|&t| t < at);
    if cut == 0 {
        return Err(Error::EmptySplit(format!(
            "no rows before split timestamp {at}"
        )));
    }
    if cut == ds.row_count() {
        return Err(Error::EmptySplit(format!(
            "no rows at or after split timestamp {at}"
        )));
    }
    ReferenceCurrentSplit::new(ds.slice(0, cut), ds.slice(cut, ds.row_count()), at)
}
