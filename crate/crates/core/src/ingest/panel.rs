use std::collections::HashSet;

use chrono::{Datelike, Months, NaiveDate};

use super::IngestError;

/// Monthly panel of indicator values, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    dates: Vec<NaiveDate>,
    series_ids: Vec<String>,
    columns: Vec<Vec<Option<f64>>>,
    tcodes: Vec<u8>,
}

impl SeriesPanel {
    /// Builds a panel, checking every structural invariant.
    pub fn new(
        dates: Vec<NaiveDate>,
        series_ids: Vec<String>,
        columns: Vec<Vec<Option<f64>>>,
        tcodes: Vec<u8>,
    ) -> Result<Self, IngestError> {
        let invalid = |m: String| Err(IngestError::InvalidPanel(m));
        if series_ids.len() != columns.len() || series_ids.len() != tcodes.len() {
            return invalid(format!(
                "{} series ids, {} columns, {} tcodes",
                series_ids.len(),
                columns.len(),
                tcodes.len()
            ));
        }
        let mut seen = HashSet::new();
        for id in &series_ids {
            if id.is_empty() || !seen.insert(id.as_str()) {
                return invalid(format!("series id `{id}` is empty or duplicated"));
            }
        }
        if let Some(t) = tcodes.iter().find(|t| !(1..=7).contains(*t)) {
            return invalid(format!("tcode {t} outside 1..7"));
        }
        for (id, col) in series_ids.iter().zip(&columns) {
            if col.len() != dates.len() {
                return invalid(format!(
                    "column {id} has {} values for {} dates",
                    col.len(),
                    dates.len()
                ));
            }
            if col.iter().flatten().any(|v| !v.is_finite()) {
                return invalid(format!("column {id} holds a non-finite value"));
            }
        }
        if let Some(d) = dates.iter().find(|d| d.day() != 1) {
            return invalid(format!("date {d} is not a month start"));
        }
        if dates.windows(2).any(|w| next_month(w[0]) != Some(w[1])) {
            return invalid("dates are not consecutive months".into());
        }
        Ok(Self {
            dates,
            series_ids,
            columns,
            tcodes,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn series_ids(&self) -> &[String] {
        &self.series_ids
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_series(&self) -> usize {
        self.series_ids.len()
    }

    pub fn column(&self, idx: usize) -> &[Option<f64>] {
        &self.columns[idx]
    }

    pub fn columns(&self) -> &[Vec<Option<f64>>] {
        &self.columns
    }

    pub fn tcodes(&self) -> &[u8] {
        &self.tcodes
    }

    pub fn index_of(&self, series_id: &str) -> Option<usize> {
        self.series_ids.iter().position(|s| s == series_id)
    }

    pub fn column_by_id(&self, series_id: &str) -> Option<&[Option<f64>]> {
        self.index_of(series_id).map(|i| self.column(i))
    }

    pub fn tcode(&self, series_id: &str) -> Option<u8> {
        self.index_of(series_id).map(|i| self.tcodes[i])
    }

    /// Value at (date index, series index).
    pub fn value(&self, date_idx: usize, series_idx: usize) -> Option<f64> {
        self.columns[series_idx][date_idx]
    }

    pub(crate) fn with_columns(&self, columns: Vec<Vec<Option<f64>>>) -> Result<Self, IngestError> {
        Self::new(
            self.dates.clone(),
            self.series_ids.clone(),
            columns,
            self.tcodes.clone(),
        )
    }
}

pub(crate) fn next_month(d: NaiveDate) -> Option<NaiveDate> {
    d.checked_add_months(Months::new(1))
}

/// Panel the evaluation consumes: either the tcode-transformed values or a
/// verbatim copy of the levels.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPanel {
    pub panel: SeriesPanel,
    pub transform_applied: bool,
}

impl std::ops::Deref for TransformedPanel {
    type Target = SeriesPanel;

    fn deref(&self) -> &SeriesPanel {
        &self.panel
    }
}
