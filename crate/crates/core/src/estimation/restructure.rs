use alloc::vec::Vec;

use crate::data::{Dataset, Observation, Risk};
use crate::error::{Error, Result};

/// One row of the duplicated single-risk layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RestructuredRow {
    pub orig_index: usize,
    /// Which risk this copy of the observation stands for (`J`).
    pub risk: Risk,
    /// `1{δ = J}`.
    pub event: bool,
    pub time: f64,
    pub covariates: Vec<f64>,
}

/// Every observation duplicated into a risk-1 and a risk-2 row, in original
/// order: `(i, J=1), (i, J=2), (i+1, J=1), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestructuredDataset {
    dim: usize,
    rows: Vec<RestructuredRow>,
}

impl RestructuredDataset {
    /// Wraps rows in any order; checks covariate dimensions and times.
    pub fn from_rows(dim: usize, rows: Vec<RestructuredRow>) -> Result<Self> {
        for r in &rows {
            if r.covariates.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: r.covariates.len(),
                });
            }
            crate::error::check_time(r.time)?;
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[RestructuredRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.rows.iter().filter(|r| r.event).count()
    }
}

pub fn restructure(data: &Dataset) -> RestructuredDataset {
    let mut rows = Vec::with_capacity(2 * data.len());
    for (i, obs) in data.iter().enumerate() {
        for risk in Risk::BOTH {
            rows.push(RestructuredRow {
                orig_index: i,
                risk,
                event: obs.cause == Some(risk),
                time: obs.time,
                covariates: obs.covariates.clone(),
            });
        }
    }
    RestructuredDataset {
        dim: data.dim(),
        rows,
    }
}

/// Inverse of [`restructure`]; rows may come in any order.
pub fn unrestructure(rd: &RestructuredDataset) -> Result<Dataset> {
    let n = rd.rows.len() / 2;
    if rd.rows.len() % 2 != 0 {
        return Err(Error::Config(
            "restructured data must have an even row count".into(),
        ));
    }
    let mut slots: Vec<[Option<&RestructuredRow>; 2]> = alloc::vec![[None, None]; n];
    for row in &rd.rows {
        let slot = slots.get_mut(row.orig_index).ok_or_else(|| {
            Error::Config(alloc::format!("row index {} out of range", row.orig_index))
        })?;
        let k = (row.risk.index() - 1) as usize;
        if slot[k].replace(row).is_some() {
            return Err(Error::Config(alloc::format!(
                "observation {} has two rows for risk {}",
                row.orig_index,
                row.risk.index()
            )));
        }
    }
    let mut data = Dataset::with_capacity(rd.dim, n);
    for (i, slot) in slots.iter().enumerate() {
        let (Some(a), Some(b)) = (slot[0], slot[1]) else {
            return Err(Error::Config(alloc::format!(
                "observation {i} is missing a row"
            )));
        };
        if a.time != b.time || a.covariates != b.covariates || (a.event && b.event) {
            return Err(Error::Config(alloc::format!(
                "rows of observation {i} disagree"
            )));
        }
        let cause = if a.event {
            Some(Risk::First)
        } else if b.event {
            Some(Risk::Second)
        } else {
            None
        };
        data.push(Observation::new(a.time, cause, a.covariates.clone()))?;
    }
    Ok(data)
}
