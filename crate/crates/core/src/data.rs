use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One of the two competing risks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Risk {
    First,
    Second,
}

impl Risk {
    pub const BOTH: [Risk; 2] = [Risk::First, Risk::Second];

    /// 1 or 2, matching the `delta` column of a dataset.
    pub fn index(self) -> u8 {
        match self {
            Risk::First => 1,
            Risk::Second => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Risk> {
        match i {
            1 => Some(Risk::First),
            2 => Some(Risk::Second),
            _ => None,
        }
    }

    pub fn other(self) -> Risk {
        match self {
            Risk::First => Risk::Second,
            Risk::Second => Risk::First,
        }
    }
}

/// An observed `(t, δ, z)` triple; `cause == None` is a censored row.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub time: f64,
    pub cause: Option<Risk>,
    pub covariates: Vec<f64>,
}

impl Observation {
    pub fn new(time: f64, cause: Option<Risk>, covariates: Vec<f64>) -> Self {
        Self {
            time,
            cause,
            covariates,
        }
    }

    /// 0 for censored, otherwise the risk index.
    pub fn delta(&self) -> u8 {
        self.cause.map_or(0, Risk::index)
    }
}

/// Competing-risks data with a fixed covariate dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    dim: usize,
    rows: Vec<Observation>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            rows: Vec::with_capacity(capacity),
        }
    }

    pub fn from_rows(dim: usize, rows: Vec<Observation>) -> Result<Self> {
        let mut data = Self::with_capacity(dim, rows.len());
        for row in rows {
            data.push(row)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if !(obs.time > 0.0 && obs.time.is_finite()) {
            return Err(Error::Domain {
                what: "t",
                value: obs.time,
                domain: "(0, inf)",
            });
        }
        if obs.covariates.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: obs.covariates.len(),
            });
        }
        if let Some(&bad) = obs.covariates.iter().find(|z| !z.is_finite()) {
            return Err(Error::Domain {
                what: "z",
                value: bad,
                domain: "finite reals",
            });
        }
        self.rows.push(obs);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Observation> {
        self.rows.iter()
    }

    /// Number of rows failing from `cause` (`None` counts censored rows).
    pub fn count(&self, cause: Option<Risk>) -> usize {
        self.rows.iter().filter(|r| r.cause == cause).count()
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Observation;
    type IntoIter = core::slice::Iter<'a, Observation>;

    fn into_iter(self) -> Self::IntoIter {
        self.rows.iter()
    }
}
