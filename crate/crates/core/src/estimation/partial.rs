use alloc::vec::Vec;

use super::restructure::RestructuredDataset;
use crate::data::Risk;
use crate::error::{Error, Result};
use crate::num::{dot, softplus, LogSumExp};

/// The free part `(θ, γ, β₁₁, β₁₂)` of the structural parameters; the
/// baselines cancel from the partial likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialParams {
    pub theta: f64,
    pub gamma: f64,
    pub beta11: Vec<f64>,
    pub beta12: Vec<f64>,
}

/// Partial likelihood over restructured rows, with the sort order and tie
/// groups computed once so repeated evaluation is linear in the row count.
#[derive(Debug, Clone)]
pub struct PartialLikelihood {
    dim: usize,
    /// Rows sorted by decreasing time.
    second: Vec<bool>,
    event: Vec<bool>,
    z: Vec<f64>,
    /// End offsets of groups of equal time, in sorted order.
    groups: Vec<usize>,
    events: usize,
}

impl PartialLikelihood {
    pub fn new(rd: &RestructuredDataset) -> Self {
        let dim = rd.dim();
        let rows = rd.rows();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[b].time.total_cmp(&rows[a].time));
        let mut z = Vec::with_capacity(rows.len() * dim);
        let mut groups = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            z.extend_from_slice(&rows[i].covariates);
            if k > 0 && rows[i].time != rows[order[k - 1]].time {
                groups.push(k);
            }
        }
        if !order.is_empty() {
            groups.push(order.len());
        }
        Self {
            dim,
            second: order
                .iter()
                .map(|&i| rows[i].risk == Risk::Second)
                .collect(),
            event: order.iter().map(|&i| rows[i].event).collect(),
            z,
            groups,
            events: rd.event_count(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn event_count(&self) -> usize {
        self.events
    }

    /// Cox partial log-likelihood with Breslow ties for an arbitrary row
    /// predictor `eta(row_is_risk_2, z)`.
    fn eval_with<F: FnMut(bool, &[f64]) -> f64>(&self, mut eta: F) -> f64 {
        let mut acc = LogSumExp::default();
        let mut total = 0.0;
        let mut start = 0;
        let mut group_eta: Vec<f64> = Vec::new();
        for &end in &self.groups {
            group_eta.clear();
            for k in start..end {
                let e = eta(self.second[k], &self.z[k * self.dim..(k + 1) * self.dim]);
                acc.push(e);
                group_eta.push(e);
            }
            let log_risk = acc.value();
            for (k, e) in (start..end).zip(&group_eta) {
                if self.event[k] {
                    total += e - log_risk;
                }
            }
            start = end;
        }
        total
    }

    pub fn structural(&self, p: &PartialParams) -> Result<f64> {
        if p.beta11.len() != self.dim || p.beta12.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: p.beta11.len().min(p.beta12.len()),
            });
        }
        if self.events == 0 {
            return Err(Error::NoEvents { risk: 0 });
        }
        let theta = p.theta;
        let exponent = 1.0 / theta - 1.0;
        let star2: Vec<f64> = p
            .beta11
            .iter()
            .zip(&p.beta12)
            .map(|(b1, b2)| b1 * (1.0 - theta) + b2 * theta)
            .collect();
        let diff: Vec<f64> = p
            .beta11
            .iter()
            .zip(&p.beta12)
            .map(|(b1, b2)| b2 - b1)
            .collect();
        let value = self.eval_with(|second, z| {
            let log_a = exponent * softplus(p.gamma + theta * dot(z, &diff));
            if second {
                p.gamma + dot(z, &star2) + log_a
            } else {
                dot(z, &p.beta11) + log_a
            }
        });
        if value.is_finite() {
            Ok(value)
        } else {
            let mut params = alloc::vec![p.theta, p.gamma];
            params.extend_from_slice(&p.beta11);
            params.extend_from_slice(&p.beta12);
            Err(Error::NonFiniteObjective { params })
        }
    }
}

/// Structural partial log-likelihood of restructured data.
pub fn structural_partial_loglik(p: &PartialParams, rd: &RestructuredDataset) -> Result<f64> {
    PartialLikelihood::new(rd).structural(p)
}
