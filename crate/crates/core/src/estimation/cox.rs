// Only needed when std (and its inherent f64 methods) is absent.
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use super::fit::{coefficient_names, covariance_from_information, Coefficient, FitResult, Model};
use crate::data::{Dataset, Risk};
use crate::error::{Error, Result};

const MAX_NEWTON_STEPS: usize = 100;
const MAX_HALVINGS: usize = 30;
/// Coefficients beyond this magnitude indicate (quasi-)separation.
const DIVERGENCE_BOUND: f64 = 50.0;

struct Evaluation {
    loglik: f64,
    score: Vec<f64>,
    /// Observed information, row-major.
    info: Vec<f64>,
}

/// Data for a cause-specific Cox fit, sorted by decreasing time.
struct CoxData {
    dim: usize,
    z: Vec<f64>,
    event: Vec<bool>,
    groups: Vec<usize>,
}

impl CoxData {
    fn new(data: &Dataset, risk: Risk) -> Self {
        let rows = data.rows();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[b].time.total_cmp(&rows[a].time));
        let mut z = Vec::with_capacity(rows.len() * data.dim());
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
            dim: data.dim(),
            z,
            event: order.iter().map(|&i| rows[i].cause == Some(risk)).collect(),
            groups,
        }
    }

    /// Breslow partial likelihood, score and information at `alpha`.
    // index loops keep the parallel z/eta/event arrays readable
    #[allow(clippy::needless_range_loop)]
    fn evaluate(&self, alpha: &[f64]) -> Evaluation {
        let p = self.dim;
        let n = self.event.len();
        let eta: Vec<f64> = (0..n)
            .map(|k| {
                self.z[k * p..(k + 1) * p]
                    .iter()
                    .zip(alpha)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        let shift = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s0 = 0.0;
        let mut s1 = vec![0.0; p];
        let mut s2 = vec![0.0; p * p];
        let mut loglik = 0.0;
        let mut score = vec![0.0; p];
        let mut info = vec![0.0; p * p];
        let mut start = 0;
        for &end in &self.groups {
            for k in start..end {
                let w = (eta[k] - shift).exp();
                let z = &self.z[k * p..(k + 1) * p];
                s0 += w;
                for i in 0..p {
                    s1[i] += w * z[i];
                    for j in 0..p {
                        s2[i * p + j] += w * z[i] * z[j];
                    }
                }
            }
            let log_s0 = s0.ln() + shift;
            for k in start..end {
                if !self.event[k] {
                    continue;
                }
                let z = &self.z[k * p..(k + 1) * p];
                loglik += eta[k] - log_s0;
                for i in 0..p {
                    let mi = s1[i] / s0;
                    score[i] += z[i] - mi;
                    for j in 0..p {
                        info[i * p + j] += s2[i * p + j] / s0 - mi * s1[j] / s0;
                    }
                }
            }
            start = end;
        }
        Evaluation {
            loglik,
            score,
            info,
        }
    }
}

/// Cause-specific Cox model for `risk`: events of the other risk are
/// censored at their time. Newton–Raphson with step halving.
pub fn fit_cox_csh(data: &Dataset, risk: Risk) -> Result<FitResult> {
    let events = data.count(Some(risk));
    if events == 0 {
        return Err(Error::NoEvents { risk: risk.index() });
    }
    let cd = CoxData::new(data, risk);
    let p = cd.dim;
    let mut alpha = vec![0.0; p];
    let mut current = cd.evaluate(&alpha);
    let mut converged = false;
    let mut iterations = 0;
    let mut evaluations = 1;
    let mut diagnostics = Vec::new();

    while iterations < MAX_NEWTON_STEPS {
        iterations += 1;
        let info = DMatrix::from_row_slice(p, p, &current.info);
        let score = DVector::from_column_slice(&current.score);
        let Some(step) = info.clone().cholesky().map(|c| c.solve(&score)) else {
            diagnostics.push("information matrix is not positive definite".into());
            break;
        };
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = alpha
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + scale * s)
                .collect();
            let eval = cd.evaluate(&trial);
            evaluations += 1;
            if eval.loglik.is_finite()
                && eval.loglik >= current.loglik - 1e-12 * current.loglik.abs()
            {
                accepted = Some((trial, eval));
                break;
            }
            scale *= 0.5;
        }
        let Some((trial, eval)) = accepted else {
            diagnostics.push("step halving failed to improve the partial likelihood".into());
            break;
        };
        let max_step = trial
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let gain = eval.loglik - current.loglik;
        alpha = trial;
        current = eval;
        if alpha.iter().any(|a| a.abs() > DIVERGENCE_BOUND) {
            diagnostics.push(format!(
                "coefficients diverging (|alpha| > {DIVERGENCE_BOUND}); possible separation"
            ));
            break;
        }
        if max_step < 1e-10
            || (gain.abs() < 1e-13 * (1.0 + current.loglik.abs()) && max_step < 1e-7)
        {
            converged = true;
            break;
        }
    }
    if !converged && diagnostics.is_empty() {
        diagnostics.push(format!(
            "Newton iterations did not converge in {MAX_NEWTON_STEPS} steps"
        ));
    }
    let covariance = covariance_from_information(&current.info, p, &mut diagnostics);
    let j = risk.index();
    let coefficients = coefficient_names(&format!("alpha1{j}"), p)
        .into_iter()
        .enumerate()
        .map(|(i, name)| Coefficient {
            name,
            estimate: alpha[i],
            se: covariance.as_ref().map(|c| c[i * p + i].max(0.0).sqrt()),
        })
        .collect();
    Ok(FitResult {
        model: Model::CoxCsh(risk),
        coefficients,
        derived: Vec::new(),
        covariance,
        loglik: current.loglik,
        converged,
        iterations,
        evaluations,
        diagnostics,
    })
}
