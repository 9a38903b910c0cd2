// Only needed when std (and its inherent f64 methods) is absent.
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::fit::{fit_full_mle, fit_structural, FitResult, StructuralFitOptions};
use crate::error::{Error, Result};
use crate::optim::NelderMeadOptions;
use crate::sampler::{sample_dataset, DgpConfig};
use crate::structural::StructuralParams;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Estimator {
    #[default]
    PartialLikelihood,
    FullMle,
}

/// Parameters summarised by a study, with their true values.
pub fn study_targets(params: &StructuralParams) -> Vec<(String, f64)> {
    let mut out = alloc::vec![
        ("tau".to_string(), params.kendall_tau()),
        ("gamma".to_string(), params.gamma()),
    ];
    let d = params.dim();
    for (prefix, coeffs) in [("beta11", params.beta11()), ("beta12", params.beta12())] {
        for (name, &v) in super::fit::coefficient_names(prefix, d)
            .into_iter()
            .zip(coeffs)
        {
            out.push((name, v));
        }
    }
    out
}

/// What one replication contributed: for each target, the estimate and
/// whether its 95% interval covered the truth. `None` when the fit failed
/// or did not converge.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub index: u64,
    pub estimates: Option<Vec<(f64, bool)>>,
    pub failure: Option<String>,
}

fn fit_with(estimator: &Estimator, cfg: &DgpConfig) -> Result<FitResult> {
    let data = sample_dataset(cfg)?;
    match estimator {
        Estimator::PartialLikelihood => fit_structural(&data, &StructuralFitOptions::default()),
        Estimator::FullMle => fit_full_mle(
            &data,
            cfg.params.baseline_shape(),
            &NelderMeadOptions::default(),
        ),
    }
}

/// Simulates and fits replication `r` of the study with base config `cfg`.
pub fn run_replication(cfg: &DgpConfig, r: u64, estimator: &Estimator) -> ReplicationOutcome {
    let targets = study_targets(&cfg.params);
    let fit = match fit_with(estimator, &cfg.for_replication(r)) {
        Ok(fit) => fit,
        Err(e) => {
            return ReplicationOutcome {
                index: r,
                estimates: None,
                failure: Some(e.to_string()),
            }
        }
    };
    if !fit.usable() {
        return ReplicationOutcome {
            index: r,
            estimates: None,
            failure: Some(fit.diagnostics.join("; ")),
        };
    }
    let estimates = targets
        .iter()
        .map(|(name, truth)| {
            let c = fit.get(name)?;
            Some((c.estimate, c.covers(*truth)?))
        })
        .collect::<Option<Vec<_>>>();
    let failure = estimates
        .is_none()
        .then(|| "missing standard error for a study parameter".to_string());
    ReplicationOutcome {
        index: r,
        estimates,
        failure,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub truth: f64,
    /// Squared bias `(mean - truth)²`.
    pub sb: Option<f64>,
    /// `(1/R) Σ (θ̂ᵣ - mean)²`; `None` with fewer than two usable fits.
    pub var: Option<f64>,
    pub mse: Option<f64>,
    /// Share of usable fits whose 95% interval contains the truth.
    pub cp: Option<f64>,
    pub n_converged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub parameters: Vec<ParameterSummary>,
    pub reps: usize,
    pub n_converged: usize,
    /// Failure messages by replication index.
    pub failures: Vec<(u64, String)>,
}

impl StudyReport {
    /// Aggregates outcomes in replication order, so the result does not
    /// depend on the order they were computed in.
    pub fn from_outcomes(targets: &[(String, f64)], outcomes: &[ReplicationOutcome]) -> Self {
        let mut sorted: Vec<&ReplicationOutcome> = outcomes.iter().collect();
        sorted.sort_by_key(|o| o.index);
        let usable: Vec<&Vec<(f64, bool)>> =
            sorted.iter().filter_map(|o| o.estimates.as_ref()).collect();
        let r = usable.len();
        let parameters = targets
            .iter()
            .enumerate()
            .map(|(k, (name, truth))| {
                let mut s = ParameterSummary {
                    name: name.clone(),
                    truth: *truth,
                    sb: None,
                    var: None,
                    mse: None,
                    cp: None,
                    n_converged: r,
                };
                if r > 0 {
                    let rf = r as f64;
                    let mean = usable.iter().map(|e| e[k].0).sum::<f64>() / rf;
                    let var = usable.iter().map(|e| (e[k].0 - mean).powi(2)).sum::<f64>() / rf;
                    let sb = (mean - truth).powi(2);
                    s.sb = Some(sb);
                    s.mse = Some(sb + var);
                    s.var = (r >= 2).then_some(var);
                    s.cp = Some(usable.iter().filter(|e| e[k].1).count() as f64 / rf);
                }
                s
            })
            .collect();
        Self {
            parameters,
            reps: outcomes.len(),
            n_converged: r,
            failures: sorted
                .iter()
                .filter(|o| o.estimates.is_none())
                .map(|o| (o.index, o.failure.clone().unwrap_or_default()))
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

/// Runs `reps` replications sequentially. Replication `r` uses the seed
/// `replication_seed(cfg.seed, r)`, so any parallel driver that calls
/// [`run_replication`] gets the same report.
pub fn coverage_study(cfg: &DgpConfig, reps: usize, estimator: &Estimator) -> Result<StudyReport> {
    if reps == 0 {
        return Err(Error::Config(
            "a study needs at least one replication".into(),
        ));
    }
    cfg.validate()?;
    let outcomes: Vec<ReplicationOutcome> = (0..reps as u64)
        .map(|r| run_replication(cfg, r, estimator))
        .collect();
    Ok(StudyReport::from_outcomes(
        &study_targets(&cfg.params),
        &outcomes,
    ))
}
