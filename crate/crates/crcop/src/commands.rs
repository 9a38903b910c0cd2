//! The four commands. Each `run_*` returns in-memory results (used by the
//! acceptance harness); each `cmd_*` also writes them under the output
//! directory and returns the paths written.

use std::fmt::Write as _;
use std::path::PathBuf;

use crcop_core::estimation::{
    fit_cox_csh, fit_full_mle, fit_structural, run_replication, study_targets, Coefficient,
    Estimator, FitResult, StructuralFitOptions, StudyReport,
};
use crcop_core::optim::NelderMeadOptions;
use crcop_core::sampler::{replication_seed, sample_dataset};
use crcop_core::stats::{mean, quantile};
use crcop_core::{BaselineShape, Risk};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::{EstimatorKind, FitModel, RunConfig, SweepVariable};
use crate::error::CliError;
use crate::io::{self, Cell};

/// Quadrature nodes for the predicted log hazard ratios.
const LHR_NODES: usize = 64;

pub fn run_simulate(cfg: &RunConfig) -> Result<crcop_core::Dataset, CliError> {
    let dgp = cfg.dgp_config(cfg.params(None)?, cfg.simulate_n(), cfg.seed())?;
    Ok(sample_dataset(&dgp)?)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let data = run_simulate(cfg)?;
    let dir = cfg.out_dir();
    io::ensure_dir(&dir)?;
    let path = dir.join("simulated.csv");
    io::write_dataset(&path, &data)?;
    info!(
        "{} rows, {} of risk 1, {} of risk 2, {} censored",
        data.len(),
        data.count(Some(Risk::First)),
        data.count(Some(Risk::Second)),
        data.count(None)
    );
    Ok(vec![path])
}

/// Seed of a study cell; depends only on the base seed and the cell itself,
/// so a cell reproduces whatever grid it is run in.
pub fn cell_seed(base: u64, tau: f64, n: usize) -> u64 {
    replication_seed(replication_seed(base, tau.to_bits()), n as u64)
}

/// Runs every `(τ, n)` cell of the study grid, replications in parallel.
pub fn run_study(cfg: &RunConfig) -> Result<Vec<Cell>, CliError> {
    let plan = cfg.study_plan()?;
    let estimator = match plan.estimator {
        EstimatorKind::PartialLikelihood => Estimator::PartialLikelihood,
        EstimatorKind::FullMle => Estimator::FullMle,
    };
    let mut jobs = Vec::new();
    for &tau in &plan.taus {
        let params = cfg.params(Some(1.0 / (1.0 - tau)))?;
        for &n in &plan.sizes {
            jobs.push((
                tau,
                n,
                cfg.dgp_config(params.clone(), n, cell_seed(cfg.seed(), tau, n))?,
            ));
        }
    }
    let cells = jobs
        .par_iter()
        .map(|(tau, n, dgp)| {
            let outcomes: Vec<_> = (0..plan.reps as u64)
                .into_par_iter()
                .map(|r| run_replication(dgp, r, &estimator))
                .collect();
            let report = StudyReport::from_outcomes(&study_targets(&dgp.params), &outcomes);
            if !report.failures.is_empty() {
                warn!(
                    "tau={tau} n={n}: {} of {} replications unusable (first: {})",
                    report.failures.len(),
                    report.reps,
                    report.failures[0].1
                );
            }
            Cell {
                tau: *tau,
                n: *n,
                report,
            }
        })
        .collect();
    Ok(cells)
}

pub fn cmd_study(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let cells = run_study(cfg)?;
    let dir = cfg.out_dir();
    io::ensure_dir(&dir)?;
    let mut written = Vec::new();
    for c in &cells {
        let path = io::cell_file(&dir, c.tau, c.n);
        io::write_text(&path, &io::report_csv(&c.report))?;
        written.push(path);
    }
    let plan = cfg.study_plan()?;
    let mut csv = String::new();
    let mut text = String::new();
    for &tau in &plan.taus {
        let row: Vec<&Cell> = cells.iter().filter(|c| c.tau == tau).collect();
        let body = io::combined_csv(&row);
        let mut lines = body.lines();
        if let Some(header) = lines.next().filter(|_| csv.is_empty()) {
            let _ = writeln!(csv, "tau,{header}");
        }
        for line in lines {
            let _ = writeln!(csv, "{tau},{line}");
        }
        text.push_str(&io::combined_text(tau, &row));
        text.push('\n');
    }
    for (name, body) in [("study_table.csv", &csv), ("study_table.txt", &text)] {
        let path = dir.join(name);
        io::write_text(&path, body)?;
        written.push(path);
    }
    print!("{text}");
    Ok(written)
}

/// Summary of one risk's `α̂` across the replications of a sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSummary {
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
    /// Monte Carlo standard error of the mean.
    pub mcse: f64,
    /// Covariate-averaged log hazard ratio implied by the structural model.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// `None` when no replication produced both fits.
    pub alpha: Option<[AlphaSummary; 2]>,
    pub n_fits: usize,
}

/// `values` must be non-empty.
fn summarize(values: &[f64], predicted: f64) -> AlphaSummary {
    let m = mean(values).expect("non-empty");
    let r = values.len() as f64;
    let mcse = if values.len() > 1 {
        (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (r - 1.0) / r).sqrt()
    } else {
        f64::NAN
    };
    AlphaSummary {
        mean: m,
        p5: quantile(values, 0.05).expect("non-empty"),
        p95: quantile(values, 0.95).expect("non-empty"),
        mcse,
        predicted,
    }
}

/// For every grid point: simulate with the swept quantity replaced, fit both
/// cause-specific Cox models, summarise `α̂₁₁` and `α̂₁₂`.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepPoint>, CliError> {
    let plan = cfg.sweep_plan()?;
    let mut jobs = Vec::new();
    for value in plan.grid() {
        let mut local = cfg.clone();
        match plan.variable {
            SweepVariable::SigmaZ => local.dgp.z_sd = Some(value),
            SweepVariable::Beta12 => local.dgp.beta12 = Some(vec![value]),
            SweepVariable::Gamma => local.dgp.gamma = Some(value),
        }
        let dgp = local.dgp_config(
            local.params(None)?,
            plan.n_per_rep,
            replication_seed(cfg.seed(), value.to_bits()),
        )?;
        let (zm, zs) = (dgp.z_dist.mean, dgp.z_dist.sd);
        let predicted = [
            dgp.params.average_lhr(Risk::First, zm, zs, LHR_NODES)?,
            dgp.params.average_lhr(Risk::Second, zm, zs, LHR_NODES)?,
        ];
        jobs.push((value, dgp, predicted));
    }
    let points = jobs
        .par_iter()
        .map(|(value, dgp, predicted)| {
            let fits: Vec<Option<[f64; 2]>> = (0..plan.reps_per_point as u64)
                .into_par_iter()
                .map(|r| {
                    let data = sample_dataset(&dgp.for_replication(r)).ok()?;
                    let a1 = fit_cox_csh(&data, Risk::First)
                        .ok()
                        .filter(|f| f.converged)?;
                    let a2 = fit_cox_csh(&data, Risk::Second)
                        .ok()
                        .filter(|f| f.converged)?;
                    Some([a1.coefficients[0].estimate, a2.coefficients[0].estimate])
                })
                .collect();
            let ok: Vec<[f64; 2]> = fits.into_iter().flatten().collect();
            if ok.len() < plan.reps_per_point {
                warn!(
                    "{}={value}: {} of {} replications without usable Cox fits",
                    plan.variable.name(),
                    plan.reps_per_point - ok.len(),
                    plan.reps_per_point
                );
            }
            let alpha = (!ok.is_empty()).then(|| {
                let a1: Vec<f64> = ok.iter().map(|a| a[0]).collect();
                let a2: Vec<f64> = ok.iter().map(|a| a[1]).collect();
                [summarize(&a1, predicted[0]), summarize(&a2, predicted[1])]
            });
            SweepPoint {
                value: *value,
                alpha,
                n_fits: ok.len(),
            }
        })
        .collect();
    Ok(points)
}

pub fn sweep_csv(variable: SweepVariable, points: &[SweepPoint]) -> String {
    let mut s = String::from(variable.name());
    for a in ["alpha11", "alpha12"] {
        for col in ["mean", "p5", "p95", "mcse", "predicted"] {
            let _ = write!(s, ",{a}_{col}");
        }
    }
    s.push_str(",n_fits\n");
    for p in points {
        let _ = write!(s, "{}", p.value);
        match &p.alpha {
            Some(alpha) => {
                for a in alpha {
                    let _ = write!(
                        s,
                        ",{},{},{},{},{}",
                        a.mean, a.p5, a.p95, a.mcse, a.predicted
                    );
                }
            }
            None => s.push_str(&",NA".repeat(10)),
        }
        let _ = writeln!(s, ",{}", p.n_fits);
    }
    s
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let plan = cfg.sweep_plan()?;
    let points = run_sweep(cfg)?;
    let dir = cfg.out_dir();
    io::ensure_dir(&dir)?;
    let path = dir.join(format!("sweep_{}.csv", plan.variable.name()));
    io::write_text(&path, &sweep_csv(plan.variable, &points))?;
    Ok(vec![path])
}

/// Fits of one dataset: one result, or one per risk for `cox-csh`.
pub fn run_fit(cfg: &RunConfig) -> Result<Vec<FitResult>, CliError> {
    let (input, model) = cfg.fit_plan()?;
    let data = io::read_dataset(&input)?;
    let fits = match model {
        FitModel::Structural => vec![fit_structural(&data, &StructuralFitOptions::default())?],
        FitModel::CoxCsh => vec![
            fit_cox_csh(&data, Risk::First)?,
            fit_cox_csh(&data, Risk::Second)?,
        ],
        FitModel::FullMle => {
            let shape = match cfg.dgp.weibull_shape {
                Some(shape) => BaselineShape::Weibull { shape },
                None => BaselineShape::Exponential,
            };
            vec![fit_full_mle(&data, shape, &NelderMeadOptions::default())?]
        }
    };
    Ok(fits)
}

fn fmt_num(x: f64) -> String {
    if x != 0.0 && !(1e-4..1e6).contains(&x.abs()) {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), fmt_num)
}

/// Hazard ratios only make sense for covariate coefficients.
fn is_log_hazard_ratio(name: &str) -> bool {
    name.starts_with("beta1") || name.starts_with("alpha1")
}

fn report_rows(fits: &[FitResult]) -> Vec<&Coefficient> {
    let mut rows = Vec::new();
    for f in fits {
        rows.extend(f.coefficients.iter().filter(|c| c.name != "xi"));
        rows.extend(f.derived.iter());
    }
    rows
}

pub fn fit_report_csv(fits: &[FitResult]) -> String {
    let mut s = String::from("term,coef,se,t,hr\n");
    for c in report_rows(fits) {
        let hr = is_log_hazard_ratio(&c.name).then(|| c.estimate.exp());
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            c.name,
            c.estimate,
            c.se.map_or("NA".into(), |v| v.to_string()),
            c.z_value().map_or("NA".into(), |v| v.to_string()),
            hr.map_or("NA".into(), |v| v.to_string())
        );
    }
    s
}

pub fn fit_report_text(fits: &[FitResult]) -> String {
    let mut s = format!(
        "{:<12}{:>12}{:>12}{:>12}{:>12}\n",
        "", "coef.", "s.e.", "t", "h.r."
    );
    for c in report_rows(fits) {
        let hr = is_log_hazard_ratio(&c.name).then(|| c.estimate.exp());
        let _ = writeln!(
            s,
            "{:<12}{:>12}{:>12}{:>12}{:>12}",
            c.name,
            fmt_num(c.estimate),
            fmt_opt(c.se),
            fmt_opt(c.z_value()),
            hr.map_or(String::new(), fmt_num)
        );
    }
    for f in fits {
        let _ = writeln!(
            s,
            "log-likelihood {:.6} ({} iterations)",
            f.loglik, f.iterations
        );
    }
    s
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let fits = run_fit(cfg)?;
    let text = fit_report_text(&fits);
    print!("{text}");
    for f in &fits {
        for d in &f.diagnostics {
            warn!("{d}");
        }
        if !f.converged {
            return Err(CliError::Fit(format!(
                "optimiser did not converge after {} iterations{}",
                f.iterations,
                f.diagnostics
                    .first()
                    .map_or(String::new(), |d| format!(": {d}"))
            )));
        }
        if f.covariance.is_none() {
            warn!("information matrix not positive definite; standard errors unavailable");
        }
    }
    let dir = cfg.out_dir();
    io::ensure_dir(&dir)?;
    let csv = dir.join("fit.csv");
    let txt = dir.join("fit.txt");
    io::write_text(&csv, &fit_report_csv(&fits))?;
    io::write_text(&txt, &text)?;
    Ok(vec![csv, txt])
}
