//! Run configuration: one JSON document with optional blocks per command.
//! Every field is optional; missing values fall back to the simulation
//! design, with quick defaults unless `full` asks for full-size runs.

use std::path::{Path, PathBuf};

use crcop_core::sampler::{CovariateDist, DgpConfig, PairMethod};
use crcop_core::{BaselineShape, StructuralParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Full-size replication counts and sample sizes.
    pub full: Option<bool>,
    #[serde(default)]
    pub dgp: DgpSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub fit: FitSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSection {
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub beta01: Option<f64>,
    pub beta11: Option<Vec<f64>>,
    pub beta12: Option<Vec<f64>>,
    /// Weibull shape of the baselines; exponential when absent.
    pub weibull_shape: Option<f64>,
    pub z_mean: Option<f64>,
    pub z_sd: Option<f64>,
    pub censoring_rate: Option<f64>,
    pub n: Option<usize>,
    pub sampler: Option<SamplerKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    Frailty,
    Conditional,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub reps: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub taus: Option<Vec<f64>>,
    pub estimator: Option<EstimatorKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    PartialLikelihood,
    FullMle,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Option<SweepVariable>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    pub reps_per_point: Option<usize>,
    pub n_per_rep: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepVariable {
    SigmaZ,
    Beta12,
    Gamma,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SigmaZ => "sigma_z",
            SweepVariable::Beta12 => "beta12",
            SweepVariable::Gamma => "gamma",
        }
    }

    /// Default grid `(from, to, step)`.
    fn default_grid(self) -> (f64, f64, f64) {
        match self {
            SweepVariable::SigmaZ => (0.2, 14.0, 0.2),
            SweepVariable::Beta12 => (-4.0, 4.0, 0.2),
            SweepVariable::Gamma => (-3.0, 3.0, 0.2),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub input: Option<PathBuf>,
    pub model: Option<FitModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Structural,
    CoxCsh,
    FullMle,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn is_full(&self) -> bool {
        self.full.unwrap_or(false)
    }

    /// Structural parameters of the data-generating process, with `θ`
    /// optionally replaced.
    pub fn params(&self, theta: Option<f64>) -> Result<StructuralParams, CliError> {
        let d = &self.dgp;
        let shape = match d.weibull_shape {
            Some(shape) => BaselineShape::Weibull { shape },
            None => BaselineShape::Exponential,
        };
        let beta11 = d.beta11.clone().unwrap_or_else(|| vec![1.0]);
        let beta12 = d.beta12.clone().unwrap_or_else(|| vec![2.0]);
        if beta11.len() != 1 || beta12.len() != 1 {
            return Err(CliError::Config(
                "simulation supports exactly one covariate (beta11, beta12 of length 1)".into(),
            ));
        }
        Ok(StructuralParams::new(
            theta.or(d.theta).unwrap_or(2.0),
            d.gamma.unwrap_or(0.5),
            beta11,
            beta12,
            d.beta01.unwrap_or(1.0),
            shape,
        )?)
    }

    pub fn dgp_config(
        &self,
        params: StructuralParams,
        n: usize,
        seed: u64,
    ) -> Result<DgpConfig, CliError> {
        let cfg = DgpConfig {
            params,
            n,
            z_dist: CovariateDist {
                mean: self.dgp.z_mean.unwrap_or(0.0),
                sd: self.dgp.z_sd.unwrap_or(2.0),
            },
            censoring_rate: self.dgp.censoring_rate,
            seed,
            method: match self.dgp.sampler.unwrap_or(SamplerKind::Frailty) {
                SamplerKind::Frailty => PairMethod::Frailty,
                SamplerKind::Conditional => PairMethod::ConditionalInversion,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn simulate_n(&self) -> usize {
        self.dgp.n.unwrap_or(100)
    }

    pub fn study_plan(&self) -> Result<StudyPlan, CliError> {
        let s = &self.study;
        let plan = StudyPlan {
            reps: s.reps.unwrap_or(if self.is_full() { 500 } else { 100 }),
            sizes: s.sizes.clone().unwrap_or_else(|| vec![100, 200, 400]),
            taus: s.taus.clone().unwrap_or_else(|| vec![0.1, 0.5, 0.9]),
            estimator: s.estimator.unwrap_or(EstimatorKind::PartialLikelihood),
        };
        if plan.reps == 0
            || plan.sizes.is_empty()
            || plan.taus.is_empty()
            || plan.sizes.contains(&0)
        {
            return Err(CliError::Config(
                "study needs reps >= 1 and non-empty sizes/taus".into(),
            ));
        }
        if let Some(t) = plan.taus.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(CliError::Config(format!(
                "Kendall's tau must lie in [0, 1), got {t}"
            )));
        }
        if plan.estimator == EstimatorKind::FullMle && self.dgp.censoring_rate.is_some() {
            return Err(CliError::Config(
                "the full-MLE estimator needs uncensored data".into(),
            ));
        }
        Ok(plan)
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn sweep_plan(&self) -> Result<SweepPlan, CliError> {
        let s = &self.sweep;
        let variable = s.variable.unwrap_or(SweepVariable::SigmaZ);
        let (from0, to0, step0) = variable.default_grid();
        let (from, to, step) = (
            s.from.unwrap_or(from0),
            s.to.unwrap_or(to0),
            s.step.unwrap_or(step0),
        );
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::Config(format!(
                "sweep step must be positive, got {step}"
            )));
        }
        if !(from < to) {
            return Err(CliError::Config(format!(
                "sweep needs from < to, got {from} .. {to}"
            )));
        }
        let full = self.is_full();
        let plan = SweepPlan {
            variable,
            from,
            to,
            step,
            reps_per_point: s.reps_per_point.unwrap_or(if full { 100 } else { 20 }),
            n_per_rep: s.n_per_rep.unwrap_or(if full { 5000 } else { 2000 }),
        };
        if plan.reps_per_point == 0 || plan.n_per_rep == 0 {
            return Err(CliError::Config(
                "sweep needs reps_per_point >= 1 and n_per_rep >= 1".into(),
            ));
        }
        Ok(plan)
    }

    pub fn fit_plan(&self) -> Result<(PathBuf, FitModel), CliError> {
        let input = self.fit.input.clone().ok_or_else(|| {
            CliError::Config("fit needs an input dataset (fit.input or --input)".into())
        })?;
        if !input.exists() {
            return Err(CliError::Config(format!(
                "input {} does not exist",
                input.display()
            )));
        }
        Ok((input, self.fit.model.unwrap_or(FitModel::Structural)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub reps: usize,
    pub sizes: Vec<usize>,
    pub taus: Vec<f64>,
    pub estimator: EstimatorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub reps_per_point: usize,
    pub n_per_rep: usize,
}

impl SweepPlan {
    /// Grid points `from + k·step` up to `to` (inclusive within rounding).
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let v = self.from + k as f64 * self.step;
                // keep printed grid values clean, e.g. 0.6 rather than 0.6000000000000001
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}
